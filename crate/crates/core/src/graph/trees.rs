use std::collections::VecDeque;

use super::{DisjointSets, EdgeId, EdgeSet, Graph, GraphError};

/// Default bound on the number of spanning trees [`enumerate_spanning_trees`]
/// will materialize.
pub const DEFAULT_TREE_CAP: usize = 1_000_000;

/// Breadth-first spanning tree rooted at vertex 0, plus its chords.
pub fn spanning_tree(g: &Graph) -> Result<(EdgeSet, EdgeSet), GraphError> {
    let (tree, _) = bfs_tree(g)?;
    let chords = tree.complement();
    Ok((tree, chords))
}

/// Parent links of the breadth-first tree: `parent[v] = (edge, parent vertex)`.
pub(crate) type ParentLinks = Vec<Option<(EdgeId, usize)>>;

pub(crate) fn bfs_tree(g: &Graph) -> Result<(EdgeSet, ParentLinks), GraphError> {
    let n = g.vertex_count();
    let mut tree = g.no_edges();
    let mut parent = vec![None; n];
    if n == 0 {
        return Ok((tree, parent));
    }
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([0]);
    seen[0] = true;
    let mut reached = 1;
    while let Some(u) = queue.pop_front() {
        for &(e, w) in g.neighbours(u) {
            if !seen[w] {
                seen[w] = true;
                reached += 1;
                parent[w] = Some((e, u));
                tree.insert(e);
                queue.push_back(w);
            }
        }
    }
    if reached != n {
        return Err(GraphError::NotConnected);
    }
    Ok((tree, parent))
}

pub fn enumerate_spanning_trees(g: &Graph) -> Result<Vec<EdgeSet>, GraphError> {
    enumerate_spanning_trees_with_cap(g, DEFAULT_TREE_CAP)
}

/// Every spanning tree exactly once, by include/exclude search over edges in
/// id order. Including an edge requires it to join two components; excluding
/// it requires the remaining candidate edges to keep the graph connected.
pub fn enumerate_spanning_trees_with_cap(
    g: &Graph,
    cap: usize,
) -> Result<Vec<EdgeSet>, GraphError> {
    if !g.is_connected(&g.all_edges()) {
        return Err(GraphError::NotConnected);
    }
    let mut out = Vec::new();
    if g.vertex_count() <= 1 {
        out.push(g.no_edges());
        return Ok(out);
    }
    let mut search = TreeSearch {
        g,
        cap,
        out: &mut out,
    };
    search.descend(
        0,
        g.no_edges(),
        g.all_edges(),
        DisjointSets::new(g.vertex_count()),
    )?;
    Ok(out)
}

struct TreeSearch<'a> {
    g: &'a Graph,
    cap: usize,
    out: &'a mut Vec<EdgeSet>,
}

impl TreeSearch<'_> {
    /// `candidates` holds included edges plus every edge not yet decided.
    fn descend(
        &mut self,
        next: usize,
        included: EdgeSet,
        candidates: EdgeSet,
        dsu: DisjointSets,
    ) -> Result<(), GraphError> {
        if included.len() + 1 == self.g.vertex_count() {
            if self.out.len() == self.cap {
                return Err(GraphError::TooManyTrees { cap: self.cap });
            }
            self.out.push(included);
            return Ok(());
        }
        if next == self.g.edge_count() {
            return Ok(());
        }
        let e = EdgeId(next);
        let (u, v) = self.g.endpoints(e);

        let mut joined = dsu.clone();
        if joined.union(u, v) {
            let mut with = included.clone();
            with.insert(e);
            self.descend(next + 1, with, candidates.clone(), joined)?;
        }

        let mut without = candidates;
        without.remove(e);
        if self.g.is_connected(&without) {
            self.descend(next + 1, included, without, dsu)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::*;
    use super::*;

    #[test]
    fn spanning_tree_of_tree_is_itself() {
        let g = star(3);
        let (tree, chords) = spanning_tree(&g).unwrap();
        assert_eq!(tree, g.all_edges());
        assert!(chords.is_empty());
    }

    #[test]
    fn spanning_tree_sizes() {
        let (tree, chords) = spanning_tree(&triangle()).unwrap();
        assert_eq!((tree.len(), chords.len()), (2, 1));
        let k4 = complete(4);
        let (tree, chords) = spanning_tree(&k4).unwrap();
        assert_eq!((tree.len(), chords.len()), (3, 3));
        assert!(k4.is_tree(&tree));
    }

    #[test]
    fn disconnected_input_is_rejected() {
        let g = Graph::new(4, vec![(0, 1), (2, 3)]).unwrap();
        assert_eq!(spanning_tree(&g), Err(GraphError::NotConnected));
        assert_eq!(enumerate_spanning_trees(&g), Err(GraphError::NotConnected));
    }

    #[test]
    fn tree_counts() {
        let p = path(4);
        assert_eq!(enumerate_spanning_trees(&p).unwrap(), vec![p.all_edges()]);
        assert_eq!(enumerate_spanning_trees(&triangle()).unwrap().len(), 3);
        // Cayley: n^(n-2)
        assert_eq!(enumerate_spanning_trees(&complete(4)).unwrap().len(), 16);
        assert_eq!(enumerate_spanning_trees(&complete(5)).unwrap().len(), 125);
    }

    #[test]
    fn tree_cap_is_enforced() {
        assert_eq!(
            enumerate_spanning_trees_with_cap(&complete(4), 10),
            Err(GraphError::TooManyTrees { cap: 10 })
        );
    }
}
