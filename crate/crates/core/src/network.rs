//! Electrical network model, JSON ingestion and switch topologies.
//!
//! A [`Network`] is validated on construction and immutable afterwards. All
//! quantities are per-unit on `base_mva`; files may instead declare
//! `"units": "si"` (siemens, MW, Mvar, MVA on a `base_kv` voltage base) and
//! are converted at load time.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{EdgeId, EdgeSet, Graph, GraphError};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bus {
    pub id: usize,
    pub v_min: f64,
    pub v_max: f64,
    #[serde(default)]
    pub is_ref: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v_ref: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Line {
    pub id: EdgeId,
    pub from: usize,
    pub to: usize,
    /// Series conductance.
    pub g: f64,
    /// Series susceptance.
    pub b: f64,
    /// Shunt conductance at each end.
    #[serde(default)]
    pub g_sh: f64,
    /// Shunt susceptance at each end.
    #[serde(default)]
    pub b_sh: f64,
    /// Apparent-power rating.
    pub s_max: f64,
    #[serde(default)]
    pub switchable: bool,
    #[serde(default = "closed_by_default")]
    pub baseline_closed: bool,
}

fn closed_by_default() -> bool {
    true
}

/// Constant-PQ consumer, passive sign convention (negative `p` exports).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Load {
    pub bus: usize,
    pub p: f64,
    pub q: f64,
}

/// External-grid connection.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Source {
    pub bus: usize,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Units {
    #[default]
    Pu,
    Si,
}

/// On-disk layout of a network file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkData {
    pub name: String,
    pub base_mva: f64,
    #[serde(default, skip_serializing_if = "is_pu")]
    pub units: Units,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base_kv: Option<f64>,
    pub buses: Vec<Bus>,
    pub lines: Vec<Line>,
    #[serde(default)]
    pub loads: Vec<Load>,
    pub sources: Vec<Source>,
}

fn is_pu(u: &Units) -> bool {
    *u == Units::Pu
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ValidationError {
    #[error("network has no buses")]
    Empty,
    #[error("bus ids must be 0..{0} without duplicates")]
    BusIds(usize),
    #[error("bad voltage bounds at bus {0}")]
    BadBounds(usize),
    #[error("no reference bus")]
    NoReferenceBus,
    #[error("multiple reference buses")]
    MultipleReferenceBuses,
    #[error("reference bus {0} needs v_ref within its bounds")]
    BadReferenceVoltage(usize),
    #[error("duplicate edge id {0}")]
    DuplicateEdge(usize),
    #[error("line ids must be 0..{0}")]
    LineIds(usize),
    #[error("line {line} refers to unknown bus {bus}")]
    UnknownBus { line: usize, bus: usize },
    #[error("line {0} is a self-loop")]
    SelfLoop(usize),
    #[error("parallel edge between buses {0} and {1}")]
    ParallelEdge(usize, usize),
    #[error("line {0} has invalid parameters")]
    BadLine(usize),
    #[error("load at bus {0} is invalid")]
    BadLoad(usize),
    #[error("exactly one source at the reference bus is supported, found {0}")]
    BadSources(usize),
    #[error("network is disconnected")]
    Disconnected,
    #[error("non-switchable lines close a cycle; no radial topology exists")]
    FixedCycle,
    #[error("si units require a positive base_kv")]
    MissingBaseKv,
    #[error("base_mva must be positive")]
    BadBase,
}

#[derive(Debug, Error)]
pub enum NetworkError {
    #[error("reading {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("validation error: {0}")]
    Validation(#[from] ValidationError),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Network {
    pub name: String,
    pub base_mva: f64,
    buses: Vec<Bus>,
    lines: Vec<Line>,
    loads: Vec<Load>,
    sources: Vec<Source>,
    graph: Graph,
    ref_bus: usize,
}

impl Network {
    pub fn from_data(mut data: NetworkData) -> Result<Self, ValidationError> {
        if !(data.base_mva.is_finite() && data.base_mva > 0.0) {
            return Err(ValidationError::BadBase);
        }
        if data.units == Units::Si {
            to_per_unit(&mut data)?;
        }
        let NetworkData {
            name,
            base_mva,
            mut buses,
            mut lines,
            loads,
            sources,
            ..
        } = data;

        let n = buses.len();
        if n == 0 {
            return Err(ValidationError::Empty);
        }
        buses.sort_by_key(|b| b.id);
        if buses.iter().enumerate().any(|(i, b)| b.id != i) {
            return Err(ValidationError::BusIds(n));
        }
        for b in &buses {
            if !(b.v_min.is_finite() && b.v_max.is_finite() && 0.0 < b.v_min && b.v_min <= b.v_max)
            {
                return Err(ValidationError::BadBounds(b.id));
            }
        }
        let refs: Vec<usize> = buses.iter().filter(|b| b.is_ref).map(|b| b.id).collect();
        let ref_bus = match refs.as_slice() {
            [] => return Err(ValidationError::NoReferenceBus),
            [r] => *r,
            _ => return Err(ValidationError::MultipleReferenceBuses),
        };
        match buses[ref_bus].v_ref {
            Some(v) if v.is_finite() && buses[ref_bus].v_min <= v && v <= buses[ref_bus].v_max => {}
            _ => return Err(ValidationError::BadReferenceVoltage(ref_bus)),
        }

        let m = lines.len();
        lines.sort_by_key(|l| l.id);
        for w in lines.windows(2) {
            if w[0].id == w[1].id {
                return Err(ValidationError::DuplicateEdge(w[0].id.0));
            }
        }
        if lines.iter().enumerate().any(|(i, l)| l.id.0 != i) {
            return Err(ValidationError::LineIds(m));
        }
        for l in &lines {
            for bus in [l.from, l.to] {
                if bus >= n {
                    return Err(ValidationError::UnknownBus { line: l.id.0, bus });
                }
            }
            if l.from == l.to {
                return Err(ValidationError::SelfLoop(l.id.0));
            }
            let finite = [l.g, l.b, l.g_sh, l.b_sh, l.s_max]
                .iter()
                .all(|x| x.is_finite());
            if !finite || l.g < 0.0 || l.s_max <= 0.0 {
                return Err(ValidationError::BadLine(l.id.0));
            }
        }
        let graph =
            Graph::new(n, lines.iter().map(|l| (l.from, l.to)).collect()).map_err(|e| match e {
                GraphError::ParallelEdge(u, v) => ValidationError::ParallelEdge(u, v),
                GraphError::SelfLoop(_) => unreachable!("self-loops checked above"),
                other => unreachable!("unexpected graph error {other}"),
            })?;

        for load in &loads {
            if load.bus >= n || !load.p.is_finite() || !load.q.is_finite() {
                return Err(ValidationError::BadLoad(load.bus));
            }
        }
        if sources.len() != 1 || sources[0].bus != ref_bus {
            return Err(ValidationError::BadSources(sources.len()));
        }
        if !graph.is_connected(&graph.all_edges()) {
            return Err(ValidationError::Disconnected);
        }

        let network = Self {
            name,
            base_mva,
            buses,
            lines,
            loads,
            sources,
            graph,
            ref_bus,
        };
        if !network.graph.is_acyclic(&network.fixed_lines()) {
            return Err(ValidationError::FixedCycle);
        }
        Ok(network)
    }

    pub fn from_json(text: &str) -> Result<Self, NetworkError> {
        let data: NetworkData = serde_json::from_str(text)?;
        Ok(Self::from_data(data)?)
    }

    pub fn to_data(&self) -> NetworkData {
        NetworkData {
            name: self.name.clone(),
            base_mva: self.base_mva,
            units: Units::Pu,
            base_kv: None,
            buses: self.buses.clone(),
            lines: self.lines.clone(),
            loads: self.loads.clone(),
            sources: self.sources.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_data()).expect("network data serializes")
    }

    pub fn buses(&self) -> &[Bus] {
        &self.buses
    }

    pub fn lines(&self) -> &[Line] {
        &self.lines
    }

    pub fn line(&self, id: EdgeId) -> &Line {
        &self.lines[id.0]
    }

    pub fn loads(&self) -> &[Load] {
        &self.loads
    }

    pub fn sources(&self) -> &[Source] {
        &self.sources
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn bus_count(&self) -> usize {
        self.buses.len()
    }

    pub fn line_count(&self) -> usize {
        self.lines.len()
    }

    pub fn ref_bus(&self) -> usize {
        self.ref_bus
    }

    pub fn v_ref(&self) -> f64 {
        self.buses[self.ref_bus].v_ref.expect("validated")
    }

    /// Lines carrying a switch.
    pub fn switchable_lines(&self) -> EdgeSet {
        EdgeSet::from_ids(
            self.line_count(),
            self.lines.iter().filter(|l| l.switchable).map(|l| l.id),
        )
    }

    /// Lines without a switch; always energized.
    pub fn fixed_lines(&self) -> EdgeSet {
        self.switchable_lines().complement()
    }

    /// Aggregated (p, q) draw per bus.
    pub fn bus_loads(&self) -> Vec<(f64, f64)> {
        let mut out = vec![(0.0, 0.0); self.bus_count()];
        for l in &self.loads {
            out[l.bus].0 += l.p;
            out[l.bus].1 += l.q;
        }
        out
    }

    pub fn total_load_p(&self) -> f64 {
        self.loads.iter().map(|l| l.p).sum()
    }

    /// Graph over all buses and lines, plus the energized lines under `t`.
    pub fn to_graph(&self, t: &Topology) -> (&Graph, EdgeSet) {
        (&self.graph, t.active(self))
    }
}

fn to_per_unit(data: &mut NetworkData) -> Result<(), ValidationError> {
    let kv = data
        .base_kv
        .filter(|k| k.is_finite() && *k > 0.0)
        .ok_or(ValidationError::MissingBaseKv)?;
    let z_base = kv * kv / data.base_mva;
    for l in &mut data.lines {
        l.g *= z_base;
        l.b *= z_base;
        l.g_sh *= z_base;
        l.b_sh *= z_base;
        l.s_max /= data.base_mva;
    }
    for load in &mut data.loads {
        load.p /= data.base_mva;
        load.q /= data.base_mva;
    }
    data.units = Units::Pu;
    data.base_kv = None;
    Ok(())
}

pub fn load_network(path: impl AsRef<Path>) -> Result<Network, NetworkError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| NetworkError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Network::from_json(&text)
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TopologyError {
    #[error("line {0} is not switchable")]
    NotSwitchable(usize),
    #[error("line {0} does not exist")]
    UnknownLine(usize),
}

/// Closed switches. Lines without a switch are implicitly closed and never
/// appear here.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Topology {
    closed: EdgeSet,
}

#[derive(Serialize, Deserialize)]
struct TopologyData {
    closed: Vec<usize>,
}

impl Serialize for Topology {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        TopologyData {
            closed: self.closed.ids(),
        }
        .serialize(serializer)
    }
}

impl Topology {
    pub fn new(n: &Network, closed: EdgeSet) -> Result<Self, TopologyError> {
        assert_eq!(closed.universe(), n.line_count());
        if let Some(bad) = closed.difference(&n.switchable_lines()).iter().next() {
            return Err(TopologyError::NotSwitchable(bad.0));
        }
        Ok(Self { closed })
    }

    pub fn from_ids(n: &Network, ids: &[usize]) -> Result<Self, TopologyError> {
        if let Some(&bad) = ids.iter().find(|&&i| i >= n.line_count()) {
            return Err(TopologyError::UnknownLine(bad));
        }
        Self::new(
            n,
            EdgeSet::from_ids(n.line_count(), ids.iter().copied().map(EdgeId)),
        )
    }

    /// Every switch closed.
    pub fn all_closed(n: &Network) -> Self {
        Self {
            closed: n.switchable_lines(),
        }
    }

    pub fn closed(&self) -> &EdgeSet {
        &self.closed
    }

    pub fn is_closed(&self, n: &Network, line: EdgeId) -> bool {
        !n.line(line).switchable || self.closed.contains(line)
    }

    /// Energized lines: fixed lines plus closed switches.
    pub fn active(&self, n: &Network) -> EdgeSet {
        n.fixed_lines().union(&self.closed)
    }

    pub fn open_switches(&self, n: &Network) -> EdgeSet {
        n.switchable_lines().difference(&self.closed)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("topology serializes")
    }

    pub fn from_json(n: &Network, text: &str) -> Result<Self, NetworkError> {
        let data: TopologyData = serde_json::from_str(text)?;
        Self::from_ids(n, &data.closed)
            .map_err(|e| NetworkError::Parse(serde::de::Error::custom(e.to_string())))
    }
}

/// Switch states recorded as the network's normal operating point.
pub fn baseline_topology(n: &Network) -> Topology {
    Topology {
        closed: EdgeSet::from_ids(
            n.line_count(),
            n.lines
                .iter()
                .filter(|l| l.switchable && l.baseline_closed)
                .map(|l| l.id),
        ),
    }
}
