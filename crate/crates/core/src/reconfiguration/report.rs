use std::io;

use serde::Serialize;

use super::SolveResult;
use crate::power_flow::PfSolution;

pub const CSV_HEADER: [&str; 11] = [
    "case",
    "model",
    "f",
    "p_loss",
    "delta_loss_pct",
    "gamma_v",
    "gamma_s",
    "ct",
    "nodes",
    "leaves",
    "proven_optimal",
];

/// One results-table row. Power quantities are per-unit.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportRow {
    pub case: String,
    pub model: String,
    pub f: f64,
    pub p_loss: f64,
    pub delta_loss_pct: f64,
    pub gamma_v: f64,
    pub gamma_s: f64,
    /// Solve wall time in seconds.
    pub ct: f64,
    pub nodes: usize,
    pub leaves: usize,
    pub proven_optimal: bool,
}

/// Percentage loss reduction; zero when the baseline has no losses.
pub fn delta_loss_pct(baseline_loss: f64, loss: f64) -> f64 {
    if baseline_loss > 0.0 {
        100.0 * (baseline_loss - loss) / baseline_loss
    } else {
        0.0
    }
}

pub fn report(result: &SolveResult, baseline: &PfSolution) -> ReportRow {
    ReportRow {
        case: result.case.clone(),
        model: result.model.to_string(),
        f: result.f_obj,
        p_loss: result.p_loss,
        delta_loss_pct: delta_loss_pct(baseline.p_loss, result.p_loss),
        gamma_v: result.gamma_v_max,
        gamma_s: result.gamma_s_max,
        ct: result.stats.wall_time,
        nodes: result.stats.nodes_explored,
        leaves: result.stats.leaves_evaluated,
        proven_optimal: result.proven_optimal,
    }
}

impl ReportRow {
    /// Fixed-precision fields; `ct` is rounded to tenths of a second.
    fn fields(&self) -> [String; 11] {
        [
            self.case.clone(),
            self.model.clone(),
            format!("{:.10}", self.f),
            format!("{:.10}", self.p_loss),
            format!("{:.4}", self.delta_loss_pct),
            format!("{:.6}", self.gamma_v),
            format!("{:.6}", self.gamma_s),
            format!("{:.1}", self.ct),
            self.nodes.to_string(),
            self.leaves.to_string(),
            self.proven_optimal.to_string(),
        ]
    }
}

pub fn write_csv<W: io::Write>(rows: &[ReportRow], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for row in rows {
        w.write_record(row.fields())?;
    }
    w.flush()?;
    Ok(())
}
