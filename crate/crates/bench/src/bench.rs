//! Corpus benchmarking: best-of-k MCTS per circuit against the greedy
//! baseline, written as CSV.

use std::io::Write;

use anyhow::Result;
use rayon::prelude::*;

use qct_core::circuit::{circuit_depth, decompose_swaps};
use qct_core::{ArchGraph, Circuit, MctsParams, Objective, QubitMapping};

use crate::greedy::greedy_route;
use crate::runner::{best_index, run_trials, verify_result};

#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub arch: ArchGraph,
    pub params: MctsParams,
    /// Trials per circuit, best kept.
    pub trials: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub name: String,
    pub input_cnots: usize,
    pub input_depth: usize,
    pub added_cnots: usize,
    pub added_depth: usize,
    pub greedy_added_cnots: usize,
    pub greedy_added_depth: usize,
    /// Summed wall time of all trials, in seconds.
    pub time: f64,
    /// Fallbacks of the best trial.
    pub fallbacks: usize,
}

impl BenchRow {
    /// `(n_base - n_ours) / n_base` on the objective's metric; `None` when the
    /// baseline adds nothing.
    pub fn improvement(&self, objective: Objective) -> Option<f64> {
        improvement(self.metric(objective), self.greedy_metric(objective))
    }

    fn metric(&self, objective: Objective) -> usize {
        match objective {
            Objective::Size => self.added_cnots,
            Objective::Depth => self.added_depth,
        }
    }

    fn greedy_metric(&self, objective: Objective) -> usize {
        match objective {
            Objective::Size => self.greedy_added_cnots,
            Objective::Depth => self.greedy_added_depth,
        }
    }
}

pub fn improvement(ours: usize, base: usize) -> Option<f64> {
    (base > 0).then(|| (base as f64 - ours as f64) / base as f64)
}

/// Routes one circuit (naive mapping), verifying every output.
pub fn bench_circuit(name: &str, lc: &Circuit, cfg: &BenchConfig) -> Result<BenchRow> {
    let initial = QubitMapping::naive(lc.qubit_count(), cfg.arch.vertex_count())?;
    let results = run_trials(lc, &cfg.arch, &initial, &cfg.params, cfg.trials)?;
    for r in &results {
        verify_result(lc, &cfg.arch, &initial, r)?;
    }
    let best = &results[best_index(&results, cfg.params.objective).expect("trials >= 1")];
    let greedy = greedy_route(lc, &cfg.arch, &initial, cfg.params.g_sim)?;
    verify_result(lc, &cfg.arch, &initial, &greedy)?;
    Ok(BenchRow {
        name: name.to_string(),
        input_cnots: decompose_swaps(lc).cnot_count(),
        input_depth: circuit_depth(lc),
        added_cnots: best.added_cnots,
        added_depth: best.added_depth,
        greedy_added_cnots: greedy.added_cnots,
        greedy_added_depth: greedy.added_depth,
        time: results.iter().map(|r| r.wall_time).sum(),
        fallbacks: best.fallbacks,
    })
}

/// Benchmarks every circuit in parallel. Output keeps input order; failures
/// are logged and skipped.
pub fn run_bench(inputs: &[(String, Circuit)], cfg: &BenchConfig) -> Vec<BenchRow> {
    let rows: Vec<Result<BenchRow>> = inputs
        .par_iter()
        .map(|(name, lc)| bench_circuit(name, lc, cfg))
        .collect();
    rows.into_iter()
        .zip(inputs)
        .filter_map(|(row, (name, _))| row.map_err(|e| log::error!("{name}: {e:#}")).ok())
        .collect()
}

pub const HEADER: [&str; 10] = [
    "name",
    "input_cnots",
    "input_depth",
    "added_cnots",
    "added_depth",
    "greedy_baseline_added_cnots",
    "greedy_baseline_added_depth",
    "improvement_vs_greedy",
    "time_s",
    "fallbacks",
];

/// Index of the wall-time column.
pub const TIME_COLUMN: usize = 8;

/// Writes one row per circuit and a `TOTAL` footer whose counts are the
/// column sums.
pub fn write_csv<W: Write>(rows: &[BenchRow], objective: Objective, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HEADER)?;
    for r in rows {
        w.write_record(record(r, objective))?;
    }
    let total = BenchRow {
        name: "TOTAL".into(),
        input_cnots: rows.iter().map(|r| r.input_cnots).sum(),
        input_depth: rows.iter().map(|r| r.input_depth).sum(),
        added_cnots: rows.iter().map(|r| r.added_cnots).sum(),
        added_depth: rows.iter().map(|r| r.added_depth).sum(),
        greedy_added_cnots: rows.iter().map(|r| r.greedy_added_cnots).sum(),
        greedy_added_depth: rows.iter().map(|r| r.greedy_added_depth).sum(),
        time: rows.iter().map(|r| r.time).sum(),
        fallbacks: rows.iter().map(|r| r.fallbacks).sum(),
    };
    w.write_record(record(&total, objective))?;
    w.flush()?;
    Ok(())
}

fn record(r: &BenchRow, objective: Objective) -> [String; 10] {
    [
        r.name.clone(),
        r.input_cnots.to_string(),
        r.input_depth.to_string(),
        r.added_cnots.to_string(),
        r.added_depth.to_string(),
        r.greedy_added_cnots.to_string(),
        r.greedy_added_depth.to_string(),
        r.improvement(objective)
            .map_or(String::new(), |v| format!("{v:.4}")),
        format!("{:.3}", r.time),
        r.fallbacks.to_string(),
    ]
}
