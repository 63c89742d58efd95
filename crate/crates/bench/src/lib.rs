//! Benchmark harness for the MCTS router: corpus runs, the greedy baseline,
//! random circuits and scaling sweeps.

pub mod bench;
pub mod greedy;
pub mod random;
pub mod runner;
pub mod scaling;

use std::io::Write;

use anyhow::Result;
use qct_core::TransformResult;

/// Per-decision selection depths as CSV: `decision,min,mean,max`.
pub fn write_selection_depths<W: Write>(r: &TransformResult, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["decision", "min", "mean", "max"])?;
    for (i, d) in r.selection_depths.iter().enumerate() {
        w.write_record([
            i.to_string(),
            d.min.to_string(),
            format!("{:.3}", d.mean),
            d.max.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
