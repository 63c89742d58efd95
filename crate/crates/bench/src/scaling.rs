//! Runtime scaling sweeps over random circuits.

use std::io::Write;

use anyhow::Result;

use qct_core::{transform, ArchGraph, MctsParams, QubitMapping};

use crate::random::random_circuit;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sweep {
    /// Fixed qubit count, varying CNOT count.
    Cnots,
    /// Fixed CNOT count, varying qubit count.
    Qubits,
}

impl Sweep {
    pub fn name(self) -> &'static str {
        match self {
            Sweep::Cnots => "cnots",
            Sweep::Qubits => "qubits",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScalingPoint {
    pub sweep: Sweep,
    pub qubits: usize,
    pub cnots: usize,
    pub circuits: usize,
    /// Mean transform wall time in seconds.
    pub mean_time: f64,
    pub mean_added_cnots: f64,
}

/// `(qubits, cnots)` of each point: 50..=500 CNOTs on 10 qubits, or 5..=14
/// qubits with 500 CNOTs.
pub fn sweep_points(sweep: Sweep) -> Vec<(usize, usize)> {
    match sweep {
        Sweep::Cnots => (1..=10).map(|k| (10, 50 * k)).collect(),
        Sweep::Qubits => (5..=14).map(|q| (q, 500)).collect(),
    }
}

/// Circuit `i` of a point is seeded from `seed`, the point and `i`.
pub fn circuit_seed(seed: u64, qubits: usize, cnots: usize, i: usize) -> u64 {
    seed ^ ((qubits as u64) << 40 | (cnots as u64) << 16 | i as u64)
}

/// Routes `circuits` random circuits one after another and averages their
/// wall time. Runs sequentially so timings are not distorted by contention.
pub fn run_point(
    sweep: Sweep,
    (qubits, cnots): (usize, usize),
    circuits: usize,
    ag: &ArchGraph,
    params: &MctsParams,
) -> Result<ScalingPoint> {
    let initial = QubitMapping::naive(qubits, ag.vertex_count())?;
    let mut time = 0.0;
    let mut added = 0;
    for i in 0..circuits {
        let seed = circuit_seed(params.seed, qubits, cnots, i);
        let lc = random_circuit(qubits, cnots, seed);
        let r = transform(
            &lc,
            ag,
            &initial,
            &MctsParams {
                seed,
                ..params.clone()
            },
        )?;
        time += r.wall_time;
        added += r.added_cnots;
    }
    Ok(ScalingPoint {
        sweep,
        qubits,
        cnots,
        circuits,
        mean_time: time / circuits as f64,
        mean_added_cnots: added as f64 / circuits as f64,
    })
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let n = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Slope of mean runtime against the swept variable.
pub fn runtime_slope(points: &[ScalingPoint]) -> f64 {
    let xy: Vec<(f64, f64)> = points
        .iter()
        .map(|p| {
            let x = match p.sweep {
                Sweep::Cnots => p.cnots,
                Sweep::Qubits => p.qubits,
            };
            (x as f64, p.mean_time)
        })
        .collect();
    loglog_slope(&xy)
}

pub fn write_csv<W: Write>(points: &[ScalingPoint], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "sweep",
        "qubits",
        "cnots",
        "circuits",
        "mean_time_s",
        "mean_added_cnots",
    ])?;
    for p in points {
        w.write_record([
            p.sweep.name().to_string(),
            p.qubits.to_string(),
            p.cnots.to_string(),
            p.circuits.to_string(),
            format!("{:.6}", p.mean_time),
            format!("{:.2}", p.mean_added_cnots),
        ])?;
    }
    w.flush()?;
    Ok(())
}
