//! Monte Carlo tree search over routing states.

mod rollout;
mod tree;

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use rollout::{impact_factor, sample_swap, scale, swap_distribution};
pub use tree::{Node, NodeId, SearchTree};

use crate::arch::ArchGraph;
use crate::circuit::{circuit_depth, decompose_swaps, Circuit, Gate};
use crate::state::{QubitMapping, RoutingContext, StateError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Objective {
    Size,
    Depth,
}

impl std::str::FromStr for Objective {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "size" => Ok(Objective::Size),
            "depth" => Ok(Objective::Depth),
            other => Err(format!(
                "unknown objective `{other}` (expected size or depth)"
            )),
        }
    }
}

impl std::fmt::Display for Objective {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Objective::Size => "size",
            Objective::Depth => "depth",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MctsParams {
    /// Playouts per decision.
    pub n_bp: usize,
    /// Exploration weight.
    pub c: f64,
    /// Rollout window size in gates.
    pub g_sim: usize,
    /// Rollouts per simulation.
    pub n_sim: usize,
    pub gamma: f64,
    /// 0 disables bridges, 2 allows them on distance-2 CNOTs.
    pub d_remote: u32,
    pub objective: Objective,
    pub seed: u64,
}

impl Default for MctsParams {
    fn default() -> Self {
        MctsParams {
            n_bp: 20,
            c: 20.0,
            g_sim: 30,
            n_sim: 500,
            gamma: 0.7,
            d_remote: 0,
            objective: Objective::Size,
            seed: 0,
        }
    }
}

impl MctsParams {
    pub fn validate(&self) -> Result<(), MctsError> {
        let bad = |msg: &str| Err(MctsError::InvalidParams(msg.to_string()));
        if self.n_bp == 0 || self.g_sim == 0 || self.n_sim == 0 {
            return bad("n_bp, g_sim and n_sim must be at least 1");
        }
        if self.c.is_nan() || self.c < 0.0 {
            return bad("c must be non-negative");
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return bad("gamma must lie strictly between 0 and 1");
        }
        if self.d_remote != 0 && self.d_remote != 2 {
            return bad("d_remote must be 0 or 2");
        }
        Ok(())
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MctsError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    State(#[from] StateError),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DepthStats {
    pub min: usize,
    pub mean: f64,
    pub max: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransformResult {
    /// Routed circuit over the architecture's vertices; inserted SWAPs are kept as `Swap` gates.
    pub physical: Circuit,
    pub initial_mapping: QubitMapping,
    pub final_mapping: QubitMapping,
    /// `perm[v]` is the vertex holding, at the end, what started on `v`.
    pub perm: Vec<u32>,
    pub added_cnots: usize,
    pub added_depth: usize,
    pub decisions: usize,
    pub fallbacks: usize,
    /// Selection depths of each decision's playouts.
    pub selection_depths: Vec<DepthStats>,
    pub wall_time: f64,
}

/// Routes `lc` onto `ag` starting from `initial`.
pub fn transform(
    lc: &Circuit,
    ag: &ArchGraph,
    initial: &QubitMapping,
    params: &MctsParams,
) -> Result<TransformResult, MctsError> {
    params.validate()?;
    let start = Instant::now();
    let ctx = RoutingContext::new(lc, ag.clone(), initial.clone())?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut gates = Vec::new();
    ctx.emit_leading(&mut gates);
    let (mut state, init) = ctx.initial_state();
    ctx.emit(&state, &init, &mut gates);

    let patience = ag.vertex_count();
    let mut idle = 0;
    let mut decisions = 0;
    let mut fallbacks = 0;
    let mut selection_depths = Vec::new();
    let mut tree = SearchTree::new(&ctx, state.clone(), params.clone());
    while !state.is_goal() {
        if idle >= patience {
            for edge in ctx.fallback_swaps(&state) {
                let (next, step) = ctx.apply_swap(&state, edge)?;
                ctx.emit(&next, &step, &mut gates);
                state = next;
            }
            fallbacks += 1;
            idle = 0;
            tree = SearchTree::new(&ctx, state.clone(), params.clone());
            continue;
        }
        let depths: Vec<usize> = (0..params.n_bp).map(|_| tree.playout(&mut rng)).collect();
        selection_depths.push(DepthStats {
            min: *depths.iter().min().expect("n_bp >= 1"),
            mean: depths.iter().sum::<usize>() as f64 / depths.len() as f64,
            max: *depths.iter().max().expect("n_bp >= 1"),
        });
        let (next, step) = tree.decide().expect("an unfinished root has children");
        decisions += 1;
        idle = if step.executed.is_empty() {
            idle + 1
        } else {
            0
        };
        ctx.emit(&next, &step, &mut gates);
        state = next;
    }

    let physical =
        Circuit::from_gates(ag.vertex_count(), gates).expect("emitted gates use AG vertices");
    let (added_cnots, added_depth) = added_overhead(lc, &physical);
    Ok(TransformResult {
        initial_mapping: initial.clone(),
        final_mapping: state.mapping().clone(),
        perm: state.perm(),
        physical,
        added_cnots,
        added_depth,
        decisions,
        fallbacks,
        selection_depths,
        wall_time: start.elapsed().as_secs_f64(),
    })
}

/// CNOT-count and depth overhead of `physical` over `lc`, SWAPs counted as
/// three CNOTs.
pub fn added_overhead(lc: &Circuit, physical: &Circuit) -> (usize, usize) {
    let cnots = |c: &Circuit| decompose_swaps(c).cnot_count();
    (
        cnots(physical).saturating_sub(cnots(lc)),
        circuit_depth(physical).saturating_sub(circuit_depth(lc)),
    )
}

/// Number of SWAP gates in a routed circuit.
pub fn inserted_swaps(physical: &Circuit) -> usize {
    physical
        .gates()
        .iter()
        .filter(|g| matches!(g, Gate::Swap { .. }))
        .count()
}
