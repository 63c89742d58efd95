//! One-step greedy router used as the "improvement" baseline.
//!
//! Each step applies the pertinent SWAP that executes the most CNOTs, breaking
//! ties by impact factor and then by lowest edge. After `|V|` steps without
//! progress the shortest-path fallback moves a front CNOT into place.

use std::time::Instant;

use qct_core::mcts::{added_overhead, impact_factor, MctsError};
use qct_core::state::{RoutingContext, RoutingState, Step};
use qct_core::{ArchGraph, Circuit, QubitMapping, TransformResult};

pub fn greedy_route(
    lc: &Circuit,
    ag: &ArchGraph,
    initial: &QubitMapping,
    g_sim: usize,
) -> Result<TransformResult, MctsError> {
    let start = Instant::now();
    let ctx = RoutingContext::new(lc, ag.clone(), initial.clone())?;
    let mut gates = Vec::new();
    ctx.emit_leading(&mut gates);
    let (mut state, init) = ctx.initial_state();
    ctx.emit(&state, &init, &mut gates);

    let mut idle = 0;
    let mut decisions = 0;
    let mut fallbacks = 0;
    while !state.is_goal() {
        if idle >= ag.vertex_count() {
            for edge in ctx.fallback_swaps(&state) {
                let (next, step) = ctx.apply_swap(&state, edge)?;
                ctx.emit(&next, &step, &mut gates);
                state = next;
            }
            fallbacks += 1;
            idle = 0;
            continue;
        }
        let (next, step) = best_swap(&ctx, &state, g_sim)?;
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
        selection_depths: Vec::new(),
        wall_time: start.elapsed().as_secs_f64(),
    })
}

fn best_swap(
    ctx: &RoutingContext,
    state: &RoutingState,
    g_sim: usize,
) -> Result<(RoutingState, Step), MctsError> {
    let mut best: Option<((u32, f64), RoutingState, Step)> = None;
    // Edges arrive sorted, so strict improvement keeps the lowest on ties.
    for edge in ctx.pertinent_swaps(state) {
        let (next, step) = ctx.apply_swap(state, edge)?;
        let key = (step.reward(), impact_factor(ctx, state, edge, g_sim));
        if best.as_ref().is_none_or(|(k, _, _)| key > *k) {
            best = Some((key, next, step));
        }
    }
    let (_, next, step) = best.expect("an unfinished state has a front CNOT");
    Ok((next, step))
}
