//! Randomised completions of a bounded window of the remaining circuit.

use rand::Rng;

use crate::state::{QubitMapping, RoutingContext, RoutingState};

const NO_GATE: u32 = u32::MAX;

/// The scaling function applied to raw swap-cost deltas.
pub fn scale(x: i64) -> f64 {
    match x {
        x if x < 0 => 0.0,
        0 => 0.001,
        x => x as f64,
    }
}

fn partner((c, t): (u32, u32), q: u32) -> u32 {
    if c == q {
        t
    } else {
        c
    }
}

/// The first `g_sim` unexecuted gates in circuit order form the rollout
/// window. Returns its largest gate index and its size.
pub(crate) fn window(ctx: &RoutingContext, progress: &[u32], g_sim: usize) -> Option<(u32, u32)> {
    let mut ids: Vec<u32> = Vec::new();
    for (q, list) in ctx.on_qubit.iter().enumerate() {
        let start = progress[q] as usize;
        let end = (start + g_sim).min(list.len());
        ids.extend_from_slice(&list[start..end]);
    }
    ids.sort_unstable();
    ids.dedup();
    ids.truncate(g_sim);
    ids.last().map(|&b| (b, ids.len() as u32))
}

/// Scratch state for rollouts and impact-factor queries.
pub(crate) struct Walker<'c> {
    ctx: &'c RoutingContext,
    bound: u32,
    pub mapping: QubitMapping,
    progress: Vec<u32>,
    pub left: u32,
    wire_depth: Vec<u32>,
    depth: u32,
    front_of: Vec<u32>,
    work: Vec<u32>,
    pub edges: Vec<(u32, u32)>,
    pub weights: Vec<f64>,
}

impl<'c> Walker<'c> {
    pub fn new(ctx: &'c RoutingContext, s: &RoutingState, g_sim: usize) -> Self {
        let (bound, left) = window(ctx, &s.progress, g_sim).unwrap_or((0, 0));
        let mut walker = Walker {
            ctx,
            bound,
            mapping: s.mapping.clone(),
            progress: s.progress.clone(),
            left,
            wire_depth: s.wire_depth.clone(),
            depth: s.depth,
            front_of: vec![NO_GATE; s.progress.len()],
            work: Vec::new(),
            edges: Vec::new(),
            weights: Vec::new(),
        };
        walker.refresh_front();
        walker
    }

    pub fn reset(&mut self, s: &RoutingState, left: u32) {
        self.mapping.clone_from(&s.mapping);
        self.progress.clone_from(&s.progress);
        self.wire_depth.clone_from(&s.wire_depth);
        self.depth = s.depth;
        self.left = left;
        self.refresh_front();
    }

    fn refresh_front(&mut self) {
        for q in 0..self.progress.len() as u32 {
            self.front_of[q as usize] = self.in_front(q);
        }
    }

    fn in_front(&self, q: u32) -> u32 {
        match self.ctx.next_gate(&self.progress, q) {
            Some(g) if g <= self.bound && self.ctx.is_front(&self.progress, g) => g,
            _ => NO_GATE,
        }
    }

    /// Fills `edges` and `weights` with the pertinent SWAPs of the window's
    /// front layer and their impact factors.
    pub fn score_swaps(&mut self) {
        self.edges.clear();
        self.weights.clear();
        let ctx = self.ctx;
        let d = ctx.distances();
        for q in 0..self.progress.len() as u32 {
            let g = self.front_of[q as usize];
            if g == NO_GATE {
                continue;
            }
            let v = self.mapping.physical(q);
            let pv = self.mapping.physical(partner(ctx.cnot(g), q));
            let dv = d.get(v, pv) as i64;
            for &w in ctx.arch().neighbors(v) {
                let mut delta = if w == pv { 0 } else { dv - d.get(w, pv) as i64 };
                if let Some(p) = self.mapping.logical(w) {
                    let h = self.front_of[p as usize];
                    if h != NO_GATE {
                        // An edge between two front operands is produced from its lower end.
                        if w < v {
                            continue;
                        }
                        let ppv = self.mapping.physical(partner(ctx.cnot(h), p));
                        if ppv != v {
                            delta += d.get(w, ppv) as i64 - d.get(v, ppv) as i64;
                        }
                    }
                }
                self.edges.push((v.min(w), v.max(w)));
                self.weights.push(scale(delta));
            }
        }
    }

    /// Cost change of the front gate on vertex `a` when its qubit moves to `b`.
    fn delta_for(&self, a: u32, b: u32) -> i64 {
        let Some(qa) = self.mapping.logical(a) else {
            return 0;
        };
        let g = self.front_of[qa as usize];
        if g == NO_GATE {
            return 0;
        }
        let pv = self.mapping.physical(partner(self.ctx.cnot(g), qa));
        if pv == b {
            return 0;
        }
        let d = self.ctx.distances();
        d.get(a, pv) as i64 - d.get(b, pv) as i64
    }

    /// Applies a SWAP, flushes the window and returns (depth overhead,
    /// gates executed).
    pub fn swap(&mut self, (a, b): (u32, u32), track_depth: bool) -> (u32, u32) {
        let mut overhead = 0;
        if track_depth {
            let d = self.wire_depth[a as usize].max(self.wire_depth[b as usize]) + 3;
            self.wire_depth[a as usize] = d;
            self.wire_depth[b as usize] = d;
            overhead = d.saturating_sub(self.depth);
            self.depth = self.depth.max(d);
        }
        self.mapping.swap_vertices(a, b);
        self.work.clear();
        self.work
            .extend([a, b].into_iter().filter_map(|v| self.mapping.logical(v)));
        let mut executed = 0;
        while let Some(q) = self.work.pop() {
            let g = self.front_of[q as usize];
            if g == NO_GATE {
                continue;
            }
            let (c, t) = self.ctx.cnot(g);
            let (u, w) = (self.mapping.physical(c), self.mapping.physical(t));
            if !self.ctx.arch().is_edge(u, w) {
                continue;
            }
            self.progress[c as usize] += 1;
            self.progress[t as usize] += 1;
            self.left -= 1;
            for q in [c, t] {
                let h = self.in_front(q);
                self.front_of[q as usize] = h;
                if h != NO_GATE {
                    let (hc, ht) = self.ctx.cnot(h);
                    self.front_of[hc as usize] = h;
                    self.front_of[ht as usize] = h;
                }
            }
            executed += 1;
            if track_depth {
                let d = self.wire_depth[u as usize].max(self.wire_depth[w as usize]) + 1;
                let [nc, nt] = self.ctx.companion_counts[g as usize];
                self.wire_depth[u as usize] = d + nc;
                self.wire_depth[w as usize] = d + nt;
                self.depth = self.depth.max(d + nc.max(nt));
            }
            self.work.push(c);
            self.work.push(t);
        }
        (overhead, executed)
    }

    /// Samples an index into `edges` proportionally to `weights`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let total: f64 = self.weights.iter().sum();
        if total <= 0.0 {
            return rng.gen_range(0..self.edges.len());
        }
        let mut x = rng.gen::<f64>() * total;
        for (i, &w) in self.weights.iter().enumerate() {
            if x < w {
                return i;
            }
            x -= w;
        }
        self.weights.iter().rposition(|&w| w > 0.0).unwrap_or(0)
    }
}

/// Runs `n_sim` rollouts and returns the least cost of a completed one:
/// SWAP count, or summed depth overhead when `depth_cost` is set. `None`
/// when every rollout aborted. A rollout stops as soon as it cannot beat the
/// best found so far.
pub(crate) fn best_rollout<R: Rng + ?Sized>(
    ctx: &RoutingContext,
    s: &RoutingState,
    g_sim: usize,
    n_sim: usize,
    depth_cost: bool,
    rng: &mut R,
) -> Option<u32> {
    let mut walker = Walker::new(ctx, s, g_sim);
    let size = walker.left;
    if size == 0 {
        return Some(0);
    }
    let patience = ctx.vertex_count() as u32;
    let mut best: Option<u32> = None;
    for _ in 0..n_sim {
        walker.reset(s, size);
        let mut cost = 0u32;
        let mut idle = 0u32;
        let finished = loop {
            if walker.left == 0 {
                break true;
            }
            if best.is_some_and(|b| cost >= b) {
                break false;
            }
            walker.score_swaps();
            if walker.edges.is_empty() {
                break false;
            }
            let pick = walker.sample(rng);
            let (overhead, executed) = walker.swap(walker.edges[pick], depth_cost);
            cost += if depth_cost { overhead } else { 1 };
            if executed == 0 {
                idle += 1;
                if idle >= patience {
                    break false;
                }
            } else {
                idle = 0;
            }
        };
        if finished {
            best = Some(best.map_or(cost, |b| b.min(cost)));
            if best == Some(0) {
                break;
            }
        }
    }
    best
}

/// Impact factor of SWAP `edge` with respect to the front layer of the
/// first `g_sim` remaining gates of `s`.
pub fn impact_factor(
    ctx: &RoutingContext,
    s: &RoutingState,
    edge: (u32, u32),
    g_sim: usize,
) -> f64 {
    let walker = Walker::new(ctx, s, g_sim);
    let (a, b) = edge;
    scale(walker.delta_for(a, b) + walker.delta_for(b, a))
}

/// Sampling distribution over the pertinent SWAPs of a rollout window,
/// sorted by edge.
pub fn swap_distribution(
    ctx: &RoutingContext,
    s: &RoutingState,
    g_sim: usize,
) -> Vec<((u32, u32), f64)> {
    let mut walker = Walker::new(ctx, s, g_sim);
    walker.score_swaps();
    let total: f64 = walker.weights.iter().sum();
    let n = walker.edges.len() as f64;
    let mut out: Vec<((u32, u32), f64)> = walker
        .edges
        .iter()
        .zip(&walker.weights)
        .map(|(&e, &w)| (e, if total > 0.0 { w / total } else { 1.0 / n }))
        .collect();
    out.sort_by_key(|x| x.0);
    out
}

/// Draws one SWAP from [`swap_distribution`].
pub fn sample_swap<R: Rng + ?Sized>(
    ctx: &RoutingContext,
    s: &RoutingState,
    g_sim: usize,
    rng: &mut R,
) -> Option<(u32, u32)> {
    let mut walker = Walker::new(ctx, s, g_sim);
    walker.score_swaps();
    if walker.edges.is_empty() {
        return None;
    }
    Some(walker.edges[walker.sample(rng)])
}
