//! Routing states `(mapping, emitted physical circuit, remaining logical
//! circuit)` and the actions that move between them.
//!
//! The remaining logical circuit is never stored explicitly. Because the set
//! of executed gates is always closed under dependencies, it is a prefix of
//! every qubit's gate list, so one counter per logical qubit describes it.
//! Emitted physical gates are not stored in the state either: a [`Step`]
//! records what an action executed and [`RoutingContext::emit`] replays it.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arch::{distances, shortest_path, ArchGraph, DistanceMatrix};
use crate::circuit::{decompose_swaps, Circuit, Gate, Qubit};

const UNMAPPED: u32 = u32::MAX;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StateError {
    #[error("logical qubits {first} and {second} are both mapped to vertex {vertex}")]
    NotInjective {
        vertex: u32,
        first: u32,
        second: u32,
    },
    #[error("{logical} logical qubits do not fit on {vertices} physical qubits")]
    TooManyQubits { logical: usize, vertices: usize },
    #[error("vertex {vertex} out of range for {vertices} physical qubits")]
    VertexOutOfRange { vertex: u32, vertices: usize },
    #[error("mapping covers {mapping} logical qubits but the circuit has {circuit}")]
    MappingSize { mapping: usize, circuit: usize },
    #[error("({0}, {1}) is not an architecture edge")]
    NotAnEdge(u32, u32),
    #[error("invalid bridge for gate {gate} through vertex {middle}")]
    InvalidBridge { gate: u32, middle: u32 },
}

/// Injective assignment of logical qubits to architecture vertices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "MappingRepr", into = "MappingRepr")]
pub struct QubitMapping {
    physical: Vec<u32>,
    logical: Vec<u32>,
}

#[derive(Serialize, Deserialize)]
struct MappingRepr {
    vertices: usize,
    physical: Vec<u32>,
}

impl TryFrom<MappingRepr> for QubitMapping {
    type Error = StateError;
    fn try_from(r: MappingRepr) -> Result<Self, StateError> {
        QubitMapping::new(r.physical, r.vertices)
    }
}

impl From<QubitMapping> for MappingRepr {
    fn from(m: QubitMapping) -> Self {
        MappingRepr {
            vertices: m.logical.len(),
            physical: m.physical,
        }
    }
}

impl QubitMapping {
    pub fn new(physical: Vec<u32>, vertices: usize) -> Result<Self, StateError> {
        if physical.len() > vertices {
            return Err(StateError::TooManyQubits {
                logical: physical.len(),
                vertices,
            });
        }
        let mut logical = vec![UNMAPPED; vertices];
        for (q, &v) in physical.iter().enumerate() {
            if v as usize >= vertices {
                return Err(StateError::VertexOutOfRange {
                    vertex: v,
                    vertices,
                });
            }
            if logical[v as usize] != UNMAPPED {
                return Err(StateError::NotInjective {
                    vertex: v,
                    first: logical[v as usize],
                    second: q as u32,
                });
            }
            logical[v as usize] = q as u32;
        }
        Ok(QubitMapping { physical, logical })
    }

    /// `q_i -> v_i`.
    pub fn naive(logical: usize, vertices: usize) -> Result<Self, StateError> {
        QubitMapping::new((0..logical as u32).collect(), vertices)
    }

    #[inline]
    pub fn physical(&self, q: Qubit) -> u32 {
        self.physical[q as usize]
    }

    #[inline]
    pub fn logical(&self, v: u32) -> Option<Qubit> {
        match self.logical[v as usize] {
            UNMAPPED => None,
            q => Some(q),
        }
    }

    pub fn logical_count(&self) -> usize {
        self.physical.len()
    }

    pub fn vertex_count(&self) -> usize {
        self.logical.len()
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.physical
    }

    /// Exchanges whatever sits on vertices `a` and `b`.
    pub fn swap_vertices(&mut self, a: u32, b: u32) {
        let (qa, qb) = (self.logical[a as usize], self.logical[b as usize]);
        self.logical.swap(a as usize, b as usize);
        if qa != UNMAPPED {
            self.physical[qa as usize] = b;
        }
        if qb != UNMAPPED {
            self.physical[qb as usize] = a;
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Action {
    /// SWAP on an architecture edge, stored normalised (`a < b`).
    Swap { a: u32, b: u32 },
    /// Remote CNOT for skeleton gate `gate` through the common neighbour `middle`.
    Bridge { gate: u32, middle: u32 },
}

impl Action {
    pub fn swap(u: u32, v: u32) -> Self {
        Action::Swap {
            a: u.min(v),
            b: u.max(v),
        }
    }
}

/// What one transition did: the action taken and the skeleton gates it
/// executed, in execution order (a bridged gate comes first).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Step {
    pub action: Option<Action>,
    pub executed: Vec<u32>,
    /// Schedule-depth increase caused by the action's own gates.
    pub depth_overhead: u32,
}

impl Step {
    /// Number of logical CNOTs executed by the transition.
    pub fn reward(&self) -> u32 {
        self.executed.len() as u32
    }
}

/// Search state. Cheap to clone: a handful of small vectors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RoutingState {
    pub(crate) mapping: QubitMapping,
    /// For each vertex, the initial vertex whose content now sits there.
    content: Vec<u32>,
    /// Executed gates per logical qubit (a prefix of that qubit's gate list).
    pub(crate) progress: Vec<u32>,
    remaining: u32,
    pub(crate) wire_depth: Vec<u32>,
    pub(crate) depth: u32,
}

impl RoutingState {
    pub fn mapping(&self) -> &QubitMapping {
        &self.mapping
    }

    /// Logical CNOTs not yet executed.
    pub fn remaining(&self) -> usize {
        self.remaining as usize
    }

    pub fn is_goal(&self) -> bool {
        self.remaining == 0
    }

    pub fn progress(&self) -> &[u32] {
        &self.progress
    }

    /// Vertex permutation induced by all SWAPs so far: `perm[v]` is where the
    /// content that started on `v` is now.
    pub fn perm(&self) -> Vec<u32> {
        let mut perm = vec![0; self.content.len()];
        for (v, &src) in self.content.iter().enumerate() {
            perm[src as usize] = v as u32;
        }
        perm
    }

    /// Schedule depth of the emitted physical circuit.
    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn wire_depth(&self) -> &[u32] {
        &self.wire_depth
    }

    pub(crate) fn bump_cnot(&mut self, u: u32, w: u32) {
        let d = self.wire_depth[u as usize].max(self.wire_depth[w as usize]) + 1;
        self.wire_depth[u as usize] = d;
        self.wire_depth[w as usize] = d;
        self.depth = self.depth.max(d);
    }

    pub(crate) fn bump_single(&mut self, v: u32, count: u32) {
        if count > 0 {
            let d = self.wire_depth[v as usize] + count;
            self.wire_depth[v as usize] = d;
            self.depth = self.depth.max(d);
        }
    }
}

/// Immutable routing problem shared by every state of one transformation.
#[derive(Clone, Debug)]
pub struct RoutingContext {
    arch: ArchGraph,
    dist: DistanceMatrix,
    /// Input with SWAPs decomposed; single-qubit gates included.
    logical: Circuit,
    /// Skeleton CNOTs as `(control, target)`.
    pub(crate) cnots: Vec<(u32, u32)>,
    /// Skeleton gate ids on each logical qubit, in circuit order.
    pub(crate) on_qubit: Vec<Vec<u32>>,
    /// Position of each gate in `on_qubit[control]` and `on_qubit[target]`.
    pub(crate) slot: Vec<[u32; 2]>,
    /// Single-qubit gates (indices into `logical`) emitted right after each CNOT.
    companions: Vec<Vec<usize>>,
    /// Companion counts on the control and target wire.
    pub(crate) companion_counts: Vec<[u32; 2]>,
    /// Single-qubit gates that precede every CNOT on their wire.
    leading: Vec<usize>,
    initial: QubitMapping,
}

impl RoutingContext {
    pub fn new(lc: &Circuit, arch: ArchGraph, initial: QubitMapping) -> Result<Self, StateError> {
        if initial.logical_count() != lc.qubit_count() {
            return Err(StateError::MappingSize {
                mapping: initial.logical_count(),
                circuit: lc.qubit_count(),
            });
        }
        if initial.vertex_count() != arch.vertex_count() {
            return Err(StateError::TooManyQubits {
                logical: initial.vertex_count(),
                vertices: arch.vertex_count(),
            });
        }
        let logical = decompose_swaps(lc);
        let n = logical.qubit_count();
        let mut cnots = Vec::new();
        let mut on_qubit: Vec<Vec<u32>> = vec![Vec::new(); n];
        let mut slot = Vec::new();
        let mut companions: Vec<Vec<usize>> = Vec::new();
        let mut companion_counts: Vec<[u32; 2]> = Vec::new();
        let mut leading = Vec::new();
        let mut last: Vec<Option<u32>> = vec![None; n];
        for (i, g) in logical.gates().iter().enumerate() {
            match *g {
                Gate::Cnot { control, target } => {
                    let id = cnots.len() as u32;
                    cnots.push((control, target));
                    slot.push([
                        on_qubit[control as usize].len() as u32,
                        on_qubit[target as usize].len() as u32,
                    ]);
                    on_qubit[control as usize].push(id);
                    on_qubit[target as usize].push(id);
                    companions.push(Vec::new());
                    companion_counts.push([0, 0]);
                    last[control as usize] = Some(id);
                    last[target as usize] = Some(id);
                }
                Gate::Single { qubit, .. } => match last[qubit as usize] {
                    Some(id) => {
                        companions[id as usize].push(i);
                        let side = usize::from(cnots[id as usize].0 != qubit);
                        companion_counts[id as usize][side] += 1;
                    }
                    None => leading.push(i),
                },
                Gate::Swap { .. } => unreachable!("swaps are decomposed"),
            }
        }
        Ok(RoutingContext {
            dist: distances(&arch),
            arch,
            logical,
            cnots,
            on_qubit,
            slot,
            companions,
            companion_counts,
            leading,
            initial,
        })
    }

    pub fn arch(&self) -> &ArchGraph {
        &self.arch
    }

    pub fn distances(&self) -> &DistanceMatrix {
        &self.dist
    }

    pub fn logical(&self) -> &Circuit {
        &self.logical
    }

    pub fn initial_mapping(&self) -> &QubitMapping {
        &self.initial
    }

    /// Logical CNOT count of the (swap-decomposed) input.
    pub fn cnot_count(&self) -> usize {
        self.cnots.len()
    }

    pub fn cnot(&self, gate: u32) -> (u32, u32) {
        self.cnots[gate as usize]
    }

    pub fn vertex_count(&self) -> usize {
        self.arch.vertex_count()
    }

    /// Initial state with every gate executable under the initial mapping
    /// already flushed.
    pub fn initial_state(&self) -> (RoutingState, Step) {
        let v = self.arch.vertex_count();
        let mut s = RoutingState {
            mapping: self.initial.clone(),
            content: (0..v as u32).collect(),
            progress: vec![0; self.logical.qubit_count()],
            remaining: self.cnots.len() as u32,
            wire_depth: vec![0; v],
            depth: 0,
        };
        for &i in &self.leading {
            if let Gate::Single { qubit, .. } = self.logical.gates()[i] {
                let p = s.mapping.physical(qubit);
                s.bump_single(p, 1);
            }
        }
        let mut step = Step::default();
        let all: Vec<u32> = (0..self.logical.qubit_count() as u32).collect();
        self.flush(&mut s, &all, &mut step.executed);
        (s, step)
    }

    /// Next unexecuted gate on qubit `q`, if any.
    #[inline]
    pub(crate) fn next_gate(&self, progress: &[u32], q: u32) -> Option<u32> {
        self.on_qubit[q as usize]
            .get(progress[q as usize] as usize)
            .copied()
    }

    #[inline]
    pub(crate) fn is_front(&self, progress: &[u32], g: u32) -> bool {
        let (c, t) = self.cnots[g as usize];
        let [sc, st] = self.slot[g as usize];
        progress[c as usize] == sc && progress[t as usize] == st
    }

    /// Front layer of the remaining circuit, sorted by gate index.
    pub fn frontier(&self, s: &RoutingState) -> Vec<u32> {
        let mut front: Vec<u32> = (0..s.progress.len() as u32)
            .filter_map(|q| self.next_gate(&s.progress, q))
            .filter(|&g| self.is_front(&s.progress, g))
            .collect();
        front.sort_unstable();
        front.dedup();
        front
    }

    /// Executes gates reachable from the qubits in `seeds` until nothing on
    /// the touched qubits is executable any more.
    fn flush(&self, s: &mut RoutingState, seeds: &[u32], executed: &mut Vec<u32>) {
        let mut work: Vec<u32> = seeds.to_vec();
        while let Some(q) = work.pop() {
            let Some(g) = self.next_gate(&s.progress, q) else {
                continue;
            };
            if !self.is_front(&s.progress, g) {
                continue;
            }
            let (c, t) = self.cnots[g as usize];
            let (u, w) = (s.mapping.physical(c), s.mapping.physical(t));
            if !self.arch.is_edge(u, w) {
                continue;
            }
            self.execute(s, g, u, w);
            executed.push(g);
            work.push(c);
            work.push(t);
        }
    }

    fn execute(&self, s: &mut RoutingState, g: u32, u: u32, w: u32) {
        let (c, t) = self.cnots[g as usize];
        s.progress[c as usize] += 1;
        s.progress[t as usize] += 1;
        s.remaining -= 1;
        s.bump_cnot(u, w);
        let [nc, nt] = self.companion_counts[g as usize];
        s.bump_single(u, nc);
        s.bump_single(w, nt);
    }

    /// Gates of the remaining circuit executable under `mapping`, found by
    /// iterated flushing from the state's progress.
    pub fn executable_under(&self, s: &RoutingState, mapping: &QubitMapping) -> Vec<u32> {
        let mut probe = s.clone();
        probe.mapping = mapping.clone();
        let mut executed = Vec::new();
        let all: Vec<u32> = (0..s.progress.len() as u32).collect();
        self.flush(&mut probe, &all, &mut executed);
        executed.sort_unstable();
        executed
    }

    /// Gates executable right now. Empty for every state produced here,
    /// since transitions flush to a fixpoint.
    pub fn executable_gates(&self, s: &RoutingState) -> Vec<u32> {
        self.executable_under(s, &s.mapping)
    }

    pub fn apply(
        &self,
        s: &RoutingState,
        action: Action,
    ) -> Result<(RoutingState, Step), StateError> {
        match action {
            Action::Swap { a, b } => self.apply_swap(s, (a, b)),
            Action::Bridge { gate, middle } => self.apply_bridge(s, gate, middle),
        }
    }

    pub fn apply_swap(
        &self,
        s: &RoutingState,
        (u, v): (u32, u32),
    ) -> Result<(RoutingState, Step), StateError> {
        if !self.arch.is_edge(u, v) {
            return Err(StateError::NotAnEdge(u, v));
        }
        let mut next = s.clone();
        let before = next.depth;
        let d = next.wire_depth[u as usize].max(next.wire_depth[v as usize]) + 3;
        next.wire_depth[u as usize] = d;
        next.wire_depth[v as usize] = d;
        next.depth = next.depth.max(d);
        let overhead = next.depth - before;
        next.mapping.swap_vertices(u, v);
        next.content.swap(u as usize, v as usize);

        let mut step = Step {
            action: Some(Action::swap(u, v)),
            executed: Vec::new(),
            depth_overhead: overhead,
        };
        let seeds: Vec<u32> = [u, v]
            .into_iter()
            .filter_map(|x| next.mapping.logical(x))
            .collect();
        self.flush(&mut next, &seeds, &mut step.executed);
        Ok((next, step))
    }

    pub fn apply_bridge(
        &self,
        s: &RoutingState,
        gate: u32,
        middle: u32,
    ) -> Result<(RoutingState, Step), StateError> {
        let invalid = StateError::InvalidBridge { gate, middle };
        if gate as usize >= self.cnots.len() || middle as usize >= self.arch.vertex_count() {
            return Err(invalid);
        }
        let (c, t) = self.cnots[gate as usize];
        let (u, w) = (s.mapping.physical(c), s.mapping.physical(t));
        if !self.is_front(&s.progress, gate)
            || self.dist.get(u, w) != 2
            || !self.arch.is_edge(u, middle)
            || !self.arch.is_edge(middle, w)
        {
            return Err(invalid);
        }
        let mut next = s.clone();
        let before = next.depth;
        next.bump_cnot(u, middle);
        next.bump_cnot(middle, w);
        next.bump_cnot(u, middle);
        next.bump_cnot(middle, w);
        let overhead = next.depth - before;

        // Execute the bridged gate itself: progress, companions, counters.
        next.progress[c as usize] += 1;
        next.progress[t as usize] += 1;
        next.remaining -= 1;
        let [nc, nt] = self.companion_counts[gate as usize];
        next.bump_single(u, nc);
        next.bump_single(w, nt);

        let mut step = Step {
            action: Some(Action::Bridge { gate, middle }),
            executed: vec![gate],
            depth_overhead: overhead,
        };
        self.flush(&mut next, &[c, t], &mut step.executed);
        Ok((next, step))
    }

    /// Architecture edges touching a vertex that holds a front-layer qubit,
    /// sorted.
    pub fn pertinent_swaps(&self, s: &RoutingState) -> Vec<(u32, u32)> {
        let mut out = Vec::new();
        for g in self.frontier(s) {
            let (c, t) = self.cnots[g as usize];
            for q in [c, t] {
                let v = s.mapping.physical(q);
                for &w in self.arch.neighbors(v) {
                    out.push((v.min(w), v.max(w)));
                }
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Bridge actions for front CNOTs at distance exactly 2, one per common
    /// neighbour. Distances beyond 2 are not bridged.
    pub fn bridge_candidates(&self, s: &RoutingState, d_max: u32) -> Vec<Action> {
        if d_max < 2 {
            return Vec::new();
        }
        let mut out = Vec::new();
        for g in self.frontier(s) {
            let (c, t) = self.cnots[g as usize];
            let (u, w) = (s.mapping.physical(c), s.mapping.physical(t));
            if self.dist.get(u, w) != 2 {
                continue;
            }
            for &m in self.arch.neighbors(u) {
                if self.arch.is_edge(m, w) {
                    out.push(Action::Bridge { gate: g, middle: m });
                }
            }
        }
        out
    }

    /// Hop distance between the mapped operands of skeleton gate `gate`.
    pub fn swap_cost(&self, gate: u32, mapping: &QubitMapping) -> u32 {
        let (c, t) = self.cnots[gate as usize];
        self.dist.get(mapping.physical(c), mapping.physical(t))
    }

    /// SWAPs that walk the control of the cheapest front CNOT (lowest index
    /// on ties) along a shortest path until it neighbours the target.
    pub fn fallback_swaps(&self, s: &RoutingState) -> Vec<(u32, u32)> {
        let Some(g) = self
            .frontier(s)
            .into_iter()
            .min_by_key(|&g| (self.swap_cost(g, &s.mapping), g))
        else {
            return Vec::new();
        };
        let (c, t) = self.cnots[g as usize];
        let path = shortest_path(
            &self.arch,
            &self.dist,
            s.mapping.physical(c),
            s.mapping.physical(t),
        );
        path.windows(2)
            .take(path.len().saturating_sub(2))
            .map(|w| (w[0], w[1]))
            .collect()
    }

    /// Single-qubit gates placed before any CNOT, on their initial wires.
    pub fn emit_leading(&self, out: &mut Vec<Gate>) {
        for &i in &self.leading {
            out.push(self.relocated_single(i, &self.initial));
        }
    }

    /// Appends the physical gates of `step`. `after` is the state the step
    /// produced; its mapping is the one the executed gates ran under.
    pub fn emit(&self, after: &RoutingState, step: &Step, out: &mut Vec<Gate>) {
        let m = &after.mapping;
        let mut executed = step.executed.as_slice();
        match step.action {
            Some(Action::Swap { a, b }) => out.push(Gate::swap(a, b)),
            Some(Action::Bridge { gate, middle }) => {
                let (c, t) = self.cnots[gate as usize];
                let (u, w) = (m.physical(c), m.physical(t));
                out.push(Gate::cnot(u, middle));
                out.push(Gate::cnot(middle, w));
                out.push(Gate::cnot(u, middle));
                out.push(Gate::cnot(middle, w));
                self.emit_companions(gate, m, out);
                executed = &executed[1..];
            }
            None => {}
        }
        for &g in executed {
            let (c, t) = self.cnots[g as usize];
            out.push(Gate::cnot(m.physical(c), m.physical(t)));
            self.emit_companions(g, m, out);
        }
    }

    fn emit_companions(&self, g: u32, m: &QubitMapping, out: &mut Vec<Gate>) {
        for &i in &self.companions[g as usize] {
            out.push(self.relocated_single(i, m));
        }
    }

    fn relocated_single(&self, i: usize, m: &QubitMapping) -> Gate {
        match &self.logical.gates()[i] {
            Gate::Single {
                name,
                params,
                qubit,
            } => Gate::Single {
                name: name.clone(),
                params: params.clone(),
                qubit: m.physical(*qubit),
            },
            _ => unreachable!("companions are single-qubit gates"),
        }
    }

    /// Executed-flag per skeleton gate, derived from the per-qubit prefixes.
    pub fn executed_flags(&self, s: &RoutingState) -> Vec<bool> {
        let mut flags = vec![false; self.cnots.len()];
        for (q, list) in self.on_qubit.iter().enumerate() {
            for &g in &list[..s.progress[q] as usize] {
                flags[g as usize] = true;
            }
        }
        flags
    }
}
