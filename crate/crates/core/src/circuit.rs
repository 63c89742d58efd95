//! Gate-level circuit representation, dependency graphs, layering and depth.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Index of a qubit wire. Logical circuits index logical qubits, physical
/// circuits index architecture vertices.
pub type Qubit = u32;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CircuitError {
    #[error("qubit {qubit} out of range for a {qubit_count}-qubit circuit")]
    QubitOutOfRange { qubit: Qubit, qubit_count: usize },
    #[error("two-qubit gate acts twice on qubit {0}")]
    RepeatedOperand(Qubit),
    #[error("a circuit needs at least one qubit")]
    NoQubits,
}

/// A rotation angle kept both as the source text and as its evaluated value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Angle {
    pub text: String,
    pub value: f64,
}

impl Angle {
    pub fn new(text: impl Into<String>, value: f64) -> Self {
        Angle {
            text: text.into(),
            value,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Gate {
    Cnot {
        control: Qubit,
        target: Qubit,
    },
    /// Opaque single-qubit gate; `name` is never interpreted.
    Single {
        name: String,
        params: Vec<Angle>,
        qubit: Qubit,
    },
    Swap {
        a: Qubit,
        b: Qubit,
    },
}

impl Gate {
    pub fn cnot(control: Qubit, target: Qubit) -> Self {
        Gate::Cnot { control, target }
    }

    pub fn swap(a: Qubit, b: Qubit) -> Self {
        Gate::Swap { a, b }
    }

    pub fn single(name: impl Into<String>, qubit: Qubit) -> Self {
        Gate::Single {
            name: name.into(),
            params: Vec::new(),
            qubit,
        }
    }

    /// Qubits touched by the gate, in operand order.
    pub fn qubits(&self) -> impl Iterator<Item = Qubit> {
        let (a, b) = match *self {
            Gate::Cnot { control, target } => (control, Some(target)),
            Gate::Swap { a, b } => (a, Some(b)),
            Gate::Single { qubit, .. } => (qubit, None),
        };
        std::iter::once(a).chain(b)
    }

    pub fn is_two_qubit(&self) -> bool {
        !matches!(self, Gate::Single { .. })
    }

    fn validate(&self, qubit_count: usize) -> Result<(), CircuitError> {
        for q in self.qubits() {
            if q as usize >= qubit_count {
                return Err(CircuitError::QubitOutOfRange {
                    qubit: q,
                    qubit_count,
                });
            }
        }
        match *self {
            Gate::Cnot { control, target } if control == target => {
                Err(CircuitError::RepeatedOperand(control))
            }
            Gate::Swap { a, b } if a == b => Err(CircuitError::RepeatedOperand(a)),
            _ => Ok(()),
        }
    }
}

/// An ordered gate list over `qubit_count` wires. Every gate is validated on
/// insertion, so a `Circuit` value always satisfies its index invariants.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    qubit_count: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(qubit_count: usize) -> Result<Self, CircuitError> {
        if qubit_count == 0 {
            return Err(CircuitError::NoQubits);
        }
        Ok(Circuit {
            qubit_count,
            gates: Vec::new(),
        })
    }

    pub fn from_gates(
        qubit_count: usize,
        gates: impl IntoIterator<Item = Gate>,
    ) -> Result<Self, CircuitError> {
        let mut c = Circuit::new(qubit_count)?;
        for g in gates {
            c.push(g)?;
        }
        Ok(c)
    }

    pub fn push(&mut self, gate: Gate) -> Result<(), CircuitError> {
        gate.validate(self.qubit_count)?;
        self.gates.push(gate);
        Ok(())
    }

    pub fn qubit_count(&self) -> usize {
        self.qubit_count
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn cnot_count(&self) -> usize {
        self.gates
            .iter()
            .filter(|g| matches!(g, Gate::Cnot { .. }))
            .count()
    }

    pub fn swap_count(&self) -> usize {
        self.gates
            .iter()
            .filter(|g| matches!(g, Gate::Swap { .. }))
            .count()
    }

    /// Same wires, gates rebuilt without revalidation. Only used for
    /// transformations that cannot break the invariants.
    fn with_gates(&self, gates: Vec<Gate>) -> Circuit {
        Circuit {
            qubit_count: self.qubit_count,
            gates,
        }
    }
}

/// Direct-dependence DAG over gate indices. Edges always point from the
/// earlier gate to the later one and the edge set is transitively reduced.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DependencyGraph {
    parents: Vec<Vec<usize>>,
    children: Vec<Vec<usize>>,
}

impl DependencyGraph {
    pub fn node_count(&self) -> usize {
        self.parents.len()
    }

    pub fn parents(&self, gate: usize) -> &[usize] {
        &self.parents[gate]
    }

    pub fn children(&self, gate: usize) -> &[usize] {
        &self.children[gate]
    }

    /// All edges as `(from, to)` pairs, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out: Vec<_> = self
            .parents
            .iter()
            .enumerate()
            .flat_map(|(i, ps)| ps.iter().map(move |&j| (j, i)))
            .collect();
        out.sort_unstable();
        out
    }
}

/// Builds the dependency graph. Only the latest earlier gate on each operand
/// can be a direct parent; a candidate is dropped when it is already an
/// ancestor of the other candidate.
pub fn build_dependency_graph(c: &Circuit) -> DependencyGraph {
    let n = c.len();
    let mut parents: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut last: Vec<Option<usize>> = vec![None; c.qubit_count()];
    let layer = layer_indices(c);
    // visit stamps for the bounded reachability search
    let mut stamp = vec![usize::MAX; n];
    let mut stack = Vec::new();

    for (i, gate) in c.gates().iter().enumerate() {
        let mut cands: Vec<usize> = gate.qubits().filter_map(|q| last[q as usize]).collect();
        cands.sort_unstable();
        cands.dedup();
        if cands.len() == 2 {
            let (lo, hi) = (cands[0], cands[1]);
            if reaches(&parents, &layer, lo, hi, i, &mut stamp, &mut stack) {
                cands.remove(0);
            }
        }
        for &p in &cands {
            children[p].push(i);
        }
        parents[i] = cands;
        for q in gate.qubits() {
            last[q as usize] = Some(i);
        }
    }
    DependencyGraph { parents, children }
}

/// Whether `from` is an ancestor of `to`, searching backwards from `to`
/// and never descending below index `from` or layer of `from`.
fn reaches(
    parents: &[Vec<usize>],
    layer: &[usize],
    from: usize,
    to: usize,
    mark: usize,
    stamp: &mut [usize],
    stack: &mut Vec<usize>,
) -> bool {
    if layer[from] >= layer[to] {
        return false;
    }
    stack.clear();
    stack.push(to);
    stamp[to] = mark;
    while let Some(v) = stack.pop() {
        for &p in &parents[v] {
            if p == from {
                return true;
            }
            if p > from && layer[p] > layer[from] && stamp[p] != mark {
                stamp[p] = mark;
                stack.push(p);
            }
        }
    }
    false
}

/// Layer index of every gate: 0 for gates without parents, otherwise one
/// more than the deepest parent.
pub fn layer_indices(c: &Circuit) -> Vec<usize> {
    let mut wire = vec![0usize; c.qubit_count()];
    c.gates()
        .iter()
        .map(|g| {
            let l = g.qubits().map(|q| wire[q as usize]).max().unwrap_or(0);
            for q in g.qubits() {
                wire[q as usize] = l + 1;
            }
            l
        })
        .collect()
}

/// Gate indices grouped by layer; layer 0 is the front layer.
pub type LayerPartition = Vec<Vec<usize>>;

pub fn layers(c: &Circuit) -> LayerPartition {
    let idx = layer_indices(c);
    let mut out: LayerPartition = Vec::new();
    for (g, &l) in idx.iter().enumerate() {
        if out.len() <= l {
            out.resize_with(l + 1, Vec::new);
        }
        out[l].push(g);
    }
    out
}

/// ASAP schedule depth. Every gate takes one slot on its wires, a SWAP takes
/// three (its CNOT decomposition).
pub fn circuit_depth(c: &Circuit) -> usize {
    let mut wire = vec![0usize; c.qubit_count()];
    for g in c.gates() {
        match *g {
            Gate::Single { qubit, .. } => wire[qubit as usize] += 1,
            Gate::Cnot { control, target } => {
                let d = wire[control as usize].max(wire[target as usize]) + 1;
                wire[control as usize] = d;
                wire[target as usize] = d;
            }
            Gate::Swap { a, b } => {
                let d = wire[a as usize].max(wire[b as usize]) + 3;
                wire[a as usize] = d;
                wire[b as usize] = d;
            }
        }
    }
    wire.into_iter().max().unwrap_or(0)
}

/// A circuit with single-qubit gates removed, plus the index each remaining
/// gate had in the source circuit.
#[derive(Clone, Debug, PartialEq)]
pub struct Skeleton {
    pub circuit: Circuit,
    pub origin: Vec<usize>,
}

pub fn strip_single_qubit(c: &Circuit) -> Skeleton {
    let (origin, gates): (Vec<usize>, Vec<Gate>) = c
        .gates()
        .iter()
        .enumerate()
        .filter(|(_, g)| g.is_two_qubit())
        .map(|(i, g)| (i, g.clone()))
        .unzip();
    Skeleton {
        circuit: c.with_gates(gates),
        origin,
    }
}

/// Replaces every SWAP by the three-CNOT sequence `cx a,b; cx b,a; cx a,b`.
pub fn decompose_swaps(c: &Circuit) -> Circuit {
    let mut gates = Vec::with_capacity(c.len() + 2 * c.swap_count());
    for g in c.gates() {
        match *g {
            Gate::Swap { a, b } => {
                gates.push(Gate::cnot(a, b));
                gates.push(Gate::cnot(b, a));
                gates.push(Gate::cnot(a, b));
            }
            _ => gates.push(g.clone()),
        }
    }
    c.with_gates(gates)
}
