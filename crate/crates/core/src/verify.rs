//! Exact correctness checks for routed circuits.
//!
//! CNOT/SWAP circuits are linear reversible maps over GF(2), so two of them
//! are equivalent iff their matrices agree. Single-qubit gates are checked
//! separately as opaque functions, each introducing a fresh variable.

use std::collections::HashMap;

use thiserror::Error;

use crate::arch::ArchGraph;
use crate::circuit::{Circuit, Gate};
use crate::mcts::TransformResult;
use crate::state::QubitMapping;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum VerifyError {
    #[error("gate {index} is a single-qubit gate; pass the CNOT skeleton")]
    SingleQubitGate { index: usize },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

/// Square bit matrix with rows packed into 64-bit words.
#[derive(Clone, PartialEq, Eq)]
pub struct Gf2Matrix {
    n: usize,
    words: usize,
    bits: Vec<u64>,
}

impl std::fmt::Debug for Gf2Matrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "Gf2Matrix({})", self.n)?;
        for r in 0..self.n {
            let row: String = (0..self.n)
                .map(|c| if self.get(r, c) { '1' } else { '0' })
                .collect();
            writeln!(f, "  {row}")?;
        }
        Ok(())
    }
}

impl Gf2Matrix {
    pub fn identity(n: usize) -> Self {
        let words = n.div_ceil(64).max(1);
        let mut m = Gf2Matrix {
            n,
            words,
            bits: vec![0; n * words],
        };
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    /// Matrix with a one at `(perm[v], v)` for every `v`.
    pub fn permutation(perm: &[u32]) -> Self {
        let n = perm.len();
        let mut m = Gf2Matrix::identity(n);
        m.bits.iter_mut().for_each(|w| *w = 0);
        for (v, &p) in perm.iter().enumerate() {
            m.set(p as usize, v, true);
        }
        m
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.bits[r * self.words + c / 64] >> (c % 64) & 1 == 1
    }

    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        let w = &mut self.bits[r * self.words + c / 64];
        let mask = 1u64 << (c % 64);
        if value {
            *w |= mask;
        } else {
            *w &= !mask;
        }
    }

    pub fn row(&self, r: usize) -> &[u64] {
        &self.bits[r * self.words..(r + 1) * self.words]
    }

    /// Row `dst` ^= row `src`.
    pub fn add_row(&mut self, src: usize, dst: usize) {
        for k in 0..self.words {
            let v = self.bits[src * self.words + k];
            self.bits[dst * self.words + k] ^= v;
        }
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        for k in 0..self.words {
            self.bits.swap(a * self.words + k, b * self.words + k);
        }
    }

    /// Product `self · other`.
    pub fn mul(&self, other: &Gf2Matrix) -> Gf2Matrix {
        assert_eq!(self.n, other.n, "matrix sizes differ");
        let mut out = Gf2Matrix::identity(self.n);
        out.bits.iter_mut().for_each(|w| *w = 0);
        for r in 0..self.n {
            for k in 0..self.n {
                if self.get(r, k) {
                    for w in 0..self.words {
                        out.bits[r * self.words + w] ^= other.bits[k * self.words + w];
                    }
                }
            }
        }
        out
    }

    /// Applies a CNOT or SWAP as a left multiplication.
    fn apply(&mut self, g: &Gate) {
        match *g {
            Gate::Cnot { control, target } => self.add_row(control as usize, target as usize),
            Gate::Swap { a, b } => self.swap_rows(a as usize, b as usize),
            Gate::Single { .. } => {}
        }
    }
}

/// GF(2) matrix of a CNOT/SWAP circuit on `n` wires.
pub fn gf2_matrix_of(c: &Circuit, n: usize) -> Result<Gf2Matrix, VerifyError> {
    if c.qubit_count() > n {
        return Err(VerifyError::Dimension(format!(
            "circuit has {} qubits, matrix {n}",
            c.qubit_count()
        )));
    }
    let mut m = Gf2Matrix::identity(n);
    for (index, g) in c.gates().iter().enumerate() {
        if matches!(g, Gate::Single { .. }) {
            return Err(VerifyError::SingleQubitGate { index });
        }
        m.apply(g);
    }
    Ok(m)
}

/// True iff every two-qubit gate acts on an architecture edge.
pub fn check_connectivity(pc: &Circuit, ag: &ArchGraph) -> bool {
    pc.qubit_count() <= ag.vertex_count()
        && pc.gates().iter().all(|g| match *g {
            Gate::Cnot { control, target } => ag.is_edge(control, target),
            Gate::Swap { a, b } => ag.is_edge(a, b),
            Gate::Single { .. } => true,
        })
}

/// Logical circuit relabelled onto vertices through `initial`.
fn embed(lc: &Circuit, initial: &QubitMapping) -> Vec<Gate> {
    lc.gates()
        .iter()
        .map(|g| match g {
            Gate::Cnot { control, target } => {
                Gate::cnot(initial.physical(*control), initial.physical(*target))
            }
            Gate::Swap { a, b } => Gate::swap(initial.physical(*a), initial.physical(*b)),
            Gate::Single {
                name,
                params,
                qubit,
            } => Gate::Single {
                name: name.clone(),
                params: params.clone(),
                qubit: initial.physical(*qubit),
            },
        })
        .collect()
}

fn check_shapes(
    lc: &Circuit,
    physical: &Circuit,
    initial: &QubitMapping,
    perm: &[u32],
) -> Result<usize, VerifyError> {
    let n = perm.len();
    if initial.vertex_count() != n || physical.qubit_count() > n {
        return Err(VerifyError::Dimension(format!(
            "perm covers {n} vertices, mapping {} and physical circuit {}",
            initial.vertex_count(),
            physical.qubit_count()
        )));
    }
    if initial.logical_count() != lc.qubit_count() {
        return Err(VerifyError::Dimension(format!(
            "mapping covers {} logical qubits, circuit has {}",
            initial.logical_count(),
            lc.qubit_count()
        )));
    }
    let mut seen = vec![false; n];
    for &p in perm {
        if p as usize >= n || std::mem::replace(&mut seen[p as usize], true) {
            return Err(VerifyError::Dimension("perm is not a permutation".into()));
        }
    }
    Ok(n)
}

/// Skeleton equivalence `M_phys = P_perm · M_log`, where `M_log` is the
/// logical skeleton embedded through `initial`. Single-qubit gates in either
/// circuit are ignored.
pub fn check_equivalence_parts(
    lc: &Circuit,
    physical: &Circuit,
    initial: &QubitMapping,
    perm: &[u32],
) -> Result<bool, VerifyError> {
    let n = check_shapes(lc, physical, initial, perm)?;
    let mut logical = Gf2Matrix::identity(n);
    for g in embed(lc, initial) {
        logical.apply(&g);
    }
    let mut phys = Gf2Matrix::identity(n);
    for g in physical.gates() {
        phys.apply(g);
    }
    Ok(phys == Gf2Matrix::permutation(perm).mul(&logical))
}

/// Checks a transform result: skeleton equivalence, consistency of the
/// final mapping with the permutation, and single-qubit gate placement.
pub fn check_equivalence(
    lc: &Circuit,
    result: &TransformResult,
    initial: &QubitMapping,
    ag: &ArchGraph,
) -> Result<bool, VerifyError> {
    if result.perm.len() != ag.vertex_count() {
        return Err(VerifyError::Dimension(format!(
            "perm covers {} vertices, architecture has {}",
            result.perm.len(),
            ag.vertex_count()
        )));
    }
    let mapping_ok = (0..lc.qubit_count() as u32)
        .all(|q| result.final_mapping.physical(q) == result.perm[initial.physical(q) as usize]);
    Ok(mapping_ok
        && check_equivalence_parts(lc, &result.physical, initial, &result.perm)?
        && check_single_qubit_order(lc, &result.physical, initial, &result.perm)?)
}

/// Wire functions over the inputs plus one fresh variable per single-qubit
/// gate. A single-qubit gate is uninterpreted: it replaces its wire's
/// function by its own variable.
struct Symbolic {
    words: usize,
    rows: Vec<Vec<u64>>,
}

impl Symbolic {
    fn new(n: usize, fresh: usize) -> Self {
        let words = (n + fresh).div_ceil(64).max(1);
        let rows = (0..n)
            .map(|v| {
                let mut r = vec![0; words];
                r[v / 64] |= 1 << (v % 64);
                r
            })
            .collect();
        Symbolic { words, rows }
    }

    fn linear(&mut self, g: &Gate) {
        match *g {
            Gate::Cnot { control, target } => {
                for k in 0..self.words {
                    let x = self.rows[control as usize][k];
                    self.rows[target as usize][k] ^= x;
                }
            }
            Gate::Swap { a, b } => self.rows.swap(a as usize, b as usize),
            Gate::Single { .. } => {}
        }
    }

    /// Replaces the row of `wire` by variable `var`, returning the old row.
    fn cut(&mut self, wire: usize, var: usize) -> Vec<u64> {
        let mut fresh = vec![0; self.words];
        fresh[var / 64] |= 1 << (var % 64);
        std::mem::replace(&mut self.rows[wire], fresh)
    }
}

/// Name and angle texts of a single-qubit gate.
type Signature<'a> = (&'a str, Vec<&'a str>);

fn signature(g: &Gate) -> Option<(usize, Signature<'_>)> {
    match g {
        Gate::Single {
            name,
            params,
            qubit,
        } => Some((
            *qubit as usize,
            (
                name.as_str(),
                params.iter().map(|a| a.text.as_str()).collect(),
            ),
        )),
        _ => None,
    }
}

/// Checks single-qubit gates exactly, treating each as an opaque function:
/// every output gate must meet the same wire function as its input
/// counterpart, and the final functions must agree up to `perm`. A consumed
/// function never reappears, so it identifies the gate. Works whether SWAPs
/// are kept or written as CNOTs.
pub fn check_single_qubit_order(
    lc: &Circuit,
    physical: &Circuit,
    initial: &QubitMapping,
    perm: &[u32],
) -> Result<bool, VerifyError> {
    let n = check_shapes(lc, physical, initial, perm)?;
    let singles = lc
        .gates()
        .iter()
        .filter(|g| matches!(g, Gate::Single { .. }))
        .count();
    let var = |k: usize| n + k;

    let mut logical = Symbolic::new(n, singles);
    let mut defs: HashMap<Vec<u64>, (usize, Signature)> = HashMap::new();
    let embedded = embed(lc, initial);
    for g in &embedded {
        match signature(g) {
            Some((wire, sig)) => {
                let k = defs.len();
                defs.insert(logical.cut(wire, var(k)), (k, sig));
            }
            None => logical.linear(g),
        }
    }

    let mut phys = Symbolic::new(n, singles);
    let mut used = vec![false; singles];
    for g in physical.gates() {
        let Some((wire, sig)) = signature(g) else {
            phys.linear(g);
            continue;
        };
        match defs.get(&phys.rows[wire]) {
            Some((k, def)) if *def == sig && !used[*k] => {
                used[*k] = true;
                phys.cut(wire, var(*k));
            }
            _ => return Ok(false),
        }
    }
    Ok(used.iter().all(|&u| u) && (0..n).all(|v| phys.rows[perm[v] as usize] == logical.rows[v]))
}

/// `(added CNOTs, added depth)` of a transform result over its input.
pub fn overhead_stats(lc: &Circuit, result: &TransformResult) -> (usize, usize) {
    crate::mcts::added_overhead(lc, &result.physical)
}
