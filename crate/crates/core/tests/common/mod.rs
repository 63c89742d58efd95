#![allow(dead_code)]

use proptest::prelude::*;
use qct_core::arch::ArchGraph;
use qct_core::circuit::{Angle, Circuit, Gate};

/// CNOT-only circuit on `qubits` wires.
pub fn cnot_circuit(qubits: usize, max_gates: usize) -> impl Strategy<Value = Circuit> {
    prop::collection::vec((0..qubits as u32, 1..qubits as u32), 0..=max_gates).prop_map(
        move |pairs| {
            let gates = pairs
                .into_iter()
                .map(|(a, off)| Gate::cnot(a, (a + off) % qubits as u32));
            Circuit::from_gates(qubits, gates).unwrap()
        },
    )
}

/// Circuit mixing CNOTs, SWAPs and parameterised single-qubit gates.
pub fn mixed_circuit(qubits: usize, max_gates: usize) -> impl Strategy<Value = Circuit> {
    let gate = prop_oneof![
        4 => (0..qubits as u32, 1..qubits as u32)
            .prop_map(move |(a, off)| Gate::cnot(a, (a + off) % qubits as u32)),
        1 => (0..qubits as u32, 1..qubits as u32)
            .prop_map(move |(a, off)| Gate::swap(a, (a + off) % qubits as u32)),
        3 => (0..qubits as u32, prop::sample::select(vec!["h", "t", "tdg", "x"]))
            .prop_map(|(q, name)| Gate::single(name, q)),
        1 => (0..qubits as u32, 1..8i32).prop_map(|(q, k)| Gate::Single {
            name: "rz".into(),
            params: vec![Angle::new(format!("pi/{k}"), std::f64::consts::PI / k as f64)],
            qubit: q,
        }),
    ];
    prop::collection::vec(gate, 0..=max_gates)
        .prop_map(move |gates| Circuit::from_gates(qubits, gates).unwrap())
}

/// Connected graph: a random spanning tree plus random extra edges.
pub fn connected_graph(max_vertices: usize) -> impl Strategy<Value = ArchGraph> {
    (2..=max_vertices)
        .prop_flat_map(|n| {
            (
                Just(n),
                prop::collection::vec(any::<prop::sample::Index>(), n - 1),
                prop::collection::vec((0..n as u32, 0..n as u32), 0..n),
            )
        })
        .prop_map(|(n, parents, extra)| {
            let mut edges: Vec<(u32, u32)> = parents
                .iter()
                .enumerate()
                .map(|(i, p)| (p.index(i + 1) as u32, i as u32 + 1))
                .collect();
            edges.extend(extra.into_iter().filter(|(a, b)| a != b));
            edges
                .iter_mut()
                .for_each(|e| *e = (e.0.min(e.1), e.0.max(e.1)));
            edges.sort_unstable();
            edges.dedup();
            ArchGraph::from_edge_list(n, &edges).unwrap()
        })
}

pub fn path_graph(n: usize) -> ArchGraph {
    let edges: Vec<(u32, u32)> = (1..n as u32).map(|i| (i - 1, i)).collect();
    ArchGraph::from_edge_list(n, &edges).unwrap()
}
