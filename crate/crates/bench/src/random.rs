use qct_core::circuit::{Circuit, Gate};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `cnots` CNOTs on uniformly random ordered pairs of distinct qubits.
///
/// # Panics
/// If `qubits < 2`.
pub fn random_circuit(qubits: usize, cnots: usize, seed: u64) -> Circuit {
    assert!(qubits >= 2, "a CNOT needs two qubits");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = qubits as u32;
    let gates = (0..cnots).map(|_| {
        let c = rng.gen_range(0..n);
        let t = rng.gen_range(0..n - 1);
        Gate::cnot(c, if t >= c { t + 1 } else { t })
    });
    Circuit::from_gates(qubits, gates).expect("operands are in range")
}
