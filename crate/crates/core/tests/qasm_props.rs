mod common;

use std::path::PathBuf;

use common::mixed_circuit;
use proptest::prelude::*;
use qct_core::circuit::{decompose_swaps, strip_single_qubit, Circuit, Gate};
use qct_core::qasm::{emit_qasm, parse_qasm, EmitOptions, QasmError};

fn corpus() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../benchmarks/revlib")
}

const KEEP: EmitOptions = EmitOptions {
    decompose_swaps: false,
};
const SPLIT: EmitOptions = EmitOptions {
    decompose_swaps: true,
};

/// Fragments that recombine into plausible and broken programs.
fn qasm_soup() -> impl Strategy<Value = String> {
    let piece = prop::sample::select(vec![
        "OPENQASM 2.0;",
        "include \"qelib1.inc\";",
        "qreg q[3];",
        "qreg",
        "q[",
        "]",
        "[",
        "creg c[2];",
        "cx q[0],q[1];",
        "cx",
        "q[7]",
        ",",
        ";",
        "(",
        ")",
        "pi",
        "/",
        "*",
        "-",
        "u3(pi/2,0,pi)",
        "rz(",
        "0.5e3",
        "1e",
        "measure q[0] -> c[0];",
        "barrier q;",
        "if",
        "gate foo a { }",
        "ccx q[0],q[1],q[2];",
        "h q;",
        "swap q[0],q[2];",
        "//c\n",
        "\n",
        "\"",
        "@",
        "99999999999999999999",
        "q",
        "cx q,q;",
        "->",
        "{",
        "x q[1];",
    ]);
    prop_oneof![
        prop::collection::vec(piece, 0..24).prop_map(|v| v.join(" ")),
        ".{0,200}",
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn parse_inverts_emit(c in mixed_circuit(6, 40)) {
        let text = emit_qasm(&c, KEEP);
        let back = parse_qasm(&text).unwrap();
        prop_assert_eq!(back.circuit.gates(), c.gates());
        prop_assert_eq!(back.circuit.qubit_count(), c.qubit_count());
        prop_assert!(back.dropped.is_empty());
    }

    #[test]
    fn emit_is_stable(c in mixed_circuit(6, 40)) {
        for opts in [KEEP, SPLIT] {
            let text = emit_qasm(&c, opts);
            prop_assert_eq!(emit_qasm(&parse_qasm(&text).unwrap().circuit, opts), text.clone());
        }
    }

    #[test]
    fn decomposed_emit_parses_to_decomposition(c in mixed_circuit(6, 40)) {
        let back = parse_qasm(&emit_qasm(&c, SPLIT)).unwrap();
        let expected = decompose_swaps(&c);
        prop_assert_eq!(back.circuit.gates(), expected.gates());
    }

    #[test]
    fn parser_never_panics(src in qasm_soup()) {
        let _ = parse_qasm(&src);
    }
}

#[test]
fn empty_circuit_emits_header_only() {
    let text = emit_qasm(&Circuit::new(3).unwrap(), KEEP);
    assert_eq!(text, "OPENQASM 2.0;\ninclude \"qelib1.inc\";\nqreg q[3];\n");
}

#[test]
fn swap_can_be_written_as_three_cx() {
    let c = Circuit::from_gates(2, [Gate::swap(0, 1)]).unwrap();
    let text = emit_qasm(&c, SPLIT);
    assert_eq!(text.lines().filter(|l| l.starts_with("cx ")).count(), 3);
    assert!(!text.contains("swap"));
}

#[test]
fn registers_are_flattened() {
    let p = parse_qasm("qreg a[2]; qreg b[3]; cx a[1],b[0]; h b;").unwrap();
    assert_eq!(
        p.registers,
        vec![("a".to_string(), 2), ("b".to_string(), 3)]
    );
    assert_eq!(p.circuit.qubit_count(), 5);
    assert_eq!(p.circuit.gates()[0], Gate::cnot(1, 2));
    assert_eq!(p.circuit.len(), 4);
}

#[test]
fn errors_carry_positions_and_constructs() {
    match parse_qasm("qreg q[2];\ncx q[0] q[1];") {
        Err(QasmError::Syntax { line, .. }) => assert_eq!(line, 2),
        other => panic!("expected a syntax error, got {other:?}"),
    }
    match parse_qasm("qreg q[3];\nccx q[0],q[1],q[2];") {
        Err(QasmError::Unsupported {
            line, construct, ..
        }) => {
            assert_eq!(line, 2);
            assert_eq!(construct, "ccx");
        }
        other => panic!("expected an unsupported construct, got {other:?}"),
    }
    for src in [
        "qreg q[1]; creg c[1]; if(c==1) x q[0];",
        "gate g a { x a; }",
    ] {
        assert!(
            matches!(parse_qasm(src), Err(QasmError::Unsupported { .. })),
            "{src}"
        );
    }
    assert!(matches!(
        parse_qasm("qreg q[2]; cx q[0],q[2];"),
        Err(QasmError::Semantic { .. })
    ));
    assert!(matches!(
        parse_qasm("OPENQASM 2.0;"),
        Err(QasmError::NoRegister)
    ));
}

#[test]
fn benchmark_cnot_count() {
    let src = std::fs::read_to_string(corpus().join("4mod5-v1_22.qasm")).unwrap();
    let p = parse_qasm(&src).unwrap();
    assert_eq!(strip_single_qubit(&p.circuit).circuit.cnot_count(), 11);
}

#[test]
fn whole_corpus_parses_and_round_trips() {
    let mut files: Vec<_> = std::fs::read_dir(corpus())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "qasm"))
        .collect();
    files.sort();
    assert!(files.len() >= 100);
    for f in files {
        let p = parse_qasm(&std::fs::read_to_string(&f).unwrap())
            .unwrap_or_else(|e| panic!("{}: {e}", f.display()));
        let again = parse_qasm(&emit_qasm(&p.circuit, KEEP)).unwrap();
        assert_eq!(again.circuit, p.circuit, "{}", f.display());
    }
}
