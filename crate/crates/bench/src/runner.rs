use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use rayon::prelude::*;

use qct_core::arch::from_spec;
use qct_core::qasm::parse_qasm;
use qct_core::verify::{check_connectivity, check_equivalence};
use qct_core::{
    transform, ArchGraph, Circuit, MctsParams, Objective, QubitMapping, TransformResult,
};

/// Runs `trials` transformations with seeds `params.seed + t`, in parallel.
/// Results keep trial order.
pub fn run_trials(
    lc: &Circuit,
    ag: &ArchGraph,
    initial: &QubitMapping,
    params: &MctsParams,
    trials: usize,
) -> Result<Vec<TransformResult>> {
    (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let p = MctsParams {
                seed: params.seed.wrapping_add(t),
                ..params.clone()
            };
            Ok(transform(lc, ag, initial, &p)?)
        })
        .collect()
}

/// Index of the best result: least objective metric, then least other
/// metric, then earliest trial.
pub fn best_index(results: &[TransformResult], objective: Objective) -> Option<usize> {
    let key = |r: &TransformResult| match objective {
        Objective::Size => (r.added_cnots, r.added_depth),
        Objective::Depth => (r.added_depth, r.added_cnots),
    };
    (0..results.len()).min_by_key(|&i| key(&results[i]))
}

/// Connectivity and equivalence of a routed circuit.
pub fn verify_result(
    lc: &Circuit,
    ag: &ArchGraph,
    initial: &QubitMapping,
    r: &TransformResult,
) -> Result<()> {
    if !check_connectivity(&r.physical, ag) {
        bail!("routed circuit uses a pair that is not an architecture edge");
    }
    if !check_equivalence(lc, r, initial, ag)? {
        bail!("routed circuit is not equivalent to its input");
    }
    Ok(())
}

pub fn load_circuit(path: &Path) -> Result<Circuit> {
    let src =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let program = parse_qasm(&src).with_context(|| format!("parsing {}", path.display()))?;
    if let Some(w) = program.warning() {
        log::info!("{}: {w}", path.display());
    }
    Ok(program.circuit)
}

/// `.qasm` files of a directory, sorted by name.
pub fn corpus_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .with_context(|| format!("listing {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "qasm"))
        .collect();
    files.sort();
    Ok(files)
}

pub fn load_arch(spec: &str) -> Result<ArchGraph> {
    from_spec(spec).with_context(|| format!("architecture `{spec}`"))
}

/// `naive`, or `file:PATH` listing the vertex of each logical qubit
/// (whitespace or comma separated).
pub fn load_mapping(spec: &str, logical: usize, ag: &ArchGraph) -> Result<QubitMapping> {
    if spec == "naive" {
        return Ok(QubitMapping::naive(logical, ag.vertex_count())?);
    }
    let Some(path) = spec.strip_prefix("file:") else {
        bail!("unknown mapping `{spec}` (expected naive or file:PATH)");
    };
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {path}"))?;
    let vertices = text
        .split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<u32>()
                .with_context(|| format!("bad vertex `{t}` in {path}"))
        })
        .collect::<Result<Vec<_>>>()?;
    if vertices.len() != logical {
        bail!(
            "{path} maps {} qubits, circuit has {logical}",
            vertices.len()
        );
    }
    Ok(QubitMapping::new(vertices, ag.vertex_count())?)
}
