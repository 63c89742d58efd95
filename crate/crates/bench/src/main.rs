use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use qct_bench::bench::{run_bench, write_csv, BenchConfig};
use qct_bench::random::random_circuit;
use qct_bench::runner::{
    best_index, corpus_files, load_arch, load_circuit, load_mapping, run_trials, verify_result,
};
use qct_bench::scaling::{self, run_point, runtime_slope, sweep_points, Sweep};
use qct_bench::write_selection_depths;
use qct_core::qasm::{emit_qasm, EmitOptions};
use qct_core::report::{MappingSidecar, RouteReport, TrialReport};
use qct_core::{MctsParams, Objective, QubitMapping, TransformResult};

#[derive(Parser)]
#[command(
    name = "qct",
    version,
    about = "Qubit routing by Monte Carlo tree search"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Route one circuit and write the best of several trials.
    Route(RouteArgs),
    /// Route every `.qasm` file of a directory and print a CSV report.
    Bench(BenchArgs),
    /// Print a random CNOT circuit as QASM.
    Random(RandomArgs),
    /// Runtime sweeps over random circuits.
    Scaling(ScalingArgs),
    /// Check a routed circuit against its input; exits nonzero on failure.
    Verify(VerifyArgs),
}

#[derive(Args, Clone)]
struct SearchArgs {
    /// `q20`, `grid5x4`, `grid:RxC` or `file:PATH`.
    #[arg(long, default_value = "q20")]
    arch: String,
    #[arg(long, default_value = "size")]
    objective: Objective,
    /// Allow bridge (remote CNOT) actions on distance-2 CNOTs.
    #[arg(long)]
    remote_cnot: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Playouts per decision.
    #[arg(long, default_value_t = 20)]
    nbp: usize,
    /// Exploration weight.
    #[arg(long, default_value_t = 20.0)]
    c: f64,
    /// Rollout window in gates.
    #[arg(long, default_value_t = 30)]
    gsim: usize,
    /// Rollouts per simulation.
    #[arg(long, default_value_t = 500)]
    nsim: usize,
    #[arg(long, default_value_t = 0.7)]
    gamma: f64,
}

impl SearchArgs {
    fn params(&self) -> MctsParams {
        MctsParams {
            n_bp: self.nbp,
            c: self.c,
            g_sim: self.gsim,
            n_sim: self.nsim,
            gamma: self.gamma,
            d_remote: if self.remote_cnot { 2 } else { 0 },
            objective: self.objective,
            seed: self.seed,
        }
    }
}

#[derive(Args)]
struct RouteArgs {
    file: PathBuf,
    #[command(flatten)]
    search: SearchArgs,
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u64).range(1..))]
    trials: u64,
    /// `naive` or `file:PATH` with one vertex per logical qubit.
    #[arg(long, default_value = "naive")]
    mapping: String,
    /// Routed circuit (QASM); stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON report.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Mapping sidecar JSON; defaults to `<out>.mapping.json` when `--out` is given.
    #[arg(long)]
    sidecar: Option<PathBuf>,
    /// Per-decision selection depths of the best trial (CSV).
    #[arg(long)]
    depths: Option<PathBuf>,
    /// Write inserted SWAPs as three `cx` gates.
    #[arg(long)]
    decompose_swaps: bool,
}

#[derive(Args)]
struct BenchArgs {
    dir: PathBuf,
    #[command(flatten)]
    search: SearchArgs,
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u64).range(1..))]
    trials: u64,
    /// Skip circuits with more CNOTs than this.
    #[arg(long)]
    max_cnots: Option<usize>,
    /// CSV output; stdout when omitted.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct RandomArgs {
    #[arg(long, value_parser = clap::value_parser!(u64).range(2..))]
    qubits: u64,
    #[arg(long)]
    cnots: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SweepArg {
    Cnots,
    Qubits,
    Both,
}

#[derive(Args)]
struct ScalingArgs {
    #[command(flatten)]
    search: SearchArgs,
    #[arg(long, value_enum, default_value = "both")]
    sweep: SweepArg,
    /// Random circuits per point.
    #[arg(long, default_value_t = 10)]
    circuits: usize,
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    logical: PathBuf,
    physical: PathBuf,
    /// JSON sidecar with `initial`, `final` and `perm`.
    sidecar: PathBuf,
    #[arg(long, default_value = "q20")]
    arch: String,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Route(a) => route(a),
        Command::Bench(a) => bench(a),
        Command::Random(a) => random(a),
        Command::Scaling(a) => scaling_cmd(a),
        Command::Verify(a) => verify(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = output(Some(path))?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    Ok(w.flush()?)
}

fn route(a: RouteArgs) -> Result<()> {
    let params = a.search.params();
    let ag = load_arch(&a.search.arch)?;
    let lc = load_circuit(&a.file)?;
    let initial = load_mapping(&a.mapping, lc.qubit_count(), &ag)?;
    let results = run_trials(&lc, &ag, &initial, &params, a.trials as usize)?;
    for r in &results {
        verify_result(&lc, &ag, &initial, r)?;
    }
    let best_i = best_index(&results, params.objective).expect("trials >= 1");
    let best = &results[best_i];

    let text = emit_qasm(
        &best.physical,
        EmitOptions {
            decompose_swaps: a.decompose_swaps,
        },
    );
    let mut w = output(a.out.as_deref())?;
    w.write_all(text.as_bytes())?;
    w.flush()?;

    let sidecar = a
        .sidecar
        .or_else(|| a.out.as_ref().map(|o| o.with_extension("mapping.json")));
    if let Some(path) = sidecar {
        write_json(&path, &MappingSidecar::from_result(best))?;
    }
    if let Some(path) = &a.report {
        let trials: Vec<TrialReport> = results
            .iter()
            .zip(0..)
            .map(|(r, t)| TrialReport::from_result(params.seed.wrapping_add(t), r))
            .collect();
        let best_trial = trials[best_i].clone();
        let report = RouteReport {
            circuit: a.file.display().to_string(),
            arch: a.search.arch.clone(),
            objective: params.objective,
            params: params.clone(),
            trials,
            best: best_trial,
        };
        write_json(path, &report)?;
    }
    if let Some(path) = &a.depths {
        write_selection_depths(best, output(Some(path))?)?;
    }
    eprintln!(
        "added cnots {}, added depth {}, fallbacks {}",
        best.added_cnots, best.added_depth, best.fallbacks
    );
    Ok(())
}

fn bench(a: BenchArgs) -> Result<()> {
    let cfg = BenchConfig {
        arch: load_arch(&a.search.arch)?,
        params: a.search.params(),
        trials: a.trials as usize,
    };
    let mut inputs = Vec::new();
    for path in corpus_files(&a.dir)? {
        let name = path
            .file_stem()
            .unwrap_or_default()
            .to_string_lossy()
            .into_owned();
        match load_circuit(&path) {
            Ok(lc) if a.max_cnots.is_some_and(|m| lc.cnot_count() > m) => {}
            Ok(lc) if lc.qubit_count() > cfg.arch.vertex_count() => {
                log::warn!(
                    "{name}: {} qubits do not fit the architecture",
                    lc.qubit_count()
                );
            }
            Ok(lc) => inputs.push((name, lc)),
            Err(e) => log::error!("{e:#}"),
        }
    }
    if inputs.is_empty() {
        bail!("no routable circuits in {}", a.dir.display());
    }
    let rows = run_bench(&inputs, &cfg);
    write_csv(&rows, cfg.params.objective, output(a.csv.as_deref())?)
}

fn random(a: RandomArgs) -> Result<()> {
    let c = random_circuit(a.qubits as usize, a.cnots, a.seed);
    let mut w = output(a.out.as_deref())?;
    w.write_all(emit_qasm(&c, EmitOptions::default()).as_bytes())?;
    Ok(w.flush()?)
}

fn scaling_cmd(a: ScalingArgs) -> Result<()> {
    let ag = load_arch(&a.search.arch)?;
    let params = a.search.params();
    let sweeps: &[Sweep] = match a.sweep {
        SweepArg::Cnots => &[Sweep::Cnots],
        SweepArg::Qubits => &[Sweep::Qubits],
        SweepArg::Both => &[Sweep::Cnots, Sweep::Qubits],
    };
    let mut points = Vec::new();
    for &sweep in sweeps {
        let start = points.len();
        for point in sweep_points(sweep) {
            points.push(run_point(sweep, point, a.circuits, &ag, &params)?);
        }
        eprintln!(
            "{} sweep: log-log runtime slope {:.3}",
            sweep.name(),
            runtime_slope(&points[start..])
        );
    }
    scaling::write_csv(&points, output(a.csv.as_deref())?)
}

fn verify(a: VerifyArgs) -> Result<()> {
    let ag = load_arch(&a.arch)?;
    let lc = load_circuit(&a.logical)?;
    let physical = load_circuit(&a.physical)?;
    let text = std::fs::read_to_string(&a.sidecar)
        .with_context(|| format!("reading {}", a.sidecar.display()))?;
    let sidecar: MappingSidecar =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", a.sidecar.display()))?;
    if physical.qubit_count() != ag.vertex_count() {
        bail!(
            "physical circuit has {} qubits, architecture {}",
            physical.qubit_count(),
            ag.vertex_count()
        );
    }
    let initial = QubitMapping::new(sidecar.initial, ag.vertex_count())?;
    let result = TransformResult {
        initial_mapping: initial.clone(),
        final_mapping: QubitMapping::new(sidecar.final_, ag.vertex_count())?,
        perm: sidecar.perm,
        physical,
        added_cnots: 0,
        added_depth: 0,
        decisions: 0,
        fallbacks: 0,
        selection_depths: Vec::new(),
        wall_time: 0.0,
    };
    verify_result(&lc, &ag, &initial, &result)?;
    println!("ok");
    Ok(())
}
