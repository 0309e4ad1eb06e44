use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

use qubols_cli::{instances_of, run_benchmark, BenchmarkSpec, InitSpec, MethodSpec, ProblemKind};

#[derive(Parser)]
#[command(name = "qubols", version, about = "QUBO-based local search for permutation and partition problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// QAPLIB-format instances.
    RunQap(RunArgs),
    /// Edge-list graphs, minimum 2-sum via QAP.
    RunM2sp(RunArgs),
    /// Distance matrices, or coordinate files with --coordinates.
    RunTsp {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        coordinates: bool,
        /// Round Euclidean distances to the nearest integer.
        #[arg(long)]
        round: bool,
    },
    /// Edge-list graphs split into --parts balanced parts.
    RunGp {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        parts: usize,
    },
    /// Run a TOML benchmark spec.
    Bench {
        spec: PathBuf,
        /// Overrides the spec's output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(required = true)]
    instances: Vec<PathBuf>,
    /// Comma-separated: uqubols, cqubols, qls, sa.
    #[arg(long, value_delimiter = ',', default_value = "uqubols")]
    method: Vec<String>,
    #[arg(long, default_value_t = 2)]
    k: usize,
    /// Defaults to as many as fit the capacity.
    #[arg(long)]
    m: Option<usize>,
    #[arg(long, default_value_t = 30)]
    iters: usize,
    #[arg(long, default_value_t = 10_000)]
    mc_steps: u64,
    #[arg(long, default_value_t = 8)]
    replicas: usize,
    #[arg(long, env = "QUBOLS_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    repetitions: usize,
    /// random, spectral or given:<file>.
    #[arg(long, default_value = "random")]
    init: InitSpec,
    /// Start each annealer run from the current solution's encoding.
    #[arg(long)]
    seed_annealer: bool,
    /// Random instead of greedy selection of local changes.
    #[arg(long)]
    random_selection: bool,
    #[arg(long, default_value_t = 1024)]
    capacity: usize,
    /// Lines of `instance-name value`.
    #[arg(long)]
    best_known: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

impl RunArgs {
    fn into_spec(self, kind: ProblemKind, parts: Option<usize>, coordinates: bool, round: bool) -> BenchmarkSpec {
        let methods = self
            .method
            .iter()
            .map(|m| MethodSpec {
                method: m.clone(),
                k: self.k,
                m: self.m,
                iters: self.iters,
                mc_steps: self.mc_steps,
                replicas: self.replicas,
                capacity: self.capacity,
                seed_annealer: self.seed_annealer,
                random_selection: self.random_selection,
                label: None,
            })
            .collect();
        BenchmarkSpec {
            instances: instances_of(kind, &self.instances, parts, coordinates, round),
            methods,
            repetitions: self.repetitions,
            seed: self.seed,
            init: self.init,
            best_known: BTreeMap::new(),
            best_known_file: self.best_known,
            out: self.out,
        }
    }
}

fn run(cli: Cli) -> Result<bool> {
    let spec = match cli.command {
        Command::RunQap(a) => a.into_spec(ProblemKind::Qap, None, false, false),
        Command::RunM2sp(a) => a.into_spec(ProblemKind::M2sp, None, false, false),
        Command::RunTsp { run, coordinates, round } => run.into_spec(ProblemKind::Tsp, None, coordinates, round),
        Command::RunGp { run, parts } => run.into_spec(ProblemKind::Gp, Some(parts), false, false),
        Command::Bench { spec, out } => {
            let mut s = BenchmarkSpec::from_toml_file(&spec)?;
            if let Some(o) = out {
                s.out = o;
            }
            s
        }
    };
    let report = run_benchmark(&spec)?;
    for row in &report.rows {
        match (&row.error, &row.final_objective) {
            (Some(e), _) => eprintln!("{} {}: error: {e}", row.instance, row.method),
            (None, Some(obj)) => println!(
                "{} {} seed {}: {obj}{}",
                row.instance,
                row.method,
                row.seed,
                row.approximation_ratio.map(|r| format!(" (ratio {r:.4})")).unwrap_or_default()
            ),
            _ => {}
        }
    }
    log::info!("finished in {:.0} ms, outputs in {}", report.elapsed_ms, spec.out.display());
    Ok(!report.all_failed())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
