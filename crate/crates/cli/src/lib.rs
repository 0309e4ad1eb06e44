//! Benchmark harness: loads instances, runs every configured method from a
//! shared initial solution per repetition, and writes summary, trace and plot
//! files.
//!
//! Everything in `summary.csv`, the traces' objective fields and the plot files
//! is a function of the spec alone. Wall times go to `metadata.json`.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use qubols::annealer::AnnealerConfig;
use qubols::driver::{
    derive_seed, initial_solution, run_method, run_unconstrained_method, GpProblem, InitPolicy, Method, Problem,
    QapProblem, RunConfig, RunTrace, SelectionPolicy, TspProblem,
};
use qubols::graph::parse_edge_list;
use qubols::partition::Partition;
use qubols::qap::{parse_best_known, parse_qaplib, Permutation};
use qubols::rational::{format_exact, parse_rational, to_f64};
use qubols::tsp::{parse_coordinates, parse_distance_matrix, Rounding, Tour};
use qubols::Rational;

/// Stream id for per-repetition seeds.
const STREAM_REPETITION: u64 = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemKind {
    /// QAPLIB-format file.
    Qap,
    /// Edge list, solved as QAP through the 2-sum reduction.
    M2sp,
    /// Distance matrix, or `x y` lines when `coordinates` is set.
    Tsp,
    /// Edge list with `parts` balanced parts.
    Gp,
}

impl ProblemKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ProblemKind::Qap => "qap",
            ProblemKind::M2sp => "m2sp",
            ProblemKind::Tsp => "tsp",
            ProblemKind::Gp => "gp",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceSpec {
    pub path: PathBuf,
    pub kind: ProblemKind,
    /// Number of parts; required for `gp`.
    #[serde(default)]
    pub parts: Option<usize>,
    #[serde(default)]
    pub coordinates: bool,
    #[serde(default)]
    pub round_distances: bool,
}

impl InstanceSpec {
    /// File stem, used in output names and best-known lookups.
    pub fn name(&self) -> String {
        self.path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| self.path.display().to_string())
    }
}

/// Serializable subset of [`RunConfig`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MethodSpec {
    pub method: String,
    pub k: usize,
    pub m: Option<usize>,
    pub iters: usize,
    pub mc_steps: u64,
    pub replicas: usize,
    pub capacity: usize,
    pub seed_annealer: bool,
    pub random_selection: bool,
    /// Display label; defaults to the method name.
    pub label: Option<String>,
}

impl Default for MethodSpec {
    fn default() -> Self {
        let base = RunConfig::default();
        Self {
            method: base.method.as_str().into(),
            k: base.k,
            m: None,
            iters: base.max_iters,
            mc_steps: base.annealer.mc_steps,
            replicas: base.annealer.num_replicas,
            capacity: base.annealer.capacity,
            seed_annealer: false,
            random_selection: false,
            label: None,
        }
    }
}

impl MethodSpec {
    pub fn label(&self) -> String {
        self.label.clone().unwrap_or_else(|| self.method.clone())
    }

    pub fn to_run_config(&self, seed: u64) -> Result<RunConfig> {
        let method: Method = self.method.parse()?;
        let cfg = RunConfig {
            method,
            max_iters: self.iters,
            k: self.k,
            m: self.m.unwrap_or(usize::MAX),
            annealer: AnnealerConfig {
                mc_steps: self.mc_steps,
                num_replicas: self.replicas,
                capacity: self.capacity,
                ..AnnealerConfig::default()
            },
            seed,
            seed_annealer_with_current: self.seed_annealer,
            selection: if self.random_selection {
                SelectionPolicy::Random
            } else {
                SelectionPolicy::Greedy
            },
            ..RunConfig::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// How the shared initial solution of each repetition is produced.
#[derive(Clone, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitSpec {
    #[default]
    Random,
    Spectral,
    /// File holding a solution in the problem's native text format.
    Given(PathBuf),
}

impl std::str::FromStr for InitSpec {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(InitSpec::Random),
            "spectral" => Ok(InitSpec::Spectral),
            _ => match s.strip_prefix("given:") {
                Some(p) if !p.is_empty() => Ok(InitSpec::Given(p.into())),
                _ => bail!("--init expects random, spectral or given:<file>, got '{s}'"),
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkSpec {
    pub instances: Vec<InstanceSpec>,
    #[serde(default)]
    pub methods: Vec<MethodSpec>,
    #[serde(default = "one")]
    pub repetitions: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub init: InitSpec,
    /// Instance name to best-known objective, as exact decimal or fraction strings.
    #[serde(default)]
    pub best_known: BTreeMap<String, String>,
    /// Sidecar file of `name value` lines, merged over `best_known`.
    #[serde(default)]
    pub best_known_file: Option<PathBuf>,
    pub out: PathBuf,
}

fn one() -> usize {
    1
}

impl BenchmarkSpec {
    /// Reads a TOML spec; relative paths resolve against the spec's directory.
    pub fn from_toml_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut spec: BenchmarkSpec = toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        spec.instances.iter_mut().for_each(|i| resolve(&mut i.path));
        if let Some(p) = spec.best_known_file.as_mut() {
            resolve(p);
        }
        if let InitSpec::Given(p) = &mut spec.init {
            resolve(p);
        }
        resolve(&mut spec.out);
        Ok(spec)
    }

    pub fn repetition_seed(&self, rep: usize) -> u64 {
        derive_seed(self.seed, STREAM_REPETITION, rep as u64)
    }

    pub fn resolved_best_known(&self) -> Result<BTreeMap<String, Rational>> {
        let mut out = BTreeMap::new();
        for (name, v) in &self.best_known {
            let r = parse_rational(v).ok_or_else(|| anyhow!("best-known value '{v}' for {name} is not a number"))?;
            out.insert(name.clone(), r);
        }
        if let Some(p) = &self.best_known_file {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            out.extend(parse_best_known(&text)?);
        }
        Ok(out)
    }
}

/// `objective / best_known`, only for a positive best-known value.
pub fn approximation_ratio(objective: &Rational, best_known: Option<&Rational>) -> Option<f64> {
    best_known
        .filter(|b| **b > Rational::from_integer(0))
        .map(|b| to_f64(&(objective / b)))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SummaryRow {
    pub instance: String,
    pub method: String,
    pub seed: u64,
    pub initial_objective: Option<String>,
    pub final_objective: Option<String>,
    pub approximation_ratio: Option<f64>,
    pub iterations: usize,
    pub accepted: usize,
    pub infeasible_rate: Option<f64>,
    pub annealer_steps: u64,
    #[serde(skip)]
    pub wall_ms: f64,
    pub error: Option<String>,
}

impl SummaryRow {
    fn failure(instance: &str, method: &str, seed: u64, err: &anyhow::Error) -> Self {
        Self {
            instance: instance.into(),
            method: method.into(),
            seed,
            initial_objective: None,
            final_objective: None,
            approximation_ratio: None,
            iterations: 0,
            accepted: 0,
            infeasible_rate: None,
            annealer_steps: 0,
            wall_ms: 0.0,
            error: Some(format!("{err:#}")),
        }
    }

    pub fn is_error(&self) -> bool {
        self.error.is_some()
    }
}

/// Objective series of one run, for plot emission.
#[derive(Clone, Debug, PartialEq)]
pub struct PlotSeries {
    pub instance: String,
    pub label: String,
    /// `records` objectives, iteration 1 first.
    pub objectives: Vec<Rational>,
}

impl PlotSeries {
    pub fn from_trace<S>(instance: &str, label: &str, trace: &RunTrace<S>) -> Self {
        Self {
            instance: instance.into(),
            label: label.into(),
            objectives: trace.records.iter().map(|r| r.objective).collect(),
        }
    }
}

/// Long-format CSV `series,iteration,objective[,ratio]`, one row per iteration.
pub fn emit_plot_data(series: &[PlotSeries], best_known: Option<&Rational>) -> Result<String> {
    if let Some(first) = series.first() {
        if let Some(other) = series.iter().find(|s| s.instance != first.instance) {
            bail!("plot data mixes instances '{}' and '{}'", first.instance, other.instance);
        }
    }
    let ratio_column = best_known.is_some_and(|b| *b > Rational::from_integer(0));
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["series", "iteration", "objective"];
    if ratio_column {
        header.push("ratio");
    }
    w.write_record(&header)?;
    for s in series {
        for (i, obj) in s.objectives.iter().enumerate() {
            let mut row = vec![s.label.clone(), (i + 1).to_string(), format_exact(obj)];
            if let Some(r) = approximation_ratio(obj, best_known).filter(|_| ratio_column) {
                row.push(format!("{r:.6}"));
            }
            w.write_record(&row)?;
        }
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

/// Writes via a temporary file in the same directory, then renames.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).with_context(|| format!("creating temp file in {}", dir.display()))?;
    tmp.write_all(contents)?;
    tmp.persist(path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

pub fn summary_csv(rows: &[SummaryRow]) -> Result<String> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record([
        "instance",
        "method",
        "seed",
        "initial_objective",
        "final_objective",
        "approximation_ratio",
        "iterations",
        "accepted",
        "infeasible_rate",
        "annealer_steps",
        "error",
    ])?;
    for r in rows {
        w.serialize(r)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

enum Loaded {
    Qap(QapProblem),
    Tsp(TspProblem),
    Gp(GpProblem),
}

fn load_instance(spec: &InstanceSpec) -> Result<Loaded> {
    let text = fs::read_to_string(&spec.path).with_context(|| format!("reading {}", spec.path.display()))?;
    Ok(match spec.kind {
        ProblemKind::Qap => Loaded::Qap(QapProblem::new(parse_qaplib(&text)?)),
        ProblemKind::M2sp => {
            let parsed = parse_edge_list(&text)?;
            if parsed.dropped_self_loops > 0 {
                log::warn!("{}: dropped {} self-loops", spec.path.display(), parsed.dropped_self_loops);
            }
            Loaded::Qap(QapProblem::from_m2sp(&parsed.graph)?)
        }
        ProblemKind::Tsp => {
            let inst = if spec.coordinates {
                let rounding = if spec.round_distances {
                    Rounding::NearestInteger
                } else {
                    Rounding::None
                };
                parse_coordinates(&text, rounding)?
            } else {
                parse_distance_matrix(&text)?
            };
            Loaded::Tsp(TspProblem::new(inst))
        }
        ProblemKind::Gp => {
            let k = spec.parts.ok_or_else(|| anyhow!("{}: graph partitioning needs `parts`", spec.path.display()))?;
            Loaded::Gp(GpProblem::new(parse_edge_list(&text)?.graph, k)?)
        }
    })
}

fn whitespace_indices(text: &str) -> Result<Vec<usize>> {
    text.split_whitespace()
        .map(|t| t.parse::<usize>().map_err(|_| anyhow!("bad index '{t}'")))
        .collect()
}

struct Cell {
    row: SummaryRow,
    trace: Option<String>,
    series: Option<PlotSeries>,
}

/// Runs every method from `init` and returns one cell per method.
fn run_all<P, F>(
    problem: &P,
    init: P::Solution,
    instance: &str,
    seed: u64,
    methods: &[MethodSpec],
    best_known: Option<&Rational>,
    run: F,
) -> Vec<Cell>
where
    P: Problem,
    F: Fn(&P, &RunConfig, P::Solution) -> qubols::Result<RunTrace<P::Solution>> + Sync,
    P::Solution: Display,
{
    methods
        .par_iter()
        .map(|ms| {
            let label = ms.label();
            let clock = Instant::now();
            let result = ms
                .to_run_config(seed)
                .and_then(|cfg| run(problem, &cfg, init.clone()).map_err(anyhow::Error::from));
            match result {
                Ok(trace) => {
                    let row = SummaryRow {
                        instance: instance.into(),
                        method: label.clone(),
                        seed,
                        initial_objective: Some(format_exact(&trace.initial_objective)),
                        final_objective: Some(format_exact(&trace.final_objective)),
                        approximation_ratio: approximation_ratio(&trace.final_objective, best_known),
                        iterations: trace.iterations(),
                        accepted: trace.accepted_count(),
                        infeasible_rate: Some(trace.infeasible_rate()),
                        annealer_steps: trace.total_annealer_steps(),
                        wall_ms: clock.elapsed().as_secs_f64() * 1e3,
                        error: None,
                    };
                    let mut jsonl = trace.to_jsonl();
                    jsonl.push_str(
                        &serde_json::json!({ "final_solution": trace.final_solution.to_string() }).to_string(),
                    );
                    jsonl.push('\n');
                    Cell {
                        row,
                        trace: Some(jsonl),
                        series: Some(PlotSeries::from_trace(instance, &label, &trace)),
                    }
                }
                Err(e) => Cell {
                    row: SummaryRow::failure(instance, &label, seed, &e),
                    trace: None,
                    series: None,
                },
            }
        })
        .collect()
}

fn initial_for<P: Problem>(
    problem: &P,
    init: &InitSpec,
    seed: u64,
    parse: impl Fn(&str) -> Result<P::Solution>,
) -> Result<P::Solution> {
    match init {
        InitSpec::Random => Ok(initial_solution(problem, InitPolicy::Random, seed)?),
        InitSpec::Spectral => Ok(initial_solution(problem, InitPolicy::Spectral, seed)?),
        InitSpec::Given(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let s = parse(&text)?;
            problem.objective(&s)?;
            Ok(s)
        }
    }
}

fn run_instance_rep(
    spec: &BenchmarkSpec,
    loaded: &Loaded,
    inst: &InstanceSpec,
    seed: u64,
    best_known: Option<&Rational>,
) -> Result<Vec<Cell>> {
    let name = inst.name();
    Ok(match loaded {
        Loaded::Qap(p) => {
            let init = initial_for(p, &spec.init, seed, |t| Ok(Permutation::parse(t)?))?;
            run_all(p, init, &name, seed, &spec.methods, best_known, run_method)
        }
        Loaded::Tsp(p) => {
            let init = initial_for(p, &spec.init, seed, |t| Ok(Tour::new(whitespace_indices(t)?)?))?;
            run_all(p, init, &name, seed, &spec.methods, best_known, run_unconstrained_method)
        }
        Loaded::Gp(p) => {
            let init = initial_for(p, &spec.init, seed, |t| Ok(Partition::parse(t, p.parts)?))?;
            run_all(p, init, &name, seed, &spec.methods, best_known, run_unconstrained_method)
        }
    })
}

#[derive(Clone, Debug)]
pub struct BenchmarkReport {
    pub rows: Vec<SummaryRow>,
    pub elapsed_ms: f64,
}

impl BenchmarkReport {
    /// True when there was at least one instance and every row failed.
    pub fn all_failed(&self) -> bool {
        !self.rows.is_empty() && self.rows.iter().all(SummaryRow::is_error)
    }
}

/// Runs the spec and writes its outputs into `spec.out`.
pub fn run_benchmark(spec: &BenchmarkSpec) -> Result<BenchmarkReport> {
    let clock = Instant::now();
    fs::create_dir_all(&spec.out).with_context(|| format!("creating {}", spec.out.display()))?;
    let best_known = spec.resolved_best_known()?;

    let per_instance: Vec<(String, Vec<Cell>)> = spec
        .instances
        .par_iter()
        .map(|inst| {
            let name = inst.name();
            let bk = best_known.get(&name);
            let loaded = match load_instance(inst) {
                Ok(l) => l,
                Err(e) => return (name.clone(), vec![instance_error(&name, &e)]),
            };
            let cells: Vec<Cell> = (0..spec.repetitions)
                .into_par_iter()
                .flat_map_iter(|rep| {
                    let seed = spec.repetition_seed(rep);
                    run_instance_rep(spec, &loaded, inst, seed, bk).unwrap_or_else(|e| {
                        vec![Cell {
                            row: SummaryRow::failure(&name, "", seed, &e),
                            trace: None,
                            series: None,
                        }]
                    })
                })
                .collect();
            (name, cells)
        })
        .collect();

    let mut rows = Vec::new();
    let mut metadata_runs = Vec::new();
    for (name, cells) in &per_instance {
        let mut series = Vec::new();
        for cell in cells {
            if let Some(jsonl) = &cell.trace {
                let file = format!("trace-{}-{}-{}.jsonl", name, cell.row.method, cell.row.seed);
                write_atomic(&spec.out.join(file), jsonl.as_bytes())?;
            }
            if let Some(s) = &cell.series {
                series.push(PlotSeries {
                    label: format!("{}-{}", s.label, cell.row.seed),
                    ..s.clone()
                });
            }
            metadata_runs.push(serde_json::json!({
                "instance": cell.row.instance,
                "method": cell.row.method,
                "seed": cell.row.seed,
                "wall_ms": cell.row.wall_ms,
            }));
            rows.push(cell.row.clone());
        }
        if !series.is_empty() {
            let plot = emit_plot_data(&series, best_known.get(name))?;
            write_atomic(&spec.out.join(format!("plot-{name}.csv")), plot.as_bytes())?;
        }
    }
    write_atomic(&spec.out.join("summary.csv"), summary_csv(&rows)?.as_bytes())?;
    let elapsed_ms = clock.elapsed().as_secs_f64() * 1e3;
    let metadata = serde_json::json!({
        "generated_unix_s": std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
        "total_wall_ms": elapsed_ms,
        "runs": metadata_runs,
    });
    write_atomic(&spec.out.join("metadata.json"), serde_json::to_string_pretty(&metadata)?.as_bytes())?;
    Ok(BenchmarkReport { rows, elapsed_ms })
}

fn instance_error(name: &str, e: &anyhow::Error) -> Cell {
    Cell {
        row: SummaryRow::failure(name, "", 0, e),
        trace: None,
        series: None,
    }
}

/// One kind-tagged instance per path.
pub fn instances_of(kind: ProblemKind, paths: &[PathBuf], parts: Option<usize>, coordinates: bool, round: bool) -> Vec<InstanceSpec> {
    paths
        .iter()
        .map(|p| InstanceSpec {
            path: p.clone(),
            kind,
            parts,
            coordinates,
            round_distances: round,
        })
        .collect()
}
