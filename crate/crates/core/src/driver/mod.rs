//! Outer local-search loops over sub-problem QUBOs, plus the SA baseline.
//!
//! Each iteration selects a neighbourhood around the incumbent, formulates it as
//! a QUBO, solves it on the annealer, decodes the result and accepts it only if
//! the objective strictly improves.
//!
//! * [`run_uqubols`]: unconstrained sub-QUBOs ([`ExchangeMoves`]); every
//!   assignment decodes to a feasible solution.
//! * [`run_cqubols`]: penalized sub-QUBOs ([`PenaltyMoves`]) over `m` blocks of
//!   size `k`; infeasible outputs are rejected.
//! * [`run_qls`]: a single block sized to fill the annealer.
//! * [`run_sa_baseline`]: simulated annealing in the native solution space.

mod problems;
mod trace;

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::annealer::{brute_force_solve, solve, AnnealResult, AnnealerConfig, InitialState};
use crate::error::{Error, Result};
use crate::qubo::{BitString, PenaltyConfig, QuboModel};
use crate::rational::{to_f64, Rational};

pub use problems::{GpProblem, QapProblem, TspProblem};
pub use trace::{IterationRecord, RunTrace};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Uqubols,
    Cqubols,
    Qls,
    Sa,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Uqubols, Method::Cqubols, Method::Qls, Method::Sa];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Uqubols => "uqubols",
            Method::Cqubols => "cqubols",
            Method::Qls => "qls",
            Method::Sa => "sa",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown method '{s}'")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SolverKind {
    #[default]
    Annealer,
    /// Exhaustive enumeration; only for sub-QUBOs of at most 24 variables.
    BruteForce,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SelectionPolicy {
    /// Rank candidate local changes by their individual objective change.
    #[default]
    Greedy,
    Random,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum InitPolicy {
    #[default]
    Random,
    Spectral,
    /// Supplied by the caller.
    Given,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SaConfig {
    /// Geometric cooling ratio applied after every step.
    pub cooling: f64,
    /// Starting temperature. `None` derives it from sampled uphill moves so an
    /// average uphill move is accepted with probability 1/2; `Some(0.0)` is pure
    /// descent.
    pub initial_temperature: Option<f64>,
}

impl Default for SaConfig {
    fn default() -> Self {
        Self {
            cooling: 0.995,
            initial_temperature: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub method: Method,
    /// Outer iterations; for SA, the number of proposed moves.
    pub max_iters: usize,
    /// Block size for C-QUBO-LS.
    pub k: usize,
    /// Number of local changes (U-QUBO-LS) or blocks (C-QUBO-LS).
    pub m: usize,
    pub annealer: AnnealerConfig,
    pub solver: SolverKind,
    pub seed: u64,
    pub init: InitPolicy,
    /// Start every replica from the encoding of the incumbent.
    pub seed_annealer_with_current: bool,
    pub selection: SelectionPolicy,
    pub penalties: PenaltyConfig,
    pub sa: SaConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            method: Method::Uqubols,
            max_iters: 30,
            k: 2,
            m: usize::MAX,
            annealer: AnnealerConfig::default(),
            solver: SolverKind::Annealer,
            seed: 0,
            init: InitPolicy::Random,
            seed_annealer_with_current: false,
            selection: SelectionPolicy::Greedy,
            penalties: PenaltyConfig::default(),
            sa: SaConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.m == 0 {
            return Err(Error::Config("k and m must be at least 1".into()));
        }
        if self.method == Method::Cqubols && self.k < 2 {
            return Err(Error::Config("C-QUBO-LS needs k >= 2".into()));
        }
        if !(self.sa.cooling > 0.0 && self.sa.cooling <= 1.0) {
            return Err(Error::Config(format!("cooling ratio {} must lie in (0, 1]", self.sa.cooling)));
        }
        if let Some(t) = self.sa.initial_temperature {
            if !(t >= 0.0 && t.is_finite()) {
                return Err(Error::Config(format!("initial temperature {t} must be finite and >= 0")));
            }
        }
        self.annealer.validate()
    }
}

/// Deterministic 64-bit seed for a named sub-stream of a run.
pub fn derive_seed(base: u64, stream: u64, index: u64) -> u64 {
    let mut z = base
        ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ index.wrapping_add(1).wrapping_mul(0xD1B5_4A32_D192_ED03);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

const STREAM_INIT: u64 = 1;
const STREAM_SELECT: u64 = 2;
const STREAM_ANNEAL: u64 = 3;
const STREAM_SA: u64 = 4;

/// An optimization problem with a native solution space.
pub trait Problem: Sync {
    type Solution: Clone + fmt::Debug + fmt::Display + PartialEq + Send + Sync;

    fn objective(&self, s: &Self::Solution) -> Result<Rational>;
    fn random_solution(&self, rng: &mut ChaCha8Rng) -> Self::Solution;
    fn spectral_solution(&self) -> Option<Self::Solution> {
        None
    }
}

/// Unconstrained moves: one variable per local change, every assignment feasible.
pub trait ExchangeMoves: Problem {
    type Plan;

    /// Picks at most `m` mutually compatible local changes around `current`.
    fn select_plan(
        &self,
        current: &Self::Solution,
        m: usize,
        policy: SelectionPolicy,
        rng: &mut ChaCha8Rng,
    ) -> Result<Self::Plan>;
    fn build_exchange_qubo(&self, current: &Self::Solution, plan: &Self::Plan) -> Result<QuboModel>;
    fn decode_exchange(&self, current: &Self::Solution, plan: &Self::Plan, y: &BitString) -> Result<Self::Solution>;
}

/// Penalized block reassignment.
pub trait PenaltyMoves: Problem {
    type Blocks;

    /// Number of elements blocks are drawn from.
    fn universe(&self) -> usize;
    fn select_blocks(
        &self,
        current: &Self::Solution,
        k: usize,
        m: usize,
        policy: SelectionPolicy,
        rng: &mut ChaCha8Rng,
    ) -> Result<Self::Blocks>;
    fn build_penalty_qubo(
        &self,
        current: &Self::Solution,
        blocks: &Self::Blocks,
        penalties: &PenaltyConfig,
    ) -> Result<QuboModel>;
    fn encode_current(&self, blocks: &Self::Blocks) -> BitString;
    /// `None` when the assignment violates a constraint.
    fn decode_penalty(
        &self,
        current: &Self::Solution,
        blocks: &Self::Blocks,
        x: &BitString,
    ) -> Result<Option<Self::Solution>>;
}

/// Random single-move neighbourhood for simulated annealing.
pub trait NeighborMoves: Problem {
    type Move: Copy;

    fn random_move(&self, current: &Self::Solution, rng: &mut ChaCha8Rng) -> Option<Self::Move>;
    fn move_delta(&self, current: &Self::Solution, mv: Self::Move) -> Result<Rational>;
    fn apply_move(&self, current: &mut Self::Solution, mv: Self::Move);
}

/// Initial solution according to `policy`; `Given` must be handled by the caller.
pub fn initial_solution<P: Problem>(problem: &P, policy: InitPolicy, seed: u64) -> Result<P::Solution> {
    match policy {
        InitPolicy::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, STREAM_INIT, 0));
            Ok(problem.random_solution(&mut rng))
        }
        InitPolicy::Spectral => problem
            .spectral_solution()
            .ok_or_else(|| Error::Config("this problem has no spectral initial solution".into())),
        InitPolicy::Given => Err(Error::Config("a given initial solution must be supplied by the caller".into())),
    }
}

fn solve_sub(model: &QuboModel, cfg: &RunConfig, iteration: usize, start: Option<&BitString>) -> Result<AnnealResult> {
    match cfg.solver {
        SolverKind::BruteForce => {
            if model.n() > cfg.annealer.capacity {
                return Err(Error::CapacityExceeded {
                    n: model.n(),
                    capacity: cfg.annealer.capacity,
                });
            }
            brute_force_solve(model)
        }
        SolverKind::Annealer => {
            let mut a = cfg.annealer.clone();
            a.seed = derive_seed(cfg.seed, STREAM_ANNEAL, iteration as u64);
            a.initial = match start {
                Some(x) if cfg.seed_annealer_with_current => InitialState::Given(x.clone()),
                _ => InitialState::Random,
            };
            solve(model, &a)
        }
    }
}

fn elapsed_ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

/// U-QUBO-LS with `m` capped by the annealer capacity.
pub fn run_uqubols<P: ExchangeMoves>(problem: &P, cfg: &RunConfig, initial: P::Solution) -> Result<RunTrace<P::Solution>> {
    cfg.validate()?;
    let m = cfg.m.min(cfg.annealer.capacity);
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, STREAM_SELECT, 0));
    let mut current = initial;
    let mut current_obj = problem.objective(&current)?;
    let initial_objective = current_obj;
    let mut records = Vec::new();
    for it in 1..=cfg.max_iters {
        let clock = Instant::now();
        let plan = problem.select_plan(&current, m, cfg.selection, &mut rng)?;
        let model = problem.build_exchange_qubo(&current, &plan)?;
        let zero = BitString::zeros(model.n());
        let incumbent_energy = model.evaluate(&zero)?;
        let result = solve_sub(&model, cfg, it, Some(&zero))?;
        let candidate = problem.decode_exchange(&current, &plan, &result.best)?;
        let candidate_obj = problem.objective(&candidate)?;
        let accepted = candidate_obj < current_obj;
        if accepted {
            current = candidate;
            current_obj = candidate_obj;
        }
        records.push(IterationRecord {
            iteration: it,
            objective: current_obj,
            candidate_objective: Some(candidate_obj),
            qubo_vars: model.n(),
            annealer_steps: result.steps_used,
            accepted,
            feasible: true,
            candidate_energy: Some(result.best_energy),
            incumbent_energy: Some(incumbent_energy),
            wall_ms: elapsed_ms(clock),
        });
        log::debug!("uqubols iter {it}: objective {}", to_f64(&current_obj));
    }
    Ok(RunTrace::new(Method::Uqubols, initial_objective, records, current, current_obj))
}

fn penalty_loop<P: PenaltyMoves>(
    problem: &P,
    cfg: &RunConfig,
    initial: P::Solution,
    method: Method,
    k: usize,
    m: usize,
) -> Result<RunTrace<P::Solution>> {
    let vars_per_block = k * k;
    if vars_per_block > cfg.annealer.capacity {
        return Err(Error::CapacityExceeded {
            n: vars_per_block,
            capacity: cfg.annealer.capacity,
        });
    }
    let m = m.min(cfg.annealer.capacity / vars_per_block);
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, STREAM_SELECT, 0));
    let mut current = initial;
    let mut current_obj = problem.objective(&current)?;
    let initial_objective = current_obj;
    let mut records = Vec::new();
    for it in 1..=cfg.max_iters {
        let clock = Instant::now();
        let blocks = problem.select_blocks(&current, k, m, cfg.selection, &mut rng)?;
        let model = problem.build_penalty_qubo(&current, &blocks, &cfg.penalties)?;
        let encoded = problem.encode_current(&blocks);
        let incumbent_energy = model.evaluate(&encoded)?;
        let result = solve_sub(&model, cfg, it, Some(&encoded))?;
        let candidate = problem.decode_penalty(&current, &blocks, &result.best)?;
        let feasible = candidate.is_some();
        let mut candidate_obj = None;
        let mut accepted = false;
        if let Some(c) = candidate {
            let obj = problem.objective(&c)?;
            candidate_obj = Some(obj);
            if obj < current_obj {
                current = c;
                current_obj = obj;
                accepted = true;
            }
        }
        records.push(IterationRecord {
            iteration: it,
            objective: current_obj,
            candidate_objective: candidate_obj,
            qubo_vars: model.n(),
            annealer_steps: result.steps_used,
            accepted,
            feasible,
            candidate_energy: Some(result.best_energy),
            incumbent_energy: Some(incumbent_energy),
            wall_ms: elapsed_ms(clock),
        });
        log::debug!("{method} iter {it}: objective {} feasible {feasible}", to_f64(&current_obj));
    }
    Ok(RunTrace::new(method, initial_objective, records, current, current_obj))
}

/// C-QUBO-LS over `m` blocks of size `k`, with `m` capped so `m k^2` fits the annealer.
pub fn run_cqubols<P: PenaltyMoves>(problem: &P, cfg: &RunConfig, initial: P::Solution) -> Result<RunTrace<P::Solution>> {
    cfg.validate()?;
    if cfg.k < 2 {
        return Err(Error::Config("C-QUBO-LS needs k >= 2".into()));
    }
    penalty_loop(problem, cfg, initial, Method::Cqubols, cfg.k, cfg.m)
}

/// Block size QLS uses: the largest `k <= n` with `k^2` within capacity.
pub fn qls_block_size(n: usize, capacity: usize) -> usize {
    n.min(capacity.isqrt())
}

/// QLS: one block of size [`qls_block_size`] per iteration.
pub fn run_qls<P: PenaltyMoves>(problem: &P, cfg: &RunConfig, initial: P::Solution) -> Result<RunTrace<P::Solution>> {
    cfg.validate()?;
    let k = qls_block_size(problem.universe(), cfg.annealer.capacity);
    if k == 0 {
        return Err(Error::Config("QLS needs a non-empty problem".into()));
    }
    penalty_loop(problem, cfg, initial, Method::Qls, k, 1)
}

/// Simulated annealing over native moves with geometric cooling.
///
/// Each record's `objective` is the best objective found so far and
/// `candidate_objective` the objective of the proposed neighbour.
pub fn run_sa_baseline<P: NeighborMoves>(problem: &P, cfg: &RunConfig, initial: P::Solution) -> Result<RunTrace<P::Solution>> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, STREAM_SA, 0));
    let mut current = initial;
    let mut current_obj = problem.objective(&current)?;
    let mut best = current.clone();
    let mut best_obj = current_obj;
    let initial_objective = current_obj;
    let mut records = Vec::new();

    let mut temperature = match cfg.sa.initial_temperature {
        Some(t) => t,
        None => {
            let mut uphill = Vec::new();
            for _ in 0..100 {
                if let Some(mv) = problem.random_move(&current, &mut rng) {
                    let d = to_f64(&problem.move_delta(&current, mv)?);
                    if d > 0.0 {
                        uphill.push(d);
                    }
                }
            }
            if uphill.is_empty() {
                1.0
            } else {
                uphill.iter().sum::<f64>() / uphill.len() as f64 / std::f64::consts::LN_2
            }
        }
    };

    for it in 1..=cfg.max_iters {
        let clock = Instant::now();
        let Some(mv) = problem.random_move(&current, &mut rng) else {
            break;
        };
        let delta = problem.move_delta(&current, mv)?;
        let d = to_f64(&delta);
        let accepted = d < 0.0 || (temperature > 0.0 && rng.gen::<f64>() < (-d / temperature).exp());
        let candidate_obj = current_obj + delta;
        if accepted {
            problem.apply_move(&mut current, mv);
            current_obj = candidate_obj;
            if current_obj < best_obj {
                best_obj = current_obj;
                best.clone_from(&current);
            }
        }
        temperature *= cfg.sa.cooling;
        records.push(IterationRecord {
            iteration: it,
            objective: best_obj,
            candidate_objective: Some(candidate_obj),
            qubo_vars: 0,
            annealer_steps: 0,
            accepted,
            feasible: true,
            candidate_energy: None,
            incumbent_energy: None,
            wall_ms: elapsed_ms(clock),
        });
    }
    Ok(RunTrace::new(Method::Sa, initial_objective, records, best, best_obj))
}

/// Runs any method on a problem supporting every move family.
pub fn run_method<P>(problem: &P, cfg: &RunConfig, initial: P::Solution) -> Result<RunTrace<P::Solution>>
where
    P: ExchangeMoves + PenaltyMoves + NeighborMoves,
{
    match cfg.method {
        Method::Uqubols => run_uqubols(problem, cfg, initial),
        Method::Cqubols => run_cqubols(problem, cfg, initial),
        Method::Qls => run_qls(problem, cfg, initial),
        Method::Sa => run_sa_baseline(problem, cfg, initial),
    }
}

/// Runs U-QUBO-LS or SA on a problem without a penalized formulation.
pub fn run_unconstrained_method<P>(problem: &P, cfg: &RunConfig, initial: P::Solution) -> Result<RunTrace<P::Solution>>
where
    P: ExchangeMoves + NeighborMoves,
{
    match cfg.method {
        Method::Uqubols => run_uqubols(problem, cfg, initial),
        Method::Sa => run_sa_baseline(problem, cfg, initial),
        m => Err(Error::Config(format!("method {m} is not available for this problem"))),
    }
}
