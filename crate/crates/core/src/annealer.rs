//! Software emulation of a capacity-limited Ising processing unit.
//!
//! [`solve`] runs Metropolis single-flip dynamics on a fixed geometric ladder
//! of temperatures with periodic replica exchange (parallel tempering), and
//! returns the best assignment seen within a budget of Monte-Carlo steps.
//! The model is first compiled to integers over a common denominator so the
//! inner loop is exact and allocation free.

use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::qubo::{quantize, BitString, QuboModel};
use crate::rational::{common_denominator, scale_to, Rational};

pub const DEFAULT_CAPACITY: usize = 1024;
pub const BRUTE_FORCE_LIMIT: usize = 24;

#[derive(Clone, Debug, PartialEq)]
pub enum Temperatures {
    /// Geometric ladder between two positive temperatures (energy units of the model).
    Fixed { min: f64, max: f64 },
    /// Ladder derived from the model's coefficients: the hottest replica accepts the
    /// largest possible single-flip increase with probability 1/2, the coldest accepts
    /// the smallest non-zero coefficient with probability 1/100.
    Auto,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub enum InitialState {
    #[default]
    Random,
    Given(BitString),
}

#[derive(Clone, Debug, PartialEq)]
pub struct AnnealerConfig {
    /// Total single-flip proposals, summed over replicas.
    pub mc_steps: u64,
    pub num_replicas: usize,
    pub temperatures: Temperatures,
    /// Proposals per replica between exchange rounds; `None` means one sweep.
    pub exchange_interval: Option<u64>,
    pub seed: u64,
    pub capacity: usize,
    pub initial: InitialState,
    /// Round coefficients to this many bits before annealing. Off by default.
    pub precision_bits: Option<u32>,
    /// Run replicas of a round on the rayon pool. Output is identical either way.
    pub parallel: bool,
}

impl Default for AnnealerConfig {
    fn default() -> Self {
        Self {
            mc_steps: 10_000,
            num_replicas: 8,
            temperatures: Temperatures::Auto,
            exchange_interval: None,
            seed: 0,
            capacity: DEFAULT_CAPACITY,
            initial: InitialState::Random,
            precision_bits: None,
            parallel: false,
        }
    }
}

impl AnnealerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_replicas == 0 {
            return Err(Error::Config("num_replicas must be at least 1".into()));
        }
        if self.capacity == 0 {
            return Err(Error::Config("capacity must be at least 1".into()));
        }
        if let Temperatures::Fixed { min, max } = self.temperatures {
            if !(min > 0.0 && min.is_finite() && max.is_finite() && min <= max) {
                return Err(Error::Config(format!(
                    "temperature ladder requires 0 < temp_min <= temp_max, got [{min}, {max}]"
                )));
            }
        }
        if self.exchange_interval == Some(0) {
            return Err(Error::Config("exchange_interval must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AnnealResult {
    pub best: BitString,
    pub best_energy: Rational,
    /// `(steps consumed, best energy so far)`, recorded whenever the best improves.
    pub energy_trace: Vec<(u64, Rational)>,
    pub steps_used: u64,
}

/// Integer copy of a QUBO: every coefficient multiplied by `scale`.
#[derive(Clone, Debug)]
pub struct CompiledModel {
    n: usize,
    scale: i128,
    offset: Rational,
    linear: Vec<i64>,
    adj_start: Vec<usize>,
    adj: Vec<(u32, i64)>,
}

impl CompiledModel {
    pub fn new(model: &QuboModel) -> Result<Self> {
        let n = model.n();
        let scale = common_denominator(
            model
                .linear()
                .iter()
                .chain(model.quadratic().iter().map(|t| &t.coeff)),
        )?;
        let linear = model
            .linear()
            .iter()
            .map(|c| scale_to(c, scale))
            .collect::<Result<Vec<_>>>()?;
        let mut adj_start = Vec::with_capacity(n + 1);
        let mut adj = Vec::new();
        adj_start.push(0);
        let mut budget: i128 = 0;
        for i in 0..n {
            let mut row: i128 = (linear[i] as i128).abs();
            for (j, c) in model.neighbors(i) {
                let v = scale_to(c, scale)?;
                row += (v as i128).abs();
                adj.push((*j as u32, v));
            }
            budget = budget.max(row);
            adj_start.push(adj.len());
        }
        // Local fields are bounded by the largest row sum; energies by the total.
        let total: i128 = linear.iter().map(|v| (*v as i128).abs()).sum::<i128>()
            + adj.iter().map(|(_, v)| (*v as i128).abs()).sum::<i128>();
        if budget > i64::MAX as i128 / 4 || total > i64::MAX as i128 / 4 {
            return Err(Error::Overflow("model coefficients too large for the annealer".into()));
        }
        Ok(Self {
            n,
            scale,
            offset: model.offset(),
            linear,
            adj_start,
            adj,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Exact energy of an integer-scaled energy value.
    pub fn to_energy(&self, scaled: i64) -> Rational {
        Rational::new(scaled as i128, self.scale) + self.offset
    }

    fn neighbors(&self, i: usize) -> &[(u32, i64)] {
        &self.adj[self.adj_start[i]..self.adj_start[i + 1]]
    }

    fn scaled_energy(&self, bits: &[bool]) -> i64 {
        let mut e = 0i64;
        for i in 0..self.n {
            if bits[i] {
                e += self.linear[i];
                for &(j, c) in self.neighbors(i) {
                    if (j as usize) > i && bits[j as usize] {
                        e += c;
                    }
                }
            }
        }
        e
    }

    /// Auto ladder bounds in model energy units.
    pub fn auto_temperatures(&self) -> (f64, f64) {
        let mut max_delta = 0i128;
        let mut min_coeff = i128::MAX;
        for i in 0..self.n {
            let mut row = (self.linear[i] as i128).abs();
            if self.linear[i] != 0 {
                min_coeff = min_coeff.min(row);
            }
            for &(_, c) in self.neighbors(i) {
                row += (c as i128).abs();
                if c != 0 {
                    min_coeff = min_coeff.min((c as i128).abs());
                }
            }
            max_delta = max_delta.max(row);
        }
        if max_delta == 0 {
            return (1.0, 1.0);
        }
        let scale = self.scale as f64;
        let hot = max_delta as f64 / scale / std::f64::consts::LN_2;
        let cold = (min_coeff as f64 / scale / 100f64.ln()).min(hot);
        (cold, hot)
    }
}

/// One Markov chain: bits plus cached local fields and energy.
#[derive(Clone, Debug)]
pub struct Replica {
    bits: Vec<bool>,
    /// `linear_i + sum_j q_ij x_j` in scaled units.
    fields: Vec<i64>,
    /// Energy without offset, in scaled units.
    energy: i64,
    cursor: usize,
    round_best: Option<(i64, Vec<bool>)>,
}

impl Replica {
    pub fn new(model: &CompiledModel, bits: Vec<bool>) -> Self {
        assert_eq!(bits.len(), model.n);
        let mut fields = model.linear.clone();
        for i in 0..model.n {
            if bits[i] {
                for &(j, c) in model.neighbors(i) {
                    fields[j as usize] += c;
                }
            }
        }
        let energy = model.scaled_energy(&bits);
        Self {
            bits,
            fields,
            energy,
            cursor: 0,
            round_best: None,
        }
    }

    pub fn bits(&self) -> BitString {
        BitString::from(self.bits.clone())
    }

    pub fn energy(&self, model: &CompiledModel) -> Rational {
        model.to_energy(self.energy)
    }

    pub fn scaled_energy(&self) -> i64 {
        self.energy
    }

    #[inline]
    fn flip(&mut self, model: &CompiledModel, i: usize, delta: i64) {
        let sign = if self.bits[i] { -1 } else { 1 };
        self.bits[i] = !self.bits[i];
        self.energy += delta;
        for &(j, c) in model.neighbors(i) {
            self.fields[j as usize] += sign * c;
        }
    }
}

/// Performs `proposals` single-flip Metropolis proposals (a full sweep when
/// `proposals == n`), visiting variables cyclically. Returns proposals done.
pub fn metropolis_sweep<R: Rng>(
    model: &CompiledModel,
    replica: &mut Replica,
    temperature: f64,
    rng: &mut R,
    proposals: u64,
) -> u64 {
    if model.n == 0 {
        return 0;
    }
    let beta = 1.0 / (temperature * model.scale as f64);
    for _ in 0..proposals {
        let i = replica.cursor;
        replica.cursor = if i + 1 == model.n { 0 } else { i + 1 };
        let f = replica.fields[i];
        let delta = if replica.bits[i] { -f } else { f };
        let accept = delta <= 0 || rng.gen::<f64>() < (-(delta as f64) * beta).exp();
        if accept {
            replica.flip(model, i, delta);
            let improved = match &replica.round_best {
                Some((e, _)) => replica.energy < *e,
                None => true,
            };
            if improved {
                replica.round_best = Some((replica.energy, replica.bits.clone()));
            }
        }
    }
    proposals
}

/// One exchange round over adjacent temperature slots starting at `parity`
/// (0: pairs (0,1), (2,3), ...; 1: pairs (1,2), (3,4), ...). Configurations move,
/// temperatures stay with their slots. Returns the number of accepted swaps.
pub fn replica_exchange<R: Rng>(
    model: &CompiledModel,
    replicas: &mut [Replica],
    temperatures: &[f64],
    rng: &mut R,
    parity: usize,
) -> usize {
    assert_eq!(replicas.len(), temperatures.len());
    let scale = model.scale as f64;
    let mut swaps = 0;
    let mut i = parity;
    while i + 1 < replicas.len() {
        let beta_i = 1.0 / (temperatures[i] * scale);
        let beta_j = 1.0 / (temperatures[i + 1] * scale);
        let de = (replicas[i].energy - replicas[i + 1].energy) as f64;
        let exponent = (beta_i - beta_j) * de;
        if exponent >= 0.0 || rng.gen::<f64>() < exponent.exp() {
            replicas.swap(i, i + 1);
            swaps += 1;
        }
        i += 2;
    }
    swaps
}

/// Geometric ladder of `count` temperatures from `min` to `max`, coldest first.
pub fn geometric_ladder(min: f64, max: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![min];
    }
    let ratio = (max / min).powf(1.0 / (count - 1) as f64);
    (0..count).map(|k| min * ratio.powi(k as i32)).collect()
}

fn replica_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn solve(model: &QuboModel, config: &AnnealerConfig) -> Result<AnnealResult> {
    config.validate()?;
    if model.n() > config.capacity {
        return Err(Error::CapacityExceeded {
            n: model.n(),
            capacity: config.capacity,
        });
    }
    if let InitialState::Given(x) = &config.initial {
        if x.len() != model.n() {
            return Err(Error::Dimension {
                expected: model.n(),
                got: x.len(),
            });
        }
    }
    // Search runs on the (optionally quantized) model; reported energies are exact.
    let search_model = match config.precision_bits {
        Some(bits) => quantize(model, bits)?,
        None => model.clone(),
    };
    let compiled = CompiledModel::new(&search_model)?;
    let n = model.n();
    let temps = match config.temperatures {
        Temperatures::Fixed { min, max } => geometric_ladder(min, max, config.num_replicas),
        Temperatures::Auto => {
            let (lo, hi) = compiled.auto_temperatures();
            geometric_ladder(lo, hi, config.num_replicas)
        }
    };
    let replicas_n = config.num_replicas;
    let mut rngs: Vec<ChaCha8Rng> = (0..replicas_n)
        .map(|r| replica_rng(config.seed, r as u64 + 1))
        .collect();
    let mut exchange_rng = replica_rng(config.seed, 0);

    let mut replicas: Vec<Replica> = (0..replicas_n)
        .map(|r| {
            let bits = match &config.initial {
                InitialState::Given(x) => x.as_slice().to_vec(),
                InitialState::Random => (0..n).map(|_| rngs[r].gen_bool(0.5)).collect(),
            };
            Replica::new(&compiled, bits)
        })
        .collect();

    // With quantization the search energies are approximate, so the best is
    // judged on the exact model.
    let quantized = config.precision_bits.is_some();
    let exact = |bits: &[bool], scaled: i64| -> Result<Rational> {
        if quantized {
            model.evaluate(&BitString::from(bits.to_vec()))
        } else {
            Ok(compiled.to_energy(scaled))
        }
    };
    let mut best_bits = replicas[0].bits.clone();
    let mut best_energy = exact(&replicas[0].bits, replicas[0].energy)?;
    for rep in &replicas[1..] {
        let e = exact(&rep.bits, rep.energy)?;
        if e < best_energy {
            best_energy = e;
            best_bits.clone_from(&rep.bits);
        }
    }
    let mut trace = vec![(0u64, best_energy)];

    let interval = config.exchange_interval.unwrap_or(n.max(1) as u64);
    let mut used = 0u64;
    let mut round = 0usize;
    while used < config.mc_steps && n > 0 {
        let mut remaining = config.mc_steps - used;
        let alloc: Vec<u64> = (0..replicas_n)
            .map(|_| {
                let a = interval.min(remaining);
                remaining -= a;
                a
            })
            .collect();
        let run = |(r, (rep, rng)): (usize, (&mut Replica, &mut ChaCha8Rng))| {
            rep.round_best = None;
            metropolis_sweep(&compiled, rep, temps[r], rng, alloc[r]);
        };
        if config.parallel {
            replicas
                .par_iter_mut()
                .zip(rngs.par_iter_mut())
                .enumerate()
                .for_each(run);
        } else {
            replicas.iter_mut().zip(rngs.iter_mut()).enumerate().for_each(run);
        }
        used += alloc.iter().sum::<u64>();
        // Merge in slot order so sequential and parallel runs agree.
        let mut improved = false;
        for rep in &mut replicas {
            if let Some((scaled, bits)) = rep.round_best.take() {
                let e = exact(&bits, scaled)?;
                if e < best_energy {
                    best_energy = e;
                    best_bits = bits;
                    improved = true;
                }
            }
        }
        if improved {
            trace.push((used, best_energy));
        }
        replica_exchange(&compiled, &mut replicas, &temps, &mut exchange_rng, round % 2);
        round += 1;
    }
    Ok(AnnealResult {
        best: BitString::from(best_bits),
        best_energy,
        energy_trace: trace,
        steps_used: used,
    })
}

/// Exact minimum by enumeration; ties go to the lexicographically smallest string.
pub fn brute_force_solve(model: &QuboModel) -> Result<AnnealResult> {
    let n = model.n();
    if n > BRUTE_FORCE_LIMIT {
        return Err(Error::TooLarge {
            n,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    let compiled = CompiledModel::new(model)?;
    // Gray-code walk; each step flips one bit, so the energy updates in O(degree).
    let mut rep = Replica::new(&compiled, vec![false; n]);
    let mut best_scaled = rep.energy;
    let mut best_index = 0u64;
    let total = 1u64 << n;
    for step in 1..total {
        let bit = step.trailing_zeros() as usize;
        // Gray code bit `bit` counts from the least significant end; variable 0 is the MSB.
        let var = n - 1 - bit;
        let f = rep.fields[var];
        let delta = if rep.bits[var] { -f } else { f };
        rep.flip(&compiled, var, delta);
        let gray = step ^ (step >> 1);
        if rep.energy < best_scaled || (rep.energy == best_scaled && gray < best_index) {
            best_scaled = rep.energy;
            best_index = gray;
        }
    }
    let best = BitString::from_index(best_index, n);
    let best_energy = compiled.to_energy(best_scaled);
    Ok(AnnealResult {
        best,
        best_energy,
        energy_trace: vec![(total, best_energy)],
        steps_used: total,
    })
}

/// Acceptance probability used by the Metropolis rule, exposed for tests.
pub fn acceptance_probability(delta: f64, temperature: f64) -> f64 {
    if delta <= 0.0 {
        1.0
    } else {
        (-delta / temperature).exp()
    }
}

impl AnnealResult {
    pub fn best_energy_f64(&self) -> f64 {
        self.best_energy.to_f64().unwrap_or(f64::NAN)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::random_qubo;
    use crate::rational::int;
    use crate::QuboBuilder;

    fn cfg(steps: u64, seed: u64) -> AnnealerConfig {
        AnnealerConfig {
            mc_steps: steps,
            seed,
            ..AnnealerConfig::default()
        }
    }

    #[test]
    fn two_variable_minimum() {
        // E = x0 - x1 + 3 x0 x1, unique minimum at (0, 1).
        let mut b = QuboBuilder::new(2);
        b.add_linear(0, int(1)).add_linear(1, int(-1)).add_quadratic(0, 1, int(3));
        let m = b.build();
        let r = solve(&m, &cfg(10_000, 1)).unwrap();
        assert_eq!(r.best, BitString::from(&[0u8, 1][..]));
        assert_eq!(r.best_energy, int(-1));
        assert_eq!(r.best_energy, m.evaluate(&r.best).unwrap());
    }

    #[test]
    fn zero_steps_returns_given_start() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let m = random_qubo(&mut rng, 10, 0.5);
        let x0 = BitString::from_index(0b1011001110, 10);
        let c = AnnealerConfig {
            mc_steps: 0,
            initial: InitialState::Given(x0.clone()),
            ..AnnealerConfig::default()
        };
        let r = solve(&m, &c).unwrap();
        assert_eq!(r.best, x0);
        assert_eq!(r.best_energy, m.evaluate(&x0).unwrap());
        assert_eq!(r.steps_used, 0);
    }

    #[test]
    fn capacity_and_config_errors() {
        let m = QuboModel::zero(1025);
        assert!(matches!(solve(&m, &cfg(10, 0)), Err(Error::CapacityExceeded { n: 1025, capacity: 1024 })));
        let small = QuboModel::zero(3);
        let bad = AnnealerConfig {
            temperatures: Temperatures::Fixed { min: 2.0, max: 1.0 },
            ..AnnealerConfig::default()
        };
        assert!(matches!(solve(&small, &bad), Err(Error::Config(_))));
        let wrong_start = AnnealerConfig {
            initial: InitialState::Given(BitString::zeros(2)),
            ..AnnealerConfig::default()
        };
        assert!(matches!(solve(&small, &wrong_start), Err(Error::Dimension { .. })));
    }

    #[test]
    fn deterministic_and_parallel_agnostic() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = random_qubo(&mut rng, 40, 0.3);
        let a = solve(&m, &cfg(20_000, 9)).unwrap();
        let b = solve(&m, &cfg(20_000, 9)).unwrap();
        let p = solve(&m, &AnnealerConfig { parallel: true, ..cfg(20_000, 9) }).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, p);
        assert_eq!(a.steps_used, 20_000);
        assert!(a.energy_trace.windows(2).all(|w| w[1].1 < w[0].1 && w[1].0 >= w[0].0));
        assert_eq!(a.energy_trace.last().unwrap().1, a.best_energy);
    }

    #[test]
    fn seeded_start_dominates() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for s in 0..30 {
            let m = random_qubo(&mut rng, 15, 0.4);
            let x0: BitString = (0..15).map(|_| rng.gen_bool(0.5)).collect();
            let c = AnnealerConfig {
                mc_steps: 300,
                initial: InitialState::Given(x0.clone()),
                ..cfg(300, s)
            };
            let r = solve(&m, &c).unwrap();
            assert!(r.best_energy <= m.evaluate(&x0).unwrap());
        }
    }

    #[test]
    fn sweep_keeps_cache_consistent() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let m = random_qubo(&mut rng, 20, 0.5);
        let compiled = CompiledModel::new(&m).unwrap();
        let mut rep = Replica::new(&compiled, vec![false; 20]);
        for t in [100.0, 5.0, 0.5, 1e-9] {
            metropolis_sweep(&compiled, &mut rep, t, &mut rng, 57);
            assert_eq!(rep.energy(&compiled), m.evaluate(&rep.bits()).unwrap());
        }
        // Near-zero temperature: energy never increases.
        let before = rep.scaled_energy();
        metropolis_sweep(&compiled, &mut rep, 1e-9, &mut rng, 200);
        assert!(rep.scaled_energy() <= before);
    }

    #[test]
    fn exchange_rules() {
        let mut b = QuboBuilder::new(1);
        b.add_linear(0, int(-4));
        let m = b.build();
        let compiled = CompiledModel::new(&m).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        // Equal energies always swap.
        let mut reps = vec![Replica::new(&compiled, vec![true]), Replica::new(&compiled, vec![true])];
        assert_eq!(replica_exchange(&compiled, &mut reps, &[1.0, 2.0], &mut rng, 0), 1);
        // Lower energy in the hot slot always moves to the cold slot.
        let mut reps = vec![Replica::new(&compiled, vec![false]), Replica::new(&compiled, vec![true])];
        assert_eq!(replica_exchange(&compiled, &mut reps, &[0.1, 100.0], &mut rng, 0), 1);
        assert!(reps[0].bits().get(0));
        let mut single = vec![Replica::new(&compiled, vec![false])];
        assert_eq!(replica_exchange(&compiled, &mut single, &[1.0], &mut rng, 0), 0);
    }

    #[test]
    fn brute_force_examples() {
        let mut b = QuboBuilder::new(3);
        b.add_offset(int(7));
        let zero = b.build();
        let r = brute_force_solve(&zero).unwrap();
        assert_eq!((r.best, r.best_energy), (BitString::zeros(3), int(7)));

        let mut b = QuboBuilder::new(3);
        for i in 0..3 {
            b.add_linear(i, int(-1));
            for j in i + 1..3 {
                b.add_quadratic(i, j, int(5));
            }
        }
        let r = brute_force_solve(&b.build()).unwrap();
        assert_eq!(r.best, BitString::from(&[0u8, 0, 1][..]));
        assert_eq!(r.best_energy, int(-1));
        assert!(matches!(brute_force_solve(&QuboModel::zero(25)), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn brute_force_matches_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let m = random_qubo(&mut rng, 8, 0.6);
            let oracle = (0..256u64)
                .map(|v| m.evaluate(&BitString::from_index(v, 8)).unwrap())
                .min()
                .unwrap();
            assert_eq!(brute_force_solve(&m).unwrap().best_energy, oracle);
        }
    }

    #[test]
    fn quantized_search_reports_exact_energy() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let m = random_qubo(&mut rng, 16, 0.5);
        let c = AnnealerConfig {
            precision_bits: Some(4),
            ..cfg(20_000, 3)
        };
        let r = solve(&m, &c).unwrap();
        assert_eq!(r.best_energy, m.evaluate(&r.best).unwrap());
    }

    #[test]
    fn ladder_and_acceptance() {
        let l = geometric_ladder(1.0, 8.0, 4);
        assert!((l[0] - 1.0).abs() < 1e-12 && (l[3] - 8.0).abs() < 1e-9);
        assert!((l[1] - 2.0).abs() < 1e-9);
        assert_eq!(acceptance_probability(-1.0, 1e-9), 1.0);
        assert_eq!(acceptance_probability(0.0, 1e-9), 1.0);
        assert!(acceptance_probability(1.0, 1e-9) < 1e-300);
    }
}
