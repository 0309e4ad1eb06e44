//! QUBO and Ising models.
//!
//! A [`QuboModel`] is stored in canonical form: `linear` holds the diagonal,
//! quadratic terms are kept only for `i < j` with non-zero coefficients, and any
//! constant lives in `offset`. Models are immutable once built; use
//! [`QuboBuilder`] to accumulate terms.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::rational::{int, Rational};

/// An assignment of binary variables.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitString(Vec<bool>);

impl BitString {
    pub fn zeros(n: usize) -> Self {
        Self(vec![false; n])
    }

    pub fn ones(n: usize) -> Self {
        Self(vec![true; n])
    }

    /// The `n`-bit string whose first bit is the most significant bit of `value`.
    ///
    /// Counting `value` upwards therefore enumerates bit strings in
    /// lexicographic order.
    pub fn from_index(value: u64, n: usize) -> Self {
        Self((0..n).map(|i| (value >> (n - 1 - i)) & 1 == 1).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        self.0[i]
    }

    pub fn set(&mut self, i: usize, value: bool) {
        self.0[i] = value;
    }

    pub fn flip(&mut self, i: usize) {
        self.0[i] = !self.0[i];
    }

    pub fn flipped(&self, i: usize) -> Self {
        let mut out = self.clone();
        out.flip(i);
        out
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.0
    }

    pub fn count_ones(&self) -> usize {
        self.0.iter().filter(|b| **b).count()
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        self.0.iter().copied()
    }
}

impl From<Vec<bool>> for BitString {
    fn from(bits: Vec<bool>) -> Self {
        Self(bits)
    }
}

impl From<&[u8]> for BitString {
    fn from(bits: &[u8]) -> Self {
        Self(bits.iter().map(|b| *b != 0).collect())
    }
}

impl FromIterator<bool> for BitString {
    fn from_iter<I: IntoIterator<Item = bool>>(iter: I) -> Self {
        Self(iter.into_iter().collect())
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.0 {
            f.write_str(if *b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// A quadratic coefficient `coeff * x_i * x_j` with `i < j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuadTerm {
    pub i: usize,
    pub j: usize,
    pub coeff: Rational,
}

/// Accumulates terms of a QUBO before canonicalization.
#[derive(Clone, Debug)]
pub struct QuboBuilder {
    n: usize,
    linear: Vec<Rational>,
    quadratic: HashMap<(usize, usize), Rational>,
    offset: Rational,
}

impl QuboBuilder {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            linear: vec![Rational::zero(); n],
            quadratic: HashMap::new(),
            offset: Rational::zero(),
        }
    }

    /// Starts from an existing model.
    pub fn from_model(model: &QuboModel) -> Self {
        let mut b = Self::new(model.n);
        b.linear.clone_from(&model.linear);
        b.offset = model.offset;
        b.quadratic.reserve(model.terms.len());
        for t in &model.terms {
            b.quadratic.insert((t.i, t.j), t.coeff);
        }
        b
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn add_offset(&mut self, c: Rational) -> &mut Self {
        self.offset += c;
        self
    }

    pub fn add_linear(&mut self, i: usize, c: Rational) -> &mut Self {
        assert!(i < self.n, "variable {i} out of range {}", self.n);
        self.linear[i] += c;
        self
    }

    /// Adds `c * x_i * x_j`. Diagonal terms fold into the linear part.
    pub fn add_quadratic(&mut self, i: usize, j: usize, c: Rational) -> &mut Self {
        assert!(i < self.n && j < self.n, "pair ({i},{j}) out of range {}", self.n);
        if c.is_zero() {
            return self;
        }
        if i == j {
            self.linear[i] += c;
        } else {
            let key = if i < j { (i, j) } else { (j, i) };
            *self.quadratic.entry(key).or_insert_with(Rational::zero) += c;
        }
        self
    }

    /// Adds `lambda * (sum_{i in group} x_i - target)^2`.
    pub fn add_cardinality_penalty(
        &mut self,
        group: &[usize],
        target: Rational,
        lambda: Rational,
    ) -> &mut Self {
        // (sum x - t)^2 = sum x (1 - 2t) + 2 sum_{a<b} x_a x_b + t^2
        let lin = lambda * (int(1) - int(2) * target);
        for (a, &i) in group.iter().enumerate() {
            self.add_linear(i, lin);
            for &j in &group[a + 1..] {
                self.add_quadratic(i, j, lambda * int(2));
            }
        }
        self.add_offset(lambda * target * target);
        self
    }

    pub fn build(self) -> QuboModel {
        let mut terms: Vec<QuadTerm> = self
            .quadratic
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|((i, j), coeff)| QuadTerm { i, j, coeff })
            .collect();
        terms.sort_unstable_by_key(|t| (t.i, t.j));
        QuboModel::from_canonical(self.n, self.linear, terms, self.offset)
    }
}

/// Immutable QUBO: `offset + sum linear_i x_i + sum_{i<j} q_ij x_i x_j`.
#[derive(Clone, Debug)]
pub struct QuboModel {
    n: usize,
    linear: Vec<Rational>,
    terms: Vec<QuadTerm>,
    offset: Rational,
    adj_start: Vec<usize>,
    adj: Vec<(usize, Rational)>,
}

impl PartialEq for QuboModel {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n
            && self.linear == other.linear
            && self.terms == other.terms
            && self.offset == other.offset
    }
}

impl QuboModel {
    pub fn builder(n: usize) -> QuboBuilder {
        QuboBuilder::new(n)
    }

    pub fn zero(n: usize) -> Self {
        QuboBuilder::new(n).build()
    }

    /// Builds a model from explicit parts, validating indices.
    pub fn new<I>(linear: Vec<Rational>, quadratic: I, offset: Rational) -> Result<Self>
    where
        I: IntoIterator<Item = ((usize, usize), Rational)>,
    {
        let n = linear.len();
        let mut b = QuboBuilder::new(n);
        b.linear = linear;
        b.offset = offset;
        for ((i, j), c) in quadratic {
            for idx in [i, j] {
                if idx >= n {
                    return Err(Error::IndexOutOfRange { index: idx, size: n });
                }
            }
            b.add_quadratic(i, j, c);
        }
        Ok(b.build())
    }

    fn from_canonical(n: usize, linear: Vec<Rational>, terms: Vec<QuadTerm>, offset: Rational) -> Self {
        let mut degree = vec![0usize; n];
        for t in &terms {
            degree[t.i] += 1;
            degree[t.j] += 1;
        }
        let mut adj_start = Vec::with_capacity(n + 1);
        let mut acc = 0;
        adj_start.push(0);
        for d in &degree {
            acc += d;
            adj_start.push(acc);
        }
        let mut fill = adj_start[..n].to_vec();
        let mut adj = vec![(0usize, Rational::zero()); acc];
        for t in &terms {
            adj[fill[t.i]] = (t.j, t.coeff);
            fill[t.i] += 1;
            adj[fill[t.j]] = (t.i, t.coeff);
            fill[t.j] += 1;
        }
        Self {
            n,
            linear,
            terms,
            offset,
            adj_start,
            adj,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn linear(&self) -> &[Rational] {
        &self.linear
    }

    pub fn quadratic(&self) -> &[QuadTerm] {
        &self.terms
    }

    pub fn offset(&self) -> Rational {
        self.offset
    }

    /// Neighbours of `i` with their coupling coefficients.
    pub fn neighbors(&self, i: usize) -> &[(usize, Rational)] {
        &self.adj[self.adj_start[i]..self.adj_start[i + 1]]
    }

    pub fn quadratic_coeff(&self, i: usize, j: usize) -> Rational {
        let key = if i < j { (i, j) } else { (j, i) };
        self.terms
            .binary_search_by_key(&key, |t| (t.i, t.j))
            .map(|pos| self.terms[pos].coeff)
            .unwrap_or_else(|_| Rational::zero())
    }

    fn check_len(&self, x: &BitString) -> Result<()> {
        if x.len() != self.n {
            return Err(Error::Dimension {
                expected: self.n,
                got: x.len(),
            });
        }
        Ok(())
    }

    pub fn evaluate(&self, x: &BitString) -> Result<Rational> {
        self.check_len(x)?;
        let mut e = self.offset;
        for (i, c) in self.linear.iter().enumerate() {
            if x.get(i) {
                e += c;
            }
        }
        for t in &self.terms {
            if x.get(t.i) && x.get(t.j) {
                e += t.coeff;
            }
        }
        Ok(e)
    }

    /// `linear_i + sum_j q_ij x_j`, the energy change of raising `x_i` from 0 to 1.
    pub fn local_field(&self, x: &BitString, i: usize) -> Result<Rational> {
        self.check_len(x)?;
        if i >= self.n {
            return Err(Error::IndexOutOfRange { index: i, size: self.n });
        }
        let mut f = self.linear[i];
        for (j, c) in self.neighbors(i) {
            if x.get(*j) {
                f += c;
            }
        }
        Ok(f)
    }

    /// Energy change from flipping bit `i`, in O(degree of `i`).
    pub fn delta_flip(&self, x: &BitString, i: usize) -> Result<Rational> {
        let f = self.local_field(x, i)?;
        Ok(if x.get(i) { -f } else { f })
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty() && self.linear.iter().all(Zero::is_zero)
    }

    /// Largest absolute linear or quadratic coefficient.
    pub fn max_abs_coeff(&self) -> Rational {
        self.linear
            .iter()
            .chain(self.terms.iter().map(|t| &t.coeff))
            .map(Signed::abs)
            .max()
            .unwrap_or_else(Rational::zero)
    }
}

/// Spin model `offset + sum_{i<j} J_ij s_i s_j + sum_i h_i s_i`, `s_i` in {-1, +1}.
#[derive(Clone, Debug, PartialEq)]
pub struct IsingModel {
    pub h: Vec<Rational>,
    pub couplings: BTreeMap<(usize, usize), Rational>,
    pub offset: Rational,
}

impl IsingModel {
    pub fn new(h: Vec<Rational>, couplings: BTreeMap<(usize, usize), Rational>, offset: Rational) -> Result<Self> {
        let n = h.len();
        for &(i, j) in couplings.keys() {
            if i >= j {
                return Err(Error::Formulation(format!("coupling key ({i},{j}) must satisfy i < j")));
            }
            if j >= n {
                return Err(Error::IndexOutOfRange { index: j, size: n });
            }
        }
        Ok(Self { h, couplings, offset })
    }

    pub fn n(&self) -> usize {
        self.h.len()
    }

    pub fn energy(&self, spins: &[i8]) -> Result<Rational> {
        if spins.len() != self.n() {
            return Err(Error::Dimension {
                expected: self.n(),
                got: spins.len(),
            });
        }
        let s = |i: usize| int(spins[i] as i64);
        let mut e = self.offset;
        for (i, h) in self.h.iter().enumerate() {
            e += h * s(i);
        }
        for (&(i, j), c) in &self.couplings {
            e += c * s(i) * s(j);
        }
        Ok(e)
    }
}

/// Spins corresponding to a bit string under `s = 2x - 1`.
pub fn bits_to_spins(x: &BitString) -> Vec<i8> {
    x.iter().map(|b| if b { 1 } else { -1 }).collect()
}

pub fn ising_to_qubo(m: &IsingModel) -> QuboModel {
    let mut b = QuboBuilder::new(m.n());
    b.add_offset(m.offset);
    // h (2x - 1)
    for (i, h) in m.h.iter().enumerate() {
        b.add_linear(i, h * int(2));
        b.add_offset(-h);
    }
    // J (2x_i - 1)(2x_j - 1) = 4J x_i x_j - 2J x_i - 2J x_j + J
    for (&(i, j), c) in &m.couplings {
        b.add_quadratic(i, j, c * int(4));
        b.add_linear(i, -c * int(2));
        b.add_linear(j, -c * int(2));
        b.add_offset(*c);
    }
    b.build()
}

pub fn qubo_to_ising(m: &QuboModel) -> IsingModel {
    let half = Rational::new(1, 2);
    let quarter = Rational::new(1, 4);
    let mut h = vec![Rational::zero(); m.n()];
    let mut couplings = BTreeMap::new();
    let mut offset = m.offset();
    // l x = l/2 s + l/2
    for (i, l) in m.linear().iter().enumerate() {
        h[i] += l * half;
        offset += l * half;
    }
    // q x_i x_j = q/4 (s_i s_j + s_i + s_j + 1)
    for t in m.quadratic() {
        let q = t.coeff * quarter;
        couplings.insert((t.i, t.j), q);
        h[t.i] += q;
        h[t.j] += q;
        offset += q;
    }
    IsingModel { h, couplings, offset }
}

/// Penalty weights for exactly-one (or cardinality) constraints.
#[derive(Clone, Debug, PartialEq)]
pub enum PenaltyConfig {
    /// The same weight on every constraint.
    Uniform(Rational),
    /// One weight per constraint, in constraint order.
    PerConstraint(Vec<Rational>),
    /// `scale * default_penalty(objective)` on every constraint.
    Auto { scale: Rational },
}

impl Default for PenaltyConfig {
    fn default() -> Self {
        PenaltyConfig::Auto { scale: int(1) }
    }
}

impl PenaltyConfig {
    /// Per-constraint weights for `count` constraints over `objective`.
    pub fn resolve(&self, count: usize, objective: &QuboModel) -> Result<Vec<Rational>> {
        let weights = match self {
            PenaltyConfig::Uniform(v) => vec![*v; count],
            PenaltyConfig::PerConstraint(vs) => {
                if vs.len() != count {
                    return Err(Error::Dimension {
                        expected: count,
                        got: vs.len(),
                    });
                }
                vs.clone()
            }
            PenaltyConfig::Auto { scale } => vec![default_penalty(objective) * scale; count],
        };
        if let Some(bad) = weights.iter().find(|w| !w.is_positive()) {
            return Err(Error::Config(format!("penalty weight {bad} must be positive")));
        }
        Ok(weights)
    }
}

/// `1 + max_i (|linear_i| + sum_j |q_ij|)`: exceeds any single-flip change of `objective`.
pub fn default_penalty(objective: &QuboModel) -> Rational {
    let best = (0..objective.n())
        .map(|i| {
            objective.neighbors(i)
                .iter()
                .fold(objective.linear()[i].abs(), |acc, (_, c)| acc + c.abs())
        })
        .max()
        .unwrap_or_else(Rational::zero);
    best + int(1)
}

/// Adds `lambda_g * (sum_{i in g} x_i - 1)^2` for every group.
pub fn add_one_hot_penalties(
    model: &QuboModel,
    groups: &[Vec<usize>],
    penalties: &PenaltyConfig,
) -> Result<QuboModel> {
    for g in groups {
        if g.is_empty() {
            return Err(Error::Formulation("empty exactly-one group".into()));
        }
        let mut seen = std::collections::HashSet::new();
        for &i in g {
            if i >= model.n() {
                return Err(Error::IndexOutOfRange { index: i, size: model.n() });
            }
            if !seen.insert(i) {
                return Err(Error::DuplicateIndex(i));
            }
        }
    }
    let weights = penalties.resolve(groups.len(), model)?;
    let mut b = QuboBuilder::from_model(model);
    for (g, w) in groups.iter().zip(weights) {
        b.add_cardinality_penalty(g, int(1), w);
    }
    Ok(b.build())
}

/// A model with some variables substituted by constants.
#[derive(Clone, Debug)]
pub struct FixedModel {
    pub model: QuboModel,
    /// Original index of each remaining variable.
    pub free: Vec<usize>,
    assignment: Vec<Option<bool>>,
}

impl FixedModel {
    /// Combines the fixed bits with an assignment `y` of the free ones.
    pub fn merge(&self, y: &BitString) -> Result<BitString> {
        if y.len() != self.free.len() {
            return Err(Error::Dimension {
                expected: self.free.len(),
                got: y.len(),
            });
        }
        let mut k = 0;
        Ok(self
            .assignment
            .iter()
            .map(|a| match a {
                Some(b) => *b,
                None => {
                    k += 1;
                    y.get(k - 1)
                }
            })
            .collect())
    }
}

pub fn fix_variables(model: &QuboModel, assignments: &[(usize, bool)]) -> Result<FixedModel> {
    let n = model.n();
    let mut assignment: Vec<Option<bool>> = vec![None; n];
    for &(i, b) in assignments {
        if i >= n {
            return Err(Error::IndexOutOfRange { index: i, size: n });
        }
        if assignment[i].is_some() {
            return Err(Error::DuplicateIndex(i));
        }
        assignment[i] = Some(b);
    }
    let mut new_index = vec![usize::MAX; n];
    let free: Vec<usize> = (0..n).filter(|i| assignment[*i].is_none()).collect();
    for (k, &i) in free.iter().enumerate() {
        new_index[i] = k;
    }
    let mut b = QuboBuilder::new(free.len());
    b.add_offset(model.offset());
    for (i, c) in model.linear().iter().enumerate() {
        match assignment[i] {
            Some(true) => {
                b.add_offset(*c);
            }
            Some(false) => {}
            None => {
                b.add_linear(new_index[i], *c);
            }
        }
    }
    for t in model.quadratic() {
        match (assignment[t.i], assignment[t.j]) {
            (None, None) => {
                b.add_quadratic(new_index[t.i], new_index[t.j], t.coeff);
            }
            (Some(true), None) => {
                b.add_linear(new_index[t.j], t.coeff);
            }
            (None, Some(true)) => {
                b.add_linear(new_index[t.i], t.coeff);
            }
            (Some(true), Some(true)) => {
                b.add_offset(t.coeff);
            }
            _ => {}
        }
    }
    Ok(FixedModel {
        model: b.build(),
        free,
        assignment,
    })
}

/// Rounds coefficients to signed `bits`-bit integers after scaling the largest
/// magnitude to `2^(bits-1) - 1`. Use only to emulate limited-precision hardware;
/// energies of the result are in the scaled unit.
pub fn quantize(model: &QuboModel, bits: u32) -> Result<QuboModel> {
    if !(2..=63).contains(&bits) {
        return Err(Error::Config(format!("quantization bits {bits} outside 2..=63")));
    }
    let max = model.max_abs_coeff();
    if max.is_zero() {
        return Ok(model.clone());
    }
    let top = Rational::from_integer((1i128 << (bits - 1)) - 1);
    let scale = top / max;
    let round = |c: &Rational| (c * scale).round();
    let mut b = QuboBuilder::new(model.n());
    b.add_offset(round(&model.offset()));
    for (i, c) in model.linear().iter().enumerate() {
        b.add_linear(i, round(c));
    }
    for t in model.quadratic() {
        b.add_quadratic(t.i, t.j, round(&t.coeff));
    }
    Ok(b.build())
}

/// Approximate energy as a float, for logging.
pub fn energy_f64(model: &QuboModel, x: &BitString) -> f64 {
    model
        .evaluate(x)
        .ok()
        .and_then(|e| e.to_f64())
        .unwrap_or(f64::NAN)
}
