//! Quadratic assignment: instances, objective, and the QUBO formulations used
//! by the local-search drivers.
//!
//! Three formulations are provided:
//!
//! * [`full_qubo`]: the penalized `n^2`-variable permutation-matrix model.
//! * [`build_cqubols_qubo`]: the same model restricted to reassignments inside `m`
//!   disjoint facility blocks (`m k^2` variables, still penalized).
//! * [`build_uqubols_qubo`]: one variable per disjoint facility pair deciding whether
//!   to exchange the pair's locations. Every assignment is a permutation, so no
//!   penalty is needed, and the model reproduces the objective exactly.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::qubo::{default_penalty, BitString, PenaltyConfig, QuboBuilder, QuboModel};
use crate::rational::{parse_rational, int, Rational, ScaledMatrix};

/// A bijection on `0..n`; `image[i]` is the location of facility `i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Permutation {
    image: Vec<usize>,
}

impl Permutation {
    pub fn new(image: Vec<usize>) -> Result<Self> {
        let n = image.len();
        let mut seen = vec![false; n];
        for &v in &image {
            if v >= n {
                return Err(Error::IndexOutOfRange { index: v, size: n });
            }
            if seen[v] {
                return Err(Error::DuplicateIndex(v));
            }
            seen[v] = true;
        }
        Ok(Self { image })
    }

    pub fn identity(n: usize) -> Self {
        Self { image: (0..n).collect() }
    }

    pub fn random<R: Rng>(rng: &mut R, n: usize) -> Self {
        let mut image: Vec<usize> = (0..n).collect();
        image.shuffle(rng);
        Self { image }
    }

    pub fn len(&self) -> usize {
        self.image.len()
    }

    pub fn is_empty(&self) -> bool {
        self.image.is_empty()
    }

    #[inline]
    pub fn get(&self, i: usize) -> usize {
        self.image[i]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.image
    }

    /// Exchanges the images of `a` and `b`.
    pub fn swap(&mut self, a: usize, b: usize) {
        self.image.swap(a, b);
    }

    pub fn swapped(&self, a: usize, b: usize) -> Self {
        let mut p = self.clone();
        p.swap(a, b);
        p
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.len()];
        for (i, &v) in self.image.iter().enumerate() {
            inv[v] = i;
        }
        Self { image: inv }
    }

    /// Whitespace-separated 0-based images.
    pub fn parse(text: &str) -> Result<Self> {
        let image = text
            .split_whitespace()
            .map(|t| t.parse::<usize>().map_err(|_| Error::parse(0, format!("bad index '{t}'"))))
            .collect::<Result<Vec<_>>>()?;
        Self::new(image)
    }
}

impl std::fmt::Display for Permutation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.image.iter().map(|v| v.to_string()).collect();
        f.write_str(&parts.join(" "))
    }
}

/// Flow matrix `w` between facilities and distance matrix `d` between locations.
#[derive(Clone, Debug)]
pub struct QapInstance {
    n: usize,
    flow: Vec<Rational>,
    dist: Vec<Rational>,
    flow_s: ScaledMatrix,
    dist_s: ScaledMatrix,
}

impl PartialEq for QapInstance {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.flow == other.flow && self.dist == other.dist
    }
}

impl QapInstance {
    pub fn new(n: usize, flow: Vec<Rational>, dist: Vec<Rational>) -> Result<Self> {
        let flow_s = ScaledMatrix::from_rationals(n, &flow)?;
        let dist_s = ScaledMatrix::from_rationals(n, &dist)?;
        Ok(Self {
            n,
            flow,
            dist,
            flow_s,
            dist_s,
        })
    }

    pub fn from_integers(n: usize, flow: &[i64], dist: &[i64]) -> Result<Self> {
        Self::new(
            n,
            flow.iter().map(|v| int(*v)).collect(),
            dist.iter().map(|v| int(*v)).collect(),
        )
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn flow(&self, i: usize, j: usize) -> Rational {
        self.flow[i * self.n + j]
    }

    pub fn dist(&self, k: usize, l: usize) -> Rational {
        self.dist[k * self.n + l]
    }

    /// Denominator of objective values computed through the scaled matrices.
    fn denom(&self) -> i128 {
        self.flow_s.denom() * self.dist_s.denom()
    }

    fn to_rational(&self, scaled: i128) -> Rational {
        Rational::new(scaled, self.denom())
    }

    /// Serializes in QAPLIB layout: `n`, blank line, flow rows, blank line, distance rows.
    pub fn to_qaplib(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{}\n", self.n);
        for m in [&self.flow, &self.dist] {
            for row in m.chunks(self.n.max(1)) {
                let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
                let _ = writeln!(out, "{}", line.join(" "));
            }
            out.push('\n');
        }
        out
    }

    fn check_perm(&self, pi: &Permutation) -> Result<()> {
        if pi.len() != self.n {
            return Err(Error::Dimension {
                expected: self.n,
                got: pi.len(),
            });
        }
        Ok(())
    }

    fn objective_scaled(&self, pi: &Permutation) -> i128 {
        let mut total: i128 = 0;
        for i in 0..self.n {
            let row = self.flow_s.row(i);
            let drow = self.dist_s.row(pi.get(i));
            let mut acc: i128 = 0;
            for j in 0..self.n {
                acc += row[j] as i128 * drow[pi.get(j)] as i128;
            }
            total += acc;
        }
        total
    }

    fn pair_delta_scaled(&self, pi: &Permutation, a: usize, b: usize) -> i128 {
        let (w, d) = (&self.flow_s, &self.dist_s);
        let p = pi.get(a);
        let q = pi.get(b);
        let dp = d.row(p);
        let dq = d.row(q);
        let wa = w.row(a);
        let wb = w.row(b);
        let mut delta: i128 = 0;
        for k in 0..self.n {
            if k == a || k == b {
                continue;
            }
            let pk = pi.get(k);
            let (d_qk, d_pk) = (dq[pk] as i128, dp[pk] as i128);
            let (d_kq, d_kp) = (d.get(pk, q) as i128, d.get(pk, p) as i128);
            delta += wa[k] as i128 * (d_qk - d_pk)
                + w.get(k, a) as i128 * (d_kq - d_kp)
                + wb[k] as i128 * (d_pk - d_qk)
                + w.get(k, b) as i128 * (d_kp - d_kq);
        }
        let (d_pp, d_qq, d_pq, d_qp) = (dp[p] as i128, dq[q] as i128, dp[q] as i128, dq[p] as i128);
        delta += wa[a] as i128 * (d_qq - d_pp)
            + wb[b] as i128 * (d_pp - d_qq)
            + wa[b] as i128 * (d_qp - d_pq)
            + wb[a] as i128 * (d_pq - d_qp);
        delta
    }
}

/// Parses QAPLIB text: `n`, then `n^2` flow entries, then `n^2` distance entries.
pub fn parse_qaplib(text: &str) -> Result<QapInstance> {
    let mut tokens = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        for t in line.split_whitespace() {
            tokens.push((lineno + 1, t));
        }
    }
    let (first_line, first) = *tokens.first().ok_or_else(|| Error::parse(1, "empty input"))?;
    let n: usize = first
        .parse()
        .map_err(|_| Error::parse(first_line, format!("bad size '{first}'")))?;
    let expected = 1 + 2 * n * n;
    if tokens.len() != expected {
        return Err(Error::parse(
            tokens.last().map_or(1, |t| t.0),
            format!("expected {expected} tokens for n = {n}, found {}", tokens.len()),
        ));
    }
    let values = tokens[1..]
        .iter()
        .map(|(line, t)| parse_rational(t).ok_or_else(|| Error::parse(*line, format!("non-numeric token '{t}'"))))
        .collect::<Result<Vec<_>>>()?;
    let (flow, dist) = values.split_at(n * n);
    QapInstance::new(n, flow.to_vec(), dist.to_vec())
}

/// Parses best-known sidecar lines `instance-name value`; `#` starts a comment.
pub fn parse_best_known(text: &str) -> Result<BTreeMap<String, Rational>> {
    let mut out = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut parts = content.split_whitespace();
        let (Some(name), Some(value), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(Error::parse(lineno + 1, "expected 'name value'"));
        };
        let v = parse_rational(value).ok_or_else(|| Error::parse(lineno + 1, format!("bad value '{value}'")))?;
        out.insert(name.to_string(), v);
    }
    Ok(out)
}

/// `sum_i sum_j w_ij d_{pi(i) pi(j)}`.
pub fn qap_objective(inst: &QapInstance, pi: &Permutation) -> Result<Rational> {
    inst.check_perm(pi)?;
    Ok(inst.to_rational(inst.objective_scaled(pi)))
}

/// Objective change from exchanging the locations of `a` and `b`, in O(n).
pub fn pair_exchange_delta(inst: &QapInstance, pi: &Permutation, a: usize, b: usize) -> Result<Rational> {
    inst.check_perm(pi)?;
    for x in [a, b] {
        if x >= inst.n {
            return Err(Error::IndexOutOfRange { index: x, size: inst.n });
        }
    }
    if a == b {
        return Err(Error::Formulation(format!("pair exchange needs distinct facilities, got {a} twice")));
    }
    Ok(inst.to_rational(inst.pair_delta_scaled(pi, a, b)))
}

/// Disjoint facility pairs to exchange against a base permutation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExchangePlan {
    pairs: Vec<(usize, usize)>,
    base: Permutation,
}

impl ExchangePlan {
    pub fn new(base: Permutation, pairs: Vec<(usize, usize)>) -> Result<Self> {
        let n = base.len();
        let mut used = vec![false; n];
        for &(a, b) in &pairs {
            for x in [a, b] {
                if x >= n {
                    return Err(Error::IndexOutOfRange { index: x, size: n });
                }
            }
            if a == b || used[a] || used[b] {
                return Err(Error::Formulation(format!("exchange pair ({a},{b}) overlaps another pair")));
            }
            used[a] = true;
            used[b] = true;
        }
        Ok(Self { pairs, base })
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn base(&self) -> &Permutation {
        &self.base
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// Applies the exchanges selected by `y`; always a valid permutation.
pub fn decode_uqubols(plan: &ExchangePlan, y: &BitString) -> Result<Permutation> {
    if y.len() != plan.len() {
        return Err(Error::Dimension {
            expected: plan.len(),
            got: y.len(),
        });
    }
    let mut pi = plan.base.clone();
    for (j, &(a, b)) in plan.pairs.iter().enumerate() {
        if y.get(j) {
            pi.swap(a, b);
        }
    }
    Ok(pi)
}

/// All pair deltas (scaled) in lexicographic pair order.
fn scan_pairs(inst: &QapInstance, pi: &Permutation) -> Vec<(i128, usize, usize)> {
    let n = inst.n;
    let scan_row = |a: usize| -> Vec<(i128, usize, usize)> {
        (a + 1..n).map(|b| (inst.pair_delta_scaled(pi, a, b), a, b)).collect()
    };
    // Row order is preserved by the indexed collect, so the result is deterministic.
    if n >= 64 {
        (0..n).into_par_iter().flat_map_iter(scan_row).collect()
    } else {
        (0..n).flat_map(scan_row).collect()
    }
}

/// Ranks every pair by its exchange delta (most improving first, ties by pair
/// order) and greedily keeps pairs disjoint from those already kept, up to
/// `min(m_max, n / 2)` pairs. Non-improving pairs fill the plan once the
/// improving ones run out.
pub fn greedy_select_pairs(inst: &QapInstance, pi: &Permutation, m_max: usize) -> Result<ExchangePlan> {
    inst.check_perm(pi)?;
    let limit = m_max.min(inst.n / 2);
    let mut ranked = scan_pairs(inst, pi);
    ranked.sort_unstable();
    let mut used = vec![false; inst.n];
    let mut pairs = Vec::with_capacity(limit);
    for (_, a, b) in ranked {
        if pairs.len() == limit {
            break;
        }
        if !used[a] && !used[b] {
            used[a] = true;
            used[b] = true;
            pairs.push((a, b));
        }
    }
    ExchangePlan::new(pi.clone(), pairs)
}

/// Exact exchange QUBO: `evaluate(model, y) == qap_objective(decode_uqubols(plan, y))`.
pub fn build_uqubols_qubo(inst: &QapInstance, plan: &ExchangePlan) -> Result<QuboModel> {
    let pi = &plan.base;
    inst.check_perm(pi)?;
    // Revalidate: plans can be built from parts that bypass `ExchangePlan::new`.
    let plan = ExchangePlan::new(pi.clone(), plan.pairs.clone())?;
    let n = inst.n;
    let m = plan.len();
    let (w, d) = (&inst.flow_s, &inst.dist_s);

    // Location of facility `a` when its group is in state `s` (0 keep, 1 exchange).
    let mut group_of = vec![usize::MAX; n];
    let mut loc = vec![[0usize; 2]; n];
    for a in 0..n {
        loc[a] = [pi.get(a), pi.get(a)];
    }
    for (g, &(a, b)) in plan.pairs.iter().enumerate() {
        group_of[a] = g;
        group_of[b] = g;
        loc[a][1] = pi.get(b);
        loc[b][1] = pi.get(a);
    }
    let fixed: Vec<usize> = (0..n).filter(|a| group_of[*a] == usize::MAX).collect();
    let members = |g: usize| [plan.pairs[g].0, plan.pairs[g].1];
    let term = |a: usize, la: usize, b: usize, lb: usize| w.get(a, b) as i128 * d.get(la, lb) as i128;

    let mut constant: i128 = 0;
    for &a in &fixed {
        for &b in &fixed {
            constant += term(a, pi.get(a), b, pi.get(b));
        }
    }
    // Per-group energy in each state: interactions inside the group and with fixed facilities.
    let mut single = vec![[0i128; 2]; m];
    for (g, e) in single.iter_mut().enumerate() {
        for s in 0..2 {
            let mut acc = 0;
            for a in members(g) {
                for b in members(g) {
                    acc += term(a, loc[a][s], b, loc[b][s]);
                }
                for &f in &fixed {
                    acc += term(a, loc[a][s], f, pi.get(f)) + term(f, pi.get(f), a, loc[a][s]);
                }
            }
            e[s] = acc;
        }
    }
    let mut b = QuboBuilder::new(m);
    let den = inst.denom();
    let r = |v: i128| Rational::new(v, den);
    let mut offset = constant;
    for (g, e) in single.iter().enumerate() {
        offset += e[0];
        b.add_linear(g, r(e[1] - e[0]));
    }
    // Pairwise interactions between groups, expanded bilinearly in (y_g, y_h).
    for g in 0..m {
        for h in g + 1..m {
            let mut t = [[0i128; 2]; 2];
            for (s, row) in t.iter_mut().enumerate() {
                for (u, cell) in row.iter_mut().enumerate() {
                    let mut acc = 0;
                    for a in members(g) {
                        for c in members(h) {
                            acc += term(a, loc[a][s], c, loc[c][u]) + term(c, loc[c][u], a, loc[a][s]);
                        }
                    }
                    *cell = acc;
                }
            }
            offset += t[0][0];
            b.add_linear(g, r(t[1][0] - t[0][0]));
            b.add_linear(h, r(t[0][1] - t[0][0]));
            b.add_quadratic(g, h, r(t[1][1] - t[1][0] - t[0][1] + t[0][0]));
        }
    }
    b.add_offset(r(offset));
    Ok(b.build())
}

/// Pairwise disjoint facility blocks of equal size `k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubsetFamily {
    subsets: Vec<Vec<usize>>,
    k: usize,
}

impl SubsetFamily {
    pub fn new(n: usize, subsets: Vec<Vec<usize>>) -> Result<Self> {
        let k = subsets.first().map_or(0, Vec::len);
        let mut used = vec![false; n];
        for s in &subsets {
            if s.len() != k {
                return Err(Error::Formulation(format!("subset sizes differ: {} vs {k}", s.len())));
            }
            for &f in s {
                if f >= n {
                    return Err(Error::IndexOutOfRange { index: f, size: n });
                }
                if used[f] {
                    return Err(Error::Formulation(format!("facility {f} appears in two subsets")));
                }
                used[f] = true;
            }
        }
        Ok(Self { subsets, k })
    }

    pub fn subsets(&self) -> &[Vec<usize>] {
        &self.subsets
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn m(&self) -> usize {
        self.subsets.len()
    }

    /// Number of block variables, `m k^2`.
    pub fn num_vars(&self) -> usize {
        self.m() * self.k * self.k
    }

    /// Variable index for "facility `subsets[j][a]` takes the location of `subsets[j][b]`".
    pub fn var(&self, j: usize, a: usize, b: usize) -> usize {
        (j * self.k + a) * self.k + b
    }
}

/// Greedy blocks: the ranked disjoint exchange pairs grouped `k / 2` per block;
/// odd `k` adds the lowest-indexed facility not yet used. At most `n / k` blocks.
pub fn greedy_subsets(inst: &QapInstance, pi: &Permutation, k: usize, m: usize) -> Result<SubsetFamily> {
    if k == 0 || m == 0 {
        return Err(Error::Config("subset size and count must be positive".into()));
    }
    let n = inst.n;
    let blocks = m.min(n / k);
    let per_block = k / 2;
    let plan = greedy_select_pairs(inst, pi, blocks * per_block)?;
    let mut used = vec![false; n];
    for &(a, b) in plan.pairs() {
        used[a] = true;
        used[b] = true;
    }
    let mut next_free = 0;
    let mut subsets = Vec::with_capacity(blocks);
    for j in 0..blocks {
        let mut block: Vec<usize> = plan.pairs()[j * per_block..(j + 1) * per_block]
            .iter()
            .flat_map(|&(a, b)| [a, b])
            .collect();
        if k % 2 == 1 {
            while used[next_free] {
                next_free += 1;
            }
            used[next_free] = true;
            block.push(next_free);
        }
        subsets.push(block);
    }
    SubsetFamily::new(n, subsets)
}

pub fn random_subsets<R: Rng>(rng: &mut R, n: usize, k: usize, m: usize) -> Result<SubsetFamily> {
    if k == 0 || m == 0 {
        return Err(Error::Config("subset size and count must be positive".into()));
    }
    let mut facilities: Vec<usize> = (0..n).collect();
    facilities.shuffle(rng);
    let blocks = m.min(n / k);
    let subsets = (0..blocks).map(|j| facilities[j * k..(j + 1) * k].to_vec()).collect();
    SubsetFamily::new(n, subsets)
}

/// Penalized `n^2`-variable model; variable `i * n + k` means facility `i` at location `k`.
///
/// Per-constraint weights are ordered facility constraints first, then location
/// constraints.
pub fn full_qubo(inst: &QapInstance, penalties: &PenaltyConfig) -> Result<QuboModel> {
    let n = inst.n;
    let mut b = QuboBuilder::new(n * n);
    for i in 0..n {
        for j in 0..n {
            let w = inst.flow(i, j);
            if w == int(0) {
                continue;
            }
            for k in 0..n {
                for l in 0..n {
                    b.add_quadratic(i * n + k, j * n + l, w * inst.dist(k, l));
                }
            }
        }
    }
    let objective = b.clone().build();
    let mut groups: Vec<Vec<usize>> = (0..n).map(|i| (0..n).map(|k| i * n + k).collect()).collect();
    groups.extend((0..n).map(|k| (0..n).map(|i| i * n + k).collect::<Vec<_>>()));
    let weights = penalties.resolve(groups.len(), &objective)?;
    for (g, lambda) in groups.iter().zip(weights) {
        b.add_cardinality_penalty(g, int(1), lambda);
    }
    Ok(b.build())
}

/// Permutation-matrix encoding of `pi` for [`full_qubo`].
pub fn encode_full(pi: &Permutation) -> BitString {
    let n = pi.len();
    let mut x = BitString::zeros(n * n);
    for i in 0..n {
        x.set(i * n + pi.get(i), true);
    }
    x
}

/// Decodes a [`full_qubo`] assignment; `None` unless it is a permutation matrix.
pub fn decode_full(n: usize, x: &BitString) -> Option<Permutation> {
    if x.len() != n * n {
        return None;
    }
    let mut image = Vec::with_capacity(n);
    for i in 0..n {
        let ones: Vec<usize> = (0..n).filter(|k| x.get(i * n + k)).collect();
        if ones.len() != 1 {
            return None;
        }
        image.push(ones[0]);
    }
    Permutation::new(image).ok()
}

/// Objective part of the block-restricted model, before penalties.
fn cqubols_objective(inst: &QapInstance, family: &SubsetFamily, pi: &Permutation) -> QuboModel {
    let n = inst.n;
    let k = family.k;
    let (w, d) = (&inst.flow_s, &inst.dist_s);
    let mut in_block = vec![false; n];
    // (facility, location) for each variable.
    let mut vars = Vec::with_capacity(family.num_vars());
    for block in &family.subsets {
        for &f in block {
            in_block[f] = true;
        }
        for &f in block {
            for &g in block {
                vars.push((f, pi.get(g)));
            }
        }
    }
    let fixed: Vec<usize> = (0..n).filter(|f| !in_block[*f]).collect();
    let den = inst.denom();
    let r = |v: i128| Rational::new(v, den);
    let term = |a: usize, la: usize, b: usize, lb: usize| w.get(a, b) as i128 * d.get(la, lb) as i128;

    let mut b = QuboBuilder::new(vars.len());
    let mut constant: i128 = 0;
    for &f in &fixed {
        for &g in &fixed {
            constant += term(f, pi.get(f), g, pi.get(g));
        }
    }
    b.add_offset(r(constant));
    for (v, &(f, l)) in vars.iter().enumerate() {
        let mut lin = term(f, l, f, l);
        for &g in &fixed {
            lin += term(f, l, g, pi.get(g)) + term(g, pi.get(g), f, l);
        }
        b.add_linear(v, r(lin));
        for (u, &(g, lg)) in vars.iter().enumerate().skip(v + 1) {
            if g == f && lg == l {
                continue;
            }
            let q = term(f, l, g, lg) + term(g, lg, f, l);
            if q != 0 {
                b.add_quadratic(v, u, r(q));
            }
        }
    }
    debug_assert_eq!(vars.len(), family.m() * k * k);
    b.build()
}

/// Block-restricted penalized model over `m k^2` variables (see [`SubsetFamily::var`]).
///
/// Equivalent to [`full_qubo`] with every variable outside the blocks fixed: block
/// facilities may only take locations currently held by their block, and the rest
/// stay where `pi` puts them. Per-constraint weights are ordered facility
/// constraints first, then location constraints, block by block.
pub fn build_cqubols_qubo(
    inst: &QapInstance,
    family: &SubsetFamily,
    pi: &Permutation,
    penalties: &PenaltyConfig,
) -> Result<QuboModel> {
    inst.check_perm(pi)?;
    SubsetFamily::new(inst.n, family.subsets.clone())?;
    let objective = cqubols_objective(inst, family, pi);
    let k = family.k;
    let mut groups = Vec::with_capacity(2 * family.m() * k);
    for j in 0..family.m() {
        for a in 0..k {
            groups.push((0..k).map(|c| family.var(j, a, c)).collect::<Vec<_>>());
        }
    }
    for j in 0..family.m() {
        for c in 0..k {
            groups.push((0..k).map(|a| family.var(j, a, c)).collect::<Vec<_>>());
        }
    }
    let weights = penalties.resolve(groups.len(), &objective)?;
    let mut b = QuboBuilder::from_model(&objective);
    for (g, lambda) in groups.iter().zip(weights) {
        b.add_cardinality_penalty(g, int(1), lambda);
    }
    Ok(b.build())
}

/// Encoding of the current assignment (every block facility keeps its location).
pub fn encode_cqubols(family: &SubsetFamily) -> BitString {
    let mut x = BitString::zeros(family.num_vars());
    for j in 0..family.m() {
        for a in 0..family.k {
            x.set(family.var(j, a, a), true);
        }
    }
    x
}

/// Decodes block bits into a permutation, or `None` if any block violates the
/// 2-way exactly-one constraints.
pub fn decode_cqubols(family: &SubsetFamily, pi: &Permutation, bits: &BitString) -> Result<Option<Permutation>> {
    if bits.len() != family.num_vars() {
        return Err(Error::Dimension {
            expected: family.num_vars(),
            got: bits.len(),
        });
    }
    let k = family.k;
    let mut out = pi.clone();
    for (j, block) in family.subsets.iter().enumerate() {
        let mut col_used = vec![false; k];
        for (a, &f) in block.iter().enumerate() {
            let ones: Vec<usize> = (0..k).filter(|c| bits.get(family.var(j, a, *c))).collect();
            if ones.len() != 1 || col_used[ones[0]] {
                return Ok(None);
            }
            col_used[ones[0]] = true;
            out.image[f] = pi.get(block[ones[0]]);
        }
    }
    Ok(Some(out))
}

/// Penalty weight the default configuration would use for this family.
pub fn cqubols_default_penalty(inst: &QapInstance, family: &SubsetFamily, pi: &Permutation) -> Rational {
    default_penalty(&cqubols_objective(inst, family, pi))
}
