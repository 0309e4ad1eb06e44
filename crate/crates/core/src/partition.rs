//! Balanced K-way graph partitioning with pairwise swap moves.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::qubo::{BitString, PenaltyConfig, QuboBuilder, QuboModel};
use crate::rational::{int, Rational};

/// Part index per vertex, in `0..k`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Partition {
    parts: Vec<usize>,
    k: usize,
}

impl Partition {
    pub fn new(parts: Vec<usize>, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::Config("part count must be positive".into()));
        }
        if let Some(&bad) = parts.iter().find(|&&p| p >= k) {
            return Err(Error::IndexOutOfRange { index: bad, size: k });
        }
        Ok(Self { parts, k })
    }

    /// Like [`Partition::new`] but also requires every part to hold `n / k` vertices.
    pub fn balanced(parts: Vec<usize>, k: usize) -> Result<Self> {
        let p = Self::new(parts, k)?;
        if !p.is_balanced() {
            return Err(Error::Formulation(format!("partition is not balanced over {k} parts")));
        }
        Ok(p)
    }

    pub fn random_balanced<R: Rng>(rng: &mut R, n: usize, k: usize) -> Result<Self> {
        if k == 0 || !n.is_multiple_of(k) {
            return Err(Error::Config(format!("{n} vertices cannot be split evenly into {k} parts")));
        }
        let mut parts: Vec<usize> = (0..n).map(|v| v % k).collect();
        parts.shuffle(rng);
        Self::new(parts, k)
    }

    pub fn n(&self) -> usize {
        self.parts.len()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn part(&self, v: usize) -> usize {
        self.parts[v]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.parts
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![0; self.k];
        for &p in &self.parts {
            s[p] += 1;
        }
        s
    }

    pub fn is_balanced(&self) -> bool {
        self.n().is_multiple_of(self.k) && self.sizes().iter().all(|&s| s == self.n() / self.k)
    }

    pub fn swap(&mut self, u: usize, v: usize) {
        self.parts.swap(u, v);
    }

    /// One part index per line.
    pub fn parse(text: &str, k: usize) -> Result<Self> {
        let parts = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(i, l)| {
                l.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::parse(i + 1, format!("bad part index '{}'", l.trim())))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(parts, k)
    }

    pub fn to_lines(&self) -> String {
        self.parts.iter().map(|p| format!("{p}\n")).collect()
    }
}

impl std::fmt::Display for Partition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.parts.iter().map(|c| c.to_string()).collect();
        f.write_str(&parts.join(" "))
    }
}

fn check(g: &WeightedGraph, p: &Partition) -> Result<()> {
    if p.n() != g.n() {
        return Err(Error::Dimension {
            expected: g.n(),
            got: p.n(),
        });
    }
    Ok(())
}

/// Total weight of edges whose endpoints lie in different parts.
pub fn cut_value(g: &WeightedGraph, p: &Partition) -> Result<Rational> {
    check(g, p)?;
    Ok(g.edges()
        .iter()
        .filter(|(u, v, _)| p.part(*u) != p.part(*v))
        .map(|(_, _, w)| *w)
        .sum())
}

/// `weights[u][l]`: total edge weight from `u` into part `l`.
fn part_weights(g: &WeightedGraph, p: &Partition) -> Vec<Vec<Rational>> {
    let mut out = vec![vec![int(0); p.k()]; g.n()];
    for (u, row) in out.iter_mut().enumerate() {
        for &(v, w) in g.neighbors(u) {
            row[p.part(v)] += w;
        }
    }
    out
}

fn gain_from(weights: &[Vec<Rational>], g: &WeightedGraph, p: &Partition, u: usize, v: usize) -> Rational {
    let (pu, pv) = (p.part(u), p.part(v));
    let d_u = weights[u][pv] - weights[u][pu];
    let d_v = weights[v][pu] - weights[v][pv];
    d_u + d_v - int(2) * g.weight(u, v)
}

/// Cut reduction from swapping `u` and `v`: `D_u + D_v - 2 w_uv`, where `D_u` is
/// the weight from `u` into its partner's part minus the weight into its own.
pub fn kl_gain(g: &WeightedGraph, p: &Partition, u: usize, v: usize) -> Result<Rational> {
    check(g, p)?;
    for x in [u, v] {
        if x >= g.n() {
            return Err(Error::IndexOutOfRange { index: x, size: g.n() });
        }
    }
    if p.part(u) == p.part(v) {
        return Err(Error::Formulation(format!("vertices {u} and {v} share part {}", p.part(u))));
    }
    let weights = part_weights(g, p);
    Ok(gain_from(&weights, g, p, u, v))
}

/// Disjoint cross-part vertex pairs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SwapMatching {
    pairs: Vec<(usize, usize)>,
}

impl SwapMatching {
    pub fn new(p: &Partition, pairs: Vec<(usize, usize)>) -> Result<Self> {
        let mut used = vec![false; p.n()];
        for &(u, v) in &pairs {
            for x in [u, v] {
                if x >= p.n() {
                    return Err(Error::IndexOutOfRange { index: x, size: p.n() });
                }
            }
            if p.part(u) == p.part(v) {
                return Err(Error::Formulation(format!("pair ({u},{v}) lies inside one part")));
            }
            if used[u] || used[v] {
                return Err(Error::Formulation(format!("pair ({u},{v}) overlaps another pair")));
            }
            used[u] = true;
            used[v] = true;
        }
        Ok(Self { pairs })
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// Greedy matching: cross-part pairs by descending gain, ties in pair order,
/// keeping each pair disjoint from those already kept, up to `m_max` pairs.
pub fn select_swap_matching(g: &WeightedGraph, p: &Partition, m_max: usize) -> Result<SwapMatching> {
    check(g, p)?;
    let weights = part_weights(g, p);
    let n = g.n();
    let mut ranked = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if p.part(u) != p.part(v) {
                ranked.push((gain_from(&weights, g, p, u, v), u, v));
            }
        }
    }
    ranked.sort_by(|a, b| b.0.cmp(&a.0).then((a.1, a.2).cmp(&(b.1, b.2))));
    let mut used = vec![false; n];
    let mut pairs = Vec::new();
    for (_, u, v) in ranked {
        if pairs.len() == m_max {
            break;
        }
        if !used[u] && !used[v] {
            used[u] = true;
            used[v] = true;
            pairs.push((u, v));
        }
    }
    SwapMatching::new(p, pairs)
}

pub fn random_swap_matching<R: Rng>(rng: &mut R, p: &Partition, m_max: usize) -> Result<SwapMatching> {
    let mut order: Vec<usize> = (0..p.n()).collect();
    order.shuffle(rng);
    let mut used = vec![false; p.n()];
    let mut pairs = Vec::new();
    for (i, &u) in order.iter().enumerate() {
        if pairs.len() == m_max {
            break;
        }
        if used[u] {
            continue;
        }
        if let Some(&v) = order[i + 1..].iter().find(|&&v| !used[v] && p.part(v) != p.part(u)) {
            used[u] = true;
            used[v] = true;
            pairs.push((u.min(v), u.max(v)));
        }
    }
    SwapMatching::new(p, pairs)
}

/// Swaps the part labels of every pair with `y = 1`.
pub fn apply_swaps(p: &Partition, matching: &SwapMatching, y: &BitString) -> Result<Partition> {
    if y.len() != matching.len() {
        return Err(Error::Dimension {
            expected: matching.len(),
            got: y.len(),
        });
    }
    let mut out = p.clone();
    for (j, &(u, v)) in matching.pairs.iter().enumerate() {
        if y.get(j) {
            out.swap(u, v);
        }
    }
    Ok(out)
}

/// Swap QUBO with one variable per pair; `evaluate(model, y)` is exactly twice
/// the cut of `apply_swaps(p, matching, y)`. Edges untouched by the matching
/// contribute to the offset.
pub fn build_swap_qubo(g: &WeightedGraph, p: &Partition, matching: &SwapMatching) -> Result<QuboModel> {
    check(g, p)?;
    let matching = SwapMatching::new(p, matching.pairs.clone())?;
    let n = g.n();
    let mut group = vec![usize::MAX; n];
    // Part of each vertex when its pair variable is 0 or 1.
    let mut part = vec![[0usize; 2]; n];
    for v in 0..n {
        part[v] = [p.part(v), p.part(v)];
    }
    for (j, &(u, v)) in matching.pairs.iter().enumerate() {
        group[u] = j;
        group[v] = j;
        part[u][1] = p.part(v);
        part[v][1] = p.part(u);
    }
    let cut = |w: Rational, a: usize, b: usize| if a != b { int(2) * w } else { int(0) };
    let mut b = QuboBuilder::new(matching.len());
    for &(u, v, w) in g.edges() {
        match (group[u], group[v]) {
            (usize::MAX, usize::MAX) => {
                b.add_offset(cut(w, part[u][0], part[v][0]));
            }
            (gu, gv) if gu == gv || gu == usize::MAX || gv == usize::MAX => {
                let j = if gu == usize::MAX { gv } else { gu };
                let c0 = cut(w, part[u][0], part[v][0]);
                let c1 = cut(w, part[u][1], part[v][1]);
                b.add_offset(c0);
                b.add_linear(j, c1 - c0);
            }
            (gu, gv) => {
                let t = |s: usize, r: usize| cut(w, part[u][s], part[v][r]);
                let t00 = t(0, 0);
                b.add_offset(t00);
                b.add_linear(gu, t(1, 0) - t00);
                b.add_linear(gv, t(0, 1) - t00);
                b.add_quadratic(gu, gv, t(1, 1) - t(1, 0) - t(0, 1) + t00);
            }
        }
    }
    Ok(b.build())
}

/// Penalized `n K`-variable model; variable `v * K + l` means vertex `v` in part `l`.
///
/// Feasible assignments score twice their cut. Per-constraint weights are
/// ordered vertex constraints first, then part-size constraints.
pub fn full_gp_qubo(g: &WeightedGraph, k: usize, penalties: &PenaltyConfig) -> Result<QuboModel> {
    let n = g.n();
    if k == 0 || !n.is_multiple_of(k) {
        return Err(Error::Config(format!("{n} vertices cannot be split evenly into {k} parts")));
    }
    let mut b = QuboBuilder::new(n * k);
    for &(u, v, w) in g.edges() {
        for l in 0..k {
            let (a, c) = (u * k + l, v * k + l);
            b.add_linear(a, w);
            b.add_linear(c, w);
            b.add_quadratic(a, c, int(-2) * w);
        }
    }
    let objective = b.clone().build();
    let mut groups: Vec<(Vec<usize>, i64)> = (0..n).map(|v| ((0..k).map(|l| v * k + l).collect(), 1)).collect();
    groups.extend((0..k).map(|l| ((0..n).map(|v| v * k + l).collect(), (n / k) as i64)));
    let weights = penalties.resolve(groups.len(), &objective)?;
    for ((vars, target), lambda) in groups.iter().zip(weights) {
        b.add_cardinality_penalty(vars, int(*target), lambda);
    }
    Ok(b.build())
}

/// Decodes a [`full_gp_qubo`] assignment; `None` unless every vertex is in exactly one part.
pub fn decode_full_gp(n: usize, k: usize, x: &BitString) -> Option<Partition> {
    if x.len() != n * k {
        return None;
    }
    let mut parts = Vec::with_capacity(n);
    for v in 0..n {
        let ones: Vec<usize> = (0..k).filter(|l| x.get(v * k + l)).collect();
        if ones.len() != 1 {
            return None;
        }
        parts.push(ones[0]);
    }
    Partition::new(parts, k).ok()
}

/// A 15-vertex, 3-part balanced instance where no single swap reduces the cut
/// but swapping `1 <-> 4` and `3 <-> 7` together reduces it from 6 to 2.
///
/// Parts: `{0,1,2,3,8}`, `{4,5,6,7,9}` and the clique `{10..14}`.
pub fn coupled_swap_instance() -> (WeightedGraph, Partition) {
    let mut edges = vec![(1, 3), (4, 7), (1, 5), (3, 6), (4, 0), (7, 2), (0, 2), (2, 8), (0, 8), (5, 6), (6, 9), (5, 9), (8, 10), (9, 11)];
    for u in 10..15 {
        for v in u + 1..15 {
            edges.push((u, v));
        }
    }
    let g = WeightedGraph::unweighted(15, edges).expect("valid edges");
    let mut parts = vec![2; 15];
    for v in [0, 1, 2, 3, 8] {
        parts[v] = 0;
    }
    for v in [4, 5, 6, 7, 9] {
        parts[v] = 1;
    }
    (g, Partition::balanced(parts, 3).expect("balanced"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annealer::brute_force_solve;
    use crate::generate::random_graph;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn half_external_degree_sum(g: &WeightedGraph, p: &Partition) -> Rational {
        let mut s = int(0);
        for u in 0..g.n() {
            for &(v, w) in g.neighbors(u) {
                if p.part(u) != p.part(v) {
                    s += w;
                }
            }
        }
        s / int(2)
    }

    #[test]
    fn cut_examples() {
        let g = WeightedGraph::new(2, [(0, 1, int(3))]).unwrap();
        assert_eq!(cut_value(&g, &Partition::new(vec![0, 0], 2).unwrap()).unwrap(), int(0));
        assert_eq!(cut_value(&g, &Partition::new(vec![0, 1], 2).unwrap()).unwrap(), int(3));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let g = random_graph(&mut rng, 12, 0.3);
            let p = Partition::random_balanced(&mut rng, 12, 3).unwrap();
            assert_eq!(cut_value(&g, &p).unwrap(), half_external_degree_sum(&g, &p));
        }
        assert!(cut_value(&g, &Partition::new(vec![0], 2).unwrap()).is_err());
    }

    #[test]
    fn gain_matches_recompute() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..1000 {
            let k = rng.gen_range(2..=3);
            let n = k * rng.gen_range(1..=4);
            let g = random_graph(&mut rng, n, 0.4);
            let p = Partition::random_balanced(&mut rng, n, k).unwrap();
            let u = rng.gen_range(0..n);
            let Some(v) = (0..n).find(|&v| p.part(v) != p.part(u)) else { continue };
            let mut q = p.clone();
            q.swap(u, v);
            assert_eq!(
                kl_gain(&g, &p, u, v).unwrap(),
                cut_value(&g, &p).unwrap() - cut_value(&g, &q).unwrap()
            );
        }
    }

    #[test]
    fn gain_examples() {
        let g = WeightedGraph::unweighted(4, [(0, 2), (1, 3)]).unwrap();
        let p = Partition::new(vec![0, 1, 0, 1], 2).unwrap();
        let weights = part_weights(&g, &p);
        let d = |u: usize, other: usize| weights[u][other] - weights[u][p.part(u)];
        assert_eq!(kl_gain(&g, &p, 0, 1).unwrap(), d(0, 1) + d(1, 0));
        let iso = WeightedGraph::unweighted(2, Vec::<(usize, usize)>::new()).unwrap();
        let p2 = Partition::new(vec![0, 1], 2).unwrap();
        assert_eq!(kl_gain(&iso, &p2, 0, 1).unwrap(), int(0));
        assert!(kl_gain(&g, &p, 0, 2).is_err());
    }

    #[test]
    fn matching_shapes() {
        let g = WeightedGraph::unweighted(2, [(0, 1)]).unwrap();
        let p = Partition::new(vec![0, 1], 2).unwrap();
        assert_eq!(select_swap_matching(&g, &p, 5).unwrap().pairs(), &[(0, 1)]);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let g = random_graph(&mut rng, 12, 0.3);
            let p = Partition::random_balanced(&mut rng, 12, 3).unwrap();
            let m = select_swap_matching(&g, &p, 6).unwrap();
            SwapMatching::new(&p, m.pairs().to_vec()).unwrap();
            let r = random_swap_matching(&mut rng, &p, 4).unwrap();
            assert!(r.len() <= 4);
        }
        assert!(SwapMatching::new(&p, vec![(0, 0)]).is_err());
    }

    #[test]
    fn swap_qubo_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..30 {
            let k = if rng.gen_bool(0.5) { 2 } else { 3 };
            let n = 12;
            let g = random_graph(&mut rng, n, 0.35);
            let p = Partition::random_balanced(&mut rng, n, k).unwrap();
            let m = random_swap_matching(&mut rng, &p, 4).unwrap();
            let model = build_swap_qubo(&g, &p, &m).unwrap();
            assert_eq!(model.evaluate(&BitString::zeros(m.len())).unwrap(), int(2) * cut_value(&g, &p).unwrap());
            for v in 0..(1u64 << m.len()) {
                let y = BitString::from_index(v, m.len());
                let q = apply_swaps(&p, &m, &y).unwrap();
                assert_eq!(q.sizes(), p.sizes());
                assert_eq!(model.evaluate(&y).unwrap(), int(2) * cut_value(&g, &q).unwrap());
            }
        }
    }

    #[test]
    fn single_pair_energy_is_gain() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let g = random_graph(&mut rng, 8, 0.5);
            let p = Partition::random_balanced(&mut rng, 8, 2).unwrap();
            let u = 0;
            let v = (1..8).find(|&v| p.part(v) != p.part(0)).unwrap();
            let m = SwapMatching::new(&p, vec![(u, v)]).unwrap();
            let model = build_swap_qubo(&g, &p, &m).unwrap();
            let diff = model.evaluate(&BitString::ones(1)).unwrap() - model.evaluate(&BitString::zeros(1)).unwrap();
            let gain = kl_gain(&g, &p, u, v).unwrap();
            assert_eq!(diff, int(-2) * gain);
            let best = brute_force_solve(&model).unwrap().best;
            if gain > int(0) {
                assert!(best.get(0));
            } else if gain < int(0) {
                assert!(!best.get(0));
            }
        }
    }

    #[test]
    fn apply_swaps_examples() {
        let g = WeightedGraph::unweighted(2, [(0, 1)]).unwrap();
        let p = Partition::new(vec![0, 1], 2).unwrap();
        let m = SwapMatching::new(&p, vec![(0, 1)]).unwrap();
        assert_eq!(apply_swaps(&p, &m, &BitString::zeros(1)).unwrap(), p);
        let q = apply_swaps(&p, &m, &BitString::ones(1)).unwrap();
        assert_eq!(q.as_slice(), &[1, 0]);
        assert_eq!(cut_value(&g, &q).unwrap(), cut_value(&g, &p).unwrap());
    }

    #[test]
    fn full_gp_exhaustive_n4() {
        let g = WeightedGraph::new(4, [(0, 1, int(2)), (1, 2, int(1)), (2, 3, int(3)), (0, 3, int(1))]).unwrap();
        let model = full_gp_qubo(&g, 2, &PenaltyConfig::Uniform(int(10))).unwrap();
        let cut_term = |x: &BitString| -> Rational {
            let mut s = int(0);
            for &(u, v, w) in g.edges() {
                for l in 0..2 {
                    if x.get(u * 2 + l) != x.get(v * 2 + l) {
                        s += w;
                    }
                }
            }
            s
        };
        for v in 0..256 {
            let x = BitString::from_index(v, 8);
            let penalty = model.evaluate(&x).unwrap() - cut_term(&x);
            match decode_full_gp(4, 2, &x).filter(Partition::is_balanced) {
                Some(p) => {
                    assert_eq!(penalty, int(0));
                    assert_eq!(cut_term(&x), int(2) * cut_value(&g, &p).unwrap());
                }
                None => assert!(penalty > int(0)),
            }
        }
        let one = full_gp_qubo(&g, 1, &PenaltyConfig::default()).unwrap();
        assert_eq!(one.evaluate(&BitString::ones(4)).unwrap(), int(0));
        assert!(full_gp_qubo(&g, 3, &PenaltyConfig::default()).is_err());
    }

    #[test]
    fn coupled_swap_phenomenon() {
        let (g, p) = coupled_swap_instance();
        assert_eq!(cut_value(&g, &p).unwrap(), int(6));
        for u in 0..15 {
            for v in u + 1..15 {
                if p.part(u) != p.part(v) {
                    assert!(kl_gain(&g, &p, u, v).unwrap() <= int(0));
                }
            }
        }
        let m = select_swap_matching(&g, &p, 2).unwrap();
        assert_eq!(m.pairs(), &[(1, 4), (3, 7)]);
        let model = build_swap_qubo(&g, &p, &m).unwrap();
        let best = brute_force_solve(&model).unwrap();
        assert_eq!(best.best, BitString::ones(2));
        let q = apply_swaps(&p, &m, &best.best).unwrap();
        assert_eq!(cut_value(&g, &q).unwrap(), int(2));
    }
}
