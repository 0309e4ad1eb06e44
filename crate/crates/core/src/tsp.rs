//! Symmetric TSP tours and the k-reversal move QUBO.
//!
//! Removing `k` tour edges leaves `k` directed segments in cyclic order. A
//! k-reversal move keeps that order and chooses, per segment, whether to reverse
//! it; every one of the `2^k` choices is a valid tour, so the move QUBO needs no
//! penalty. Internal segment weight is reversal-invariant under symmetry, so the
//! model only carries the `k` connecting edges.

use rand::seq::{index::sample, SliceRandom};
use rand::Rng;

use crate::error::{Error, Result};
use crate::qubo::{BitString, QuboBuilder, QuboModel};
use crate::rational::{int, parse_rational, Rational};

#[derive(Clone, Debug, PartialEq)]
pub struct TspInstance {
    n: usize,
    w: Vec<Rational>,
}

/// Rounding applied to Euclidean distances from coordinate files.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Rounding {
    /// Kept to six decimal places.
    #[default]
    None,
    NearestInteger,
}

impl TspInstance {
    pub fn new(n: usize, w: Vec<Rational>) -> Result<Self> {
        if w.len() != n * n {
            return Err(Error::Dimension {
                expected: n * n,
                got: w.len(),
            });
        }
        for u in 0..n {
            if w[u * n + u] != int(0) {
                return Err(Error::Formulation(format!("nonzero diagonal at city {u}")));
            }
            for v in u + 1..n {
                let (a, b) = (w[u * n + v], w[v * n + u]);
                if a != b {
                    return Err(Error::Formulation(format!("asymmetric distance between {u} and {v}")));
                }
                if a < int(0) {
                    return Err(Error::Formulation(format!("negative distance between {u} and {v}")));
                }
            }
        }
        Ok(Self { n, w })
    }

    pub fn from_integers(n: usize, w: &[i64]) -> Result<Self> {
        Self::new(n, w.iter().map(|v| int(*v)).collect())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn dist(&self, u: usize, v: usize) -> Rational {
        self.w[u * self.n + v]
    }

    /// Euclidean distances between points.
    pub fn from_points(points: &[(f64, f64)], rounding: Rounding) -> Result<Self> {
        let n = points.len();
        let mut w = vec![int(0); n * n];
        for u in 0..n {
            for v in u + 1..n {
                let (dx, dy) = (points[u].0 - points[v].0, points[u].1 - points[v].1);
                let d = dx.hypot(dy);
                if !d.is_finite() {
                    return Err(Error::Formulation(format!("non-finite distance between {u} and {v}")));
                }
                let r = match rounding {
                    Rounding::NearestInteger => Rational::from_integer(d.round() as i128),
                    Rounding::None => Rational::new((d * 1e6).round() as i128, 1_000_000),
                };
                w[u * n + v] = r;
                w[v * n + u] = r;
            }
        }
        Self::new(n, w)
    }
}

/// Parses `n` followed by `n^2` row-major distances.
pub fn parse_distance_matrix(text: &str) -> Result<TspInstance> {
    let tokens: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .flat_map(|(i, l)| l.split_whitespace().map(move |t| (i + 1, t)))
        .collect();
    let (line, first) = *tokens.first().ok_or_else(|| Error::parse(1, "empty input"))?;
    let n: usize = first.parse().map_err(|_| Error::parse(line, format!("bad size '{first}'")))?;
    if tokens.len() != 1 + n * n {
        return Err(Error::parse(
            tokens.last().map_or(1, |t| t.0),
            format!("expected {} tokens for n = {n}, found {}", 1 + n * n, tokens.len()),
        ));
    }
    let w = tokens[1..]
        .iter()
        .map(|(l, t)| parse_rational(t).ok_or_else(|| Error::parse(*l, format!("non-numeric token '{t}'"))))
        .collect::<Result<Vec<_>>>()?;
    TspInstance::new(n, w)
}

/// Parses one `x y` city per line; `#` starts a comment.
pub fn parse_coordinates(text: &str, rounding: Rounding) -> Result<TspInstance> {
    let mut points = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let vals: Vec<f64> = content
            .split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|_| Error::parse(i + 1, format!("bad coordinate '{t}'"))))
            .collect::<Result<_>>()?;
        if vals.len() != 2 {
            return Err(Error::parse(i + 1, "expected 'x y'"));
        }
        points.push((vals[0], vals[1]));
    }
    TspInstance::from_points(&points, rounding)
}

/// Cyclic visiting order of all cities.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Tour {
    order: Vec<usize>,
}

impl Tour {
    pub fn new(order: Vec<usize>) -> Result<Self> {
        let n = order.len();
        let mut seen = vec![false; n];
        for &c in &order {
            if c >= n {
                return Err(Error::IndexOutOfRange { index: c, size: n });
            }
            if seen[c] {
                return Err(Error::DuplicateIndex(c));
            }
            seen[c] = true;
        }
        Ok(Self { order })
    }

    pub fn identity(n: usize) -> Self {
        Self { order: (0..n).collect() }
    }

    pub fn random<R: Rng>(rng: &mut R, n: usize) -> Self {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(rng);
        Self { order }
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.order
    }

    /// Same cyclic sequence, possibly rotated (direction preserved).
    pub fn is_rotation_of(&self, other: &Tour) -> bool {
        if self.len() != other.len() {
            return false;
        }
        if self.is_empty() {
            return true;
        }
        let Some(start) = other.order.iter().position(|&c| c == self.order[0]) else {
            return false;
        };
        let n = self.len();
        (0..n).all(|t| self.order[t] == other.order[(start + t) % n])
    }

    /// Reverses `order[i..=j]`.
    pub fn reverse_range(&mut self, i: usize, j: usize) {
        self.order[i..=j].reverse();
    }
}

impl std::fmt::Display for Tour {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.order.iter().map(|c| c.to_string()).collect();
        f.write_str(&parts.join(" "))
    }
}

fn check_tour(inst: &TspInstance, tour: &Tour) -> Result<()> {
    if tour.len() != inst.n {
        return Err(Error::Dimension {
            expected: inst.n,
            got: tour.len(),
        });
    }
    Ok(())
}

pub fn tour_length(inst: &TspInstance, tour: &Tour) -> Result<Rational> {
    check_tour(inst, tour)?;
    let n = tour.len();
    Ok((0..n)
        .map(|t| inst.dist(tour.order[t], tour.order[(t + 1) % n]))
        .sum())
}

/// Length change from reversing `order[i..=j]` (`i <= j`), in O(1).
pub fn reversal_delta(inst: &TspInstance, tour: &Tour, i: usize, j: usize) -> Rational {
    let n = tour.len();
    if i == j || (i == 0 && j + 1 == n) {
        return int(0);
    }
    let o = &tour.order;
    let a = o[(i + n - 1) % n];
    let b = o[(j + 1) % n];
    inst.dist(a, o[j]) + inst.dist(o[i], b) - inst.dist(a, o[i]) - inst.dist(o[j], b)
}

/// Tour split into directed segments in cyclic order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SegmentDecomposition {
    segments: Vec<Vec<usize>>,
}

impl SegmentDecomposition {
    pub fn k(&self) -> usize {
        self.segments.len()
    }

    pub fn segments(&self) -> &[Vec<usize>] {
        &self.segments
    }

    pub fn head(&self, i: usize) -> usize {
        self.segments[i][0]
    }

    pub fn tail(&self, i: usize) -> usize {
        *self.segments[i].last().expect("segments are non-empty")
    }
}

/// Cuts the tour edges `order[p] -> order[p + 1 mod n]` for each position `p`.
///
/// Segment 0 starts right after the last cut position and wraps around; the
/// others follow in tour order.
pub fn decompose(tour: &Tour, cut_positions: &[usize]) -> Result<SegmentDecomposition> {
    let n = tour.len();
    if cut_positions.len() < 2 {
        return Err(Error::Formulation(format!("need at least 2 cuts, got {}", cut_positions.len())));
    }
    let mut cuts = cut_positions.to_vec();
    cuts.sort_unstable();
    for w in cuts.windows(2) {
        if w[0] == w[1] {
            return Err(Error::DuplicateIndex(w[0]));
        }
    }
    if let Some(&last) = cuts.last() {
        if last >= n {
            return Err(Error::IndexOutOfRange { index: last, size: n });
        }
    }
    let k = cuts.len();
    let segments = (0..k)
        .map(|s| {
            let start = cuts[(s + k - 1) % k] + 1;
            let end = cuts[s] + if s == 0 { n } else { 0 };
            (start..=end).map(|t| tour.order[t % n]).collect()
        })
        .collect();
    Ok(SegmentDecomposition { segments })
}

/// Chooses `k` distinct cut positions uniformly at random.
pub fn random_cuts<R: Rng>(rng: &mut R, n: usize, k: usize) -> Vec<usize> {
    let mut cuts = sample(rng, n, k.min(n)).into_vec();
    cuts.sort_unstable();
    cuts
}

/// Reverses the segments with `y_i = 1` and concatenates them in segment order.
pub fn apply_reversals(decomp: &SegmentDecomposition, y: &BitString) -> Result<Tour> {
    if y.len() != decomp.k() {
        return Err(Error::Dimension {
            expected: decomp.k(),
            got: y.len(),
        });
    }
    let mut order = Vec::new();
    for (i, seg) in decomp.segments.iter().enumerate() {
        if y.get(i) {
            order.extend(seg.iter().rev());
        } else {
            order.extend(seg.iter());
        }
    }
    Ok(Tour { order })
}

/// Move QUBO plus the weight of the edges inside segments.
#[derive(Clone, Debug, PartialEq)]
pub struct KReversal {
    pub model: QuboModel,
    pub internal_weight: Rational,
}

/// `evaluate(model, y) + internal_weight == tour_length(apply_reversals(decomp, y))`.
pub fn build_k_reversal_qubo(inst: &TspInstance, decomp: &SegmentDecomposition) -> Result<KReversal> {
    let k = decomp.k();
    let mut internal = int(0);
    for seg in &decomp.segments {
        for pair in seg.windows(2) {
            internal += inst.dist(pair[0], pair[1]);
        }
    }
    let mut b = QuboBuilder::new(k);
    for i in 0..k {
        let j = (i + 1) % k;
        let (ui, vi, uj, vj) = (decomp.head(i), decomp.tail(i), decomp.head(j), decomp.tail(j));
        // Exit of segment i is its tail unless reversed; entry of j is its head unless reversed.
        let t00 = inst.dist(vi, uj);
        let t10 = inst.dist(ui, uj);
        let t01 = inst.dist(vi, vj);
        let t11 = inst.dist(ui, vj);
        b.add_offset(t00);
        b.add_linear(i, t10 - t00);
        b.add_linear(j, t01 - t00);
        b.add_quadratic(i, j, t11 - t10 - t01 + t00);
    }
    Ok(KReversal {
        model: b.build(),
        internal_weight: internal,
    })
}
