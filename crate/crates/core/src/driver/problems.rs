use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{ExchangeMoves, NeighborMoves, PenaltyMoves, Problem, SelectionPolicy};
use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::m2sp::{m2sp_to_qap, spectral_ordering};
use crate::partition::{
    apply_swaps, build_swap_qubo, cut_value, kl_gain, random_swap_matching, select_swap_matching, Partition,
    SwapMatching,
};
use crate::qap::{
    build_cqubols_qubo, build_uqubols_qubo, decode_cqubols, decode_uqubols, encode_cqubols, greedy_select_pairs,
    greedy_subsets, pair_exchange_delta, qap_objective, random_subsets, ExchangePlan, Permutation, QapInstance,
    SubsetFamily,
};
use crate::qubo::{BitString, PenaltyConfig, QuboModel};
use crate::rational::Rational;
use crate::tsp::{apply_reversals, build_k_reversal_qubo, decompose, random_cuts, reversal_delta, tour_length, SegmentDecomposition, Tour, TspInstance};

/// QAP, optionally carrying a spectral initial solution (M2sP reductions).
#[derive(Clone, Debug)]
pub struct QapProblem {
    pub instance: QapInstance,
    spectral: Option<Permutation>,
}

impl QapProblem {
    pub fn new(instance: QapInstance) -> Self {
        Self {
            instance,
            spectral: None,
        }
    }

    /// Minimum 2-sum as QAP, with the spectral ordering available as initial solution.
    pub fn from_m2sp(g: &WeightedGraph) -> Result<Self> {
        Ok(Self {
            instance: m2sp_to_qap(g)?,
            spectral: Some(spectral_ordering(g)),
        })
    }
}

impl Problem for QapProblem {
    type Solution = Permutation;

    fn objective(&self, s: &Permutation) -> Result<Rational> {
        qap_objective(&self.instance, s)
    }

    fn random_solution(&self, rng: &mut ChaCha8Rng) -> Permutation {
        Permutation::random(rng, self.instance.n())
    }

    fn spectral_solution(&self) -> Option<Permutation> {
        self.spectral.clone()
    }
}

impl ExchangeMoves for QapProblem {
    type Plan = ExchangePlan;

    fn select_plan(&self, current: &Permutation, m: usize, policy: SelectionPolicy, rng: &mut ChaCha8Rng) -> Result<ExchangePlan> {
        match policy {
            SelectionPolicy::Greedy => greedy_select_pairs(&self.instance, current, m),
            SelectionPolicy::Random => {
                let n = self.instance.n();
                let mut f: Vec<usize> = (0..n).collect();
                f.shuffle(rng);
                let pairs = f.chunks_exact(2).take(m.min(n / 2)).map(|c| (c[0].min(c[1]), c[0].max(c[1]))).collect();
                ExchangePlan::new(current.clone(), pairs)
            }
        }
    }

    fn build_exchange_qubo(&self, _current: &Permutation, plan: &ExchangePlan) -> Result<QuboModel> {
        build_uqubols_qubo(&self.instance, plan)
    }

    fn decode_exchange(&self, _current: &Permutation, plan: &ExchangePlan, y: &BitString) -> Result<Permutation> {
        decode_uqubols(plan, y)
    }
}

impl PenaltyMoves for QapProblem {
    type Blocks = SubsetFamily;

    fn universe(&self) -> usize {
        self.instance.n()
    }

    fn select_blocks(
        &self,
        current: &Permutation,
        k: usize,
        m: usize,
        policy: SelectionPolicy,
        rng: &mut ChaCha8Rng,
    ) -> Result<SubsetFamily> {
        match policy {
            SelectionPolicy::Greedy => greedy_subsets(&self.instance, current, k, m),
            SelectionPolicy::Random => random_subsets(rng, self.instance.n(), k, m),
        }
    }

    fn build_penalty_qubo(&self, current: &Permutation, blocks: &SubsetFamily, penalties: &PenaltyConfig) -> Result<QuboModel> {
        build_cqubols_qubo(&self.instance, blocks, current, penalties)
    }

    fn encode_current(&self, blocks: &SubsetFamily) -> BitString {
        encode_cqubols(blocks)
    }

    fn decode_penalty(&self, current: &Permutation, blocks: &SubsetFamily, x: &BitString) -> Result<Option<Permutation>> {
        decode_cqubols(blocks, current, x)
    }
}

impl NeighborMoves for QapProblem {
    type Move = (usize, usize);

    fn random_move(&self, _current: &Permutation, rng: &mut ChaCha8Rng) -> Option<(usize, usize)> {
        let n = self.instance.n();
        if n < 2 {
            return None;
        }
        let a = rng.gen_range(0..n);
        let b = (a + rng.gen_range(1..n)) % n;
        Some((a, b))
    }

    fn move_delta(&self, current: &Permutation, (a, b): (usize, usize)) -> Result<Rational> {
        pair_exchange_delta(&self.instance, current, a, b)
    }

    fn apply_move(&self, current: &mut Permutation, (a, b): (usize, usize)) {
        current.swap(a, b);
    }
}

/// Symmetric TSP; U-QUBO-LS cuts `clamp(m, 2, n)` random tour edges per iteration.
#[derive(Clone, Debug)]
pub struct TspProblem {
    pub instance: TspInstance,
}

impl TspProblem {
    pub fn new(instance: TspInstance) -> Self {
        Self { instance }
    }
}

impl Problem for TspProblem {
    type Solution = Tour;

    fn objective(&self, s: &Tour) -> Result<Rational> {
        tour_length(&self.instance, s)
    }

    fn random_solution(&self, rng: &mut ChaCha8Rng) -> Tour {
        Tour::random(rng, self.instance.n())
    }
}

impl ExchangeMoves for TspProblem {
    type Plan = SegmentDecomposition;

    fn select_plan(&self, current: &Tour, m: usize, _policy: SelectionPolicy, rng: &mut ChaCha8Rng) -> Result<SegmentDecomposition> {
        let n = self.instance.n();
        if n < 2 {
            return Err(Error::Config(format!("k-reversal moves need at least 2 cities, got {n}")));
        }
        decompose(current, &random_cuts(rng, n, m.clamp(2, n)))
    }

    fn build_exchange_qubo(&self, _current: &Tour, plan: &SegmentDecomposition) -> Result<QuboModel> {
        Ok(build_k_reversal_qubo(&self.instance, plan)?.model)
    }

    fn decode_exchange(&self, _current: &Tour, plan: &SegmentDecomposition, y: &BitString) -> Result<Tour> {
        apply_reversals(plan, y)
    }
}

impl NeighborMoves for TspProblem {
    /// Reverse `order[i..=j]`.
    type Move = (usize, usize);

    fn random_move(&self, _current: &Tour, rng: &mut ChaCha8Rng) -> Option<(usize, usize)> {
        let n = self.instance.n();
        if n < 4 {
            return None;
        }
        let a = rng.gen_range(0..n);
        let b = (a + rng.gen_range(1..n)) % n;
        Some((a.min(b), a.max(b)))
    }

    fn move_delta(&self, current: &Tour, (i, j): (usize, usize)) -> Result<Rational> {
        Ok(reversal_delta(&self.instance, current, i, j))
    }

    fn apply_move(&self, current: &mut Tour, (i, j): (usize, usize)) {
        current.reverse_range(i, j);
    }
}

/// Balanced K-way partitioning with pairwise swaps.
#[derive(Clone, Debug)]
pub struct GpProblem {
    pub graph: WeightedGraph,
    pub parts: usize,
}

impl GpProblem {
    pub fn new(graph: WeightedGraph, parts: usize) -> Result<Self> {
        if parts == 0 || !graph.n().is_multiple_of(parts) {
            return Err(Error::Config(format!(
                "{} vertices cannot be split evenly into {parts} parts",
                graph.n()
            )));
        }
        Ok(Self { graph, parts })
    }
}

impl Problem for GpProblem {
    type Solution = Partition;

    fn objective(&self, s: &Partition) -> Result<Rational> {
        cut_value(&self.graph, s)
    }

    fn random_solution(&self, rng: &mut ChaCha8Rng) -> Partition {
        Partition::random_balanced(rng, self.graph.n(), self.parts).expect("divisibility checked at construction")
    }
}

impl ExchangeMoves for GpProblem {
    type Plan = SwapMatching;

    fn select_plan(&self, current: &Partition, m: usize, policy: SelectionPolicy, rng: &mut ChaCha8Rng) -> Result<SwapMatching> {
        match policy {
            SelectionPolicy::Greedy => select_swap_matching(&self.graph, current, m),
            SelectionPolicy::Random => random_swap_matching(rng, current, m),
        }
    }

    fn build_exchange_qubo(&self, current: &Partition, plan: &SwapMatching) -> Result<QuboModel> {
        build_swap_qubo(&self.graph, current, plan)
    }

    fn decode_exchange(&self, current: &Partition, plan: &SwapMatching, y: &BitString) -> Result<Partition> {
        apply_swaps(current, plan, y)
    }
}

impl NeighborMoves for GpProblem {
    type Move = (usize, usize);

    fn random_move(&self, current: &Partition, rng: &mut ChaCha8Rng) -> Option<(usize, usize)> {
        let n = self.graph.n();
        if self.parts < 2 || n < 2 {
            return None;
        }
        let u = rng.gen_range(0..n);
        for _ in 0..32 {
            let v = rng.gen_range(0..n);
            if current.part(v) != current.part(u) {
                return Some((u, v));
            }
        }
        let start = rng.gen_range(0..n);
        (0..n)
            .map(|t| (start + t) % n)
            .find(|&v| current.part(v) != current.part(u))
            .map(|v| (u, v))
    }

    fn move_delta(&self, current: &Partition, (u, v): (usize, usize)) -> Result<Rational> {
        Ok(-kl_gain(&self.graph, current, u, v)?)
    }

    fn apply_move(&self, current: &mut Partition, (u, v): (usize, usize)) {
        current.swap(u, v);
    }
}
