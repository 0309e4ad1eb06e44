//! Seeded random instance generators.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::graph::WeightedGraph;
use crate::qap::QapInstance;
use crate::qubo::{QuboBuilder, QuboModel};
use crate::rational::int;
use crate::tsp::TspInstance;

/// QUBO with integer coefficients in `[-10, 10]`; each pair present with probability `density`.
pub fn random_qubo<R: Rng>(rng: &mut R, n: usize, density: f64) -> QuboModel {
    let mut b = QuboBuilder::new(n);
    for i in 0..n {
        b.add_linear(i, int(rng.gen_range(-10..=10)));
        for j in i + 1..n {
            if rng.gen_bool(density) {
                b.add_quadratic(i, j, int(rng.gen_range(-10..=10)));
            }
        }
    }
    b.add_offset(int(rng.gen_range(-5..=5)));
    b.build()
}

/// Dense QAP with flow and distance entries uniform in `[0, max]` and zero diagonals.
pub fn random_qap<R: Rng>(rng: &mut R, n: usize, max: i64) -> QapInstance {
    let mut flow = vec![0i64; n * n];
    let mut dist = vec![0i64; n * n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                flow[i * n + j] = rng.gen_range(0..=max);
                dist[i * n + j] = rng.gen_range(0..=max);
            }
        }
    }
    QapInstance::from_integers(n, &flow, &dist).expect("square matrices")
}

/// Erdos-Renyi graph with unit weights.
pub fn random_graph<R: Rng>(rng: &mut R, n: usize, p: f64) -> WeightedGraph {
    let edges: Vec<(usize, usize)> = (0..n)
        .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
        .filter(|_| rng.gen_bool(p))
        .collect();
    WeightedGraph::unweighted(n, edges).expect("valid edges")
}

/// Random spanning tree plus Erdos-Renyi extra edges, integer weights in `[1, max_w]`.
pub fn random_connected_graph<R: Rng>(rng: &mut R, n: usize, p: f64, max_w: i64) -> WeightedGraph {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut edges = std::collections::BTreeSet::new();
    for k in 1..n {
        let (a, b) = (order[rng.gen_range(0..k)], order[k]);
        edges.insert((a.min(b), a.max(b)));
    }
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(p) {
                edges.insert((u, v));
            }
        }
    }
    let weighted: Vec<_> = edges
        .into_iter()
        .map(|(u, v)| (u, v, int(rng.gen_range(1..=max_w))))
        .collect();
    WeightedGraph::new(n, weighted).expect("valid edges")
}

/// Symmetric TSP with integer distances in `[1, max]`.
pub fn random_tsp<R: Rng>(rng: &mut R, n: usize, max: i64) -> TspInstance {
    let mut w = vec![0i64; n * n];
    for u in 0..n {
        for v in u + 1..n {
            let d = rng.gen_range(1..=max);
            w[u * n + v] = d;
            w[v * n + u] = d;
        }
    }
    TspInstance::from_integers(n, &w).expect("symmetric matrix")
}
