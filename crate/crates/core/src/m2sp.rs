//! Minimum 2-sum: `sigma_2(G, pi) = sum_{uv in E} w_uv (pi(u) - pi(v))^2`.
//!
//! An ordering is a [`Permutation`] mapping each vertex to its 0-based position.
//! The QAP reduction uses 1-based positions in `d_kl = k l`, which keeps the
//! objective identical to `sigma_2` (position 0 would annihilate terms).

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::qap::{Permutation, QapInstance};
use crate::rational::{int, to_f64, Rational};

/// Vertex positions; an alias kept for readability at call sites.
pub type Ordering = Permutation;

pub fn two_sum_objective(g: &WeightedGraph, pi: &Ordering) -> Result<Rational> {
    if pi.len() != g.n() {
        return Err(Error::Dimension {
            expected: g.n(),
            got: pi.len(),
        });
    }
    let mut total = int(0);
    for &(u, v, w) in g.edges() {
        let d = pi.get(u) as i64 - pi.get(v) as i64;
        total += w * int(d * d);
    }
    Ok(total)
}

/// QAP with flow = Laplacian of `g` and `d_kl = (k + 1)(l + 1)`.
pub fn m2sp_to_qap(g: &WeightedGraph) -> Result<QapInstance> {
    let n = g.n();
    let dist = (0..n)
        .flat_map(|k| (0..n).map(move |l| int(((k + 1) * (l + 1)) as i64)))
        .collect();
    QapInstance::new(n, g.laplacian(), dist)
}

/// Spectral ordering from the Fiedler direction of the Laplacian.
///
/// When the second-smallest eigenvalue is repeated, the direction is the
/// projection of the centered index vector onto its eigenspace; this makes the
/// result independent of the eigensolver's basis choice. Ties in the ordering
/// key are broken by vertex index.
pub fn spectral_ordering(g: &WeightedGraph) -> Ordering {
    let n = g.n();
    if n <= 1 {
        return Permutation::identity(n);
    }
    let lap = g.laplacian();
    let m = DMatrix::from_fn(n, n, |i, j| to_f64(&lap[i * n + j]));
    let eig = SymmetricEigen::new(m);
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]).then(a.cmp(&b)));
    let scale = eig.eigenvalues.iter().fold(1.0f64, |acc, v| acc.max(v.abs()));
    let tol = 1e-9 * scale;
    let lambda2 = eig.eigenvalues[idx[1]];
    let space: Vec<usize> = idx[1..]
        .iter()
        .copied()
        .filter(|&c| (eig.eigenvalues[c] - lambda2).abs() <= tol)
        .collect();

    let center = (n as f64 - 1.0) / 2.0;
    let target: Vec<f64> = (0..n).map(|i| i as f64 - center).collect();
    let mut key = vec![0.0f64; n];
    for &c in &space {
        let col = eig.eigenvectors.column(c);
        let coef: f64 = col.iter().zip(&target).map(|(a, b)| a * b).sum();
        for (k, v) in key.iter_mut().zip(col.iter()) {
            *k += coef * v;
        }
    }
    if key.iter().all(|v| v.abs() <= 1e-9) {
        let col = eig.eigenvectors.column(idx[1]);
        let sign = col.iter().find(|v| v.abs() > 1e-9).map_or(1.0, |v| v.signum());
        key = col.iter().map(|v| v * sign).collect();
    }
    // Components equal up to rounding noise tie, so the index rule decides.
    let quantum = 1e-9 * key.iter().fold(0.0f64, |acc, v| acc.max(v.abs())).max(1e-300);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        let (ka, kb) = (key[a], key[b]);
        if (ka - kb).abs() <= quantum {
            a.cmp(&b)
        } else {
            ka.total_cmp(&kb)
        }
    });
    let mut image = vec![0; n];
    for (pos, &v) in order.iter().enumerate() {
        image[v] = pos;
    }
    Permutation::new(image).expect("ranks form a bijection")
}

/// Reverses positions: `pi(v) -> n - 1 - pi(v)`.
pub fn reversed(pi: &Ordering) -> Ordering {
    let n = pi.len();
    Permutation::new((0..n).map(|v| n - 1 - pi.get(v)).collect()).expect("bijection")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{random_connected_graph, random_graph};
    use crate::graph::families;
    use crate::qap::qap_objective;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn objective_examples() {
        let p3 = families::path(3);
        assert_eq!(two_sum_objective(&p3, &Permutation::identity(3)).unwrap(), int(2));
        let empty = WeightedGraph::unweighted(4, Vec::<(usize, usize)>::new()).unwrap();
        assert_eq!(two_sum_objective(&empty, &Permutation::identity(4)).unwrap(), int(0));
        assert!(two_sum_objective(&p3, &Permutation::identity(2)).is_err());
    }

    #[test]
    fn objective_equals_laplacian_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let g = random_connected_graph(&mut rng, 6, 0.4, 5);
            let pi = Permutation::random(&mut rng, 6);
            let lap = g.laplacian();
            let mut form = int(0);
            for i in 0..6 {
                for j in 0..6 {
                    form += lap[i * 6 + j] * int(pi.get(i) as i64) * int(pi.get(j) as i64);
                }
            }
            assert_eq!(two_sum_objective(&g, &pi).unwrap(), form);
            assert_eq!(two_sum_objective(&g, &reversed(&pi)).unwrap(), form);
        }
    }

    #[test]
    fn reduction_single_edge() {
        let g = WeightedGraph::unweighted(2, [(0, 1)]).unwrap();
        let q = m2sp_to_qap(&g).unwrap();
        assert_eq!(q.flow(0, 1), int(-1));
        assert_eq!(q.dist(1, 1), int(4));
        for pi in [Permutation::identity(2), Permutation::new(vec![1, 0]).unwrap()] {
            assert_eq!(qap_objective(&q, &pi).unwrap(), int(1));
        }
    }

    #[test]
    fn reduction_sampled_large() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let g = random_graph(&mut rng, 30, 0.2);
        let q = m2sp_to_qap(&g).unwrap();
        for _ in 0..50 {
            let pi = Permutation::random(&mut rng, 30);
            assert_eq!(qap_objective(&q, &pi).unwrap(), two_sum_objective(&g, &pi).unwrap());
        }
    }

    #[test]
    fn spectral_path_and_complete() {
        let p5 = families::path(5);
        let s = spectral_ordering(&p5);
        assert!(s == Permutation::identity(5) || s == reversed(&Permutation::identity(5)));
        assert_eq!(spectral_ordering(&families::complete(4)), Permutation::identity(4));
        assert_eq!(spectral_ordering(&families::path(0)).len(), 0);
        assert_eq!(spectral_ordering(&families::path(1)).len(), 1);
    }

    #[test]
    fn spectral_beats_median_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let g = random_connected_graph(&mut rng, 8, 0.3, 1);
            let spectral = two_sum_objective(&g, &spectral_ordering(&g)).unwrap();
            let mut samples: Vec<Rational> = (0..100)
                .map(|_| two_sum_objective(&g, &Permutation::random(&mut rng, 8)).unwrap())
                .collect();
            samples.sort();
            assert!(spectral <= samples[50]);
        }
    }

    #[test]
    fn spectral_disconnected_is_bijection() {
        let g = WeightedGraph::unweighted(6, [(0, 1), (2, 3), (4, 5)]).unwrap();
        let s = spectral_ordering(&g);
        assert_eq!(s.len(), 6);
    }
}
