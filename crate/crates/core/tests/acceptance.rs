//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the report is always printed. Pass
//! criterion numbers as arguments to run a subset, e.g.
//! `cargo test -p qubols --test acceptance -- 9 10`.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use qubols::annealer::{brute_force_solve, solve, AnnealerConfig};
use qubols::driver::{
    initial_solution, run_method, run_qls, run_sa_baseline, run_unconstrained_method, run_uqubols, GpProblem,
    InitPolicy, Method, QapProblem, RunConfig, RunTrace, TspProblem,
};
use qubols::generate::{random_connected_graph, random_graph, random_qap, random_qubo, random_tsp};
use qubols::graph::WeightedGraph;
use qubols::m2sp::{m2sp_to_qap, two_sum_objective};
use qubols::partition::{
    apply_swaps, build_swap_qubo, coupled_swap_instance, kl_gain, random_swap_matching, select_swap_matching,
    Partition, SwapMatching,
};
use qubols::qap::{
    build_cqubols_qubo, build_uqubols_qubo, decode_cqubols, decode_uqubols, full_qubo, greedy_select_pairs,
    qap_objective, Permutation, QapInstance, SubsetFamily,
};
use qubols::qubo::{default_penalty, BitString, PenaltyConfig, QuboModel};
use qubols::rational::{int, to_f64, Rational};
use qubols::tsp::{apply_reversals, build_k_reversal_qubo, decompose, random_cuts, Tour, TspInstance};

/// Wall-time limits, as stated per criterion.
const LIMIT_EXACTNESS: Duration = Duration::from_secs(10);
const LIMIT_ANNEALER: Duration = Duration::from_secs(60);
const LIMIT_REPLICATION: Duration = Duration::from_secs(600);

/// Minimum tallies.
const PENALTY_INSTANCES: usize = 100;
const ANNEALER_MATCHES_REQUIRED: usize = 95;
const REPLICATION_WINS_REQUIRED: usize = 6;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn timed(limit: Duration, start: Instant, pass: bool, detail: String) -> Outcome {
    let t = start.elapsed();
    outcome(pass && t < limit, format!("{detail}; {:.2}s (limit {}s)", t.as_secs_f64(), limit.as_secs()))
}

// Independent oracles.

fn oracle_qap(inst: &QapInstance, pi: &[usize]) -> Rational {
    let n = inst.n();
    let mut s = int(0);
    for i in 0..n {
        for j in 0..n {
            s += inst.flow(i, j) * inst.dist(pi[i], pi[j]);
        }
    }
    s
}

fn oracle_tour(inst: &TspInstance, order: &[usize]) -> Rational {
    let n = order.len();
    (0..n).map(|t| inst.dist(order[t], order[(t + 1) % n])).sum()
}

fn oracle_cut(g: &WeightedGraph, parts: &[usize]) -> Rational {
    g.edges()
        .iter()
        .filter(|(u, v, _)| parts[*u] != parts[*v])
        .map(|(_, _, w)| *w)
        .sum()
}

fn oracle_two_sum(g: &WeightedGraph, pos: &[usize]) -> Rational {
    g.edges()
        .iter()
        .map(|&(u, v, w)| {
            let d = pos[u] as i64 - pos[v] as i64;
            w * int(d * d)
        })
        .sum()
}

/// Every permutation of `0..n` (Heap's algorithm).
fn all_permutations(n: usize) -> Vec<Vec<usize>> {
    let mut a: Vec<usize> = (0..n).collect();
    let mut c = vec![0; n];
    let mut out = vec![a.clone()];
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                a.swap(0, i);
            } else {
                a.swap(c[i], i);
            }
            out.push(a.clone());
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    out
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut checked = 0usize;
    let mut mismatches = 0usize;
    for _ in 0..50 {
        let n = rng.gen_range(4..=10);
        let m = rng.gen_range(1..=5.min(n / 2));
        let inst = random_qap(&mut rng, n, 50);
        let pi = Permutation::random(&mut rng, n);
        let plan = greedy_select_pairs(&inst, &pi, m).unwrap();
        let model = build_uqubols_qubo(&inst, &plan).unwrap();
        for v in 0..(1u64 << plan.len()) {
            let y = BitString::from_index(v, plan.len());
            let decoded = decode_uqubols(&plan, &y).unwrap();
            checked += 1;
            if model.evaluate(&y).unwrap() != oracle_qap(&inst, decoded.as_slice()) {
                mismatches += 1;
            }
        }
    }
    timed(
        LIMIT_EXACTNESS,
        start,
        mismatches == 0,
        format!("{checked} assignments over 50 instances, {mismatches} mismatches"),
    )
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let mut checked = 0usize;
    let mut mismatches = 0usize;
    for _ in 0..50 {
        let n = rng.gen_range(4..=14);
        let k = rng.gen_range(2..=6.min(n));
        let inst = random_tsp(&mut rng, n, 100);
        let tour = Tour::random(&mut rng, n);
        let d = decompose(&tour, &random_cuts(&mut rng, n, k)).unwrap();
        let kr = build_k_reversal_qubo(&inst, &d).unwrap();
        for v in 0..(1u64 << k) {
            let y = BitString::from_index(v, k);
            let t = apply_reversals(&d, &y).unwrap();
            checked += 1;
            let valid = Tour::new(t.as_slice().to_vec()).is_ok();
            if !valid || kr.model.evaluate(&y).unwrap() + kr.internal_weight != oracle_tour(&inst, t.as_slice()) {
                mismatches += 1;
            }
        }
    }
    timed(
        LIMIT_EXACTNESS,
        start,
        mismatches == 0,
        format!("{checked} assignments over 50 instances, {mismatches} mismatches"),
    )
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut checked = 0usize;
    let mut mismatches = 0usize;
    for t in 0..50 {
        let k = if t % 2 == 0 { 2 } else { 3 };
        let n = k * rng.gen_range(3..=6);
        let g = random_connected_graph(&mut rng, n, 0.3, 4);
        let p = Partition::random_balanced(&mut rng, n, k).unwrap();
        let m_max = rng.gen_range(1..=6);
        let matching = if t % 4 < 2 {
            random_swap_matching(&mut rng, &p, m_max).unwrap()
        } else {
            select_swap_matching(&g, &p, m_max).unwrap()
        };
        let model = build_swap_qubo(&g, &p, &matching).unwrap();
        for v in 0..(1u64 << matching.len()) {
            let y = BitString::from_index(v, matching.len());
            let q = apply_swaps(&p, &matching, &y).unwrap();
            checked += 1;
            let balanced = q.sizes() == p.sizes();
            if !balanced || model.evaluate(&y).unwrap() != int(2) * oracle_cut(&g, q.as_slice()) {
                mismatches += 1;
            }
        }
    }
    timed(
        LIMIT_EXACTNESS,
        start,
        mismatches == 0,
        format!("{checked} assignments over 50 instances, {mismatches} mismatches"),
    )
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let perms = all_permutations(7);
    let mut mismatches = 0usize;
    for _ in 0..20 {
        let g = random_connected_graph(&mut rng, 7, 0.35, 5);
        let q = m2sp_to_qap(&g).unwrap();
        for p in &perms {
            let pi = Permutation::new(p.clone()).unwrap();
            let a = qap_objective(&q, &pi).unwrap();
            let b = two_sum_objective(&g, &pi).unwrap();
            if a != b || b != oracle_two_sum(&g, p) {
                mismatches += 1;
            }
        }
    }
    timed(
        LIMIT_EXACTNESS,
        start,
        mismatches == 0 && perms.len() == 5040,
        format!("{} orderings x 20 graphs, {mismatches} mismatches", perms.len()),
    )
}

/// Searches for an infeasible assignment of the full model with energy at most
/// `bound`. Rows are assigned one at a time; with non-negative flows and
/// distances the partial energy (objective among assigned rows plus penalties
/// that can only grow) is a valid lower bound.
fn infeasible_at_most(inst: &QapInstance, model: &QuboModel, lambda: Rational, bound: Rational) -> Option<BitString> {
    let n = inst.n();
    let mut rows: Vec<usize> = Vec::with_capacity(n);
    let mut cols = vec![0i64; n];
    fn go(
        inst: &QapInstance,
        model: &QuboModel,
        lambda: Rational,
        bound: Rational,
        rows: &mut Vec<usize>,
        cols: &mut Vec<i64>,
    ) -> Option<BitString> {
        let n = inst.n();
        let t = rows.len();
        if t == n {
            let mut x = BitString::zeros(n * n);
            for (i, &mask) in rows.iter().enumerate() {
                for k in 0..n {
                    if mask >> k & 1 == 1 {
                        x.set(i * n + k, true);
                    }
                }
            }
            let feasible = rows.iter().all(|m| m.count_ones() == 1) && cols.iter().all(|&c| c == 1);
            let e = model.evaluate(&x).unwrap();
            return (!feasible && e <= bound).then_some(x);
        }
        for mask in 0..(1usize << n) {
            for k in 0..n {
                cols[k] += (mask >> k & 1) as i64;
            }
            rows.push(mask);
            let mut lb = int(0);
            for (i, &mi) in rows.iter().enumerate() {
                let r = mi.count_ones() as i64 - 1;
                lb += lambda * int(r * r);
                for (j, &mj) in rows.iter().enumerate() {
                    for k in (0..n).filter(|k| mi >> k & 1 == 1) {
                        for l in (0..n).filter(|l| mj >> l & 1 == 1) {
                            lb += inst.flow(i, j) * inst.dist(k, l);
                        }
                    }
                }
            }
            for &c in cols.iter() {
                let over = (c - 1).max(0);
                lb += lambda * int(over * over);
            }
            if lb <= bound {
                if let Some(x) = go(inst, model, lambda, bound, rows, cols) {
                    return Some(x);
                }
            }
            rows.pop();
            for k in 0..n {
                cols[k] -= (mask >> k & 1) as i64;
            }
        }
        None
    }
    go(inst, model, lambda, bound, &mut rows, &mut cols)
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let results: Vec<(bool, bool)> = (0..PENALTY_INSTANCES)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(500 + t as u64);
            let n = 3 + t % 4;
            let inst = random_qap(&mut rng, n, 9);
            let objective_only = full_qubo(&inst, &PenaltyConfig::Uniform(int(1))).unwrap();
            // default_penalty of the objective part alone.
            let mut obj = qubols::QuboBuilder::new(n * n);
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        for l in 0..n {
                            obj.add_quadratic(i * n + k, j * n + l, inst.flow(i, j) * inst.dist(k, l));
                        }
                    }
                }
            }
            let lambda = default_penalty(&obj.build());
            let model = full_qubo(&inst, &PenaltyConfig::Uniform(lambda)).unwrap();
            assert_eq!(model.n(), objective_only.n());
            assert_eq!(model, full_qubo(&inst, &PenaltyConfig::default()).unwrap());
            let best_perm = all_permutations(n)
                .iter()
                .map(|p| oracle_qap(&inst, p))
                .min()
                .unwrap();
            let full_ok = infeasible_at_most(&inst, &model, lambda, best_perm).is_none();
            if n * n <= 16 {
                let bf = brute_force_solve(&model).unwrap();
                assert_eq!(bf.best_energy, best_perm);
            }

            // Sub-QUBO over one pair block with its own default penalty.
            let pi = Permutation::random(&mut rng, n);
            let a = rng.gen_range(0..n);
            let b = (a + rng.gen_range(1..n)) % n;
            let family = SubsetFamily::new(n, vec![vec![a, b]]).unwrap();
            let sub = build_cqubols_qubo(&inst, &family, &pi, &PenaltyConfig::default()).unwrap();
            let mut sub_ok = true;
            let min = brute_force_solve(&sub).unwrap().best_energy;
            for v in 0..(1u64 << sub.n()) {
                let x = BitString::from_index(v, sub.n());
                if sub.evaluate(&x).unwrap() == min && decode_cqubols(&family, &pi, &x).unwrap().is_none() {
                    sub_ok = false;
                }
            }
            (full_ok, sub_ok)
        })
        .collect();
    let full = results.iter().filter(|r| r.0).count();
    let sub = results.iter().filter(|r| r.1).count();
    let t = start.elapsed();
    outcome(
        full == PENALTY_INSTANCES && sub == PENALTY_INSTANCES,
        format!(
            "full model feasible minimizers {full}/{PENALTY_INSTANCES}, pair sub-model {sub}/{PENALTY_INSTANCES}; {:.2}s",
            t.as_secs_f64()
        ),
    )
}

fn criterion_6() -> Outcome {
    let (g, p) = coupled_swap_instance();
    let base = oracle_cut(&g, p.as_slice());
    let swap_cut = |pairs: &[(usize, usize)]| {
        let mut parts = p.as_slice().to_vec();
        for &(u, v) in pairs {
            parts.swap(u, v);
        }
        oracle_cut(&g, &parts)
    };
    let single_improves = (0..g.n())
        .flat_map(|u| (u + 1..g.n()).map(move |v| (u, v)))
        .filter(|&(u, v)| p.part(u) != p.part(v))
        .any(|(u, v)| swap_cut(&[(u, v)]) < base);
    let g14 = kl_gain(&g, &p, 1, 4).unwrap();
    let g37 = kl_gain(&g, &p, 3, 7).unwrap();
    let joint = swap_cut(&[(1, 4), (3, 7)]);
    let matching = SwapMatching::new(&p, vec![(1, 4), (3, 7)]).unwrap();
    let model = build_swap_qubo(&g, &p, &matching).unwrap();
    let minimizer = brute_force_solve(&model).unwrap().best;
    let selected = select_swap_matching(&g, &p, 2).unwrap();
    let pass = !single_improves
        && g14 <= int(0)
        && g37 <= int(0)
        && base - joint >= int(1)
        && minimizer == BitString::ones(2)
        && selected.pairs() == [(1, 4), (3, 7)];
    outcome(
        pass,
        format!(
            "gains g(1,4)={g14} g(3,7)={g37}, any single swap improves: {single_improves}, cut {base} -> {joint}, minimizer {minimizer}, greedy matching {:?}",
            selected.pairs()
        ),
    )
}

fn check_trace<S>(trace: &RunTrace<S>, seeded: bool) -> usize {
    let mut violations = 0;
    let mut prev = trace.initial_objective;
    for r in &trace.records {
        if r.objective > prev || (r.accepted && trace.method != Method::Sa && r.objective >= prev) {
            violations += 1;
        }
        if seeded {
            if let (Some(c), Some(i)) = (r.candidate_energy, r.incumbent_energy) {
                if c > i {
                    violations += 1;
                }
            }
        }
        prev = r.objective;
    }
    if trace.final_objective != prev {
        violations += 1;
    }
    violations
}

fn criterion_7() -> Outcome {
    let start = Instant::now();
    let counts: Vec<(usize, usize)> = (0..200u64)
        .into_par_iter()
        .map(|run| {
            let mut rng = ChaCha8Rng::seed_from_u64(700 + run);
            let seeded = (run / 4) % 2 == 0;
            let mut cfg = RunConfig {
                max_iters: 8,
                m: 4,
                k: 3,
                seed: run,
                seed_annealer_with_current: seeded,
                annealer: AnnealerConfig {
                    mc_steps: 2_000,
                    num_replicas: 4,
                    ..AnnealerConfig::default()
                },
                ..RunConfig::default()
            };
            let method = Method::ALL[(run / 8) as usize % 4];
            cfg.method = method;
            if method == Method::Sa {
                cfg.max_iters = 500;
            }
            match run % 4 {
                0 | 1 => {
                    let problem = if run % 4 == 0 {
                        QapProblem::new(random_qap(&mut rng, 10, 20))
                    } else {
                        QapProblem::from_m2sp(&random_connected_graph(&mut rng, 10, 0.3, 3)).unwrap()
                    };
                    let policy = if run % 4 == 1 { InitPolicy::Spectral } else { InitPolicy::Random };
                    let init = initial_solution(&problem, policy, run).unwrap();
                    let trace = run_method(&problem, &cfg, init).unwrap();
                    (check_trace(&trace, seeded), 1)
                }
                2 => {
                    let problem = TspProblem::new(random_tsp(&mut rng, 14, 50));
                    cfg.method = if method == Method::Sa { Method::Sa } else { Method::Uqubols };
                    let init = initial_solution(&problem, InitPolicy::Random, run).unwrap();
                    let trace = run_unconstrained_method(&problem, &cfg, init).unwrap();
                    (check_trace(&trace, seeded), 1)
                }
                _ => {
                    let problem = GpProblem::new(random_graph(&mut rng, 12, 0.3), 3).unwrap();
                    cfg.method = if method == Method::Sa { Method::Sa } else { Method::Uqubols };
                    let init = initial_solution(&problem, InitPolicy::Random, run).unwrap();
                    let trace = run_unconstrained_method(&problem, &cfg, init).unwrap();
                    (check_trace(&trace, seeded), 1)
                }
            }
        })
        .collect();
    let violations: usize = counts.iter().map(|c| c.0).sum();
    let runs: usize = counts.iter().map(|c| c.1).sum();
    outcome(
        violations == 0 && runs == 200,
        format!("{runs} runs, {violations} violations; {:.2}s", start.elapsed().as_secs_f64()),
    )
}

fn criterion_8() -> Outcome {
    let start = Instant::now();
    let matches = (0..100u64)
        .into_par_iter()
        .filter(|&t| {
            let mut rng = ChaCha8Rng::seed_from_u64(800 + t);
            let model = random_qubo(&mut rng, 12, 0.5);
            let oracle = (0..(1u64 << 12))
                .map(|v| model.evaluate(&BitString::from_index(v, 12)).unwrap())
                .min()
                .unwrap();
            let cfg = AnnealerConfig {
                mc_steps: 100_000,
                seed: t,
                ..AnnealerConfig::default()
            };
            let r = solve(&model, &cfg).unwrap();
            r.best_energy == oracle && brute_force_solve(&model).unwrap().best_energy == oracle
        })
        .count();
    timed(
        LIMIT_ANNEALER,
        start,
        matches >= ANNEALER_MATCHES_REQUIRED,
        format!("{matches}/100 optima matched (need {ANNEALER_MATCHES_REQUIRED})"),
    )
}

fn replication_cfg(method: Method, mc_steps: u64, sa_iters: usize, seed: u64) -> RunConfig {
    RunConfig {
        method,
        max_iters: if method == Method::Sa { sa_iters } else { 30 },
        seed,
        annealer: AnnealerConfig {
            mc_steps,
            ..AnnealerConfig::default()
        },
        ..RunConfig::default()
    }
}

/// Final objectives of U-QUBO-LS, QLS and SA from one shared initial solution.
fn compare_family(problem: &QapProblem, init: InitPolicy, sa_iters: usize, seed: u64) -> [Rational; 3] {
    let start = initial_solution(problem, init, seed).unwrap();
    let u = run_uqubols(problem, &replication_cfg(Method::Uqubols, 10_000, sa_iters, seed), start.clone()).unwrap();
    let q = run_qls(problem, &replication_cfg(Method::Qls, 10_000, sa_iters, seed), start.clone()).unwrap();
    let s = run_sa_baseline(problem, &replication_cfg(Method::Sa, 10_000, sa_iters, seed), start).unwrap();
    [u.final_objective, q.final_objective, s.final_objective]
}

fn replication_qap(seed: u64) -> QapInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_qap(&mut rng, 50, 99)
}

fn replication_graph(seed: u64) -> WeightedGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = 120;
    let p = 0.02 + 0.01 * (seed % 4) as f64;
    random_connected_graph(&mut rng, n, p, 1)
}

fn criterion_9() -> Outcome {
    let start = Instant::now();
    let qap: Vec<[Rational; 3]> = (0..10u64)
        .into_par_iter()
        .map(|s| compare_family(&QapProblem::new(replication_qap(900 + s)), InitPolicy::Random, 10_000, s))
        .collect();
    let m2sp: Vec<[Rational; 3]> = (0..10u64)
        .into_par_iter()
        .map(|s| {
            let p = QapProblem::from_m2sp(&replication_graph(950 + s)).unwrap();
            compare_family(&p, InitPolicy::Spectral, 15_000, s)
        })
        .collect();
    let wins = |rows: &[[Rational; 3]]| rows.iter().filter(|r| r[0] <= r[1] && r[0] <= r[2]).count();
    let (wq, wm) = (wins(&qap), wins(&m2sp));
    let mean_ratio = |rows: &[[Rational; 3]], idx: usize| {
        rows.iter().map(|r| to_f64(&r[idx]) / to_f64(&r[0])).sum::<f64>() / rows.len() as f64
    };
    timed(
        LIMIT_REPLICATION,
        start,
        wq >= REPLICATION_WINS_REQUIRED && wm >= REPLICATION_WINS_REQUIRED,
        format!(
            "U-QUBO-LS best on {wq}/10 QAP and {wm}/10 M2sP (need {REPLICATION_WINS_REQUIRED}); mean QLS/U {:.4} {:.4}, SA/U {:.4} {:.4}",
            mean_ratio(&qap, 1),
            mean_ratio(&m2sp, 1),
            mean_ratio(&qap, 2),
            mean_ratio(&m2sp, 2)
        ),
    )
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

fn criterion_10() -> Outcome {
    let start = Instant::now();
    let finals = |method: Method, mc_steps: u64| -> Vec<f64> {
        (0..10u64)
            .into_par_iter()
            .map(|s| {
                let problem = QapProblem::new(replication_qap(900 + s));
                let init = initial_solution(&problem, InitPolicy::Random, s).unwrap();
                let cfg = RunConfig {
                    k: 8,
                    m: 1,
                    seed_annealer_with_current: true,
                    ..replication_cfg(method, mc_steps, 0, s)
                };
                to_f64(&run_method(&problem, &cfg, init).unwrap().final_objective)
            })
            .collect()
    };
    let c_low = median(finals(Method::Cqubols, 1_000));
    let c_high = median(finals(Method::Cqubols, 100_000));
    let u_low = median(finals(Method::Uqubols, 1_000));
    let u_high = median(finals(Method::Uqubols, 100_000));
    let (rc, ru) = (c_low / c_high, u_low / u_high);
    let pass = c_low > c_high && ru < rc;
    let t = start.elapsed();
    outcome(
        pass,
        format!(
            "median ratio 1e3/1e5 steps: C-QUBO-LS {rc:.4} ({c_low:.0} vs {c_high:.0}), U-QUBO-LS {ru:.4} ({u_low:.0} vs {u_high:.0}); {:.2}s",
            t.as_secs_f64()
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [(usize, &str, fn() -> Outcome); 10] = [
        (1, "formulation exactness (QAP)", criterion_1),
        (2, "formulation exactness (TSP)", criterion_2),
        (3, "formulation exactness (GP)", criterion_3),
        (4, "reduction exactness (M2sP)", criterion_4),
        (5, "penalty soundness", criterion_5),
        (6, "coupled-swap phenomenon", criterion_6),
        (7, "monotonic seeded runs", criterion_7),
        (8, "annealer quality", criterion_8),
        (9, "directional replication", criterion_9),
        (10, "budget sensitivity", criterion_10),
    ];
    let selected: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (id, name, run) in criteria {
        if !selected.is_empty() && !selected.contains(&id) {
            continue;
        }
        let o = run();
        println!("criterion {id:>2} {name}: {} ({})", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.pass);
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
