//! Brute-force oracles, independent of the paths they verify.
//!
//! Everything here recomputes a quantity the slow, obvious way: pairwise
//! counting for AUROC, breadth-first shortest paths for walk transition laws,
//! characteristic-polynomial coefficients for small eigenproblems. The
//! acceptance suite and the `oracle` CLI subcommand both run these against
//! the production implementations.

use ndarray::Array2;
use rand::Rng;

use crate::graph::Graph;
use crate::rng::derive_rng;

/// Seeded Erdos–Renyi-style graph over `n` string-labeled nodes.
pub fn random_graph(seed: u64, n: usize, edge_prob: f64) -> Graph {
    let mut rng = derive_rng(seed, "oracle-graph", &[n as u64]);
    let ids: Vec<String> = (0..n).map(|i| format!("s{i:03}")).collect();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.gen::<f64>() < edge_prob {
                edges.push((ids[i].clone(), ids[j].clone()));
            }
        }
    }
    Graph::build(&edges, &ids).expect("generated edges are valid")
}

/// Seeded connected graph: random tree plus extra random edges.
pub fn random_connected_graph(seed: u64, n: usize, extra_edges: usize) -> Graph {
    let mut rng = derive_rng(seed, "oracle-connected", &[n as u64]);
    let ids: Vec<String> = (0..n).map(|i| format!("s{i:03}")).collect();
    let mut edges = Vec::new();
    for i in 1..n {
        let parent = rng.gen_range(0..i);
        edges.push((ids[parent].clone(), ids[i].clone()));
    }
    let mut added = 0;
    while added < extra_edges && n >= 2 {
        let i = rng.gen_range(0..n);
        let j = rng.gen_range(0..n);
        if i != j {
            edges.push((ids[i.min(j)].clone(), ids[i.max(j)].clone()));
            added += 1;
        }
    }
    Graph::build(&edges, &ids).expect("generated edges are valid")
}

/// AUROC by explicit pairwise counting: 1 per correctly ordered
/// positive-negative pair, 0.5 per tie. `None` when a class is missing.
pub fn auroc_pairwise(scores: &[f64], labels: &[u8]) -> Option<f64> {
    let mut wins = 0.0f64;
    let mut pairs = 0.0f64;
    for (i, (&s_pos, &l_pos)) in scores.iter().zip(labels).enumerate() {
        if l_pos != 1 {
            continue;
        }
        for (j, (&s_neg, &l_neg)) in scores.iter().zip(labels).enumerate() {
            if i == j || l_neg != 0 {
                continue;
            }
            pairs += 1.0;
            if s_pos > s_neg {
                wins += 1.0;
            } else if s_pos == s_neg {
                wins += 0.5;
            }
        }
    }
    if pairs == 0.0 {
        None
    } else {
        Some(wins / pairs)
    }
}

/// All-pairs shortest-path distances by BFS. Unreachable pairs get `usize::MAX`.
pub fn bfs_distances(g: &Graph) -> Vec<Vec<usize>> {
    let n = g.n_nodes();
    let mut dist = vec![vec![usize::MAX; n]; n];
    for start in 0..n {
        dist[start][start] = 0;
        let mut queue = std::collections::VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            for &w in g.neighbors(v) {
                if dist[start][w] == usize::MAX {
                    dist[start][w] = dist[start][v] + 1;
                    queue.push_back(w);
                }
            }
        }
    }
    dist
}

/// Biased second-order transition law, enumerated from first principles:
/// neighbors of `cur` weighted by 1/p, 1, or 1/q according to their
/// shortest-path distance from `prev`, then normalized.
pub fn walk_transition_law(g: &Graph, prev: usize, cur: usize, p: f64, q: f64) -> Vec<(usize, f64)> {
    let dist = bfs_distances(g);
    let mut weights: Vec<(usize, f64)> = g
        .neighbors(cur)
        .iter()
        .map(|&x| {
            let w = match dist[prev][x] {
                0 => 1.0 / p,
                1 => 1.0,
                _ => 1.0 / q,
            };
            (x, w)
        })
        .collect();
    let total: f64 = weights.iter().map(|(_, w)| w).sum();
    for (_, w) in &mut weights {
        *w /= total;
    }
    weights
}

/// Coefficients of the characteristic polynomial `det(xI - A)` by the
/// Faddeev–LeVerrier recurrence. Returned lowest degree first, so
/// `p(x) = coeffs[0] + coeffs[1] x + ... + coeffs[n] x^n` with `coeffs[n] = 1`.
pub fn characteristic_polynomial(a: &Array2<f64>) -> Vec<f64> {
    let n = a.nrows();
    assert_eq!(n, a.ncols());
    let mut coeffs = vec![0.0; n + 1];
    coeffs[n] = 1.0;
    let mut m = Array2::<f64>::zeros((n, n));
    for k in 1..=n {
        // M_k = A * M_{k-1} + c_{n-k+1} I
        let mut next = a.dot(&m);
        for i in 0..n {
            next[[i, i]] += coeffs[n - k + 1];
        }
        let trace: f64 = (0..n).map(|i| a.dot(&next)[[i, i]]).sum::<f64>();
        // c_{n-k} = -tr(A * M_k) / k
        coeffs[n - k] = -trace / k as f64;
        m = next;
    }
    coeffs
}

/// Evaluate a lowest-degree-first polynomial at `x`.
pub fn eval_polynomial(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

/// One verification result from the brute-force suite.
#[derive(Debug, Clone)]
pub struct OracleCheck {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// Run the full verification suite: eigen reconstruction and
/// characteristic-polynomial roots, biased-walk transition frequencies, and
/// the AUROC rank statistic, each against its brute-force counterpart.
pub fn run_all(seed: u64) -> Vec<OracleCheck> {
    let mut checks = Vec::new();
    checks.push(check_eigen_reconstruction(seed));
    checks.push(check_characteristic_polynomial(seed));
    checks.push(check_walk_distribution(seed));
    checks.push(check_auroc(seed));
    checks
}

fn check_eigen_reconstruction(seed: u64) -> OracleCheck {
    let mut worst = 0.0f64;
    for trial in 0..20 {
        let mut rng = derive_rng(seed, "oracle-eigen", &[trial]);
        let n = rng.gen_range(2..40);
        let mut m = Array2::zeros((n, n));
        for i in 0..n {
            for j in i..n {
                let x = rng.gen_range(-2.0..2.0);
                m[[i, j]] = x;
                m[[j, i]] = x;
            }
        }
        let eig = crate::spectral::eigh(&m).expect("symmetric by construction");
        let mut scaled = eig.eigenvectors.clone();
        for k in 0..n {
            for i in 0..n {
                scaled[[i, k]] *= eig.eigenvalues[k];
            }
        }
        let rec = scaled.dot(&eig.eigenvectors.t());
        let scale = m.iter().fold(1.0f64, |acc, x| acc.max(x.abs()));
        let err = (&rec - &m).iter().fold(0.0f64, |acc, x| acc.max(x.abs())) / scale;
        worst = worst.max(err);
    }
    OracleCheck {
        name: "eigen-reconstruction",
        passed: worst <= 1e-8,
        detail: format!("max relative reconstruction error {worst:.3e} (bound 1e-8)"),
    }
}

fn check_characteristic_polynomial(seed: u64) -> OracleCheck {
    let mut worst = 0.0f64;
    for trial in 0..50 {
        let g = random_graph(seed.wrapping_add(trial), 4, 0.6);
        let l = g.laplacian();
        let coeffs = characteristic_polynomial(&l);
        let eig = crate::spectral::eigh(&l).expect("laplacian is symmetric");
        // Every computed eigenvalue must be a root, and power sums must
        // match traces of L^k (Newton's identities pin the multiset).
        for &lambda in &eig.eigenvalues {
            worst = worst.max(eval_polynomial(&coeffs, lambda).abs());
        }
        let mut power = Array2::eye(4);
        for k in 1..=4usize {
            power = power.dot(&l);
            let trace: f64 = (0..4).map(|i| power[[i, i]]).sum();
            let sum_k: f64 = eig.eigenvalues.iter().map(|l| l.powi(k as i32)).sum();
            worst = worst.max((trace - sum_k).abs());
        }
    }
    OracleCheck {
        name: "characteristic-polynomial",
        passed: worst <= 1e-7,
        detail: format!("max residual {worst:.3e} (bound 1e-7)"),
    }
}

fn check_walk_distribution(seed: u64) -> OracleCheck {
    use crate::embed::node2vec::{walks, Node2VecParams};

    let ids: Vec<String> = (0..3).map(|i| i.to_string()).collect();
    let edges = vec![
        ("0".to_string(), "1".to_string()),
        ("1".to_string(), "2".to_string()),
    ];
    let g = Graph::build(&edges, &ids).expect("path graph");
    let params = Node2VecParams {
        p: 0.5,
        q: 2.0,
        walk_length: 40,
        walks_per_node: 300,
        seed,
        ..Node2VecParams::default()
    };
    let corpus = walks(&g, &params);
    let mut counts = std::collections::HashMap::new();
    let mut totals = std::collections::HashMap::new();
    for walk in &corpus.walks {
        for win in walk.windows(3) {
            *totals.entry((win[0], win[1])).or_insert(0u64) += 1;
            *counts.entry((win[0], win[1], win[2])).or_insert(0u64) += 1;
        }
    }
    let mut worst = 0.0f64;
    for ((prev, cur), &total) in &totals {
        if total < 1000 {
            continue;
        }
        for (next, want) in walk_transition_law(&g, *prev, *cur, params.p, params.q) {
            let got = *counts.get(&(*prev, *cur, next)).unwrap_or(&0) as f64 / total as f64;
            worst = worst.max((got - want).abs());
        }
    }
    OracleCheck {
        name: "walk-transition-law",
        passed: worst <= 0.02,
        detail: format!("max |empirical - enumerated| {worst:.4} (bound 0.02)"),
    }
}

fn check_auroc(seed: u64) -> OracleCheck {
    let mut rng = derive_rng(seed, "oracle-auroc", &[]);
    let mut all_equal = true;
    for _ in 0..200 {
        let n = rng.gen_range(2..120);
        let labels: Vec<u8> = (0..n).map(|_| rng.gen_range(0..2) as u8).collect();
        let scores: Vec<f64> = (0..n).map(|_| rng.gen_range(0..8) as f64 / 8.0).collect();
        let brute = auroc_pairwise(&scores, &labels);
        let rank = crate::classify::metrics::auroc(&scores, &labels);
        if brute != rank {
            all_equal = false;
        }
    }
    OracleCheck {
        name: "auroc-rank-statistic",
        passed: all_equal,
        detail: if all_equal {
            "rank formula equals pairwise counting on 200 random instances".to_string()
        } else {
            "rank formula diverged from pairwise counting".to_string()
        },
    }
}
