#![allow(dead_code)]

use std::collections::BTreeSet;
use std::sync::Arc;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use netshape::graph::{Graph, HazardMatrix};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform random simple digraph with `m` distinct edges (capped at `n(n−1)`).
pub fn random_digraph(n: usize, m: usize, rng: &mut impl Rng) -> Arc<Graph> {
    let m = m.min(n * n.saturating_sub(1));
    let mut set = BTreeSet::new();
    let mut order = Vec::with_capacity(m);
    while order.len() < m {
        let i = rng.random_range(0..n);
        let j = rng.random_range(0..n);
        if i != j && set.insert((i, j)) {
            order.push((i, j));
        }
    }
    Arc::new(Graph::new(n, order).unwrap())
}

/// Random undirected graph stored with both directions; `pairs` unordered pairs.
pub fn random_undirected(n: usize, pairs: usize, rng: &mut impl Rng) -> Arc<Graph> {
    let pairs = pairs.min(n * n.saturating_sub(1) / 2);
    let mut set = BTreeSet::new();
    let mut edges = Vec::with_capacity(2 * pairs);
    while set.len() < pairs {
        let i = rng.random_range(0..n);
        let j = rng.random_range(0..n);
        if i != j && set.insert((i.min(j), i.max(j))) {
            edges.push((i, j));
            edges.push((j, i));
        }
    }
    Arc::new(Graph::new(n, edges).unwrap())
}

pub fn random_hazard(g: &Arc<Graph>, lo: f64, hi: f64, rng: &mut impl Rng) -> HazardMatrix {
    let values = (0..g.edge_count()).map(|_| rng.random_range(lo..hi)).collect();
    HazardMatrix::new(g.clone(), values).unwrap()
}

/// Dense `(W + Wᵀ)/2`.
pub fn dense_symmetrized(g: &Graph, weights: &[f64]) -> DMatrix<f64> {
    let n = g.node_count();
    let mut m = DMatrix::zeros(n, n);
    for (&(i, j), &w) in g.edges().iter().zip(weights) {
        m[(i, j)] += 0.5 * w;
        m[(j, i)] += 0.5 * w;
    }
    m
}

/// Largest eigenvalue of a dense symmetric matrix.
pub fn dense_lambda_max(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    m.clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max)
}

pub fn dense_radius(h: &HazardMatrix) -> f64 {
    dense_lambda_max(&dense_symmetrized(h.graph(), h.values()))
}

/// Exact expected number of nodes reached from `seeds`, by enumerating every
/// live-edge subset. Only for small edge counts.
pub fn exact_spread(g: &Graph, p: &[f64], seeds: &[usize]) -> f64 {
    let e = g.edge_count();
    assert!(e <= 20, "too many edges to enumerate");
    let n = g.node_count();
    let mut total = 0.0;
    for mask in 0u32..(1u32 << e) {
        let mut prob = 1.0;
        for (k, &pk) in p.iter().enumerate() {
            prob *= if mask >> k & 1 == 1 { pk } else { 1.0 - pk };
        }
        if prob == 0.0 {
            continue;
        }
        let mut seen = vec![false; n];
        let mut stack: Vec<usize> = seeds.to_vec();
        for &s in seeds {
            seen[s] = true;
        }
        while let Some(v) = stack.pop() {
            for (w, id) in g.out_edges(v) {
                if !seen[w] && mask >> id & 1 == 1 {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        total += prob * seen.iter().filter(|&&s| s).count() as f64;
    }
    total
}

pub fn objective(delta: &[f64], y: &[f64], x: &[f64]) -> f64 {
    x.iter()
        .zip(delta.iter().zip(y))
        .map(|(x, (d, y))| (x * d - y).powi(2))
        .sum()
}

/// Minimum over every KKT pattern (each coordinate at 0, at 1 or free; budget tight or
/// slack) of the candidate that pattern determines, keeping only feasible candidates.
pub fn active_set_oracle(delta: &[f64], y: &[f64], k: f64) -> f64 {
    let active: Vec<usize> = (0..delta.len()).filter(|&i| delta[i] != 0.0).collect();
    let m = active.len();
    let mut best = f64::INFINITY;
    let mut x = vec![0.0; delta.len()];
    for code in 0..3usize.pow(m as u32) {
        let mut c = code;
        let mut state = vec![0u8; m];
        for s in state.iter_mut() {
            *s = (c % 3) as u8;
            c /= 3;
        }
        for tight in [false, true] {
            let upper = state.iter().filter(|&&s| s == 1).count() as f64;
            let z = if tight {
                let (mut a, mut b) = (0.0, 0.0);
                for (t, &i) in active.iter().enumerate() {
                    if state[t] == 2 {
                        a += y[i] / delta[i];
                        b += 1.0 / (2.0 * delta[i] * delta[i]);
                    }
                }
                if b == 0.0 {
                    continue;
                }
                let z = (a - (k - upper)) / b;
                if z < 0.0 {
                    continue;
                }
                z
            } else {
                0.0
            };
            let mut ok = true;
            x.iter_mut().for_each(|v| *v = 0.0);
            for (t, &i) in active.iter().enumerate() {
                x[i] = match state[t] {
                    0 => 0.0,
                    1 => 1.0,
                    _ => (2.0 * delta[i] * y[i] - z) / (2.0 * delta[i] * delta[i]),
                };
                if !(-1e-12..=1.0 + 1e-12).contains(&x[i]) {
                    ok = false;
                    break;
                }
            }
            if ok && x.iter().sum::<f64>() <= k + 1e-9 {
                best = best.min(objective(delta, y, &x));
            }
        }
    }
    best
}
