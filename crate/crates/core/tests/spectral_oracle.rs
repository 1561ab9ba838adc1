mod common;

use std::sync::Arc;

use nalgebra::DMatrix;
use proptest::prelude::*;

use common::{dense_lambda_max, dense_radius, dense_symmetrized, random_digraph, random_hazard, rng};
use netshape::graph::{Graph, HazardMatrix};
use netshape::spectral::{hazard_radius, influence_upper_bound, radius_subgradient, RadiusOptions};

fn radius(h: &HazardMatrix) -> f64 {
    hazard_radius(h, RadiusOptions::default()).unwrap().rho
}

#[test]
fn sparse_matches_dense_eigensolver() {
    let mut r = rng(17);
    for trial in 0..40 {
        let n = 2 + trial % 19;
        let g = random_digraph(n, 3 * n, &mut r);
        let h = random_hazard(&g, 0.0, 2.0, &mut r);
        let (got, want) = (radius(&h), dense_radius(&h));
        assert!((got - want).abs() <= 1e-8, "n={n}: {got} vs {want}");
    }
}

#[test]
fn random_20_node_matrix_matches_dense_oracle() {
    let mut r = rng(20);
    let g = random_digraph(20, 60, &mut r);
    let h = random_hazard(&g, 0.0, 1.0, &mut r);
    assert!((radius(&h) - dense_radius(&h)).abs() <= 1e-8);
}

#[test]
fn bipartite_graph_has_symmetric_spectrum() {
    // complete bipartite K_{3,4} oriented left to right: the spectrum is ±ρ
    let edges: Vec<_> = (0..3).flat_map(|a| (3..7).map(move |b| (a, b))).collect();
    let g = Arc::new(Graph::new(7, edges).unwrap());
    let h = HazardMatrix::uniform(g, 1.0).unwrap();
    let want = 0.5 * 12f64.sqrt();
    assert!((radius(&h) - want).abs() <= 1e-8);
    assert!((dense_radius(&h) - want).abs() <= 1e-10);
}

#[test]
fn subgradient_satisfies_convexity_inequality() {
    let mut r = rng(3);
    for trial in 0..120 {
        let n = 3 + trial % 12;
        let g = random_digraph(n, 2 * n + trial % 7, &mut r);
        let a = random_hazard(&g, 0.0, 1.5, &mut r);
        let b = random_hazard(&g, 0.0, 1.5, &mut r);
        let ra = hazard_radius(&a, RadiusOptions::default()).unwrap();
        let sub = radius_subgradient(&ra).on_edges(&g);
        let inner: f64 = sub
            .iter()
            .zip(a.values().iter().zip(b.values()))
            .map(|(s, (x, y))| s * (y - x))
            .sum();
        let fb = radius(&b);
        assert!(fb >= ra.rho + inner - 1e-9, "{fb} < {} + {inner}", ra.rho);
    }
}

#[test]
fn moving_along_the_subgradient_raises_the_radius_at_unit_rate() {
    let mut r = rng(8);
    let eps = 1e-4;
    for _ in 0..20 {
        let g = random_digraph(12, 40, &mut r);
        let h = random_hazard(&g, 0.1, 1.0, &mut r);
        let res = hazard_radius(&h, RadiusOptions::default()).unwrap();
        let u = DMatrix::from_column_slice(12, 1, &res.u);
        let m = dense_symmetrized(&g, h.values()) + (&u * u.transpose()) * eps;
        let lifted = dense_lambda_max(&m);
        assert!(lifted - res.rho >= eps * (1.0 - 1e-6), "{}", lifted - res.rho);
    }
}

#[test]
fn subgradient_entries_on_single_edge() {
    let g = Arc::new(Graph::new(2, vec![(0, 1)]).unwrap());
    let h = HazardMatrix::uniform(g.clone(), 1.0).unwrap();
    let res = hazard_radius(&h, RadiusOptions::default()).unwrap();
    let sub = radius_subgradient(&res);
    assert!((sub.entry(0, 1) - 0.5).abs() < 1e-9);
    assert!((sub.on_edges(&g)[0] - 0.5).abs() < 1e-9);
}

fn bound_residual(gamma: f64, rho: f64, n: usize, n0: usize) -> f64 {
    gamma - 1.0 + (-rho * gamma - rho * n0 as f64 / (gamma * (n - n0) as f64)).exp()
}

fn oracle_gamma(rho: f64, n: usize, n0: usize) -> f64 {
    // the residual is negative just above 0 and nonnegative at 1
    let (mut lo, mut hi) = (f64::MIN_POSITIVE, 1.0);
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if bound_residual(mid, rho, n, n0) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn bound_matches_independent_bisection() {
    let b = influence_upper_bound(1.0, 1000, 1).unwrap();
    let want = oracle_gamma(1.0, 1000, 1);
    assert!((b.gamma - want).abs() <= 1e-9, "{} vs {want}", b.gamma);
    assert!(bound_residual(b.gamma, 1.0, 1000, 1).abs() <= 1e-10);
    assert!((b.bound - (1.0 + b.gamma * 999.0)).abs() < 1e-9);
    for &(rho, n, n0) in &[(0.3, 50, 2), (2.5, 500, 10), (5.0, 10, 9)] {
        let b = influence_upper_bound(rho, n, n0).unwrap();
        assert!((b.gamma - oracle_gamma(rho, n, n0)).abs() <= 1e-9);
    }
}

#[test]
fn bound_is_monotone_on_a_grid() {
    let n = 200;
    for n0 in [1, 5, 50, 199] {
        let mut last = 0.0;
        for i in 0..=40 {
            let b = influence_upper_bound(i as f64 * 0.1, n, n0).unwrap();
            assert!(b.bound >= last - 1e-9);
            last = b.bound;
        }
    }
    for i in 0..=40 {
        let rho = i as f64 * 0.1;
        let mut last = 0.0;
        for n0 in 1..n {
            let b = influence_upper_bound(rho, n, n0).unwrap();
            assert!(b.bound >= last - 1e-9, "rho={rho} n0={n0}");
            last = b.bound;
        }
    }
    assert!(
        influence_upper_bound(2.0, 1000, 1).unwrap().gamma
            >= influence_upper_bound(1.0, 1000, 1).unwrap().gamma
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn radius_is_positively_homogeneous(seed in 0u64..10_000, alpha in 0.0f64..5.0) {
        let mut r = rng(seed);
        let g = random_digraph(15, 40, &mut r);
        let h = random_hazard(&g, 0.0, 1.0, &mut r);
        let scaled = h.scaled(alpha).unwrap();
        prop_assert!((radius(&scaled) - alpha * radius(&h)).abs() <= 1e-8);
    }

    #[test]
    fn radius_respects_row_sum_bound(seed in 0u64..10_000) {
        let mut r = rng(seed);
        let g = random_digraph(25, 80, &mut r);
        let h = random_hazard(&g, 0.0, 3.0, &mut r);
        let m = dense_symmetrized(&g, h.values());
        let bound = m.row_iter().map(|row| row.sum()).fold(0.0, f64::max);
        prop_assert!(radius(&h) <= bound + 1e-9);
    }
}
