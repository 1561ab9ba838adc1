//! Hazard radius: the leading eigenvalue of the symmetrized integrated hazard matrix
//! `(H + Hᵀ)/2`, its rank-one subgradient `u uᵀ`, and the influence upper bound it drives.
//!
//! All matrix products run over the edge list, so one iteration costs `O(E)`.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::graph::{Graph, HazardMatrix};

#[derive(Debug, Clone, Copy)]
pub struct RadiusOptions {
    /// Stop once `‖M u − ρ u‖₂ ≤ tol`.
    pub tol: f64,
    /// Cap on sparse matrix products; defaults to `10 n + 1000` when unset.
    pub max_iter: Option<usize>,
}

impl Default for RadiusOptions {
    fn default() -> Self {
        RadiusOptions {
            tol: 1e-9,
            max_iter: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadiusResult {
    pub rho: f64,
    /// Unit leading eigenvector, sign chosen so its entries sum to a nonnegative value.
    pub u: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
}

/// `y = ((W + Wᵀ)/2) x` for the edge-weighted matrix `W`.
pub fn symmetrized_matvec(graph: &Graph, weights: &[f64], x: &[f64], y: &mut [f64]) {
    y.iter_mut().for_each(|v| *v = 0.0);
    for (&(i, j), &w) in graph.edges().iter().zip(weights) {
        let half = 0.5 * w;
        y[i] += half * x[j];
        y[j] += half * x[i];
    }
}

/// Largest row sum of `(W + Wᵀ)/2`; bounds the spectral radius for nonnegative `W`.
pub fn max_symmetrized_row_sum(graph: &Graph, weights: &[f64]) -> f64 {
    let mut sums = vec![0.0; graph.node_count()];
    for (&(i, j), &w) in graph.edges().iter().zip(weights) {
        sums[i] += 0.5 * w;
        sums[j] += 0.5 * w;
    }
    sums.into_iter().fold(0.0, f64::max)
}

fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn normalize(v: &mut [f64]) -> f64 {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    norm
}

/// Normalized all-ones vector with a fixed 1e-6 perturbation.
fn default_start(n: usize) -> Vec<f64> {
    let base = 1.0 / (n as f64).sqrt();
    let mut u: Vec<f64> = (0..n)
        .map(|i| base + 1e-6 * ((mix(i as u64) >> 11) as f64 / (1u64 << 53) as f64))
        .collect();
    normalize(&mut u);
    u
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Krylov basis size per restart.
const RESTART: usize = 30;

struct Ritz {
    u: Vec<f64>,
    matvecs: usize,
}

/// One Lanczos pass from unit `start` with full reorthogonalization; returns the Ritz
/// vector of the largest Ritz value.
fn lanczos_pass(
    graph: &Graph,
    weights: &[f64],
    start: &[f64],
    steps: usize,
    tol: f64,
    scale: f64,
) -> Ritz {
    let n = start.len();
    let mut basis: Vec<Vec<f64>> = vec![start.to_vec()];
    let mut alpha: Vec<f64> = Vec::with_capacity(steps);
    let mut beta: Vec<f64> = Vec::with_capacity(steps);
    let mut w = vec![0.0; n];
    let mut matvecs = 0;
    let top = |alpha: &[f64], beta: &[f64]| {
        let m = alpha.len();
        let t = DMatrix::from_fn(m, m, |i, j| {
            if i == j {
                alpha[i]
            } else if i + 1 == j {
                beta[i]
            } else if j + 1 == i {
                beta[j]
            } else {
                0.0
            }
        });
        let eig = SymmetricEigen::new(t);
        let best = (0..m)
            .max_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]))
            .expect("nonempty basis");
        eig.eigenvectors.column(best).iter().copied().collect::<Vec<f64>>()
    };
    loop {
        let j = alpha.len();
        symmetrized_matvec(graph, weights, &basis[j], &mut w);
        matvecs += 1;
        alpha.push(dot(&basis[j], &w));
        // two Gram-Schmidt sweeps keep the basis orthogonal to working precision
        for _ in 0..2 {
            for v in &basis {
                let c = dot(v, &w);
                w.iter_mut().zip(v).for_each(|(x, y)| *x -= c * y);
            }
        }
        let b = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        let full = alpha.len() >= steps || alpha.len() >= n || b <= 1e-13 * scale;
        // β_j · |last entry of the Ritz vector| is the residual of the Ritz pair
        let converged = !full && j % 5 == 4 && {
            let y = top(&alpha, &beta);
            b * y.last().unwrap().abs() <= 0.1 * tol
        };
        if full || converged {
            let y = top(&alpha, &beta);
            let mut u = vec![0.0; n];
            for (c, v) in y.iter().zip(&basis) {
                u.iter_mut().zip(v).for_each(|(x, y)| *x += c * y);
            }
            normalize(&mut u);
            return Ritz { u, matvecs };
        }
        beta.push(b);
        basis.push(w.iter().map(|x| x / b).collect());
    }
}

/// Leading eigenpair of `(W + Wᵀ)/2` for nonnegative edge weights `W`.
///
/// Restarted Lanczos with full reorthogonalization: every step is one sparse product
/// over the edge list, and `max_iter` bounds the total number of products. Each restart
/// begins from the current Ritz vector, so a good `init` (warm start) converges in a few
/// steps. The start always carries a small all-ones component, which keeps it from being
/// orthogonal to the nonnegative Perron vector.
pub fn leading_eigenpair(
    graph: &Graph,
    weights: &[f64],
    init: Option<&[f64]>,
    opts: RadiusOptions,
) -> Result<RadiusResult> {
    let n = graph.node_count();
    if n == 0 {
        return Ok(RadiusResult {
            rho: 0.0,
            u: Vec::new(),
            iterations: 0,
            residual: 0.0,
        });
    }
    let max_iter = opts.max_iter.unwrap_or(10 * n + 1000);
    let bound = max_symmetrized_row_sum(graph, weights);
    let scale = bound.max(f64::MIN_POSITIVE);

    let ones = default_start(n);
    let mut u = match init {
        Some(v) if v.len() == n && v.iter().all(|x| x.is_finite()) => {
            let mut v = v.to_vec();
            if normalize(&mut v) > 0.0 {
                v.iter_mut().zip(&ones).for_each(|(x, o)| *x += 1e-3 * o);
                normalize(&mut v);
                v
            } else {
                ones
            }
        }
        _ => ones,
    };
    let mut w = vec![0.0; n];
    let mut iterations = 0;
    loop {
        symmetrized_matvec(graph, weights, &u, &mut w);
        iterations += 1;
        let lambda = dot(&u, &w);
        let residual = u
            .iter()
            .zip(&w)
            .map(|(a, b)| (b - lambda * a).powi(2))
            .sum::<f64>()
            .sqrt();
        // one more pass needs at least one Lanczos step and one certifying product
        if residual <= opts.tol || iterations + 2 > max_iter {
            if u.iter().sum::<f64>() < 0.0 {
                u.iter_mut().for_each(|x| *x = -*x);
            }
            let result = RadiusResult {
                rho: lambda.max(0.0),
                u,
                iterations,
                residual,
            };
            if residual > opts.tol {
                return Err(Error::NotConverged {
                    last: Box::new(result),
                });
            }
            debug_assert!(
                result.rho <= bound + 1e-9 * (1.0 + bound),
                "rho {} exceeds row-sum bound {bound}",
                result.rho
            );
            return Ok(result);
        }
        let steps = RESTART.min(max_iter - iterations - 1);
        let ritz = lanczos_pass(graph, weights, &u, steps, opts.tol, scale);
        iterations += ritz.matvecs;
        u = ritz.u;
    }
}

pub fn hazard_radius(h: &HazardMatrix, opts: RadiusOptions) -> Result<RadiusResult> {
    leading_eigenpair(h.graph(), h.values(), None, opts)
}

/// Rank-one subgradient `u uᵀ` of `M ↦ ρ((M + Mᵀ)/2)`, kept in factored form.
#[derive(Debug, Clone, Copy)]
pub struct Subgradient<'a> {
    u: &'a [f64],
}

pub fn radius_subgradient(r: &RadiusResult) -> Subgradient<'_> {
    Subgradient { u: &r.u }
}

impl Subgradient<'_> {
    pub fn factor(&self) -> &[f64] {
        self.u
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.u[i] * self.u[j]
    }

    /// Entries `u_i u_j` on the edges of `graph`, in edge-index order.
    pub fn on_edges(&self, graph: &Graph) -> Vec<f64> {
        graph
            .edges()
            .iter()
            .map(|&(i, j)| self.u[i] * self.u[j])
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InfluenceBound {
    pub gamma: f64,
    pub bound: f64,
}

fn bound_equation(gamma: f64, rho: f64, n: f64, n0: f64) -> f64 {
    gamma - 1.0 + (-rho * gamma - rho * n0 / (gamma * (n - n0))).exp()
}

/// Upper bound `n0 + γ (n − n0)` on the influence of any `n0` seeds, where `γ` solves
/// `γ − 1 + exp(−ρ γ − ρ n0 / (γ (n − n0))) = 0` (found by bisection on `[1e-15, 1]`).
pub fn influence_upper_bound(rho: f64, n: usize, n0: usize) -> Result<InfluenceBound> {
    if n0 == 0 || n0 >= n {
        return Err(Error::domain(format!(
            "seed count n0={n0} must lie in [1, n-1] for n={n}"
        )));
    }
    if !(rho >= 0.0) || !rho.is_finite() {
        return Err(Error::domain(format!("hazard radius {rho} is not a nonnegative number")));
    }
    let (nf, n0f) = (n as f64, n0 as f64);
    if rho == 0.0 {
        return Ok(InfluenceBound {
            gamma: 0.0,
            bound: n0f,
        });
    }
    let f = |g: f64| bound_equation(g, rho, nf, n0f);
    let (mut lo, mut hi) = (1e-15, 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let gamma = if f(lo).abs() < f(hi).abs() { lo } else { hi };
    Ok(InfluenceBound {
        gamma,
        bound: n0f + gamma * (nf - n0f),
    })
}
