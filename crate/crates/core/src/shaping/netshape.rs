use std::io::Write;

use super::{
    delta_matrix, project_box_l1, ActionAllocation, ActionMode, FeasibleSetSpec, BUDGET_SLACK,
};
use crate::error::{Error, Result};
use crate::graph::{Graph, HazardMatrix};
use crate::spectral::{leading_eigenpair, RadiusOptions, RadiusResult};

#[derive(Debug, Clone, Copy)]
pub struct ShapingOptions {
    /// Target accuracy; the iteration count is `⌈R²/eps²⌉`.
    pub eps: f64,
    /// Upper bound on the iteration count.
    pub t_cap: usize,
    pub radius: RadiusOptions,
}

impl Default for ShapingOptions {
    fn default() -> Self {
        ShapingOptions {
            eps: 0.01,
            t_cap: 2000,
            radius: RadiusOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceEntry {
    /// Hazard radius of the iterate entering the step.
    pub rho: f64,
    pub eta: f64,
}

#[derive(Debug, Clone)]
pub struct ShapingResult {
    /// Mean of the projected iterates.
    pub averaged: ActionAllocation,
    pub averaged_rho: f64,
    /// Evaluated allocation with the best radius (smallest, or largest for ascent).
    pub best: ActionAllocation,
    pub best_rho: f64,
    /// `F*` for the averaged allocation.
    pub shaped: HazardMatrix,
    pub trace: Vec<TraceEntry>,
    pub iterations: usize,
    /// Feasible-set radius used for the step sizes.
    pub radius_bound: f64,
}

impl ShapingResult {
    pub fn write_trace_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "iter,rho,eta")?;
        for (i, t) in self.trace.iter().enumerate() {
            writeln!(out, "{},{},{}", i + 1, t.rho, t.eta)?;
        }
        Ok(())
    }
}

/// Per-node reduction of an edge vector: `δ'_i = sqrt(Σ_j Δ_ij²)` over out-edges of `i`.
pub fn node_reduction(graph: &Graph, delta: &[f64]) -> Vec<f64> {
    let mut sq = vec![0.0; graph.node_count()];
    for (&(i, _), d) in graph.edges().iter().zip(delta) {
        sq[i] += d * d;
    }
    sq.into_iter().map(f64::sqrt).collect()
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Direction {
    Descent,
    Ascent,
}

impl Direction {
    fn better(self, candidate: f64, incumbent: f64) -> bool {
        match self {
            Direction::Descent => candidate < incumbent,
            Direction::Ascent => candidate > incumbent,
        }
    }
}

struct Incumbent {
    rho: f64,
    values: Vec<f64>,
}

fn iteration_count(radius: f64, opts: &ShapingOptions) -> usize {
    let cap = opts.t_cap.max(1);
    let t = (radius * radius / (opts.eps * opts.eps)).ceil();
    if t.is_finite() && t < cap as f64 {
        (t as usize).max(1)
    } else {
        cap
    }
}

fn run(spec: &FeasibleSetSpec, opts: &ShapingOptions, dir: Direction) -> Result<ShapingResult> {
    if !(opts.eps > 0.0) {
        return Err(Error::domain(format!("eps must be positive, got {}", opts.eps)));
    }
    match dir {
        Direction::Descent if !spec.is_suppressive() => {
            log::warn!("minimizing over a feasible set whose after-matrix exceeds the before-matrix")
        }
        _ => {}
    }
    let graph = spec.before().graph().clone();
    let mode = spec.mode();
    let delta = delta_matrix(spec);
    let proj_delta = match mode {
        ActionMode::Edge => delta.clone(),
        ActionMode::Node => node_reduction(&graph, &delta),
    };
    let budget = spec.budget();
    let dim = spec.dimension();
    let max_delta = proj_delta.iter().fold(0.0f64, |m, d| m.max(d.abs()));
    let radius = budget.sqrt() * max_delta;
    let iterations = iteration_count(radius, opts);
    let sign = match dir {
        Direction::Descent => -1.0,
        Direction::Ascent => 1.0,
    };

    let eigen = |values: &[f64], warm: Option<&[f64]>, iteration: usize| -> Result<RadiusResult> {
        let weights = spec.shaped_weights(values);
        leading_eigenpair(&graph, &weights, warm, opts.radius).map_err(|e| Error::Shaping {
            iteration,
            source: Box::new(e),
        })
    };

    let mut x = vec![0.0; dim];
    let mut sum = vec![0.0; dim];
    let mut trace = Vec::with_capacity(iterations);
    let mut warm: Option<Vec<f64>> = None;
    let mut best: Option<Incumbent> = None;
    let consider = |rho: f64, values: &[f64], best: &mut Option<Incumbent>| {
        if best.as_ref().is_none_or(|b| dir.better(rho, b.rho)) {
            *best = Some(Incumbent {
                rho,
                values: values.to_vec(),
            });
        }
    };

    let mut y = vec![0.0; dim];
    for i in 1..=iterations {
        let r = eigen(&x, warm.as_deref(), i)?;
        let eta = radius / (i as f64).sqrt();
        trace.push(TraceEntry { rho: r.rho, eta });
        consider(r.rho, &x, &mut best);

        let u = &r.u;
        match mode {
            ActionMode::Edge => {
                for (e, &(a, b)) in graph.edges().iter().enumerate() {
                    y[e] = x[e] * delta[e] + sign * eta * u[a] * u[b];
                }
            }
            ActionMode::Node => {
                y.iter_mut().for_each(|v| *v = 0.0);
                for (e, &(a, b)) in graph.edges().iter().enumerate() {
                    let target = x[a] * delta[e] + sign * eta * u[a] * u[b];
                    y[a] += delta[e] * target;
                }
                for (v, d) in y.iter_mut().zip(&proj_delta) {
                    *v = if *d > 0.0 { *v / d } else { 0.0 };
                }
            }
        }
        x = project_box_l1(&proj_delta, &y, budget)?;
        debug_assert!(x.iter().all(|v| (0.0..=1.0).contains(v)));
        debug_assert!(x.iter().sum::<f64>() <= budget + BUDGET_SLACK);
        for (s, v) in sum.iter_mut().zip(&x) {
            *s += v;
        }
        warm = Some(r.u);
    }

    let averaged: Vec<f64> = sum.iter().map(|s| s / iterations as f64).collect();
    let last = eigen(&x, warm.as_deref(), iterations + 1)?;
    consider(last.rho, &x, &mut best);
    let avg = eigen(&averaged, Some(&last.u), iterations + 1)?;
    consider(avg.rho, &averaged, &mut best);

    let best = best.expect("at least one iterate is evaluated");
    let averaged = ActionAllocation {
        mode,
        values: averaged,
    };
    let shaped = super::apply_policy(spec, &averaged)?;
    Ok(ShapingResult {
        averaged,
        averaged_rho: avg.rho,
        best: ActionAllocation {
            mode,
            values: best.values,
        },
        best_rho: best.rho,
        shaped,
        trace,
        iterations,
        radius_bound: radius,
    })
}

fn require_mode(spec: &FeasibleSetSpec, mode: ActionMode) -> Result<()> {
    if spec.mode() != mode {
        return Err(Error::domain(format!(
            "expected a {mode}-mode feasible set, got {}",
            spec.mode()
        )));
    }
    Ok(())
}

/// Partial quarantine: projected subgradient descent over per-edge allocations.
pub fn netshape_edge(spec: &FeasibleSetSpec, opts: &ShapingOptions) -> Result<ShapingResult> {
    require_mode(spec, ActionMode::Edge)?;
    run(spec, opts, Direction::Descent)
}

/// Partial node immunization: the edge step reduced to one coordinate per source node.
pub fn netshape_node(spec: &FeasibleSetSpec, opts: &ShapingOptions) -> Result<ShapingResult> {
    require_mode(spec, ActionMode::Node)?;
    run(spec, opts, Direction::Descent)
}

/// Same loop with the step sign flipped, for enhancive feasible sets. The problem is
/// not convex, so neither returned allocation is guaranteed to be a global maximizer.
pub fn netshape_ascent(spec: &FeasibleSetSpec, opts: &ShapingOptions) -> Result<ShapingResult> {
    run(spec, opts, Direction::Ascent)
}
