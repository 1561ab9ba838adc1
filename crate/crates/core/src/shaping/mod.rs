//! Budgeted activity shaping by projected subgradient descent on the hazard radius.
//!
//! A [`FeasibleSetSpec`] pairs hazards before (`F`) and after (`F̂`) full treatment with a
//! budget `k`. An [`ActionAllocation`] interpolates between the two, per edge (partial
//! quarantine) or per source node (partial immunization):
//!
//! ```text
//! edge mode: (1 − X) ∘ F + X ∘ F̂,        X ∈ [0,1]^E, ‖X‖₁ ≤ k
//! node mode: (1 − x 1ᵀ) ∘ F + x 1ᵀ ∘ F̂,  x ∈ [0,1]^n, ‖x‖₁ ≤ k
//! ```

mod netshape;
mod projection;

pub use netshape::{
    netshape_ascent, netshape_edge, netshape_node, node_reduction, ShapingOptions,
    ShapingResult, TraceEntry,
};
pub use projection::project_box_l1;

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::graph::HazardMatrix;

/// Slack allowed on the budget constraint.
pub const BUDGET_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ActionMode {
    Edge,
    #[default]
    Node,
}

impl fmt::Display for ActionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ActionMode::Edge => "edge",
            ActionMode::Node => "node",
        })
    }
}

impl FromStr for ActionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "edge" => Ok(ActionMode::Edge),
            "node" => Ok(ActionMode::Node),
            other => Err(Error::domain(format!("unknown action mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct FeasibleSetSpec {
    before: HazardMatrix,
    after: HazardMatrix,
    budget: f64,
    mode: ActionMode,
}

impl FeasibleSetSpec {
    pub fn new(
        before: HazardMatrix,
        after: HazardMatrix,
        budget: f64,
        mode: ActionMode,
    ) -> Result<Self> {
        if !before.same_support(&after) {
            return Err(Error::domain(
                "before/after hazard matrices are defined on different edge sets",
            ));
        }
        if !budget.is_finite() || budget < 0.0 {
            return Err(Error::domain(format!(
                "budget must be a finite nonnegative number, got {budget}"
            )));
        }
        Ok(FeasibleSetSpec {
            before,
            after,
            budget,
            mode,
        })
    }

    /// `F̂ = factor · F`; `factor = 0` is full removal.
    pub fn scaled(before: HazardMatrix, factor: f64, budget: f64, mode: ActionMode) -> Result<Self> {
        let after = before.scaled(factor)?;
        Self::new(before, after, budget, mode)
    }

    pub fn before(&self) -> &HazardMatrix {
        &self.before
    }

    pub fn after(&self) -> &HazardMatrix {
        &self.after
    }

    pub fn budget(&self) -> f64 {
        self.budget
    }

    pub fn mode(&self) -> ActionMode {
        self.mode
    }

    pub fn with_budget(&self, budget: f64) -> Result<Self> {
        Self::new(self.before.clone(), self.after.clone(), budget, self.mode)
    }

    /// Number of coordinates of an allocation: `E` in edge mode, `n` in node mode.
    pub fn dimension(&self) -> usize {
        let g = self.before.graph();
        match self.mode {
            ActionMode::Edge => g.edge_count(),
            ActionMode::Node => g.node_count(),
        }
    }

    /// `F̂ ≤ F` on every edge.
    pub fn is_suppressive(&self) -> bool {
        self.after
            .values()
            .iter()
            .zip(self.before.values())
            .all(|(a, b)| a <= b)
    }

    /// `F̂ ≥ F` on every edge.
    pub fn is_enhancive(&self) -> bool {
        self.after
            .values()
            .iter()
            .zip(self.before.values())
            .all(|(a, b)| a >= b)
    }

    /// Shaped edge weights for raw allocation values (no feasibility check).
    pub(crate) fn shaped_weights(&self, values: &[f64]) -> Vec<f64> {
        let g = self.before.graph();
        let (f, fh) = (self.before.values(), self.after.values());
        match self.mode {
            ActionMode::Edge => (0..g.edge_count())
                .map(|e| (1.0 - values[e]) * f[e] + values[e] * fh[e])
                .collect(),
            ActionMode::Node => g
                .edges()
                .iter()
                .enumerate()
                .map(|(e, &(i, _))| (1.0 - values[i]) * f[e] + values[i] * fh[e])
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ActionAllocation {
    pub mode: ActionMode,
    pub values: Vec<f64>,
}

impl ActionAllocation {
    pub fn zeros(mode: ActionMode, len: usize) -> Self {
        ActionAllocation {
            mode,
            values: vec![0.0; len],
        }
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn check_feasible(&self, spec: &FeasibleSetSpec) -> Result<()> {
        if self.mode != spec.mode() {
            return Err(Error::domain(format!(
                "{} allocation used with a {} feasible set",
                self.mode,
                spec.mode()
            )));
        }
        if self.values.len() != spec.dimension() {
            return Err(Error::domain(format!(
                "allocation has {} entries, expected {}",
                self.values.len(),
                spec.dimension()
            )));
        }
        if let Some(i) = self.values.iter().position(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::domain(format!(
                "allocation entry {i} = {} is outside [0,1]",
                self.values[i]
            )));
        }
        let total = self.total();
        if total > spec.budget() + BUDGET_SLACK {
            return Err(Error::domain(format!(
                "allocation spends {total} but the budget is {}",
                spec.budget()
            )));
        }
        Ok(())
    }

    /// `index<TAB>value` per line.
    pub fn write_tsv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for (i, v) in self.values.iter().enumerate() {
            writeln!(out, "{i}\t{v}")?;
        }
        Ok(())
    }
}

/// Per-edge `Δ = ∫F̂ − ∫F`, aligned with the global edge index.
pub fn delta_matrix(spec: &FeasibleSetSpec) -> Vec<f64> {
    spec.after
        .values()
        .iter()
        .zip(spec.before.values())
        .map(|(a, b)| a - b)
        .collect()
}

/// The shaped hazard matrix of a feasible allocation.
pub fn apply_policy(spec: &FeasibleSetSpec, alloc: &ActionAllocation) -> Result<HazardMatrix> {
    alloc.check_feasible(spec)?;
    let values = spec
        .shaped_weights(&alloc.values)
        .into_iter()
        .map(|v| v.max(0.0))
        .collect();
    HazardMatrix::new(spec.before.graph().clone(), values)
}
