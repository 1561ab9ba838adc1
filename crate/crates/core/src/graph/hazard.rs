use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Graph;
use crate::error::{Error, Result};

/// Integrated hazards `∫₀^∞ F_ij(t) dt`, one value per edge of the graph.
#[derive(Debug, Clone, PartialEq)]
pub struct HazardMatrix {
    graph: Arc<Graph>,
    values: Vec<f64>,
}

impl HazardMatrix {
    pub fn new(graph: Arc<Graph>, values: Vec<f64>) -> Result<Self> {
        if values.len() != graph.edge_count() {
            return Err(Error::domain(format!(
                "hazard vector has {} entries for {} edges",
                values.len(),
                graph.edge_count()
            )));
        }
        if let Some(e) = values.iter().position(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::domain(format!(
                "hazard on edge {e} is {} (must be finite and nonnegative)",
                values[e]
            )));
        }
        Ok(HazardMatrix { graph, values })
    }

    pub fn zeros(graph: Arc<Graph>) -> Self {
        let values = vec![0.0; graph.edge_count()];
        HazardMatrix { graph, values }
    }

    pub fn uniform(graph: Arc<Graph>, value: f64) -> Result<Self> {
        let values = vec![value; graph.edge_count()];
        Self::new(graph, values)
    }

    pub fn graph(&self) -> &Arc<Graph> {
        &self.graph
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(
            self.graph.clone(),
            self.values.iter().map(|v| v * factor).collect(),
        )
    }

    /// True when both matrices live on the same edge set.
    pub fn same_support(&self, other: &HazardMatrix) -> bool {
        Arc::ptr_eq(&self.graph, &other.graph) || *self.graph == *other.graph
    }

    /// Sum of outgoing hazards of every node.
    pub fn out_weights(&self) -> Vec<f64> {
        let mut w = vec![0.0; self.graph.node_count()];
        for (&(i, _), &h) in self.graph.edges().iter().zip(&self.values) {
            w[i] += h;
        }
        w
    }

    pub fn write_tsv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "# netshape-hazard v1 n={}", self.graph.node_count())?;
        for (&(i, j), v) in self.graph.edges().iter().zip(&self.values) {
            writeln!(out, "{i}\t{j}\t{v}")?;
        }
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut out = BufWriter::new(File::create(path)?);
        self.write_tsv(&mut out)?;
        out.flush()?;
        Ok(())
    }
}

/// Per-edge end-to-end transmission probabilities `p_ij ∈ [0,1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityMatrix {
    graph: Arc<Graph>,
    values: Vec<f64>,
}

impl ProbabilityMatrix {
    pub fn new(graph: Arc<Graph>, values: Vec<f64>) -> Result<Self> {
        if values.len() != graph.edge_count() {
            return Err(Error::domain(format!(
                "probability vector has {} entries for {} edges",
                values.len(),
                graph.edge_count()
            )));
        }
        if let Some(e) = values.iter().position(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::domain(format!(
                "probability on edge {e} is {} (must lie in [0,1])",
                values[e]
            )));
        }
        Ok(ProbabilityMatrix { graph, values })
    }

    pub fn uniform(graph: Arc<Graph>, p: f64) -> Result<Self> {
        let values = vec![p; graph.edge_count()];
        Self::new(graph, values)
    }

    pub fn graph(&self) -> &Arc<Graph> {
        &self.graph
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Trivalency weighting: every edge draws one of three levels uniformly at random.
pub fn assign_trivalency(
    graph: &Arc<Graph>,
    levels: [f64; 3],
    seed: u64,
) -> Result<ProbabilityMatrix> {
    for &p in &levels {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::domain(format!(
                "trivalency level {p} is not in the open interval (0,1)"
            )));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..graph.edge_count())
        .map(|_| levels[rng.random_range(0..3)])
        .collect();
    ProbabilityMatrix::new(graph.clone(), values)
}

/// `H_ij = -ln(1 - p_ij)`: the integrated hazard whose transmission probability is `p_ij`.
pub fn hazard_from_probabilities(p: &ProbabilityMatrix) -> Result<HazardMatrix> {
    if let Some(e) = p.values.iter().position(|&v| v >= 1.0) {
        return Err(Error::domain(format!(
            "edge {e} has probability 1, which needs an infinite hazard"
        )));
    }
    let values = p.values.iter().map(|&v| -(-v).ln_1p()).collect();
    HazardMatrix::new(p.graph.clone(), values)
}

/// `p_ij = 1 - exp(-H_ij)`.
pub fn probabilities_from_hazard(h: &HazardMatrix) -> ProbabilityMatrix {
    let values = h.values.iter().map(|&v| -(-v).exp_m1()).collect();
    ProbabilityMatrix {
        graph: h.graph.clone(),
        values,
    }
}

/// Hazard matrix of an SIR epidemic: `ln(1 + beta / recovery)` on every edge.
pub fn sir_hazard(graph: &Arc<Graph>, beta: f64, recovery: f64) -> Result<HazardMatrix> {
    if !(recovery > 0.0) || !recovery.is_finite() {
        return Err(Error::domain(format!(
            "recovery rate must be positive, got {recovery}"
        )));
    }
    if !(beta >= 0.0) || !beta.is_finite() {
        return Err(Error::domain(format!(
            "transmission rate must be nonnegative, got {beta}"
        )));
    }
    HazardMatrix::uniform(graph.clone(), (beta / recovery).ln_1p())
}

/// Margin kept away from 0 and 1 when native weights are min-max normalized.
pub const WEIGHT_MARGIN: f64 = 1e-3;

/// Min-max normalizes raw edge weights into `[WEIGHT_MARGIN, 1 - WEIGHT_MARGIN]` and
/// reads them as transmission probabilities. Constant weights map to 1/2.
pub fn probabilities_from_weights(graph: &Arc<Graph>, weights: &[f64]) -> Result<ProbabilityMatrix> {
    let lo = weights.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo;
    let values = weights
        .iter()
        .map(|&w| {
            if span > 0.0 {
                WEIGHT_MARGIN + (1.0 - 2.0 * WEIGHT_MARGIN) * (w - lo) / span
            } else {
                0.5
            }
        })
        .collect();
    ProbabilityMatrix::new(graph.clone(), values)
}
