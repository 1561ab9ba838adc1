//! Comparison policies for node immunization: random, out-degree, weighted out-degree
//! and NetShield.
//!
//! Every policy picks whole nodes (`x_i = 1`). A fractional budget remainder `k − ⌊k⌋`
//! goes to the next node in the policy's order so all methods spend the same budget.

use std::fmt;
use std::str::FromStr;

use rand::seq::index;

use crate::cascade::run_rng;
use crate::error::{Error, Result};
use crate::graph::{Graph, HazardMatrix};
use crate::shaping::{ActionAllocation, ActionMode};
use crate::spectral::{leading_eigenpair, RadiusOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PolicyKind {
    Rand,
    Degree,
    WDegree,
    NetShield,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 4] = [
        PolicyKind::Rand,
        PolicyKind::Degree,
        PolicyKind::WDegree,
        PolicyKind::NetShield,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::Rand => "rand",
            PolicyKind::Degree => "degree",
            PolicyKind::WDegree => "wdegree",
            PolicyKind::NetShield => "netshield",
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PolicyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PolicyKind::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::domain(format!("unknown baseline policy {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaselinePolicy {
    pub kind: PolicyKind,
    pub allocation: ActionAllocation,
    /// Nodes in the order they were picked; the last one may be partial.
    pub order: Vec<usize>,
}

fn check_budget(budget: f64) -> Result<()> {
    if !budget.is_finite() || budget < 0.0 {
        return Err(Error::domain(format!(
            "budget must be a finite nonnegative number, got {budget}"
        )));
    }
    Ok(())
}

/// Number of nodes touched by a budget: `⌈k⌉` capped at `n`.
fn picks(n: usize, budget: f64) -> usize {
    if budget >= n as f64 {
        n
    } else {
        budget.ceil() as usize
    }
}

fn from_order(kind: PolicyKind, n: usize, budget: f64, order: Vec<usize>) -> BaselinePolicy {
    let mut values = vec![0.0; n];
    let mut left = budget;
    for &v in &order {
        let take = left.min(1.0);
        if take <= 0.0 {
            break;
        }
        values[v] = take;
        left -= take;
    }
    BaselinePolicy {
        kind,
        allocation: ActionAllocation {
            mode: ActionMode::Node,
            values,
        },
        order,
    }
}

fn top_by_score(scores: &[f64], count: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    idx.truncate(count);
    idx
}

pub fn rand_policy(n: usize, budget: f64, seed: u64) -> Result<BaselinePolicy> {
    check_budget(budget)?;
    let count = picks(n, budget);
    let mut rng = run_rng(seed, 0);
    let order = index::sample(&mut rng, n, count).into_vec();
    Ok(from_order(PolicyKind::Rand, n, budget, order))
}

pub fn degree_policy(g: &Graph, budget: f64) -> Result<BaselinePolicy> {
    check_budget(budget)?;
    let n = g.node_count();
    let scores: Vec<f64> = (0..n).map(|v| g.out_degree(v) as f64).collect();
    let order = top_by_score(&scores, picks(n, budget));
    Ok(from_order(PolicyKind::Degree, n, budget, order))
}

/// Ranks nodes by the sum of their outgoing integrated hazards.
pub fn wdegree_policy(h: &HazardMatrix, budget: f64) -> Result<BaselinePolicy> {
    check_budget(budget)?;
    let n = h.graph().node_count();
    let order = top_by_score(&h.out_weights(), picks(n, budget));
    Ok(from_order(PolicyKind::WDegree, n, budget, order))
}

/// Leading eigenpair `(λ, u)` of the symmetrized adjacency `Ā = (A + Aᵀ)/2`.
pub(crate) fn adjacency_eigenpair(g: &Graph) -> Result<(f64, Vec<f64>)> {
    let ones = vec![1.0; g.edge_count()];
    let r = leading_eigenpair(g, &ones, None, RadiusOptions::default())?;
    Ok((r.rho, r.u))
}

/// Shield value `Sv(S) = Σ_{i∈S} 2λ u_i² − Σ_{i,j∈S} Ā_ij u_i u_j`.
pub fn shield_value(g: &Graph, lambda: f64, u: &[f64], set: &[usize]) -> f64 {
    let mut member = vec![false; g.node_count()];
    set.iter().for_each(|&v| member[v] = true);
    let own: f64 = set.iter().map(|&i| 2.0 * lambda * u[i] * u[i]).sum();
    // each directed edge adds 1/2 to both Ā_ij and Ā_ji
    let pairs: f64 = g
        .edges()
        .iter()
        .filter(|&&(i, j)| member[i] && member[j])
        .map(|&(i, j)| u[i] * u[j])
        .sum();
    own - pairs
}

/// NetShield: greedy maximization of the shield value on the symmetrized adjacency.
pub fn netshield_policy(g: &Graph, budget: f64) -> Result<BaselinePolicy> {
    check_budget(budget)?;
    let n = g.node_count();
    let count = picks(n, budget);
    if count == 0 {
        return Ok(from_order(PolicyKind::NetShield, n, budget, Vec::new()));
    }
    let (lambda, u) = adjacency_eigenpair(g)?;
    let mut score: Vec<f64> = u.iter().map(|x| 2.0 * lambda * x * x).collect();
    let mut taken = vec![false; n];
    let mut order = Vec::with_capacity(count);
    for _ in 0..count {
        let pick = (0..n)
            .filter(|&v| !taken[v])
            .max_by(|&a, &b| score[a].total_cmp(&score[b]).then(b.cmp(&a)))
            .expect("fewer candidates than picks");
        taken[pick] = true;
        order.push(pick);
        // marginal gain of j drops by 2 Ā_ij u_i u_j
        for (w, _) in g.out_edges(pick) {
            score[w] -= u[pick] * u[w];
        }
        for &(i, j) in g.edges() {
            if j == pick {
                score[i] -= u[pick] * u[i];
            }
        }
    }
    Ok(from_order(PolicyKind::NetShield, n, budget, order))
}

/// Dispatches on the policy kind; `seed` is only used by [`PolicyKind::Rand`].
pub fn baseline_policy(
    kind: PolicyKind,
    h: &HazardMatrix,
    budget: f64,
    seed: u64,
) -> Result<BaselinePolicy> {
    match kind {
        PolicyKind::Rand => rand_policy(h.graph().node_count(), budget, seed),
        PolicyKind::Degree => degree_policy(h.graph(), budget),
        PolicyKind::WDegree => wdegree_policy(h, budget),
        PolicyKind::NetShield => netshield_policy(h.graph(), budget),
    }
}
