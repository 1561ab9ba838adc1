use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rand::Rng;

use super::validate_seeds;
use crate::error::{Error, Result};
use crate::graph::HazardMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct CascadeOutcome {
    /// Infected nodes in increasing id order.
    pub infected: Vec<usize>,
    /// Infection time per node, `f64::INFINITY` when never reached.
    pub times: Vec<f64>,
}

struct Event {
    time: f64,
    node: usize,
}

impl PartialEq for Event {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Event {}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Event {
    // min-heap on time, then node
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .time
            .total_cmp(&self.time)
            .then(other.node.cmp(&self.node))
    }
}

/// Event-driven continuous-time cascade.
///
/// Each edge carries the constant rate `H_ij` during the unit interval after its source
/// is infected and zero afterwards, so its integrated hazard is `H_ij` and it fires with
/// probability `1 − exp(−H_ij)`. Infections later than `horizon` are discarded.
pub fn simulate_ctic<R: Rng + ?Sized>(
    h: &HazardMatrix,
    seeds: &[usize],
    horizon: f64,
    rng: &mut R,
) -> Result<CascadeOutcome> {
    if !(horizon > 0.0) {
        return Err(Error::domain(format!("horizon must be positive, got {horizon}")));
    }
    let graph = h.graph();
    let n = graph.node_count();
    let seeds = validate_seeds(n, seeds)?;
    let rates = h.values();
    let mut times = vec![f64::INFINITY; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    for &s in &seeds {
        times[s] = 0.0;
        heap.push(Event { time: 0.0, node: s });
    }
    while let Some(Event { time, node }) = heap.pop() {
        if done[node] {
            continue;
        }
        done[node] = true;
        for (w, e) in graph.out_edges(node) {
            let rate = rates[e];
            if done[w] || rate <= 0.0 {
                continue;
            }
            let u: f64 = rng.random();
            let delay = -(-u).ln_1p() / rate;
            if delay > 1.0 {
                continue;
            }
            let t = time + delay;
            if t <= horizon && t < times[w] {
                times[w] = t;
                heap.push(Event { time: t, node: w });
            }
        }
    }
    let infected = (0..n).filter(|&v| times[v].is_finite()).collect();
    Ok(CascadeOutcome { infected, times })
}
