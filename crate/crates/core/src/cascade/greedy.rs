//! Lazy (CELF) greedy maximization and its use for influencer selection.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rayon::prelude::*;

use super::live::{coupled_live_edges, spread, LiveEdges};
use super::Workspace;
use crate::graph::{strongly_connected_components, ProbabilityMatrix};

/// Set function explored one element at a time.
pub trait SetObjective {
    /// Marginal gain of adding `candidate` to the committed set.
    fn gain(&mut self, candidate: usize) -> f64;

    /// Adds `chosen` to the committed set.
    fn commit(&mut self, chosen: usize);

    /// Gains of every element against the empty set.
    fn initial_gains(&mut self, n: usize) -> Vec<f64> {
        (0..n).map(|v| self.gain(v)).collect()
    }
}

struct Entry {
    gain: f64,
    node: usize,
    round: usize,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    // largest gain first, smallest node id on ties
    fn cmp(&self, other: &Self) -> Ordering {
        self.gain
            .total_cmp(&other.gain)
            .then(other.node.cmp(&self.node))
    }
}

/// Greedy selection of `k` out of `n` elements with lazily refreshed marginal gains.
/// Exact greedy for submodular objectives, whose gains only shrink.
pub fn lazy_greedy<O: SetObjective + ?Sized>(n: usize, k: usize, objective: &mut O) -> Vec<usize> {
    let k = k.min(n);
    let mut chosen = Vec::with_capacity(k);
    if k == 0 {
        return chosen;
    }
    let mut heap: BinaryHeap<Entry> = objective
        .initial_gains(n)
        .into_iter()
        .enumerate()
        .map(|(node, gain)| Entry {
            gain,
            node,
            round: 0,
        })
        .collect();
    while chosen.len() < k {
        let Some(top) = heap.pop() else { break };
        if top.round == chosen.len() {
            objective.commit(top.node);
            chosen.push(top.node);
        } else {
            let gain = objective.gain(top.node);
            heap.push(Entry {
                gain,
                node: top.node,
                round: chosen.len(),
            });
        }
    }
    chosen
}

/// Average reachability over a fixed family of live-edge graphs.
struct SampledCoverage<'a> {
    p: &'a ProbabilityMatrix,
    samples: Vec<LiveEdges>,
    covered: Vec<Workspace>,
    scratch: Workspace,
}

impl SampledCoverage<'_> {
    fn reach_counts(&self, live: &LiveEdges) -> Vec<u64> {
        // nodes of one SCC share their reachable set, so one BFS per component
        let graph = self.p.graph();
        let n = graph.node_count();
        let (comp, count) = strongly_connected_components(graph, |e| live.contains(e));
        let mut rep = vec![usize::MAX; count];
        for v in 0..n {
            if rep[comp[v]] == usize::MAX {
                rep[comp[v]] = v;
            }
        }
        let mut ws = Workspace::new(n);
        let sizes: Vec<u64> = rep
            .iter()
            .map(|&r| spread(graph, &mut ws, &[r], |e| live.contains(e)) as u64)
            .collect();
        comp.iter().map(|&c| sizes[c]).collect()
    }
}

impl SetObjective for SampledCoverage<'_> {
    fn gain(&mut self, candidate: usize) -> f64 {
        let graph = self.p.graph();
        let mut total = 0usize;
        for (live, covered) in self.samples.iter().zip(&self.covered) {
            if covered.stamp[candidate] == covered.current {
                continue;
            }
            let ws = &mut self.scratch;
            ws.next_round();
            ws.visit(candidate);
            let mut head = 0;
            while head < ws.queue.len() {
                let v = ws.queue[head];
                head += 1;
                for (w, e) in graph.out_edges(v) {
                    if ws.stamp[w] != ws.current
                        && covered.stamp[w] != covered.current
                        && live.contains(e)
                    {
                        ws.visit(w);
                    }
                }
            }
            total += ws.queue.len();
        }
        total as f64 / self.samples.len() as f64
    }

    fn commit(&mut self, chosen: usize) {
        let graph = self.p.graph();
        for (live, covered) in self.samples.iter().zip(self.covered.iter_mut()) {
            // extend the covered set in place: it keeps its stamp across commits
            if !covered.visit(chosen) {
                continue;
            }
            let start = covered.queue.len() - 1;
            let mut head = start;
            while head < covered.queue.len() {
                let v = covered.queue[head];
                head += 1;
                for (w, e) in graph.out_edges(v) {
                    if covered.stamp[w] != covered.current && live.contains(e) {
                        covered.visit(w);
                    }
                }
            }
        }
    }

    fn initial_gains(&mut self, n: usize) -> Vec<f64> {
        let totals = self
            .samples
            .par_iter()
            .map(|live| self.reach_counts(live))
            .reduce(
                || vec![0u64; n],
                |mut a, b| {
                    a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                    a
                },
            );
        totals
            .into_iter()
            .map(|t| t as f64 / self.samples.len() as f64)
            .collect()
    }
}

/// Picks `n0` influencers by lazy greedy on the average reachable-set size over
/// `samples` live-edge graphs drawn once up front. With `n0 = 1` this is the node with
/// the largest estimated influence.
pub fn select_influencers(
    p: &ProbabilityMatrix,
    n0: usize,
    samples: usize,
    seed: u64,
) -> Vec<usize> {
    let n = p.graph().node_count();
    if n0 >= n {
        return (0..n).collect();
    }
    let samples = samples.max(1);
    let drawn: Vec<LiveEdges> = (0..samples as u64)
        .into_par_iter()
        .map(|s| coupled_live_edges(p, seed, s))
        .collect();
    let mut covered: Vec<Workspace> = (0..samples).map(|_| Workspace::new(n)).collect();
    covered.iter_mut().for_each(Workspace::next_round);
    let mut objective = SampledCoverage {
        p,
        samples: drawn,
        covered,
        scratch: Workspace::new(n),
    };
    let mut chosen = lazy_greedy(n, n0, &mut objective);
    chosen.sort_unstable();
    chosen
}
