use std::io::Write;

use rand::Rng;
use rayon::prelude::*;

use super::{edge_coin, sample_key, validate_seeds, Workspace};
use crate::error::{Error, Result};
use crate::graph::{Graph, ProbabilityMatrix};

/// A sampled set of live edges, stored as a bitset over the global edge index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LiveEdges {
    words: Vec<u64>,
    len: usize,
}

impl LiveEdges {
    pub(crate) fn from_fn(len: usize, mut live: impl FnMut(usize) -> bool) -> Self {
        let mut words = vec![0u64; len.div_ceil(64)];
        for e in 0..len {
            if live(e) {
                words[e / 64] |= 1 << (e % 64);
            }
        }
        LiveEdges { words, len }
    }

    #[inline]
    pub fn contains(&self, e: usize) -> bool {
        self.words[e / 64] >> (e % 64) & 1 == 1
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(|&e| self.contains(e))
    }
}

/// Keeps each edge independently with its probability.
pub fn sample_live_edges<R: Rng + ?Sized>(p: &ProbabilityMatrix, rng: &mut R) -> LiveEdges {
    let values = p.values();
    LiveEdges::from_fn(values.len(), |e| rng.random::<f64>() < values[e])
}

/// Live-edge graph number `run` of the coupled family keyed by `seed`.
pub(crate) fn coupled_live_edges(p: &ProbabilityMatrix, seed: u64, run: u64) -> LiveEdges {
    let key = sample_key(seed, run);
    let values = p.values();
    LiveEdges::from_fn(values.len(), |e| edge_coin(key, e) < values[e])
}

/// Nodes reachable from the queued seeds over edges accepted by `live`; returns the count.
pub(crate) fn spread(
    graph: &Graph,
    ws: &mut Workspace,
    seeds: &[usize],
    mut live: impl FnMut(usize) -> bool,
) -> usize {
    ws.next_round();
    for &s in seeds {
        ws.visit(s);
    }
    let mut head = 0;
    while head < ws.queue.len() {
        let v = ws.queue[head];
        head += 1;
        for (w, e) in graph.out_edges(v) {
            if ws.stamp[w] != ws.current && live(e) {
                ws.visit(w);
            }
        }
    }
    ws.queue.len()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InfluenceEstimate {
    pub mean: f64,
    /// Sample standard deviation over `sqrt(runs)`.
    pub std_error: f64,
    pub runs: usize,
}

impl InfluenceEstimate {
    pub fn from_sizes(sizes: &[usize]) -> Self {
        let runs = sizes.len();
        let mean = sizes.iter().map(|&s| s as f64).sum::<f64>() / runs as f64;
        let var = if runs > 1 {
            sizes
                .iter()
                .map(|&s| (s as f64 - mean).powi(2))
                .sum::<f64>()
                / (runs - 1) as f64
        } else {
            0.0
        };
        InfluenceEstimate {
            mean,
            std_error: (var / runs as f64).sqrt(),
            runs,
        }
    }
}

/// Final cascade size of every run, in run order.
pub fn influence_samples(
    p: &ProbabilityMatrix,
    seeds: &[usize],
    runs: usize,
    seed: u64,
) -> Result<Vec<usize>> {
    let graph = p.graph();
    let seeds = validate_seeds(graph.node_count(), seeds)?;
    if runs == 0 {
        return Err(Error::domain("at least one run is required"));
    }
    let values = p.values();
    let sizes = (0..runs as u64)
        .into_par_iter()
        .map_init(
            || Workspace::new(graph.node_count()),
            |ws, run| {
                let key = sample_key(seed, run);
                spread(graph, ws, &seeds, |e| edge_coin(key, e) < values[e])
            },
        )
        .collect();
    Ok(sizes)
}

/// Mean final size of the cascade started from `seeds`, over `runs` live-edge graphs.
pub fn estimate_influence(
    p: &ProbabilityMatrix,
    seeds: &[usize],
    runs: usize,
    seed: u64,
) -> Result<InfluenceEstimate> {
    Ok(InfluenceEstimate::from_sizes(&influence_samples(
        p, seeds, runs, seed,
    )?))
}

/// `run,infected_count` CSV of per-run outcomes.
pub fn write_run_csv<W: Write>(sizes: &[usize], mut out: W) -> std::io::Result<()> {
    writeln!(out, "run,infected_count")?;
    for (r, s) in sizes.iter().enumerate() {
        writeln!(out, "{r},{s}")?;
    }
    Ok(())
}
