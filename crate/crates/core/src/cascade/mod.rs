//! Monte-Carlo cascade simulation.
//!
//! Final cascade sizes are estimated on live-edge graphs: an edge is live with its
//! end-to-end transmission probability `p_ij = 1 − exp(−H_ij)` and the infected set is
//! whatever the seeds reach. Coins are a pure function of `(seed, run, edge)`, so two
//! estimates with the same seed see the same live-edge graphs whatever their seed sets.
//! The event-driven simulator in [`temporal`] is kept to cross-check that equivalence.

mod greedy;
mod live;
mod temporal;

pub use greedy::{lazy_greedy, select_influencers, SetObjective};
pub use live::{
    estimate_influence, influence_samples, sample_live_edges, write_run_csv, InfluenceEstimate,
    LiveEdges,
};
pub use temporal::{simulate_ctic, CascadeOutcome};

use std::collections::BTreeSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Independent generator for one run: the ChaCha stream is the run index.
pub fn run_rng(seed: u64, run: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(run);
    rng
}

pub(crate) fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Uniform `[0,1)` coin for `edge` in the live-edge graph identified by `key`.
#[inline]
pub(crate) fn edge_coin(key: u64, edge: usize) -> f64 {
    let bits = mix64(key ^ (edge as u64).wrapping_mul(0xD6E8_FEB8_6659_FD93));
    (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

pub(crate) fn sample_key(seed: u64, run: u64) -> u64 {
    mix64(seed ^ mix64(run.wrapping_add(0x5851_F42D_4C95_7F2D)))
}

pub(crate) fn validate_seeds(n: usize, seeds: &[usize]) -> Result<Vec<usize>> {
    if seeds.is_empty() {
        return Err(Error::domain("the seed set is empty"));
    }
    if let Some(&s) = seeds.iter().find(|&&s| s >= n) {
        return Err(Error::domain(format!("seed node {s} is outside 0..{n}")));
    }
    Ok(seeds.iter().copied().collect::<BTreeSet<_>>().into_iter().collect())
}

/// Reusable BFS state: a visit stamp per node avoids clearing between runs.
pub(crate) struct Workspace {
    stamp: Vec<u32>,
    current: u32,
    queue: Vec<usize>,
}

impl Workspace {
    pub(crate) fn new(n: usize) -> Self {
        Workspace {
            stamp: vec![0; n],
            current: 0,
            queue: Vec::new(),
        }
    }

    pub(crate) fn next_round(&mut self) {
        self.current = self.current.wrapping_add(1);
        if self.current == 0 {
            self.stamp.iter_mut().for_each(|s| *s = 0);
            self.current = 1;
        }
        self.queue.clear();
    }

    #[inline]
    pub(crate) fn visit(&mut self, v: usize) -> bool {
        if self.stamp[v] == self.current {
            false
        } else {
            self.stamp[v] = self.current;
            self.queue.push(v);
            true
        }
    }
}
