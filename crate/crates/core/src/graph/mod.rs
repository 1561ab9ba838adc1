//! Directed graph storage, edge-list ingestion and per-edge hazard/probability matrices.
//!
//! A [`Graph`] keeps its edges in two views: the global edge list in input order (the
//! stable indexing used by every per-edge vector in the crate) and a compressed sparse
//! row adjacency used for traversals.

mod hazard;
mod io;
mod scc;

pub use hazard::{
    assign_trivalency, hazard_from_probabilities, probabilities_from_hazard,
    probabilities_from_weights, sir_hazard, HazardMatrix, ProbabilityMatrix,
};
pub use io::{
    load_edge_list, read_edge_list_file, write_edge_list, EdgeListFormat, LoadOptions,
    LoadReport, LoadedGraph,
};
pub use scc::{largest_scc, strongly_connected_components};

use std::collections::HashSet;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    offsets: Vec<usize>,
    targets: Vec<usize>,
    edge_ids: Vec<usize>,
}

impl Graph {
    /// Builds a graph from an edge list whose order fixes the global edge index.
    /// Self-loops, duplicates and out-of-range endpoints are rejected.
    pub fn new(n: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(edges.len());
        for (e, &(i, j)) in edges.iter().enumerate() {
            if i >= n || j >= n {
                return Err(Error::domain(format!(
                    "edge {e} ({i},{j}) has an endpoint outside 0..{n}"
                )));
            }
            if i == j {
                return Err(Error::domain(format!("edge {e} is a self-loop on node {i}")));
            }
            if !seen.insert((i, j)) {
                return Err(Error::domain(format!("edge {e} ({i},{j}) is a duplicate")));
            }
        }
        Ok(Self::from_clean_edges(n, edges))
    }

    pub(crate) fn from_clean_edges(n: usize, edges: Vec<(usize, usize)>) -> Self {
        let mut offsets = vec![0usize; n + 1];
        for &(i, _) in &edges {
            offsets[i + 1] += 1;
        }
        for v in 0..n {
            offsets[v + 1] += offsets[v];
        }
        let mut cursor = offsets.clone();
        let mut targets = vec![0usize; edges.len()];
        let mut edge_ids = vec![0usize; edges.len()];
        for (e, &(i, j)) in edges.iter().enumerate() {
            let slot = cursor[i];
            targets[slot] = j;
            edge_ids[slot] = e;
            cursor[i] += 1;
        }
        Graph {
            n,
            edges,
            offsets,
            targets,
            edge_ids,
        }
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges in global index order.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> (usize, usize) {
        self.edges[e]
    }

    pub fn out_degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    /// Outgoing `(target, edge index)` pairs of `v`, in input order.
    pub fn out_edges(&self, v: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        let range = self.offsets[v]..self.offsets[v + 1];
        self.targets[range.clone()]
            .iter()
            .copied()
            .zip(self.edge_ids[range].iter().copied())
    }

    pub(crate) fn csr(&self) -> (&[usize], &[usize], &[usize]) {
        (&self.offsets, &self.targets, &self.edge_ids)
    }
}
