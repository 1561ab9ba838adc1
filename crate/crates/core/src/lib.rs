//! Budget-constrained activity shaping for continuous-time information cascades.
//!
//! The crate minimizes the hazard radius (the leading eigenvalue of the symmetrized,
//! time-integrated hazard matrix) over budgeted edge or node interventions with a
//! projected subgradient method, then checks the resulting policies against baselines
//! with Monte-Carlo cascade simulation.
//!
//! * [`graph`]: edge-list ingestion, SCCs, hazard and probability matrices.
//! * [`spectral`]: hazard radius, subgradient, influence upper bound.
//! * [`shaping`]: feasible sets, box/L1 projection, the NetShape loops.
//! * [`cascade`]: live-edge and temporal cascade simulation, influencer selection.
//! * [`baselines`]: random, degree, weighted-degree and NetShield policies.
//! * [`experiment`]: configuration, budget sweeps, CSV and SVG output.

pub mod baselines;
pub mod cascade;
pub mod error;
pub mod experiment;
pub mod graph;
pub mod shaping;
pub mod spectral;

pub use error::{Error, Result};
