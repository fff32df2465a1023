//! Friendship paradox statistics on circular random geometric graphs.
//!
//! The crate samples nodes on the unit circle from a periodic density,
//! builds the random geometric graph with an `O(n log n)` sweep, computes
//! the friendship index of every node and the graph's friendship paradox
//! `F_n`, and provides the deterministic predictions (asymptotic mean,
//! `tau_f`, conditional motif probabilities) and Monte Carlo machinery used
//! to check them.

pub mod bessel;
pub mod density;
pub mod error;
pub mod experiment;
pub mod moments;
pub mod paradox;
pub mod quadrature;
pub mod rgg;
pub mod rng;
pub mod theory;

pub use bessel::bessel_i0;
pub use density::{DensityKind, DensitySpec, PeriodicDensity};
pub use error::{Error, Result};
pub use experiment::{ConvergenceReport, ConvergenceRow, ExperimentGrid, RadiusRule, Verdict};
pub use moments::{boundary_sweep, estimate_motif, MomentEstimate};
pub use paradox::{friendship_index, friendship_paradox, ParadoxResult};
pub use rgg::{build_graph, circ_dist, naive_adjacency, CircularRGG, DegreeGraph, NodePositions};
pub use theory::{
    expected_fn, motif_prob_asymptotic, motif_prob_exact, reference_table, tau_f, MotifKind,
    Prediction, Regime,
};
