//! Output consensus for networks of heterogeneous, input-constrained,
//! discrete-time linear agents tracking an affine-in-time reference.
//!
//! Each agent runs an internal-model tracking controller whose reference is
//! filtered by a per-agent reference governor. The governor's admissible
//! region is the maximal constraint-admissible invariant set of the combined
//! agent/reference system, computed despite the reference model being
//! unstable (a 2x2 Jordan block at 1). Agreement between agents happens via a
//! projected consensus iteration on the reference states over a switching
//! directed graph.
//!
//! Module map:
//! - [`numerics`]: simplex LP, 2-D projection, eigen classification, DARE.
//! - [`polytope`]: halfspace sets and LP-backed geometry.
//! - [`regulator`]: assumption checks and the tracking-regulator equations.
//! - [`mcai`]: the invariant set, its lifting and membership tests.
//! - [`governor`]: the per-agent reference governor.
//! - [`network`]: switching graphs, Perron matrices, projected consensus.
//! - [`simulator`]: full multi-agent closed-loop runs and metrics.
//! - [`config`]: run configuration, built-in scenarios.
//! - [`output`]: CSV traces, SVG plots, JSON reports.

pub mod config;
pub mod governor;
pub mod mcai;
pub mod network;
pub mod numerics;
pub mod output;
pub mod polytope;
pub mod regulator;
pub mod simulator;

// pub use config::RunConfig;
// pub use simulator::{Scenario, SimTrace};
