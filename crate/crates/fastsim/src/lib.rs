//! Parameterized detector simulation on top of the `evfwk` pipeline.
//!
//! Generated particles go in, reconstructed-level objects come out: charged
//! tracks are carried through the magnetic field to the tracker envelope,
//! energy is deposited and smeared in a projective tower grid, efficiency
//! and resolution effects are applied from binned lookup tables, and the
//! result is clustered into jets with optional flavor and tau tags.
//!
//! Everything downstream of the event source is deterministic for a fixed
//! `global_seed`: each task draws from its own per-event random stream and
//! every iteration order is pinned, so a pipeline produces byte-identical
//! output regardless of worker count.
//!
//! The building blocks (propagation, towers, response, clustering, tagging)
//! are plain functions usable on their own; [`tasks::SimFactory`] wraps them
//! as pipeline tasks keyed by `kind` strings in the config.

pub mod calorimeter;
pub mod candidate;
pub mod cluster;
pub mod detector;
pub mod isolation;
pub mod kinematics;
pub mod propagate;
pub mod response;
pub mod source;
pub mod tagging;
pub mod tasks;

pub use candidate::{Candidate, Flags};
pub use cluster::{cluster_jets, JetDefinition, PseudoJet};
pub use detector::{BinnedTable, DetectorConfig};
pub use kinematics::FourMomentum;
pub use source::{HepMcSource, SyntheticSource};
pub use tasks::SimFactory;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Propagation starts from a point already past the tracker envelope.
    #[error("production vertex ({0}, {1}, {2}) m is outside the tracker")]
    VertexOutsideDetector(f64, f64, f64),
    /// Isolation is a pt ratio, undefined for a zero-pt reference.
    #[error("isolation reference candidate has zero pt")]
    ZeroPt,
}
