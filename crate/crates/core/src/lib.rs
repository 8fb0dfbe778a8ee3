//! Learn a class-driven 1D representation of a multivariate network's
//! nodes, explain it per attribute, and build interpretable composite
//! variables that resemble it.
//!
//! The pipeline runs in steps:
//!
//! 1. [`features`]: centralities, dataset attributes, and neighbor
//!    aggregates, pruned for redundancy.
//! 2. [`learn`]: label the two ends of an output attribute and train a
//!    classifier whose last hidden layer is the learned representation.
//! 3. [`simplify`]: project the hidden representation onto a regularized
//!    discriminant direction, giving one value per node.
//! 4. [`attribution`]: Shapley contributions of each input attribute to
//!    that value, and a ranking by mean magnitude.
//! 5. [`composite`]: unit-norm linear combinations of chosen attributes
//!    that maximize Pearson or Spearman correlation with it.
//!
//! [`viz`] computes density rasters, swarm coordinates, histograms, and
//! layouts; [`session`] ties the steps together, persists them, and serves
//! them over a JSON message protocol.

pub mod attribution;
pub mod composite;
pub mod error;
pub mod features;
pub mod graph;
pub mod learn;
pub mod session;
pub mod simplify;
pub mod stats;
pub mod synth;
pub mod viz;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/networks.md")]
    mod networks {}
    #[doc = include_str!("../../../book/src/features.md")]
    mod features {}
    #[doc = include_str!("../../../book/src/representation.md")]
    mod representation {}
    #[doc = include_str!("../../../book/src/attribution.md")]
    mod attribution {}
    #[doc = include_str!("../../../book/src/composites.md")]
    mod composites {}
    #[doc = include_str!("../../../book/src/views.md")]
    mod views {}
    #[doc = include_str!("../../../book/src/sessions.md")]
    mod sessions {}
}
