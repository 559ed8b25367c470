//! Imbalanced ordinal classification of group-collaboration quality.
//!
//! The pipeline turns coded annotation timelines ([`corpus`]) into
//! normalized histogram features, optionally oversamples them with controlled
//! Mixup ([`augment`]), trains a dense network with cross-entropy or ordinal
//! cross-entropy ([`nn`]) and scores it with leave-one-group-out
//! cross-validation ([`eval`]). [`synth`] generates seeded stand-in corpora.

pub mod augment;
pub mod corpus;
mod error;
pub mod eval;
pub mod nn;
pub mod synth;
mod util;

pub use error::{Error, Result};
pub use util::{argmax, rng_stream};

/// Crate version plus the source revision it was built from.
pub const VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), " (", env!("ORDCOLLAB_REVISION"), ")");

pub fn version_string() -> String {
    VERSION.to_string()
}
