//! From-scratch dense network: forward and backward passes, dropout, losses,
//! class balancing, Adam and plateau learning-rate scheduling.

mod adam;
mod loss;
mod mlp;
mod plateau;
mod snapshot;
mod train;

pub use adam::{Adam, AdamConfig};
pub use loss::{ce_loss, class_balance_weights, oce_loss, ordinal_distance, LossKind, CLIP_EPS};
pub use mlp::{init_model, Architecture, BatchPass, Dense, Gradients, Mlp, Mode, Real, DROPOUT_RATES, HIDDEN_WIDTH};
pub use plateau::{PlateauConfig, PlateauScheduler};
pub use snapshot::{LayerData, Snapshot, SNAPSHOT_FORMAT, SNAPSHOT_VERSION};
pub use train::{evaluate_loss, to_matrices, train, EpochRecord, TrainConfig, TrainedModel};
