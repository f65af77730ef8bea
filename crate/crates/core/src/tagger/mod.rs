//! The hierarchical multi-task tagger: model assembly, training,
//! prediction and checkpoints.

pub mod checkpoint;
mod config;
mod model;
mod train;

pub use config::{ModelConfig, Sampling};
pub use model::{argmax, Model, TaskHead};
pub use train::{epoch_schedule, train, train_with, EpochLoss, TrainLog};
