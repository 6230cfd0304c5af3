//! Hourglass network: configuration, parameters, forward/backward passes,
//! Adam, checkpoints and the training loop.

mod adam;
mod checkpoint;
mod hourglass;
pub(crate) mod layers;
mod params;
mod tensor;
mod train;

pub use adam::{adam_step, AdamState};
pub use checkpoint::{decode_checkpoint, encode_checkpoint, load_checkpoint, load_checkpoint_expecting, save_checkpoint};
pub use hourglass::{backward, forward, network_input, ActivationCache};
pub use params::{init_parameters, xavier_normal, Gradients, Head, HourglassConfig, Parameters, Tensor, IN_CHANNELS};
pub use tensor::FeatureMap;
pub use train::{batch_gradient, entry_gradient, train, train_with_progress, Checkpointing, Objective, Schedule, TrainingReport};
