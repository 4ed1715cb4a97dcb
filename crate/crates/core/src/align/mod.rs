//! The alignment projector and its training loop.
//!
//! Frozen video embeddings go through an MLP whose normalised output is
//! pulled towards the caption embedding of the same window. Gradients are
//! computed by hand, including through the output normalisation, and
//! parameters are updated with Adam.

mod adam;
mod checkpoint;
mod loss;
mod mlp;
mod projector;
mod train;

pub use adam::{adam_step, Adam, AdamConfig, Moments};
pub use checkpoint::{load_checkpoint, save_checkpoint, CHECKPOINT_MAGIC, CHECKPOINT_VERSION};
pub use loss::{
    cosine_loss, cosine_loss_grad, mse_loss, mse_loss_grad, preference_loss, preference_loss_grad, LossKind,
};
pub use mlp::{Dense, Mlp, MlpCache, Mode, Real, Rng};
pub use projector::{MlpProjector, Projector, ProjectorCache};
pub use train::{project, train_alignment, train_projector, TrainConfig, TrainReport};
