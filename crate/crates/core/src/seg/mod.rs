//! Segmentation-side numerics: the penalized soft dice loss, its gradient,
//! pixel accuracy, and encoder/decoder shape arithmetic.

mod layers;
mod loss;
mod volume;

pub use layers::{
    lane_decoder_layers, lane_encoder_layers, propagate_shapes, receptive_field, LayerKind,
    LayerSpec, TensorShape, LANE_NET_INPUT,
};
pub use loss::{
    custom_dice_loss, custom_dice_loss_gradient, modify_ground_truth, pixel_accuracy, LossParams,
};
pub use volume::{volume_mean, ScoreVolume};
