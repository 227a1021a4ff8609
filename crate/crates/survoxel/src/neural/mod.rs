//! Desk-scale neural building blocks: the position-encoding convolutional
//! layer (coordinate channels + 3D convolution forward pass), a softmax
//! head, the semi-supervised loss with class centroids, and a
//! finite-difference gradient checker for the loss.

mod conv;
mod loss;

pub use conv::{conv3d, coord_channels, pecl_forward, ConvKernel3D, FeatureMap3D};
pub use loss::{
    central_diff_gradient, grad_check_semisup, max_relative_error, semisup_loss,
    semisup_loss_grad, softmax_head, update_centroids, BatchItem, Centroids, GradCheckReport,
    LossParams, MiniBatch, SoftmaxHead,
};

use thiserror::Error;

use crate::volio::Resection;

/// Single-digit resection encoding used on the network input path
/// (the feature vector route uses the two-slot one-hot instead).
pub const RESECTION_DIGIT_GTR: f64 = 2.0;
pub const RESECTION_DIGIT_STR: f64 = 1.0;
pub const RESECTION_DIGIT_NA: f64 = 0.0;

pub fn resection_digit(r: Resection) -> f64 {
    match r {
        Resection::Gtr => RESECTION_DIGIT_GTR,
        Resection::Str => RESECTION_DIGIT_STR,
        Resection::Na => RESECTION_DIGIT_NA,
    }
}

#[derive(Debug, Error)]
pub enum NeuralError {
    #[error("kernel expects {expected} input channels, feature map has {got}")]
    ChannelMismatch { expected: usize, got: usize },
    #[error("kernel dims {0:?} must all be odd for same-padding")]
    EvenKernel((usize, usize, usize)),
    #[error("data length {got} does not match shape (expected {expected})")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("feature dim {got} does not match {what} dim {expected}")]
    DimMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("label {label} out of range for {n_classes} classes")]
    BadLabel { label: usize, n_classes: usize },
    #[error("batch must contain at least one item")]
    EmptyBatch,
    #[error("loss parameters invalid: {0}")]
    BadParams(String),
    #[error("gradient check hit a non-finite loss at a perturbed point")]
    NonFiniteLoss,
}
