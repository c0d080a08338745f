//! Unsupervised training: MEF-SSIM loss with exact gradients, Adam, a
//! seeded training loop and LUT extraction from a trained network.

mod adam;
mod extract;
mod mef_ssim;
mod trainer;

pub use crate::network::GradientSet;
pub use adam::{adam_step, AdamState, ADAM_EPS};
pub use extract::{extract_luts, extract_luts_with, DEFAULT_PROBE_SIZE};
pub use mef_ssim::{mef_ssim_score, MefSsimReference, DEFAULT_STABILITY_C, DEFAULT_WINDOW};
pub use trainer::{
    gradients, loss, mean_loss, prepare_dataset, sample_gradients, sample_loss, train, train_logged, train_samples,
    TrainConfig, TrainingSample,
};

#[cfg(test)]
mod tests;
