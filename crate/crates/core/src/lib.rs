//! Multi-exposure image fusion through learned per-exposure 1D lookup tables.
//!
//! A small attention CNN is trained without ground truth on exposure stacks
//! to predict per-pixel fusion weights. Probing it with constant gray stacks
//! collapses it into one 256-entry table per exposure; deployment then needs
//! only a table lookup per low-res pixel, guided-filter upsampling and an
//! alpha blend.
//!
//! Runnable walkthroughs live in `examples/`.

pub mod baseline;
pub mod cli;
pub mod error;
pub mod imgio;
pub mod lut_engine;
pub mod metrics;
pub mod network;
pub mod synth;
pub mod training;

pub use error::{Error, Result};
