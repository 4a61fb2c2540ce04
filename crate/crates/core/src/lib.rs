//! Simulator of a fully memristive three-layer network for noisy digit
//! recognition.
//!
//! Two cellular layers of diffusion (threshold-switch) memristors denoise
//! and edge-compensate each 3x3 window of the input; one feedforward layer of
//! drift memristors stores per-class templates as memristance and classifies
//! by summing Ohm's-law currents. A closed-form timing model reproduces the
//! pipelined hardware's speed figures.
//!
//! Everything is deterministic: noise comes from a pinned generator keyed by
//! `(seed, image index)`, and every reduction runs in a fixed order.

// `!(x >= 0.0)` checks also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dataset;
pub mod device;
pub mod encoding;
pub mod error;
pub mod image;
pub mod noise;
pub mod perf;
pub mod persistence;
pub mod pgm;
pub mod preprocess;
pub mod recognizer;

pub use dataset::{Dataset, Split, NUM_CLASSES};
pub use device::{DiffusionThreshold, DriftParams, DriftState, R_OFF, R_ON};
pub use error::{Error, Result};
pub use image::{Grid, Image};
pub use noise::NoiseConfig;
pub use perf::{PerfConfig, PerfReport};
pub use preprocess::{CurrentMap, PreprocessConfig, Window3x3};
pub use recognizer::{
    ConfusionMatrix, DriftArray, Evaluation, InferenceMode, TrainConfig, TrainingDrive,
};
