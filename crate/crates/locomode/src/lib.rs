//! Transportation-mode classification from smartphone motion sensors.
//!
//! `locomode` reproduces a complete classification stack for 5-second blocks
//! of phone sensor data (accelerometer, gyroscope, magnetometer, linear
//! acceleration, barometric pressure), labeled with one of eight
//! locomotion/transportation modes: Still, Walking, Run, Bike, Car, Bus,
//! Train and Subway.
//!
//! The stack, end to end:
//!
//! - [`ingest`] parses challenge-style channel/label text files into
//!   [`data::SensorBlock`]s and merges phone positions.
//! - [`pipeline`] applies majority-vote labeling, collapses each time sample
//!   to a single activation feature (sum of per-sensor magnitudes plus
//!   pressure), reshapes 500-sample blocks into 5×100 windows, balances
//!   classes by under-sampling and min-max normalizes into (−1, 1).
//! - [`nn`] implements the model — two 64-unit LSTM layers with 25 % inverted
//!   dropout and a dense softmax head — with exact backpropagation through
//!   time in 64-bit arithmetic.
//! - [`train`] runs Adam over categorical cross-entropy with
//!   best-on-validation checkpointing, and writes per-epoch metric curves.
//! - [`eval`] produces predictions, the 8×8 confusion matrix and the
//!   accuracy/precision/recall/F1 report family.
//! - [`synth`] generates a format-compatible synthetic corpus so everything
//!   above is testable at desk scale.
//! - [`commands`] wires the stages into the CLI subcommands.
//!
//! The `examples/` directory holds one runnable program per capability; start
//! with `train_synthetic`.

pub mod commands;
pub mod data;
pub mod error;
pub mod eval;
pub mod ingest;
pub mod nn;
pub mod pipeline;
pub mod rng;
pub mod synth;
pub mod train;

pub use data::{Dataset, Label, Position, RngSeed, SensorBlock, Split, WindowSample};
pub use error::{Error, Result};
