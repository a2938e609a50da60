//! Photovoltaic power forecasting toolkit.
//!
//! The pipeline runs in five stages, each usable on its own:
//!
//! 1. [`ingest`] — parse and validate the 10-minute weather CSV, audit gaps.
//! 2. [`features`] — select and normalize model inputs, build supervised
//!    datasets, split chronologically, and generate synthetic fixtures.
//! 3. [`models`] — fit a multiple linear regression (normal equations) or a
//!    from-scratch multilayer perceptron, persist versioned artifacts.
//! 4. [`physics`] — convert irradiance to array power via `P = A·r·G·PR`
//!    and integrate to daily energy.
//! 5. [`eval`] — absolute-percentage-error evaluation per interval and per
//!    day, with CSV report output.
//!
//! The [`cli`] module orchestrates the stages behind the `pvcast` binary and
//! [`report`] renders the evaluation CSVs as SVG charts.

pub mod cli;
pub mod config;
pub mod eval;
pub mod features;
pub mod ingest;
pub mod models;
pub mod physics;
pub mod report;
pub mod rng;

mod io_util;

pub use io_util::write_atomic;
