//! Graph-level anomaly detection from multifaceted reconstruction errors.

pub mod error;
pub mod errorrep;
pub mod graph;
pub mod harness;
pub mod models;
pub mod occ;
pub mod synth;
pub mod theory;

pub use error::{MuseError, Result};
pub use graph::{Graph, GraphDataset};
