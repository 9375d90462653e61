//! Small dense-matrix autodiff engine: [`Tensor`] values, a reverse-mode
//! [`Tape`], a [`ParamStore`] with [`Adam`], and binary checkpoints.
//!
//! Everything is `f64` and single-threaded; independent trainers own
//! independent tapes and stores.

pub mod checkpoint;
pub mod error;
pub mod gradcheck;
pub mod params;
pub mod rng;
pub mod sparse;
pub mod tape;
pub mod tensor;

pub use error::{Result, TensorError};
pub use params::{Adam, ParamId, ParamStore};
pub use sparse::SparseMatrix;
pub use tape::{Tape, Var};
pub use tensor::Tensor;
