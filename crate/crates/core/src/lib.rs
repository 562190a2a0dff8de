//! Dense tensor algebra, tensor networks and tensor decompositions.
//!
//! Everything is generic over a real [`Scalar`] (`f32` or `f64`); the
//! [`Tensor`] alias fixes the usual `f64` choice. Indices in public APIs,
//! file formats and error messages are 1-based.

pub mod decomp;
pub mod elementwise;
pub mod error;
pub mod factor;
pub mod io;
pub mod network;
pub mod products;
pub mod scalar;
pub mod tensor;

pub use error::{Error, Result};
pub use scalar::Scalar;
pub use tensor::{linear_index, multi_index, DenseTensor, IndexRange, IntoShape, Shape};

/// Double-precision dense tensor.
pub type Tensor = DenseTensor<f64>;
/// Single-precision dense tensor.
pub type Tensor32 = DenseTensor<f32>;
