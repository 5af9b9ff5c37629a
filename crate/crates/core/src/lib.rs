//! Free multiplicative convolution on the positive half-line and the unit
//! circle: transform calculus, infinitely divisible laws, and limit
//! diagnostics for triangular arrays of atomic measures.

pub mod arrays;
pub mod error;
pub mod freeconv;
pub mod infdiv;
pub mod mc;
pub mod measure;
pub mod series;
pub mod transforms;
pub mod verify;

pub use error::{Error, Result};
pub use measure::{AtomicMeasure, Atom, FiniteMeasure, PushMap, Space};
pub use series::TruncatedSeries;
