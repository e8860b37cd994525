//! Kernels for generalised lower Assouad dimensions.
//!
//! The crate is `no_std` (it needs `alloc`). Every length scale is carried in
//! log space through [`Scale`], so Moran cylinders far below the `f64` range
//! stay representable.
//!
//! Modules:
//! - [`dimfunc`]: dimension functions, rate windows and checkpoint interpolants.
//! - [`moran`]: homogeneous Moran schedules, level indices and the exact
//!   dimension formula, plus the two example constructions.
//! - [`covering`]: covering and packing numbers under the sup metric.
//! - [`estimator`]: per-scale quotient traces and their running minima.
//! - [`popcorn`]: popcorn graph samples and the isolated-point witness.
#![no_std]
#![forbid(unsafe_code)]
// `!(x < y)` is how NaN gets rejected along with out-of-order values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod count;
pub mod covering;
pub mod dimfunc;
mod error;
pub mod estimator;
pub mod math;
pub mod moran;
pub mod popcorn;
mod scale;

pub use count::Count;
pub use error::Error;
pub use scale::{ParseScaleError, Scale};

/// Crate version, embedded in reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
