//! Operational-risk modelling core.
//!
//! The pipeline runs in five stages, each in its own module:
//!
//! - [`corrstats`]: lagged cross/auto-correlation estimates and the squared
//!   deviation from an imposed exponential correlation target.
//! - [`synthgen`]: synthetic loss series whose correlations are fitted to a
//!   target by strict-descent random swaps.
//! - [`aggregate`]: per-process sums over non-overlapping windows of `T` steps.
//! - [`bnlearn`]: equal-width discretization, BIC structure search, smoothed
//!   conditional probability tables, joint and marginal distributions.
//! - [`varengine`]: repeated discrete convolution up to a horizon and the
//!   99.9-percentile sampling estimator of Value-at-Risk.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, configuration
//! and the command line live in the `oprisk` crate.

#![cfg_attr(not(test), no_std)]
// `!(a < b)` comparisons are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod aggregate;
pub mod bnlearn;
pub mod corrstats;
mod error;
mod loss;
pub mod seed;
pub mod synthgen;
pub mod varengine;

pub use crate::aggregate::{extract, ExtractedDatabase};
pub use crate::corrstats::{CorrelationEstimate, CorrelationTarget};
pub use crate::error::{Error, Result};
pub use crate::loss::LossMatrix;
pub use crate::varengine::{BinnedPdf, VarReport};
