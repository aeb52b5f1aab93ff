//! Dynamic attention balancing for multi-image attention tensors.
//!
//! A decoder that reads several images tends to spread its visual attention
//! unevenly: one image soaks up most of the mass while another is barely
//! looked at. This crate measures the share of attention each image span
//! receives from a query row and shifts every token of an image by the same
//! amount so that the per-image shares move toward their mean. Inside an
//! image the relative structure of the weights is untouched; only the level
//! of each image changes.
//!
//! ```
//! use dab_core::{rebalance_row, RebalanceConfig, SegmentMap};
//!
//! let segments = SegmentMap::contiguous(&[2, 2], 1).unwrap();
//! let row = [0.10, 0.10, 0.30, 0.30, 0.20];
//! let (balanced, clamps) = rebalance_row(&row, &segments, &RebalanceConfig::default()).unwrap();
//! assert_eq!(clamps, 0);
//! assert!((balanced[0] - 0.15).abs() < 1e-12);
//! assert!((balanced[2] - 0.25).abs() < 1e-12);
//! ```

mod config;
mod error;
pub mod interchange;
mod ratios;
mod rebalance;
mod segments;
mod tensor;

pub use config::{ClampMode, RebalanceConfig, Scope};
pub use error::{DabError, Result};
pub use ratios::{head_eligible, segment_ratios, RatioVector};
pub use rebalance::{rebalance_row, rebalance_tensor, RebalanceOutcome};
pub use segments::SegmentMap;
pub use tensor::AttentionTensor;

/// Absolute tolerance for row-stochasticity checks.
pub const ROW_SUM_TOLERANCE: f64 = 1e-9;
