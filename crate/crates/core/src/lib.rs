//! Supervised latent-space factorization.
//!
//! Fits a linear map `y = z·M + b` from generator latent vectors `z ∈ ℝᴰ` to
//! attribute scores `y ∈ [0, 1]ᴬ`, optionally under the orthogonality penalty
//! `‖MᵀM − I‖²_F`. Column `i` of `M` is the edit direction for attribute `i`;
//! moving a latent along it changes every attribute whose direction is not
//! orthogonal to it. The [`editor`] module quantifies that leakage and
//! [`linmap::cosine_matrix`] reports pairwise direction alignment.
//!
//! The crate is `no_std` and only needs `alloc`. The optional `std` feature
//! (on by default) is used solely to measure wall time in [`trainer::fit`].

#![no_std]
// `!(x > y)` is used so that NaN fails range checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(any(feature = "std", test))]
extern crate std;

pub mod dataset;
pub mod editor;
mod error;
pub mod linalg;
pub mod linmap;
mod matrix;
pub mod rng;
pub mod trainer;

pub use dataset::{
    planted_directions, sample_latents, synth_ground_truth, AttributeSchema, Link, PairedDataset, SyntheticSpec,
};
pub use editor::{compare_maps, edit_batch, edit_latent, leakage, DisentanglementReport, EditResult, ReportRow};
pub use error::{Error, Result};
pub use linmap::{
    cosine_matrix, fit_closed_form, gradient, loss, predict, top_correlated, CosineReport, Gradient, LinearMap,
    LossBreakdown, TrainMeta,
};
pub use matrix::Matrix;
pub use trainer::{fit, grad_check, one_cycle, FitReport, Schedule, TrainConfig};

/// Default orthogonality weight.
pub const DEFAULT_LAMBDA: f64 = 2.0;
