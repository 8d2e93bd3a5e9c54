//! File formats and command-line front end for [`latentmap_core`].
//!
//! Datasets are a pair of CSV files (latents and labels), fitted maps are
//! JSON documents, and disentanglement reports are CSV. See [`dataset`],
//! [`model`] and [`report`] for the exact layouts.

pub mod cli;
pub mod dataset;
mod error;
pub mod model;
pub mod report;

pub use dataset::{load_dataset, load_latents, save_dataset, save_latents};
pub use error::{Error, Result};
pub use model::{load_model, save_model};
pub use report::save_report;
