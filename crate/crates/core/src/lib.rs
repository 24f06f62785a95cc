//! EEG-to-image encoding, texture descriptors, multi-modal feature fusion
//! and small from-scratch classifiers.
//!
//! The crate is organised bottom-up:
//!
//! - [`trial`]: trial data model, the `EEGT` blob container, cleaning and
//!   per-channel preprocessing.
//! - [`encode`]: grayscale image tensors built from trials (`EEGI` format, PNG).
//! - [`texture`]: GLCM/Haralick, Hu moments, LBP and the feature-matrix
//!   file formats (`EEGF`, CSV).
//! - [`fusion`]: subject averaging, standard scaling, concatenation,
//!   vertical stacking and ridge regression between modalities.
//! - [`classify`]: kNN, softmax regression, one-vs-rest RBF SVM and
//!   evaluation reports.
//! - [`split`]: stratified train/validation/test assignment grouped by
//!   stimulus.

pub mod classify;
pub mod encode;
mod binio;
mod error;
pub mod fusion;
pub mod linalg;
pub mod split;
pub mod texture;
pub mod trial;

pub use error::{Error, Result};
