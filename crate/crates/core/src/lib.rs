//! Outlier-robust weighted scaling for metabolomics matrices, with the
//! surrounding benchmark pipeline: synthetic data and contamination, four
//! classifiers, repeated cross-validation metrics and differential calling.

pub mod classify;
pub mod data;
pub mod de;
pub mod error;
pub mod eval;
pub mod rng;
pub mod robust;
pub mod scaling;
pub mod synth;

pub use data::{ingest_csv, transpose_for_classification, Label, LabelVector, MetaboliteMatrix};
pub use error::{Error, Result};
pub use robust::RobustParams;
pub use scaling::{scale, ScaledMatrix, ScalingKind, ScalingMethod};
