//! Command-line orchestration for the `eegimg` library: configuration,
//! file-mediated stages and the end-to-end pipeline.

pub mod cli;
pub mod config;
pub mod error;
pub mod model;
pub mod pipeline;
pub mod provenance;
pub mod stages;

pub use config::{EncodeVariant, Fusion, PipelineConfig, SplitConfig};
pub use error::{CliError, Result};
pub use pipeline::{run_pipeline, RunReport, Timings};
