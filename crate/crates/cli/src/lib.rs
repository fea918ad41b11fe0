//! Library surface of the batch front-end: experiment configuration,
//! presets, deterministic parallel execution and report writers. The
//! `pqdlab` binary is a thin wrapper over [`run`].

pub mod config;
pub mod presets;
pub mod report;
pub mod runner;
pub mod svg;

pub use config::{validate_config_text, ConfigError, ExperimentConfig, ExperimentKind};
pub use runner::{run, RunError};
