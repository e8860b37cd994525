//! Experiment runner and file formats for `phidim-core`.
//!
//! A run takes one JSON [`config::ExperimentConfig`], executes it with
//! [`runner::execute`] and writes CSV tables plus a summary JSON with
//! [`runner::write_artifacts`]. Outputs are deterministic: the same config
//! and seed give byte-identical files.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod catalog;
pub mod config;
pub mod io;
pub mod runner;

pub use catalog::{Kind, CATALOG};
pub use config::{ExperimentConfig, LoadedConfig, Tolerances};
pub use runner::{execute, write_artifacts, Artifacts, Check, RunOptions};

use serde_json::json;

/// Why a run did not succeed. Each variant maps to a process exit code.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RunError {
    #[error("invalid configuration: {0}")]
    Validation(String),
    #[error("{0}")]
    Budget(String),
    #[error("{axiom} fails: {detail}")]
    Axiom { axiom: String, detail: String },
    #[error("tolerance checks failed: {}", .0.join(", "))]
    Tolerance(Vec<String>),
    #[error("io: {0}")]
    Io(String),
}

impl From<phidim_core::Error> for RunError {
    fn from(e: phidim_core::Error) -> Self {
        if e.is_budget() {
            RunError::Budget(e.to_string())
        } else {
            RunError::Validation(e.to_string())
        }
    }
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Io(_) => 1,
            RunError::Validation(_) => 2,
            RunError::Budget(_) => 3,
            RunError::Axiom { .. } | RunError::Tolerance(_) => 4,
        }
    }

    fn tag(&self) -> &'static str {
        match self {
            RunError::Validation(_) => "validation",
            RunError::Budget(_) => "budget",
            RunError::Axiom { .. } => "axiom",
            RunError::Tolerance(_) => "tolerance",
            RunError::Io(_) => "io",
        }
    }

    /// Machine-readable form written to standard error.
    pub fn to_json(&self) -> serde_json::Value {
        let mut v = json!({ "error": self.tag(), "message": self.to_string(), "exit_code": self.exit_code() });
        match self {
            RunError::Axiom { axiom, .. } => v["axiom"] = json!(axiom),
            RunError::Tolerance(names) => v["failed"] = json!(names),
            _ => {}
        }
        v
    }
}
