//! Evaluation runs, Pass@k, report aggregation and rendering, configuration
//! and the command line.

pub mod cli;
mod config;
mod eval;
mod passk;
mod report;

use std::path::Path;

use thiserror::Error;

use crate::model::{read_manifest, SampleInfo};

pub use config::{
    EvalConfig, GeneratorKind, GeneratorSection, HarnessConfig, JudgeKind, JudgeSection, LocalOrHttp, ServiceSection,
    Strategy,
};
pub use eval::{run_eval, EvalContext, EvalOutput, SampleRun};
pub use passk::{outcome, pass_at_k, pass_at_k_outcomes, Outcome, PassAtK};
pub use report::{
    aggregate_report, render_csv, render_json, render_markdown, CellReport, DimensionReport, Report, Stat, TaskReport,
    CSV_HEADER,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("verdict references unknown sample `{0}`")]
    Orphan(String),
    #[error("{0}")]
    Runtime(String),
}

/// Sample labels from a dataset directory (its manifest) or from a JSON
/// file holding a list of sample infos.
pub fn load_infos(path: &Path) -> Result<Vec<SampleInfo>, HarnessError> {
    if path.is_dir() {
        return read_manifest(path)
            .map(|m| m.infos())
            .map_err(|e| HarnessError::Runtime(e.to_string()));
    }
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::Runtime(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| HarnessError::Runtime(format!("{}: {e}", path.display())))
}
