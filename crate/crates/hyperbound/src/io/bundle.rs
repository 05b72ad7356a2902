//! Result bundle: the selected-edges file plus the JSON run summary.
//!
//! The summary's field names are a compatibility contract; tools parse
//! them, so they only change with the format version string.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hypergraph::EdgeId;
use crate::metrics::RunReport;

pub const FORMAT_VERSION: &str = "hyperbound/1";

#[derive(Debug, Error)]
pub enum BundleError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("bundle self-check failed: summary says {expected} edges, selected file holds {actual}")]
    SelfCheck { expected: usize, actual: usize },
}

/// Engine parameters recorded with a run.
///
/// The worker count is deliberately not recorded: the result is independent
/// of it, and bundles produced with different worker counts must stay
/// byte-identical.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SummaryConfig {
    pub seed: u64,
    /// `"hash"` or `"weight"`.
    pub ordering: String,
    /// `null` means unbounded.
    pub max_rounds: Option<u64>,
    pub early_stop: bool,
    pub default_capacity: u64,
}

/// The JSON summary document of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub format: String,
    pub config: SummaryConfig,
    pub report: RunReport,
}

impl RunSummary {
    pub fn new(config: SummaryConfig, report: RunReport) -> Self {
        Self {
            format: FORMAT_VERSION.to_string(),
            config,
            report,
        }
    }
}

/// One edge id per line, ascending, with a trailing newline unless empty.
pub fn render_selected_edges(matching: &[EdgeId]) -> String {
    let mut out = String::new();
    for id in matching {
        out.push_str(&id.to_string());
        out.push('\n');
    }
    out
}

/// Deterministic pretty-printed JSON with a trailing newline.
pub fn render_summary(summary: &RunSummary) -> Result<String, BundleError> {
    let mut text = serde_json::to_string_pretty(summary)?;
    text.push('\n');
    Ok(text)
}

/// Writes both bundle files and re-reads the selected-edges file to verify
/// that its line count matches the summary's `matched_count`.
pub fn write_result_bundle(
    selected_path: &Path,
    summary_path: &Path,
    matching: &[EdgeId],
    summary: &RunSummary,
) -> Result<(), BundleError> {
    if matching.len() != summary.report.matched_count {
        return Err(BundleError::SelfCheck {
            expected: summary.report.matched_count,
            actual: matching.len(),
        });
    }
    std::fs::write(selected_path, render_selected_edges(matching))?;
    std::fs::write(summary_path, render_summary(summary)?)?;

    let written = std::fs::read_to_string(selected_path)?;
    let actual = written.lines().filter(|l| !l.is_empty()).count();
    if actual != summary.report.matched_count {
        return Err(BundleError::SelfCheck {
            expected: summary.report.matched_count,
            actual,
        });
    }
    Ok(())
}
