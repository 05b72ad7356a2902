//! File formats and synthetic instance generation.
//!
//! Three text formats make up the external surface: tab-separated edge
//! lists, tab-separated capacity overrides, and the result bundle (selected
//! edge ids plus a JSON summary). All of them are parsed strictly: bad
//! input is rejected with a 1-based line number, never coerced.

pub mod bundle;
pub mod capacities;
pub mod edge_list;
pub mod generator;

use std::fmt;

use thiserror::Error;

use crate::hypergraph::{EdgeId, HypergraphError, VertexId};

/// Parse failure with the 1-based line it occurred on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub kind: ParseErrorKind,
}

impl ParseError {
    pub(crate) fn new(line: usize, kind: ParseErrorKind) -> Self {
        Self { line, kind }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.kind)
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    #[error("{0}")]
    MalformedLine(String),
    #[error("duplicate edge id {0}")]
    DuplicateEdgeId(EdgeId),
    #[error("edge has no owners")]
    EmptyOwnerList,
    #[error("integer `{0}` does not fit in 64 bits")]
    IntegerOverflow(String),
    #[error("duplicate capacity entry for user {0}")]
    DuplicateUser(VertexId),
    #[error(transparent)]
    Graph(HypergraphError),
}

pub use bundle::{
    render_selected_edges, render_summary, write_result_bundle, BundleError, RunSummary,
    SummaryConfig, FORMAT_VERSION,
};
pub use capacities::{parse_capacity_file, serialize_capacities};
pub use edge_list::{parse_edge_list, serialize_edge_list};
pub use generator::{generate, EdgeSizeModel, GenerateError, GeneratorSpec, OwnerPopularity};

pub(crate) fn parse_u64(token: &str, line: usize) -> Result<u64, ParseError> {
    use std::num::IntErrorKind;
    token.parse::<u64>().map_err(|err| {
        let kind = match err.kind() {
            IntErrorKind::PosOverflow => ParseErrorKind::IntegerOverflow(token.to_string()),
            _ => ParseErrorKind::MalformedLine(format!("invalid integer `{token}`")),
        };
        ParseError::new(line, kind)
    })
}
