//! Tab-separated edge list format.
//!
//! One edge per line: `edge_id<TAB>owner_id[,owner_id...][<TAB>weight]`.
//! The weight field may be present and empty. Lines starting with `#` and
//! blank lines are ignored.

use std::collections::HashMap;

use super::{parse_u64, ParseError, ParseErrorKind};
use crate::hypergraph::{CapacityMap, EdgeId, Hypergraph, VertexId};

/// Parses an edge list into a graph. Vertices named only by capacity
/// overrides in `caps` are included with degree zero.
pub fn parse_edge_list(text: &str, caps: &CapacityMap) -> Result<Hypergraph, ParseError> {
    let mut edges = Vec::new();
    let mut seen: HashMap<EdgeId, usize> = HashMap::new();
    for (index, line) in text.lines().enumerate() {
        let line_no = index + 1;
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() < 2 || fields.len() > 3 {
            return Err(ParseError::new(
                line_no,
                ParseErrorKind::MalformedLine(format!(
                    "expected 2 or 3 tab-separated fields, found {}",
                    fields.len()
                )),
            ));
        }
        let id = EdgeId(parse_u64(fields[0], line_no)?);
        if seen.insert(id, line_no).is_some() {
            return Err(ParseError::new(line_no, ParseErrorKind::DuplicateEdgeId(id)));
        }
        if fields[1].is_empty() {
            return Err(ParseError::new(line_no, ParseErrorKind::EmptyOwnerList));
        }
        let owners = fields[1]
            .split(',')
            .map(|token| parse_u64(token, line_no).map(VertexId))
            .collect::<Result<Vec<_>, _>>()?;
        let weight = match fields.get(2).copied() {
            None | Some("") => None,
            Some(token) => Some(parse_weight(token, line_no)?),
        };
        edges.push((id, owners, weight));
    }
    // duplicate ids, empty owner lists and bad weights were all rejected
    // above with their line numbers; residual build failures have no line
    Hypergraph::build(edges, caps).map_err(|e| ParseError::new(0, ParseErrorKind::Graph(e)))
}

fn parse_weight(token: &str, line: usize) -> Result<f64, ParseError> {
    let malformed = || {
        ParseError::new(
            line,
            ParseErrorKind::MalformedLine(format!(
                "weight `{token}` must be a non-negative finite number"
            )),
        )
    };
    let w: f64 = token.parse().map_err(|_| malformed())?;
    if !w.is_finite() || w < 0.0 {
        return Err(malformed());
    }
    Ok(w)
}

/// Renders a graph back to the edge list format: edges ascending by id,
/// owners ascending, the weight field only when a weight exists.
pub fn serialize_edge_list(g: &Hypergraph) -> String {
    let mut out = String::new();
    for edge in g.edges() {
        out.push_str(&edge.id.to_string());
        out.push('\t');
        let owners: Vec<String> = edge.owners().iter().map(|o| o.to_string()).collect();
        out.push_str(&owners.join(","));
        if let Some(w) = edge.weight {
            out.push('\t');
            out.push_str(&w.to_string());
        }
        out.push('\n');
    }
    out
}
