//! Tab-separated capacity override format: `user_id<TAB>capacity` per line.
//! Users absent from the file take the default capacity.

use std::collections::BTreeMap;

use super::{parse_u64, ParseError, ParseErrorKind};
use crate::hypergraph::{CapacityMap, VertexId};

pub fn parse_capacity_file(text: &str, default: u64) -> Result<CapacityMap, ParseError> {
    let mut overrides: BTreeMap<VertexId, u64> = BTreeMap::new();
    for (index, line) in text.lines().enumerate() {
        let line_no = index + 1;
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 2 {
            return Err(ParseError::new(
                line_no,
                ParseErrorKind::MalformedLine(format!(
                    "expected 2 tab-separated fields, found {}",
                    fields.len()
                )),
            ));
        }
        let user = VertexId(parse_u64(fields[0], line_no)?);
        let capacity = parse_u64(fields[1], line_no)?;
        if overrides.insert(user, capacity).is_some() {
            return Err(ParseError::new(line_no, ParseErrorKind::DuplicateUser(user)));
        }
    }
    Ok(CapacityMap::with_overrides(default, overrides))
}

/// Renders the overrides (not the default, which travels out of band).
pub fn serialize_capacities(caps: &CapacityMap) -> String {
    let mut out = String::new();
    for (user, capacity) in caps.overrides() {
        out.push_str(&format!("{user}\t{capacity}\n"));
    }
    out
}
