//! Streaming reader for the line-delimited knowledge-base format (KB-JSONL).
//!
//! One JSON object per line:
//!
//! ```text
//! {"id":"Q5449200","label":"Filone","p279":["Q7802"],"p495":["IT"]}
//! ```
//!
//! `id` and `label` are required; `p31` / `p279` list parent node ids and
//! `p495` / `p17` list ISO 3166-1 alpha-2 country codes.

use std::collections::HashMap;
use std::io::BufRead;

use serde::Deserialize;

use crate::geo::CountryTable;

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
pub struct KBNode {
    pub id: String,
    pub label: String,
    #[serde(default, rename = "p31")]
    pub p31_targets: Vec<String>,
    #[serde(default, rename = "p279")]
    pub p279_targets: Vec<String>,
    #[serde(default)]
    pub p495: Option<Vec<String>>,
    #[serde(default)]
    pub p17: Option<Vec<String>>,
}

impl KBNode {
    /// True when the node carries a non-empty country-of-origin or country property.
    pub fn has_country(&self) -> bool {
        self.p495.as_ref().is_some_and(|v| !v.is_empty())
            || self.p17.as_ref().is_some_and(|v| !v.is_empty())
    }

    /// Countries to emit for this node: P495 when present, otherwise P17.
    pub fn countries(&self) -> &[String] {
        match (&self.p495, &self.p17) {
            (Some(origin), _) if !origin.is_empty() => origin,
            (_, Some(country)) => country,
            _ => &[],
        }
    }

    fn parents(&self) -> impl Iterator<Item = &String> {
        self.p31_targets.iter().chain(&self.p279_targets)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ParseMode {
    /// Stop at the first malformed line.
    #[default]
    Strict,
    /// Skip malformed lines and count them.
    Lenient,
}

#[derive(Debug, thiserror::Error)]
pub enum ParseError {
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("line {line}: duplicate node id `{id}`")]
    DuplicateId { line: usize, id: String },
    #[error("read error: {0}")]
    Io(#[from] std::io::Error),
}

/// Node map plus the transpose of the instance-of / subclass-of edges.
#[derive(Debug, Default)]
pub struct KBGraph {
    nodes: HashMap<String, KBNode>,
    reverse_index: HashMap<String, Vec<String>>,
}

impl KBGraph {
    pub fn node(&self, id: &str) -> Option<&KBNode> {
        self.nodes.get(id)
    }

    pub fn contains(&self, id: &str) -> bool {
        self.nodes.contains_key(id)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Ids of nodes whose P31 or P279 points at `id`, in dump order.
    pub fn children(&self, id: &str) -> &[String] {
        self.reverse_index.get(id).map_or(&[], Vec::as_slice)
    }

    pub fn reverse_edge_count(&self) -> usize {
        self.reverse_index.values().map(Vec::len).sum()
    }

    pub fn nodes(&self) -> impl Iterator<Item = &KBNode> {
        self.nodes.values()
    }

    fn insert(&mut self, node: KBNode, line: usize) -> Result<(), ParseError> {
        if self.nodes.contains_key(&node.id) {
            return Err(ParseError::DuplicateId { line, id: node.id });
        }
        let mut seen: Vec<&String> = Vec::new();
        for parent in node.parents() {
            if seen.contains(&parent) {
                continue;
            }
            seen.push(parent);
            self.reverse_index
                .entry(parent.clone())
                .or_default()
                .push(node.id.clone());
        }
        self.nodes.insert(node.id.clone(), node);
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParseReport {
    pub lines: usize,
    pub nodes: usize,
    pub skipped: usize,
    /// First few skip reasons, for diagnostics.
    pub warnings: Vec<String>,
}

const MAX_WARNINGS: usize = 20;

fn validate(node: &KBNode, countries: &CountryTable) -> Result<(), String> {
    if node.id.is_empty() {
        return Err("empty id".into());
    }
    for code in node.p495.iter().chain(node.p17.iter()).flatten() {
        if !countries.contains(code) {
            return Err(format!("unknown country code `{code}` on {}", node.id));
        }
    }
    Ok(())
}

/// Parses a KB-JSONL stream in one pass, building the reverse edge index as it goes.
pub fn parse_kb_dump<R: BufRead>(
    source: R,
    mode: ParseMode,
) -> Result<(KBGraph, ParseReport), ParseError> {
    let countries = CountryTable::shipped();
    let mut graph = KBGraph::default();
    let mut report = ParseReport::default();
    for (idx, line) in source.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        report.lines = line_no;
        if line.trim().is_empty() {
            continue;
        }
        let parsed = serde_json::from_str::<KBNode>(&line)
            .map_err(|e| e.to_string())
            .and_then(|node| validate(&node, countries).map(|()| node));
        match parsed {
            Ok(node) => graph.insert(node, line_no)?,
            Err(reason) => match mode {
                ParseMode::Strict => {
                    return Err(ParseError::Malformed {
                        line: line_no,
                        reason,
                    })
                }
                ParseMode::Lenient => {
                    report.skipped += 1;
                    if report.warnings.len() < MAX_WARNINGS {
                        report.warnings.push(format!("line {line_no}: {reason}"));
                    }
                    log::warn!("skipping line {line_no}: {reason}");
                }
            },
        }
    }
    report.nodes = graph.len();
    Ok((graph, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_stream() {
        let (g, report) = parse_kb_dump("".as_bytes(), ParseMode::Strict).unwrap();
        assert!(g.is_empty());
        assert_eq!(report.skipped, 0);
    }

    #[test]
    fn single_edge_transpose() {
        let dump = "{\"id\":\"Q1\",\"label\":\"dish\"}\n{\"id\":\"Q2\",\"label\":\"Biriyani\",\"p31\":[\"Q1\"],\"p495\":[\"IN\"]}\n";
        let (g, _) = parse_kb_dump(dump.as_bytes(), ParseMode::Strict).unwrap();
        assert_eq!(g.len(), 2);
        assert_eq!(g.children("Q1"), ["Q2".to_string()]);
        assert!(g.children("Q2").is_empty());
        assert!(g.node("Q2").unwrap().has_country());
    }

    #[test]
    fn same_parent_on_both_edges_is_one_reverse_edge() {
        let dump = r#"{"id":"Q2","label":"x","p31":["Q1"],"p279":["Q1"]}"#;
        let (g, _) = parse_kb_dump(dump.as_bytes(), ParseMode::Strict).unwrap();
        assert_eq!(g.reverse_edge_count(), 1);
    }

    #[test]
    fn strict_mode_reports_line_number() {
        let dump = "{\"id\":\"Q1\",\"label\":\"a\"}\nnot json\n";
        match parse_kb_dump(dump.as_bytes(), ParseMode::Strict) {
            Err(ParseError::Malformed { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn lenient_mode_skips_and_counts() {
        let dump = "{\"id\":\"Q1\",\"label\":\"a\"}\n{\"id\":\"Q2\"}\n{\"id\":\"Q3\",\"label\":\"c\",\"p17\":[\"ZZ\"]}\n";
        let (g, report) = parse_kb_dump(dump.as_bytes(), ParseMode::Lenient).unwrap();
        assert_eq!(g.len(), 1);
        assert_eq!(report.skipped, 2);
        assert_eq!(report.warnings.len(), 2);
    }

    #[test]
    fn duplicate_ids_fail_in_both_modes() {
        let dump = "{\"id\":\"Q1\",\"label\":\"a\"}\n{\"id\":\"Q1\",\"label\":\"b\"}\n";
        for mode in [ParseMode::Strict, ParseMode::Lenient] {
            assert!(matches!(
                parse_kb_dump(dump.as_bytes(), mode),
                Err(ParseError::DuplicateId { line: 2, .. })
            ));
        }
    }

    #[test]
    fn country_precedence() {
        let node: KBNode =
            serde_json::from_str(r#"{"id":"Q","label":"x","p495":["IT"],"p17":["FR"]}"#).unwrap();
        assert_eq!(node.countries(), ["IT".to_string()]);
        let node: KBNode =
            serde_json::from_str(r#"{"id":"Q","label":"x","p495":[],"p17":["FR"]}"#).unwrap();
        assert_eq!(node.countries(), ["FR".to_string()]);
        assert!(node.has_country());
    }
}
