use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use super::kb::KBGraph;
use crate::concept::{ArtSubkind, Concept};
use crate::geo::{Continent, CountryTable};

/// Default hop bound.
pub const DEFAULT_HOPS: u32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Provenance {
    #[serde(rename = "kb")]
    Kb,
    #[serde(rename = "llm_completion")]
    LlmCompletion,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArtifactRecord {
    pub node_id: String,
    pub label: String,
    pub concept: Concept,
    pub art_subkind: Option<ArtSubkind>,
    pub country: String,
    pub continent: Continent,
    /// Distance from the nearest root; `None` for LLM completions.
    pub hop: Option<u32>,
    pub provenance: Provenance,
}

/// Seed nodes for one concept (and, for art, one sub-kind).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RootSet {
    pub concept: Concept,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subkind: Option<ArtSubkind>,
    #[serde(rename = "ids")]
    pub root_ids: Vec<String>,
}

impl RootSet {
    pub fn new(concept: Concept, root_ids: impl IntoIterator<Item = impl Into<String>>) -> Self {
        RootSet {
            concept,
            subkind: None,
            root_ids: root_ids.into_iter().map(Into::into).collect(),
        }
    }

    pub fn with_subkind(mut self, subkind: ArtSubkind) -> Self {
        self.subkind = Some(subkind);
        self
    }

    /// Curated Wikidata roots for each concept; art is split by sub-kind.
    pub fn defaults() -> Vec<RootSet> {
        vec![
            RootSet::new(Concept::Cuisine, ["Q746549", "Q2095", "Q19861951"]),
            RootSet::new(
                Concept::Landmarks,
                [
                    "Q210272",
                    "Q41176",
                    "Q33506",
                    "Q16560",
                    "Q23413",
                    "Q22698",
                    "Q1107656",
                    "Q24398318",
                    "Q4989906",
                    "Q2416723",
                    "Q16999091",
                    "Q1785071",
                ],
            ),
            RootSet::new(Concept::Art, ["Q11460", "Q9053464", "Q3172759"])
                .with_subkind(ArtSubkind::Clothing),
            RootSet::new(Concept::Art, ["Q17399019"]).with_subkind(ArtSubkind::Painting),
            RootSet::new(Concept::Art, ["Q107357104", "Q1153484", "Q45971958"])
                .with_subkind(ArtSubkind::Performance),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExtractError {
    #[error("root node `{0}` not found in the knowledge base")]
    MissingRoot(String),
    #[error("root set for {0} is empty")]
    EmptyRoots(Concept),
    #[error("hop bound must be at least 1")]
    ZeroHops,
    #[error("node `{node}` has country `{country}` missing from the country table")]
    UnknownCountry { node: String, country: String },
}

/// Bounded breadth-first expansion from `roots` along reverse P31/P279 edges.
///
/// Children with a P495/P17 country are emitted (one record per country) and
/// not expanded further; the rest form the next frontier. A visited set keeps
/// each node to its first, minimal hop and makes cycles terminate. Output is
/// sorted by `(hop, node_id, country)`.
pub fn extract_artifacts(
    graph: &KBGraph,
    roots: &RootSet,
    max_hops: u32,
) -> Result<Vec<ArtifactRecord>, ExtractError> {
    if max_hops == 0 {
        return Err(ExtractError::ZeroHops);
    }
    if roots.root_ids.is_empty() {
        return Err(ExtractError::EmptyRoots(roots.concept));
    }
    for id in &roots.root_ids {
        if !graph.contains(id) {
            return Err(ExtractError::MissingRoot(id.clone()));
        }
    }
    let countries = CountryTable::shipped();
    let mut visited: HashSet<&str> = roots.root_ids.iter().map(String::as_str).collect();
    let mut frontier: Vec<&str> = visited.iter().copied().collect();
    let mut out = Vec::new();

    for hop in 1..=max_hops {
        frontier.sort_unstable();
        let mut next = Vec::new();
        for parent in &frontier {
            for child_id in graph.children(parent) {
                if !visited.insert(child_id.as_str()) {
                    continue;
                }
                // children can reference ids that were never defined in the dump
                let Some(child) = graph.node(child_id) else {
                    continue;
                };
                if child.has_country() {
                    for code in child.countries() {
                        let continent = countries.continent_of(code).ok_or_else(|| {
                            ExtractError::UnknownCountry {
                                node: child.id.clone(),
                                country: code.clone(),
                            }
                        })?;
                        out.push(ArtifactRecord {
                            node_id: child.id.clone(),
                            label: child.label.clone(),
                            concept: roots.concept,
                            art_subkind: roots.subkind,
                            country: code.clone(),
                            continent,
                            hop: Some(hop),
                            provenance: Provenance::Kb,
                        });
                    }
                } else {
                    next.push(child_id.as_str());
                }
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    sort_records(&mut out);
    out.dedup_by(|a, b| a.node_id == b.node_id && a.country == b.country);
    Ok(out)
}

/// Runs every root set and merges the results. A (node, country) pair reached
/// from several root sets keeps its smallest hop; ties go to the earlier set.
pub fn extract_all(
    graph: &KBGraph,
    root_sets: &[RootSet],
    max_hops: u32,
) -> Result<Vec<ArtifactRecord>, ExtractError> {
    let mut best: BTreeMap<(String, String, Concept), ArtifactRecord> = BTreeMap::new();
    for roots in root_sets {
        for rec in extract_artifacts(graph, roots, max_hops)? {
            let key = (rec.node_id.clone(), rec.country.clone(), rec.concept);
            match best.get(&key) {
                Some(existing) if existing.hop <= rec.hop => {}
                _ => {
                    best.insert(key, rec);
                }
            }
        }
    }
    let mut out: Vec<ArtifactRecord> = best.into_values().collect();
    sort_records(&mut out);
    Ok(out)
}

pub(crate) fn sort_records(records: &mut [ArtifactRecord]) {
    records.sort_by(|a, b| {
        (a.hop.is_none(), a.hop, &a.node_id, &a.country, a.concept).cmp(&(
            b.hop.is_none(),
            b.hop,
            &b.node_id,
            &b.country,
            b.concept,
        ))
    });
}
