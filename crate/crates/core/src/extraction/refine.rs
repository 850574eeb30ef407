use std::collections::{BTreeSet, HashSet};

use sha2::{Digest, Sha256};

use super::traverse::{ArtifactRecord, Provenance};
use crate::clients::{try_run_bounded, ClientError};
use crate::concept::Concept;
use crate::geo::CountryTable;

/// Judges candidate artifacts and proposes missing ones.
pub trait RefinementClient: Sync {
    /// `true` keeps the record.
    fn judge(&self, record: &ArtifactRecord) -> Result<bool, ClientError>;
    /// Popular artifact labels for `(concept, country)` that may be missing.
    fn complete(&self, concept: Concept, country: &str) -> Result<Vec<String>, ClientError>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RefineStage {
    Judge,
    Complete,
}

/// A client failure, with the offset to resume from.
///
/// For [`RefineStage::Judge`] the offset indexes the candidate list at the start
/// of the failing batch; for [`RefineStage::Complete`] it indexes the sorted
/// country list.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("refinement {stage:?} failed at offset {offset}: {source}")]
pub struct RefineError {
    pub stage: RefineStage,
    pub offset: usize,
    #[source]
    pub source: ClientError,
}

const JUDGE_BATCH: usize = 32;

fn synthetic_id(concept: Concept, country: &str, label: &str) -> String {
    let digest = Sha256::digest(format!("{concept}|{country}|{label}").as_bytes());
    format!("GEN-{}", &hex::encode(digest)[..12])
}

/// Filters `candidates` through the client's judge, then appends completions
/// for every candidate country. Kept records are unchanged; completions carry
/// `Provenance::LlmCompletion`, no hop and a synthetic `GEN-` id. The result is
/// deduplicated on `(lowercased label, country)`, first occurrence wins.
pub fn refine_with_llm(
    candidates: &[ArtifactRecord],
    concept: Concept,
    client: &dyn RefinementClient,
    parallel: usize,
) -> Result<Vec<ArtifactRecord>, RefineError> {
    let mut kept = Vec::with_capacity(candidates.len());
    for (batch_idx, batch) in candidates.chunks(JUDGE_BATCH).enumerate() {
        let verdicts = try_run_bounded(parallel, batch, |_, rec| client.judge(rec)).map_err(
            |(_, source)| RefineError {
                stage: RefineStage::Judge,
                offset: batch_idx * JUDGE_BATCH,
                source,
            },
        )?;
        for (rec, keep) in batch.iter().zip(verdicts) {
            if keep {
                kept.push(rec.clone());
            }
        }
    }

    let countries: Vec<&str> = candidates
        .iter()
        .map(|r| r.country.as_str())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let completions = try_run_bounded(parallel, &countries, |_, c| client.complete(concept, c))
        .map_err(|(offset, source)| RefineError {
            stage: RefineStage::Complete,
            offset,
            source,
        })?;
    let table = CountryTable::shipped();
    for (country, mut labels) in countries.iter().zip(completions) {
        labels.sort();
        let Some(continent) = table.continent_of(country) else {
            continue;
        };
        for label in labels {
            let label = label.trim().to_string();
            if label.is_empty() {
                continue;
            }
            kept.push(ArtifactRecord {
                node_id: synthetic_id(concept, country, &label),
                label,
                concept,
                art_subkind: None,
                country: country.to_string(),
                continent,
                hop: None,
                provenance: Provenance::LlmCompletion,
            });
        }
    }

    let mut seen = HashSet::new();
    kept.retain(|r| seen.insert((r.label.to_lowercase(), r.country.clone())));
    Ok(kept)
}
