use serde::{Deserialize, Serialize};

use super::traverse::ArtifactRecord;
use crate::concept::{ArtSubkind, Concept};
use crate::geo::CountryTable;

pub const NEGATIVE_PROMPT: &str = "multiple items, blurry, painting, cartoon, people, human, man, woman, artificial, multiple images, nsfw, bad quality, bad anatomy, worst quality, low quality, low resolutions, extra fingers, blur, blurry, ugly, wrong proportions, watermark, image artifacts, lowres, jpeg artifacts, deformed, noisy";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptRecord {
    pub node_id: String,
    pub concept: Concept,
    pub art_subkind: Option<ArtSubkind>,
    pub country: String,
    pub prompt: String,
    pub negative_prompt: String,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PromptError {
    #[error("artifact `{node_id}` is {found}, expected {expected}")]
    ConceptMismatch {
        node_id: String,
        found: Concept,
        expected: Concept,
    },
    #[error("art artifact `{0}` has no sub-kind; cannot pick a template")]
    MissingSubkind(String),
    #[error("unknown country `{country}` on artifact `{node_id}`")]
    UnknownCountry { node_id: String, country: String },
}

/// Fills the concept's awareness template for a single artifact.
pub fn awareness_prompt(
    artifact: &str,
    country_name: &str,
    concept: Concept,
    subkind: Option<ArtSubkind>,
) -> Option<String> {
    let text = match (concept, subkind) {
        (Concept::Cuisine, _) => {
            format!("A high resolution image of {artifact} from {country_name} cuisine.")
        }
        (Concept::Landmarks, _) => format!("A panoramic view of {artifact} in {country_name}."),
        (Concept::Art, Some(ArtSubkind::Clothing)) => {
            format!("Image of a person in {artifact} from {country_name}.")
        }
        (Concept::Art, Some(ArtSubkind::Painting)) => {
            format!("A {artifact} painting from {country_name}.")
        }
        (Concept::Art, Some(ArtSubkind::Performance)) => {
            format!("An image of performance of {artifact} from {country_name}.")
        }
        (Concept::Art, None) => return None,
    };
    Some(text)
}

pub fn render_prompts(
    artifacts: &[ArtifactRecord],
    concept: Concept,
) -> Result<Vec<PromptRecord>, PromptError> {
    let countries = CountryTable::shipped();
    artifacts
        .iter()
        .map(|a| {
            if a.concept != concept {
                return Err(PromptError::ConceptMismatch {
                    node_id: a.node_id.clone(),
                    found: a.concept,
                    expected: concept,
                });
            }
            let name =
                countries
                    .name_of(&a.country)
                    .ok_or_else(|| PromptError::UnknownCountry {
                        node_id: a.node_id.clone(),
                        country: a.country.clone(),
                    })?;
            let prompt = awareness_prompt(&a.label, name, concept, a.art_subkind)
                .ok_or_else(|| PromptError::MissingSubkind(a.node_id.clone()))?;
            Ok(PromptRecord {
                node_id: a.node_id.clone(),
                concept,
                art_subkind: a.art_subkind,
                country: a.country.clone(),
                prompt,
                negative_prompt: NEGATIVE_PROMPT.to_string(),
            })
        })
        .collect()
}
