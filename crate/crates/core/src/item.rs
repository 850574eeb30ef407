use serde::{Deserialize, Serialize};

use crate::geo::Continent;

/// One generated image after mapping to a (continent, country, artifact) triple.
///
/// Quality is not stored here: it is looked up from a
/// [`QualityProvider`](crate::pipeline::QualityProvider) after filtering.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MappedItem {
    pub image_id: String,
    pub template_index: usize,
    pub seed: u64,
    pub continent: Continent,
    pub country: String,
    pub artifact_id: String,
}

impl MappedItem {
    /// Builds an item with only the geo triple set; handy for scoring ad-hoc collections.
    pub fn from_triple(
        image_id: impl Into<String>,
        continent: Continent,
        country: impl Into<String>,
        artifact_id: impl Into<String>,
    ) -> Self {
        MappedItem {
            image_id: image_id.into(),
            template_index: 0,
            seed: 0,
            continent,
            country: country.into(),
            artifact_id: artifact_id.into(),
        }
    }
}
