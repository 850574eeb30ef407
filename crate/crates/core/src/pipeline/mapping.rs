//! Mapping generated images to (continent, country, artifact) triples.
//!
//! Each image goes through four stages: a concept-adherence verdict, country
//! attribution, top-k retrieval of reference artifacts for that country, and a
//! final selection among the retrieved candidates. Any stage that comes back
//! empty makes the image unmappable.

use serde::{Deserialize, Serialize};

use super::plan::ImageRef;
use crate::clients::{try_run_bounded, ClientError};
use crate::concept::Concept;
use crate::geo::CountryTable;
use crate::item::MappedItem;

/// Retrieval candidates handed to the selection stage.
pub const RETRIEVAL_K: usize = 5;

/// Vision-language judge used for verdicts, country attribution and selection.
pub trait MapperClient: Sync {
    fn concept_check(&self, image: &ImageRef, concept: Concept) -> Result<bool, ClientError>;
    fn culture_check(
        &self,
        image: &ImageRef,
        concept: Concept,
        culture: &str,
    ) -> Result<bool, ClientError>;
    fn attribute_country(
        &self,
        image: &ImageRef,
        concept: Concept,
    ) -> Result<Option<String>, ClientError>;
    fn select_artifact(
        &self,
        image: &ImageRef,
        concept: Concept,
        candidates: &[String],
    ) -> Result<Option<String>, ClientError>;
}

/// Image-to-image retrieval over a reference set of artifact images.
pub trait RetrieverClient: Sync {
    fn retrieve(
        &self,
        image: &ImageRef,
        concept: Concept,
        country: &str,
        k: usize,
    ) -> Result<Vec<String>, ClientError>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MapStage {
    Concept,
    Country,
    Retrieval,
    Selection,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MapOutcome {
    Mapped(MappedItem),
    Unmappable { image_id: String, stage: MapStage },
}

pub fn map_image(
    image: &ImageRef,
    concept: Concept,
    mapper: &dyn MapperClient,
    retriever: &dyn RetrieverClient,
) -> Result<MapOutcome, ClientError> {
    let unmappable = |stage| {
        Ok(MapOutcome::Unmappable {
            image_id: image.image_id.clone(),
            stage,
        })
    };
    if !mapper.concept_check(image, concept)? {
        return unmappable(MapStage::Concept);
    }
    let table = CountryTable::shipped();
    let Some((country, continent)) = mapper
        .attribute_country(image, concept)?
        .and_then(|c| table.continent_of(&c).map(|cont| (c, cont)))
    else {
        return unmappable(MapStage::Country);
    };
    let mut candidates = retriever.retrieve(image, concept, &country, RETRIEVAL_K)?;
    candidates.truncate(RETRIEVAL_K);
    if candidates.is_empty() {
        return unmappable(MapStage::Retrieval);
    }
    match mapper.select_artifact(image, concept, &candidates)? {
        Some(artifact) if candidates.contains(&artifact) => Ok(MapOutcome::Mapped(MappedItem {
            image_id: image.image_id.clone(),
            template_index: image.template_index,
            seed: image.seed,
            continent,
            country,
            artifact_id: artifact,
        })),
        _ => unmappable(MapStage::Selection),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FilterOutcome {
    pub kept: Vec<MappedItem>,
    pub removed: Vec<String>,
}

impl FilterOutcome {
    pub fn excluded_count(&self) -> usize {
        self.removed.len()
    }
}

/// Drops items the judge does not consider faithful to `culture`.
pub fn within_culture_filter(
    items: &[MappedItem],
    concept: Concept,
    culture: &str,
    vqa: &dyn MapperClient,
    parallel: usize,
) -> Result<FilterOutcome, ClientError> {
    let verdicts = try_run_bounded(parallel, items, |_, item| {
        let image = ImageRef {
            image_id: item.image_id.clone(),
            template_index: item.template_index,
            seed: item.seed,
        };
        vqa.culture_check(&image, concept, culture)
    })
    .map_err(|(_, e)| e)?;
    let mut out = FilterOutcome::default();
    for (item, keep) in items.iter().zip(verdicts) {
        if keep {
            out.kept.push(item.clone());
        } else {
            out.removed.push(item.image_id.clone());
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MappingRun {
    pub mapped: Vec<MappedItem>,
    pub unmappable: Vec<(String, MapStage)>,
    /// Images removed by the within-culture filter.
    pub filtered: Vec<String>,
}

/// Maps every image, then applies the within-culture filter when `culture` is set.
pub fn map_images(
    images: &[ImageRef],
    concept: Concept,
    culture: Option<&str>,
    mapper: &dyn MapperClient,
    retriever: &dyn RetrieverClient,
    parallel: usize,
) -> Result<MappingRun, ClientError> {
    let outcomes = try_run_bounded(parallel, images, |_, img| {
        map_image(img, concept, mapper, retriever)
    })
    .map_err(|(_, e)| e)?;
    let mut run = MappingRun::default();
    for outcome in outcomes {
        match outcome {
            MapOutcome::Mapped(item) => run.mapped.push(item),
            MapOutcome::Unmappable { image_id, stage } => run.unmappable.push((image_id, stage)),
        }
    }
    if let Some(culture) = culture {
        let filtered = within_culture_filter(&run.mapped, concept, culture, mapper, parallel)?;
        run.mapped = filtered.kept;
        run.filtered = filtered.removed;
    }
    Ok(run)
}
