use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::concept::Concept;
use crate::geo::CountryTable;

pub const DEFAULT_TEMPLATES: usize = 5;
pub const DEFAULT_SEED_BATCHES: usize = 10;
pub const DEFAULT_BATCH_SIZE: usize = 8;

/// One planned generation: a template variant and a seed.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ImageRef {
    pub image_id: String,
    pub template_index: usize,
    pub seed: u64,
}

impl ImageRef {
    pub fn new(template_index: usize, seed: u64) -> Self {
        ImageRef {
            image_id: format!("t{template_index}-s{seed}"),
            template_index,
            seed,
        }
    }
}

/// Prompt templates x seed batches x batch size.
///
/// Every template is run with the same consecutive seeds
/// `start_seed .. start_seed + seed_batches * batch_size`, and batch `b`
/// covers seeds `start_seed + b * batch_size ..` for `batch_size` seeds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalPlan {
    pub concept: Concept,
    /// ISO code of the culture for within-culture runs; `None` for global runs.
    pub culture: Option<String>,
    pub templates: Vec<String>,
    pub seed_batches: usize,
    pub batch_size: usize,
    pub start_seed: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PlanOverrides {
    /// Use only the first `n` default templates.
    pub template_count: Option<usize>,
    /// Replace the templates entirely; `{country}` is substituted for within-culture plans.
    pub templates: Option<Vec<String>>,
    pub seed_batches: Option<usize>,
    pub batch_size: Option<usize>,
    pub start_seed: Option<u64>,
}

/// Under-specified prompt variants; `{country}` marks the culture slot.
pub fn default_templates(concept: Concept, within_culture: bool) -> [&'static str; 5] {
    match (concept, within_culture) {
        (Concept::Cuisine, false) => [
            "Image of a dish",
            "Image of food",
            "A photo of a traditional dish",
            "Image of a popular cuisine",
            "A high resolution image of a local dish",
        ],
        (Concept::Cuisine, true) => [
            "Image of a dish from {country} cuisine",
            "Image of food from {country}",
            "A photo of a traditional dish from {country}",
            "Image of the popular cuisine of {country}",
            "A high resolution image of a local dish in {country}",
        ],
        (Concept::Landmarks, false) => [
            "Image of landmarks",
            "Image of tourist landmarks",
            "Image of a tourist spot",
            "A photo of a famous monument",
            "High definition photo of a monument",
        ],
        (Concept::Landmarks, true) => [
            "Image of landmarks in {country}",
            "Image of tourist landmarks in {country}",
            "Image of a tourist spot in {country}",
            "A photo of a famous monument in {country}",
            "High definition photo of a monument in {country}",
        ],
        (Concept::Art, false) => [
            "Image of traditional clothing",
            "Image of a costume",
            "Image of a traditional art form",
            "Image of a style of painting",
            "Image of a traditional performance",
        ],
        (Concept::Art, true) => [
            "Image of traditional clothing from {country}",
            "Image of a costume from {country}",
            "Image of a traditional art form from {country}",
            "Image of a style of painting from {country}",
            "Image of a traditional performance from {country}",
        ],
    }
}

pub fn build_eval_plan(
    concept: Concept,
    culture: Option<&str>,
    overrides: &PlanOverrides,
) -> Result<EvalPlan, PipelineError> {
    let country_name = match culture {
        Some(code) => Some(
            CountryTable::shipped()
                .name_of(code)
                .ok_or_else(|| PipelineError::Plan(format!("unknown culture `{code}`")))?,
        ),
        None => None,
    };
    let raw: Vec<String> = match &overrides.templates {
        Some(t) => t.clone(),
        None => {
            let defaults = default_templates(concept, culture.is_some());
            let count = overrides.template_count.unwrap_or(DEFAULT_TEMPLATES);
            if count > defaults.len() {
                return Err(PipelineError::Plan(format!(
                    "only {} default templates exist, {count} requested",
                    defaults.len()
                )));
            }
            defaults[..count].iter().map(|s| s.to_string()).collect()
        }
    };
    if raw.is_empty() {
        return Err(PipelineError::Plan(
            "a plan needs at least one template".into(),
        ));
    }
    let templates = raw
        .into_iter()
        .map(|t| match country_name {
            Some(name) => t.replace("{country}", name),
            None => t,
        })
        .collect();
    let seed_batches = overrides.seed_batches.unwrap_or(DEFAULT_SEED_BATCHES);
    let batch_size = overrides.batch_size.unwrap_or(DEFAULT_BATCH_SIZE);
    if seed_batches == 0 {
        return Err(PipelineError::Plan(
            "seed_batches must be at least 1".into(),
        ));
    }
    if batch_size < 2 {
        return Err(PipelineError::Plan(format!(
            "batch_size must be at least 2, got {batch_size}"
        )));
    }
    Ok(EvalPlan {
        concept,
        culture: culture.map(str::to_string),
        templates,
        seed_batches,
        batch_size,
        start_seed: overrides.start_seed.unwrap_or(0),
    })
}

impl EvalPlan {
    pub fn seeds_per_template(&self) -> usize {
        self.seed_batches * self.batch_size
    }

    pub fn total_images(&self) -> usize {
        self.templates.len() * self.seeds_per_template()
    }

    /// Number of (template, seed batch) repetitions.
    pub fn repetitions(&self) -> usize {
        self.templates.len() * self.seed_batches
    }

    pub fn seeds(&self) -> std::ops::Range<u64> {
        self.start_seed..self.start_seed + self.seeds_per_template() as u64
    }

    /// Seed batch containing `seed`, if the seed is in the plan.
    pub fn batch_of(&self, seed: u64) -> Option<usize> {
        if !self.seeds().contains(&seed) {
            return None;
        }
        Some(((seed - self.start_seed) / self.batch_size as u64) as usize)
    }

    /// Every planned image, template-major then seed order.
    pub fn images(&self) -> Vec<ImageRef> {
        (0..self.templates.len())
            .flat_map(|t| self.seeds().map(move |s| ImageRef::new(t, s)))
            .collect()
    }
}
