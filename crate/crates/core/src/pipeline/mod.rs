//! The diversity-evaluation protocol: plan prompts and seeds, map generated
//! images to artifacts, filter, score each seed batch and aggregate.

mod io;
mod mapping;
mod plan;
mod quality;
mod report;
mod scoring;

pub use io::{read_mapped, read_mapped_csv, read_mapped_jsonl, write_mapped_csv};
pub use mapping::{
    map_image, map_images, within_culture_filter, FilterOutcome, MapOutcome, MapStage,
    MapperClient, MappingRun, RetrieverClient, RETRIEVAL_K,
};
pub use plan::{
    build_eval_plan, default_templates, EvalPlan, ImageRef, PlanOverrides, DEFAULT_BATCH_SIZE,
    DEFAULT_SEED_BATCHES, DEFAULT_TEMPLATES,
};
pub use quality::{quality_from_file, FileQuality, QualityProvider, UniformQuality};
pub use report::{
    aggregate, content_digest, country_frequency, AggregateReport, ConfigSummary, ReportProvenance,
};
pub use scoring::{
    group_batches, score_batches, BatchScore, ExcludedBatch, ScoreRun, MIN_BATCH_ITEMS,
};

use crate::clients::ClientError;
use crate::vendi::VendiError;

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("plan error: {0}")]
    Plan(String),
    #[error("row {row}: {message}")]
    Input { row: usize, message: String },
    #[error("no quality score for image `{0}`")]
    MissingQuality(String),
    #[error("no batch had enough items to score")]
    NothingScored,
    #[error(transparent)]
    Vendi(#[from] VendiError),
    #[error(transparent)]
    Client(#[from] ClientError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl PipelineError {
    pub(crate) fn input(row: usize, message: impl Into<String>) -> Self {
        PipelineError::Input {
            row,
            message: message.into(),
        }
    }
}
