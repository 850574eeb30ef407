use std::collections::HashMap;
use std::io::Read;
use std::path::Path;

use serde::Deserialize;

use super::PipelineError;
use crate::vendi::QualityScore;

/// Per-image quality source.
pub trait QualityProvider: Sync {
    fn quality(&self, image_id: &str) -> Result<QualityScore, PipelineError>;
}

/// Scores loaded from a CSV of `image_id,score`.
#[derive(Debug, Clone, Default)]
pub struct FileQuality {
    scores: HashMap<String, QualityScore>,
}

impl FileQuality {
    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn from_reader<R: Read>(reader: R) -> Result<Self, PipelineError> {
        #[derive(Deserialize)]
        struct Row {
            image_id: String,
            score: f64,
        }
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut scores = HashMap::new();
        for (idx, row) in rdr.deserialize::<Row>().enumerate() {
            let row_no = idx + 1;
            let row = row.map_err(|e| PipelineError::input(row_no, e.to_string()))?;
            let score = QualityScore::new(row.score)
                .map_err(|e| PipelineError::input(row_no, format!("{}: {e}", row.image_id)))?;
            if scores.insert(row.image_id.clone(), score).is_some() {
                return Err(PipelineError::input(
                    row_no,
                    format!("duplicate image_id `{}`", row.image_id),
                ));
            }
        }
        Ok(FileQuality { scores })
    }
}

impl QualityProvider for FileQuality {
    fn quality(&self, image_id: &str) -> Result<QualityScore, PipelineError> {
        self.scores
            .get(image_id)
            .copied()
            .ok_or_else(|| PipelineError::MissingQuality(image_id.to_string()))
    }
}

/// Every image scores 1, for within-culture runs that assume uniform quality.
#[derive(Debug, Clone, Copy, Default)]
pub struct UniformQuality;

impl QualityProvider for UniformQuality {
    fn quality(&self, _: &str) -> Result<QualityScore, PipelineError> {
        Ok(QualityScore::ONE)
    }
}

pub fn quality_from_file(path: &Path) -> Result<FileQuality, PipelineError> {
    let file = std::fs::File::open(path)?;
    FileQuality::from_reader(file)
}
