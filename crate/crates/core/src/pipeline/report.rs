use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::plan::EvalPlan;
use super::scoring::ScoreRun;
use super::PipelineError;
use crate::geo::CountryTable;
use crate::item::MappedItem;
use crate::kernels::KernelConfig;

/// Aggregates for one kernel configuration across all scored repetitions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigSummary {
    pub w1: f64,
    pub w2: f64,
    pub w3: f64,
    pub q: f64,
    pub label: String,
    pub mean_quality: f64,
    pub mean_vs_bar: f64,
    /// Mean over batches of `mean_quality * vs / n`.
    pub mean_cd: f64,
    /// Population standard deviation of per-batch `cd`.
    pub std_cd: f64,
    /// `mean_quality * mean_vs_bar`; differs from `mean_cd` beyond rounding in general.
    pub product_of_means: f64,
    pub repetitions: usize,
    pub excluded_batches: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct ReportProvenance {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plan: Option<EvalPlan>,
    /// Input or client name -> digest / description.
    pub client_digests: BTreeMap<String, String>,
    pub uniform_quality: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateReport {
    pub configs: Vec<ConfigSummary>,
    /// Normalized frequency of each mapped image's country.
    pub country_frequency: BTreeMap<String, f64>,
    pub provenance: ReportProvenance,
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn population_std(xs: &[f64]) -> f64 {
    let m = mean(xs);
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / xs.len() as f64).sqrt()
}

/// `sha256:<hex>` digest recorded for report inputs.
pub fn content_digest(bytes: &[u8]) -> String {
    format!("sha256:{}", hex::encode(Sha256::digest(bytes)))
}

pub fn country_frequency(mapped: &[MappedItem]) -> BTreeMap<String, f64> {
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for item in mapped {
        *counts.entry(item.country.clone()).or_default() += 1;
    }
    let n = mapped.len() as f64;
    counts.into_iter().map(|(k, c)| (k, c as f64 / n)).collect()
}

/// Averages batch scores per config (in `cfgs` order) and tabulates country
/// frequencies over `mapped`, which should be the pre-exclusion item list.
pub fn aggregate(
    run: &ScoreRun,
    cfgs: &[KernelConfig],
    mapped: &[MappedItem],
) -> Result<AggregateReport, PipelineError> {
    if run.scores.is_empty() {
        return Err(PipelineError::NothingScored);
    }
    let mut configs = Vec::with_capacity(cfgs.len());
    for cfg in cfgs {
        let batch: Vec<_> = run.scores.iter().filter(|s| s.config == *cfg).collect();
        if batch.is_empty() {
            return Err(PipelineError::NothingScored);
        }
        let q: Vec<f64> = batch.iter().map(|s| s.result.mean_quality).collect();
        let vs_bar: Vec<f64> = batch.iter().map(|s| s.result.vs_bar()).collect();
        let cd: Vec<f64> = batch.iter().map(|s| s.result.cd).collect();
        let mean_quality = mean(&q);
        let mean_vs_bar = mean(&vs_bar);
        configs.push(ConfigSummary {
            w1: cfg.w1(),
            w2: cfg.w2(),
            w3: cfg.w3(),
            q: cfg.q(),
            label: cfg.label(),
            mean_quality,
            mean_vs_bar,
            mean_cd: mean(&cd),
            std_cd: population_std(&cd),
            product_of_means: mean_quality * mean_vs_bar,
            repetitions: batch.len(),
            excluded_batches: run.excluded.len(),
        });
    }
    Ok(AggregateReport {
        configs,
        country_frequency: country_frequency(mapped),
        provenance: ReportProvenance::default(),
    })
}

impl AggregateReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    /// Two-decimal table: the quality row, then one `VS_bar` and one `CD` row per config.
    pub fn write_table_csv<W: Write>(&self, writer: W) -> Result<(), PipelineError> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(["metric", "kernel", "value"])?;
        let q = self.configs.first().map_or(0.0, |c| c.mean_quality);
        wtr.write_record(["q", "", &format!("{q:.2}")])?;
        for c in &self.configs {
            wtr.write_record(["VS_bar", &c.label, &format!("{:.2}", c.mean_vs_bar)])?;
        }
        for c in &self.configs {
            wtr.write_record(["CD", &c.label, &format!("{:.2}", c.mean_cd)])?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn write_country_csv<W: Write>(&self, writer: W) -> Result<(), PipelineError> {
        let table = CountryTable::shipped();
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(["country", "name", "continent", "frequency"])?;
        for (code, freq) in &self.country_frequency {
            let (name, cont) = table
                .get(code)
                .map_or(("", ""), |c| (c.name.as_str(), c.continent.as_str()));
            wtr.write_record([code.as_str(), name, cont, &format!("{freq:.6}")])?;
        }
        wtr.flush()?;
        Ok(())
    }
}
