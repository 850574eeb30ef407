//! Vendi scores of order q, quality weighting, and size normalization.
//!
//! `VS_q` is the exponential of the Renyi entropy of the normalized kernel
//! eigenvalues. Multiplying by the mean item quality gives `qVS`; dividing that
//! by the collection size gives the cultural diversity score in `[0, 1]`.

use std::collections::HashMap;
use std::hash::Hash;

use nalgebra::SymmetricEigen;
use serde::{Deserialize, Serialize};

use crate::item::MappedItem;
use crate::kernels::{build_kernel_matrix, KernelConfig, KernelError, KernelMatrix};

/// Half-width of the band around `q = 1` where the Shannon form is used.
pub const Q_SWITCH: f64 = 1e-8;
/// Normalized eigenvalues above this count towards `VS_0`.
pub const EPS_RANK: f64 = 1e-10;
/// Per-item PSD slack: eigenvalues below `-EPS_PSD * n` are a hard error.
pub const EPS_PSD: f64 = 1e-9;
/// Per-item band around zero treated as an exact zero eigenvalue.
pub const EPS_ZERO: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum VendiError {
    #[error("kernel matrix is not positive semi-definite (eigenvalue {eigenvalue})")]
    NotPsd { eigenvalue: f64 },
    #[error("Renyi order must be >= 0, got {0}")]
    NegativeOrder(f64),
    #[error("{items} items but {qualities} quality scores")]
    LengthMismatch { items: usize, qualities: usize },
    #[error("quality score {0} outside [0, 1]")]
    QualityOutOfRange(f64),
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

/// Per-item quality in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct QualityScore(f64);

impl QualityScore {
    pub fn new(value: f64) -> Result<Self, VendiError> {
        if (0.0..=1.0).contains(&value) {
            Ok(QualityScore(value))
        } else {
            Err(VendiError::QualityOutOfRange(value))
        }
    }

    pub const ONE: QualityScore = QualityScore(1.0);

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for QualityScore {
    type Error = VendiError;
    fn try_from(v: f64) -> Result<Self, Self::Error> {
        QualityScore::new(v)
    }
}

impl From<QualityScore> for f64 {
    fn from(q: QualityScore) -> f64 {
        q.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenSpectrum {
    pub raw: Vec<f64>,
    pub normalized: Vec<f64>,
}

impl EigenSpectrum {
    pub fn len(&self) -> usize {
        self.raw.len()
    }

    pub fn is_empty(&self) -> bool {
        self.raw.is_empty()
    }

    /// Builds a spectrum from an already-normalized probability vector.
    pub fn from_normalized(normalized: Vec<f64>) -> Self {
        EigenSpectrum {
            raw: normalized.clone(),
            normalized,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiversityResult {
    pub vs: f64,
    pub mean_quality: f64,
    pub qvs: f64,
    pub cd: f64,
    pub n: usize,
    pub order_q: f64,
}

impl DiversityResult {
    /// `VS / n`, the diversity component reported alongside mean quality.
    pub fn vs_bar(&self) -> f64 {
        self.vs / self.n as f64
    }
}

/// Eigenvalues of `k` (descending), with tiny values snapped to zero and a
/// normalized copy summing to one.
pub fn normalized_spectrum(k: &KernelMatrix) -> Result<EigenSpectrum, VendiError> {
    let n = k.n() as f64;
    let eig = SymmetricEigen::new(k.to_dmatrix());
    let mut raw: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    raw.sort_by(|a, b| b.total_cmp(a));
    for v in raw.iter_mut() {
        if *v < -EPS_PSD * n {
            return Err(VendiError::NotPsd { eigenvalue: *v });
        }
        if *v < 0.0 || v.abs() <= EPS_ZERO * n {
            *v = 0.0;
        }
    }
    let total: f64 = raw.iter().sum();
    let normalized = raw.iter().map(|v| v / total).collect();
    Ok(EigenSpectrum { raw, normalized })
}

/// Vendi score of order `q` over a normalized spectrum, clamped to `[1, len]`.
///
/// `q = 0` counts eigenvalues above [`EPS_RANK`]; `q = inf` gives `1 / max`.
pub fn vendi_score(spectrum: &EigenSpectrum, q: f64) -> Result<f64, VendiError> {
    if q.is_nan() || q < 0.0 {
        return Err(VendiError::NegativeOrder(q));
    }
    let probs = spectrum.normalized.iter().copied().filter(|&p| p > 0.0);
    let vs = if q == 0.0 {
        spectrum
            .normalized
            .iter()
            .filter(|&&p| p > EPS_RANK)
            .count() as f64
    } else if let Some(k) = uniform_support(&spectrum.normalized) {
        k as f64
    } else if (q - 1.0).abs() <= Q_SWITCH {
        let entropy: f64 = probs.map(|p| -p * p.ln()).sum();
        entropy.exp()
    } else if q.is_infinite() {
        let max = probs.fold(0.0_f64, f64::max);
        1.0 / max
    } else {
        let sum: f64 = probs.map(|p| p.powf(q)).sum();
        (sum.ln() / (1.0 - q)).exp()
    };
    let upper = spectrum.len().max(1) as f64;
    Ok(vs.clamp(1.0, upper))
}

/// Support size when every positive entry is bitwise equal; any order then gives exactly that size.
fn uniform_support(normalized: &[f64]) -> Option<usize> {
    let mut positive = normalized.iter().filter(|&&p| p > 0.0);
    let first = *positive.next()?;
    let mut count = 1;
    for &p in positive {
        if p.to_bits() != first.to_bits() {
            return None;
        }
        count += 1;
    }
    Some(count)
}

/// Scores one collection: kernel, `VS_q`, `qVS` and the normalized `cd`.
pub fn cultural_diversity(
    items: &[MappedItem],
    cfg: &KernelConfig,
    qualities: &[QualityScore],
) -> Result<DiversityResult, VendiError> {
    if items.len() != qualities.len() {
        return Err(VendiError::LengthMismatch {
            items: items.len(),
            qualities: qualities.len(),
        });
    }
    let k = build_kernel_matrix(items, cfg)?;
    let spectrum = normalized_spectrum(&k)?;
    let vs = vendi_score(&spectrum, cfg.q())?;
    Ok(combine(vs, qualities, cfg.q()))
}

/// Combines a precomputed `VS_q` with item qualities.
pub fn combine(vs: f64, qualities: &[QualityScore], order_q: f64) -> DiversityResult {
    let n = qualities.len();
    let mean_quality = qualities.iter().map(|q| q.value()).sum::<f64>() / n as f64;
    let qvs = mean_quality * vs;
    DiversityResult {
        vs,
        mean_quality,
        qvs,
        cd: qvs / n as f64,
        n,
        order_q,
    }
}

/// Closed-form `VS_1` for a pure indicator kernel: the exponential of the
/// Shannon entropy of the label block proportions. No eigen solver involved.
pub fn partition_vendi<T: Eq + Hash>(labels: &[T]) -> f64 {
    let mut counts: HashMap<&T, usize> = HashMap::new();
    for l in labels {
        *counts.entry(l).or_default() += 1;
    }
    let n = labels.len() as f64;
    let entropy: f64 = counts
        .values()
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum();
    entropy.exp()
}
