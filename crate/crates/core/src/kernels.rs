//! Composite geo-hierarchical similarity kernels.
//!
//! Three binary indicator kernels compare items on continent, country and
//! artifact identity. A [`KernelConfig`] mixes them with convex weights so the
//! diagonal stays at one.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::item::MappedItem;

/// Absolute tolerance on `w1 + w2 + w3 = 1`.
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum KernelError {
    #[error("invalid kernel config: {0}")]
    InvalidConfig(String),
    #[error("cannot build a kernel over an empty collection")]
    EmptyCollection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GeoLevel {
    Continent,
    Country,
    Artifact,
}

/// Weights over the continent, country and artifact kernels, plus the Renyi order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawKernelConfig", into = "RawKernelConfig")]
pub struct KernelConfig {
    w1: f64,
    w2: f64,
    w3: f64,
    q: f64,
}

#[derive(Serialize, Deserialize)]
struct RawKernelConfig {
    w1: f64,
    w2: f64,
    w3: f64,
    q: f64,
}

impl TryFrom<RawKernelConfig> for KernelConfig {
    type Error = KernelError;

    fn try_from(raw: RawKernelConfig) -> Result<Self, Self::Error> {
        KernelConfig::new(raw.w1, raw.w2, raw.w3, raw.q)
    }
}

impl From<KernelConfig> for RawKernelConfig {
    fn from(c: KernelConfig) -> Self {
        RawKernelConfig {
            w1: c.w1,
            w2: c.w2,
            w3: c.w3,
            q: c.q,
        }
    }
}

impl KernelConfig {
    /// Validates weights (non-negative, summing to one) and order (`q >= 0`).
    /// Configs that do not sum to one are rejected, never renormalized.
    pub fn new(w1: f64, w2: f64, w3: f64, q: f64) -> Result<Self, KernelError> {
        for (name, w) in [("w1", w1), ("w2", w2), ("w3", w3)] {
            if !w.is_finite() || w < 0.0 {
                return Err(KernelError::InvalidConfig(format!(
                    "{name} = {w} must be finite and non-negative"
                )));
            }
        }
        let sum = w1 + w2 + w3;
        if (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            return Err(KernelError::InvalidConfig(format!(
                "weights sum to {sum}, expected 1"
            )));
        }
        if q.is_nan() || q < 0.0 {
            return Err(KernelError::InvalidConfig(format!(
                "order q = {q} must be >= 0"
            )));
        }
        Ok(KernelConfig { w1, w2, w3, q })
    }

    pub fn w1(&self) -> f64 {
        self.w1
    }
    pub fn w2(&self) -> f64 {
        self.w2
    }
    pub fn w3(&self) -> f64 {
        self.w3
    }
    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn weights(&self) -> [f64; 3] {
        [self.w1, self.w2, self.w3]
    }

    pub fn with_order(self, q: f64) -> Result<Self, KernelError> {
        KernelConfig::new(self.w1, self.w2, self.w3, q)
    }

    /// Short label like `(0.5, 0.5, 0)` used in report tables.
    pub fn label(&self) -> String {
        fn fmt_w(w: f64) -> String {
            if (w - 1.0 / 3.0).abs() < 1e-9 {
                "1/3".to_string()
            } else if (w - 0.5).abs() < 1e-12 {
                "1/2".to_string()
            } else {
                format!("{w}")
            }
        }
        format!(
            "({}, {}, {})",
            fmt_w(self.w1),
            fmt_w(self.w2),
            fmt_w(self.w3)
        )
    }
}

/// The five named weight configurations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelPreset {
    Continent,
    Country,
    Artifact,
    Hierarchical,
    Uniform,
}

impl KernelPreset {
    pub const ALL: [KernelPreset; 5] = [
        KernelPreset::Continent,
        KernelPreset::Country,
        KernelPreset::Artifact,
        KernelPreset::Hierarchical,
        KernelPreset::Uniform,
    ];

    pub fn weights(self) -> (f64, f64, f64) {
        match self {
            KernelPreset::Continent => (1.0, 0.0, 0.0),
            KernelPreset::Country => (0.0, 1.0, 0.0),
            KernelPreset::Artifact => (0.0, 0.0, 1.0),
            KernelPreset::Hierarchical => (0.5, 0.5, 0.0),
            KernelPreset::Uniform => (1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0),
        }
    }

    pub fn config(self, q: f64) -> Result<KernelConfig, KernelError> {
        let (a, b, c) = self.weights();
        KernelConfig::new(a, b, c, q)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            KernelPreset::Continent => "continent",
            KernelPreset::Country => "country",
            KernelPreset::Artifact => "artifact",
            KernelPreset::Hierarchical => "hierarchical",
            KernelPreset::Uniform => "uniform",
        }
    }
}

impl fmt::Display for KernelPreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for KernelPreset {
    type Err = KernelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        KernelPreset::ALL
            .into_iter()
            .find(|p| p.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| KernelError::InvalidConfig(format!("unknown preset `{s}`")))
    }
}

/// Dense symmetric kernel matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl KernelMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.entries.chunks(self.n).map(<[f64]>::to_vec).collect()
    }

    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.n, self.n, &self.entries)
    }

    /// Wraps an arbitrary square matrix; used for kernels built outside this module.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, KernelError> {
        let n = rows.len();
        if n == 0 {
            return Err(KernelError::EmptyCollection);
        }
        let mut entries = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(KernelError::InvalidConfig(
                    "kernel matrix is not square".into(),
                ));
            }
            entries.extend_from_slice(row);
        }
        Ok(KernelMatrix { n, entries })
    }
}

/// 1 iff the items agree at `level`. Artifacts compare by id alone.
pub fn indicator_similarity(a: &MappedItem, b: &MappedItem, level: GeoLevel) -> u8 {
    let same = match level {
        GeoLevel::Continent => a.continent == b.continent,
        GeoLevel::Country => a.country == b.country,
        GeoLevel::Artifact => a.artifact_id == b.artifact_id,
    };
    u8::from(same)
}

pub fn composite_similarity(a: &MappedItem, b: &MappedItem, cfg: &KernelConfig) -> f64 {
    cfg.w1 * f64::from(indicator_similarity(a, b, GeoLevel::Continent))
        + cfg.w2 * f64::from(indicator_similarity(a, b, GeoLevel::Country))
        + cfg.w3 * f64::from(indicator_similarity(a, b, GeoLevel::Artifact))
}

pub fn build_kernel_matrix(
    items: &[MappedItem],
    cfg: &KernelConfig,
) -> Result<KernelMatrix, KernelError> {
    let n = items.len();
    if n == 0 {
        return Err(KernelError::EmptyCollection);
    }
    let mut entries = vec![0.0; n * n];
    for i in 0..n {
        entries[i * n + i] = 1.0;
        for j in (i + 1)..n {
            let v = composite_similarity(&items[i], &items[j], cfg);
            entries[i * n + j] = v;
            entries[j * n + i] = v;
        }
    }
    Ok(KernelMatrix { n, entries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geo::Continent;

    fn item(cont: Continent, country: &str, artifact: &str) -> MappedItem {
        MappedItem::from_triple("img", cont, country, artifact)
    }

    #[test]
    fn indicator_levels() {
        let jp = item(Continent::Asia, "JP", "ramen");
        let jp2 = item(Continent::Asia, "JP", "sushi");
        let india = item(Continent::Asia, "IN", "dosa");
        assert_eq!(indicator_similarity(&jp, &jp2, GeoLevel::Country), 1);
        assert_eq!(indicator_similarity(&jp, &india, GeoLevel::Country), 0);
        assert_eq!(indicator_similarity(&jp, &india, GeoLevel::Continent), 1);
        assert_eq!(
            indicator_similarity(&jp, &jp.clone(), GeoLevel::Artifact),
            1
        );
    }

    #[test]
    fn artifact_identity_ignores_geography() {
        let a = item(Continent::Asia, "JP", "ramen");
        let b = item(Continent::Europe, "FR", "ramen");
        assert_eq!(indicator_similarity(&a, &b, GeoLevel::Artifact), 1);
    }

    #[test]
    fn composite_weight_arithmetic() {
        let uniform = KernelPreset::Uniform.config(1.0).unwrap();
        let a = item(Continent::Asia, "JP", "ramen");
        let b = item(Continent::Asia, "JP", "sushi");
        assert!((composite_similarity(&a, &b, &uniform) - 2.0 / 3.0).abs() < 1e-15);

        let hier = KernelPreset::Hierarchical.config(1.0).unwrap();
        let c = item(Continent::Asia, "IN", "dosa");
        assert_eq!(composite_similarity(&a, &c, &hier), 0.5);
        for p in KernelPreset::ALL {
            assert!((composite_similarity(&a, &a, &p.config(1.0).unwrap()) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn config_validation() {
        assert!(KernelConfig::new(0.5, 0.5, 0.1, 1.0).is_err());
        assert!(KernelConfig::new(1.2, -0.2, 0.0, 1.0).is_err());
        assert!(KernelConfig::new(1.0, 0.0, 0.0, -0.5).is_err());
        assert!(KernelConfig::new(f64::NAN, 0.0, 1.0, 1.0).is_err());
        assert!(KernelConfig::new(1.0, 0.0, 0.0, f64::INFINITY).is_ok());
        let cfg: KernelConfig =
            serde_json::from_str(r#"{"w1":0.5,"w2":0.5,"w3":0.0,"q":1}"#).unwrap();
        assert_eq!(cfg, KernelPreset::Hierarchical.config(1.0).unwrap());
        assert!(
            serde_json::from_str::<KernelConfig>(r#"{"w1":0.5,"w2":0.4,"w3":0.0,"q":1}"#).is_err()
        );
    }

    #[test]
    fn small_matrices() {
        let cont = KernelPreset::Continent.config(1.0).unwrap();
        let country = KernelPreset::Country.config(1.0).unwrap();
        let a = item(Continent::Asia, "JP", "ramen");
        let b = item(Continent::Asia, "IN", "dosa");
        let same = build_kernel_matrix(&[a.clone(), a.clone()], &country).unwrap();
        assert_eq!(same.rows(), vec![vec![1.0, 1.0], vec![1.0, 1.0]]);
        assert_eq!(
            build_kernel_matrix(&[a.clone(), b.clone()], &cont)
                .unwrap()
                .rows(),
            vec![vec![1.0, 1.0], vec![1.0, 1.0]]
        );
        assert_eq!(
            build_kernel_matrix(&[a, b], &country).unwrap().rows(),
            vec![vec![1.0, 0.0], vec![0.0, 1.0]]
        );
        assert_eq!(
            build_kernel_matrix(&[], &country),
            Err(KernelError::EmptyCollection)
        );
    }

    #[test]
    fn preset_names_round_trip() {
        for p in KernelPreset::ALL {
            assert_eq!(p.as_str().parse::<KernelPreset>().unwrap(), p);
        }
        assert!("nope".parse::<KernelPreset>().is_err());
        assert_eq!(
            KernelPreset::Uniform.config(1.0).unwrap().label(),
            "(1/3, 1/3, 1/3)"
        );
        assert_eq!(
            KernelPreset::Hierarchical.config(1.0).unwrap().label(),
            "(1/2, 1/2, 0)"
        );
    }
}
