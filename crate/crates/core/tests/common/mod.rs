//! Independent oracles and generators shared by the integration tests.
#![allow(dead_code)]

use std::collections::HashMap;
use std::path::PathBuf;

use cubekit_core::stats::RatingTriple;
use cubekit_core::{Continent, CountryTable, MappedItem};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../core/tests/fixtures")
        .join(name)
}

/// Cyclic Jacobi eigenvalues of a symmetric matrix, ascending.
#[allow(clippy::needless_range_loop)]
pub fn jacobi_eigenvalues(rows: &[Vec<f64>]) -> Vec<f64> {
    let n = rows.len();
    let mut a: Vec<Vec<f64>> = rows.to_vec();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-26 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    eig.sort_by(f64::total_cmp);
    eig
}

/// Vendi score of order `q` from raw eigenvalues, written from the definition.
pub fn vendi_from_eigenvalues(eig: &[f64], q: f64) -> f64 {
    let total: f64 = eig.iter().map(|v| v.max(0.0)).sum();
    let p: Vec<f64> = eig
        .iter()
        .map(|v| v.max(0.0) / total)
        .filter(|&v| v > 1e-15)
        .collect();
    if (q - 1.0).abs() < 1e-12 {
        (-p.iter().map(|v| v * v.ln()).sum::<f64>()).exp()
    } else {
        p.iter()
            .map(|v| v.powf(q))
            .sum::<f64>()
            .powf(1.0 / (1.0 - q))
    }
}

/// `exp` of the Shannon entropy of label proportions.
pub fn partition_entropy_exp(labels: &[usize]) -> f64 {
    let mut counts: HashMap<usize, f64> = HashMap::new();
    for l in labels {
        *counts.entry(*l).or_default() += 1.0;
    }
    let n = labels.len() as f64;
    let h: f64 = counts.values().map(|c| -(c / n) * (c / n).ln()).sum();
    h.exp()
}

/// Ordinal Krippendorff's α by enumerating every pair of pairable values.
pub fn alpha_bruteforce(triples: &[RatingTriple], scale_max: u8) -> Option<f64> {
    let units: Vec<Vec<u8>> = triples
        .iter()
        .map(|t| t.present().collect::<Vec<u8>>())
        .filter(|u| u.len() >= 2)
        .collect();
    let all: Vec<u8> = units.iter().flatten().copied().collect();
    let n = all.len() as f64;
    if all.is_empty() {
        return None;
    }
    let count = |g: u8| all.iter().filter(|&&v| v == g).count() as f64;
    let delta2 = |c: u8, k: u8| -> f64 {
        let (lo, hi) = (c.min(k), c.max(k));
        let mut s = 0.0;
        for g in 1..=scale_max {
            if g >= lo && g <= hi {
                s += count(g);
            }
        }
        let d = s - (count(lo) + count(hi)) / 2.0;
        d * d
    };
    let mut observed = 0.0;
    for u in &units {
        let m = u.len() as f64;
        for i in 0..u.len() {
            for j in 0..u.len() {
                if i != j {
                    observed += delta2(u[i], u[j]) / (m - 1.0);
                }
            }
        }
    }
    observed /= n;
    let mut expected = 0.0;
    for a in 0..all.len() {
        for b in 0..all.len() {
            if a != b {
                expected += delta2(all[a], all[b]);
            }
        }
    }
    expected /= n * (n - 1.0);
    if expected == 0.0 {
        return None;
    }
    Some(1.0 - observed / expected)
}

/// Random collection with nested labels: artifacts belong to one country,
/// countries to their table continent.
pub fn random_items<R: Rng>(rng: &mut R, n: usize) -> Vec<MappedItem> {
    let table = CountryTable::shipped();
    let mut countries: Vec<(String, Continent)> = Vec::new();
    for cont in Continent::ALL {
        let mut codes: Vec<_> = table
            .iter()
            .filter(|c| c.continent == cont)
            .map(|c| c.code.clone())
            .collect();
        codes.sort();
        let take = rng.gen_range(1..=3);
        for code in codes.into_iter().take(take) {
            countries.push((code, cont));
        }
    }
    let used_continents = rng.gen_range(1..=Continent::ALL.len());
    let mut conts: Vec<Continent> = Continent::ALL.to_vec();
    conts.shuffle(rng);
    conts.truncate(used_continents);
    countries.retain(|(_, c)| conts.contains(c));
    let artifacts_per_country = rng.gen_range(1..=4);
    (0..n)
        .map(|i| {
            let (code, cont) = countries.choose(rng).unwrap().clone();
            let art = format!("{code}-{}", rng.gen_range(0..artifacts_per_country));
            MappedItem::from_triple(format!("img{i}"), cont, code, art)
        })
        .collect()
}
