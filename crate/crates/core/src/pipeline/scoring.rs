use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use super::plan::EvalPlan;
use super::quality::QualityProvider;
use super::PipelineError;
use crate::item::MappedItem;
use crate::kernels::{build_kernel_matrix, KernelConfig};
use crate::vendi::{combine, normalized_spectrum, vendi_score, DiversityResult, QualityScore};

/// Smallest batch that still gets a diversity score.
pub const MIN_BATCH_ITEMS: usize = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchScore {
    pub template_index: usize,
    pub batch_index: usize,
    pub config: KernelConfig,
    pub result: DiversityResult,
    /// Planned images missing from the batch (unmappable or filtered out).
    pub excluded_count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExcludedBatch {
    pub template_index: usize,
    pub batch_index: usize,
    pub usable: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScoreRun {
    pub scores: Vec<BatchScore>,
    pub excluded: Vec<ExcludedBatch>,
}

/// Groups mapped items by `(template, seed batch)` following `plan`, keeping seed order.
pub fn group_batches(
    plan: &EvalPlan,
    mapped: &[MappedItem],
) -> Result<BTreeMap<(usize, usize), Vec<MappedItem>>, PipelineError> {
    let mut groups: BTreeMap<(usize, usize), Vec<MappedItem>> = BTreeMap::new();
    for t in 0..plan.templates.len() {
        for b in 0..plan.seed_batches {
            groups.insert((t, b), Vec::new());
        }
    }
    let mut ids = HashSet::new();
    let mut slots = HashSet::new();
    for item in mapped {
        if !ids.insert(item.image_id.as_str()) {
            return Err(PipelineError::Plan(format!(
                "duplicate image_id `{}`",
                item.image_id
            )));
        }
        if !slots.insert((item.template_index, item.seed)) {
            return Err(PipelineError::Plan(format!(
                "two images for template {} seed {}",
                item.template_index, item.seed
            )));
        }
        let batch = plan.batch_of(item.seed).ok_or_else(|| {
            PipelineError::Plan(format!(
                "image `{}` has seed {} outside the plan",
                item.image_id, item.seed
            ))
        })?;
        let group = groups
            .get_mut(&(item.template_index, batch))
            .ok_or_else(|| {
                PipelineError::Plan(format!(
                    "image `{}` has template index {} but the plan has {} templates",
                    item.image_id,
                    item.template_index,
                    plan.templates.len()
                ))
            })?;
        group.push(item.clone());
    }
    for group in groups.values_mut() {
        group.sort_by_key(|i| i.seed);
    }
    Ok(groups)
}

/// Scores every planned batch under every config.
///
/// Quality is looked up only for items that survived mapping and filtering.
/// Batches with fewer than [`MIN_BATCH_ITEMS`] items are reported in
/// `excluded` instead of being scored.
pub fn score_batches(
    plan: &EvalPlan,
    mapped: &[MappedItem],
    cfgs: &[KernelConfig],
    quality: &dyn QualityProvider,
) -> Result<ScoreRun, PipelineError> {
    let groups = group_batches(plan, mapped)?;
    let mut run = ScoreRun::default();
    for ((t, b), items) in groups {
        if items.len() < MIN_BATCH_ITEMS {
            run.excluded.push(ExcludedBatch {
                template_index: t,
                batch_index: b,
                usable: items.len(),
            });
            continue;
        }
        let qualities: Vec<QualityScore> = items
            .iter()
            .map(|i| quality.quality(&i.image_id))
            .collect::<Result<_, _>>()?;
        for cfg in cfgs {
            let k = build_kernel_matrix(&items, cfg).map_err(crate::vendi::VendiError::from)?;
            let spectrum = normalized_spectrum(&k)?;
            let vs = vendi_score(&spectrum, cfg.q())?;
            run.scores.push(BatchScore {
                template_index: t,
                batch_index: b,
                config: *cfg,
                result: combine(vs, &qualities, cfg.q()),
                excluded_count: plan.batch_size - items.len(),
            });
        }
    }
    Ok(run)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::concept::Concept;
    use crate::geo::Continent;
    use crate::kernels::KernelPreset;
    use crate::pipeline::plan::{build_eval_plan, PlanOverrides};
    use crate::pipeline::quality::UniformQuality;

    struct Half;
    impl QualityProvider for Half {
        fn quality(&self, _: &str) -> Result<QualityScore, PipelineError> {
            Ok(QualityScore::new(0.5).unwrap())
        }
    }

    fn one_batch_plan() -> EvalPlan {
        let o = PlanOverrides {
            template_count: Some(1),
            seed_batches: Some(1),
            ..Default::default()
        };
        build_eval_plan(Concept::Cuisine, None, &o).unwrap()
    }

    fn items(artifacts: &[&str]) -> Vec<MappedItem> {
        artifacts
            .iter()
            .enumerate()
            .map(|(i, a)| MappedItem {
                image_id: format!("t0-s{i}"),
                template_index: 0,
                seed: i as u64,
                continent: Continent::Asia,
                country: "JP".into(),
                artifact_id: a.to_string(),
            })
            .collect()
    }

    fn artifact_cfg() -> Vec<KernelConfig> {
        vec![KernelPreset::Artifact.config(1.0).unwrap()]
    }

    #[test]
    fn distinct_items_at_half_quality() {
        let run = score_batches(
            &one_batch_plan(),
            &items(&["a", "b", "c", "d", "e", "f", "g", "h"]),
            &artifact_cfg(),
            &Half,
        )
        .unwrap();
        assert_eq!(run.scores.len(), 1);
        assert!((run.scores[0].result.cd - 0.5).abs() < 1e-12);
        assert_eq!(run.scores[0].excluded_count, 0);
    }

    #[test]
    fn identical_items() {
        let run = score_batches(
            &one_batch_plan(),
            &items(&["a"; 8]),
            &artifact_cfg(),
            &UniformQuality,
        )
        .unwrap();
        assert!((run.scores[0].result.cd - 0.125).abs() < 1e-12);
    }

    #[test]
    fn two_groups_of_four() {
        let run = score_batches(
            &one_batch_plan(),
            &items(&["a", "a", "a", "a", "b", "b", "b", "b"]),
            &artifact_cfg(),
            &Half,
        )
        .unwrap();
        let r = run.scores[0].result;
        assert!((r.vs - 2.0).abs() < 1e-9);
        assert!((r.cd - 0.125).abs() < 1e-9);
    }

    #[test]
    fn small_batches_are_excluded_not_zeroed() {
        let run = score_batches(&one_batch_plan(), &items(&["a"]), &artifact_cfg(), &Half).unwrap();
        assert!(run.scores.is_empty());
        assert_eq!(
            run.excluded,
            vec![ExcludedBatch {
                template_index: 0,
                batch_index: 0,
                usable: 1
            }]
        );
    }

    #[test]
    fn partial_batch_rescored_over_survivors() {
        let run = score_batches(
            &one_batch_plan(),
            &items(&["a", "b", "c"]),
            &artifact_cfg(),
            &UniformQuality,
        )
        .unwrap();
        let s = &run.scores[0];
        assert_eq!(s.result.n, 3);
        assert_eq!(s.excluded_count, 5);
        assert!((s.result.cd - 1.0).abs() < 1e-9);
    }

    #[test]
    fn missing_quality_names_image() {
        struct Empty;
        impl QualityProvider for Empty {
            fn quality(&self, id: &str) -> Result<QualityScore, PipelineError> {
                Err(PipelineError::MissingQuality(id.to_string()))
            }
        }
        let err = score_batches(
            &one_batch_plan(),
            &items(&["a", "b"]),
            &artifact_cfg(),
            &Empty,
        )
        .unwrap_err();
        assert!(err.to_string().contains("t0-s0"), "{err}");
    }

    #[test]
    fn items_outside_plan_are_rejected() {
        let mut bad = items(&["a", "b"]);
        bad[1].seed = 99;
        assert!(score_batches(&one_batch_plan(), &bad, &artifact_cfg(), &Half).is_err());
        let mut bad = items(&["a", "b"]);
        bad[1].template_index = 3;
        assert!(score_batches(&one_batch_plan(), &bad, &artifact_cfg(), &Half).is_err());
        let mut dup = items(&["a", "b"]);
        dup[1].image_id = dup[0].image_id.clone();
        assert!(score_batches(&one_batch_plan(), &dup, &artifact_cfg(), &Half).is_err());
    }
}
