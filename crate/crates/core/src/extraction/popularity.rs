use super::traverse::ArtifactRecord;
use crate::clients::{run_bounded, ClientError};

/// Search-result counts localized to a country (`gl` is a lowercase ISO code).
pub trait PopularityClient: Sync {
    fn count(&self, label: &str, country_geo: &str) -> Result<u64, ClientError>;
}

#[derive(Debug, Clone, PartialEq)]
pub struct PopularityRanking {
    /// Descending by score, ties by node id; failed lookups score -1 and sort last.
    pub entries: Vec<(ArtifactRecord, i64)>,
    pub failures: usize,
}

pub fn rank_by_popularity(
    artifacts: &[ArtifactRecord],
    client: &dyn PopularityClient,
    parallel: usize,
) -> PopularityRanking {
    let counts = run_bounded(parallel, artifacts, |_, a| {
        client.count(&a.label, &a.country.to_ascii_lowercase())
    });
    let mut failures = 0;
    let mut entries: Vec<(ArtifactRecord, i64)> = artifacts
        .iter()
        .cloned()
        .zip(counts)
        .map(|(a, c)| match c {
            Ok(n) => (a, i64::try_from(n).unwrap_or(i64::MAX)),
            Err(e) => {
                log::warn!("popularity lookup failed for {}: {e}", a.node_id);
                failures += 1;
                (a, -1)
            }
        })
        .collect();
    entries.sort_by(|(a, sa), (b, sb)| sb.cmp(sa).then_with(|| a.node_id.cmp(&b.node_id)));
    PopularityRanking { entries, failures }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::concept::Concept;
    use crate::extraction::Provenance;
    use crate::geo::Continent;
    use std::collections::HashMap;

    fn rec(id: &str, label: &str) -> ArtifactRecord {
        ArtifactRecord {
            node_id: id.into(),
            label: label.into(),
            concept: Concept::Landmarks,
            art_subkind: None,
            country: "FR".into(),
            continent: Continent::Europe,
            hop: Some(1),
            provenance: Provenance::Kb,
        }
    }

    struct Counts(HashMap<&'static str, u64>);

    impl PopularityClient for Counts {
        fn count(&self, label: &str, gl: &str) -> Result<u64, ClientError> {
            assert_eq!(gl, "fr");
            self.0
                .get(label)
                .copied()
                .ok_or_else(|| ClientError::Transport("quota exceeded".into()))
        }
    }

    #[test]
    fn descending_order() {
        let client = Counts(HashMap::from([("a", 10), ("b", 1000), ("c", 500)]));
        let arts = [rec("Q1", "a"), rec("Q2", "b"), rec("Q3", "c")];
        let r = rank_by_popularity(&arts, &client, 2);
        let scores: Vec<i64> = r.entries.iter().map(|e| e.1).collect();
        assert_eq!(scores, vec![1000, 500, 10]);
        assert_eq!(r.failures, 0);
    }

    #[test]
    fn ties_break_on_node_id() {
        let client = Counts(HashMap::from([("a", 5), ("b", 5)]));
        let r = rank_by_popularity(&[rec("Q9", "a"), rec("Q10", "b")], &client, 1);
        let ids: Vec<&str> = r.entries.iter().map(|e| e.0.node_id.as_str()).collect();
        assert_eq!(ids, vec!["Q10", "Q9"]);
    }

    #[test]
    fn failures_sort_last() {
        let client = Counts(HashMap::from([("a", 0)]));
        let r = rank_by_popularity(&[rec("Q1", "missing"), rec("Q2", "a")], &client, 1);
        assert_eq!(r.entries[0].1, 0);
        assert_eq!(r.entries[1].1, -1);
        assert_eq!(r.failures, 1);
    }

    #[test]
    fn empty_input() {
        let r = rank_by_popularity(&[], &Counts(HashMap::new()), 4);
        assert!(r.entries.is_empty());
    }
}
