//! Topics and topic sets shared by the NMF and cluster pipelines.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which pipeline produced a topic set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Technique {
    Nmf,
    Cluster,
}

impl std::fmt::Display for Technique {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Technique::Nmf => f.write_str("nmf"),
            Technique::Cluster => f.write_str("cluster"),
        }
    }
}

/// A single topic: weighted top terms plus its full term-weight vector over
/// the owning set's vocabulary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Topic {
    /// Topic id; `-1` is reserved for the cluster pipeline's outlier topic.
    pub id: i64,
    /// Prevalence: column sum of the topic-document factor for NMF, document
    /// count for clusters.
    pub size: f64,
    /// Highest-weight terms, descending, ties broken lexicographically.
    pub top_terms: Vec<(String, f64)>,
    /// Weight for every vocabulary term, aligned with the set's vocabulary.
    pub weights: Vec<f64>,
}

impl Topic {
    /// The outlier topic collects documents no cluster claimed; downstream
    /// consumers skip it.
    pub fn is_outlier(&self) -> bool {
        self.id < 0
    }
}

/// An ordered collection of topics over a shared vocabulary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicSet {
    pub technique: Technique,
    pub vocabulary: Vec<String>,
    pub topics: Vec<Topic>,
}

impl TopicSet {
    /// Topics excluding the outlier topic, in set order.
    pub fn non_outlier_topics(&self) -> Vec<&Topic> {
        self.topics.iter().filter(|t| !t.is_outlier()).collect()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut bytes = serde_json::to_vec_pretty(self).map_err(|e| Error::json(path, e))?;
        bytes.push(b'\n');
        fs::write(path, bytes).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        let set: TopicSet = serde_json::from_slice(&bytes).map_err(|e| Error::json(path, e))?;
        for topic in &set.topics {
            if topic.weights.len() != set.vocabulary.len() {
                return Err(Error::Validation(format!(
                    "{}: topic {} has {} weights for a vocabulary of {}",
                    path.display(),
                    topic.id,
                    topic.weights.len(),
                    set.vocabulary.len()
                )));
            }
        }
        Ok(set)
    }
}

/// Selects the `n_words` highest-weight terms from a weight vector,
/// descending, with lexicographic tie-break. Zero-weight terms never appear.
pub fn top_terms(weights: &[f64], vocabulary: &[String], n_words: usize) -> Vec<(String, f64)> {
    let mut ranked: Vec<(usize, f64)> = weights
        .iter()
        .copied()
        .enumerate()
        .filter(|&(_, w)| w > 0.0)
        .collect();
    ranked.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| vocabulary[a.0].cmp(&vocabulary[b.0]))
    });
    ranked
        .into_iter()
        .take(n_words)
        .map(|(i, w)| (vocabulary[i].clone(), w))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn top_terms_sorts_by_weight_descending() {
        let vocab: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
        let terms = top_terms(&[0.9, 0.1, 0.0], &vocab, 2);
        assert_eq!(terms, vec![("a".to_string(), 0.9), ("b".to_string(), 0.1)]);
    }

    #[test]
    fn top_terms_breaks_ties_lexicographically() {
        let vocab: Vec<String> = ["zeta", "alpha", "mid"].iter().map(|s| s.to_string()).collect();
        let terms = top_terms(&[0.5, 0.5, 0.5], &vocab, 3);
        let names: Vec<_> = terms.iter().map(|(t, _)| t.as_str()).collect();
        assert_eq!(names, vec!["alpha", "mid", "zeta"]);
    }

    #[test]
    fn top_terms_caps_at_available_nonzero_terms() {
        let vocab: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
        let terms = top_terms(&[0.0, 0.3, 0.2], &vocab, 10);
        assert_eq!(terms.len(), 2);
    }

    #[test]
    fn load_rejects_weight_vectors_that_do_not_match_the_vocabulary() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("topics.json");
        std::fs::write(
            &path,
            r#"{"technique":"nmf","vocabulary":["a","b"],"topics":
               [{"id":0,"size":1.0,"top_terms":[],"weights":[0.5]}]}"#,
        )
        .unwrap();
        let err = TopicSet::load(&path).unwrap_err();
        assert!(matches!(err, Error::Validation(_)));
    }

    #[test]
    fn topic_set_round_trips_through_json() {
        let dir = tempfile::tempdir().unwrap();
        let set = TopicSet {
            technique: Technique::Cluster,
            vocabulary: vec!["solar".into(), "waste".into()],
            topics: vec![
                Topic {
                    id: 0,
                    size: 5.0,
                    top_terms: vec![("solar".into(), 1.5)],
                    weights: vec![1.5, 0.0],
                },
                Topic {
                    id: -1,
                    size: 2.0,
                    top_terms: vec![],
                    weights: vec![0.0, 0.0],
                },
            ],
        };
        let path = dir.path().join("topics.json");
        set.save(&path).unwrap();
        let loaded = TopicSet::load(&path).unwrap();
        assert_eq!(loaded, set);
        assert_eq!(loaded.non_outlier_topics().len(), 1);
    }
}
