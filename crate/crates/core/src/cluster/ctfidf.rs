//! Class-based TF-IDF: clusters form classes and inverse class frequency
//! replaces inverse document frequency.
//!
//! For term `t` in class `c`: `weight(t, c) = tf(t, c) * ln(1 + A / f(t))`
//! where `A` is the average token count per class and `f(t)` is the total
//! corpus frequency of `t`.

use std::collections::BTreeMap;

use crate::cluster::hdbscan::ClusterLabels;
use crate::error::{Error, Result};
use crate::topics::{top_terms, Technique, Topic, TopicSet};
use crate::vectorize::{DocTermMatrix, Vocabulary};

/// Noise label in [`ClusterLabels`].
pub const OUTLIER_LABEL: i64 = -1;

/// Per-class term weights over a shared vocabulary.
#[derive(Debug, Clone)]
pub struct CTfidfWeights {
    /// Class labels in column order; may include [`OUTLIER_LABEL`].
    pub classes: Vec<i64>,
    /// `weights[class_index][term_index]`.
    pub weights: Vec<Vec<f64>>,
    /// Normalizing constant: average token count per class.
    pub avg_words_per_class: f64,
    /// Total corpus frequency of each term.
    pub term_freq_total: Vec<f64>,
    /// Document count per class, aligned with `classes`.
    pub class_sizes: Vec<usize>,
}

impl CTfidfWeights {
    pub fn class_index(&self, label: i64) -> Option<usize> {
        self.classes.iter().position(|&c| c == label)
    }
}

/// Computes class-based TF-IDF weights from a count matrix and cluster
/// labels.
///
/// The outlier class is included only when `include_outliers` is set; the
/// average class token count spans exactly the included classes, while term
/// frequencies `f(t)` always cover the whole corpus.
pub fn ctfidf(
    counts: &DocTermMatrix,
    labels: &ClusterLabels,
    include_outliers: bool,
) -> Result<CTfidfWeights> {
    if counts.n_docs() != labels.labels().len() {
        return Err(Error::Validation(format!(
            "labels cover {} documents but the matrix has {}",
            labels.labels().len(),
            counts.n_docs()
        )));
    }
    if labels.n_clusters() == 0 {
        return Err(Error::EmptyClasses);
    }

    let mut classes: Vec<i64> = (0..labels.n_clusters() as i64).collect();
    if include_outliers && labels.labels().contains(&OUTLIER_LABEL) {
        classes.push(OUTLIER_LABEL);
    }

    let n_terms = counts.n_terms();
    let mut term_freq_total = vec![0.0; n_terms];
    for (t, _, v) in counts.entries() {
        term_freq_total[t] += v;
    }

    // per-class term counts, concatenating each class's documents
    let mut class_tf: BTreeMap<i64, Vec<f64>> = classes
        .iter()
        .map(|&c| (c, vec![0.0; n_terms]))
        .collect();
    let mut class_sizes: BTreeMap<i64, usize> = classes.iter().map(|&c| (c, 0)).collect();
    for (doc, &label) in labels.labels().iter().enumerate() {
        if let Some(tf) = class_tf.get_mut(&label) {
            for &(t, v) in counts.column(doc) {
                tf[t] += v;
            }
            *class_sizes.get_mut(&label).unwrap() += 1;
        }
    }

    let total_tokens: f64 = class_tf.values().flatten().sum();
    let avg_words_per_class = total_tokens / classes.len() as f64;

    let weights = classes
        .iter()
        .map(|c| {
            let tf = &class_tf[c];
            (0..n_terms)
                .map(|t| {
                    if tf[t] == 0.0 {
                        0.0
                    } else {
                        tf[t] * (1.0 + avg_words_per_class / term_freq_total[t]).ln()
                    }
                })
                .collect()
        })
        .collect();

    let class_sizes = classes.iter().map(|c| class_sizes[c]).collect();
    Ok(CTfidfWeights {
        classes,
        weights,
        avg_words_per_class,
        term_freq_total,
        class_sizes,
    })
}

/// Builds the cluster pipeline's topic set from c-TF-IDF weights.
///
/// One topic per non-noise class, sized by document count and ordered by
/// size descending (ties by id ascending). The outlier topic, when present
/// in the weights, is appended last with id `-1` so consumers can skip it.
pub fn cluster_topic_set(
    weights: &CTfidfWeights,
    vocab: &Vocabulary,
    n_words: usize,
) -> TopicSet {
    let mut regular: Vec<Topic> = Vec::new();
    let mut outlier: Option<Topic> = None;
    for (i, &class) in weights.classes.iter().enumerate() {
        let topic = Topic {
            id: class,
            size: weights.class_sizes[i] as f64,
            top_terms: top_terms(&weights.weights[i], &vocab.terms, n_words),
            weights: weights.weights[i].clone(),
        };
        if class == OUTLIER_LABEL {
            outlier = Some(topic);
        } else {
            regular.push(topic);
        }
    }
    regular.sort_by(|a, b| {
        b.size
            .partial_cmp(&a.size)
            .expect("finite sizes")
            .then_with(|| a.id.cmp(&b.id))
    });
    if let Some(topic) = outlier {
        regular.push(topic);
    }
    TopicSet {
        technique: Technique::Cluster,
        vocabulary: vocab.terms.clone(),
        topics: regular,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vectorize::{build_vocabulary, count_matrix};

    fn labels_of(raw: Vec<i64>) -> ClusterLabels {
        ClusterLabels::from_labels(raw).unwrap()
    }

    fn two_class_fixture() -> (Vocabulary, DocTermMatrix, ClusterLabels) {
        let texts = ["waste waste cleanup", "solar energy"];
        let vocab = build_vocabulary(&texts, 1, 1.0, &Default::default()).unwrap();
        let counts = count_matrix(&texts, &vocab);
        let labels = labels_of(vec![0, 1]);
        (vocab, counts, labels)
    }

    #[test]
    fn hand_computed_two_class_example() {
        let (vocab, counts, labels) = two_class_fixture();
        let weights = ctfidf(&counts, &labels, false).unwrap();
        // A = (3 + 2) / 2 = 2.5, f(waste) = 2 -> 2 * ln(1 + 2.5/2)
        assert!((weights.avg_words_per_class - 2.5).abs() < 1e-12);
        let w = vocab.index_of("waste").unwrap();
        let expected = 2.0 * (2.25f64).ln();
        assert!((weights.weights[0][w] - expected).abs() < 1e-9);
        assert!((expected - 1.62186).abs() < 1e-5);
    }

    #[test]
    fn zero_class_count_gives_zero_weight() {
        let (vocab, counts, labels) = two_class_fixture();
        let weights = ctfidf(&counts, &labels, false).unwrap();
        let s = vocab.index_of("solar").unwrap();
        assert_eq!(weights.weights[0][s], 0.0);
        assert!(weights.weights[1][s] > 0.0);
    }

    #[test]
    fn equal_class_counts_give_equal_weights() {
        let texts = ["shared alpha", "shared beta"];
        let vocab = build_vocabulary(&texts, 1, 1.0, &Default::default()).unwrap();
        let counts = count_matrix(&texts, &vocab);
        let labels = labels_of(vec![0, 1]);
        let weights = ctfidf(&counts, &labels, false).unwrap();
        let t = vocab.index_of("shared").unwrap();
        assert!((weights.weights[0][t] - weights.weights[1][t]).abs() < 1e-15);
    }

    #[test]
    fn class_exclusive_term_outranks_uniform_term_of_equal_class_tf() {
        // "rare" appears twice, all in class 0; "everywhere" appears twice
        // in class 0 and twice more elsewhere
        let texts = ["rare rare everywhere everywhere", "everywhere filler", "everywhere filler"];
        let vocab = build_vocabulary(&texts, 1, 1.0, &Default::default()).unwrap();
        let counts = count_matrix(&texts, &vocab);
        let labels = labels_of(vec![0, 1, 1]);
        let weights = ctfidf(&counts, &labels, false).unwrap();
        let rare = vocab.index_of("rare").unwrap();
        let everywhere = vocab.index_of("everywhere").unwrap();
        assert!(
            weights.weights[0][rare] > weights.weights[0][everywhere],
            "exclusive term must outrank the uniform one"
        );
    }

    #[test]
    fn zero_classes_is_an_error() {
        let (_, counts, _) = two_class_fixture();
        let noise = labels_of(vec![-1, -1]);
        assert!(matches!(
            ctfidf(&counts, &noise, false),
            Err(Error::EmptyClasses)
        ));
        // the outlier class alone does not count as a class
        assert!(matches!(
            ctfidf(&counts, &noise, true),
            Err(Error::EmptyClasses)
        ));
    }

    #[test]
    fn outlier_class_is_computable_when_configured() {
        let texts = ["waste cleanup", "solar energy", "stray words"];
        let vocab = build_vocabulary(&texts, 1, 1.0, &Default::default()).unwrap();
        let counts = count_matrix(&texts, &vocab);
        let labels = labels_of(vec![0, 0, -1]);
        let with = ctfidf(&counts, &labels, true).unwrap();
        assert_eq!(with.classes, vec![0, OUTLIER_LABEL]);
        let without = ctfidf(&counts, &labels, false).unwrap();
        assert_eq!(without.classes, vec![0]);
    }

    #[test]
    fn topic_set_orders_by_size_descending_and_flags_outliers() {
        let texts = [
            "alpha alpha", "alpha beta", // class 0: 2 docs
            "gamma gamma", "gamma delta", "gamma gamma delta", // class 1: 3 docs
            "noise text",
        ];
        let vocab = build_vocabulary(&texts, 1, 1.0, &Default::default()).unwrap();
        let counts = count_matrix(&texts, &vocab);
        let labels = labels_of(vec![0, 0, 1, 1, 1, -1]);
        let weights = ctfidf(&counts, &labels, true).unwrap();
        let set = cluster_topic_set(&weights, &vocab, 10);
        assert_eq!(set.technique, Technique::Cluster);
        assert_eq!(set.topics[0].id, 1);
        assert_eq!(set.topics[0].size, 3.0);
        assert_eq!(set.topics[1].id, 0);
        assert_eq!(set.topics[1].size, 2.0);
        assert_eq!(set.topics[2].id, OUTLIER_LABEL);
        assert!(set.topics[2].is_outlier());
        assert_eq!(set.non_outlier_topics().len(), 2);
    }

    #[test]
    fn weight_zero_iff_class_count_zero() {
        let texts = ["waste waste cleanup", "solar energy", "grid solar"];
        let vocab = build_vocabulary(&texts, 1, 1.0, &Default::default()).unwrap();
        let counts = count_matrix(&texts, &vocab);
        let labels = labels_of(vec![0, 1, 1]);
        let weights = ctfidf(&counts, &labels, false).unwrap();
        for (ci, _) in weights.classes.iter().enumerate() {
            for t in 0..vocab.len() {
                let tf: f64 = labels
                    .labels()
                    .iter()
                    .enumerate()
                    .filter(|&(_, &l)| l == weights.classes[ci])
                    .map(|(d, _)| counts.get(t, d))
                    .sum();
                assert_eq!(tf == 0.0, weights.weights[ci][t] == 0.0);
            }
        }
    }
}
