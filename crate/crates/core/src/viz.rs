//! Intertopic distance maps: cosine distances between topics, a classical
//! multidimensional-scaling projection to 2-D, and plot-ready JSON exports.

use std::fs;
use std::path::Path;

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{cosine_similarity, orient_sign, top_eigenpairs};
use crate::topics::TopicSet;

/// Fixed seed for the scaling stage's power iteration.
const MDS_SEED: u64 = 0x6d64_7332;

/// Symmetric pairwise cosine distances between non-outlier topics.
#[derive(Debug, Clone)]
pub struct TopicDistanceMatrix {
    /// Topic ids in matrix order.
    pub topic_ids: Vec<i64>,
    distances: Array2<f64>,
}

impl TopicDistanceMatrix {
    pub fn n_topics(&self) -> usize {
        self.topic_ids.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.distances[(i, j)]
    }

    /// Builds a distance matrix directly from raw distances (testing and
    /// alternative metrics). Must cover at least two topics and be square,
    /// symmetric, zero-diagonal.
    pub fn from_distances(topic_ids: Vec<i64>, distances: Array2<f64>) -> Result<Self> {
        let n = topic_ids.len();
        if n < 2 {
            return Err(Error::InsufficientTopics(n));
        }
        if distances.dim() != (n, n) {
            return Err(Error::Parameter(format!(
                "distance matrix shape {:?} does not match {} topics",
                distances.dim(),
                n
            )));
        }
        for i in 0..n {
            if distances[(i, i)] != 0.0 {
                return Err(Error::Validation("distance diagonal must be zero".into()));
            }
            for j in 0..n {
                if (distances[(i, j)] - distances[(j, i)]).abs() > 1e-12 {
                    return Err(Error::Validation("distance matrix must be symmetric".into()));
                }
            }
        }
        Ok(TopicDistanceMatrix {
            topic_ids,
            distances,
        })
    }
}

/// Computes `1 - cos` distances over the topics' full term-weight vectors.
///
/// Zero-weight topics sit at distance 1 from every other topic by
/// convention. Requires at least two non-outlier topics.
pub fn topic_distance_matrix(set: &TopicSet) -> Result<TopicDistanceMatrix> {
    let topics = set.non_outlier_topics();
    if topics.len() < 2 {
        return Err(Error::InsufficientTopics(topics.len()));
    }
    let n = topics.len();
    let mut distances = Array2::zeros((n, n));
    for i in 0..n {
        for j in (i + 1)..n {
            let zero_i = topics[i].weights.iter().all(|&w| w == 0.0);
            let zero_j = topics[j].weights.iter().all(|&w| w == 0.0);
            let d = if zero_i || zero_j {
                1.0
            } else {
                (1.0 - cosine_similarity(&topics[i].weights, &topics[j].weights)).max(0.0)
            };
            distances[(i, j)] = d;
            distances[(j, i)] = d;
        }
    }
    Ok(TopicDistanceMatrix {
        topic_ids: topics.iter().map(|t| t.id).collect(),
        distances,
    })
}

/// Result of the 2-D classical MDS projection.
#[derive(Debug, Clone)]
pub struct MdsResult {
    /// One `(x, y)` per topic, in distance-matrix order.
    pub coords: Vec<(f64, f64)>,
    /// The two leading eigenvalues of the double-centered matrix.
    pub eigenvalues: (f64, f64),
    /// Set when a negative eigenvalue was clamped to zero.
    pub clamped_negative: bool,
}

/// Classical (Torgerson) MDS: double-center the squared distances, take the
/// top-2 eigenpairs by seeded power iteration with deflation, and scale the
/// eigenvectors by the square roots of their (clamped) eigenvalues.
pub fn mds_2d(matrix: &TopicDistanceMatrix) -> MdsResult {
    let n = matrix.n_topics();
    // B = -1/2 J D^2 J expressed through row/column/grand means
    let mut sq = matrix.distances.clone();
    sq.mapv_inplace(|d| d * d);
    let row_means: Array1<f64> = sq.mean_axis(ndarray::Axis(1)).expect("n >= 2");
    let grand_mean = sq.mean().expect("n >= 2");
    let mut b = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            b[(i, j)] = -0.5 * (sq[(i, j)] - row_means[i] - row_means[j] + grand_mean);
        }
    }

    let pairs = top_eigenpairs(&b, 2, MDS_SEED);
    let mut axes: Vec<Array1<f64>> = Vec::with_capacity(2);
    let mut eigenvalues = [0.0f64; 2];
    let mut clamped = false;
    for (idx, (lambda, vec)) in pairs.into_iter().enumerate() {
        eigenvalues[idx] = lambda;
        let scale = if lambda > 0.0 {
            lambda.sqrt()
        } else {
            clamped = clamped || lambda < 0.0;
            0.0
        };
        let mut v = vec;
        orient_sign(&mut v);
        axes.push(v * scale);
    }

    let coords = (0..n).map(|i| (axes[0][i], axes[1][i])).collect();
    MdsResult {
        coords,
        eigenvalues: (eigenvalues[0], eigenvalues[1]),
        clamped_negative: clamped,
    }
}

/// One plotted topic in the intertopic distance map.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TopicMapPoint {
    pub topic_id: i64,
    pub x: f64,
    pub y: f64,
    pub size: f64,
    pub top_words: Vec<String>,
}

/// Writes the intertopic distance map: one entry per non-outlier topic with
/// its 2-D position, size, and top-5 words.
pub fn export_distance_map(set: &TopicSet, mds: &MdsResult, path: &Path) -> Result<()> {
    let topics = set.non_outlier_topics();
    if topics.len() != mds.coords.len() {
        return Err(Error::Parameter(format!(
            "{} coordinates for {} topics",
            mds.coords.len(),
            topics.len()
        )));
    }
    let points: Vec<TopicMapPoint> = topics
        .iter()
        .zip(&mds.coords)
        .map(|(topic, &(x, y))| TopicMapPoint {
            topic_id: topic.id,
            x,
            y,
            size: topic.size,
            top_words: topic
                .top_terms
                .iter()
                .take(5)
                .map(|(term, _)| term.clone())
                .collect(),
        })
        .collect();
    write_json(path, &points)
}

/// Per-topic `(term, weight)` pairs for horizontal bar charts.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TopicBars {
    pub topic_id: i64,
    pub terms: Vec<(String, f64)>,
}

/// Writes per-topic weighted term lists, capped at `n_words` each.
pub fn export_topic_bars(set: &TopicSet, n_words: usize, path: &Path) -> Result<()> {
    if n_words < 1 {
        return Err(Error::Parameter("n_words must be >= 1".into()));
    }
    let bars: Vec<TopicBars> = set
        .topics
        .iter()
        .map(|t| TopicBars {
            topic_id: t.id,
            terms: t.top_terms.iter().take(n_words).cloned().collect(),
        })
        .collect();
    write_json(path, &bars)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| Error::json(path, e))?;
    bytes.push(b'\n');
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}
