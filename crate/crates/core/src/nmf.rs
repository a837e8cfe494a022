//! Nonnegative matrix factorization with multiplicative Frobenius updates.
//!
//! The TF-IDF matrix `A` (terms x documents) is factored as `A ~ W H` with
//! `W` terms x topics and `H` topics x documents, both nonnegative. Updates
//! follow the Lee-Seung rules, which never increase the Frobenius objective.

use std::fs;
use std::path::Path;

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::frobenius_norm;
use crate::topics::{top_terms, Technique, Topic, TopicSet};
use crate::vectorize::{DocTermMatrix, Vocabulary};

/// Denominator guard for the multiplicative updates.
const EPS: f64 = 1e-12;

/// Fit parameters for [`nmf_fit`].
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct NmfParams {
    /// Topic count.
    pub k: usize,
    pub seed: u64,
    pub max_iter: usize,
    /// Stop when the relative objective improvement drops below this.
    pub tol: f64,
}

impl Default for NmfParams {
    fn default() -> Self {
        NmfParams {
            k: 10,
            seed: 42,
            max_iter: 200,
            tol: 1e-6,
        }
    }
}

/// A fitted factorization together with its objective history.
#[derive(Debug, Clone)]
pub struct NmfModel {
    /// Term-topics factor, `n_terms x k`.
    pub w: Array2<f64>,
    /// Topics-documents factor, `k x n_docs`.
    pub h: Array2<f64>,
    pub k: usize,
    pub seed: u64,
    /// Frobenius error `||A - WH||_F` after each iteration.
    pub objective_trace: Vec<f64>,
}

/// Factorizes a sparse document-term matrix. See [`nmf_fit_dense`].
pub fn nmf_fit(a: &DocTermMatrix, params: NmfParams) -> Result<NmfModel> {
    nmf_fit_dense(&a.to_dense(), params)
}

/// Factorizes a dense nonnegative matrix `a` (`n_terms x n_docs`).
///
/// Factors are initialized from a seeded uniform draw in `(EPS, 1]` scaled
/// by `sqrt(mean(a) / k)`, then updated multiplicatively until the relative
/// objective improvement drops below `tol` or `max_iter` is reached.
pub fn nmf_fit_dense(a: &Array2<f64>, params: NmfParams) -> Result<NmfModel> {
    let (n_terms, n_docs) = a.dim();
    if n_terms == 0 || n_docs == 0 {
        return Err(Error::EmptyInput("nmf input matrix has a zero dimension".into()));
    }
    if params.k < 1 || params.k > n_terms.min(n_docs) {
        return Err(Error::Parameter(format!(
            "k must be in [1, min(n_terms, n_docs)] = [1, {}], got {}",
            n_terms.min(n_docs),
            params.k
        )));
    }
    if params.max_iter < 1 {
        return Err(Error::Parameter("max_iter must be >= 1".into()));
    }
    if params.tol <= 0.0 {
        return Err(Error::Parameter("tol must be > 0".into()));
    }

    let k = params.k;
    let mean = a.sum() / (n_terms * n_docs) as f64;
    let scale = (mean.max(EPS) / k as f64).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    // uniform draw in (EPS, 1], row-major fill order
    let mut draw = |rows: usize, cols: usize| -> Array2<f64> {
        let data: Vec<f64> = (0..rows * cols)
            .map(|_| scale * (1.0 - (1.0 - EPS) * rng.random::<f64>()))
            .collect();
        Array2::from_shape_vec((rows, cols), data).expect("shape matches data")
    };
    let mut w = draw(n_terms, k);
    let mut h = draw(k, n_docs);

    let mut trace = Vec::new();
    let mut prev_objective = f64::INFINITY;
    for _ in 0..params.max_iter {
        // H <- H .* (W^T A) ./ (W^T W H + EPS)
        let wt_a = w.t().dot(a);
        let wt_w_h = w.t().dot(&w).dot(&h);
        ndarray::Zip::from(&mut h).and(&wt_a).and(&wt_w_h).for_each(|h, &num, &den| {
            *h *= num / (den + EPS);
        });

        // W <- W .* (A H^T) ./ (W H H^T + EPS)
        let a_ht = a.dot(&h.t());
        let w_h_ht = w.dot(&h.dot(&h.t()));
        ndarray::Zip::from(&mut w).and(&a_ht).and(&w_h_ht).for_each(|w, &num, &den| {
            *w *= num / (den + EPS);
        });

        debug_assert!(
            h.iter().chain(w.iter()).all(|&x| x >= 0.0),
            "multiplicative update produced a negative entry"
        );

        let objective = frobenius_norm(&(a - &w.dot(&h)));
        trace.push(objective);
        let improvement = (prev_objective - objective) / prev_objective.max(EPS);
        prev_objective = objective;
        if improvement.is_finite() && improvement < params.tol {
            break;
        }
    }

    Ok(NmfModel {
        w,
        h,
        k,
        seed: params.seed,
        objective_trace: trace,
    })
}

/// Extracts the weighted top words of each topic.
///
/// Topic `i` takes the `n_words` largest entries of column `i` of `W`; its
/// size is the row sum of `H`.
pub fn nmf_topics(model: &NmfModel, vocab: &Vocabulary, n_words: usize) -> TopicSet {
    let topics = (0..model.k)
        .map(|i| {
            let weights: Vec<f64> = model.w.column(i).to_vec();
            let size: f64 = model.h.row(i).sum();
            Topic {
                id: i as i64,
                size,
                top_terms: top_terms(&weights, &vocab.terms, n_words),
                weights,
            }
        })
        .collect();
    TopicSet {
        technique: Technique::Nmf,
        vocabulary: vocab.terms.clone(),
        topics,
    }
}

/// Serialized model layout: shape headers plus row-major factor arrays.
#[derive(Serialize, Deserialize)]
struct StoredModel {
    n_terms: usize,
    n_docs: usize,
    k: usize,
    seed: u64,
    w: Vec<f64>,
    h: Vec<f64>,
    objective_trace: Vec<f64>,
}

impl NmfModel {
    pub fn save(&self, path: &Path) -> Result<()> {
        let stored = StoredModel {
            n_terms: self.w.nrows(),
            n_docs: self.h.ncols(),
            k: self.k,
            seed: self.seed,
            w: self.w.iter().copied().collect(),
            h: self.h.iter().copied().collect(),
            objective_trace: self.objective_trace.clone(),
        };
        let mut bytes = serde_json::to_vec_pretty(&stored).map_err(|e| Error::json(path, e))?;
        bytes.push(b'\n');
        fs::write(path, bytes).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        let stored: StoredModel =
            serde_json::from_slice(&bytes).map_err(|e| Error::json(path, e))?;
        let w = Array2::from_shape_vec((stored.n_terms, stored.k), stored.w)
            .map_err(|e| Error::Validation(format!("bad W shape in {}: {e}", path.display())))?;
        let h = Array2::from_shape_vec((stored.k, stored.n_docs), stored.h)
            .map_err(|e| Error::Validation(format!("bad H shape in {}: {e}", path.display())))?;
        Ok(NmfModel {
            w,
            h,
            k: stored.k,
            seed: stored.seed,
            objective_trace: stored.objective_trace,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn params(k: usize, seed: u64, max_iter: usize, tol: f64) -> NmfParams {
        NmfParams {
            k,
            seed,
            max_iter,
            tol,
        }
    }

    #[test]
    fn rank_one_matrix_is_recovered() {
        // outer([1,2], [3,1])
        let a = array![[3.0, 1.0], [6.0, 2.0]];
        let model = nmf_fit_dense(&a, params(1, 0, 5000, 1e-14)).unwrap();
        let final_objective = *model.objective_trace.last().unwrap();
        assert!(final_objective <= 1e-6, "objective {final_objective}");
    }

    #[test]
    fn same_seed_gives_bit_identical_factors() {
        let a = array![[1.0, 0.5, 0.0], [0.2, 2.0, 1.0], [0.0, 0.3, 0.9]];
        let m1 = nmf_fit_dense(&a, params(2, 7, 50, 1e-9)).unwrap();
        let m2 = nmf_fit_dense(&a, params(2, 7, 50, 1e-9)).unwrap();
        assert_eq!(m1.w, m2.w);
        assert_eq!(m1.h, m2.h);
        assert_eq!(m1.objective_trace, m2.objective_trace);
    }

    #[test]
    fn objective_trace_is_non_increasing() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = Array2::from_shape_fn((20, 15), |_| rng.random::<f64>());
        let model = nmf_fit_dense(&a, params(4, 1, 100, 1e-12)).unwrap();
        for pair in model.objective_trace.windows(2) {
            assert!(pair[1] <= pair[0] + 1e-9, "trace increased: {pair:?}");
        }
    }

    #[test]
    fn factors_stay_nonnegative() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let a = Array2::from_shape_fn((12, 10), |_| rng.random::<f64>());
        let model = nmf_fit_dense(&a, params(3, 2, 80, 1e-12)).unwrap();
        assert!(model.w.iter().all(|&x| x >= 0.0));
        assert!(model.h.iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn k_out_of_range_is_a_parameter_error() {
        let a = array![[1.0, 2.0], [3.0, 4.0]];
        assert!(matches!(
            nmf_fit_dense(&a, params(3, 0, 10, 1e-6)),
            Err(Error::Parameter(_))
        ));
        assert!(matches!(
            nmf_fit_dense(&a, params(0, 0, 10, 1e-6)),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn empty_matrix_is_an_empty_input_error() {
        let a = Array2::<f64>::zeros((0, 4));
        assert!(matches!(
            nmf_fit_dense(&a, params(1, 0, 10, 1e-6)),
            Err(Error::EmptyInput(_))
        ));
    }

    #[test]
    fn topics_take_top_words_from_w_columns() {
        let vocab = Vocabulary {
            terms: vec!["a".into(), "b".into(), "c".into()],
            doc_freq: vec![1, 1, 1],
            n_docs: 2,
        };
        let model = NmfModel {
            w: array![[0.9, 0.0], [0.1, 0.5], [0.0, 0.5]],
            h: array![[1.0, 2.0], [0.5, 0.5]],
            k: 2,
            seed: 0,
            objective_trace: vec![],
        };
        let set = nmf_topics(&model, &vocab, 2);
        assert_eq!(set.technique, Technique::Nmf);
        assert_eq!(
            set.topics[0].top_terms,
            vec![("a".to_string(), 0.9), ("b".to_string(), 0.1)]
        );
        // equal weights break ties lexicographically
        assert_eq!(
            set.topics[1].top_terms,
            vec![("b".to_string(), 0.5), ("c".to_string(), 0.5)]
        );
        assert!((set.topics[0].size - 3.0).abs() < 1e-15);
        assert!((set.topics[1].size - 1.0).abs() < 1e-15);
    }

    #[test]
    fn ten_topics_with_ten_words_each() {
        let n_terms = 25;
        let terms: Vec<String> = (0..n_terms).map(|i| format!("term{i:02}")).collect();
        let vocab = Vocabulary {
            terms,
            doc_freq: vec![1; n_terms],
            n_docs: 12,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = Array2::from_shape_fn((n_terms, 12), |_| rng.random::<f64>());
        let model = nmf_fit_dense(&a, params(10, 1, 60, 1e-9)).unwrap();
        let set = nmf_topics(&model, &vocab, 10);
        assert_eq!(set.topics.len(), 10);
        for topic in &set.topics {
            assert_eq!(topic.top_terms.len(), 10);
            for pair in topic.top_terms.windows(2) {
                assert!(pair[0].1 >= pair[1].1);
            }
        }
    }

    #[test]
    fn model_save_load_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let a = array![[1.0, 0.5], [0.2, 2.0]];
        let model = nmf_fit_dense(&a, params(2, 3, 20, 1e-9)).unwrap();
        let path = dir.path().join("model.json");
        model.save(&path).unwrap();
        let loaded = NmfModel::load(&path).unwrap();
        assert_eq!(loaded.w, model.w);
        assert_eq!(loaded.h, model.h);
        assert_eq!(loaded.objective_trace, model.objective_trace);
    }
}
