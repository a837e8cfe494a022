//! Document embeddings and dimensionality reduction for the cluster
//! pipeline.
//!
//! The default provider is deterministic LSA: smoothed TF-IDF followed by a
//! truncated singular projection of the documents. Transformer embeddings
//! can be supplied through the external-file provider instead.

use std::collections::HashMap;
use std::fs;
use std::io::{BufRead, BufReader};
use std::path::PathBuf;

use ndarray::{Array1, Array2};
use serde::Deserialize;

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::linalg::{orient_sign, top_eigenpairs};
use crate::vectorize::{build_vocabulary, count_matrix, tfidf_transform, IdfMode};

/// Fixed seed for the reduction stage, which has no caller-supplied seed.
const REDUCE_SEED: u64 = 0x7265_6475;

/// How to obtain document vectors.
#[derive(Debug, Clone)]
pub enum EmbeddingProvider {
    /// Truncated-SVD projection of the corpus's smoothed TF-IDF matrix.
    Lsa { dims: usize, seed: u64 },
    /// JSON-lines file of `{"report_id", "page_no", "vector"}` records.
    ExternalFile { path: PathBuf },
}

/// Dense per-document embedding matrix (`n_docs x dim`), row order matching
/// corpus document order.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    data: Array2<f64>,
    provider: &'static str,
}

impl EmbeddingMatrix {
    /// Validates finiteness and the minimum dimensionality.
    pub fn new(data: Array2<f64>, provider: &'static str) -> Result<Self> {
        if data.ncols() < 2 {
            return Err(Error::Parameter(format!(
                "embedding dimension must be >= 2, got {}",
                data.ncols()
            )));
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::Validation(
                "embedding matrix contains NaN or infinite entries".into(),
            ));
        }
        Ok(EmbeddingMatrix { data, provider })
    }

    pub fn n_docs(&self) -> usize {
        self.data.nrows()
    }

    pub fn dim(&self) -> usize {
        self.data.ncols()
    }

    pub fn provider(&self) -> &'static str {
        self.provider
    }

    pub fn rows(&self) -> &Array2<f64> {
        &self.data
    }

    /// Point coordinates as plain vectors, one per document.
    pub fn points(&self) -> Vec<Vec<f64>> {
        self.data.rows().into_iter().map(|r| r.to_vec()).collect()
    }
}

/// Embeds every corpus document with the chosen provider.
pub fn embed(corpus: &Corpus, provider: &EmbeddingProvider) -> Result<EmbeddingMatrix> {
    match provider {
        EmbeddingProvider::Lsa { dims, seed } => embed_lsa(corpus, *dims, *seed),
        EmbeddingProvider::ExternalFile { path } => embed_external(corpus, path),
    }
}

fn embed_lsa(corpus: &Corpus, dims: usize, seed: u64) -> Result<EmbeddingMatrix> {
    if corpus.is_empty() {
        return Err(Error::EmptyInput("cannot embed an empty corpus".into()));
    }
    let texts = corpus.texts();
    // unfiltered vocabulary: the cluster pipeline sees raw text
    let vocab = build_vocabulary(&texts, 1, 1.0, &Default::default())?;
    let counts = count_matrix(&texts, &vocab);
    let tfidf = tfidf_transform(&counts, IdfMode::Smooth)?;

    let limit = tfidf.n_terms().min(tfidf.n_docs());
    if dims < 2 || dims > limit {
        return Err(Error::Parameter(format!(
            "lsa dims must be in [2, min(n_terms, n_docs)] = [2, {limit}], got {dims}"
        )));
    }

    // document-space Gram matrix A^T A; eigenvectors are the right singular
    // vectors, eigenvalues the squared singular values
    let a = tfidf.to_dense();
    let gram = a.t().dot(&a);
    let pairs = top_eigenpairs(&gram, dims, seed);

    let n_docs = tfidf.n_docs();
    let mut emb = Array2::zeros((n_docs, dims));
    for (j, (lambda, vec)) in pairs.into_iter().enumerate() {
        let sigma = lambda.max(0.0).sqrt();
        let mut v = vec;
        orient_sign(&mut v);
        for i in 0..n_docs {
            emb[(i, j)] = v[i] * sigma;
        }
    }
    EmbeddingMatrix::new(emb, "lsa")
}

#[derive(Deserialize)]
struct ExternalRecord {
    report_id: String,
    page_no: u32,
    vector: Vec<f64>,
}

fn embed_external(corpus: &Corpus, path: &PathBuf) -> Result<EmbeddingMatrix> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);
    let mut by_key: HashMap<(String, u32), Vec<f64>> = HashMap::new();
    let mut dim: Option<usize> = None;
    for (lineno, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let record: ExternalRecord = serde_json::from_str(&line)
            .map_err(|e| Error::Validation(format!("{}:{}: {e}", path.display(), lineno + 1)))?;
        match dim {
            None => dim = Some(record.vector.len()),
            Some(d) if d != record.vector.len() => {
                return Err(Error::Validation(format!(
                    "{}:{}: vector length {} differs from {}",
                    path.display(),
                    lineno + 1,
                    record.vector.len(),
                    d
                )))
            }
            _ => {}
        }
        by_key.insert(
            (record.report_id.to_uppercase(), record.page_no),
            record.vector,
        );
    }

    let mut rows = Vec::with_capacity(corpus.len());
    for doc in corpus.documents() {
        let key = doc.key();
        let vector = by_key.get(&key).ok_or_else(|| {
            Error::Alignment(format!("{} page {}", doc.report_id, doc.page_no))
        })?;
        rows.push(vector.clone());
    }
    let dim = dim.unwrap_or(0);
    let flat: Vec<f64> = rows.into_iter().flatten().collect();
    let data = Array2::from_shape_vec((corpus.len(), dim), flat)
        .map_err(|e| Error::Validation(format!("embedding shape: {e}")))?;
    EmbeddingMatrix::new(data, "external-file")
}

/// Projects embeddings onto their top `out_dim` principal axes.
///
/// Rows are mean-centered, the covariance eigendecomposition is taken with a
/// fixed internal seed, and each axis is oriented so its largest-magnitude
/// loading is positive.
pub fn reduce(emb: &EmbeddingMatrix, out_dim: usize) -> Result<EmbeddingMatrix> {
    let dim = emb.dim();
    if out_dim < 2 || out_dim > dim {
        return Err(Error::Parameter(format!(
            "reduce out_dim must be in [2, {dim}], got {out_dim}"
        )));
    }

    let n = emb.n_docs();
    let mut centered = emb.data.clone();
    let means: Array1<f64> = centered.mean_axis(ndarray::Axis(0)).expect("n_docs > 0");
    for mut row in centered.rows_mut() {
        row.zip_mut_with(&means, |x, &m| *x -= m);
    }

    let denom = (n.max(2) - 1) as f64;
    let cov = centered.t().dot(&centered) / denom;
    let pairs = top_eigenpairs(&cov, out_dim, REDUCE_SEED);

    let mut axes = Array2::zeros((dim, out_dim));
    for (j, (_, vec)) in pairs.into_iter().enumerate() {
        let mut v = vec;
        orient_sign(&mut v);
        for i in 0..dim {
            axes[(i, j)] = v[i];
        }
    }
    let projected = centered.dot(&axes);
    EmbeddingMatrix::new(projected, emb.provider)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Corpus, PagedDocument, ReportId};
    use std::io::Write;

    fn mini_corpus() -> Corpus {
        let texts = [
            "solar energy panels generate renewable power",
            "solar panels and renewable energy output",
            "waste cleanup crews remove contamination",
            "cleanup of waste contamination continues",
            "budget audit findings and spending review",
            "audit of budget spending and review findings",
        ];
        let docs = texts
            .iter()
            .enumerate()
            .map(|(i, t)| PagedDocument {
                report_id: ReportId::new(&format!("GAO-1-{}", i + 1)).unwrap(),
                page_no: 1,
                text: t.to_string(),
            })
            .collect();
        Corpus::new(docs, vec![]).unwrap()
    }

    #[test]
    fn lsa_is_deterministic_for_fixed_seed() {
        let corpus = mini_corpus();
        let provider = EmbeddingProvider::Lsa { dims: 3, seed: 11 };
        let a = embed(&corpus, &provider).unwrap();
        let b = embed(&corpus, &provider).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.n_docs(), 6);
        assert_eq!(a.dim(), 3);
    }

    #[test]
    fn lsa_rejects_dims_beyond_matrix_rank_bound() {
        let corpus = mini_corpus();
        let provider = EmbeddingProvider::Lsa { dims: 100, seed: 1 };
        assert!(matches!(
            embed(&corpus, &provider),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn external_file_aligns_rows_to_corpus_order() {
        let corpus = mini_corpus();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("emb.jsonl");
        let mut f = fs::File::create(&path).unwrap();
        // write records in reverse order; alignment must restore corpus order
        for (i, doc) in corpus.documents().iter().enumerate().rev() {
            writeln!(
                f,
                r#"{{"report_id":"{}","page_no":{},"vector":[{}.0, 0.5]}}"#,
                doc.report_id, doc.page_no, i
            )
            .unwrap();
        }
        drop(f);
        let emb = embed(&corpus, &EmbeddingProvider::ExternalFile { path }).unwrap();
        for i in 0..corpus.len() {
            assert_eq!(emb.rows()[(i, 0)], i as f64);
        }
    }

    #[test]
    fn external_file_missing_document_names_it() {
        let corpus = mini_corpus();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("emb.jsonl");
        let mut f = fs::File::create(&path).unwrap();
        for doc in corpus.documents().iter().skip(1) {
            writeln!(
                f,
                r#"{{"report_id":"{}","page_no":{},"vector":[1.0, 2.0]}}"#,
                doc.report_id, doc.page_no
            )
            .unwrap();
        }
        drop(f);
        let err = embed(&corpus, &EmbeddingProvider::ExternalFile { path }).unwrap_err();
        match err {
            Error::Alignment(msg) => assert!(msg.contains("GAO-1-1")),
            other => panic!("expected alignment error, got {other}"),
        }
    }

    #[test]
    fn full_dimensional_reduce_preserves_pairwise_distances() {
        let corpus = mini_corpus();
        let emb = embed(&corpus, &EmbeddingProvider::Lsa { dims: 4, seed: 3 }).unwrap();
        let reduced = reduce(&emb, 4).unwrap();
        let points_in = emb.points();
        let points_out = reduced.points();
        for i in 0..points_in.len() {
            for j in (i + 1)..points_in.len() {
                let din = dist(&points_in[i], &points_in[j]);
                let dout = dist(&points_out[i], &points_out[j]);
                assert!((din - dout).abs() < 1e-9, "({i},{j}): {din} vs {dout}");
            }
        }
    }

    #[test]
    fn planted_planar_points_are_recovered_exactly() {
        // points in a 2-D plane embedded in 10-D
        let n = 12;
        let plane_a: Vec<f64> = (0..10).map(|i| ((i * 7 + 1) as f64 * 0.37).sin()).collect();
        let plane_b: Vec<f64> = (0..10).map(|i| ((i * 3 + 2) as f64 * 0.61).cos()).collect();
        let mut data = Array2::zeros((n, 10));
        let mut coords = Vec::new();
        for p in 0..n {
            let s = (p as f64 * 0.8).sin() * 3.0;
            let t = (p as f64 * 1.3).cos() * 2.0;
            coords.push((s, t));
            for d in 0..10 {
                data[(p, d)] = s * plane_a[d] + t * plane_b[d];
            }
        }
        let emb = EmbeddingMatrix::new(data, "lsa").unwrap();
        let reduced = reduce(&emb, 2).unwrap();
        let points = reduced.points();
        for i in 0..n {
            for j in (i + 1)..n {
                let original = {
                    // distances in the planted (non-orthogonal) plane basis
                    let dx: Vec<f64> = (0..10)
                        .map(|d| {
                            (coords[i].0 - coords[j].0) * plane_a[d]
                                + (coords[i].1 - coords[j].1) * plane_b[d]
                        })
                        .collect();
                    dx.iter().map(|x| x * x).sum::<f64>().sqrt()
                };
                let recovered = dist(&points[i], &points[j]);
                assert!(
                    (original - recovered).abs() < 1e-9,
                    "({i},{j}): {original} vs {recovered}"
                );
            }
        }
    }

    #[test]
    fn projection_never_expands_pairwise_distances() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        use rand::{Rng, SeedableRng};
        let data = Array2::from_shape_fn((10, 7), |_| rng.random::<f64>() * 4.0 - 2.0);
        let emb = EmbeddingMatrix::new(data, "lsa").unwrap();
        for out_dim in 2..=7 {
            let reduced = reduce(&emb, out_dim).unwrap();
            let before = emb.points();
            let after = reduced.points();
            for i in 0..before.len() {
                for j in (i + 1)..before.len() {
                    let din = dist(&before[i], &before[j]);
                    let dout = dist(&after[i], &after[j]);
                    assert!(
                        dout <= din + 1e-9,
                        "out_dim {out_dim} ({i},{j}): {dout} > {din}"
                    );
                }
            }
        }
    }

    #[test]
    fn reduce_rejects_out_of_range_target() {
        let corpus = mini_corpus();
        let emb = embed(&corpus, &EmbeddingProvider::Lsa { dims: 3, seed: 3 }).unwrap();
        assert!(matches!(reduce(&emb, 1), Err(Error::Parameter(_))));
        assert!(matches!(reduce(&emb, 4), Err(Error::Parameter(_))));
    }

    fn dist(a: &[f64], b: &[f64]) -> f64 {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt()
    }
}
