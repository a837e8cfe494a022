//! Cross-checks of the hand-rolled numerics against nalgebra's
//! decompositions, which serve as an independent reference path.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use themeforge_core::cluster::{embed, reduce, EmbeddingProvider};
use themeforge_core::corpus::{Corpus, PagedDocument, ReportId};
use themeforge_core::nmf::{nmf_fit_dense, NmfParams};
use themeforge_core::vectorize::{build_vocabulary, count_matrix, tfidf_transform, IdfMode};

fn corpus_from_texts(texts: &[&str]) -> Corpus {
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
fn lsa_magnitudes_match_reference_singular_values() {
    let texts = [
        "solar energy panels power the renewable grid",
        "renewable solar output feeds grid storage",
        "waste cleanup removes groundwater contamination",
        "groundwater cleanup and waste remediation work",
        "budget audit reviews agency spending records",
        "spending audit findings shape the agency budget",
    ];
    let corpus = corpus_from_texts(&texts);
    let dims = 4;
    let lsa = embed(&corpus, &EmbeddingProvider::Lsa { dims, seed: 5 }).unwrap();

    // reference: singular values of the same smoothed TF-IDF matrix
    let refs: Vec<&str> = corpus.texts();
    let vocab = build_vocabulary(&refs, 1, 1.0, &Default::default()).unwrap();
    let counts = count_matrix(&refs, &vocab);
    let tfidf = tfidf_transform(&counts, IdfMode::Smooth).unwrap();
    let dense = tfidf.to_dense();
    let na = nalgebra::DMatrix::from_fn(dense.nrows(), dense.ncols(), |i, j| dense[(i, j)]);
    let mut singular: Vec<f64> = na.svd(false, false).singular_values.iter().copied().collect();
    singular.sort_by(|a, b| b.partial_cmp(a).unwrap());

    // column j of the embedding is v_j * sigma_j with v_j a unit vector, so
    // its norm must equal the j-th singular value
    for j in 0..dims {
        let norm: f64 = (0..lsa.n_docs())
            .map(|i| lsa.rows()[(i, j)].powi(2))
            .sum::<f64>()
            .sqrt();
        assert!(
            (norm - singular[j]).abs() < 1e-8,
            "axis {j}: embedding norm {norm} vs singular value {}",
            singular[j]
        );
    }
}

#[test]
fn pca_variances_match_reference_eigenvalues() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let n = 14;
    let dim = 6;
    let data = Array2::from_shape_fn((n, dim), |_| rng.random::<f64>() * 3.0);
    let emb = themeforge_core::cluster::EmbeddingMatrix::new(data.clone(), "lsa").unwrap();
    let reduced = reduce(&emb, 3).unwrap();

    // reference: eigenvalues of the sample covariance
    let means: Vec<f64> = (0..dim)
        .map(|d| (0..n).map(|i| data[(i, d)]).sum::<f64>() / n as f64)
        .collect();
    let mut cov = nalgebra::DMatrix::zeros(dim, dim);
    for a in 0..dim {
        for b in 0..dim {
            let s: f64 = (0..n)
                .map(|i| (data[(i, a)] - means[a]) * (data[(i, b)] - means[b]))
                .sum();
            cov[(a, b)] = s / (n as f64 - 1.0);
        }
    }
    let mut eigen: Vec<f64> = cov.symmetric_eigen().eigenvalues.iter().copied().collect();
    eigen.sort_by(|a, b| b.partial_cmp(a).unwrap());

    // score variance along principal axis j equals eigenvalue j
    for j in 0..3 {
        let scores: Vec<f64> = (0..n).map(|i| reduced.rows()[(i, j)]).collect();
        let mean: f64 = scores.iter().sum::<f64>() / n as f64;
        let var: f64 =
            scores.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / (n as f64 - 1.0);
        assert!(
            (var - eigen[j]).abs() < 1e-9,
            "axis {j}: score variance {var} vs eigenvalue {}",
            eigen[j]
        );
    }
}

#[test]
fn nmf_recovers_planted_factorizations() {
    // planted nonnegative rank-k products, n <= 10, k <= 3
    for (n_rows, n_cols, k, seed) in [(6usize, 5usize, 2usize, 1u64), (10, 8, 3, 2), (4, 4, 1, 3)]
    {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w0 = Array2::from_shape_fn((n_rows, k), |_| rng.random::<f64>() + 0.1);
        let h0 = Array2::from_shape_fn((k, n_cols), |_| rng.random::<f64>() + 0.1);
        let a = w0.dot(&h0);
        let model = nmf_fit_dense(
            &a,
            NmfParams {
                k,
                seed: 11,
                max_iter: 5000,
                tol: 1e-15,
            },
        )
        .unwrap();
        let residual = model.objective_trace.last().copied().unwrap();
        assert!(
            residual <= 1e-6,
            "rank-{k} {n_rows}x{n_cols}: residual {residual}"
        );
    }
}
