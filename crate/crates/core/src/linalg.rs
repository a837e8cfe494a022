//! Small dense linear-algebra routines shared by the embedding, reduction,
//! and scaling stages: a seeded symmetric eigensolver and vector helpers.

use ndarray::{Array1, Array2, ArrayView1};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

/// Iteration cap for a single eigenpair.
const MAX_POWER_ITERS: usize = 100_000;
/// Residual tolerance: `||Mv - lambda v||_inf <= tol * max(1, |lambda|)`.
const RESIDUAL_TOL: f64 = 1e-13;

/// Leading eigenpairs of a symmetric matrix by power iteration with
/// deflation, seeded for determinism.
///
/// Returns up to `count` `(eigenvalue, eigenvector)` pairs ordered by
/// extraction (largest magnitude first). Eigenvectors are orthonormal; each
/// is re-orthogonalized against previously found vectors every step so
/// deflation stays stable. Vectors in (numerically) null directions are
/// returned with eigenvalue 0.
pub fn top_eigenpairs(m: &Array2<f64>, count: usize, seed: u64) -> Vec<(f64, Array1<f64>)> {
    let n = m.nrows();
    assert_eq!(n, m.ncols(), "matrix must be square");
    let count = count.min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs: Vec<(f64, Array1<f64>)> = Vec::with_capacity(count);

    for _ in 0..count {
        let mut v = random_unit_vector(n, &mut rng, &pairs);
        let mut mv = m.dot(&v);
        orthogonalize(&mut mv, &pairs);
        let mut lambda = 0.0;
        for _ in 0..MAX_POWER_ITERS {
            let norm = l2_norm(mv.view());
            if norm < 1e-300 {
                // v lies in the (deflated) null space: eigenvalue 0
                lambda = 0.0;
                break;
            }
            let w = mv.mapv(|x| x / norm);
            let mut mw = m.dot(&w);
            orthogonalize(&mut mw, &pairs);
            lambda = w.dot(&mw);
            let residual_norm = mw
                .iter()
                .zip(&w)
                .fold(0.0f64, |acc, (&mwi, &wi)| acc.max((mwi - lambda * wi).abs()));
            v = w;
            mv = mw;
            if residual_norm <= RESIDUAL_TOL * lambda.abs().max(1.0) {
                break;
            }
        }
        pairs.push((lambda, v));
    }
    pairs
}

fn random_unit_vector(
    n: usize,
    rng: &mut ChaCha8Rng,
    against: &[(f64, Array1<f64>)],
) -> Array1<f64> {
    loop {
        let mut v = Array1::from_shape_fn(n, |_| rng.random::<f64>() - 0.5);
        orthogonalize(&mut v, against);
        let norm = l2_norm(v.view());
        if norm > 1e-12 {
            v.mapv_inplace(|x| x / norm);
            return v;
        }
    }
}

fn orthogonalize(v: &mut Array1<f64>, against: &[(f64, Array1<f64>)]) {
    for (_, u) in against {
        let proj = v.dot(u);
        v.zip_mut_with(u, |x, &y| *x -= proj * y);
    }
}

/// Flips `v` so its largest-magnitude entry is positive. The first index
/// attaining the maximum decides on ties.
pub fn orient_sign(v: &mut Array1<f64>) {
    let mut best = 0;
    let mut best_abs = f64::NEG_INFINITY;
    for (i, &x) in v.iter().enumerate() {
        if x.abs() > best_abs {
            best_abs = x.abs();
            best = i;
        }
    }
    if v[best] < 0.0 {
        v.mapv_inplace(|x| -x);
    }
}

pub fn l2_norm(v: ArrayView1<'_, f64>) -> f64 {
    v.dot(&v).sqrt()
}

/// Cosine similarity; zero whenever either vector is all zeros.
pub fn cosine_similarity(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut dot = 0.0;
    let mut na = 0.0;
    let mut nb = 0.0;
    for (x, y) in a.iter().zip(b) {
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    dot / (na.sqrt() * nb.sqrt())
}

pub fn frobenius_norm(m: &Array2<f64>) -> f64 {
    m.iter().map(|x| x * x).sum::<f64>().sqrt()
}
