//! Embed -> reduce -> cluster -> class-based term weighting.
//!
//! The stages stay deterministic and self-contained: LSA embeddings by
//! default (bring-your-own vectors via the external-file provider), PCA
//! reduction, HDBSCAN clustering, and c-TF-IDF topic representations.

pub mod ctfidf;
pub mod embed;
pub mod hdbscan;

pub use ctfidf::{cluster_topic_set, ctfidf, CTfidfWeights, OUTLIER_LABEL};
pub use embed::{embed, reduce, EmbeddingMatrix, EmbeddingProvider};
pub use hdbscan::{hdbscan, ClusterLabels, HdbscanParams};

use crate::corpus::Corpus;
use crate::error::Result;
use crate::topics::TopicSet;
use crate::vectorize::{build_vocabulary, count_matrix};

/// End-to-end parameters for [`train_cluster_topics`].
#[derive(Debug, Clone)]
pub struct ClusterPipelineParams {
    pub provider: EmbeddingProvider,
    /// Target dimensionality for the reduction stage.
    pub reduce_dims: usize,
    pub hdbscan: HdbscanParams,
    /// Words kept per topic.
    pub n_words: usize,
    /// Emit the `-1` outlier topic alongside the clusters.
    pub include_outlier_topic: bool,
}

/// Runs the whole cluster pipeline over a corpus and returns its topic set
/// together with the underlying labels.
pub fn train_cluster_topics(
    corpus: &Corpus,
    params: &ClusterPipelineParams,
) -> Result<(TopicSet, ClusterLabels)> {
    let embedded = embed(corpus, &params.provider)?;
    let reduced = if params.reduce_dims == embedded.dim() {
        embedded
    } else {
        reduce(&embedded, params.reduce_dims)?
    };
    let labels = hdbscan(&reduced.points(), params.hdbscan)?;

    // c-TF-IDF runs over unfiltered text, mirroring the embedding vocabulary
    let texts = corpus.texts();
    let vocab = build_vocabulary(&texts, 1, 1.0, &Default::default())?;
    let counts = count_matrix(&texts, &vocab);
    let weights = ctfidf(&counts, &labels, params.include_outlier_topic)?;
    let topics = cluster_topic_set(&weights, &vocab, params.n_words);
    Ok((topics, labels))
}
