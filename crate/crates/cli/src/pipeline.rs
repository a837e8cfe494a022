//! Full pipeline orchestration with a content-hashed artifact manifest.
//!
//! Stages run in sequence: ingest, NMF training, cluster training,
//! visualization exports, then evaluation when configured. After each stage
//! completes, the manifest on disk is updated, so a failed run still records
//! what finished. Artifact paths in the manifest are relative to the output
//! directory and all outputs are deterministic, so two runs of the same
//! config produce byte-identical manifests wherever they execute.

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use themeforge_core::cluster::{
    train_cluster_topics, ClusterPipelineParams, EmbeddingProvider, HdbscanParams,
};
use themeforge_core::corpus;
use themeforge_core::eval::{
    compute_metrics, load_annotations, load_truth, render_report, suggest_alignments,
    ReportFormat,
};
use themeforge_core::nmf::{nmf_fit, nmf_topics, NmfParams};
use themeforge_core::topics::TopicSet;
use themeforge_core::vectorize::{
    build_vocabulary, count_matrix, default_stop_words, tfidf_transform,
};
use themeforge_core::viz::{export_distance_map, export_topic_bars, mds_2d, topic_distance_matrix};

use crate::config::{PipelineConfig, ProviderKind};

pub const MANIFEST_FILE: &str = "manifest.json";

/// One pipeline artifact with its content hash.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestArtifact {
    /// Path relative to the output directory.
    pub path: String,
    pub sha256: String,
}

/// One completed stage.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestStage {
    pub name: String,
    pub artifacts: Vec<ManifestArtifact>,
}

/// The run manifest: every completed stage and every artifact it wrote.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Manifest {
    pub stages: Vec<ManifestStage>,
}

impl Manifest {
    fn record_stage(&mut self, out_dir: &Path, name: &str, artifacts: &[&str]) -> Result<()> {
        let mut entries = Vec::new();
        for rel in artifacts {
            let bytes = fs::read(out_dir.join(rel))
                .with_context(|| format!("hashing artifact {rel}"))?;
            entries.push(ManifestArtifact {
                path: rel.to_string(),
                sha256: hex_digest(&bytes),
            });
        }
        self.stages.push(ManifestStage {
            name: name.to_string(),
            artifacts: entries,
        });
        self.write(out_dir)
    }

    fn write(&self, out_dir: &Path) -> Result<()> {
        let mut bytes = serde_json::to_vec_pretty(self)?;
        bytes.push(b'\n');
        fs::write(out_dir.join(MANIFEST_FILE), bytes)?;
        Ok(())
    }
}

fn hex_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Runs every configured stage. On error the manifest keeps the stages that
/// completed before the failure.
pub fn run_pipeline(config: &PipelineConfig) -> Result<PathBuf> {
    let out_dir = &config.output.dir;
    fs::create_dir_all(out_dir)
        .with_context(|| format!("creating output dir {}", out_dir.display()))?;
    let mut manifest = Manifest::default();
    manifest.write(out_dir)?;

    // ingest
    log::info!("stage ingest: reading {}", config.corpus.input_dir.display());
    let corpus = corpus::ingest(&config.corpus.input_dir, &out_dir.join("corpus.jsonl"))?;
    log::info!("ingested {} documents", corpus.len());
    manifest.record_stage(out_dir, "ingest", &["corpus.jsonl"])?;

    // nmf
    log::info!("stage train-nmf: k={} seed={}", config.nmf.k, config.nmf.seed);
    let nmf_set = train_nmf_stage(config, &corpus, out_dir)?;
    manifest.record_stage(out_dir, "train-nmf", &["nmf_model.json", "topics_nmf.json"])?;

    // cluster
    log::info!("stage train-cluster: seed={}", config.cluster.seed);
    let cluster_set = train_cluster_stage(config, &corpus, out_dir)?;
    manifest.record_stage(out_dir, "train-cluster", &["topics_cluster.json"])?;

    // visualization exports
    log::info!("stage viz: distance map and topic bars");
    let distances = topic_distance_matrix(&cluster_set)?;
    let mds = mds_2d(&distances);
    export_distance_map(&cluster_set, &mds, &out_dir.join("map.json"))?;
    export_topic_bars(&nmf_set, config.nmf.n_words, &out_dir.join("bars_nmf.json"))?;
    export_topic_bars(&cluster_set, config.cluster.n_words, &out_dir.join("bars_cluster.json"))?;
    manifest.record_stage(
        out_dir,
        "viz",
        &["map.json", "bars_nmf.json", "bars_cluster.json"],
    )?;

    // evaluation
    if let Some(eval) = &config.eval {
        log::info!("stage eval: truth {}", eval.truth.display());
        let truth = load_truth(&eval.truth)?;
        let mut suggestions = suggest_alignments(&cluster_set, &truth, eval.top_n);
        suggestions.extend(suggest_alignments(&nmf_set, &truth, eval.top_n));
        let mut bytes = serde_json::to_vec_pretty(&suggestions)?;
        bytes.push(b'\n');
        fs::write(out_dir.join("suggestions.json"), bytes)?;
        let mut artifacts = vec!["suggestions.json"];

        if let Some(annotations_path) = &eval.annotations {
            let annotations = load_annotations(annotations_path, &truth)?;
            let metrics = compute_metrics(&annotations);
            fs::write(
                out_dir.join("report.md"),
                render_report(&metrics, ReportFormat::Markdown),
            )?;
            fs::write(
                out_dir.join("report.json"),
                render_report(&metrics, ReportFormat::Json),
            )?;
            artifacts.push("report.md");
            artifacts.push("report.json");
        }
        manifest.record_stage(out_dir, "eval", &artifacts)?;
    }

    log::info!("pipeline complete: {}", out_dir.join(MANIFEST_FILE).display());
    Ok(out_dir.join(MANIFEST_FILE))
}

fn train_nmf_stage(
    config: &PipelineConfig,
    corpus: &corpus::Corpus,
    out_dir: &Path,
) -> Result<TopicSet> {
    let stop_words = load_stop_words(
        config.vectorizer.use_default_stop_words,
        config.vectorizer.stop_words.as_deref(),
    )?;
    let texts = corpus.texts();
    let vocab = build_vocabulary(
        &texts,
        config.vectorizer.min_df,
        config.vectorizer.max_df_ratio,
        &stop_words,
    )?;
    let counts = count_matrix(&texts, &vocab);
    let tfidf = tfidf_transform(&counts, config.vectorizer.idf)?;
    let model = nmf_fit(
        &tfidf,
        NmfParams {
            k: config.nmf.k,
            seed: config.nmf.seed,
            max_iter: config.nmf.max_iter,
            tol: config.nmf.tol,
        },
    )?;
    model.save(&out_dir.join("nmf_model.json"))?;
    let set = nmf_topics(&model, &vocab, config.nmf.n_words);
    set.save(&out_dir.join("topics_nmf.json"))?;
    Ok(set)
}

fn train_cluster_stage(
    config: &PipelineConfig,
    corpus: &corpus::Corpus,
    out_dir: &Path,
) -> Result<TopicSet> {
    let provider = match config.cluster.provider {
        ProviderKind::Lsa => EmbeddingProvider::Lsa {
            dims: config.cluster.dims,
            seed: config.cluster.seed,
        },
        ProviderKind::File => EmbeddingProvider::ExternalFile {
            path: config
                .cluster
                .emb_file
                .clone()
                .expect("validated: file provider has emb_file"),
        },
    };
    let mut hdbscan = HdbscanParams::new(config.cluster.min_cluster_size);
    if let Some(min_samples) = config.cluster.min_samples {
        hdbscan = hdbscan.with_min_samples(min_samples);
    }
    let params = ClusterPipelineParams {
        provider,
        reduce_dims: config.cluster.reduce_dims,
        hdbscan,
        n_words: config.cluster.n_words,
        include_outlier_topic: config.cluster.include_outlier_topic,
    };
    let (set, labels) = train_cluster_topics(corpus, &params)?;
    log::info!(
        "cluster pipeline: {} clusters, {} noise documents",
        labels.n_clusters(),
        labels.labels().iter().filter(|&&l| l < 0).count()
    );
    set.save(&out_dir.join("topics_cluster.json"))?;
    Ok(set)
}

/// Combined stop-word set: the built-in list (when enabled) plus an optional
/// file of one word per line.
pub fn load_stop_words(
    use_default: bool,
    extra_file: Option<&Path>,
) -> Result<HashSet<String>> {
    let mut words = if use_default {
        default_stop_words()
    } else {
        HashSet::new()
    };
    if let Some(path) = extra_file {
        let text = fs::read_to_string(path)
            .with_context(|| format!("reading stop words {}", path.display()))?;
        words.extend(
            text.lines()
                .map(|l| l.trim().to_lowercase())
                .filter(|l| !l.is_empty() && !l.starts_with('#')),
        );
    }
    Ok(words)
}
