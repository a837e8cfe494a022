//! `themeforge` — report-driven theme generation and evaluation.

mod config;
mod pipeline;

use std::fs;
use std::path::PathBuf;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use themeforge_core::cluster::{
    train_cluster_topics, ClusterPipelineParams, EmbeddingProvider, HdbscanParams,
};
use themeforge_core::corpus::{Corpus, ReportId};
use themeforge_core::eval::{
    compute_metrics, load_annotations, load_truth, render_report, suggest_alignments,
    ReportFormat,
};
use themeforge_core::nmf::{nmf_fit, nmf_topics, NmfParams};
use themeforge_core::scrape::{
    extract_report_ids, fetch_reports, FetchConfig, DEFAULT_REPORT_ID_PATTERN,
};
use themeforge_core::topics::TopicSet;
use themeforge_core::vectorize::{build_vocabulary, count_matrix, tfidf_transform, IdfMode};
use themeforge_core::viz::{export_distance_map, export_topic_bars, mds_2d, topic_distance_matrix};

#[derive(Parser)]
#[command(name = "themeforge", version, about = "Generate and evaluate strategic-plan themes from report corpora")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FetchModeArg {
    Http,
    Fixture,
}

#[derive(Clone, Copy, ValueEnum)]
enum IdfArg {
    Smooth,
    Plain,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProviderArg {
    Lsa,
    File,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Markdown,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Extract report ids from a search-results HTML file (stdout, one per line)
    ScrapeIds {
        /// HTML file to scan
        html_file: PathBuf,
        /// Report-id regular expression
        #[arg(long, default_value = DEFAULT_REPORT_ID_PATTERN)]
        pattern: String,
    },
    /// Fetch report payloads into an output directory as `<ID>.txt`
    Fetch {
        /// File with one report id per line
        #[arg(long)]
        ids: PathBuf,
        /// URL template containing `{id}` (http mode)
        #[arg(long)]
        template: Option<String>,
        #[arg(long, value_enum)]
        mode: FetchModeArg,
        /// Directory of `<ID>.txt` files (fixture mode)
        #[arg(long)]
        fixture_dir: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Politeness delay between HTTP requests, in milliseconds
        #[arg(long, default_value_t = 1000)]
        delay_ms: u64,
        /// Concurrent fetch workers
        #[arg(long, default_value_t = 1)]
        parallelism: usize,
    },
    /// Ingest a directory of paged-text reports into a corpus store
    Ingest {
        /// Directory of `<report_id>.txt` files
        input_dir: PathBuf,
        /// Corpus store to write (JSON lines)
        #[arg(long)]
        out: PathBuf,
    },
    /// Train the NMF pipeline and export its topics
    TrainNmf {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Also save the fitted factor model
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long, default_value_t = 10)]
        k: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        max_iter: usize,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long, default_value_t = 10)]
        n_words: usize,
        #[arg(long, default_value_t = 1)]
        min_df: usize,
        #[arg(long, default_value_t = 1.0)]
        max_df_ratio: f64,
        #[arg(long, value_enum, default_value_t = IdfArg::Smooth)]
        idf: IdfArg,
        /// Extra stop words, one per line
        #[arg(long)]
        stop_words: Option<PathBuf>,
        /// Skip the built-in English stop list
        #[arg(long)]
        no_default_stop_words: bool,
    },
    /// Train the embed/reduce/cluster pipeline and export its topics
    TrainCluster {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = ProviderArg::Lsa)]
        provider: ProviderArg,
        /// External embeddings (JSON lines), required with --provider file
        #[arg(long)]
        emb_file: Option<PathBuf>,
        /// LSA embedding dimensionality
        #[arg(long, default_value_t = 50)]
        dims: usize,
        #[arg(long, default_value_t = 5)]
        reduce_dims: usize,
        #[arg(long, default_value_t = 5)]
        min_cluster_size: usize,
        /// Defaults to min_cluster_size - 1
        #[arg(long)]
        min_samples: Option<usize>,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        n_words: usize,
        /// Emit the -1 outlier topic too
        #[arg(long)]
        include_outlier: bool,
    },
    /// Project topics to 2-D and export the intertopic distance map
    DistanceMap {
        #[arg(long)]
        topics: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Export per-topic weighted term lists for bar charts
    TopicBars {
        #[arg(long)]
        topics: PathBuf,
        #[arg(long, default_value_t = 10)]
        n_words: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Rank candidate topic/vision-element alignments
    Suggest {
        #[arg(long)]
        topics: PathBuf,
        #[arg(long)]
        truth: PathBuf,
        #[arg(long, default_value_t = 5)]
        top_n: usize,
        /// Write JSON here instead of printing a table
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compute correlation metrics from human annotations
    Eval {
        #[arg(long)]
        truth: PathBuf,
        #[arg(long)]
        annotations: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = FormatArg::Markdown)]
        format: FormatArg,
    },
    /// Run the full pipeline from a config file
    Run {
        #[arg(long)]
        config: PathBuf,
    },
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    if let Err(e) = dispatch() {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn dispatch() -> Result<()> {
    match Cli::parse().command {
        Command::ScrapeIds { html_file, pattern } => {
            let html = fs::read_to_string(&html_file)
                .with_context(|| format!("reading {}", html_file.display()))?;
            for id in extract_report_ids(&html, &pattern)? {
                println!("{id}");
            }
            Ok(())
        }
        Command::Fetch {
            ids,
            template,
            mode,
            fixture_dir,
            out,
            delay_ms,
            parallelism,
        } => {
            let id_text =
                fs::read_to_string(&ids).with_context(|| format!("reading {}", ids.display()))?;
            let ids: Vec<ReportId> = id_text
                .lines()
                .filter(|l| !l.trim().is_empty())
                .map(ReportId::new)
                .collect::<themeforge_core::Result<_>>()?;
            let config = match mode {
                FetchModeArg::Http => {
                    let template =
                        template.context("--template is required with --mode http")?;
                    FetchConfig::http(template)
                }
                FetchModeArg::Fixture => {
                    let dir =
                        fixture_dir.context("--fixture-dir is required with --mode fixture")?;
                    FetchConfig::fixture(dir)
                }
            }
            .with_delay(Duration::from_millis(delay_ms))
            .with_parallelism(parallelism);

            fs::create_dir_all(&out)?;
            let mut failures = Vec::new();
            for (id, outcome) in fetch_reports(&ids, &config) {
                match outcome {
                    Ok(bytes) => {
                        fs::write(out.join(format!("{id}.txt")), bytes)?;
                        log::info!("fetched {id}");
                    }
                    Err(e) => {
                        log::warn!("failed to fetch {id}: {e}");
                        failures.push(id);
                    }
                }
            }
            if !failures.is_empty() {
                bail!("{} of {} reports failed to fetch", failures.len(), ids.len());
            }
            Ok(())
        }
        Command::Ingest { input_dir, out } => {
            let corpus = themeforge_core::corpus::ingest(&input_dir, &out)?;
            log::info!(
                "ingested {} documents from {} reports into {}",
                corpus.len(),
                corpus.report_ids().len(),
                out.display()
            );
            Ok(())
        }
        Command::TrainNmf {
            corpus,
            out,
            model,
            k,
            seed,
            max_iter,
            tol,
            n_words,
            min_df,
            max_df_ratio,
            idf,
            stop_words,
            no_default_stop_words,
        } => {
            let corpus = Corpus::read_store(&corpus)?;
            let stops =
                pipeline::load_stop_words(!no_default_stop_words, stop_words.as_deref())?;
            let texts = corpus.texts();
            let vocab = build_vocabulary(&texts, min_df, max_df_ratio, &stops)?;
            let counts = count_matrix(&texts, &vocab);
            let idf = match idf {
                IdfArg::Smooth => IdfMode::Smooth,
                IdfArg::Plain => IdfMode::Plain,
            };
            let tfidf = tfidf_transform(&counts, idf)?;
            let fitted = nmf_fit(&tfidf, NmfParams { k, seed, max_iter, tol })?;
            log::info!(
                "nmf converged to objective {:.6} in {} iterations",
                fitted.objective_trace.last().copied().unwrap_or(f64::NAN),
                fitted.objective_trace.len()
            );
            if let Some(model_path) = model {
                fitted.save(&model_path)?;
            }
            nmf_topics(&fitted, &vocab, n_words).save(&out)?;
            Ok(())
        }
        Command::TrainCluster {
            corpus,
            out,
            provider,
            emb_file,
            dims,
            reduce_dims,
            min_cluster_size,
            min_samples,
            seed,
            n_words,
            include_outlier,
        } => {
            let corpus = Corpus::read_store(&corpus)?;
            let provider = match provider {
                ProviderArg::Lsa => EmbeddingProvider::Lsa { dims, seed },
                ProviderArg::File => EmbeddingProvider::ExternalFile {
                    path: emb_file.context("--emb-file is required with --provider file")?,
                },
            };
            let mut hdbscan = HdbscanParams::new(min_cluster_size);
            if let Some(min_samples) = min_samples {
                hdbscan = hdbscan.with_min_samples(min_samples);
            }
            let params = ClusterPipelineParams {
                provider,
                reduce_dims,
                hdbscan,
                n_words,
                include_outlier_topic: include_outlier,
            };
            let (set, labels) = train_cluster_topics(&corpus, &params)?;
            log::info!(
                "cluster pipeline found {} clusters ({} noise documents)",
                labels.n_clusters(),
                labels.labels().iter().filter(|&&l| l < 0).count()
            );
            set.save(&out)?;
            Ok(())
        }
        Command::DistanceMap { topics, out } => {
            let set = TopicSet::load(&topics)?;
            let distances = topic_distance_matrix(&set)?;
            let mds = mds_2d(&distances);
            if mds.clamped_negative {
                log::warn!("negative MDS eigenvalue clamped to zero");
            }
            export_distance_map(&set, &mds, &out)?;
            Ok(())
        }
        Command::TopicBars { topics, n_words, out } => {
            let set = TopicSet::load(&topics)?;
            export_topic_bars(&set, n_words, &out)?;
            Ok(())
        }
        Command::Suggest {
            topics,
            truth,
            top_n,
            out,
        } => {
            let set = TopicSet::load(&topics)?;
            let elements = load_truth(&truth)?;
            let suggestions = suggest_alignments(&set, &elements, top_n);
            match out {
                Some(path) => {
                    let mut bytes = serde_json::to_vec_pretty(&suggestions)?;
                    bytes.push(b'\n');
                    fs::write(path, bytes)?;
                }
                None => {
                    for s in &suggestions {
                        println!(
                            "{}\t{}\ttopic {}\tscore {:.4}",
                            s.vision_element_id, s.technique, s.topic_id, s.score
                        );
                    }
                }
            }
            Ok(())
        }
        Command::Eval {
            truth,
            annotations,
            out,
            format,
        } => {
            let elements = load_truth(&truth)?;
            let set = load_annotations(&annotations, &elements)?;
            let metrics = compute_metrics(&set);
            let format = match format {
                FormatArg::Markdown => ReportFormat::Markdown,
                FormatArg::Json => ReportFormat::Json,
            };
            fs::write(&out, render_report(&metrics, format))?;
            log::info!("wrote {} ({} records)", out.display(), metrics.total);
            Ok(())
        }
        Command::Run { config } => {
            let config = config::validate_config(&config).map_err(|errors| {
                anyhow::anyhow!("invalid config:\n  - {}", errors.join("\n  - "))
            })?;
            pipeline::run_pipeline(&config)?;
            Ok(())
        }
    }
}
