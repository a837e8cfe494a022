//! Strict pipeline configuration.
//!
//! The config file is TOML. Parsing is strict — unknown sections or keys are
//! rejected by name — and validation reports every problem at once instead
//! of stopping at the first. Relative paths resolve against the config
//! file's directory. Seeds must be written explicitly; there are no
//! wall-clock defaults anywhere.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use themeforge_core::vectorize::IdfMode;
use toml::Value;

/// Validated pipeline configuration.
#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub corpus: CorpusConfig,
    pub vectorizer: VectorizerConfig,
    pub nmf: NmfConfig,
    pub cluster: ClusterConfig,
    pub eval: Option<EvalConfig>,
    pub output: OutputConfig,
}

#[derive(Debug, Clone)]
pub struct CorpusConfig {
    /// Directory of `<report_id>.txt` paged-text files.
    pub input_dir: PathBuf,
}

#[derive(Debug, Clone)]
pub struct VectorizerConfig {
    pub min_df: usize,
    pub max_df_ratio: f64,
    pub idf: IdfMode,
    /// Extra stop words, one per line.
    pub stop_words: Option<PathBuf>,
    /// Apply the built-in English stop list to the NMF path.
    pub use_default_stop_words: bool,
}

#[derive(Debug, Clone)]
pub struct NmfConfig {
    pub k: usize,
    pub seed: u64,
    pub max_iter: usize,
    pub tol: f64,
    pub n_words: usize,
}

#[derive(Debug, Clone)]
pub struct ClusterConfig {
    pub provider: ProviderKind,
    pub emb_file: Option<PathBuf>,
    pub dims: usize,
    pub reduce_dims: usize,
    pub min_cluster_size: usize,
    /// Defaults to `min_cluster_size - 1` when absent.
    pub min_samples: Option<usize>,
    pub seed: u64,
    pub n_words: usize,
    pub include_outlier_topic: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProviderKind {
    Lsa,
    File,
}

#[derive(Debug, Clone)]
pub struct EvalConfig {
    pub truth: PathBuf,
    pub annotations: Option<PathBuf>,
    pub top_n: usize,
}

#[derive(Debug, Clone)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

/// Parses and validates a config file, reporting all errors at once.
pub fn validate_config(path: &Path) -> Result<PipelineConfig, Vec<String>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| vec![format!("cannot read config {}: {e}", path.display())])?;
    let root: Value = toml::from_str(&text)
        .map_err(|e| vec![format!("config {} is not valid TOML: {e}", path.display())])?;
    let base = path.parent().unwrap_or_else(|| Path::new(".")).to_path_buf();

    let mut errors = Vec::new();
    let table = match root.as_table() {
        Some(t) => t,
        None => return Err(vec!["config root must be a table".to_string()]),
    };

    let known_sections: BTreeSet<&str> =
        ["corpus", "vectorizer", "nmf", "cluster", "eval", "output"].into();
    for key in table.keys() {
        if !known_sections.contains(key.as_str()) {
            errors.push(format!("unknown section `{key}`"));
        }
    }

    let corpus = section(table, "corpus", &mut errors).map(|s| {
        check_keys(s, "corpus", &["input_dir"], &mut errors);
        CorpusConfig {
            input_dir: req_path(s, "corpus", "input_dir", &base, &mut errors),
        }
    });

    let vectorizer = {
        let empty = toml::map::Map::new();
        let s = table
            .get("vectorizer")
            .and_then(|v| v.as_table())
            .unwrap_or(&empty);
        if let Some(v) = table.get("vectorizer") {
            if v.as_table().is_none() {
                errors.push("`vectorizer` must be a table".into());
            }
        }
        check_keys(
            s,
            "vectorizer",
            &["min_df", "max_df_ratio", "idf", "stop_words", "use_default_stop_words"],
            &mut errors,
        );
        let idf = match opt_str(s, "vectorizer", "idf", &mut errors).as_deref() {
            None => IdfMode::Smooth,
            Some("smooth") => IdfMode::Smooth,
            Some("plain") => IdfMode::Plain,
            Some(other) => {
                errors.push(format!("`vectorizer.idf` must be \"smooth\" or \"plain\", got {other:?}"));
                IdfMode::Smooth
            }
        };
        let min_df = opt_usize(s, "vectorizer", "min_df", &mut errors).unwrap_or(1);
        if min_df < 1 {
            errors.push("`vectorizer.min_df` must be >= 1".into());
        }
        let max_df_ratio = opt_f64(s, "vectorizer", "max_df_ratio", &mut errors).unwrap_or(1.0);
        if !(max_df_ratio > 0.0 && max_df_ratio <= 1.0) {
            errors.push(format!(
                "`vectorizer.max_df_ratio` must be in (0, 1], got {max_df_ratio}"
            ));
        }
        VectorizerConfig {
            min_df,
            max_df_ratio,
            idf,
            stop_words: opt_existing_path(s, "vectorizer", "stop_words", &base, &mut errors),
            use_default_stop_words: opt_bool(s, "vectorizer", "use_default_stop_words", &mut errors)
                .unwrap_or(true),
        }
    };

    let nmf = section(table, "nmf", &mut errors).map(|s| {
        check_keys(s, "nmf", &["k", "seed", "max_iter", "tol", "n_words"], &mut errors);
        let k = opt_usize(s, "nmf", "k", &mut errors).unwrap_or(10);
        if k < 1 {
            errors.push("`nmf.k` must be >= 1".into());
        }
        NmfConfig {
            k,
            seed: req_seed(s, "nmf", &mut errors),
            max_iter: opt_usize(s, "nmf", "max_iter", &mut errors).unwrap_or(200),
            tol: opt_f64(s, "nmf", "tol", &mut errors).unwrap_or(1e-6),
            n_words: opt_usize(s, "nmf", "n_words", &mut errors).unwrap_or(10),
        }
    });

    let cluster = section(table, "cluster", &mut errors).map(|s| {
        check_keys(
            s,
            "cluster",
            &[
                "provider", "emb_file", "dims", "reduce_dims", "min_cluster_size",
                "min_samples", "seed", "n_words", "include_outlier_topic",
            ],
            &mut errors,
        );
        let provider = match opt_str(s, "cluster", "provider", &mut errors).as_deref() {
            None | Some("lsa") => ProviderKind::Lsa,
            Some("file") => ProviderKind::File,
            Some(other) => {
                errors.push(format!(
                    "`cluster.provider` must be \"lsa\" or \"file\", got {other:?}"
                ));
                ProviderKind::Lsa
            }
        };
        let emb_file = opt_existing_path(s, "cluster", "emb_file", &base, &mut errors);
        if provider == ProviderKind::File && emb_file.is_none() {
            errors.push("`cluster.provider` = \"file\" requires `cluster.emb_file`".into());
        }
        let min_cluster_size = opt_usize(s, "cluster", "min_cluster_size", &mut errors).unwrap_or(5);
        if min_cluster_size < 2 {
            errors.push("`cluster.min_cluster_size` must be >= 2".into());
        }
        let dims = opt_usize(s, "cluster", "dims", &mut errors).unwrap_or(50);
        let reduce_dims = opt_usize(s, "cluster", "reduce_dims", &mut errors).unwrap_or(5);
        if provider == ProviderKind::Lsa && reduce_dims > dims {
            errors.push(format!(
                "`cluster.reduce_dims` ({reduce_dims}) exceeds `cluster.dims` ({dims})"
            ));
        }
        ClusterConfig {
            provider,
            emb_file,
            dims,
            reduce_dims,
            min_cluster_size,
            min_samples: opt_usize(s, "cluster", "min_samples", &mut errors),
            seed: req_seed(s, "cluster", &mut errors),
            n_words: opt_usize(s, "cluster", "n_words", &mut errors).unwrap_or(10),
            include_outlier_topic: opt_bool(s, "cluster", "include_outlier_topic", &mut errors)
                .unwrap_or(false),
        }
    });

    let eval = match table.get("eval") {
        None => None,
        Some(v) => match v.as_table() {
            None => {
                errors.push("`eval` must be a table".into());
                None
            }
            Some(s) => {
                check_keys(s, "eval", &["truth", "annotations", "top_n"], &mut errors);
                let truth = req_path(s, "eval", "truth", &base, &mut errors);
                if !truth.as_os_str().is_empty() && !truth.is_file() {
                    errors.push(format!(
                        "`eval.truth` does not exist: {}",
                        truth.display()
                    ));
                }
                Some(EvalConfig {
                    truth,
                    annotations: opt_existing_path(s, "eval", "annotations", &base, &mut errors),
                    top_n: opt_usize(s, "eval", "top_n", &mut errors).unwrap_or(5),
                })
            }
        },
    };

    let output = section(table, "output", &mut errors).map(|s| {
        check_keys(s, "output", &["dir"], &mut errors);
        OutputConfig {
            dir: req_path(s, "output", "dir", &base, &mut errors),
        }
    });

    // path existence for the corpus input (other inputs were checked above)
    if let Some(ref c) = corpus {
        if !c.input_dir.as_os_str().is_empty() && !c.input_dir.is_dir() {
            errors.push(format!(
                "`corpus.input_dir` is not a directory: {}",
                c.input_dir.display()
            ));
        }
    }

    if !errors.is_empty() {
        return Err(errors);
    }
    Ok(PipelineConfig {
        corpus: corpus.expect("validated"),
        vectorizer,
        nmf: nmf.expect("validated"),
        cluster: cluster.expect("validated"),
        eval,
        output: output.expect("validated"),
    })
}

type Table = toml::map::Map<String, Value>;

fn section<'a>(table: &'a Table, name: &str, errors: &mut Vec<String>) -> Option<&'a Table> {
    match table.get(name) {
        None => {
            errors.push(format!("missing required section `[{name}]`"));
            None
        }
        Some(v) => match v.as_table() {
            Some(t) => Some(t),
            None => {
                errors.push(format!("`{name}` must be a table"));
                None
            }
        },
    }
}

fn check_keys(s: &Table, section: &str, known: &[&str], errors: &mut Vec<String>) {
    for key in s.keys() {
        if !known.contains(&key.as_str()) {
            errors.push(format!("unknown key `{section}.{key}`"));
        }
    }
}

fn req_path(s: &Table, section: &str, key: &str, base: &Path, errors: &mut Vec<String>) -> PathBuf {
    match s.get(key) {
        None => {
            errors.push(format!("`{section}.{key}` is required"));
            PathBuf::new()
        }
        Some(v) => match v.as_str() {
            Some(raw) => resolve(base, raw),
            None => {
                errors.push(format!("`{section}.{key}` must be a string path"));
                PathBuf::new()
            }
        },
    }
}

fn opt_existing_path(
    s: &Table,
    section: &str,
    key: &str,
    base: &Path,
    errors: &mut Vec<String>,
) -> Option<PathBuf> {
    let raw = opt_str(s, section, key, errors)?;
    let path = resolve(base, &raw);
    if !path.is_file() {
        errors.push(format!("`{section}.{key}` does not exist: {}", path.display()));
    }
    Some(path)
}

fn resolve(base: &Path, raw: &str) -> PathBuf {
    let p = PathBuf::from(raw);
    if p.is_absolute() {
        p
    } else {
        base.join(p)
    }
}

fn opt_str(s: &Table, section: &str, key: &str, errors: &mut Vec<String>) -> Option<String> {
    let v = s.get(key)?;
    match v.as_str() {
        Some(x) => Some(x.to_string()),
        None => {
            errors.push(format!("`{section}.{key}` must be a string"));
            None
        }
    }
}

fn opt_usize(s: &Table, section: &str, key: &str, errors: &mut Vec<String>) -> Option<usize> {
    let v = s.get(key)?;
    match v.as_integer() {
        Some(x) if x >= 0 => Some(x as usize),
        _ => {
            errors.push(format!("`{section}.{key}` must be a nonnegative integer"));
            None
        }
    }
}

fn opt_f64(s: &Table, section: &str, key: &str, errors: &mut Vec<String>) -> Option<f64> {
    let v = s.get(key)?;
    match v.as_float().or_else(|| v.as_integer().map(|i| i as f64)) {
        Some(x) => Some(x),
        None => {
            errors.push(format!("`{section}.{key}` must be a number"));
            None
        }
    }
}

fn opt_bool(s: &Table, section: &str, key: &str, errors: &mut Vec<String>) -> Option<bool> {
    let v = s.get(key)?;
    match v.as_bool() {
        Some(x) => Some(x),
        None => {
            errors.push(format!("`{section}.{key}` must be a boolean"));
            None
        }
    }
}

fn req_seed(s: &Table, section: &str, errors: &mut Vec<String>) -> u64 {
    match s.get("seed") {
        None => {
            errors.push(format!(
                "`{section}.seed` is required; seeds must be explicit integers"
            ));
            0
        }
        Some(v) => match v.as_integer() {
            Some(x) if x >= 0 => x as u64,
            _ => {
                errors.push(format!("`{section}.seed` must be a nonnegative integer"));
                0
            }
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;

    fn write_config(dir: &Path, body: &str) -> PathBuf {
        let path = dir.join("pipeline.toml");
        fs::write(&path, body).unwrap();
        path
    }

    fn minimal_body(dir: &Path) -> String {
        fs::create_dir_all(dir.join("reports")).unwrap();
        fs::write(dir.join("reports/GAO-1-1.txt"), "page one").unwrap();
        r#"
[corpus]
input_dir = "reports"

[nmf]
seed = 42

[cluster]
seed = 7

[output]
dir = "out"
"#
        .to_string()
    }

    #[test]
    fn minimal_valid_config_parses_with_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_config(dir.path(), &minimal_body(dir.path()));
        let config = validate_config(&path).unwrap();
        assert_eq!(config.nmf.k, 10);
        assert_eq!(config.nmf.seed, 42);
        assert_eq!(config.cluster.dims, 50);
        assert_eq!(config.cluster.min_cluster_size, 5);
        assert!(config.vectorizer.use_default_stop_words);
        assert!(config.eval.is_none());
        assert!(config.corpus.input_dir.ends_with("reports"));
    }

    #[test]
    fn two_bad_paths_produce_two_errors() {
        let dir = tempfile::tempdir().unwrap();
        let body = r#"
[corpus]
input_dir = "missing_reports"

[nmf]
seed = 42

[cluster]
seed = 7

[eval]
truth = "missing_truth.json"

[output]
dir = "out"
"#;
        let path = write_config(dir.path(), body);
        let errors = validate_config(&path).unwrap_err();
        assert!(errors.iter().any(|e| e.contains("corpus.input_dir")), "{errors:?}");
        assert!(errors.iter().any(|e| e.contains("eval.truth")), "{errors:?}");
        assert!(errors.len() >= 2);
    }

    #[test]
    fn unknown_keys_are_rejected_by_name() {
        let dir = tempfile::tempdir().unwrap();
        let mut body = minimal_body(dir.path());
        body.push_str("\n[bogus]\nx = 1\n");
        body.push_str("\n[vectorizer]\ntypo_key = 3\n");
        let path = write_config(dir.path(), &body);
        let errors = validate_config(&path).unwrap_err();
        assert!(errors.iter().any(|e| e.contains("unknown section `bogus`")), "{errors:?}");
        assert!(
            errors.iter().any(|e| e.contains("unknown key `vectorizer.typo_key`")),
            "{errors:?}"
        );
    }

    #[test]
    fn missing_seeds_are_reported() {
        let dir = tempfile::tempdir().unwrap();
        fs::create_dir_all(dir.path().join("reports")).unwrap();
        fs::write(dir.path().join("reports/GAO-1-1.txt"), "page").unwrap();
        let body = r#"
[corpus]
input_dir = "reports"

[nmf]
k = 5

[cluster]
min_cluster_size = 4

[output]
dir = "out"
"#;
        let path = write_config(dir.path(), body);
        let errors = validate_config(&path).unwrap_err();
        assert!(errors.iter().any(|e| e.contains("nmf.seed")), "{errors:?}");
        assert!(errors.iter().any(|e| e.contains("cluster.seed")), "{errors:?}");
    }

    #[test]
    fn file_provider_requires_emb_file() {
        let dir = tempfile::tempdir().unwrap();
        let mut body = minimal_body(dir.path());
        body = body.replace("[cluster]\nseed = 7", "[cluster]\nseed = 7\nprovider = \"file\"");
        let path = write_config(dir.path(), &body);
        let errors = validate_config(&path).unwrap_err();
        assert!(errors.iter().any(|e| e.contains("cluster.emb_file")), "{errors:?}");
    }
}
