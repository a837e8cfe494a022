//! Report-id extraction from search-result HTML and batch report fetching.
//!
//! The scraper does not parse HTML structurally: ids are matched anywhere in
//! the raw text (href attributes and element text alike) so malformed markup
//! never blocks extraction.

use std::collections::HashSet;
use std::fs;
use std::path::PathBuf;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use regex::RegexBuilder;

use crate::corpus::ReportId;
use crate::error::{Error, Result};

/// Default report-id pattern, configurable per call.
pub const DEFAULT_REPORT_ID_PATTERN: &str = r"GAO-\d{2,4}-\d+[A-Z]*";

/// Default politeness delay between HTTP requests.
pub const DEFAULT_POLITENESS_DELAY: Duration = Duration::from_millis(1000);

/// Extracts all distinct report ids matching `pattern` from `html`, in
/// first-appearance order, normalized to upper case.
///
/// Matching is case-insensitive; the input does not have to be well-formed
/// HTML.
pub fn extract_report_ids(html: &str, pattern: &str) -> Result<Vec<ReportId>> {
    let re = RegexBuilder::new(pattern)
        .case_insensitive(true)
        .build()
        .map_err(|e| Error::Config(format!("invalid report-id pattern {pattern:?}: {e}")))?;

    let mut seen = HashSet::new();
    let mut ids = Vec::new();
    for m in re.find_iter(html) {
        let id = ReportId::new(m.as_str())?;
        if seen.insert(id.clone()) {
            ids.push(id);
        }
    }
    Ok(ids)
}

/// Substitutes the lower-cased report id into a URL template containing
/// exactly one `{id}` placeholder.
pub fn build_report_url(id: &ReportId, template: &str) -> Result<String> {
    let placeholders = template.matches("{id}").count();
    if placeholders != 1 {
        return Err(Error::Config(format!(
            "url template must contain exactly one {{id}} placeholder, found {placeholders}: {template:?}"
        )));
    }
    Ok(template.replace("{id}", &id.to_lowercase()))
}

/// Where reports are fetched from.
#[derive(Debug, Clone)]
pub enum FetchMode {
    /// Download over HTTP using a `{id}` URL template.
    Http { template: String },
    /// Read `<ID>.txt` files from a local directory.
    FixtureDir { dir: PathBuf },
}

/// Fetch behavior: source, politeness delay, and parallelism bound.
#[derive(Debug, Clone)]
pub struct FetchConfig {
    pub mode: FetchMode,
    /// Minimum gap between the completion of one HTTP request and the start
    /// of the next, per worker. Ignored in fixture mode.
    pub delay: Duration,
    /// Number of concurrent fetch workers.
    pub parallelism: usize,
}

impl FetchConfig {
    pub fn fixture(dir: impl Into<PathBuf>) -> Self {
        FetchConfig {
            mode: FetchMode::FixtureDir { dir: dir.into() },
            delay: DEFAULT_POLITENESS_DELAY,
            parallelism: 1,
        }
    }

    pub fn http(template: impl Into<String>) -> Self {
        FetchConfig {
            mode: FetchMode::Http {
                template: template.into(),
            },
            delay: DEFAULT_POLITENESS_DELAY,
            parallelism: 1,
        }
    }

    pub fn with_delay(mut self, delay: Duration) -> Self {
        self.delay = delay;
        self
    }

    pub fn with_parallelism(mut self, parallelism: usize) -> Self {
        self.parallelism = parallelism.max(1);
        self
    }
}

/// Stateful fetcher that enforces the politeness delay between consecutive
/// HTTP requests issued through it.
pub struct Fetcher {
    config: FetchConfig,
    last_completed: Mutex<Option<Instant>>,
}

impl Fetcher {
    pub fn new(config: FetchConfig) -> Self {
        Fetcher {
            config,
            last_completed: Mutex::new(None),
        }
    }

    /// Fetches one report payload.
    ///
    /// In fixture mode a missing `<ID>.txt` file maps to [`Error::NotFound`].
    /// In HTTP mode a 404 maps to [`Error::NotFound`] and other failures to
    /// the retryable [`Error::Transport`].
    pub fn fetch(&self, id: &ReportId) -> Result<Vec<u8>> {
        match &self.config.mode {
            FetchMode::FixtureDir { dir } => {
                let path = dir.join(format!("{id}.txt"));
                match fs::read(&path) {
                    Ok(bytes) => Ok(bytes),
                    Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                        Err(Error::NotFound(id.to_string()))
                    }
                    Err(e) => Err(Error::io(path, e)),
                }
            }
            FetchMode::Http { template } => {
                let url = build_report_url(id, template)?;
                self.wait_for_politeness();
                let outcome = http_get(&url, id);
                *self.last_completed.lock().unwrap() = Some(Instant::now());
                outcome
            }
        }
    }

    fn wait_for_politeness(&self) {
        let last = *self.last_completed.lock().unwrap();
        if let Some(done) = last {
            let next_allowed = done + self.config.delay;
            let now = Instant::now();
            if next_allowed > now {
                std::thread::sleep(next_allowed - now);
            }
        }
    }
}

fn http_get(url: &str, id: &ReportId) -> Result<Vec<u8>> {
    match ureq::get(url).call() {
        Ok(mut response) => response
            .body_mut()
            .read_to_vec()
            .map_err(|e| Error::Transport {
                id: id.to_string(),
                source: Box::new(e),
            }),
        Err(ureq::Error::StatusCode(404)) => Err(Error::NotFound(id.to_string())),
        Err(e) => Err(Error::Transport {
            id: id.to_string(),
            source: Box::new(e),
        }),
    }
}

/// One fetched report: the id paired with its payload or error.
pub type FetchOutcome = (ReportId, Result<Vec<u8>>);

/// Fetches a batch of reports, preserving input order in the result.
///
/// Parallelism is bounded by `config.parallelism`; each worker applies the
/// politeness delay independently.
pub fn fetch_reports(ids: &[ReportId], config: &FetchConfig) -> Vec<FetchOutcome> {
    let workers = config.parallelism.max(1).min(ids.len().max(1));
    if workers <= 1 {
        let fetcher = Fetcher::new(config.clone());
        return ids
            .iter()
            .map(|id| (id.clone(), fetcher.fetch(id)))
            .collect();
    }

    let mut slots: Vec<Option<FetchOutcome>> = Vec::new();
    slots.resize_with(ids.len(), || None);
    let slot_chunks: Vec<&mut [Option<FetchOutcome>]> =
        slots.chunks_mut(ids.len().div_ceil(workers)).collect();
    std::thread::scope(|scope| {
        for (chunk_no, chunk) in slot_chunks.into_iter().enumerate() {
            let start = chunk_no * ids.len().div_ceil(workers);
            let config = config.clone();
            scope.spawn(move || {
                let fetcher = Fetcher::new(config);
                for (offset, slot) in chunk.iter_mut().enumerate() {
                    let id = &ids[start + offset];
                    *slot = Some((id.clone(), fetcher.fetch(id)));
                }
            });
        }
    });
    slots.into_iter().map(|s| s.expect("slot filled")).collect()
}
