//! Page-level document corpus: report identifiers, page splitting, and the
//! JSON-lines corpus store.
//!
//! Reports arrive as "paged text": a single UTF-8 string with form-feed
//! (U+000C) page separators. Each page becomes a standalone document so the
//! downstream models see many short documents instead of a few long ones.

use std::collections::BTreeSet;
use std::fs;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Page separator for the paged-text interchange format.
pub const PAGE_SEPARATOR: char = '\u{000C}';

/// A report identifier such as `GAO-21-145`, normalized to upper case.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ReportId(String);

impl ReportId {
    /// Normalizes to upper case. Empty (after trimming) ids are rejected.
    pub fn new(raw: &str) -> Result<Self> {
        let normalized = raw.trim().to_uppercase();
        if normalized.is_empty() {
            return Err(Error::Validation("report id must be non-empty".into()));
        }
        Ok(ReportId(normalized))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Lower-cased form used when substituting into download URLs.
    pub fn to_lowercase(&self) -> String {
        self.0.to_lowercase()
    }
}

impl std::fmt::Display for ReportId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

/// One report page treated as a standalone document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PagedDocument {
    pub report_id: ReportId,
    /// 1-based page number within the source report.
    pub page_no: u32,
    pub text: String,
}

impl PagedDocument {
    /// Stable key identifying this document within a corpus.
    pub fn key(&self) -> (String, u32) {
        (self.report_id.as_str().to_string(), self.page_no)
    }
}

/// Where a report came from and what happened while loading it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceRecord {
    pub report_id: ReportId,
    /// Origin URL or file path.
    pub origin: String,
    /// RFC 3339 retrieval time; `None` for local files so that re-running
    /// ingest over the same directory stays byte-identical.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub retrieved_at: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

/// An ordered, deduplicated collection of page-level documents.
///
/// Documents are sorted by `(report_id, page_no)` and the pair is unique
/// within the corpus.
#[derive(Debug, Clone, Default)]
pub struct Corpus {
    documents: Vec<PagedDocument>,
    source_manifest: Vec<SourceRecord>,
}

impl Corpus {
    /// Builds a corpus, sorting documents and rejecting duplicate
    /// `(report_id, page_no)` pairs.
    pub fn new(mut documents: Vec<PagedDocument>, source_manifest: Vec<SourceRecord>) -> Result<Self> {
        documents.sort_by_key(|d| d.key());
        for pair in documents.windows(2) {
            if pair[0].key() == pair[1].key() {
                return Err(Error::Validation(format!(
                    "duplicate document {} page {}",
                    pair[0].report_id, pair[0].page_no
                )));
            }
        }
        Ok(Corpus {
            documents,
            source_manifest,
        })
    }

    pub fn documents(&self) -> &[PagedDocument] {
        &self.documents
    }

    pub fn source_manifest(&self) -> &[SourceRecord] {
        &self.source_manifest
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    /// Document texts in corpus order.
    pub fn texts(&self) -> Vec<&str> {
        self.documents.iter().map(|d| d.text.as_str()).collect()
    }

    /// Distinct report ids present, in sorted order.
    pub fn report_ids(&self) -> Vec<&ReportId> {
        let mut seen = BTreeSet::new();
        self.documents
            .iter()
            .filter(|d| seen.insert(&d.report_id))
            .map(|d| &d.report_id)
            .collect()
    }

    /// Writes the corpus store: JSON lines, one document per line, UTF-8,
    /// LF endings. Byte-identical for identical corpora.
    pub fn write_store(&self, path: &Path) -> Result<()> {
        let mut out = Vec::new();
        for doc in &self.documents {
            serde_json::to_writer(&mut out, doc).map_err(|e| Error::json(path, e))?;
            out.push(b'\n');
        }
        fs::write(path, out).map_err(|e| Error::io(path, e))
    }

    /// Reads a corpus store written by [`Corpus::write_store`].
    pub fn read_store(path: &Path) -> Result<Self> {
        let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let reader = BufReader::new(file);
        let mut documents = Vec::new();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let doc: PagedDocument = serde_json::from_str(&line).map_err(|e| {
                Error::Validation(format!("{}:{}: {e}", path.display(), lineno + 1))
            })?;
            documents.push(doc);
        }
        if documents.is_empty() {
            return Err(Error::EmptyCorpus(format!(
                "store {} contains no documents",
                path.display()
            )));
        }
        let manifest = store_manifest(&documents, path);
        Corpus::new(documents, manifest)
    }
}

fn store_manifest(documents: &[PagedDocument], origin: &Path) -> Vec<SourceRecord> {
    let mut seen = BTreeSet::new();
    documents
        .iter()
        .filter(|d| seen.insert(d.report_id.clone()))
        .map(|d| SourceRecord {
            report_id: d.report_id.clone(),
            origin: origin.display().to_string(),
            retrieved_at: None,
            warning: None,
        })
        .collect()
}

/// Splits paged text into per-page documents.
///
/// Pages are separated by form-feed. Each page is whitespace-trimmed; a
/// trailing empty segment after a final form-feed is dropped. Empty input
/// yields a single empty page.
pub fn split_pages(report_id: &ReportId, paged_text: &str) -> Vec<PagedDocument> {
    let mut segments: Vec<&str> = paged_text.split(PAGE_SEPARATOR).collect();
    if segments.len() > 1 && segments.last() == Some(&"") {
        segments.pop();
    }
    segments
        .iter()
        .enumerate()
        .map(|(i, segment)| PagedDocument {
            report_id: report_id.clone(),
            page_no: (i + 1) as u32,
            text: segment.trim().to_string(),
        })
        .collect()
}

/// Ingests a directory of `<report_id>.txt` paged-text files, persists the
/// corpus store to `output_store`, and returns the corpus.
///
/// Files are processed in sorted filename order; unreadable files are
/// skipped with a warning recorded in the source manifest. Ingesting zero
/// documents is an error.
pub fn ingest(input_dir: &Path, output_store: &Path) -> Result<Corpus> {
    let entries = fs::read_dir(input_dir).map_err(|e| Error::io(input_dir, e))?;
    let mut paths: Vec<_> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().map(|x| x == "txt").unwrap_or(false))
        .collect();
    paths.sort();

    let mut documents = Vec::new();
    let mut manifest = Vec::new();
    for path in &paths {
        let stem = match path.file_stem().and_then(|s| s.to_str()) {
            Some(s) => s,
            None => continue,
        };
        let report_id = ReportId::new(stem)?;
        match fs::read_to_string(path) {
            Ok(text) => {
                documents.extend(split_pages(&report_id, &text));
                manifest.push(SourceRecord {
                    report_id,
                    origin: path.display().to_string(),
                    retrieved_at: None,
                    warning: None,
                });
            }
            Err(e) => {
                log::warn!("skipping unreadable report {}: {e}", path.display());
                manifest.push(SourceRecord {
                    report_id,
                    origin: path.display().to_string(),
                    retrieved_at: None,
                    warning: Some(format!("unreadable: {e}")),
                });
            }
        }
    }

    if documents.is_empty() {
        return Err(Error::EmptyCorpus(format!(
            "no documents ingested from {}",
            input_dir.display()
        )));
    }
    let corpus = Corpus::new(documents, manifest)?;
    corpus.write_store(output_store)?;
    Ok(corpus)
}
