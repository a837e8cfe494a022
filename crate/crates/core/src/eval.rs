//! Evaluation harness: truth vision elements, human correlation
//! annotations, alignment suggestions, and the three summary metrics.
//!
//! Correlation strengths are always human-assigned; the harness only loads,
//! validates, and aggregates them. `suggest_alignments` is advisory ranking
//! support for the annotator, never a labeler.
//!
//! Suggested strength rubric (guidance, not enforced): strong = the
//! element's central theme matches the topic's top-3 terms; medium = a clear
//! shared theme; weak = partial or terminological overlap only.

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::cosine_similarity;
use crate::topics::{Technique, TopicSet};
use crate::vectorize::{count_matrix, tokenize, IdfMode, Vocabulary};

/// A theme from the truth strategic plan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VisionElement {
    pub id: String,
    pub title: String,
    pub text: String,
}

/// Human-assigned correlation strength.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strength {
    Weak,
    Medium,
    Strong,
}

/// One human judgment linking a generated topic to a vision element.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationRecord {
    pub technique: Technique,
    pub topic_id: i64,
    pub vision_element_id: String,
    pub strength: Strength,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl CorrelationRecord {
    fn triple(&self) -> (Technique, i64, &str) {
        (self.technique, self.topic_id, &self.vision_element_id)
    }
}

/// Validated annotations plus the element universe they refer to.
#[derive(Debug, Clone)]
pub struct AnnotationSet {
    records: Vec<CorrelationRecord>,
    /// All element ids from the truth data, in truth order, so elements with
    /// zero correlations still appear in the metrics.
    element_ids: Vec<String>,
}

impl AnnotationSet {
    /// Validates referential integrity against the truth elements and
    /// rejects duplicate `(technique, topic, element)` triples.
    pub fn from_records(
        records: Vec<CorrelationRecord>,
        truth: &[VisionElement],
    ) -> Result<Self> {
        let known: HashSet<&str> = truth.iter().map(|e| e.id.as_str()).collect();
        let mut seen = HashSet::new();
        for (i, record) in records.iter().enumerate() {
            if !known.contains(record.vision_element_id.as_str()) {
                return Err(Error::Validation(format!(
                    "record {}: unknown vision element id {:?}",
                    i + 1,
                    record.vision_element_id
                )));
            }
            if !seen.insert(record.triple()) {
                return Err(Error::Validation(format!(
                    "record {}: duplicate correlation ({}, {}, {})",
                    i + 1,
                    record.technique,
                    record.topic_id,
                    record.vision_element_id
                )));
            }
        }
        Ok(AnnotationSet {
            records,
            element_ids: truth.iter().map(|e| e.id.clone()).collect(),
        })
    }

    pub fn records(&self) -> &[CorrelationRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn element_ids(&self) -> &[String] {
        &self.element_ids
    }
}

/// Loads the truth vision elements: a JSON array of `{id, title, text}`.
pub fn load_truth(path: &Path) -> Result<Vec<VisionElement>> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let elements: Vec<VisionElement> =
        serde_json::from_slice(&bytes).map_err(|e| Error::json(path, e))?;
    if elements.is_empty() {
        return Err(Error::Validation(format!(
            "truth file {} contains no vision elements",
            path.display()
        )));
    }
    let mut ids = HashSet::new();
    for element in &elements {
        if element.text.trim().is_empty() {
            return Err(Error::Validation(format!(
                "vision element {:?} has empty text",
                element.id
            )));
        }
        if !ids.insert(element.id.as_str()) {
            return Err(Error::Validation(format!(
                "duplicate vision element id {:?}",
                element.id
            )));
        }
    }
    Ok(elements)
}

/// Loads JSON-lines correlation records, validating each line against the
/// truth elements. Errors name the offending line.
pub fn load_annotations(path: &Path, truth: &[VisionElement]) -> Result<AnnotationSet> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);
    let mut records = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let record: CorrelationRecord = serde_json::from_str(&line).map_err(|e| {
            Error::Validation(format!("{}:{}: {e}", path.display(), lineno + 1))
        })?;
        records.push(record);
    }
    AnnotationSet::from_records(records, truth)
        .map_err(|e| Error::Validation(format!("{}: {e}", path.display())))
}

/// Correlated-topic count per vision element, including zero-count elements
/// so coverage gaps stay visible.
pub fn metric_per_element(ann: &AnnotationSet) -> BTreeMap<String, usize> {
    let mut counts: BTreeMap<String, usize> = ann
        .element_ids
        .iter()
        .map(|id| (id.clone(), 0))
        .collect();
    for record in &ann.records {
        *counts.get_mut(&record.vision_element_id).expect("validated id") += 1;
    }
    counts
}

/// Correlated-topic count per technique; both techniques always reported.
pub fn metric_per_technique(ann: &AnnotationSet) -> BTreeMap<Technique, usize> {
    let mut counts = BTreeMap::from([(Technique::Cluster, 0), (Technique::Nmf, 0)]);
    for record in &ann.records {
        *counts.get_mut(&record.technique).expect("both present") += 1;
    }
    counts
}

/// Percentages of weak/medium/strong for one technique, each rounded to
/// 0.1%.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrengthPercentages {
    pub weak: f64,
    pub medium: f64,
    pub strong: f64,
}

/// Strength distribution per technique. A technique with zero records maps
/// to `None` (undefined) rather than a fabricated 0/0/0 row.
pub fn strength_distribution(
    ann: &AnnotationSet,
) -> BTreeMap<Technique, Option<StrengthPercentages>> {
    let mut out = BTreeMap::new();
    for technique in [Technique::Cluster, Technique::Nmf] {
        let of_technique: Vec<&CorrelationRecord> = ann
            .records
            .iter()
            .filter(|r| r.technique == technique)
            .collect();
        let total = of_technique.len();
        if total == 0 {
            out.insert(technique, None);
            continue;
        }
        let count = |s: Strength| of_technique.iter().filter(|r| r.strength == s).count();
        let pct = |c: usize| round_tenth(c as f64 * 100.0 / total as f64);
        out.insert(
            technique,
            Some(StrengthPercentages {
                weak: pct(count(Strength::Weak)),
                medium: pct(count(Strength::Medium)),
                strong: pct(count(Strength::Strong)),
            }),
        );
    }
    out
}

fn round_tenth(x: f64) -> f64 {
    (x * 10.0).round() / 10.0
}

/// The three evaluation metrics over one annotation set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub total: usize,
    pub per_element_counts: BTreeMap<String, usize>,
    pub per_technique_counts: BTreeMap<String, usize>,
    pub strength_distribution: BTreeMap<String, Option<StrengthPercentages>>,
}

/// Computes all three metrics at once.
pub fn compute_metrics(ann: &AnnotationSet) -> MetricsReport {
    MetricsReport {
        total: ann.len(),
        per_element_counts: metric_per_element(ann),
        per_technique_counts: metric_per_technique(ann)
            .into_iter()
            .map(|(t, c)| (t.to_string(), c))
            .collect(),
        strength_distribution: strength_distribution(ann)
            .into_iter()
            .map(|(t, d)| (t.to_string(), d))
            .collect(),
    }
}

/// Output format for [`render_report`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Markdown,
}

/// Renders the metrics deterministically as JSON or markdown.
pub fn render_report(metrics: &MetricsReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => {
            let mut s = serde_json::to_string_pretty(metrics).expect("serializable metrics");
            s.push('\n');
            s
        }
        ReportFormat::Markdown => render_markdown(metrics),
    }
}

fn render_markdown(metrics: &MetricsReport) -> String {
    let mut out = String::new();
    out.push_str("# Topic Correlation Metrics\n\n");
    out.push_str(&format!("total: {}\n\n", metrics.total));

    out.push_str("## Correlated Topics per Vision Element\n\n");
    out.push_str("| vision element | correlated topics |\n|---|---|\n");
    for (element, count) in &metrics.per_element_counts {
        out.push_str(&format!("| {element} | {count} |\n"));
    }
    out.push('\n');

    out.push_str("## Correlated Topics per Technique\n\n");
    out.push_str("| technique | correlated topics |\n|---|---|\n");
    for (technique, count) in &metrics.per_technique_counts {
        out.push_str(&format!("| {technique} | {count} |\n"));
    }
    out.push('\n');

    out.push_str("## Correlation Strength Distribution (%)\n\n");
    out.push_str("| technique | weak | medium | strong |\n|---|---|---|---|\n");
    for (technique, dist) in &metrics.strength_distribution {
        match dist {
            Some(d) => out.push_str(&format!(
                "| {technique} | {:.1} | {:.1} | {:.1} |\n",
                d.weak, d.medium, d.strong
            )),
            None => out.push_str(&format!("| {technique} | undefined | undefined | undefined |\n")),
        }
    }
    out
}

/// A ranked candidate pairing of a topic with a vision element.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignmentSuggestion {
    pub vision_element_id: String,
    pub technique: Technique,
    pub topic_id: i64,
    pub score: f64,
}

/// Ranks topics against each vision element by cosine similarity between
/// the topic's term-weight vector and the element text's smoothed TF-IDF
/// vector over the topic set's vocabulary.
///
/// Returns the `top_n` best candidates per element, descending (ties by
/// topic id). Scores lie in `[0, 1]`. Outlier topics are skipped.
pub fn suggest_alignments(
    topics: &TopicSet,
    elements: &[VisionElement],
    top_n: usize,
) -> Vec<AlignmentSuggestion> {
    let vocab = Vocabulary {
        terms: topics.vocabulary.clone(),
        doc_freq: element_doc_freq(&topics.vocabulary, elements),
        n_docs: elements.len(),
    };
    let texts: Vec<&str> = elements.iter().map(|e| e.text.as_str()).collect();
    let counts = count_matrix(&texts, &vocab);
    let tfidf = crate::vectorize::tfidf_transform(&counts, IdfMode::Smooth)
        .expect("counts matrix by construction");

    let mut out = Vec::new();
    for (j, element) in elements.iter().enumerate() {
        let mut vector = vec![0.0; vocab.len()];
        for &(t, v) in tfidf.column(j) {
            vector[t] = v;
        }
        let mut scored: Vec<AlignmentSuggestion> = topics
            .non_outlier_topics()
            .iter()
            .map(|topic| AlignmentSuggestion {
                vision_element_id: element.id.clone(),
                technique: topics.technique,
                topic_id: topic.id,
                score: cosine_similarity(&topic.weights, &vector).clamp(0.0, 1.0),
            })
            .collect();
        scored.sort_by(|a, b| {
            b.score
                .partial_cmp(&a.score)
                .expect("finite scores")
                .then_with(|| a.topic_id.cmp(&b.topic_id))
        });
        out.extend(scored.into_iter().take(top_n));
    }
    out
}

fn element_doc_freq(terms: &[String], elements: &[VisionElement]) -> Vec<usize> {
    let mut df = vec![0usize; terms.len()];
    for element in elements {
        let tokens: HashSet<String> = tokenize(&element.text).into_iter().collect();
        for (i, term) in terms.iter().enumerate() {
            if tokens.contains(term) {
                df[i] += 1;
            }
        }
    }
    df
}
