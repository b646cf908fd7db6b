//! Corpus ingestion and the document-level filters applied before any
//! vectorization: exclusion terms, negation/conjunction cues, and the
//! severity (supportive-content) filter.

use std::collections::BTreeSet;
use std::io::BufRead;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lexicon::{self, Lexicon, SEVERITY_CATEGORIES};
use crate::text::{self, PhraseSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Social,
    Clinical,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub author: String,
    pub community: String,
    pub source: Source,
    pub timestamp: i64,
    pub text: String,
}

/// Immutable after ingestion; documents sorted by id, ids unique.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Corpus {
    pub name: String,
    pub documents: Vec<Document>,
}

impl Corpus {
    pub fn new(name: impl Into<String>, mut documents: Vec<Document>) -> Self {
        documents.sort_by(|a, b| a.id.cmp(&b.id));
        Corpus {
            name: name.into(),
            documents,
        }
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RejectedRecord {
    pub line: usize,
    pub reason: String,
    pub raw: String,
}

/// kept + all dropped counts always equals the input count.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterReport {
    pub kept: usize,
    pub dropped_exclusion: usize,
    pub dropped_negation: usize,
    pub dropped_supportive: usize,
    pub dropped_empty: usize,
}

impl FilterReport {
    pub fn dropped_total(&self) -> usize {
        self.dropped_exclusion + self.dropped_negation + self.dropped_supportive + self.dropped_empty
    }

    pub fn merge(&mut self, other: &FilterReport) {
        self.kept = other.kept;
        self.dropped_exclusion += other.dropped_exclusion;
        self.dropped_negation += other.dropped_negation;
        self.dropped_supportive += other.dropped_supportive;
        self.dropped_empty += other.dropped_empty;
    }
}

#[derive(Debug, Deserialize)]
struct RawRecord {
    id: Option<String>,
    author: Option<String>,
    community: Option<String>,
    source: Option<Source>,
    timestamp: Option<i64>,
    text: Option<String>,
}

/// Ingest a line-delimited JSON corpus. Invalid records are collected into
/// the rejects report, never silently dropped.
pub fn ingest(path: impl AsRef<Path>, source: Source) -> Result<(Corpus, Vec<RejectedRecord>)> {
    let path = path.as_ref();
    let display = path.display().to_string();
    let file = std::fs::File::open(path).map_err(|e| Error::io(&display, e))?;
    let reader = std::io::BufReader::new(file);
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "corpus".to_string());

    let mut docs: Vec<Document> = Vec::new();
    let mut seen_ids: BTreeSet<String> = BTreeSet::new();
    let mut rejects: Vec<RejectedRecord> = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(&display, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let reject = |reason: String| RejectedRecord {
            line: lineno + 1,
            reason,
            raw: line.clone(),
        };
        let raw: RawRecord = match serde_json::from_str(&line) {
            Ok(r) => r,
            Err(e) => {
                rejects.push(reject(format!("invalid JSON: {e}")));
                continue;
            }
        };
        let (id, text) = match (raw.id, raw.text) {
            (Some(id), Some(text)) => (id, text),
            (None, _) => {
                rejects.push(reject("missing id".into()));
                continue;
            }
            (_, None) => {
                rejects.push(reject("missing text".into()));
                continue;
            }
        };
        if text.trim().is_empty() {
            rejects.push(reject("empty text".into()));
            continue;
        }
        if raw.source.is_some() && raw.source != Some(source) {
            rejects.push(reject("source mismatch".into()));
            continue;
        }
        if !seen_ids.insert(id.clone()) {
            rejects.push(reject(format!("duplicate id {id}")));
            continue;
        }
        docs.push(Document {
            id,
            author: raw.author.unwrap_or_default(),
            community: raw.community.unwrap_or_default(),
            source,
            timestamp: raw.timestamp.unwrap_or(0),
            text,
        });
    }
    Ok((Corpus::new(name, docs), rejects))
}

fn lexicon_phrases(lex: &Lexicon) -> PhraseSet<()> {
    let mut set = PhraseSet::new();
    for (_cat, term, _w) in lex.all_terms() {
        set.insert(term, ());
    }
    set
}

fn split_by<F: Fn(&Document) -> bool>(corpus: &Corpus, drop: F) -> (Vec<Document>, usize) {
    let mut kept = Vec::with_capacity(corpus.len());
    let mut dropped = 0;
    for doc in &corpus.documents {
        if drop(doc) {
            dropped += 1;
        } else {
            kept.push(doc.clone());
        }
    }
    (kept, dropped)
}

/// Drop documents containing any exclusion term at a token boundary.
pub fn apply_exclusion_filter(corpus: &Corpus, exclusions: &Lexicon) -> (Corpus, FilterReport) {
    let set = lexicon_phrases(exclusions);
    let (kept, dropped) = split_by(corpus, |doc| set.matches_any(&text::tokenize(&doc.text)));
    let report = FilterReport {
        kept: kept.len(),
        dropped_exclusion: dropped,
        ..FilterReport::default()
    };
    (Corpus::new(corpus.name.clone(), kept), report)
}

/// Drop documents containing any negation or conjunction cue; removal, not
/// scope resolution.
pub fn apply_negation_conjunction_filter(
    corpus: &Corpus,
    cue_list: &Lexicon,
) -> (Corpus, FilterReport) {
    let set = lexicon_phrases(cue_list);
    let (kept, dropped) = split_by(corpus, |doc| set.matches_any(&text::tokenize(&doc.text)));
    let report = FilterReport {
        kept: kept.len(),
        dropped_negation: dropped,
        ..FilterReport::default()
    };
    (Corpus::new(corpus.name.clone(), kept), report)
}

/// Keep documents with at least one non-Supportive severity match. Documents
/// matching only Supportive terms and documents matching no severity term at
/// all are dropped.
pub fn apply_severity_filter(
    corpus: &Corpus,
    severity_lex: &Lexicon,
) -> Result<(Corpus, FilterReport)> {
    for cat in SEVERITY_CATEGORIES {
        if !severity_lex
            .categories
            .keys()
            .any(|c| c.eq_ignore_ascii_case(cat))
        {
            return Err(Error::Config(format!(
                "severity lexicon is missing category '{cat}'"
            )));
        }
    }
    let mut kept = Vec::new();
    let mut report = FilterReport::default();
    for doc in &corpus.documents {
        let hits = lexicon::match_terms(&doc.text, severity_lex);
        if hits.is_empty() {
            report.dropped_empty += 1;
        } else if hits.keys().all(|c| c.eq_ignore_ascii_case("supportive")) {
            report.dropped_supportive += 1;
        } else {
            kept.push(doc.clone());
        }
    }
    report.kept = kept.len();
    Ok((Corpus::new(corpus.name.clone(), kept), report))
}

/// Default negation and conjunction cue list; overridable via config.
pub const DEFAULT_CUES: [&str; 31] = [
    "not", "never", "no longer", "neither", "nor", "cannot", "can't", "don't", "doesn't",
    "didn't", "won't", "wouldn't", "couldn't", "shouldn't", "isn't", "aren't", "wasn't",
    "weren't", "without", "nothing", "nobody", "none", "but", "although", "though", "however",
    "yet", "whereas", "unless", "except", "despite",
];

pub fn default_cue_lexicon() -> Lexicon {
    Lexicon::from_categories("cues", vec![("cues", DEFAULT_CUES.to_vec())])
}
