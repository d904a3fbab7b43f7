//! Loading and writing of pair datasets, embedding files, score files and
//! run manifests.
//!
//! Wire formats:
//!
//! * pairs, `qqp-tsv`: tab-separated with header
//!   `id qid1 qid2 question1 question2 is_duplicate`.
//! * pairs, `generic-csv`: comma-separated with header
//!   `pair_id,text_a,text_b,label`. Text ids are `<pair_id>/a` and
//!   `<pair_id>/b`.
//! * embeddings: `id<TAB>v1,v2,...,vn` per line.
//! * scores: `pair_id<TAB>score` per line.
//!
//! In embedding and score files, blank lines and lines starting with `#` are
//! skipped.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::vecsim::{EmbeddingVector, VecSimError};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("unknown pair format {0:?} (expected qqp-tsv or generic-csv)")]
    UnknownFormat(String),
    #[error("{path}: header mismatch, expected [{expected}] but found [{found}]")]
    HeaderMismatch {
        path: PathBuf,
        expected: String,
        found: String,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("{path}, line {line}: duplicate id {id:?}")]
    DuplicateId {
        path: PathBuf,
        line: u64,
        id: String,
    },
    #[error("{path}, line {line}: {reason}")]
    Malformed {
        path: PathBuf,
        line: u64,
        reason: String,
    },
    #[error("{path}, line {line}: dimension drift, expected {expected} components but found {found}")]
    DimensionDrift {
        path: PathBuf,
        line: u64,
        expected: usize,
        found: usize,
    },
    #[error("{path}, line {line}: non-finite component at index {index}")]
    NonFinite {
        path: PathBuf,
        line: u64,
        index: usize,
    },
    #[error("{path}, line {line}: score {value} outside [0, 1]")]
    ScoreRange {
        path: PathBuf,
        line: u64,
        value: f64,
    },
    #[error("{path}: invalid manifest: {source}")]
    Manifest {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairFormat {
    QqpTsv,
    GenericCsv,
}

impl PairFormat {
    pub fn name(self) -> &'static str {
        match self {
            PairFormat::QqpTsv => "qqp-tsv",
            PairFormat::GenericCsv => "generic-csv",
        }
    }

    fn delimiter(self) -> u8 {
        match self {
            PairFormat::QqpTsv => b'\t',
            PairFormat::GenericCsv => b',',
        }
    }

    fn header(self) -> &'static [&'static str] {
        match self {
            PairFormat::QqpTsv => &["id", "qid1", "qid2", "question1", "question2", "is_duplicate"],
            PairFormat::GenericCsv => &["pair_id", "text_a", "text_b", "label"],
        }
    }
}

impl fmt::Display for PairFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PairFormat {
    type Err = IngestError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "qqp-tsv" => Ok(PairFormat::QqpTsv),
            "generic-csv" => Ok(PairFormat::GenericCsv),
            other => Err(IngestError::UnknownFormat(other.to_string())),
        }
    }
}

/// A text pair with its ground-truth equivalence label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledPair {
    pub pair_id: String,
    /// Embedding key of `text_a`.
    pub id_a: String,
    /// Embedding key of `text_b`.
    pub id_b: String,
    pub text_a: String,
    pub text_b: String,
    /// `true` when the two texts are semantically equivalent.
    pub label: bool,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub total: usize,
    pub positives: usize,
    pub negatives: usize,
    /// Rows dropped by cleaning: empty text, malformed label, wrong field count
    /// or invalid UTF-8.
    pub removed: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRecord {
    pub pair_id: String,
    pub score: f64,
}

/// Orders pair ids numerically when both are unsigned integers and
/// lexicographically otherwise; numeric ids sort first.
pub fn compare_pair_ids(a: &str, b: &str) -> Ordering {
    match (a.parse::<u64>(), b.parse::<u64>()) {
        (Ok(x), Ok(y)) => x.cmp(&y).then_with(|| a.cmp(b)),
        (Ok(_), Err(_)) => Ordering::Less,
        (Err(_), Ok(_)) => Ordering::Greater,
        (Err(_), Err(_)) => a.cmp(b),
    }
}

fn read_error(path: &Path) -> impl FnOnce(io::Error) -> IngestError + '_ {
    move |source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn parse_label(raw: &str) -> Option<bool> {
    match raw.trim() {
        "0" => Some(false),
        "1" => Some(true),
        _ => None,
    }
}

pub fn load_pairs(
    path: &Path,
    format: PairFormat,
) -> Result<(Vec<LabeledPair>, DatasetSummary), IngestError> {
    let file = fs::File::open(path).map_err(read_error(path))?;
    let csv_error = |source: csv::Error| IngestError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(format.delimiter())
        .has_headers(true)
        .flexible(true)
        .from_reader(io::BufReader::new(file));

    let expected = format.header();
    let header = reader.byte_headers().map_err(csv_error)?.clone();
    let found: Vec<String> = header
        .iter()
        .map(|f| String::from_utf8_lossy(f).trim().trim_start_matches('\u{feff}').to_string())
        .collect();
    if found.iter().map(String::as_str).ne(expected.iter().copied()) {
        return Err(IngestError::HeaderMismatch {
            path: path.to_path_buf(),
            expected: expected.join(", "),
            found: found.join(", "),
        });
    }

    let mut pairs = Vec::new();
    let mut seen = HashSet::new();
    let mut summary = DatasetSummary::default();
    let mut record = csv::ByteRecord::new();
    while reader.read_byte_record(&mut record).map_err(csv_error)? {
        let line = record.position().map_or(0, |p| p.line());
        let fields: Option<Vec<&str>> = if record.len() == expected.len() {
            record.iter().map(|f| std::str::from_utf8(f).ok()).collect()
        } else {
            None
        };
        let Some(fields) = fields else {
            summary.removed += 1;
            continue;
        };
        let pair = match format {
            PairFormat::QqpTsv => LabeledPair {
                pair_id: fields[0].trim().to_string(),
                id_a: fields[1].trim().to_string(),
                id_b: fields[2].trim().to_string(),
                text_a: fields[3].to_string(),
                text_b: fields[4].to_string(),
                label: false,
            },
            PairFormat::GenericCsv => {
                let id = fields[0].trim();
                LabeledPair {
                    pair_id: id.to_string(),
                    id_a: format!("{id}/a"),
                    id_b: format!("{id}/b"),
                    text_a: fields[1].to_string(),
                    text_b: fields[2].to_string(),
                    label: false,
                }
            }
        };
        let label = parse_label(fields[expected.len() - 1]);
        let blank = |s: &str| s.trim().is_empty();
        let (Some(label), false, false, false) = (
            label,
            blank(&pair.text_a),
            blank(&pair.text_b),
            pair.pair_id.is_empty(),
        ) else {
            summary.removed += 1;
            continue;
        };
        if !seen.insert(pair.pair_id.clone()) {
            return Err(IngestError::DuplicateId {
                path: path.to_path_buf(),
                line,
                id: pair.pair_id,
            });
        }
        if label {
            summary.positives += 1;
        } else {
            summary.negatives += 1;
        }
        pairs.push(LabeledPair { label, ..pair });
    }
    summary.total = pairs.len();
    Ok((pairs, summary))
}

/// Data lines of a line-oriented file with their 1-based line numbers.
fn data_lines(text: &str) -> impl Iterator<Item = (u64, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i as u64 + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'))
}

fn split_record<'a>(path: &Path, line: u64, raw: &'a str) -> Result<(&'a str, &'a str), IngestError> {
    match raw.split_once('\t') {
        Some((id, rest)) if !id.is_empty() && !rest.contains('\t') => Ok((id, rest)),
        _ => Err(IngestError::Malformed {
            path: path.to_path_buf(),
            line,
            reason: "expected exactly two tab-separated fields".into(),
        }),
    }
}

pub fn load_embeddings(path: &Path) -> Result<BTreeMap<String, EmbeddingVector>, IngestError> {
    let text = fs::read_to_string(path).map_err(read_error(path))?;
    let mut out = BTreeMap::new();
    let mut dim = None;
    for (line, raw) in data_lines(&text) {
        let (id, body) = split_record(path, line, raw)?;
        let values = body
            .split(',')
            .map(|v| v.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| IngestError::Malformed {
                path: path.to_path_buf(),
                line,
                reason: format!("bad component: {e}"),
            })?;
        let expected = *dim.get_or_insert(values.len());
        if values.len() != expected {
            return Err(IngestError::DimensionDrift {
                path: path.to_path_buf(),
                line,
                expected,
                found: values.len(),
            });
        }
        let vector = EmbeddingVector::new(id, values).map_err(|e| match e {
            VecSimError::NonFinite { index, .. } => IngestError::NonFinite {
                path: path.to_path_buf(),
                line,
                index,
            },
            other => IngestError::Malformed {
                path: path.to_path_buf(),
                line,
                reason: other.to_string(),
            },
        })?;
        if out.insert(id.to_string(), vector).is_some() {
            return Err(IngestError::DuplicateId {
                path: path.to_path_buf(),
                line,
                id: id.to_string(),
            });
        }
    }
    Ok(out)
}

pub fn load_scores(path: &Path) -> Result<Vec<ScoreRecord>, IngestError> {
    let text = fs::read_to_string(path).map_err(read_error(path))?;
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for (line, raw) in data_lines(&text) {
        let (id, body) = split_record(path, line, raw)?;
        let score: f64 = body.trim().parse().map_err(|e| IngestError::Malformed {
            path: path.to_path_buf(),
            line,
            reason: format!("bad score: {e}"),
        })?;
        if !(0.0..=1.0).contains(&score) {
            return Err(IngestError::ScoreRange {
                path: path.to_path_buf(),
                line,
                value: score,
            });
        }
        if !seen.insert(id.to_string()) {
            return Err(IngestError::DuplicateId {
                path: path.to_path_buf(),
                line,
                id: id.to_string(),
            });
        }
        out.push(ScoreRecord {
            pair_id: id.to_string(),
            score,
        });
    }
    Ok(out)
}

fn write_with<F>(path: &Path, body: F) -> Result<(), IngestError>
where
    F: FnOnce(&mut BufWriter<fs::File>) -> io::Result<()>,
{
    let wrap = |source| IngestError::Write {
        path: path.to_path_buf(),
        source,
    };
    let file = fs::File::create(path).map_err(wrap)?;
    let mut w = BufWriter::new(file);
    body(&mut w).and_then(|_| w.flush()).map_err(wrap)
}

/// Writes vectors in the embedding wire format. Floats use the shortest
/// representation that parses back to the same bits.
pub fn write_embeddings<'a, I>(path: &Path, vectors: I) -> Result<(), IngestError>
where
    I: IntoIterator<Item = &'a EmbeddingVector>,
{
    write_with(path, |w| {
        for v in vectors {
            write!(w, "{}\t", v.id())?;
            for (i, x) in v.values().iter().enumerate() {
                if i > 0 {
                    w.write_all(b",")?;
                }
                write!(w, "{x:?}")?;
            }
            w.write_all(b"\n")?;
        }
        Ok(())
    })
}

pub fn write_scores(path: &Path, records: &[ScoreRecord]) -> Result<(), IngestError> {
    write_with(path, |w| {
        for r in records {
            writeln!(w, "{}\t{:?}", r.pair_id, r.score)?;
        }
        Ok(())
    })
}

/// Persists a run manifest as pretty-printed JSON.
pub fn write_manifest<T: Serialize>(path: &Path, manifest: &T) -> Result<(), IngestError> {
    write_with(path, |w| {
        serde_json::to_writer_pretty(&mut *w, manifest).map_err(io::Error::other)?;
        w.write_all(b"\n")
    })
}

pub fn read_manifest<T: DeserializeOwned>(path: &Path) -> Result<T, IngestError> {
    let text = fs::read_to_string(path).map_err(read_error(path))?;
    serde_json::from_str(&text).map_err(|source| IngestError::Manifest {
        path: path.to_path_buf(),
        source,
    })
}
