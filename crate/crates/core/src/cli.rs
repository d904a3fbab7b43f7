//! Run configuration and the `score`, `eval` and `errors` commands.
//!
//! Every command writes into `RunConfig::out`:
//!
//! | command  | files                                                       |
//! |----------|-------------------------------------------------------------|
//! | `score`  | `scores.tsv`                                                |
//! | `eval`   | `metrics.txt`, `metrics.csv`, `roc.csv`, `manifest.json`    |
//! | `errors` | `errors.txt`                                                |

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::eval::{self, EvalError, MetricsReport, RocCurve, ScoredLabel, YoudenChoice};
use crate::gestalt::gestalt_ratio;
use crate::ingest::{
    self, compare_pair_ids, DatasetSummary, IngestError, LabeledPair, PairFormat, ScoreRecord,
};
use crate::normalize::{
    token_sort_normalize, LemmaTable, Lemmatizer, NormalizationConfig, NormalizeError, TokenPattern,
};
use crate::vecsim::{self, EmbeddingVector, VecSimError};
use crate::Method;

pub const SCORES_FILE: &str = "scores.tsv";
pub const METRICS_TXT: &str = "metrics.txt";
pub const METRICS_CSV: &str = "metrics.csv";
pub const ROC_FILE: &str = "roc.csv";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const ERRORS_FILE: &str = "errors.txt";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Normalize(#[from] NormalizeError),
    #[error("pair {pair_id:?}: {source}")]
    VecSim {
        pair_id: String,
        #[source]
        source: VecSimError,
    },
    #[error("no embedding for text id {id:?} (pair {pair_id:?})")]
    MissingEmbedding { id: String, pair_id: String },
    #[error("score file has pair {0:?}, which is not in the dataset")]
    UnknownScoredPair(String),
    #[error("score file has no score for pair {0:?}")]
    MissingScore(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    /// 2 when the evaluation itself is undefined, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Eval(EvalError::SingleClass { .. }) => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LemmatizerKind {
    Identity,
    #[default]
    Rules,
    Table,
}

impl FromStr for LemmatizerKind {
    type Err = NormalizeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "identity" => Ok(Self::Identity),
            "rules" => Ok(Self::Rules),
            "table" => Ok(Self::Table),
            other => Err(NormalizeError::UnknownLemmatizer(other.to_string())),
        }
    }
}

/// Normalization knobs as recorded in a manifest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalizationSettings {
    pub lowercase: bool,
    pub lemmatizer: LemmatizerKind,
    pub lemma_table: Option<PathBuf>,
    pub token_pattern: TokenPattern,
}

impl Default for NormalizationSettings {
    fn default() -> Self {
        Self {
            lowercase: true,
            lemmatizer: LemmatizerKind::Rules,
            lemma_table: None,
            token_pattern: TokenPattern::Words,
        }
    }
}

impl NormalizationSettings {
    pub fn build(&self) -> Result<NormalizationConfig, CliError> {
        let lemmatizer = match (self.lemmatizer, &self.lemma_table) {
            (LemmatizerKind::Identity, _) => Lemmatizer::Identity,
            (LemmatizerKind::Rules, _) => Lemmatizer::Rules,
            (LemmatizerKind::Table, Some(path)) => Lemmatizer::Table(Arc::new(LemmaTable::load(path)?)),
            (LemmatizerKind::Table, None) => {
                return Err(CliError::Config("table lemmatizer needs --lemma-table".into()))
            }
        };
        Ok(NormalizationConfig {
            lowercase: self.lowercase,
            lemmatizer,
            token_pattern: self.token_pattern,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThresholdMode {
    Youden,
    Fixed(f64),
}

impl FromStr for ThresholdMode {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "youden" {
            return Ok(ThresholdMode::Youden);
        }
        s.parse::<f64>()
            .map(ThresholdMode::Fixed)
            .map_err(|_| CliError::Config(format!("threshold must be \"youden\" or a number, got {s:?}")))
    }
}

/// Everything that determines the output of a run. `threads` is not
/// serialized because results do not depend on it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub dataset: PathBuf,
    pub format: PairFormat,
    pub method: Method,
    pub embeddings: Option<PathBuf>,
    pub scores: Option<PathBuf>,
    pub normalization: NormalizationSettings,
    pub threshold: ThresholdMode,
    /// Fraction of pairs used to pick the threshold; the rest is evaluated.
    pub split: Option<f64>,
    pub seed: u64,
    pub out: PathBuf,
    #[serde(skip)]
    pub threads: Option<usize>,
}

impl RunConfig {
    pub fn new(dataset: impl Into<PathBuf>, format: PairFormat, method: Method, out: impl Into<PathBuf>) -> Self {
        Self {
            dataset: dataset.into(),
            format,
            method,
            embeddings: None,
            scores: None,
            normalization: NormalizationSettings::default(),
            threshold: ThresholdMode::Youden,
            split: None,
            seed: 0,
            out: out.into(),
            threads: None,
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        match self.method {
            Method::EmbeddingAngular | Method::EmbeddingCosine if self.embeddings.is_none() => {
                return Err(CliError::Config(format!("method {} needs --embeddings", self.method)))
            }
            Method::ExternalScores if self.scores.is_none() => {
                return Err(CliError::Config("method external-scores needs --scores".into()))
            }
            _ => {}
        }
        if let ThresholdMode::Fixed(t) = self.threshold {
            if !(0.0..=1.0).contains(&t) {
                return Err(CliError::Config(format!("fixed threshold {t} is outside [0, 1]")));
            }
        }
        if let Some(f) = self.split {
            if !(f > 0.0 && f < 1.0) {
                return Err(CliError::Config(format!("split fraction {f} must lie strictly between 0 and 1")));
            }
        }
        if self.normalization.lemmatizer == LemmatizerKind::Table && self.normalization.lemma_table.is_none() {
            return Err(CliError::Config("table lemmatizer needs --lemma-table".into()));
        }
        Ok(())
    }

    fn pool(&self) -> Result<rayon::ThreadPool, CliError> {
        let n = self
            .threads
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| CliError::Config(format!("cannot start {n} worker threads: {e}")))
    }
}

fn ensure_out_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|source| CliError::Write {
        path: dir.to_path_buf(),
        source,
    })
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|source| CliError::Write {
        path: path.to_path_buf(),
        source,
    })
}

fn embedding<'m>(
    map: &'m BTreeMap<String, EmbeddingVector>,
    id: &str,
    pair_id: &str,
) -> Result<&'m EmbeddingVector, CliError> {
    map.get(id).ok_or_else(|| CliError::MissingEmbedding {
        id: id.to_string(),
        pair_id: pair_id.to_string(),
    })
}

/// Scores every pair with the configured method, in dataset order.
pub fn score_pairs(config: &RunConfig, pairs: &[LabeledPair]) -> Result<Vec<ScoreRecord>, CliError> {
    config.validate()?;
    let record = |pair: &LabeledPair, score: f64| ScoreRecord {
        pair_id: pair.pair_id.clone(),
        score,
    };
    match config.method {
        Method::StringMatch => {
            let norm = config.normalization.build()?;
            let pool = config.pool()?;
            Ok(pool.install(|| {
                pairs
                    .par_iter()
                    .map(|p| {
                        let a = token_sort_normalize(&p.text_a, &norm);
                        let b = token_sort_normalize(&p.text_b, &norm);
                        record(p, gestalt_ratio(&a.text, &b.text).unit())
                    })
                    .collect()
            }))
        }
        Method::EmbeddingAngular | Method::EmbeddingCosine => {
            let path = config.embeddings.as_deref().expect("validated");
            let vectors = ingest::load_embeddings(path)?;
            let scorer = match config.method {
                Method::EmbeddingAngular => vecsim::angular_similarity,
                _ => vecsim::cosine_similarity_score,
            };
            let pool = config.pool()?;
            pool.install(|| {
                pairs
                    .par_iter()
                    .map(|p| {
                        let u = embedding(&vectors, &p.id_a, &p.pair_id)?;
                        let v = embedding(&vectors, &p.id_b, &p.pair_id)?;
                        let s = scorer(u, v).map_err(|source| CliError::VecSim {
                            pair_id: p.pair_id.clone(),
                            source,
                        })?;
                        Ok(record(p, s.value))
                    })
                    .collect()
            })
        }
        Method::ExternalScores => {
            let path = config.scores.as_deref().expect("validated");
            let mut by_id: HashMap<String, f64> = ingest::load_scores(path)?
                .into_iter()
                .map(|r| (r.pair_id, r.score))
                .collect();
            let out = pairs
                .iter()
                .map(|p| {
                    by_id
                        .remove(&p.pair_id)
                        .map(|s| record(p, s))
                        .ok_or_else(|| CliError::MissingScore(p.pair_id.clone()))
                })
                .collect::<Result<Vec<_>, _>>()?;
            if let Some(extra) = by_id.into_keys().min_by(|a, b| compare_pair_ids(a, b)) {
                return Err(CliError::UnknownScoredPair(extra));
            }
            Ok(out)
        }
    }
}

fn sorted_by_pair_id(mut records: Vec<ScoreRecord>) -> Vec<ScoreRecord> {
    records.sort_by(|a, b| compare_pair_ids(&a.pair_id, &b.pair_id));
    records
}

/// Writes `scores.tsv` (one `pair_id<TAB>score` line per pair, ordered by
/// pair id) and returns its path.
pub fn cmd_score(config: &RunConfig) -> Result<PathBuf, CliError> {
    config.validate()?;
    let (pairs, _) = ingest::load_pairs(&config.dataset, config.format)?;
    let records = sorted_by_pair_id(score_pairs(config, &pairs)?);
    ensure_out_dir(&config.out)?;
    let path = config.out.join(SCORES_FILE);
    ingest::write_scores(&path, &records)?;
    Ok(path)
}

/// Scored data and the threshold chosen for it.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub pairs: Vec<LabeledPair>,
    pub summary: DatasetSummary,
    /// Pairs the metrics are computed on (the held-out part under `split`).
    pub evaluated: Vec<ScoredLabel>,
    pub curve: RocCurve,
    pub youden: Option<YoudenChoice>,
    pub report: MetricsReport,
}

pub fn evaluate(config: &RunConfig) -> Result<Evaluation, CliError> {
    config.validate()?;
    let (pairs, summary) = ingest::load_pairs(&config.dataset, config.format)?;
    let scores = score_pairs(config, &pairs)?;
    let mut data: Vec<ScoredLabel> = pairs
        .iter()
        .zip(&scores)
        .map(|(p, s)| ScoredLabel::new(p.pair_id.clone(), s.score, p.label))
        .collect();
    data.sort_by(|a, b| compare_pair_ids(&a.pair_id, &b.pair_id));

    let (tune, evaluated) = match config.split {
        Some(f) => eval::split_holdout(&data, f, config.seed)?,
        None => (data.clone(), data),
    };
    let (threshold, youden) = match config.threshold {
        ThresholdMode::Fixed(t) => (t, None),
        ThresholdMode::Youden => {
            let choice = eval::youden_threshold(&eval::roc_curve(&tune)?);
            (choice.threshold, Some(choice))
        }
    };
    let curve = eval::roc_curve(&evaluated)?;
    let report = eval::metrics_at(&evaluated, threshold)?;
    Ok(Evaluation {
        pairs,
        summary,
        evaluated,
        curve,
        youden,
        report,
    })
}

/// Persisted record of a run. `config` alone is enough to replay it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub config: RunConfig,
    pub dataset: DatasetSummary,
    pub evaluated_pairs: usize,
    pub threshold: f64,
    pub youden_j: Option<f64>,
    pub metrics: MetricsReport,
}

fn pct(v: f64) -> String {
    format!("{:.1}", v * 100.0)
}

const TABLE_COLUMNS: [&str; 7] = [
    "Method",
    "Accuracy",
    "Sensitivity",
    "Specificity",
    "AUC",
    "Precision",
    "F-score",
];

/// Plain-text metrics table with one-decimal percentages.
pub fn metrics_table(method: Method, r: &MetricsReport) -> String {
    let values = [
        method.name().to_string(),
        pct(r.accuracy),
        pct(r.sensitivity),
        pct(r.specificity),
        pct(r.auc),
        pct(r.precision),
        pct(r.f_score),
    ];
    let widths: Vec<usize> = TABLE_COLUMNS
        .iter()
        .zip(&values)
        .map(|(h, v)| h.len().max(v.len()))
        .collect();
    let mut out = String::new();
    for row in [TABLE_COLUMNS.map(str::to_string).to_vec(), values.to_vec()] {
        let cells: Vec<String> = row
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(i, (c, w))| if i == 0 { format!("{c:<w$}") } else { format!("{c:>w$}") })
            .collect();
        out.push_str(cells.join("  ").trim_end());
        out.push('\n');
    }
    out
}

fn metrics_text(config: &RunConfig, ev: &Evaluation) -> String {
    let r = &ev.report;
    let mut out = String::new();
    let _ = writeln!(out, "dataset: {}", config.dataset.display());
    let _ = writeln!(
        out,
        "pairs: {} ({} positive, {} negative, {} removed)",
        ev.summary.total, ev.summary.positives, ev.summary.negatives, ev.summary.removed
    );
    let _ = writeln!(out, "evaluated: {}", ev.evaluated.len());
    match ev.youden {
        Some(y) => {
            let _ = writeln!(out, "threshold: {} (youden, J = {:.4})", r.threshold, y.j);
        }
        None => {
            let _ = writeln!(out, "threshold: {} (fixed)", r.threshold);
        }
    }
    let _ = writeln!(out, "confusion: tp={} fp={} tn={} fn={}", r.tp, r.fp, r.tn, r.fn_);
    if r.precision_undefined {
        let _ = writeln!(out, "note: no positive predictions, precision reported as 0");
    }
    out.push('\n');
    out.push_str(&metrics_table(config.method, r));
    out
}

fn metrics_csv(method: Method, r: &MetricsReport) -> String {
    format!(
        "method,threshold,accuracy,sensitivity,specificity,auc,precision,f_score,tp,fp,tn,fn,precision_undefined\n\
         {},{},{},{},{},{},{},{},{},{},{},{},{}\n",
        method,
        r.threshold,
        pct(r.accuracy),
        pct(r.sensitivity),
        pct(r.specificity),
        pct(r.auc),
        pct(r.precision),
        pct(r.f_score),
        r.tp,
        r.fp,
        r.tn,
        r.fn_,
        r.precision_undefined
    )
}

/// `fpr,tpr,threshold` rows for external plotting.
pub fn roc_csv(curve: &RocCurve) -> String {
    let mut out = String::from("fpr,tpr,threshold\n");
    for p in &curve.points {
        let _ = writeln!(out, "{},{},{}", p.fpr, p.tpr, p.threshold);
    }
    out
}

#[derive(Debug)]
pub struct EvalOutput {
    pub report: MetricsReport,
    pub manifest: RunManifest,
    pub files: Vec<PathBuf>,
}

pub fn cmd_eval(config: &RunConfig) -> Result<EvalOutput, CliError> {
    let ev = evaluate(config)?;
    ensure_out_dir(&config.out)?;
    let manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: config.clone(),
        dataset: ev.summary,
        evaluated_pairs: ev.evaluated.len(),
        threshold: ev.report.threshold,
        youden_j: ev.youden.map(|y| y.j),
        metrics: ev.report.clone(),
    };
    let files = vec![
        config.out.join(METRICS_TXT),
        config.out.join(METRICS_CSV),
        config.out.join(ROC_FILE),
        config.out.join(MANIFEST_FILE),
    ];
    write_text(&files[0], &metrics_text(config, &ev))?;
    write_text(&files[1], &metrics_csv(config.method, &ev.report))?;
    write_text(&files[2], &roc_csv(&ev.curve))?;
    ingest::write_manifest(&files[3], &manifest)?;
    Ok(EvalOutput {
        report: ev.report,
        manifest,
        files,
    })
}

fn one_line(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Writes up to `limit` misclassified pairs as a `Qn1 Qn2 true pred` table.
pub fn cmd_errors(config: &RunConfig, limit: usize) -> Result<PathBuf, CliError> {
    let ev = evaluate(config)?;
    let lookup: HashMap<&str, &LabeledPair> = ev.pairs.iter().map(|p| (p.pair_id.as_str(), p)).collect();
    let mistakes = eval::misclassifications(&ev.evaluated, &lookup, ev.report.threshold)?;
    let mut out = String::from("Qn1\tQn2\ttrue\tpred\n");
    for m in mistakes.iter().take(limit) {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}",
            one_line(&m.text_a),
            one_line(&m.text_b),
            u8::from(m.true_label),
            u8::from(m.predicted_label)
        );
    }
    ensure_out_dir(&config.out)?;
    let path = config.out.join(ERRORS_FILE);
    write_text(&path, &out)?;
    Ok(path)
}

/// Loads the run configuration stored in a manifest.
pub fn replay_config(manifest: &Path) -> Result<RunConfig, CliError> {
    let m: RunManifest = ingest::read_manifest(manifest)?;
    Ok(m.config)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn threshold_mode_parsing() {
        assert_eq!("youden".parse::<ThresholdMode>().unwrap(), ThresholdMode::Youden);
        assert_eq!("0.25".parse::<ThresholdMode>().unwrap(), ThresholdMode::Fixed(0.25));
        assert!("high".parse::<ThresholdMode>().is_err());
    }

    #[test]
    fn validation() {
        let mut c = RunConfig::new("d.tsv", PairFormat::QqpTsv, Method::EmbeddingAngular, "out");
        assert!(c.validate().is_err());
        c.embeddings = Some("e.tsv".into());
        assert!(c.validate().is_ok());
        c.threshold = ThresholdMode::Fixed(1.5);
        assert!(c.validate().is_err());
        c.threshold = ThresholdMode::Fixed(1.0);
        c.split = Some(0.0);
        assert!(c.validate().is_err());
        c.split = Some(0.5);
        assert!(c.validate().is_ok());
        c.method = Method::ExternalScores;
        assert!(c.validate().is_err());
    }

    #[test]
    fn table_layout() {
        let r = MetricsReport::from_counts(0.5, 0.727, 819, 456, 544, 181);
        let t = metrics_table(Method::StringMatch, &r);
        let lines: Vec<&str> = t.lines().collect();
        assert_eq!(lines.len(), 2);
        assert!(lines[0].starts_with("Method"));
        assert!(lines[1].starts_with("string-match"));
        assert!(lines[1].contains("72.7"));
        assert!(lines[1].contains("81.9"));
    }

    #[test]
    fn manifest_round_trips_config() {
        let mut c = RunConfig::new("d.tsv", PairFormat::GenericCsv, Method::StringMatch, "o");
        c.threshold = ThresholdMode::Fixed(0.4);
        c.normalization.lemma_table = Some("l.tsv".into());
        c.threads = Some(3);
        let json = serde_json::to_string(&c).unwrap();
        assert!(!json.contains("threads"));
        let back: RunConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(back, RunConfig { threads: None, ..c });
    }

    #[test]
    fn exit_codes() {
        let single = CliError::Eval(EvalError::SingleClass {
            positives: 3,
            negatives: 0,
        });
        assert_eq!(single.exit_code(), 2);
        assert_eq!(CliError::Config("x".into()).exit_code(), 1);
        assert_eq!(CliError::MissingScore("p".into()).exit_code(), 1);
    }
}
