//! Python bindings for the simeval scorers and evaluation metrics.
use std::path::PathBuf;

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

use ::simeval::eval::{self, ScoredLabel};
use ::simeval::normalize::{LemmaTable, Lemmatizer, NormalizationConfig};
use ::simeval::{gestalt, ingest, vecsim, EmbeddingVector};

fn value_error(e: impl ToString) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn scored(scores: Vec<f64>, labels: Vec<bool>) -> PyResult<Vec<ScoredLabel>> {
    if scores.len() != labels.len() {
        return Err(value_error(format!(
            "{} scores but {} labels",
            scores.len(),
            labels.len()
        )));
    }
    Ok(scores
        .into_iter()
        .zip(labels)
        .enumerate()
        .map(|(i, (s, l))| ScoredLabel::new(i.to_string(), s, l))
        .collect())
}

fn vector(id: &str, values: Vec<f64>) -> PyResult<EmbeddingVector> {
    EmbeddingVector::new(id, values).map_err(value_error)
}

/// Gestalt score of two strings on the 0..100 scale.
#[pyfunction]
fn gestalt_ratio(a: &str, b: &str) -> f64 {
    gestalt::gestalt_ratio(a, b).value()
}

#[pyfunction]
fn matching_characters(a: &str, b: &str) -> usize {
    gestalt::matching_characters(a, b)
}

/// Longest common block as `(start_a, start_b, length)`.
#[pyfunction]
fn longest_match(a: &str, b: &str) -> (usize, usize, usize) {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let m = gestalt::longest_match(&a, &b, 0..a.len(), 0..b.len());
    (m.start_a, m.start_b, m.length)
}

/// Token-sorted canonical text. `lemmatizer` is "identity" or "rules";
/// passing `lemma_table` selects the table lemmatizer.
#[pyfunction]
#[pyo3(signature = (text, lowercase = true, lemmatizer = "rules", lemma_table = None))]
fn token_sort_normalize(
    text: &str,
    lowercase: bool,
    lemmatizer: &str,
    lemma_table: Option<PathBuf>,
) -> PyResult<String> {
    let lemmatizer = match (lemma_table, lemmatizer) {
        (Some(path), _) => Lemmatizer::Table(LemmaTable::load(&path).map_err(value_error)?.into()),
        (None, "identity") => Lemmatizer::Identity,
        (None, "rules") => Lemmatizer::Rules,
        (None, other) => return Err(value_error(format!("unknown lemmatizer {other:?}"))),
    };
    let config = NormalizationConfig {
        lowercase,
        lemmatizer,
        ..NormalizationConfig::default()
    };
    Ok(::simeval::token_sort_normalize(text, &config).text)
}

#[pyfunction]
fn cosine_similarity(u: Vec<f64>, v: Vec<f64>) -> PyResult<f64> {
    vecsim::cosine_similarity(&vector("u", u)?, &vector("v", v)?).map_err(value_error)
}

#[pyfunction]
fn angular_similarity(u: Vec<f64>, v: Vec<f64>) -> PyResult<f64> {
    Ok(vecsim::angular_similarity(&vector("u", u)?, &vector("v", v)?)
        .map_err(value_error)?
        .value)
}

#[pyfunction]
fn cosine_similarity_score(u: Vec<f64>, v: Vec<f64>) -> PyResult<f64> {
    Ok(vecsim::cosine_similarity_score(&vector("u", u)?, &vector("v", v)?)
        .map_err(value_error)?
        .value)
}

/// ROC points as `(threshold, tpr, fpr)` tuples, starting at `(inf, 0, 0)`.
#[pyfunction]
fn roc_curve(scores: Vec<f64>, labels: Vec<bool>) -> PyResult<Vec<(f64, f64, f64)>> {
    let curve = eval::roc_curve(&scored(scores, labels)?).map_err(value_error)?;
    Ok(curve.points.iter().map(|p| (p.threshold, p.tpr, p.fpr)).collect())
}

#[pyfunction]
fn auc(scores: Vec<f64>, labels: Vec<bool>) -> PyResult<f64> {
    let curve = eval::roc_curve(&scored(scores, labels)?).map_err(value_error)?;
    Ok(eval::auc(&curve))
}

/// `(threshold, J)` maximizing Youden's index.
#[pyfunction]
fn youden_threshold(scores: Vec<f64>, labels: Vec<bool>) -> PyResult<(f64, f64)> {
    let curve = eval::roc_curve(&scored(scores, labels)?).map_err(value_error)?;
    let y = eval::youden_threshold(&curve);
    Ok((y.threshold, y.j))
}

#[pyclass(name = "MetricsReport", frozen, get_all)]
struct PyMetricsReport {
    threshold: f64,
    accuracy: f64,
    sensitivity: f64,
    specificity: f64,
    auc: f64,
    precision: f64,
    f_score: f64,
    tp: usize,
    fp: usize,
    tn: usize,
    #[pyo3(name = "fn")]
    fn_: usize,
    precision_undefined: bool,
}

#[pymethods]
impl PyMetricsReport {
    fn __repr__(&self) -> String {
        format!(
            "MetricsReport(threshold={}, accuracy={:.4}, sensitivity={:.4}, specificity={:.4}, auc={:.4}, precision={:.4}, f_score={:.4})",
            self.threshold, self.accuracy, self.sensitivity, self.specificity, self.auc, self.precision, self.f_score
        )
    }
}

#[pyfunction]
fn metrics_at(scores: Vec<f64>, labels: Vec<bool>, threshold: f64) -> PyResult<PyMetricsReport> {
    let r = eval::metrics_at(&scored(scores, labels)?, threshold).map_err(value_error)?;
    Ok(PyMetricsReport {
        threshold: r.threshold,
        accuracy: r.accuracy,
        sensitivity: r.sensitivity,
        specificity: r.specificity,
        auc: r.auc,
        precision: r.precision,
        f_score: r.f_score,
        tp: r.tp,
        fp: r.fp,
        tn: r.tn,
        fn_: r.fn_,
        precision_undefined: r.precision_undefined,
    })
}

/// Embedding file as a list of `(id, values)` sorted by id.
#[pyfunction]
fn load_embeddings(path: PathBuf) -> PyResult<Vec<(String, Vec<f64>)>> {
    let map = ingest::load_embeddings(&path).map_err(|e| PyIOError::new_err(e.to_string()))?;
    Ok(map
        .into_iter()
        .map(|(id, v)| (id, v.values().to_vec()))
        .collect())
}

/// Score file as a list of `(pair_id, score)`.
#[pyfunction]
fn load_scores(path: PathBuf) -> PyResult<Vec<(String, f64)>> {
    let recs = ingest::load_scores(&path).map_err(|e| PyIOError::new_err(e.to_string()))?;
    Ok(recs.into_iter().map(|r| (r.pair_id, r.score)).collect())
}

#[pymodule(name = "simeval")]
fn simeval_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyMetricsReport>()?;
    m.add_function(wrap_pyfunction!(gestalt_ratio, m)?)?;
    m.add_function(wrap_pyfunction!(matching_characters, m)?)?;
    m.add_function(wrap_pyfunction!(longest_match, m)?)?;
    m.add_function(wrap_pyfunction!(token_sort_normalize, m)?)?;
    m.add_function(wrap_pyfunction!(cosine_similarity, m)?)?;
    m.add_function(wrap_pyfunction!(angular_similarity, m)?)?;
    m.add_function(wrap_pyfunction!(cosine_similarity_score, m)?)?;
    m.add_function(wrap_pyfunction!(roc_curve, m)?)?;
    m.add_function(wrap_pyfunction!(auc, m)?)?;
    m.add_function(wrap_pyfunction!(youden_threshold, m)?)?;
    m.add_function(wrap_pyfunction!(metrics_at, m)?)?;
    m.add_function(wrap_pyfunction!(load_embeddings, m)?)?;
    m.add_function(wrap_pyfunction!(load_scores, m)?)?;
    Ok(())
}
