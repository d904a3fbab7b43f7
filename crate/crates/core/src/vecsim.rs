//! Similarity scores from pairs of sentence embeddings.
//!
//! Every scorer returns a value in `[0, 1]` where higher means more similar.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::Method;

#[derive(Debug, Error, PartialEq)]
pub enum VecSimError {
    #[error("embedding {id:?} is empty")]
    Empty { id: String },
    #[error("embedding {id:?} has a non-finite component at index {index}")]
    NonFinite { id: String, index: usize },
    #[error("dimension mismatch: {left_id:?} has {left} components, {right_id:?} has {right}")]
    DimensionMismatch {
        left_id: String,
        left: usize,
        right_id: String,
        right: usize,
    },
    #[error("embedding {id:?} has zero norm")]
    ZeroNorm { id: String },
}

/// A finite, non-empty embedding keyed by the id of the text it encodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingVector {
    id: String,
    values: Vec<f64>,
}

impl EmbeddingVector {
    pub fn new(id: impl Into<String>, values: Vec<f64>) -> Result<Self, VecSimError> {
        let id = id.into();
        if values.is_empty() {
            return Err(VecSimError::Empty { id });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(VecSimError::NonFinite { id, index });
        }
        Ok(Self { id, values })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// A similarity in `[0, 1]` tagged with the method that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimilarityScore {
    pub value: f64,
    pub scorer: Method,
}

fn checked_norms(u: &EmbeddingVector, v: &EmbeddingVector) -> Result<(f64, f64), VecSimError> {
    if u.dim() != v.dim() {
        return Err(VecSimError::DimensionMismatch {
            left_id: u.id.clone(),
            left: u.dim(),
            right_id: v.id.clone(),
            right: v.dim(),
        });
    }
    let (nu, nv) = (u.norm(), v.norm());
    for (n, e) in [(nu, u), (nv, v)] {
        if n == 0.0 {
            return Err(VecSimError::ZeroNorm { id: e.id.clone() });
        }
    }
    Ok((nu, nv))
}

/// `dot(u, v) / (|u| |v|)`, clamped to `[-1, 1]`.
pub fn cosine_similarity(u: &EmbeddingVector, v: &EmbeddingVector) -> Result<f64, VecSimError> {
    let (nu, nv) = checked_norms(u, v)?;
    let dot: f64 = u.values.iter().zip(&v.values).map(|(a, b)| a * b).sum();
    Ok((dot / (nu * nv)).clamp(-1.0, 1.0))
}

/// Angle between `u` and `v` in `[0, pi]`.
///
/// Computed as `2 atan2(|u' - v'|, |u' + v'|)` on the unit vectors, which equals
/// `acos(cosine)` but keeps full precision near 0 and pi where `acos` loses it.
pub fn angle(u: &EmbeddingVector, v: &EmbeddingVector) -> Result<f64, VecSimError> {
    let (nu, nv) = checked_norms(u, v)?;
    let (mut diff, mut sum) = (0.0, 0.0);
    for (a, b) in u.values.iter().zip(&v.values) {
        let (a, b) = (a / nu, b / nv);
        diff += (a - b) * (a - b);
        sum += (a + b) * (a + b);
    }
    Ok((2.0 * diff.sqrt().atan2(sum.sqrt())).clamp(0.0, std::f64::consts::PI))
}

/// `1 - angle / pi`.
pub fn angular_similarity(
    u: &EmbeddingVector,
    v: &EmbeddingVector,
) -> Result<SimilarityScore, VecSimError> {
    let theta = angle(u, v)?;
    Ok(SimilarityScore {
        value: (1.0 - theta / std::f64::consts::PI).clamp(0.0, 1.0),
        scorer: Method::EmbeddingAngular,
    })
}

/// `(cosine + 1) / 2`.
pub fn cosine_similarity_score(
    u: &EmbeddingVector,
    v: &EmbeddingVector,
) -> Result<SimilarityScore, VecSimError> {
    let cos = cosine_similarity(u, v)?;
    Ok(SimilarityScore {
        value: (cos + 1.0) / 2.0,
        scorer: Method::EmbeddingCosine,
    })
}
