use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// How a pair of texts is turned into a similarity score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Gestalt matching over token-sorted, lemmatized text.
    StringMatch,
    /// Angular similarity between precomputed embeddings.
    EmbeddingAngular,
    /// Affine-mapped cosine similarity between precomputed embeddings.
    EmbeddingCosine,
    /// Per-pair scores produced elsewhere, e.g. a fine-tuned classifier.
    ExternalScores,
}

impl Method {
    pub const ALL: [Method; 4] = [
        Method::StringMatch,
        Method::EmbeddingAngular,
        Method::EmbeddingCosine,
        Method::ExternalScores,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::StringMatch => "string-match",
            Method::EmbeddingAngular => "embedding-angular",
            Method::EmbeddingCosine => "embedding-cosine",
            Method::ExternalScores => "external-scores",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown method {0:?} (expected string-match, embedding-angular, embedding-cosine or external-scores)")]
pub struct UnknownMethod(pub String);

impl FromStr for Method {
    type Err = UnknownMethod;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| UnknownMethod(s.to_string()))
    }
}
