//! Token-sort normalization applied to text before gestalt matching.
//!
//! Pipeline: optional lowercasing, tokenization, per-token lemmatization,
//! lexicographic sort, rejoin with single spaces.

use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum NormalizeError {
    #[error("cannot read lemma table {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("lemma table {path}, line {line}: {reason}")]
    Malformed {
        path: PathBuf,
        line: usize,
        reason: String,
    },
    #[error("lemma table {path}: mapping cycle through {token:?}")]
    Cycle { path: PathBuf, token: String },
    #[error("unknown lemmatizer {0:?} (expected identity, rules or table)")]
    UnknownLemmatizer(String),
    #[error("unknown token pattern {0:?} (expected words or whitespace)")]
    UnknownTokenPattern(String),
}

/// What counts as a token.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TokenPattern {
    /// Whitespace-separated chunks with leading and trailing punctuation
    /// stripped; inner apostrophes and hyphens stay (`what's` is one token).
    #[default]
    Words,
    /// Whitespace-separated chunks, untouched.
    Whitespace,
}

impl FromStr for TokenPattern {
    type Err = NormalizeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "words" => Ok(Self::Words),
            "whitespace" => Ok(Self::Whitespace),
            other => Err(NormalizeError::UnknownTokenPattern(other.to_string())),
        }
    }
}

/// Token to lemma lookup loaded from a `token<TAB>lemma` file.
///
/// Keys and lemmas are case-folded. Chains (`a -> b`, `b -> c`) are resolved
/// at load time, so every lemma maps to itself.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LemmaTable {
    entries: HashMap<String, String>,
}

impl LemmaTable {
    pub fn load(path: &Path) -> Result<Self, NormalizeError> {
        let text = fs::read_to_string(path).map_err(|source| NormalizeError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text, path)
    }

    /// Parses table text; `origin` is used in error messages only.
    pub fn parse(text: &str, origin: &Path) -> Result<Self, NormalizeError> {
        let malformed = |line: usize, reason: String| NormalizeError::Malformed {
            path: origin.to_path_buf(),
            line,
            reason,
        };
        let mut raw: HashMap<String, String> = HashMap::new();
        for (idx, line) in text.lines().enumerate() {
            let lineno = idx + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let mut parts = line.split('\t');
            let (token, lemma) = match (parts.next(), parts.next(), parts.next()) {
                (Some(t), Some(l), None) => (t.trim(), l.trim()),
                _ => return Err(malformed(lineno, "expected token<TAB>lemma".into())),
            };
            for (what, value) in [("token", token), ("lemma", lemma)] {
                if value.is_empty() {
                    return Err(malformed(lineno, format!("empty {what}")));
                }
                if value.chars().any(char::is_whitespace) {
                    return Err(malformed(lineno, format!("{what} {value:?} contains whitespace")));
                }
                if strip_punctuation(value) != value {
                    return Err(malformed(
                        lineno,
                        format!("{what} {value:?} has leading or trailing punctuation"),
                    ));
                }
            }
            let token = token.to_lowercase();
            let lemma = lemma.to_lowercase();
            if let Some(prev) = raw.get(&token) {
                if *prev != lemma {
                    return Err(malformed(
                        lineno,
                        format!("{token:?} already maps to {prev:?}"),
                    ));
                }
            }
            raw.insert(token, lemma);
        }

        let mut entries = HashMap::with_capacity(raw.len());
        for token in raw.keys() {
            let mut current = token;
            let mut steps = 0;
            while let Some(next) = raw.get(current) {
                if next == current {
                    break;
                }
                current = next;
                steps += 1;
                if steps > raw.len() {
                    return Err(NormalizeError::Cycle {
                        path: origin.to_path_buf(),
                        token: token.clone(),
                    });
                }
            }
            entries.insert(token.clone(), current.clone());
        }
        Ok(Self { entries })
    }

    pub fn get(&self, token: &str) -> Option<&str> {
        self.entries.get(&token.to_lowercase()).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Lemmatization strategy.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum Lemmatizer {
    Identity,
    /// Irregular-form table followed by English suffix rules.
    #[default]
    Rules,
    /// User table; tokens absent from it are kept as they are.
    Table(Arc<LemmaTable>),
}

impl Lemmatizer {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Identity => "identity",
            Self::Rules => "rules",
            Self::Table(_) => "table",
        }
    }
}

impl fmt::Display for Lemmatizer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalizationConfig {
    pub lowercase: bool,
    pub lemmatizer: Lemmatizer,
    pub token_pattern: TokenPattern,
}

impl Default for NormalizationConfig {
    fn default() -> Self {
        Self {
            lowercase: true,
            lemmatizer: Lemmatizer::Rules,
            token_pattern: TokenPattern::Words,
        }
    }
}

impl NormalizationConfig {
    pub fn identity() -> Self {
        Self {
            lemmatizer: Lemmatizer::Identity,
            ..Self::default()
        }
    }

    pub fn with_table(table: LemmaTable) -> Self {
        Self {
            lemmatizer: Lemmatizer::Table(Arc::new(table)),
            ..Self::default()
        }
    }
}

/// Token-sorted text. `text` is `tokens.join(" ")`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CanonicalText {
    pub text: String,
    pub tokens: Vec<String>,
}

fn strip_punctuation(token: &str) -> &str {
    token.trim_matches(|c: char| !c.is_alphanumeric())
}

pub fn tokenize(text: &str, config: &NormalizationConfig) -> Vec<String> {
    text.split_whitespace()
        .map(|chunk| match config.token_pattern {
            TokenPattern::Words => strip_punctuation(chunk),
            TokenPattern::Whitespace => chunk,
        })
        .filter(|t| !t.is_empty())
        .map(str::to_string)
        .collect()
}

// Irregular forms checked before any suffix rule. Every lemma here is a fixed
// point of the rules.
const IRREGULAR: &[(&str, &str)] = &[
    ("am", "be"),
    ("are", "be"),
    ("is", "be"),
    ("was", "be"),
    ("were", "be"),
    ("been", "be"),
    ("being", "be"),
    ("has", "have"),
    ("had", "have"),
    ("having", "have"),
    ("does", "do"),
    ("did", "do"),
    ("done", "do"),
    ("doing", "do"),
    ("goes", "go"),
    ("went", "go"),
    ("gone", "go"),
    ("bought", "buy"),
    ("sold", "sell"),
    ("made", "make"),
    ("got", "get"),
    ("gotten", "get"),
    ("paid", "pay"),
    ("took", "take"),
    ("taken", "take"),
    ("gave", "give"),
    ("given", "give"),
    ("knew", "know"),
    ("known", "know"),
    ("thought", "think"),
    ("found", "find"),
    ("said", "say"),
    ("told", "tell"),
    ("became", "become"),
    ("began", "begin"),
    ("begun", "begin"),
    ("came", "come"),
    ("felt", "feel"),
    ("kept", "keep"),
    ("left", "leave"),
    ("lost", "lose"),
    ("meant", "mean"),
    ("met", "meet"),
    ("ran", "run"),
    ("saw", "see"),
    ("seen", "see"),
    ("sent", "send"),
    ("spent", "spend"),
    ("wrote", "write"),
    ("written", "write"),
    ("children", "child"),
    ("men", "man"),
    ("women", "woman"),
    ("people", "person"),
    ("feet", "foot"),
    ("teeth", "tooth"),
    ("mice", "mouse"),
    ("better", "good"),
    ("best", "good"),
    ("worse", "bad"),
    ("worst", "bad"),
    ("lives", "life"),
    ("wives", "wife"),
    ("knives", "knife"),
];

// Words that look inflected but are already base forms.
const KEEP: &[&str] = &[
    "this", "his", "its", "us", "as", "yes", "was", "has", "thus", "plus", "bus", "gas", "bias",
    "news", "series", "species", "always", "perhaps", "less", "unless", "loss", "class", "business",
    "process", "access", "across", "address", "analysis", "basis", "crisis", "status", "bonus",
    "virus", "campus", "focus", "census", "canvas", "atlas", "alias", "chaos", "lens", "physics",
    "mathematics", "economics", "politics", "ethics", "statistics", "during", "nothing",
    "something", "anything", "everything", "morning", "evening", "king", "ring", "thing",
    "string", "spring", "wing", "bring", "sing", "sting", "swing", "ceiling", "feeling", "wedding",
    "building", "pudding", "need", "seed", "speed", "feed", "bed", "red", "shed", "bleed", "breed",
    "hundred", "sacred", "naked", "wicked", "indeed",
];

fn is_vowel(c: char) -> bool {
    matches!(c, 'a' | 'e' | 'i' | 'o' | 'u')
}

fn has_vowel(s: &str) -> bool {
    s.chars().any(|c| is_vowel(c) || c == 'y')
}

// "running" -> "runn" -> "run"; "falling" keeps "fall".
fn undouble(stem: &str) -> String {
    let bytes = stem.as_bytes();
    let n = bytes.len();
    if n >= 3 && bytes[n - 1] == bytes[n - 2] {
        let c = bytes[n - 1] as char;
        if !is_vowel(c) && !matches!(c, 'l' | 's' | 'z' | 'f') {
            return stem[..n - 1].to_string();
        }
    }
    stem.to_string()
}

/// One application of the suffix rules. Returns `None` when no rule fires.
fn apply_rules_once(token: &str) -> Option<String> {
    if let Some(&(_, lemma)) = IRREGULAR.iter().find(|(form, _)| *form == token) {
        return (lemma != token).then(|| lemma.to_string());
    }
    if KEEP.contains(&token) || !token.chars().all(|c| c.is_ascii_lowercase()) {
        return None;
    }
    let n = token.len();

    if n > 4 {
        if let Some(stem) = token.strip_suffix("ies") {
            return Some(format!("{stem}y"));
        }
        if let Some(stem) = token.strip_suffix("ied") {
            return Some(format!("{stem}y"));
        }
    }
    if n > 4 {
        for suffix in ["sses", "ches", "shes", "xes", "zes"] {
            if token.ends_with(suffix) {
                return Some(token[..n - 2].to_string());
            }
        }
    }
    if n > 3 && token.ends_with('s') {
        if token.ends_with("ss") || token.ends_with("us") || token.ends_with("is") {
            return None;
        }
        return Some(token[..n - 1].to_string());
    }
    if n > 5 {
        if let Some(stem) = token.strip_suffix("ing") {
            if has_vowel(stem) {
                return Some(undouble(stem));
            }
        }
    }
    if n > 4 {
        if let Some(stem) = token.strip_suffix("ed") {
            if has_vowel(stem) {
                if stem.ends_with('e') {
                    // "agreed" -> "agree"
                    return Some(token[..n - 1].to_string());
                }
                return Some(undouble(stem));
            }
        }
    }
    None
}

/// Applies the rule set until no rule fires. Every rule shortens the token or
/// maps it to a fixed point, so the loop terminates and the result is stable
/// under re-lemmatization.
fn rule_lemma(token: &str) -> String {
    let mut current = token.to_string();
    while let Some(next) = apply_rules_once(&current) {
        if next == current || next.is_empty() {
            break;
        }
        current = next;
    }
    current
}

/// Lemma for one non-empty token.
pub fn lemmatize_token(token: &str, config: &NormalizationConfig) -> String {
    match &config.lemmatizer {
        Lemmatizer::Identity => token.to_string(),
        Lemmatizer::Rules => rule_lemma(token),
        Lemmatizer::Table(table) => table
            .get(token)
            .map_or_else(|| token.to_string(), str::to_string),
    }
}

pub fn token_sort_normalize(text: &str, config: &NormalizationConfig) -> CanonicalText {
    let cased;
    let source = if config.lowercase {
        cased = text.to_lowercase();
        cased.as_str()
    } else {
        text
    };
    let mut tokens: Vec<String> = tokenize(source, config)
        .iter()
        .map(|t| lemmatize_token(t, config))
        .collect();
    tokens.sort_unstable();
    CanonicalText {
        text: tokens.join(" "),
        tokens,
    }
}
