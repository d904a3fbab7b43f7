//! Reference implementations used as test oracles. They are written
//! independently of the library code paths they check: no shared helpers,
//! no dynamic programming, no curve sweeps.
#![allow(dead_code)]

use simeval::eval::{MetricsReport, ScoredLabel};

/// Matching characters by exhaustive search: try block lengths from longest to
/// shortest, and for each length scan starts in `a`, then in `b`. The first
/// hit is the longest block with the smallest start in `a`, then in `b`.
/// The pair is put in lexicographic order first.
pub fn oracle_matching<T: Ord>(a: &[T], b: &[T]) -> usize {
    if a <= b {
        oracle_directed(a, b)
    } else {
        oracle_directed(b, a)
    }
}

fn oracle_directed<T: Ord>(a: &[T], b: &[T]) -> usize {
    for len in (1..=a.len().min(b.len())).rev() {
        for i in 0..=a.len() - len {
            for j in 0..=b.len() - len {
                if a[i..i + len] == b[j..j + len] {
                    return len
                        + oracle_directed(&a[..i], &b[..j])
                        + oracle_directed(&a[i + len..], &b[j + len..]);
                }
            }
        }
    }
    0
}

pub fn oracle_gestalt<T: Ord>(a: &[T], b: &[T]) -> f64 {
    let total = a.len() + b.len();
    if total == 0 {
        return 100.0;
    }
    100.0 * (2 * oracle_matching(a, b)) as f64 / total as f64
}

/// Probability that a random positive outscores a random negative, ties
/// counted one half, by direct enumeration of all positive/negative pairs.
pub fn oracle_pairwise_auc(data: &[ScoredLabel]) -> f64 {
    let pos: Vec<f64> = data.iter().filter(|d| d.label).map(|d| d.score).collect();
    let neg: Vec<f64> = data.iter().filter(|d| !d.label).map(|d| d.score).collect();
    let mut wins = 0.0;
    for p in &pos {
        for n in &neg {
            if p > n {
                wins += 1.0;
            } else if p == n {
                wins += 0.5;
            }
        }
    }
    wins / (pos.len() as f64 * neg.len() as f64)
}

/// Exhaustive Youden search: for every distinct score `t`, count the
/// confusion matrix of `score >= t` from scratch. Returns `(threshold, J)`;
/// ties go to the higher true-positive count, then the lower threshold.
pub fn oracle_youden(data: &[ScoredLabel]) -> (f64, f64) {
    let p = data.iter().filter(|d| d.label).count() as i128;
    let n = data.len() as i128 - p;
    let mut candidates: Vec<f64> = data.iter().map(|d| d.score).collect();
    candidates.sort_by(f64::total_cmp);
    candidates.dedup_by(|a, b| a == b);

    let mut best: Option<(i128, i128, f64)> = None;
    for &t in &candidates {
        let tp = data.iter().filter(|d| d.label && d.score >= t).count() as i128;
        let fp = data.iter().filter(|d| !d.label && d.score >= t).count() as i128;
        let key = tp * n - fp * p;
        let better = match best {
            None => true,
            Some((bk, btp, bt)) => key > bk || (key == bk && (tp > btp || (tp == btp && t < bt))),
        };
        if better {
            best = Some((key, tp, t));
        }
    }
    let (key, _, t) = best.expect("non-empty data");
    (t, key as f64 / (p as f64 * n as f64))
}

/// Recomputes every rate in a report from its counts and checks exact
/// equality. Returns a description of the first mismatch.
pub fn check_metric_identities(r: &MetricsReport) -> Result<(), String> {
    let (tp, fp, tn, fn_) = (r.tp as f64, r.fp as f64, r.tn as f64, r.fn_ as f64);
    let accuracy = (tp + tn) / (tp + fp + tn + fn_);
    let sensitivity = tp / (tp + fn_);
    let specificity = tn / (tn + fp);
    let precision = if r.tp + r.fp == 0 { 0.0 } else { tp / (tp + fp) };
    let f_score = if precision + sensitivity == 0.0 {
        0.0
    } else {
        2.0 * precision * sensitivity / (precision + sensitivity)
    };
    let checks = [
        ("accuracy", r.accuracy, accuracy),
        ("sensitivity", r.sensitivity, sensitivity),
        ("specificity", r.specificity, specificity),
        ("precision", r.precision, precision),
        ("f_score", r.f_score, f_score),
    ];
    for (name, stored, recomputed) in checks {
        if stored.to_bits() != recomputed.to_bits() {
            return Err(format!("{name}: stored {stored}, recomputed {recomputed}"));
        }
    }
    if r.precision_undefined != (r.tp + r.fp == 0) {
        return Err("precision_undefined flag disagrees with counts".into());
    }
    Ok(())
}

pub fn scored(scores: &[f64], labels: &[u8]) -> Vec<ScoredLabel> {
    scores
        .iter()
        .zip(labels)
        .enumerate()
        .map(|(i, (&s, &l))| ScoredLabel::new(i.to_string(), s, l == 1))
        .collect()
}

/// All strings over `alphabet` with length `0..=max_len`.
pub fn all_strings(alphabet: &[char], max_len: usize) -> Vec<Vec<char>> {
    let mut out = vec![Vec::new()];
    let mut frontier = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::with_capacity(frontier.len() * alphabet.len());
        for s in &frontier {
            for &c in alphabet {
                let mut t: Vec<char> = s.clone();
                t.push(c);
                next.push(t);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

/// Deterministic QQP-layout fixture with `n` pairs drawn from a small finance
/// vocabulary, roughly a third labeled duplicate.
pub fn qqp_fixture(n: usize, seed: u64) -> String {
    use rand::{RngExt, SeedableRng};
    let words = [
        "how", "do", "i", "buy", "a", "stock", "stocks", "what", "is", "the", "minimum", "amount",
        "to", "fees", "fee", "account", "open", "ira", "brokerage", "can", "short", "mutual",
        "fund", "funds", "reinvest", "dividends", "price", "sell", "shares", "margin", "trade",
        "penny", "borrow", "market", "order", "limit", "why", "are", "there", "any",
    ];
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut out = String::from("id\tqid1\tqid2\tquestion1\tquestion2\tis_duplicate\n");
    for i in 0..n {
        let len = rng.random_range(3..12);
        let q1: Vec<&str> = (0..len).map(|_| words[rng.random_range(0..words.len())]).collect();
        let dup = rng.random_bool(0.37);
        let q2: Vec<&str> = if dup {
            let mut q = q1.clone();
            let k = rng.random_range(0..q.len());
            q.swap(0, k);
            if rng.random_bool(0.5) {
                q.push(words[rng.random_range(0..words.len())]);
            }
            q
        } else {
            let len = rng.random_range(3..12);
            (0..len).map(|_| words[rng.random_range(0..words.len())]).collect()
        };
        out.push_str(&format!(
            "{i}\t{}\t{}\t{}?\t{}?\t{}\n",
            2 * i + 1,
            2 * i + 2,
            q1.join(" "),
            q2.join(" "),
            u8::from(dup)
        ));
    }
    out
}
