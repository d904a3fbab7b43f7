//! Ratcliff/Obershelp gestalt pattern matching.
//!
//! The similarity of two sequences is twice the number of matching characters
//! divided by their combined length. Matching characters come from the longest
//! common contiguous block, plus, recursively, the matches found in the
//! unmatched regions to the left and to the right of that block.
//!
//! Characters are Unicode scalar values. Scores are reported on a 0..=100
//! scale.

use std::cmp::Ordering;
use std::ops::Range;

use smallvec::SmallVec;

/// A common block `a[start_a..start_a + length] == b[start_b..start_b + length]`.
///
/// `length == 0` is the "no match" sentinel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MatchBlock {
    pub start_a: usize,
    pub start_b: usize,
    pub length: usize,
}

impl MatchBlock {
    pub fn is_empty(&self) -> bool {
        self.length == 0
    }
}

/// Gestalt similarity on the 0..=100 scale.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct GestaltScore(f64);

impl GestaltScore {
    pub fn value(self) -> f64 {
        self.0
    }

    /// The same score on the unit interval.
    pub fn unit(self) -> f64 {
        self.0 / 100.0
    }
}

/// Longest common contiguous block of `a[range_a]` and `b[range_b]`.
///
/// Ties are resolved toward the smallest `start_a`, then the smallest
/// `start_b`. When nothing matches, the sentinel has `length == 0` and starts
/// at the beginning of both ranges.
///
/// # Panics
///
/// If either range is out of bounds for its sequence.
pub fn longest_match<T: PartialEq>(
    a: &[T],
    b: &[T],
    range_a: Range<usize>,
    range_b: Range<usize>,
) -> MatchBlock {
    let mut rows = vec![0usize; 2 * (range_b.len() + 1)];
    longest_match_with(a, b, range_a, range_b, &mut rows)
}

// `rows` must hold at least `2 * (range_b.len() + 1)` entries.
fn longest_match_with<T: PartialEq>(
    a: &[T],
    b: &[T],
    range_a: Range<usize>,
    range_b: Range<usize>,
    rows: &mut [usize],
) -> MatchBlock {
    let sa = &a[range_a.clone()];
    let sb = &b[range_b.clone()];
    let mut best = MatchBlock {
        start_a: range_a.start,
        start_b: range_b.start,
        length: 0,
    };
    if sa.is_empty() || sb.is_empty() {
        return best;
    }

    // prev[j] = length of the common suffix of sa[..i] and sb[..j].
    // Blocks are visited by increasing end in `a`, then increasing end in
    // `b`, so the first block of a given length has the smallest start_a and,
    // within that, the smallest start_b.
    let width = sb.len() + 1;
    let (mut prev, mut cur) = rows[..2 * width].split_at_mut(width);
    prev.fill(0);
    cur[0] = 0;
    for (i, ca) in sa.iter().enumerate() {
        for (j, ((cb, &p), c)) in sb.iter().zip(prev.iter()).zip(cur[1..].iter_mut()).enumerate() {
            *c = if ca == cb { p + 1 } else { 0 };
            if *c > best.length {
                best = MatchBlock {
                    start_a: range_a.start + i + 1 - *c,
                    start_b: range_b.start + j + 1 - *c,
                    length: *c,
                };
            }
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    best
}

/// Total number of matched characters found by the recursive block search,
/// taken in the argument order given.
fn matching_directed<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    if a.is_empty() || b.is_empty() {
        return 0;
    }
    // inline buffers keep short inputs off the heap
    let mut rows: SmallVec<[usize; 128]> = SmallVec::from_elem(0, 2 * (b.len() + 1));
    let mut total = 0;
    let mut pending: SmallVec<[(Range<usize>, Range<usize>); 16]> = SmallVec::new();
    pending.push((0..a.len(), 0..b.len()));
    while let Some((ra, rb)) = pending.pop() {
        if ra.is_empty() || rb.is_empty() {
            continue;
        }
        let block = longest_match_with(a, b, ra.clone(), rb.clone(), &mut rows);
        if block.is_empty() {
            continue;
        }
        total += block.length;
        pending.push((ra.start..block.start_a, rb.start..block.start_b));
        pending.push((
            block.start_a + block.length..ra.end,
            block.start_b + block.length..rb.end,
        ));
    }
    total
}

/// The recursive block search is order sensitive once ties between equally
/// long blocks appear (`("ab", "bacb")` matches 2 characters, the reverse only
/// 1). Both entry points below run the search on the lexicographically smaller
/// sequence first so the result does not depend on argument order.
fn canonical<'s, T: Ord>(a: &'s [T], b: &'s [T]) -> (&'s [T], &'s [T]) {
    match a.cmp(b) {
        Ordering::Greater => (b, a),
        _ => (a, b),
    }
}

/// Number of matching characters between two character slices.
pub fn matching_chars(a: &[char], b: &[char]) -> usize {
    let (x, y) = canonical(a, b);
    matching_directed(x, y)
}

/// Number of matching characters between two strings.
pub fn matching_characters(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    matching_chars(&a, &b)
}

/// Gestalt score of two character slices.
pub fn gestalt_ratio_chars(a: &[char], b: &[char]) -> GestaltScore {
    let total = a.len() + b.len();
    if total == 0 {
        return GestaltScore(100.0);
    }
    let matched = matching_chars(a, b);
    GestaltScore(100.0 * (2 * matched) as f64 / total as f64)
}

/// Gestalt score of two strings: `100 * 2 * matches / (|a| + |b|)`.
///
/// Two empty strings score 100.
pub fn gestalt_ratio(a: &str, b: &str) -> GestaltScore {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    gestalt_ratio_chars(&a, &b)
}
