mod common;

use common::*;
use proptest::prelude::*;

use simeval::eval::{auc, metrics_at, roc_curve, youden_threshold, ScoredLabel};
use simeval::gestalt::{gestalt_ratio, gestalt_ratio_chars, matching_characters};
use simeval::ingest::{load_embeddings, write_embeddings};
use simeval::normalize::{token_sort_normalize, NormalizationConfig};
use simeval::vecsim::{angular_similarity, cosine_similarity, cosine_similarity_score};
use simeval::EmbeddingVector;

fn chars(s: &str) -> Vec<char> {
    s.chars().collect()
}

#[test]
fn gestalt_examples_agree_with_oracle() {
    for (a, b, matches, score) in [
        ("abcd", "bcde", 3, 75.0),
        ("aaaa", "aaaa", 4, 100.0),
        ("", "abc", 0, 0.0),
        ("abc", "abc", 3, 100.0),
        ("abc", "xyz", 0, 0.0),
    ] {
        assert_eq!(oracle_matching(&chars(a), &chars(b)), matches, "oracle {a}/{b}");
        assert_eq!(oracle_gestalt(&chars(a), &chars(b)), score, "oracle {a}/{b}");
        assert_eq!(matching_characters(a, b), matches, "{a}/{b}");
        assert_eq!(gestalt_ratio(a, b).value(), score, "{a}/{b}");
    }
}

#[test]
fn roc_interleaved_matches_exhaustive_thresholds() {
    let data = scored(&[0.9, 0.6, 0.3, 0.2], &[1, 0, 1, 0]);
    let curve = roc_curve(&data).unwrap();
    assert_eq!(curve.points.len(), 5);
    for pt in &curve.points[1..] {
        let t = pt.threshold;
        let tp = data.iter().filter(|d| d.label && d.score >= t).count();
        let fp = data.iter().filter(|d| !d.label && d.score >= t).count();
        assert_eq!(pt.tpr, tp as f64 / 2.0);
        assert_eq!(pt.fpr, fp as f64 / 2.0);
    }
}

fn short_string() -> impl Strategy<Value = String> {
    "[abc]{0,12}"
}

fn dataset() -> impl Strategy<Value = Vec<ScoredLabel>> {
    // coarse scores give plenty of ties
    prop::collection::vec((0u8..20, any::<bool>()), 2..120)
        .prop_map(|v| {
            v.into_iter()
                .enumerate()
                .map(|(i, (s, l))| ScoredLabel::new(i.to_string(), f64::from(s) / 19.0, l))
                .collect::<Vec<_>>()
        })
        .prop_filter("both classes", |d| d.iter().any(|x| x.label) && d.iter().any(|x| !x.label))
}

fn vec_pair() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (2usize..64).prop_flat_map(|d| {
        (
            prop::collection::vec(-10.0f64..10.0, d),
            prop::collection::vec(-10.0f64..10.0, d),
        )
    })
}

fn ev(id: &str, v: &[f64]) -> EmbeddingVector {
    EmbeddingVector::new(id, v.to_vec()).unwrap()
}

fn nonzero(v: &[f64]) -> bool {
    v.iter().any(|x| *x != 0.0)
}

fn token_line() -> impl Strategy<Value = Vec<String>> {
    let token = prop_oneof![
        prop::sample::select(vec![
            "Stocks", "buying", "is", "what's", "fees?", "IRA", "(funds)", "running", "stopped",
            "companies", "agreed", "evenings", "Über", "naïve", "--", "a", "The", "don't",
        ])
        .prop_map(str::to_string),
        "[a-zA-Z'.,?-]{1,10}",
    ];
    prop::collection::vec(token, 0..12)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn gestalt_is_symmetric(a in short_string(), b in short_string()) {
        prop_assert_eq!(gestalt_ratio(&a, &b).value(), gestalt_ratio(&b, &a).value());
    }

    #[test]
    fn gestalt_self_is_100(a in "[a-z ]{1,30}") {
        prop_assert_eq!(gestalt_ratio(&a, &a).value(), 100.0);
    }

    #[test]
    fn matches_bounded_by_shorter(a in short_string(), b in short_string()) {
        let m = matching_characters(&a, &b);
        prop_assert!(m <= a.len().min(b.len()));
        let s = gestalt_ratio(&a, &b).value();
        prop_assert!((0.0..=100.0).contains(&s));
    }

    #[test]
    fn gestalt_matches_oracle(a in "[abcd]{0,16}", b in "[abcd]{0,16}") {
        let (a, b) = (chars(&a), chars(&b));
        prop_assert_eq!(gestalt_ratio_chars(&a, &b).value(), oracle_gestalt(&a, &b));
    }

    #[test]
    fn normalize_is_idempotent(tokens in token_line()) {
        let cfg = NormalizationConfig::default();
        let once = token_sort_normalize(&tokens.join(" "), &cfg);
        let twice = token_sort_normalize(&once.text, &cfg);
        prop_assert_eq!(&once, &twice);
        prop_assert!(once.tokens.windows(2).all(|w| w[0] <= w[1]));
        prop_assert_eq!(once.text.trim(), once.text.as_str());
    }

    #[test]
    fn normalize_ignores_token_order(tokens in token_line(), seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let cfg = NormalizationConfig::default();
        let mut shuffled = tokens.clone();
        shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        prop_assert_eq!(
            token_sort_normalize(&tokens.join(" "), &cfg),
            token_sort_normalize(&format!("  {} ", shuffled.join("\t ")), &cfg)
        );
    }

    #[test]
    fn vector_scores_symmetric_and_scale_free((u, v) in vec_pair(), cu in 0.01f64..100.0, cv in 0.01f64..100.0) {
        prop_assume!(nonzero(&u) && nonzero(&v));
        let (a, b) = (ev("u", &u), ev("v", &v));
        let us: Vec<f64> = u.iter().map(|x| x * cu).collect();
        let vs: Vec<f64> = v.iter().map(|x| x * cv).collect();
        let (sa, sb) = (ev("u", &us), ev("v", &vs));
        let base = [
            cosine_similarity(&a, &b).unwrap(),
            angular_similarity(&a, &b).unwrap().value,
            cosine_similarity_score(&a, &b).unwrap().value,
        ];
        let swapped = [
            cosine_similarity(&b, &a).unwrap(),
            angular_similarity(&b, &a).unwrap().value,
            cosine_similarity_score(&b, &a).unwrap().value,
        ];
        let scaled = [
            cosine_similarity(&sa, &sb).unwrap(),
            angular_similarity(&sa, &sb).unwrap().value,
            cosine_similarity_score(&sa, &sb).unwrap().value,
        ];
        for i in 0..3 {
            prop_assert!((base[i] - swapped[i]).abs() <= 1e-12);
            prop_assert!((base[i] - scaled[i]).abs() <= 1e-12);
        }
        prop_assert!((0.0..=1.0).contains(&base[1]) && (0.0..=1.0).contains(&base[2]));
    }

    #[test]
    fn angular_and_cosine_rank_alike(u in prop::collection::vec(-1.0f64..1.0, 8), cands in prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 8), 2..10)) {
        prop_assume!(nonzero(&u) && cands.iter().all(|c| nonzero(c)));
        let q = ev("q", &u);
        let scores: Vec<(f64, f64, f64)> = cands.iter().map(|c| {
            let c = ev("c", c);
            (
                cosine_similarity(&q, &c).unwrap(),
                angular_similarity(&q, &c).unwrap().value,
                cosine_similarity_score(&q, &c).unwrap().value,
            )
        }).collect();
        for x in &scores {
            for y in &scores {
                // skip pairs closer than the two formulas' rounding
                if (x.0 - y.0).abs() > 1e-9 {
                    prop_assert_eq!(x.1 < y.1, x.0 < y.0);
                    prop_assert_eq!(x.2 < y.2, x.0 < y.0);
                }
            }
        }
    }

    #[test]
    fn auc_equals_pairwise_estimator(data in dataset()) {
        let a = auc(&roc_curve(&data).unwrap());
        prop_assert!((a - oracle_pairwise_auc(&data)).abs() <= 1e-12);
    }

    #[test]
    fn auc_invariant_under_increasing_maps(data in dataset(), k in 0.1f64..5.0, shift in -3.0f64..3.0) {
        let base = auc(&roc_curve(&data).unwrap());
        let mapped: Vec<ScoredLabel> = data
            .iter()
            .map(|d| ScoredLabel::new(d.pair_id.clone(), (k * d.score + shift).exp().ln_1p(), d.label))
            .collect();
        prop_assert!((auc(&roc_curve(&mapped).unwrap()) - base).abs() <= 1e-12);
    }

    #[test]
    fn youden_matches_oracle(data in dataset()) {
        let curve = roc_curve(&data).unwrap();
        let y = youden_threshold(&curve);
        let (t, j) = oracle_youden(&data);
        prop_assert_eq!(y.threshold, t);
        prop_assert_eq!(y.j, j);
        let best = curve
            .points
            .iter()
            .map(|p| (p.tp as f64 * curve.negatives as f64 - p.fp as f64 * curve.positives as f64)
                / (curve.positives as f64 * curve.negatives as f64))
            .fold(f64::NEG_INFINITY, f64::max);
        prop_assert_eq!(y.j, best);
        prop_assert!((y.j - (y.sensitivity + y.specificity - 1.0)).abs() <= 1e-15);
    }

    #[test]
    fn metric_identities_hold(data in dataset(), t in 0.0f64..1.0) {
        let r = metrics_at(&data, t).unwrap();
        prop_assert_eq!(r.tp + r.fp + r.tn + r.fn_, data.len());
        prop_assert_eq!(check_metric_identities(&r), Ok(()));
    }

    #[test]
    fn roc_invariants(data in dataset()) {
        let c = roc_curve(&data).unwrap();
        let first = c.points.first().unwrap();
        let last = c.points.last().unwrap();
        prop_assert_eq!((first.tpr, first.fpr), (0.0, 0.0));
        prop_assert_eq!((last.tpr, last.fpr), (1.0, 1.0));
        for w in c.points.windows(2) {
            prop_assert!(w[0].threshold > w[1].threshold);
            prop_assert!(w[0].tpr <= w[1].tpr && w[0].fpr <= w[1].fpr);
        }
        let mut distinct: Vec<f64> = data.iter().map(|d| d.score).collect();
        distinct.sort_by(f64::total_cmp);
        distinct.dedup();
        prop_assert_eq!(c.points.len(), distinct.len() + 1);
    }

    #[test]
    fn embedding_file_round_trip(rows in prop::collection::vec(prop::collection::vec(any::<f64>().prop_filter("finite", |x| x.is_finite()), 3), 0..8)) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("e.tsv");
        let vectors: Vec<EmbeddingVector> = rows
            .iter()
            .enumerate()
            .map(|(i, r)| EmbeddingVector::new(format!("t{i}"), r.clone()).unwrap())
            .collect();
        write_embeddings(&path, &vectors).unwrap();
        let loaded = load_embeddings(&path).unwrap();
        prop_assert_eq!(loaded.len(), vectors.len());
        for v in &vectors {
            let back = &loaded[v.id()];
            prop_assert_eq!(back.dim(), v.dim());
            for (x, y) in back.values().iter().zip(v.values()) {
                prop_assert_eq!(x.to_bits(), y.to_bits());
            }
        }
    }
}
