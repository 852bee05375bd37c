mod common;

use common::labels;
use hdenc::evaluation::{
    duration_metrics, episode_counts, majority_filter, postprocess, postprocess_len, window_counts, EvalReport,
    LabelSeries, SeriesKind,
};
use proptest::prelude::*;

#[test]
fn hand_enumerated_cases() {
    assert_eq!(common::label_oracle_cases(), Ok(25));
}

fn series(s: &str) -> LabelSeries {
    LabelSeries::from_str_labels(s, 0.5, SeriesKind::RawPred).unwrap()
}

#[test]
fn postprocess_examples() {
    assert_eq!(postprocess_len(5.0, 0.5), 11);
    assert_eq!(postprocess_len(4.0, 1.0), 5);
    let zeros = "0".repeat(40);
    assert_eq!(postprocess(&series(&zeros), 5.0).unwrap().labels(), labels(&zeros).as_slice());
    let single = format!("{}1{}", "0".repeat(20), "0".repeat(20));
    assert_eq!(postprocess(&series(&single), 5.0).unwrap().labels(), labels(&"0".repeat(41)).as_slice());
    let block = format!("{}{}{}", "0".repeat(15), "1".repeat(20), "0".repeat(15));
    assert_eq!(postprocess(&series(&block), 5.0).unwrap().labels(), labels(&block).as_slice());
    assert!(postprocess(&series("0101"), 0.25).is_err());
}

#[test]
fn majority_filter_ties_go_to_zero() {
    // truncated window at the edge: [1, 0] is a tie
    assert_eq!(majority_filter(&[1, 0, 0, 0], 3), vec![0, 0, 0, 0]);
    assert_eq!(majority_filter(&[1, 1, 0, 0], 3), vec![1, 1, 0, 0]);
}

/// Series built from runs of alternating value, each at least `k` long.
fn long_runs(k: usize) -> impl Strategy<Value = Vec<u8>> {
    (any::<bool>(), prop::collection::vec(k..3 * k, 1..8)).prop_map(|(start, runs)| {
        let mut v = Vec::new();
        for (i, len) in runs.into_iter().enumerate() {
            let bit = u8::from(start ^ (i % 2 == 1));
            v.extend(std::iter::repeat_n(bit, len));
        }
        v
    })
}

fn binary(max: usize) -> impl Strategy<Value = Vec<u8>> {
    prop::collection::vec(0u8..2, 1..max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn postprocess_fixes_long_run_series(v in long_runs(11)) {
        let once = majority_filter(&v, 11);
        prop_assert_eq!(&once, &v);
        prop_assert_eq!(majority_filter(&once, 11), once);
    }

    #[test]
    fn detected_plus_missed_is_truth_episodes((t, p) in (1usize..60).prop_flat_map(|n| (prop::collection::vec(0u8..2, n), prop::collection::vec(0u8..2, n)))) {
        let c = episode_counts(&t, &p).unwrap();
        prop_assert_eq!(c.tp + c.fn_, c.truth_episodes);
        prop_assert!(c.fp <= c.pred_episodes);
    }

    #[test]
    fn f1de_between_its_parts((t, p) in (1usize..60).prop_flat_map(|n| (prop::collection::vec(0u8..2, n), prop::collection::vec(0u8..2, n)))) {
        let r = EvalReport::evaluate(&t, &p).unwrap();
        let (lo, hi) = (r.episode.f1.min(r.duration.f1), r.episode.f1.max(r.duration.f1));
        prop_assert!(r.f1de_gmean >= lo - 1e-15 && r.f1de_gmean <= hi + 1e-15);
    }

    #[test]
    fn window_counts_ignore_order(t in binary(60), seed in any::<u64>()) {
        let p: Vec<u8> = t.iter().enumerate().map(|(i, &x)| x ^ u8::from((seed >> (i % 64)) & 1 == 1)).collect();
        let a = window_counts(&t, &p).unwrap();
        let mut pairs: Vec<(u8, u8)> = t.iter().copied().zip(p.iter().copied()).collect();
        pairs.reverse();
        let n = pairs.len();
        pairs.rotate_left((seed % 7) as usize % n);
        let (t2, p2): (Vec<u8>, Vec<u8>) = pairs.into_iter().unzip();
        prop_assert_eq!(window_counts(&t2, &p2).unwrap(), a);
    }
}

#[test]
fn episode_counts_depend_on_order() {
    // the same window pairs, reordered, change the episode structure
    let a = episode_counts(&labels("0110"), &labels("0100")).unwrap();
    let b = episode_counts(&labels("1010"), &labels("1000")).unwrap();
    assert_eq!(window_counts(&labels("0110"), &labels("0100")).unwrap(), window_counts(&labels("1010"), &labels("1000")).unwrap());
    assert_ne!((a.tp, a.fn_), (b.tp, b.fn_));
}

#[test]
fn series_steps_must_agree() {
    let t = LabelSeries::from_str_labels("0110", 0.5, SeriesKind::Truth).unwrap();
    let p = LabelSeries::from_str_labels("0110", 1.0, SeriesKind::RawPred).unwrap();
    assert!(duration_metrics(&t, &p).is_err());
}
