mod common;

use hdenc::analysis::{confidence, separability, vote, FeatAppendView, Strategy};
use hdenc::dataset::PlantedFeatures;
use hdenc::encoders::Scheme;
use hdenc::learner::Label;
use hdenc::pipeline::{select_fold, FittedModel, HdSettings, SelectionSettings};

#[test]
fn mean_certainty_is_one() {
    let worst = common::certainty_identity(10_000, 11).unwrap();
    assert!(worst <= 1e-9, "{worst}");
}

#[test]
fn confidence_sentinels() {
    assert_eq!(confidence(&[1.0, 2.0], &[1, 0], &[1, 0]).unwrap(), f64::INFINITY);
    assert_eq!(confidence(&[1.0, 2.0], &[1, 0], &[0, 1]).unwrap(), f64::NEG_INFINITY);
    // correct mean 2, wrong mean 1: surplus relative to the wrong mean
    assert_eq!(confidence(&[2.0, 1.0], &[1, 1], &[1, 0]).unwrap(), 1.0);
    assert_eq!(confidence(&[0.0, 0.0], &[1, 1], &[1, 0]).unwrap(), 0.0);
    assert_eq!(confidence(&[1.0, 0.0], &[1, 1], &[1, 0]).unwrap(), f64::INFINITY);
}

#[test]
fn vote_prefers_seizure_only_on_positive_score() {
    let dists = [(0.2, 0.4), (0.5, 0.3)];
    assert_eq!(vote(&dists, &[0]).unwrap(), Label::Seizure);
    assert_eq!(vote(&dists, &[1]).unwrap(), Label::NonSeizure);
    // scores cancel exactly: ties go to non-seizure
    assert_eq!(vote(&[(0.25, 0.5), (0.5, 0.25)], &[0, 1]).unwrap(), Label::NonSeizure);
}

#[test]
fn informative_features_separate_class_models() {
    let folds = PlantedFeatures::default().generate().unwrap();
    let refs: Vec<_> = folds.iter().collect();
    let settings = HdSettings {
        scheme: Scheme::FeatAppend,
        ..HdSettings::default()
    };
    let fitted = FittedModel::fit(&refs, &settings).unwrap();
    let cfg = fitted.encoder.config();
    assert_eq!(FeatAppendView::new(cfg).unwrap().dim(), 19_000);
    let sep: Vec<f64> = (0..19).map(|f| separability(&fitted.models, f, cfg).unwrap()).collect();
    let noise_max = (0..19)
        .filter(|f| ![0, 3, 6, 9].contains(f))
        .map(|f| sep[f])
        .fold(0.0, f64::max);
    for f in [0, 3, 6, 9] {
        assert!(sep[f] > noise_max, "feature {f}: {} vs noise {noise_max}", sep[f]);
    }
}

#[test]
fn greedy_skips_the_duplicate_feature() {
    let folds = PlantedFeatures::redundancy().generate().unwrap();
    let train: Vec<_> = folds[1..].iter().collect();
    let out = select_fold(&train, &folds[0], &SelectionSettings::default(), 0).unwrap();
    let perf = out.result(Strategy::ByPerformance).unwrap();
    let greedy = out.result(Strategy::GreedyPerfCorr).unwrap();
    // ranking alone puts the two copies of feature 0 on top
    let mut top = perf.ordering[..2].to_vec();
    top.sort_unstable();
    assert_eq!(top, vec![0, 1]);
    assert_eq!(greedy.ordering[0], perf.ordering[0]);
    // a copy adds nothing to the vote, so greedy never takes it second
    assert_ne!(greedy.ordering[1], 1);
    assert!(greedy.train_max() >= perf.train_max());
}
