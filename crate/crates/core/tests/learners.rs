use proptest::prelude::*;
use rand::Rng as _;

use runperf::learners::{
    train, train_linear_svm, BoostedParams, ClassifierKind, ClassifierSpec, Dataset, ForestParams, MaxFeatures,
    SvmParams, TrainedModel, TreeParams,
};
use runperf::rng::rng_from_seed;
use runperf::Error;

fn quick(kind: ClassifierKind) -> ClassifierSpec {
    match ClassifierSpec::with_defaults(kind) {
        ClassifierSpec::Boosted(p) => ClassifierSpec::Boosted(BoostedParams { n_rounds: 40, ..p }),
        ClassifierSpec::RandomForest(p) => ClassifierSpec::RandomForest(ForestParams { n_trees: 15, ..p }),
        s => s,
    }
}

fn noisy_blobs(n: usize, d: usize, classes: usize, seed: u64) -> Dataset {
    let mut rng = rng_from_seed(seed);
    let mut rows = Vec::new();
    let mut y = Vec::new();
    for i in 0..n {
        let c = i % classes;
        rows.push((0..d).map(|j| if j == 0 { c as f64 } else { 0.0 } + rng.random_range(-0.8..0.8)).collect());
        y.push(c);
    }
    Dataset::from_rows(&rows, y, classes).unwrap()
}

fn predictions(m: &TrainedModel, d: &Dataset) -> Vec<usize> {
    (0..d.n_rows()).map(|i| m.predict_index(d.row(i)).unwrap()).collect()
}

#[test]
fn single_tree_forest_matches_decision_tree() {
    let d = noisy_blobs(60, 5, 3, 1);
    let forest = ForestParams {
        n_trees: 1,
        bootstrap: false,
        max_features: MaxFeatures::All,
        seed: 42,
        ..Default::default()
    };
    let rf = train(&ClassifierSpec::RandomForest(forest), &d).unwrap();
    let dt = train(&ClassifierSpec::DecisionTree(TreeParams::default()), &d).unwrap();
    assert_eq!(predictions(&rf, &d), predictions(&dt, &d));
    match (&rf, &dt) {
        (TrainedModel::RandomForest(f), TrainedModel::DecisionTree(t)) => assert_eq!(f.trees[0], t.tree),
        _ => unreachable!(),
    }
}

#[test]
fn linear_svm_recovers_one_dimensional_threshold() {
    // Label 2 exactly when x > 0.3, with a gap around the boundary.
    let xs: Vec<f64> = (0..=40).map(|i| -1.0 + i as f64 * 0.05).filter(|x| (x - 0.3).abs() > 0.06).collect();
    let rows: Vec<Vec<f64>> = xs.iter().map(|&x| vec![x]).collect();
    let y: Vec<usize> = xs.iter().map(|&x| usize::from(x > 0.3)).collect();
    let d = Dataset::from_rows(&rows, y, 2).unwrap();
    let m = train_linear_svm(&d, &SvmParams { epochs: 3000, ..Default::default() }).unwrap();
    let (w, b) = &m.raw_hyperplanes()[0];
    assert!(w[0] > 0.0, "weight sign {}", w[0]);
    let boundary = -b / w[0];
    assert!((boundary - 0.3).abs() < 0.06, "boundary {boundary}");
    let model = TrainedModel::LinearSvm(m);
    assert_eq!(model.accuracy(&d).unwrap(), 1.0);
}

#[test]
fn mirrored_data_is_undecided_at_the_midpoint() {
    // Class 1 at negative x, class 2 at the mirror positions, and one
    // example of each class at the midpoint itself.
    let xs = [-3.0, -2.0, -1.0, 0.0, 0.0, 1.0, 2.0, 3.0];
    let y = vec![0, 0, 0, 0, 1, 1, 1, 1];
    let d = Dataset::from_rows(&xs.iter().map(|&x| vec![x]).collect::<Vec<_>>(), y, 2).unwrap();
    for kind in ClassifierKind::ALL {
        let m = train(&quick(kind), &d).unwrap();
        let p = m.predict_proba(&[0.0]).unwrap();
        assert!(p.iter().all(|v| (0.45..=0.55).contains(v)), "{kind}: {p:?}");
    }
}

#[test]
fn repeated_example_is_predicted_confidently() {
    let rows: Vec<Vec<f64>> = (0..40).map(|i| if i < 20 { vec![1.0, 2.0] } else { vec![-1.0, 0.5] }).collect();
    let y = (0..40).map(|i| usize::from(i < 20)).collect();
    let d = Dataset::from_rows(&rows, y, 2).unwrap();
    for kind in [ClassifierKind::Boosted, ClassifierKind::DecisionTree, ClassifierKind::RandomForest, ClassifierKind::LogisticRegression] {
        let spec = match kind {
            ClassifierKind::Boosted => ClassifierSpec::Boosted(BoostedParams::default()),
            k => quick(k),
        };
        let m = train(&spec, &d).unwrap();
        assert_eq!(m.predict(&[1.0, 2.0]).unwrap().value(), 2, "{kind}");
        assert!(m.predict_proba(&[1.0, 2.0]).unwrap()[1] >= 0.99, "{kind}");
    }
}

#[test]
fn single_class_and_unknown_kind_are_errors() {
    let d = Dataset::from_rows(&[vec![0.0], vec![1.0]], vec![1, 1], 2).unwrap();
    for kind in ClassifierKind::ALL {
        assert!(matches!(train(&quick(kind), &d), Err(Error::InsufficientData(_))), "{kind}");
    }
    assert!("gbm".parse::<ClassifierKind>().is_err());
}

#[test]
fn learning_rate_zero_rejected() {
    let d = noisy_blobs(10, 2, 2, 0);
    let spec = ClassifierSpec::Boosted(BoostedParams { learning_rate: 0.0, ..Default::default() });
    assert!(matches!(train(&spec, &d), Err(Error::Config(_))));
}

#[test]
fn rank_preserving_remap_leaves_tree_predictions_unchanged() {
    let d = noisy_blobs(48, 3, 3, 5);
    // exp is strictly increasing; remap feature 1 everywhere.
    let remap = |d: &Dataset| {
        let rows: Vec<Vec<f64>> = (0..d.n_rows())
            .map(|i| {
                let mut r = d.row(i).to_vec();
                r[1] = r[1].exp();
                r
            })
            .collect();
        Dataset::from_rows(&rows, d.labels().to_vec(), d.n_classes()).unwrap()
    };
    let e = remap(&d);
    for kind in [ClassifierKind::Boosted, ClassifierKind::DecisionTree, ClassifierKind::RandomForest] {
        let a = train(&quick(kind), &d).unwrap();
        let b = train(&quick(kind), &e).unwrap();
        assert_eq!(predictions(&a, &d), predictions(&b, &e), "{kind}");
        assert_eq!(a.accuracy(&d).unwrap(), b.accuracy(&e).unwrap());
    }
}

#[test]
fn same_seed_gives_byte_identical_models() {
    let d = noisy_blobs(40, 6, 3, 9);
    let specs = [
        ClassifierSpec::Boosted(BoostedParams { n_rounds: 10, colsample: 0.5, seed: 3, ..Default::default() }),
        ClassifierSpec::RandomForest(ForestParams { n_trees: 5, seed: 3, ..Default::default() }),
        ClassifierSpec::LogisticRegression(Default::default()),
        ClassifierSpec::LinearSvm(Default::default()),
        ClassifierSpec::DecisionTree(TreeParams { max_features: MaxFeatures::Count(2), seed: 3, ..Default::default() }),
    ];
    for s in specs {
        let a = train(&s, &d).unwrap().to_json().unwrap();
        let b = train(&s, &d).unwrap().to_json().unwrap();
        assert_eq!(a, b, "{:?}", s.kind());
    }
}

#[test]
fn probabilities_are_distributions_on_random_inputs() {
    let d = noisy_blobs(45, 4, 3, 11);
    let mut rng = rng_from_seed(12);
    for kind in ClassifierKind::ALL {
        let m = train(&quick(kind), &d).unwrap();
        for _ in 0..1000 {
            let x: Vec<f64> = (0..4).map(|_| rng.random_range(-50.0..50.0)).collect();
            let p = m.predict_proba(&x).unwrap();
            assert_eq!(p.len(), 3);
            assert!(p.iter().all(|&v| v >= 0.0), "{kind}: {p:?}");
            assert!((p.iter().sum::<f64>() - 1.0).abs() <= 1e-9, "{kind}: {p:?}");
            let best = m.predict_index(&x).unwrap();
            assert!(p.iter().enumerate().all(|(i, &v)| v < p[best] || (v == p[best] && i >= best)));
        }
    }
}

#[test]
fn models_are_shareable_across_threads() {
    fn assert_send_sync<T: Send + Sync>() {}
    assert_send_sync::<TrainedModel>();
    let d = noisy_blobs(20, 2, 2, 2);
    let m = train(&quick(ClassifierKind::Boosted), &d).unwrap();
    let expected = m.predict_proba(&[0.5, 0.0]).unwrap();
    std::thread::scope(|s| {
        for _ in 0..2 {
            s.spawn(|| assert_eq!(m.predict_proba(&[0.5, 0.0]).unwrap(), expected));
        }
    });
}

#[test]
fn boosted_trees_respect_max_depth() {
    let d = noisy_blobs(60, 4, 3, 13);
    let m = train(&ClassifierSpec::Boosted(BoostedParams { n_rounds: 5, max_depth: 3, ..Default::default() }), &d).unwrap();
    let TrainedModel::Boosted(b) = m else { unreachable!() };
    assert_eq!(b.trees.len(), 5);
    assert!(b.trees.iter().all(|round| round.len() == 3));
    assert!(b.trees.iter().flatten().all(|t| t.depth() <= 3));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn boosted_loss_drops_when_classes_differ(seed in 0u64..1000, classes in 2usize..5) {
        let d = noisy_blobs(30, 3, classes, seed);
        let m = runperf::learners::train_boosted(&d, &BoostedParams { n_rounds: 20, ..Default::default() }).unwrap();
        prop_assert!(m.final_loss() < m.initial_loss());
    }

    #[test]
    fn serialization_round_trips(seed in 0u64..1000, kind_ix in 0usize..5) {
        let d = noisy_blobs(20, 3, 2, seed);
        let kind = ClassifierKind::ALL[kind_ix];
        let m = train(&quick(kind), &d).unwrap();
        let text = m.to_json().unwrap();
        let back = TrainedModel::from_json(&text).unwrap();
        prop_assert_eq!(back.to_json().unwrap(), text);
    }
}
