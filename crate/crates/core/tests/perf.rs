use proptest::prelude::*;
use runperf::dataio::{ClipRecord, ContextMode, SplitRecord};
use runperf::perf::{build_current, build_next, build_slice, discretize, Task};
use runperf::LOGITS_DIM;

fn named(times: &[f64]) -> Vec<(String, f64)> {
    times.iter().enumerate().map(|(i, &t)| (format!("r{i:03}"), t)).collect()
}

fn labels(times: &[(String, f64)], c: usize) -> Vec<usize> {
    let map = discretize(times, c).unwrap();
    times.iter().map(|(id, _)| map[id].value()).collect()
}

fn distinct_times() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::btree_set(1u32..1_000_000, 4..120)
        .prop_map(|s| s.into_iter().map(|t| f64::from(t) * 0.25).collect::<Vec<_>>())
        .prop_shuffle()
}

fn clip(runner: &str, rp: i64) -> ClipRecord {
    ClipRecord {
        runner_id: runner.into(),
        rp_id: rp,
        context_mode: ContextMode::Raw,
        logits: vec![0.0; LOGITS_DIM],
    }
}

#[test]
fn spec_examples() {
    let times = [("a", 10.0), ("b", 20.0), ("c", 30.0), ("d", 40.0)];
    let l = discretize(&times, 2).unwrap();
    assert_eq!([l["a"], l["b"], l["c"], l["d"]].map(|x| x.value()), [1, 1, 2, 2]);

    let tied = [("d", 5.0), ("c", 5.0), ("b", 5.0), ("a", 5.0)];
    let l = discretize(&tied, 2).unwrap();
    assert_eq!([l["a"], l["b"], l["c"], l["d"]].map(|x| x.value()), [1, 1, 2, 2]);

    let eight = named(&[8.0, 3.0, 5.0, 1.0, 7.0, 2.0, 6.0, 4.0]);
    let l = labels(&eight, 4);
    for c in 1..=4 {
        assert_eq!(l.iter().filter(|&&x| x == c).count(), 2);
    }
    assert!(discretize(&named(&[1.0]), 2).is_err());
}

#[test]
fn next_rp_labels_follow_shared_runners() {
    let clips: Vec<ClipRecord> = ["a", "b", "c", "d", "e"].iter().map(|r| clip(r, 3)).collect();
    let mut splits: Vec<SplitRecord> = ["a", "b", "c", "d", "e"]
        .iter()
        .enumerate()
        .map(|(i, r)| SplitRecord::new(*r, 3, 1000.0 + i as f64))
        .collect();
    // "e" stops at RP3; the RP4 order reverses a..d.
    for (r, t) in [("a", 4000.0), ("b", 3000.0), ("c", 2500.0), ("d", 2000.0)] {
        splits.push(SplitRecord::new(r, 4, t));
    }
    let slice = build_next(&clips, &splits, 3, ContextMode::Raw, 2).unwrap();
    let got: Vec<(String, usize, i64)> =
        slice.examples.iter().map(|e| (e.runner_id.clone(), e.label.value(), e.target_rp)).collect();
    let want: Vec<(String, usize, i64)> =
        [("a", 2), ("b", 2), ("c", 1), ("d", 1)].iter().map(|(r, l)| (r.to_string(), *l, 4)).collect();
    assert_eq!(got, want);

    let current = build_current(&clips, &splits, 3, ContextMode::Raw, 2).unwrap();
    assert_eq!(current.len(), 5);
    assert_eq!(current.class_counts(), vec![3, 2]);

    assert!(build_next(&clips, &splits, 4, ContextMode::Raw, 2).is_err());
    let union = build_slice(&clips, &splits, Task::Next, None, ContextMode::Raw, 2).unwrap();
    assert_eq!(union.len(), 4);
}

#[test]
fn missing_split_names_the_runner() {
    let clips = vec![clip("a", 3), clip("ghost", 3)];
    let splits = vec![SplitRecord::new("a", 3, 10.0)];
    let err = build_current(&clips, &splits, 3, ContextMode::Raw, 2).unwrap_err();
    assert!(err.to_string().contains("ghost"), "{err}");
}

proptest! {
    #[test]
    fn permutation_invariant(times in distinct_times(), c in 2usize..5, rot in 0usize..100) {
        let t = named(&times);
        let map = discretize(&t, c).unwrap();
        let mut rotated = t.clone();
        let k = rot % rotated.len();
        rotated.rotate_left(k);
        rotated.reverse();
        prop_assert_eq!(discretize(&rotated, c).unwrap(), map);
    }

    #[test]
    fn monotone_and_balanced(times in distinct_times(), c in 2usize..5) {
        let t = named(&times);
        let l = labels(&t, c);
        for i in 0..t.len() {
            for j in 0..t.len() {
                if t[i].1 < t[j].1 {
                    prop_assert!(l[i] <= l[j]);
                }
            }
        }
        let counts: Vec<usize> = (1..=c).map(|k| l.iter().filter(|&&x| x == k).count()).collect();
        let (lo, hi) = (counts.iter().min().unwrap(), counts.iter().max().unwrap());
        prop_assert!(hi - lo <= 1);
        if t.len() % c == 0 {
            prop_assert!(counts.iter().all(|&n| n == t.len() / c));
        }
    }

    #[test]
    fn scale_invariant(times in distinct_times(), c in 2usize..5, scale in 1e-3..1e3f64) {
        let t = named(&times);
        let scaled: Vec<(String, f64)> = t.iter().map(|(id, x)| (id.clone(), x * scale)).collect();
        prop_assert_eq!(discretize(&scaled, c).unwrap(), discretize(&t, c).unwrap());
    }

    #[test]
    fn quartile_one_is_in_the_faster_half(times in distinct_times()) {
        let n = times.len() / 4 * 4;
        let t = named(&times[..n]);
        let four = labels(&t, 4);
        let two = labels(&t, 2);
        for (a, b) in four.iter().zip(&two) {
            if *a == 1 {
                prop_assert_eq!(*b, 1);
            }
        }
    }
}
