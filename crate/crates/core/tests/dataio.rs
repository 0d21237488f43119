use std::collections::BTreeMap;

use runperf::dataio::{
    generate_synthetic, load_detections, load_embeddings, load_logits_sidecar, load_rpinfo, load_split_times,
    load_tracks, parse_split_times, tgc_recording_points, write_detections, write_embeddings, write_logits_sidecar,
    write_rpinfo, write_split_times, write_tracks, ContextMode, SynthConfig, TrackRow, TrackSource,
};
use runperf::perf::{build_current, build_next, discretize};

fn small_config() -> SynthConfig {
    let mut config = SynthConfig::default();
    config.runners = 24;
    config.frames = 30;
    config
}

#[test]
fn text_round_trip_is_value_exact() {
    let data = generate_synthetic(&small_config(), 11).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("embeddings.jsonl");
    write_embeddings(&path, &data.clips).unwrap();
    assert_eq!(load_embeddings(&path).unwrap(), data.clips);

    let splits = dir.path().join("splits.csv");
    write_split_times(&splits, &data.splits).unwrap();
    assert_eq!(load_split_times(&splits).unwrap(), data.splits);

    let dets = dir.path().join("detections.jsonl");
    let flat = data.flat_detections();
    write_detections(&dets, &flat).unwrap();
    let back = load_detections(&dets, Some(small_config().feature_dim)).unwrap();
    assert_eq!(back.len(), flat.len());
    for (a, b) in back.iter().zip(&flat) {
        assert_eq!(a.frame_index, b.frame_index);
        assert_eq!(a.bbox, b.bbox);
        assert!(a.feature.iter().zip(&b.feature).all(|(x, y)| (x - y).abs() < 1e-12));
    }
}

#[test]
fn sidecar_round_trip_is_bit_exact() {
    let data = generate_synthetic(&small_config(), 12).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("logits.bin");
    write_logits_sidecar(&path, &data.clips).unwrap();
    let back = load_logits_sidecar(&path).unwrap();
    assert_eq!(back.len(), data.clips.len());
    for (a, b) in back.iter().zip(&data.clips) {
        assert_eq!(a.key(), b.key());
        let bits = |r: &runperf::dataio::ClipRecord| r.logits.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(a), bits(b));
    }
    let again = dir.path().join("again.bin");
    write_logits_sidecar(&again, &back).unwrap();
    assert_eq!(std::fs::read(&path).unwrap(), std::fs::read(&again).unwrap());
}

#[test]
fn seeds_determine_the_data() {
    let config = small_config();
    let a = generate_synthetic(&config, 5).unwrap();
    let b = generate_synthetic(&config, 5).unwrap();
    let c = generate_synthetic(&config, 6).unwrap();
    assert_eq!(a.clips, b.clips);
    assert_eq!(a.splits, b.splits);
    assert_eq!(a.flat_detections(), b.flat_detections());
    let boxes = |d: &runperf::dataio::SynthData| d.flat_detections().iter().map(|x| x.bbox).collect::<Vec<_>>();
    assert_ne!(boxes(&a), boxes(&c));
}

#[test]
fn discretizing_generated_times_recovers_labels() {
    let mut config = small_config();
    config.categories = 3;
    let data = generate_synthetic(&config, 7).unwrap();
    for &rp in &config.rp_ids {
        let times: Vec<(&str, f64)> = data
            .splits
            .iter()
            .filter(|s| s.rp_id == rp)
            .map(|s| (s.runner_id.as_str(), s.split_time))
            .collect();
        let labels = discretize(&times, 3).unwrap();
        for t in data.labels.iter().filter(|t| t.rp == rp) {
            assert_eq!(labels[&t.runner].value(), t.label);
        }
    }
}

#[test]
fn race_sized_counts() {
    let rps = tgc_recording_points();
    let counts: Vec<usize> = rps[2..].iter().map(|r| r.annotated_runners as usize).collect();
    assert_eq!(counts, vec![203, 139, 114]);

    let mut config = SynthConfig::default();
    config.runners = 203;
    config.rp_counts = Some(counts);
    config.frames = 10;
    config.separation = BTreeMap::from([(ContextMode::Raw, 2.0)]);
    let data = generate_synthetic(&config, 1).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("embeddings.jsonl");
    write_embeddings(&path, &data.clips).unwrap();
    let loaded = load_embeddings(&path).unwrap();
    assert_eq!(loaded.iter().filter(|r| r.rp_id == 3).count(), 203);

    let current = build_current(&loaded, &data.splits, 3, ContextMode::Raw, 2).unwrap();
    assert_eq!(current.len(), 203);
    let next = build_next(&loaded, &data.splits, 3, ContextMode::Raw, 2).unwrap();
    assert!(next.len() <= 139);
}

#[test]
fn race_long_splits_are_accepted() {
    let text = "runner,rp,seconds\nwinner,3,28200\nwinner,5,46800\nlast,3,60000\nlast,5,108000\n";
    let splits = parse_split_times(text, "splits.csv").unwrap();
    assert_eq!(splits.len(), 4);
    assert_eq!(splits[3].split_time, 30.0 * 3600.0);
}

#[test]
fn tracks_and_rpinfo_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let rows = vec![
        TrackRow { frame: 0, id: 1, bbox: runperf::BBox::new(10.5, 20.0, 4.0, 9.0), source: TrackSource::Match },
        TrackRow { frame: 1, id: 1, bbox: runperf::BBox::new(11.25, 20.0, 4.0, 9.0), source: TrackSource::Backup },
    ];
    let path = dir.path().join("tracks.jsonl");
    write_tracks(&path, &rows).unwrap();
    assert_eq!(load_tracks(&path).unwrap(), rows);

    let rps = tgc_recording_points();
    let path = dir.path().join("rpinfo.csv");
    write_rpinfo(&path, &rps).unwrap();
    assert_eq!(load_rpinfo(&path).unwrap(), rps);
}

#[test]
fn invalid_configs_are_rejected() {
    let mut config = small_config();
    config.categories = 1;
    assert!(generate_synthetic(&config, 0).is_err());
    let mut config = small_config();
    config.runners = 1;
    assert!(generate_synthetic(&config, 0).is_err());
}
