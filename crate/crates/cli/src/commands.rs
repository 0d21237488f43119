use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use runperf::dataio::{
    generate_synthetic, load_detections, load_embeddings, load_split_times, load_tracks, write_detections,
    write_embeddings, write_logits_sidecar, write_split_times, write_tracks, Detection, TrackRow,
};
use runperf::eval::{ablation_table, run_protocol, write_ablation_csv, write_report, EvalReport};
use runperf::perf::build_slice;
use runperf::tracker::{select_runner_of_interest, BackupTracker, ConstantVelocityBackup, NoBackup, Tracker};
use runperf::BBox;
use serde_json::json;

use crate::config::{require, Paths, RunConfig};
use crate::log::Log;

fn out_dir(config: &RunConfig) -> Result<PathBuf> {
    let dir = config.out_dir();
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(dir)
}

pub fn synth(config: &RunConfig, sidecar: bool, log: &Log) -> Result<()> {
    let dir = out_dir(config)?;
    let data = generate_synthetic(&config.synth, config.seed())?;

    let embeddings = dir.join("embeddings.jsonl");
    let splits = dir.join("splits.csv");
    let detections = dir.join("detections.jsonl");
    let labels = dir.join("labels.csv");
    write_embeddings(&embeddings, &data.clips)?;
    write_split_times(&splits, &data.splits)?;
    write_detections(&detections, &data.flat_detections())?;
    let mut text = String::from("runner,rp,label\n");
    for t in &data.labels {
        text.push_str(&format!("{},{},{}\n", t.runner, t.rp, t.label));
    }
    fs::write(&labels, text).with_context(|| format!("writing {}", labels.display()))?;

    // A config that points the later stages at the generated files.
    let mut run = config.clone();
    run.out = Some(PathBuf::from("."));
    run.paths = Paths {
        embeddings: Some("embeddings.jsonl".into()),
        splits: Some("splits.csv".into()),
        detections: Some("detections.jsonl".into()),
        report: None,
    };
    run.track.seed_bbox = Some(data.roi_seed.into());
    run.track.feature_dim = Some(config.synth.feature_dim);
    let run_toml = dir.join("run.toml");
    fs::write(&run_toml, run.to_toml()?).with_context(|| format!("writing {}", run_toml.display()))?;

    load_embeddings(&embeddings)?;
    load_split_times(&splits)?;
    load_detections(&detections, Some(config.synth.feature_dim))?;
    let mut written = vec![embeddings, splits, detections, labels, run_toml];
    if sidecar {
        let path = dir.join("logits.bin");
        write_logits_sidecar(&path, &data.clips)?;
        runperf::dataio::load_logits_sidecar(&path)?;
        written.push(path);
    }
    for p in &written {
        log.file(p)?;
    }
    log.event(
        "synth",
        json!({ "clips": data.clips.len(), "splits": data.splits.len(), "frames": data.detections.len() }),
        || {
            format!(
                "{} clips, {} split times, {} frames",
                data.clips.len(),
                data.splits.len(),
                data.detections.len()
            )
        },
    );
    Ok(())
}

pub fn track(config: &RunConfig, log: &Log) -> Result<()> {
    let path = require(&config.paths.detections, "--detections")?;
    let seed = config
        .track
        .seed_bbox
        .context("no runner-of-interest box: pass --seed-bbox cx,cy,w,h or set track.seed_bbox")?;
    let seed = BBox::from(seed);
    let detections = load_detections(path, config.track.feature_dim)?;
    if detections.is_empty() {
        bail!("{} contains no detections", path.display());
    }
    let mut frames: BTreeMap<u64, Vec<Detection>> = BTreeMap::new();
    for d in detections {
        frames.entry(d.frame_index).or_default().push(d);
    }
    let first = *frames.keys().next().unwrap();
    let last = *frames.keys().next_back().unwrap();

    let mut tracker = Tracker::new(config.track.tracker);
    tracker.set_roi_seed(seed);
    let mut backup: Box<dyn BackupTracker> = if config.track.backup {
        Box::new(ConstantVelocityBackup::default())
    } else {
        Box::new(NoBackup)
    };
    let mut rows: Vec<TrackRow> = Vec::new();
    for f in first..=last {
        let dets = frames.get(&f).map_or(&[][..], Vec::as_slice);
        rows.extend(tracker.step(f, dets, backup.as_mut())?);
    }
    let roi = match tracker.roi() {
        Some(id) => id,
        None => select_runner_of_interest(tracker.all_tracks(), &seed)?,
    };
    let roi_rows: Vec<TrackRow> = rows.iter().filter(|r| r.id == roi).cloned().collect();

    let dir = out_dir(config)?;
    let tracks = dir.join("tracks.jsonl");
    let all = dir.join("all_tracks.jsonl");
    write_tracks(&tracks, &roi_rows)?;
    write_tracks(&all, &rows)?;
    load_tracks(&tracks)?;
    load_tracks(&all)?;
    log.file(&tracks)?;
    log.file(&all)?;
    let backup_frames = roi_rows.iter().filter(|r| r.source == runperf::dataio::TrackSource::Backup).count();
    let ids = tracker.all_tracks().iter().filter(|t| t.was_confirmed()).count();
    log.event(
        "track",
        json!({ "roi": roi, "frames": roi_rows.len(), "backup_frames": backup_frames, "confirmed_tracks": ids }),
        || format!("runner of interest: track {roi}, {} frames ({backup_frames} from backup)", roi_rows.len()),
    );
    Ok(())
}

fn load_inputs(config: &RunConfig) -> Result<(Vec<runperf::dataio::ClipRecord>, Vec<runperf::dataio::SplitRecord>)> {
    let embeddings = require(&config.paths.embeddings, "--embeddings")?;
    let splits = require(&config.paths.splits, "--splits")?;
    Ok((load_embeddings(embeddings)?, load_split_times(splits)?))
}

pub fn dataset(config: &RunConfig, log: &Log) -> Result<()> {
    let (records, splits) = load_inputs(config)?;
    let d = &config.dataset;
    let slice = build_slice(&records, &splits, d.task, d.rp, d.mode, d.categories)?;
    let path = out_dir(config)?.join("dataset.jsonl");
    slice.write_jsonl(&path)?;
    log.file(&path)?;
    let counts = slice.class_counts();
    log.event("dataset", json!({ "examples": slice.len(), "class_counts": counts }), || {
        format!("{} examples, class counts {counts:?}", slice.len())
    });
    Ok(())
}

fn summarize(report: &EvalReport, log: &Log) {
    log.event(
        "report",
        json!({
            "accuracy_mean": report.accuracy_mean,
            "accuracy_std": report.accuracy_std,
            "cell": report.cell(),
            "auc": report.roc.auc,
            "n_examples": report.meta.n_examples,
        }),
        || format!("accuracy {} (AUC {:.3}, n = {})", report.cell(), report.roc.auc, report.meta.n_examples),
    );
}

fn write_and_log(report: &EvalReport, dir: &Path, svg: bool, log: &Log) -> Result<()> {
    let files = write_report(report, dir, svg)?;
    let json_path = dir.join("report.json");
    let back: EvalReport = serde_json::from_str(&fs::read_to_string(&json_path)?)
        .with_context(|| format!("validating {}", json_path.display()))?;
    if back.confusion != report.confusion {
        bail!("{} did not round-trip", json_path.display());
    }
    for f in &files {
        log.file(f)?;
    }
    Ok(())
}

pub fn eval(config: &RunConfig, log: &Log) -> Result<()> {
    let (records, splits) = load_inputs(config)?;
    let d = &config.dataset;
    let slice = build_slice(&records, &splits, d.task, d.rp, d.mode, d.categories)?;
    let report = run_protocol(&slice, &config.protocol_config())?;
    write_and_log(&report, &out_dir(config)?, config.protocol.svg, log)?;
    summarize(&report, log);
    Ok(())
}

pub fn ablate(config: &RunConfig, log: &Log) -> Result<()> {
    let (records, splits) = load_inputs(config)?;
    let rows = ablation_table(&records, &splits, config.dataset.rp, &config.protocol_config())?;
    let path = out_dir(config)?.join("ablation.csv");
    write_ablation_csv(&rows, &path)?;
    log.file(&path)?;
    for r in &rows {
        log.event("cell", serde_json::to_value(r)?, || {
            format!("{:<7} C={} {:<4} {}", r.task.as_str(), r.categories, r.mode.as_str(), r.cell)
        });
    }
    Ok(())
}

pub fn report(config: &RunConfig, log: &Log) -> Result<()> {
    let dir = out_dir(config)?;
    let path = config.paths.report.clone().unwrap_or_else(|| dir.join("report.json"));
    let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    let report: EvalReport = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    write_and_log(&report, &dir, config.protocol.svg, log)?;
    summarize(&report, log);
    Ok(())
}
