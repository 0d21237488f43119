use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use runperf::dataio::ContextMode;
use runperf::learners::{ClassifierKind, ClassifierSpec};
use runperf::perf::Task;
use serde_json::json;

mod commands;
mod config;
mod log;

use config::RunConfig;
use log::Log;

/// Runner tracking and performance classification pipeline.
#[derive(Debug, Parser)]
#[command(name = "runperf", version)]
struct Cli {
    /// TOML run configuration; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for every random choice (data generation and evaluation).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Emit one JSON object per line on standard output.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic dataset with known labels.
    Synth(SynthArgs),
    /// Track the runner of interest through a detections file.
    Track(TrackArgs),
    /// Build a labeled dataset and write dataset.jsonl.
    Dataset(DataArgs),
    /// Run repeated cross-validation and write the report files.
    Eval(EvalArgs),
    /// Evaluate every task x categories x context mode cell.
    Ablate(EvalArgs),
    /// Re-render a saved report.json and print its summary.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long)]
    runners: Option<usize>,
    #[arg(long)]
    categories: Option<usize>,
    /// Class separation for every context mode, in noise standard deviations.
    #[arg(long)]
    separation: Option<f64>,
    #[arg(long)]
    frames: Option<usize>,
    #[arg(long)]
    clip_runners: Option<usize>,
    /// Detection gap for the runner of interest, as `START:LEN`.
    #[arg(long, value_parser = parse_dropout)]
    dropout: Option<(u64, u64)>,
    /// Make the first two runners cross paths mid-clip.
    #[arg(long)]
    crossing: bool,
    /// Also write the binary logits sidecar.
    #[arg(long)]
    sidecar: bool,
}

#[derive(Debug, Args)]
struct TrackArgs {
    #[arg(long)]
    detections: Option<PathBuf>,
    /// Runner-of-interest box in the first frame, as `cx,cy,w,h`.
    #[arg(long, value_parser = parse_bbox)]
    seed_bbox: Option<[f64; 4]>,
    /// Disable the backup tracker.
    #[arg(long)]
    no_backup: bool,
    #[arg(long)]
    feature_dim: Option<usize>,
}

#[derive(Debug, Args)]
struct DataArgs {
    #[arg(long)]
    embeddings: Option<PathBuf>,
    #[arg(long)]
    splits: Option<PathBuf>,
    #[arg(long, value_parser = parse_task)]
    task: Option<Task>,
    #[arg(long)]
    categories: Option<usize>,
    #[arg(long, value_parser = parse_mode)]
    mode: Option<ContextMode>,
    /// Restrict to one recording point instead of the union of all.
    #[arg(long)]
    rp: Option<i64>,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long)]
    folds: Option<usize>,
    /// Learner kind with default parameters; use the config file to tune.
    #[arg(long, value_parser = parse_kind)]
    classifier: Option<ClassifierKind>,
    /// Also write roc.svg and confusion.svg.
    #[arg(long)]
    svg: bool,
}

#[derive(Debug, Args)]
struct ReportArgs {
    /// Saved report.json.
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long)]
    svg: bool,
}

fn parse_dropout(s: &str) -> Result<(u64, u64), String> {
    let (a, b) = s.split_once(':').ok_or("expected START:LEN")?;
    Ok((a.parse().map_err(|e| format!("{e}"))?, b.parse().map_err(|e| format!("{e}"))?))
}

fn parse_bbox(s: &str) -> Result<[f64; 4], String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|e| format!("{e}")))
        .collect::<Result<_, _>>()?;
    <[f64; 4]>::try_from(v).map_err(|_| "expected cx,cy,w,h".to_string())
}

fn parse_task(s: &str) -> Result<Task, String> {
    match s {
        "current" => Ok(Task::Current),
        "next" => Ok(Task::Next),
        _ => Err(format!("unknown task {s:?}, expected current or next")),
    }
}

fn parse_mode(s: &str) -> Result<ContextMode, String> {
    s.parse().map_err(|e| format!("{e}"))
}

fn parse_kind(s: &str) -> Result<ClassifierKind, String> {
    s.parse().map_err(|e| format!("{e}"))
}

fn apply_data(config: &mut RunConfig, a: DataArgs) {
    let p = &mut config.paths;
    p.embeddings = a.embeddings.or(p.embeddings.take());
    p.splits = a.splits.or(p.splits.take());
    let d = &mut config.dataset;
    d.task = a.task.unwrap_or(d.task);
    d.categories = a.categories.unwrap_or(d.categories);
    d.mode = a.mode.unwrap_or(d.mode);
    d.rp = a.rp.or(d.rp);
}

fn apply_eval(config: &mut RunConfig, a: EvalArgs) {
    apply_data(config, a.data);
    let p = &mut config.protocol;
    p.iterations = a.iterations.unwrap_or(p.iterations);
    p.folds = a.folds.unwrap_or(p.folds);
    p.svg |= a.svg;
    if let Some(kind) = a.classifier {
        if kind != config.classifier.kind() {
            config.classifier = ClassifierSpec::with_defaults(kind);
        }
    }
}

fn run(cli: Cli, log: &Log) -> Result<()> {
    let mut config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    config.seed = cli.seed.or(config.seed);
    config.out = cli.out.or(config.out);

    match cli.command {
        Command::Synth(a) => {
            let s = &mut config.synth;
            s.runners = a.runners.unwrap_or(s.runners);
            s.categories = a.categories.unwrap_or(s.categories);
            if let Some(d) = a.separation {
                s.separation.values_mut().for_each(|v| *v = d);
            }
            s.frames = a.frames.unwrap_or(s.frames);
            s.clip_runners = a.clip_runners.unwrap_or(s.clip_runners);
            s.dropout = a.dropout.or(s.dropout);
            s.crossing |= a.crossing;
            commands::synth(&config, a.sidecar, log)
        }
        Command::Track(a) => {
            let t = &mut config.track;
            config.paths.detections = a.detections.or(config.paths.detections.take());
            t.seed_bbox = a.seed_bbox.or(t.seed_bbox);
            t.backup &= !a.no_backup;
            t.feature_dim = a.feature_dim.or(t.feature_dim);
            commands::track(&config, log)
        }
        Command::Dataset(a) => {
            apply_data(&mut config, a);
            commands::dataset(&config, log)
        }
        Command::Eval(a) => {
            apply_eval(&mut config, a);
            commands::eval(&config, log)
        }
        Command::Ablate(a) => {
            apply_eval(&mut config, a);
            commands::ablate(&config, log)
        }
        Command::Report(a) => {
            config.paths.report = a.report.or(config.paths.report.take());
            config.protocol.svg |= a.svg;
            commands::report(&config, log)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let log = Log::new(cli.json);
    match run(cli, &log) {
        Ok(()) => {
            log.event("done", json!({ "ok": true }), || "done".into());
            ExitCode::SUCCESS
        }
        Err(e) => {
            let message = format!("{e:#}");
            if log.is_json() {
                log.event("error", json!({ "message": message }), String::new);
            }
            eprintln!("error: {message}");
            ExitCode::FAILURE
        }
    }
}
