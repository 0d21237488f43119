//! Seeded synthetic datasets with known ground truth.
//!
//! Class structure is planted so that every downstream stage has an exact
//! oracle:
//!
//! * Each RP's classes are balanced exactly as rank-based quantile binning
//!   would produce them, and split times sit in disjoint per-class bands, so
//!   discretizing the generated times recovers the generating labels.
//! * Logits for class `c` (0-based) are Gaussian with standard deviation
//!   `noise_std`, shifted by `c * separation * noise_std / sqrt(m)` on `m`
//!   informative coordinates. Adjacent classes are therefore `separation`
//!   standard deviations apart in Euclidean distance, and `separation = 0`
//!   makes all classes identically distributed.
//! * Next-RP classes are the previous classes with a fraction of runners
//!   swapped between classes, which keeps the class counts balanced.
//! * Detections follow constant-velocity paths with per-actor appearance
//!   prototypes; actor 0 is the runner of interest. With `crossing` set,
//!   actors 0 and 1 pass through each other at the middle frame.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::types::{ClipRecord, ContextMode, Detection, SplitRecord};
use crate::rng::{rng_from_seed, stream_seed, Rng};
use crate::{BBox, Error, Result, LOGITS_DIM};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub runners: usize,
    /// Recording points in race order.
    pub rp_ids: Vec<i64>,
    /// Runners still in the race at each RP (non-increasing, nested). `None`
    /// keeps every runner at every RP.
    pub rp_counts: Option<Vec<usize>>,
    pub categories: usize,
    /// Adjacent-class separation in units of `noise_std`, per context mode.
    /// Only the listed modes are generated.
    pub separation: BTreeMap<ContextMode, f64>,
    pub noise_std: f64,
    /// Number of logit coordinates that carry class signal. The default of 1
    /// puts the whole shift on a single coordinate.
    pub informative_features: usize,
    /// Fraction of runners whose class changes between consecutive RPs.
    pub next_flip_fraction: f64,
    /// Appearance feature length for detections.
    pub feature_dim: usize,
    pub frames: usize,
    /// Runners visible in the tracking clip; actor 0 is the runner of interest.
    pub clip_runners: usize,
    /// `(first_frame, length)` of a detection gap for the runner of interest.
    pub dropout: Option<(u64, u64)>,
    /// Per-frame appearance noise relative to the unit prototype.
    pub appearance_noise: f64,
    /// Put actors 0 and 1 on a head-on course that crosses mid-clip.
    pub crossing: bool,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            runners: 200,
            rp_ids: vec![3, 4, 5],
            rp_counts: None,
            categories: 2,
            separation: ContextMode::ALL.iter().map(|&m| (m, 4.0)).collect(),
            noise_std: 1.0,
            informative_features: 1,
            next_flip_fraction: 0.15,
            feature_dim: super::DEFAULT_FEATURE_DIM,
            // Seven seconds at 25 fps.
            frames: 175,
            clip_runners: 3,
            dropout: None,
            appearance_noise: 0.1,
            crossing: false,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.categories < 2 {
            return bad(format!("category count must be at least 2, got {}", self.categories));
        }
        if self.runners < self.categories {
            return bad(format!(
                "runner count {} is below the category count {}",
                self.runners, self.categories
            ));
        }
        if self.rp_ids.is_empty() || self.rp_ids.windows(2).any(|w| w[1] <= w[0]) {
            return bad("rp_ids must be non-empty and strictly increasing".into());
        }
        if let Some(counts) = &self.rp_counts {
            if counts.len() != self.rp_ids.len() {
                return bad("rp_counts must have one entry per RP".into());
            }
            if counts[0] > self.runners || counts.windows(2).any(|w| w[1] > w[0]) {
                return bad("rp_counts must be non-increasing and at most the runner count".into());
            }
            if counts.iter().any(|&c| c < self.categories) {
                return bad("every RP needs at least as many runners as categories".into());
            }
        }
        if self.separation.is_empty() || self.separation.values().any(|d| !(d.is_finite() && *d >= 0.0)) {
            return bad("separation must list at least one mode with a non-negative value".into());
        }
        if !(self.noise_std.is_finite() && self.noise_std > 0.0) {
            return bad("noise_std must be positive".into());
        }
        if self.informative_features == 0 || self.informative_features > LOGITS_DIM {
            return bad(format!("informative_features must be in 1..={LOGITS_DIM}"));
        }
        if !(0.0..=1.0).contains(&self.next_flip_fraction) {
            return bad("next_flip_fraction must be in [0, 1]".into());
        }
        if self.feature_dim == 0 || self.frames == 0 || self.clip_runners == 0 {
            return bad("feature_dim, frames and clip_runners must be positive".into());
        }
        if !(self.appearance_noise.is_finite() && self.appearance_noise >= 0.0) {
            return bad("appearance_noise must be non-negative".into());
        }
        Ok(())
    }

    fn count_at(&self, k: usize) -> usize {
        self.rp_counts.as_ref().map_or(self.runners, |c| c[k])
    }
}

/// Generating class of one runner at one RP, as a 1-based label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruthLabel {
    pub runner: String,
    pub rp: i64,
    pub label: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthData {
    /// Detections grouped by frame, frames `0..frames`.
    pub detections: Vec<Vec<Detection>>,
    /// Ground-truth actor index of each detection, parallel to `detections`.
    pub detection_actors: Vec<Vec<usize>>,
    /// Ground-truth box of every actor in every frame, including gaps.
    pub actor_boxes: Vec<Vec<BBox>>,
    /// Box of the runner of interest in frame 0.
    pub roi_seed: BBox,
    pub clips: Vec<ClipRecord>,
    pub splits: Vec<SplitRecord>,
    pub labels: Vec<TruthLabel>,
}

impl SynthData {
    pub fn flat_detections(&self) -> Vec<Detection> {
        self.detections.iter().flatten().cloned().collect()
    }
}

pub fn runner_name(i: usize) -> String {
    format!("bib{i:04}")
}

/// Generates a dataset; identical `(config, seed)` pairs give identical data.
pub fn generate_synthetic(config: &SynthConfig, seed: u64) -> Result<SynthData> {
    config.validate()?;
    let classes = assign_classes(config, &mut rng_from_seed(stream_seed(seed, "classes")));
    let splits = split_times(config, &classes, &mut rng_from_seed(stream_seed(seed, "times")));
    let clips = logits(config, &classes, seed);
    let (detections, detection_actors, actor_boxes) =
        detections(config, &mut rng_from_seed(stream_seed(seed, "detections")))?;

    let mut labels = Vec::new();
    for (k, per_rp) in classes.iter().enumerate() {
        for (&runner, &class) in per_rp {
            labels.push(TruthLabel {
                runner: runner_name(runner),
                rp: config.rp_ids[k],
                label: class + 1,
            });
        }
    }
    let roi_seed = actor_boxes[0][0];
    Ok(SynthData {
        detections,
        detection_actors,
        actor_boxes,
        roi_seed,
        clips,
        splits,
        labels,
    })
}

/// Per RP, 0-based class of each present runner, keyed by runner index.
fn assign_classes(config: &SynthConfig, rng: &mut Rng) -> Vec<BTreeMap<usize, usize>> {
    let c = config.categories;
    let mut order: Vec<usize> = (0..config.runners).collect();
    order.shuffle(rng);

    let mut out: Vec<BTreeMap<usize, usize>> = Vec::new();
    for k in 0..config.rp_ids.len() {
        // Presence is nested: the first `count` runners of one fixed order.
        let present = &order[..config.count_at(k)];
        let n = present.len();
        let ranked: Vec<usize> = match out.last() {
            None => present.to_vec(),
            Some(prev) => {
                let mut keyed: Vec<(usize, u64, usize)> =
                    present.iter().map(|&r| (prev[&r], rng.random::<u64>(), r)).collect();
                keyed.sort_unstable();
                keyed.into_iter().map(|(_, _, r)| r).collect()
            }
        };
        let mut classes: BTreeMap<usize, usize> =
            ranked.iter().enumerate().map(|(rank, &r)| (r, rank * c / n)).collect();

        if k > 0 {
            let pairs = (config.next_flip_fraction * n as f64 / 2.0).round() as usize;
            let mut pool: Vec<usize> = ranked.clone();
            pool.shuffle(rng);
            let mut swapped = 0;
            let mut used = vec![false; pool.len()];
            'outer: for i in 0..pool.len() {
                if swapped == pairs {
                    break;
                }
                if used[i] {
                    continue;
                }
                for j in i + 1..pool.len() {
                    if !used[j] && classes[&pool[i]] != classes[&pool[j]] {
                        let (a, b) = (classes[&pool[i]], classes[&pool[j]]);
                        classes.insert(pool[i], b);
                        classes.insert(pool[j], a);
                        used[i] = true;
                        used[j] = true;
                        swapped += 1;
                        continue 'outer;
                    }
                }
            }
        }
        out.push(classes);
    }
    out
}

const HOUR: f64 = 3600.0;
/// Time of the fastest runner at the first RP.
const FIRST_RP_OFFSET: f64 = 8.0 * HOUR;
/// Offset between consecutive RPs; exceeds `TIME_SPREAD` so every runner's
/// time strictly increases along the course.
const RP_STEP: f64 = 5.0 * HOUR;
const TIME_SPREAD: f64 = 4.0 * HOUR;

fn split_times(config: &SynthConfig, classes: &[BTreeMap<usize, usize>], rng: &mut Rng) -> Vec<SplitRecord> {
    let c = config.categories as f64;
    let mut out = Vec::new();
    for (k, per_rp) in classes.iter().enumerate() {
        let offset = FIRST_RP_OFFSET + k as f64 * RP_STEP;
        for (&runner, &class) in per_rp {
            // Disjoint bands: class `c` occupies (c + [0.02, 0.98]) / C.
            let u: f64 = rng.random_range(0.02..0.98);
            let t = offset + TIME_SPREAD * (class as f64 + u) / c;
            out.push(SplitRecord::new(runner_name(runner), config.rp_ids[k], t.round()));
        }
    }
    out.sort_by(|a, b| (a.rp_id, &a.runner_id).cmp(&(b.rp_id, &b.runner_id)));
    out
}

fn logits(config: &SynthConfig, classes: &[BTreeMap<usize, usize>], seed: u64) -> Vec<ClipRecord> {
    let sigma = config.noise_std;
    let m = config.informative_features;
    let mut out = Vec::new();
    for (&mode, &delta) in &config.separation {
        let mut rng = rng_from_seed(stream_seed(seed, &format!("logits/{mode}")));
        let base: Vec<f64> = (0..LOGITS_DIM)
            .map(|_| 2.0 * rng.sample::<f64, _>(StandardNormal))
            .collect();
        let mut informative: Vec<usize> = (0..LOGITS_DIM).collect();
        informative.shuffle(&mut rng);
        informative.truncate(m);
        let step = delta * sigma / (m as f64).sqrt();
        for (k, per_rp) in classes.iter().enumerate() {
            for (&runner, &class) in per_rp {
                let mut x: Vec<f64> = base
                    .iter()
                    .map(|&b| b + sigma * rng.sample::<f64, _>(StandardNormal))
                    .collect();
                for &j in &informative {
                    x[j] += class as f64 * step;
                }
                out.push(ClipRecord {
                    runner_id: runner_name(runner),
                    rp_id: config.rp_ids[k],
                    context_mode: mode,
                    logits: x.into_iter().map(|v| v as f32).collect(),
                });
            }
        }
    }
    out
}

type DetectionStreams = (Vec<Vec<Detection>>, Vec<Vec<usize>>, Vec<Vec<BBox>>);

fn detections(config: &SynthConfig, rng: &mut Rng) -> Result<DetectionStreams> {
    let f = config.feature_dim;
    let normal = |rng: &mut Rng| -> f64 { StandardNormal.sample(rng) };

    struct Actor {
        start: BBox,
        vx: f64,
        vy: f64,
        prototype: Vec<f64>,
    }
    let mut actors: Vec<Actor> = (0..config.clip_runners)
        .map(|_| {
            let h = rng.random_range(150.0..250.0);
            let start = BBox::new(rng.random_range(100.0..1180.0), rng.random_range(300.0..420.0), 0.4 * h, h);
            let speed = rng.random_range(2.0..6.0);
            let vx = if rng.random::<bool>() { speed } else { -speed };
            let vy = rng.random_range(-0.5..0.5);
            let proto: Vec<f64> = (0..f).map(|_| normal(rng)).collect();
            let norm = proto.iter().map(|v| v * v).sum::<f64>().sqrt();
            Actor {
                start,
                vx,
                vy,
                prototype: proto.into_iter().map(|v| v / norm).collect(),
            }
        })
        .collect();
    if config.crossing && actors.len() >= 2 {
        // Same size and speed, meeting at the image center halfway through.
        let half = config.frames as f64 / 2.0;
        let h = 200.0;
        for (a, dir) in [(0, 1.0), (1, -1.0)] {
            let speed = 4.0;
            actors[a].start = BBox::new(640.0 - dir * speed * half, 360.0 + 10.0 * dir, 0.4 * h, h);
            actors[a].vx = dir * speed;
            actors[a].vy = 0.0;
        }
    }

    let mut per_frame = Vec::with_capacity(config.frames);
    let mut per_frame_ids = Vec::with_capacity(config.frames);
    let mut boxes = vec![Vec::with_capacity(config.frames); actors.len()];
    let noise = config.appearance_noise / (f as f64).sqrt();
    for frame in 0..config.frames as u64 {
        let mut dets = Vec::new();
        let mut ids = Vec::new();
        for (a, actor) in actors.iter().enumerate() {
            let t = frame as f64;
            let truth = BBox::new(actor.start.cx + actor.vx * t, actor.start.cy + actor.vy * t, actor.start.w, actor.start.h);
            boxes[a].push(truth);
            let hidden = a == 0
                && config
                    .dropout
                    .is_some_and(|(start, len)| frame >= start && frame < start + len);
            // Jitter is drawn even for hidden frames so the stream does not
            // depend on the dropout window.
            let jitter = [normal(rng), normal(rng), normal(rng)];
            let conf = rng.random_range(0.6..1.0);
            let feat: Vec<f64> = actor.prototype.iter().map(|&p| p + noise * normal(rng)).collect();
            if hidden {
                continue;
            }
            let observed = BBox::new(truth.cx + jitter[0], truth.cy + jitter[1], truth.w, truth.h + 0.5 * jitter[2]);
            dets.push(Detection::new(frame, observed, conf, feat)?);
            ids.push(a);
        }
        per_frame.push(dets);
        per_frame_ids.push(ids);
    }
    Ok((per_frame, per_frame_ids, boxes))
}
