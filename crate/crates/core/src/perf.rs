//! Performance categories from split times, and labeled datasets.
//!
//! Runners at a recording point are ranked by split time (ties broken by
//! runner id) and rank `r` of `n` gets category `floor(r * C / n) + 1`, so
//! category 1 holds the fastest runners and class sizes differ by at most
//! one. For `C = 2` this is a split at the median, for `C = 4` at the
//! quartiles.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataio::{format_sig9, ClipRecord, ContextMode, SplitRecord};
use crate::learners::Dataset;
use crate::{Error, Result};

/// A performance category `1..=C`; lower is faster.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CategoryLabel {
    value: usize,
    categories: usize,
}

impl CategoryLabel {
    pub fn new(value: usize, categories: usize) -> Result<Self> {
        if categories < 2 || value == 0 || value > categories {
            return Err(Error::Invalid(format!("label {value} outside 1..={categories}")));
        }
        Ok(Self { value, categories })
    }

    pub fn value(&self) -> usize {
        self.value
    }

    pub fn categories(&self) -> usize {
        self.categories
    }

    /// Zero-based class index.
    pub fn index(&self) -> usize {
        self.value - 1
    }
}

impl fmt::Display for CategoryLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.value, self.categories)
    }
}

/// Maps each runner's split time at one RP to a category.
///
/// Fails when there are fewer runners than categories, a runner appears
/// twice, or a time is not positive.
pub fn discretize<S: AsRef<str>>(times: &[(S, f64)], categories: usize) -> Result<BTreeMap<String, CategoryLabel>> {
    if categories < 2 {
        return Err(Error::Config(format!("need at least 2 categories, got {categories}")));
    }
    let n = times.len();
    if n < categories {
        return Err(Error::InsufficientData(format!(
            "{n} runners cannot fill {categories} categories"
        )));
    }
    let mut sorted: Vec<(f64, &str)> = Vec::with_capacity(n);
    for (runner, t) in times {
        if !(t.is_finite() && *t > 0.0) {
            return Err(Error::Invalid(format!("split time for {} must be positive", runner.as_ref())));
        }
        sorted.push((*t, runner.as_ref()));
    }
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(b.1)));
    let mut out = BTreeMap::new();
    for (rank, (_, runner)) in sorted.into_iter().enumerate() {
        let label = CategoryLabel {
            value: rank * categories / n + 1,
            categories,
        };
        if out.insert(runner.to_string(), label).is_some() {
            return Err(Error::Invalid(format!("runner {runner} listed twice")));
        }
    }
    Ok(out)
}

/// One training example: clip embedding plus the category to predict.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledExample {
    pub runner_id: String,
    /// RP where the clip was recorded.
    pub rp_id: i64,
    /// RP whose split time defines the label (equal to `rp_id` for the
    /// current-RP task).
    pub target_rp: i64,
    pub context_mode: ContextMode,
    pub x: Vec<f32>,
    pub label: CategoryLabel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    /// Predict the category at the RP where the clip was recorded.
    Current,
    /// Predict the category at the following RP.
    Next,
}

impl Task {
    pub fn as_str(&self) -> &'static str {
        match self {
            Task::Current => "current",
            Task::Next => "next",
        }
    }
}

impl std::str::FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "current" | "curr" => Ok(Task::Current),
            "next" => Ok(Task::Next),
            other => Err(Error::Invalid(format!("unknown task {other:?}"))),
        }
    }
}

/// Which recording points a slice covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RpScope {
    Single(i64),
    /// Union of the per-RP datasets.
    Union,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSlice {
    pub scope: RpScope,
    pub task: Task,
    pub context_mode: ContextMode,
    pub categories: usize,
    pub examples: Vec<LabeledExample>,
}

impl DatasetSlice {
    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.categories];
        for e in &self.examples {
            counts[e.label.index()] += 1;
        }
        counts
    }

    /// Dense learner input: one row per example, zero-based labels.
    pub fn to_dataset(&self) -> Result<Dataset> {
        let rows: Vec<Vec<f64>> = self
            .examples
            .iter()
            .map(|e| e.x.iter().map(|&v| f64::from(v)).collect())
            .collect();
        let labels: Vec<usize> = self.examples.iter().map(|e| e.label.index()).collect();
        Dataset::from_rows(&rows, labels, self.categories)
    }

    /// Writes `dataset.jsonl`:
    /// `{"runner","rp","mode","label","C","logits"}` per example, where `rp`
    /// is the RP of the clip.
    pub fn write_jsonl(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut buf = String::new();
        for e in &self.examples {
            buf.push_str("{\"runner\":");
            buf.push_str(&serde_json::to_string(&e.runner_id)?);
            buf.push_str(&format!(
                ",\"rp\":{},\"mode\":\"{}\",\"label\":{},\"C\":{},\"logits\":[",
                e.rp_id,
                e.context_mode,
                e.label.value(),
                e.label.categories()
            ));
            for (j, v) in e.x.iter().enumerate() {
                if j > 0 {
                    buf.push(',');
                }
                buf.push_str(&format_sig9(*v));
            }
            buf.push_str("]}\n");
        }
        fs::write(path, buf).map_err(|e| Error::io(path, e))
    }
}

fn split_lookup(splits: &[SplitRecord]) -> HashMap<(&str, i64), f64> {
    splits.iter().map(|s| ((s.runner_id.as_str(), s.rp_id), s.split_time)).collect()
}

fn records_at<'a>(records: &'a [ClipRecord], rp: i64, mode: ContextMode) -> Vec<&'a ClipRecord> {
    records.iter().filter(|r| r.rp_id == rp && r.context_mode == mode).collect()
}

/// Current-RP dataset: clips at `rp` in `mode`, labeled by the split times
/// at `rp`. Categories are computed over the runners that have a clip.
pub fn build_current(
    records: &[ClipRecord],
    splits: &[SplitRecord],
    rp: i64,
    mode: ContextMode,
    categories: usize,
) -> Result<DatasetSlice> {
    let times = split_lookup(splits);
    let clips = records_at(records, rp, mode);
    let mut runner_times = Vec::with_capacity(clips.len());
    for c in &clips {
        let t = times.get(&(c.runner_id.as_str(), rp)).ok_or_else(|| Error::MissingSplit {
            runner: c.runner_id.clone(),
            rp,
        })?;
        runner_times.push((c.runner_id.as_str(), *t));
    }
    let labels = discretize(&runner_times, categories)?;
    let examples = clips
        .into_iter()
        .map(|c| LabeledExample {
            runner_id: c.runner_id.clone(),
            rp_id: rp,
            target_rp: rp,
            context_mode: mode,
            x: c.logits.clone(),
            label: labels[&c.runner_id],
        })
        .collect();
    Ok(DatasetSlice {
        scope: RpScope::Single(rp),
        task: Task::Current,
        context_mode: mode,
        categories,
        examples,
    })
}

/// The recording point following `rp` among those with split times.
pub fn next_rp(splits: &[SplitRecord], rp: i64) -> Result<i64> {
    splits
        .iter()
        .map(|s| s.rp_id)
        .filter(|&r| r > rp)
        .min()
        .ok_or_else(|| Error::NextRpUnavailable(format!("no recording point after RP {rp}")))
}

/// Next-RP dataset: clips at `rp` labeled by the split times at the
/// following RP. Only runners with a clip at `rp` and a time at the next RP
/// are kept, and categories are computed over that intersection.
pub fn build_next(
    records: &[ClipRecord],
    splits: &[SplitRecord],
    rp: i64,
    mode: ContextMode,
    categories: usize,
) -> Result<DatasetSlice> {
    let target = next_rp(splits, rp)?;
    let times = split_lookup(splits);
    let clips: Vec<&ClipRecord> = records_at(records, rp, mode)
        .into_iter()
        .filter(|c| times.contains_key(&(c.runner_id.as_str(), target)))
        .collect();
    if clips.is_empty() {
        return Err(Error::InsufficientData(format!(
            "no runner with a {mode} clip at RP {rp} has a split time at RP {target}"
        )));
    }
    let runner_times: Vec<(&str, f64)> = clips
        .iter()
        .map(|c| (c.runner_id.as_str(), times[&(c.runner_id.as_str(), target)]))
        .collect();
    let labels = discretize(&runner_times, categories)?;
    let examples = clips
        .into_iter()
        .map(|c| LabeledExample {
            runner_id: c.runner_id.clone(),
            rp_id: rp,
            target_rp: target,
            context_mode: mode,
            x: c.logits.clone(),
            label: labels[&c.runner_id],
        })
        .collect();
    Ok(DatasetSlice {
        scope: RpScope::Single(rp),
        task: Task::Next,
        context_mode: mode,
        categories,
        examples,
    })
}

/// Builds the slice for `task` at a single RP or, with `rp = None`, the
/// union over every RP that has clips in `mode` (for the next-RP task,
/// every RP that also has a successor).
pub fn build_slice(
    records: &[ClipRecord],
    splits: &[SplitRecord],
    task: Task,
    rp: Option<i64>,
    mode: ContextMode,
    categories: usize,
) -> Result<DatasetSlice> {
    let build = |p: i64| match task {
        Task::Current => build_current(records, splits, p, mode, categories),
        Task::Next => build_next(records, splits, p, mode, categories),
    };
    if let Some(p) = rp {
        return build(p);
    }
    let rps: BTreeSet<i64> = records.iter().filter(|r| r.context_mode == mode).map(|r| r.rp_id).collect();
    if rps.is_empty() {
        return Err(Error::InsufficientData(format!("no {mode} clips")));
    }
    let mut examples = Vec::new();
    for p in rps {
        if task == Task::Next && next_rp(splits, p).is_err() {
            continue;
        }
        examples.extend(build(p)?.examples);
    }
    if examples.is_empty() {
        return Err(Error::NextRpUnavailable("no recording point has a successor".into()));
    }
    Ok(DatasetSlice {
        scope: RpScope::Union,
        task,
        context_mode: mode,
        categories,
        examples,
    })
}
