use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::roc::{macro_auc, RocReport};
use super::{mean_std, stratified_kfold};
use crate::dataio::ContextMode;
use crate::learners::{argmax, train, ClassifierSpec, Dataset};
use crate::perf::{DatasetSlice, RpScope, Task};
use crate::rng::{derive_seed, stream_seed};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StdMode {
    #[default]
    Population,
    Sample,
}

/// Repeated stratified cross-validation settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProtocolConfig {
    pub iterations: usize,
    pub folds: usize,
    pub master_seed: u64,
    pub classifier: ClassifierSpec,
    pub std: StdMode,
    /// Run iterations on the rayon pool. Results do not depend on it, so it
    /// is not echoed into reports.
    #[serde(skip)]
    pub parallel: bool,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        Self {
            iterations: 100,
            folds: 4,
            master_seed: 0,
            classifier: ClassifierSpec::default(),
            std: StdMode::Population,
            parallel: true,
        }
    }
}

impl ProtocolConfig {
    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::Config("iterations must be at least 1".into()));
        }
        if self.folds < 2 {
            return Err(Error::Config("folds must be at least 2".into()));
        }
        Ok(())
    }
}

/// What was evaluated and how.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMeta {
    pub task: Task,
    pub categories: usize,
    pub scope: RpScope,
    pub context_mode: ContextMode,
    pub n_examples: usize,
    pub class_counts: Vec<usize>,
    pub protocol: ProtocolConfig,
}

/// Aggregated cross-validation results.
///
/// Accuracies named `accuracy_*` and the per-iteration and per-fold lists
/// are percentages; `pooled_accuracy` is the fraction `trace / total` of
/// `confusion`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub meta: ReportMeta,
    pub accuracy_mean: f64,
    /// Spread across iterations.
    pub accuracy_std: f64,
    /// Spread across all individual folds of all iterations.
    pub accuracy_std_folds: f64,
    pub accuracy_min: f64,
    pub accuracy_max: f64,
    pub iteration_accuracies: Vec<f64>,
    pub fold_accuracies: Vec<Vec<f64>>,
    /// `confusion[true][predicted]`, pooled over every test prediction.
    pub confusion: Vec<Vec<u64>>,
    pub iteration_confusions: Vec<Vec<Vec<u64>>>,
    pub pooled_accuracy: f64,
    /// ROC over the pooled out-of-fold probabilities.
    pub roc: RocReport,
}

impl EvalReport {
    /// `"83.7 ± 2.8"`.
    pub fn cell(&self) -> String {
        format!("{:.1} ± {:.1}", self.accuracy_mean, self.accuracy_std)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}

struct IterationResult {
    fold_accuracies: Vec<f64>,
    confusion: Vec<Vec<u64>>,
    /// Out-of-fold probabilities indexed by example.
    proba: Vec<Vec<f64>>,
}

fn run_iteration(data: &Dataset, config: &ProtocolConfig, iteration: usize) -> Result<IterationResult> {
    let c = data.n_classes();
    let seed = derive_seed(config.master_seed, iteration as u64);
    let folds = stratified_kfold(data.labels(), config.folds, stream_seed(seed, "folds"))?;
    let mut in_fold = vec![usize::MAX; data.n_rows()];
    for (f, idx) in folds.iter().enumerate() {
        idx.iter().for_each(|&i| in_fold[i] = f);
    }
    let mut confusion = vec![vec![0u64; c]; c];
    let mut proba = vec![Vec::new(); data.n_rows()];
    let mut fold_accuracies = Vec::with_capacity(folds.len());
    for (f, test) in folds.iter().enumerate() {
        let train_idx: Vec<usize> = (0..data.n_rows()).filter(|&i| in_fold[i] != f).collect();
        let spec = config.classifier.with_seed(derive_seed(stream_seed(seed, "learner"), f as u64));
        let model = train(&spec, &data.subset(&train_idx))?;
        let mut correct = 0;
        for &i in test {
            let p = model.predict_proba(data.row(i))?;
            let pred = argmax(&p);
            let truth = data.labels()[i];
            confusion[truth][pred] += 1;
            correct += usize::from(pred == truth);
            proba[i] = p;
        }
        fold_accuracies.push(100.0 * correct as f64 / test.len() as f64);
    }
    Ok(IterationResult { fold_accuracies, confusion, proba })
}

/// Runs `iterations` rounds of stratified k-fold cross-validation on the
/// slice. Iteration `i` draws its folds and learner seeds from
/// `derive_seed(master_seed, i)`, so the report is identical whether
/// iterations run sequentially or in parallel.
pub fn run_protocol(slice: &DatasetSlice, config: &ProtocolConfig) -> Result<EvalReport> {
    config.validate()?;
    let data = slice.to_dataset()?;
    let counts = slice.class_counts();
    if let Some((c, &n)) = counts.iter().enumerate().find(|(_, &n)| n < config.folds) {
        return Err(Error::InsufficientData(format!(
            "class {} has {n} examples, fewer than {} folds",
            c + 1,
            config.folds
        )));
    }
    let results: Vec<IterationResult> = if config.parallel {
        (0..config.iterations)
            .into_par_iter()
            .map(|i| run_iteration(&data, config, i))
            .collect::<Result<_>>()?
    } else {
        (0..config.iterations)
            .map(|i| run_iteration(&data, config, i))
            .collect::<Result<_>>()?
    };

    let c = slice.categories;
    let sample = config.std == StdMode::Sample;
    let iteration_accuracies: Vec<f64> = results
        .iter()
        .map(|r| r.fold_accuracies.iter().sum::<f64>() / r.fold_accuracies.len() as f64)
        .collect();
    let all_folds: Vec<f64> = results.iter().flat_map(|r| r.fold_accuracies.iter().copied()).collect();
    let (accuracy_mean, accuracy_std) = mean_std(&iteration_accuracies, sample);
    let (_, accuracy_std_folds) = mean_std(&all_folds, sample);
    let mut confusion = vec![vec![0u64; c]; c];
    for r in &results {
        for (row, add) in confusion.iter_mut().zip(&r.confusion) {
            row.iter_mut().zip(add).for_each(|(a, b)| *a += b);
        }
    }
    let total: u64 = confusion.iter().flatten().sum();
    let trace: u64 = (0..c).map(|i| confusion[i][i]).sum();
    let labels: Vec<usize> = data.labels().iter().map(|y| y + 1).collect();
    let pooled_labels: Vec<usize> = results.iter().flat_map(|_| labels.iter().copied()).collect();
    let pooled_proba: Vec<Vec<f64>> = results.iter().flat_map(|r| r.proba.iter().cloned()).collect();
    let roc = macro_auc(&pooled_proba, &pooled_labels, c)?;

    Ok(EvalReport {
        meta: ReportMeta {
            task: slice.task,
            categories: c,
            scope: slice.scope,
            context_mode: slice.context_mode,
            n_examples: slice.len(),
            class_counts: counts,
            protocol: config.clone(),
        },
        accuracy_mean,
        accuracy_std,
        accuracy_std_folds,
        accuracy_min: iteration_accuracies.iter().copied().fold(f64::INFINITY, f64::min),
        accuracy_max: iteration_accuracies.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        iteration_accuracies,
        fold_accuracies: results.iter().map(|r| r.fold_accuracies.clone()).collect(),
        confusion,
        iteration_confusions: results.into_iter().map(|r| r.confusion).collect(),
        pooled_accuracy: trace as f64 / total as f64,
        roc,
    })
}
