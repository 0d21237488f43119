//! Repeated stratified cross-validation and its artifacts.
//!
//! [`run_protocol`] repeats stratified k-fold cross-validation with fresh
//! shuffles (100 × 4 folds by default) and aggregates accuracy, a pooled
//! confusion matrix and ROC curves into an [`EvalReport`].
//! [`ablation_table`] runs the protocol over every task × category count ×
//! context mode cell.

mod ablation;
mod folds;
mod output;
mod protocol;
mod roc;

pub use ablation::{ablation_table, AblationRow, ABLATION_CATEGORIES};
pub use folds::stratified_kfold;
pub use output::{confusion_svg, roc_svg, write_ablation_csv, write_report};
pub use protocol::{run_protocol, EvalReport, ProtocolConfig, ReportMeta, StdMode};
pub use roc::{auc, macro_auc, roc_curve, RocCurve, RocPoint, RocReport};

/// Mean and standard deviation (population when `sample` is false).
pub(crate) fn mean_std(xs: &[f64], sample: bool) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let ss: f64 = xs.iter().map(|x| (x - mean) * (x - mean)).sum();
    let denom = if sample { n - 1.0 } else { n };
    let std = if denom > 0.0 { (ss / denom).sqrt() } else { 0.0 };
    (mean, std)
}
