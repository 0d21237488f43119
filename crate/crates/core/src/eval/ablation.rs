use serde::{Deserialize, Serialize};

use super::{run_protocol, ProtocolConfig};
use crate::dataio::{ClipRecord, ContextMode, SplitRecord};
use crate::perf::{build_slice, Task};
use crate::Result;

pub const ABLATION_CATEGORIES: [usize; 3] = [2, 3, 4];

/// One cell of the task × categories × context table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    pub task: Task,
    pub categories: usize,
    pub mode: ContextMode,
    pub accuracy_mean: Option<f64>,
    pub accuracy_std: Option<f64>,
    /// `"83.7 ± 2.8"`, or `"n/a"` when the cell could not be evaluated.
    pub cell: String,
    /// Why the cell is `n/a`.
    pub note: Option<String>,
}

/// Runs the protocol for every (task, C, mode) in the order current/next ×
/// 2, 3, 4 × raw, bb, vibe: 18 rows. A cell whose data is missing or
/// unusable becomes an `n/a` row instead of failing the table.
pub fn ablation_table(
    records: &[ClipRecord],
    splits: &[SplitRecord],
    rp: Option<i64>,
    config: &ProtocolConfig,
) -> Result<Vec<AblationRow>> {
    config.validate()?;
    let mut rows = Vec::with_capacity(18);
    for task in [Task::Current, Task::Next] {
        for categories in ABLATION_CATEGORIES {
            for mode in ContextMode::ALL {
                let outcome = build_slice(records, splits, task, rp, mode, categories)
                    .and_then(|slice| run_protocol(&slice, config));
                rows.push(match outcome {
                    Ok(report) => AblationRow {
                        task,
                        categories,
                        mode,
                        accuracy_mean: Some(report.accuracy_mean),
                        accuracy_std: Some(report.accuracy_std),
                        cell: report.cell(),
                        note: None,
                    },
                    Err(e) => AblationRow {
                        task,
                        categories,
                        mode,
                        accuracy_mean: None,
                        accuracy_std: None,
                        cell: "n/a".into(),
                        note: Some(e.to_string()),
                    },
                });
            }
        }
    }
    Ok(rows)
}
