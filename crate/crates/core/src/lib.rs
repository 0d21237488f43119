//! Runner-of-interest tracking and performance classification.
//!
//! The crate covers the part of a race-footage analysis pipeline that sits
//! downstream of a video feature extractor:
//!
//! * [`dataio`] defines the on-disk formats (clip embeddings, split times,
//!   detections, recording-point metadata), frame context masking and a seeded
//!   synthetic dataset generator.
//! * [`tracker`] is a tracking-by-detection engine: Kalman filtering,
//!   Mahalanobis gating, appearance matching with optimal assignment, and a
//!   pluggable backup tracker for the runner of interest.
//! * [`perf`] turns split times into balanced performance categories and
//!   assembles current- and next-RP datasets.
//! * [`learners`] holds from-scratch classifiers, most importantly a
//!   softmax gradient-boosted tree ensemble.
//! * [`eval`] runs repeated stratified cross-validation and produces accuracy
//!   summaries, confusion matrices, ROC curves and context ablation tables.
//!
//! ```
//! use runperf::perf::discretize;
//!
//! let times = [("a", 10.0), ("b", 20.0), ("c", 30.0), ("d", 40.0)];
//! let labels = discretize(&times, 2).unwrap();
//! assert_eq!(labels["a"].value(), 1);
//! assert_eq!(labels["d"].value(), 2);
//! ```

pub mod bbox;
pub mod dataio;
pub mod error;
pub mod eval;
pub mod learners;
pub mod perf;
pub mod rng;
pub mod tracker;

pub use bbox::BBox;
pub use error::{Error, Result};

/// Length of every clip embedding vector.
pub const LOGITS_DIM: usize = 400;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/data.md")]
    mod data {}
    #[doc = include_str!("../../../book/src/tracking.md")]
    mod tracking {}
    #[doc = include_str!("../../../book/src/categories.md")]
    mod categories {}
    #[doc = include_str!("../../../book/src/boosting.md")]
    mod boosting {}
    #[doc = include_str!("../../../book/src/protocol.md")]
    mod protocol {}
    #[doc = include_str!("../../../book/src/command-line.md")]
    mod command_line {}
}
