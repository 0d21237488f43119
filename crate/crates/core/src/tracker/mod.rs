//! Tracking by detection for the runner of interest.
//!
//! Each frame the [`Tracker`] predicts every track forward with a
//! constant-velocity [`KalmanFilter`], associates detections in a matching
//! cascade that favors recently seen tracks (appearance cost, Mahalanobis
//! gating, optimal [`assign`]ment), falls back to box overlap for young
//! tracks, and manages the tentative/confirmed/deleted lifecycle. When the
//! runner of interest goes unmatched, a [`BackupTracker`] may supply a box
//! that is fused as a low-confidence measurement.

mod appearance;
mod assignment;
mod backup;
mod engine;
mod kalman;
mod track;

pub use appearance::min_cosine_distance;
pub use assignment::{assign, AssignmentResult, GATED_COST};
pub use backup::{BackupTracker, ConstantVelocityBackup, NoBackup};
pub use engine::{select_runner_of_interest, Tracker, TrackerConfig};
pub use kalman::{
    mahalanobis_sq, KalmanConfig, KalmanFilter, KalmanState, MeasCov, MeasVec, StateCov, StateVec,
    CHI2_95_4DOF,
};
pub use track::{Track, TrackStatus};
