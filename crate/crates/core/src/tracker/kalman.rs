//! Constant-velocity Kalman filter in `(cx, cy, a, h)` measurement space.
//!
//! The state is the measured box plus its per-frame velocities. Process and
//! measurement noise scale with the box height, so the filter behaves the
//! same for near and far runners.

use nalgebra::{SMatrix, SVector};
use serde::{Deserialize, Serialize};

use crate::{BBox, Error, Result};

pub type StateVec = SVector<f64, 8>;
pub type StateCov = SMatrix<f64, 8, 8>;
pub type MeasVec = SVector<f64, 4>;
pub type MeasCov = SMatrix<f64, 4, 4>;
type MeasMatrix = SMatrix<f64, 4, 8>;

/// Squared Mahalanobis gate: 0.95 quantile of chi-square with 4 degrees of
/// freedom.
pub const CHI2_95_4DOF: f64 = 9.4877;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KalmanConfig {
    /// Position standard deviation per unit of box height.
    pub std_weight_position: f64,
    /// Velocity standard deviation per unit of box height.
    pub std_weight_velocity: f64,
    /// Multiplier on the measurement noise covariance.
    pub measurement_noise_scale: f64,
}

impl Default for KalmanConfig {
    fn default() -> Self {
        Self {
            std_weight_position: 1.0 / 20.0,
            std_weight_velocity: 1.0 / 160.0,
            measurement_noise_scale: 1.0,
        }
    }
}

/// Gaussian belief over `(cx, cy, a, h, vcx, vcy, va, vh)`.
#[derive(Debug, Clone, PartialEq)]
pub struct KalmanState {
    pub mean: StateVec,
    pub covariance: StateCov,
}

impl KalmanState {
    pub fn bbox(&self) -> BBox {
        BBox::from_xyah([self.mean[0], self.mean[1], self.mean[2], self.mean[3]])
    }

    pub fn velocity(&self) -> [f64; 4] {
        [self.mean[4], self.mean[5], self.mean[6], self.mean[7]]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct KalmanFilter {
    pub config: KalmanConfig,
}

fn measurement_matrix() -> MeasMatrix {
    MeasMatrix::from_fn(|r, c| if r == c { 1.0 } else { 0.0 })
}

fn symmetrize(p: &mut StateCov) {
    *p = (*p + p.transpose()) * 0.5;
}

impl KalmanFilter {
    pub fn new(config: KalmanConfig) -> Self {
        Self { config }
    }

    /// Starts a track from an unassociated measurement with zero velocity.
    pub fn initiate(&self, bbox: &BBox) -> KalmanState {
        let z = bbox.to_xyah();
        let h = z[3];
        let (wp, wv) = (self.config.std_weight_position, self.config.std_weight_velocity);
        let std = [
            2.0 * wp * h,
            2.0 * wp * h,
            1e-2,
            2.0 * wp * h,
            10.0 * wv * h,
            10.0 * wv * h,
            1e-5,
            10.0 * wv * h,
        ];
        let mut mean = StateVec::zeros();
        mean.fixed_rows_mut::<4>(0).copy_from_slice(&z);
        KalmanState {
            mean,
            covariance: StateCov::from_diagonal(&StateVec::from_iterator(std.iter().map(|s| s * s))),
        }
    }

    /// Advances the belief by `dt` frames.
    pub fn predict(&self, s: &KalmanState, dt: f64) -> KalmanState {
        let h = s.mean[3];
        let (wp, wv) = (self.config.std_weight_position, self.config.std_weight_velocity);
        let std = [wp * h, wp * h, 1e-2, wp * h, wv * h, wv * h, 1e-5, wv * h];
        let q = StateCov::from_diagonal(&StateVec::from_iterator(std.iter().map(|s| s * s * dt.abs())));
        let mut f = StateCov::identity();
        for i in 0..4 {
            f[(i, i + 4)] = dt;
        }
        let mean = f * s.mean;
        let mut covariance = f * s.covariance * f.transpose() + q;
        symmetrize(&mut covariance);
        KalmanState { mean, covariance }
    }

    /// Measurement noise for a state, optionally inflated by `factor`.
    fn measurement_noise(&self, s: &KalmanState, factor: f64) -> MeasCov {
        let h = s.mean[3];
        let wp = self.config.std_weight_position;
        let std = [wp * h, wp * h, 1e-1, wp * h];
        MeasCov::from_diagonal(&MeasVec::from_iterator(
            std.iter().map(|s| s * s * self.config.measurement_noise_scale * factor),
        ))
    }

    /// Predicted measurement mean and innovation covariance `S = H P H^T + R`.
    pub fn project(&self, s: &KalmanState) -> (MeasVec, MeasCov) {
        let hm = measurement_matrix();
        let mean = hm * s.mean;
        let mut cov = hm * s.covariance * hm.transpose() + self.measurement_noise(s, 1.0);
        cov = (cov + cov.transpose()) * 0.5;
        (mean, cov)
    }

    /// Measurement update with the standard noise level.
    pub fn update(&self, s: &KalmanState, z: &BBox) -> Result<KalmanState> {
        self.update_inflated(s, z, 1.0)
    }

    /// Measurement update with measurement noise covariance multiplied by
    /// `factor`; used for less reliable measurements.
    ///
    /// Uses the Joseph form so the posterior covariance stays symmetric
    /// positive semi-definite under rounding.
    pub fn update_inflated(&self, s: &KalmanState, z: &BBox, factor: f64) -> Result<KalmanState> {
        if !(z.w > 0.0 && z.h > 0.0) {
            return Err(Error::Invalid("measurement must have positive width and height".into()));
        }
        let hm = measurement_matrix();
        let r = self.measurement_noise(s, factor);
        let mut sc = hm * s.covariance * hm.transpose() + r;
        sc = (sc + sc.transpose()) * 0.5;
        let chol = sc.cholesky().ok_or(Error::SingularCovariance)?;
        // K = P H^T S^-1, computed as (S^-1 H P)^T since S and P are symmetric.
        let gain: SMatrix<f64, 8, 4> = chol.solve(&(hm * s.covariance)).transpose();
        let innovation = MeasVec::from(z.to_xyah()) - hm * s.mean;
        let mean = s.mean + gain * innovation;
        let ikh = StateCov::identity() - gain * hm;
        let mut covariance = ikh * s.covariance * ikh.transpose() + gain * r * gain.transpose();
        symmetrize(&mut covariance);
        Ok(KalmanState { mean, covariance })
    }

    /// Squared Mahalanobis distance of each measurement from the predicted
    /// measurement distribution. Fails only if `S` is not positive definite.
    pub fn gating_distance(&self, s: &KalmanState, boxes: &[BBox]) -> Result<Vec<f64>> {
        let (mean, cov) = self.project(s);
        let chol = cov.cholesky().ok_or(Error::SingularCovariance)?;
        let l = chol.l();
        Ok(boxes
            .iter()
            .map(|b| {
                let d = MeasVec::from(b.to_xyah()) - mean;
                let y = l.solve_lower_triangular(&d).expect("cholesky factor is non-singular");
                y.norm_squared()
            })
            .collect())
    }

    /// `true` for each box inside the 95% chi-square gate.
    pub fn gate(&self, s: &KalmanState, boxes: &[BBox]) -> Result<Vec<bool>> {
        Ok(self
            .gating_distance(s, boxes)?
            .into_iter()
            .map(|d| d <= CHI2_95_4DOF)
            .collect())
    }
}

/// Squared Mahalanobis distance for an explicit mean and covariance.
pub fn mahalanobis_sq(mean: &MeasVec, cov: &MeasCov, z: &MeasVec) -> Result<f64> {
    let chol = cov.cholesky().ok_or(Error::SingularCovariance)?;
    let d = z - mean;
    Ok(d.dot(&chol.solve(&d)))
}
