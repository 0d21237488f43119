use super::kalman::KalmanState;
use crate::BBox;

/// Secondary single-object tracker consulted for the runner of interest
/// whenever the association step leaves it unmatched.
///
/// A visual tracker (for example a Siamese region-proposal network) can be
/// plugged in behind this trait; [`ConstantVelocityBackup`] is the built-in
/// reference.
pub trait BackupTracker {
    /// The runner of interest was associated with a detection in `frame`;
    /// `state` is the posterior after the update.
    fn observe(&mut self, frame: u64, state: &KalmanState);

    /// Box for `frame`, in which no detection was associated, or `None` if
    /// the backup has no confident proposal.
    fn propose(&mut self, frame: u64) -> Option<BBox>;
}

/// Never proposes anything.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoBackup;

impl BackupTracker for NoBackup {
    fn observe(&mut self, _frame: u64, _state: &KalmanState) {}

    fn propose(&mut self, _frame: u64) -> Option<BBox> {
        None
    }
}

/// Extrapolates the last matched state at constant velocity. Proposals are
/// withdrawn once their overlap with the last matched box drops below
/// `min_iou`.
#[derive(Debug, Clone)]
pub struct ConstantVelocityBackup {
    pub min_iou: f64,
    last: Option<(u64, [f64; 4], [f64; 4])>,
}

impl Default for ConstantVelocityBackup {
    fn default() -> Self {
        Self::new(0.1)
    }
}

impl ConstantVelocityBackup {
    pub fn new(min_iou: f64) -> Self {
        Self { min_iou, last: None }
    }
}

impl BackupTracker for ConstantVelocityBackup {
    fn observe(&mut self, frame: u64, state: &KalmanState) {
        let m = &state.mean;
        self.last = Some((frame, [m[0], m[1], m[2], m[3]], state.velocity()));
    }

    fn propose(&mut self, frame: u64) -> Option<BBox> {
        let (at, xyah, vel) = self.last?;
        if frame <= at {
            return None;
        }
        let dt = (frame - at) as f64;
        let mut next = xyah;
        for i in 0..4 {
            next[i] += vel[i] * dt;
        }
        let proposal = BBox::from_xyah(next);
        let anchor = BBox::from_xyah(xyah);
        (proposal.w > 0.0 && proposal.h > 0.0 && proposal.iou(&anchor) >= self.min_iou).then_some(proposal)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tracker::KalmanFilter;

    #[test]
    fn extrapolates_until_overlap_is_lost() {
        let mut s = KalmanFilter::default().initiate(&BBox::new(100.0, 100.0, 40.0, 100.0));
        s.mean[4] = 4.0;
        let mut b = ConstantVelocityBackup::default();
        assert_eq!(b.propose(1), None);
        b.observe(10, &s);
        let p = b.propose(12).unwrap();
        assert_eq!(p.cx, 108.0);
        assert_eq!(p.cy, 100.0);
        // 40 px wide box moving 4 px/frame: IoU falls below 0.1 after
        // 8 frames (overlap 8 px of 72 px union).
        assert!(b.propose(17).is_some());
        assert!(b.propose(19).is_none());
    }
}
