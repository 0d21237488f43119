use std::collections::VecDeque;

use super::appearance::min_cosine_distance;
use super::kalman::KalmanState;
use crate::{BBox, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrackStatus {
    Tentative,
    Confirmed,
    Deleted,
}

/// One runner hypothesis.
#[derive(Debug, Clone, PartialEq)]
pub struct Track {
    pub id: u64,
    pub state: KalmanState,
    /// Most recent appearance features, oldest first.
    pub gallery: VecDeque<Vec<f64>>,
    pub gallery_size: usize,
    pub status: TrackStatus,
    pub hits: u32,
    pub age: u32,
    pub frames_since_update: u32,
    /// Frame and detection box that started the track.
    pub first_frame: u64,
    pub first_bbox: BBox,
    /// Frame in which the track reached `Confirmed`, if it ever did.
    pub confirmed_at: Option<u64>,
}

impl Track {
    pub fn bbox(&self) -> BBox {
        self.state.bbox()
    }

    pub fn is_confirmed(&self) -> bool {
        self.status == TrackStatus::Confirmed
    }

    pub fn was_confirmed(&self) -> bool {
        self.confirmed_at.is_some()
    }

    pub fn push_feature(&mut self, feature: Vec<f64>) {
        if self.gallery_size == 0 {
            return;
        }
        while self.gallery.len() >= self.gallery_size {
            self.gallery.pop_front();
        }
        self.gallery.push_back(feature);
    }

    /// Minimum cosine distance between `feature` and the gallery.
    pub fn appearance_cost(&self, feature: &[f64]) -> Result<f64> {
        min_cosine_distance(&self.gallery, feature)
    }

    /// Moves to `next`, ignoring transitions the lifecycle does not allow
    /// (anything out of `Deleted`, or back to `Tentative`).
    pub(crate) fn transition(&mut self, next: TrackStatus, frame: u64) {
        use TrackStatus::*;
        let allowed = matches!((self.status, next), (Tentative, Confirmed) | (Tentative, Deleted) | (Confirmed, Deleted));
        if allowed {
            self.status = next;
            if next == Confirmed {
                self.confirmed_at = Some(frame);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tracker::KalmanFilter;

    fn track() -> Track {
        let b = BBox::new(0.0, 0.0, 10.0, 20.0);
        Track {
            id: 1,
            state: KalmanFilter::default().initiate(&b),
            gallery: VecDeque::new(),
            gallery_size: 2,
            status: TrackStatus::Tentative,
            hits: 1,
            age: 1,
            frames_since_update: 0,
            first_frame: 0,
            first_bbox: b,
            confirmed_at: None,
        }
    }

    #[test]
    fn gallery_is_a_ring_buffer() {
        let mut t = track();
        t.push_feature(vec![1.0, 0.0]);
        t.push_feature(vec![0.0, 1.0]);
        t.push_feature(vec![-1.0, 0.0]);
        assert_eq!(t.gallery.len(), 2);
        assert_eq!(t.gallery[0], vec![0.0, 1.0]);
        assert!(t.appearance_cost(&[1.0, 0.0]).unwrap() > 0.99);
    }

    #[test]
    fn lifecycle_only_moves_forward() {
        let mut t = track();
        t.transition(TrackStatus::Confirmed, 3);
        assert_eq!(t.confirmed_at, Some(3));
        t.transition(TrackStatus::Tentative, 4);
        assert_eq!(t.status, TrackStatus::Confirmed);
        t.transition(TrackStatus::Deleted, 5);
        t.transition(TrackStatus::Confirmed, 6);
        assert_eq!(t.status, TrackStatus::Deleted);
        assert_eq!(t.confirmed_at, Some(3));
    }
}
