use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::assignment::{assign, GATED_COST};
use super::backup::BackupTracker;
use super::kalman::{KalmanConfig, KalmanFilter, CHI2_95_4DOF};
use super::track::{Track, TrackStatus};
use crate::dataio::{Detection, TrackRow, TrackSource};
use crate::{BBox, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrackerConfig {
    pub kalman: KalmanConfig,
    /// Missed frames before a confirmed track is deleted; also the depth of
    /// the matching cascade.
    pub max_age: u32,
    /// Consecutive hits needed to confirm a track.
    pub n_init: u32,
    pub gallery_size: usize,
    /// Appearance matches above this cosine distance are rejected.
    pub max_cosine_distance: f64,
    /// Overlap matches above this `1 - IoU` are rejected.
    pub max_iou_distance: f64,
    /// Weight of the Mahalanobis distance in the association cost;
    /// `0` uses appearance alone.
    pub motion_weight: f64,
    /// Measurement covariance multiplier for backup-tracker boxes.
    pub backup_noise_inflation: f64,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        Self {
            kalman: KalmanConfig::default(),
            max_age: 30,
            n_init: 3,
            gallery_size: 100,
            max_cosine_distance: 0.2,
            max_iou_distance: 0.7,
            motion_weight: 0.0,
            backup_noise_inflation: 4.0,
        }
    }
}

/// Multi-target tracker with runner-of-interest backup fusion.
///
/// ```
/// use runperf::dataio::Detection;
/// use runperf::tracker::{NoBackup, Tracker, TrackerConfig};
/// use runperf::BBox;
///
/// let mut tracker = Tracker::new(TrackerConfig::default());
/// let mut ids = Vec::new();
/// for frame in 0..10u64 {
///     let bbox = BBox::new(100.0 + 3.0 * frame as f64, 200.0, 40.0, 100.0);
///     let det = Detection::new(frame, bbox, 0.9, vec![1.0, 0.0, 0.0]).unwrap();
///     for row in tracker.step(frame, &[det], &mut NoBackup).unwrap() {
///         ids.push(row.id);
///     }
/// }
/// // Confirmed after three hits, then the same id every frame.
/// assert_eq!(ids, vec![1; 8]);
/// ```
#[derive(Debug, Clone)]
pub struct Tracker {
    config: TrackerConfig,
    kf: KalmanFilter,
    tracks: Vec<Track>,
    retired: Vec<Track>,
    next_id: u64,
    roi_seed: Option<BBox>,
    roi: Option<u64>,
}

impl Tracker {
    pub fn new(config: TrackerConfig) -> Self {
        Self {
            kf: KalmanFilter::new(config.kalman),
            config,
            tracks: Vec::new(),
            retired: Vec::new(),
            next_id: 1,
            roi_seed: None,
            roi: None,
        }
    }

    pub fn config(&self) -> &TrackerConfig {
        &self.config
    }

    /// Live (tentative or confirmed) tracks.
    pub fn tracks(&self) -> &[Track] {
        &self.tracks
    }

    /// Every track ever created, live and deleted, in id order.
    pub fn all_tracks(&self) -> Vec<&Track> {
        let mut all: Vec<&Track> = self.tracks.iter().chain(&self.retired).collect();
        all.sort_by_key(|t| t.id);
        all
    }

    /// Designates the runner of interest as the first confirmed track that
    /// best overlaps `seed` (see [`select_runner_of_interest`]).
    pub fn set_roi_seed(&mut self, seed: BBox) {
        self.roi_seed = Some(seed);
        self.roi = None;
    }

    pub fn set_roi(&mut self, id: u64) {
        self.roi = Some(id);
    }

    pub fn roi(&self) -> Option<u64> {
        self.roi
    }

    /// Processes one frame and returns the boxes of confirmed tracks
    /// associated in it, plus the runner of interest if the backup tracker
    /// stood in for a missing detection. Rows are sorted by track id.
    pub fn step(
        &mut self,
        frame: u64,
        detections: &[Detection],
        backup: &mut dyn BackupTracker,
    ) -> Result<Vec<TrackRow>> {
        for t in &mut self.tracks {
            t.state = self.kf.predict(&t.state, 1.0);
            t.age += 1;
            t.frames_since_update += 1;
        }

        let (matches, unmatched_tracks, unmatched_dets) = self.associate(detections)?;

        let mut rows = Vec::new();
        for &(ti, di) in &matches {
            let det = &detections[di];
            let t = &mut self.tracks[ti];
            t.state = self.kf.update(&t.state, &det.bbox)?;
            t.push_feature(det.feature.clone());
            t.hits += 1;
            t.frames_since_update = 0;
            if t.status == TrackStatus::Tentative && t.hits >= self.config.n_init {
                t.transition(TrackStatus::Confirmed, frame);
            }
            if t.is_confirmed() {
                rows.push(TrackRow {
                    frame,
                    id: t.id,
                    bbox: t.bbox(),
                    source: TrackSource::Match,
                });
            }
            if Some(t.id) == self.roi {
                backup.observe(frame, &t.state);
            }
        }

        for &ti in &unmatched_tracks {
            let t = &mut self.tracks[ti];
            if t.status == TrackStatus::Tentative || t.frames_since_update > self.config.max_age {
                t.transition(TrackStatus::Deleted, frame);
                continue;
            }
            if Some(t.id) == self.roi {
                if let Some(proposal) = backup.propose(frame) {
                    t.state = self
                        .kf
                        .update_inflated(&t.state, &proposal, self.config.backup_noise_inflation)?;
                    rows.push(TrackRow {
                        frame,
                        id: t.id,
                        bbox: t.bbox(),
                        source: TrackSource::Backup,
                    });
                }
            }
        }

        for &di in &unmatched_dets {
            self.initiate(frame, &detections[di]);
        }

        let (live, dead): (Vec<Track>, Vec<Track>) =
            self.tracks.drain(..).partition(|t| t.status != TrackStatus::Deleted);
        self.tracks = live;
        self.retired.extend(dead);

        if self.roi.is_none() {
            if let Some(seed) = self.roi_seed {
                if let Ok(id) = select_runner_of_interest(&self.tracks, &seed) {
                    self.roi = Some(id);
                    if let Some(t) = self.tracks.iter().find(|t| t.id == id) {
                        backup.observe(frame, &t.state);
                    }
                }
            }
        }

        rows.sort_by_key(|r| r.id);
        Ok(rows)
    }

    fn initiate(&mut self, frame: u64, det: &Detection) {
        let mut track = Track {
            id: self.next_id,
            state: self.kf.initiate(&det.bbox),
            gallery: VecDeque::new(),
            gallery_size: self.config.gallery_size,
            status: TrackStatus::Tentative,
            hits: 1,
            age: 1,
            frames_since_update: 0,
            first_frame: frame,
            first_bbox: det.bbox,
            confirmed_at: None,
        };
        track.push_feature(det.feature.clone());
        if track.hits >= self.config.n_init {
            track.transition(TrackStatus::Confirmed, frame);
        }
        self.next_id += 1;
        self.tracks.push(track);
    }

    /// Matching cascade over confirmed tracks by time since last update,
    /// then overlap matching for tentative and just-missed tracks.
    #[allow(clippy::type_complexity)]
    fn associate(&self, detections: &[Detection]) -> Result<(Vec<(usize, usize)>, Vec<usize>, Vec<usize>)> {
        let boxes: Vec<BBox> = detections.iter().map(|d| d.bbox).collect();
        let mut unmatched_dets: Vec<usize> = (0..detections.len()).collect();
        let mut matches: Vec<(usize, usize)> = Vec::new();

        let confirmed: Vec<usize> = (0..self.tracks.len()).filter(|&i| self.tracks[i].is_confirmed()).collect();
        let unconfirmed: Vec<usize> = (0..self.tracks.len()).filter(|&i| !self.tracks[i].is_confirmed()).collect();

        let lambda = self.config.motion_weight;
        for level in 0..self.config.max_age {
            if unmatched_dets.is_empty() {
                break;
            }
            let level_tracks: Vec<usize> = confirmed
                .iter()
                .copied()
                .filter(|&i| self.tracks[i].frames_since_update == 1 + level)
                .collect();
            if level_tracks.is_empty() {
                continue;
            }
            let mut cost = vec![vec![GATED_COST; unmatched_dets.len()]; level_tracks.len()];
            for (r, &ti) in level_tracks.iter().enumerate() {
                let track = &self.tracks[ti];
                let cand: Vec<BBox> = unmatched_dets.iter().map(|&d| boxes[d]).collect();
                let maha = self.kf.gating_distance(&track.state, &cand)?;
                for (c, &di) in unmatched_dets.iter().enumerate() {
                    if maha[c] > CHI2_95_4DOF {
                        continue;
                    }
                    let app = track.appearance_cost(&detections[di].feature)?;
                    if app > self.config.max_cosine_distance {
                        continue;
                    }
                    cost[r][c] = lambda * maha[c] + (1.0 - lambda) * app;
                }
            }
            let result = assign(&cost);
            for &(r, c) in &result.matches {
                matches.push((level_tracks[r], unmatched_dets[c]));
            }
            unmatched_dets = result.unmatched_cols.iter().map(|&c| unmatched_dets[c]).collect();
        }

        let matched_tracks: Vec<usize> = matches.iter().map(|m| m.0).collect();
        let mut iou_candidates = unconfirmed;
        let mut unmatched_tracks: Vec<usize> = Vec::new();
        for &ti in &confirmed {
            if matched_tracks.contains(&ti) {
                continue;
            }
            if self.tracks[ti].frames_since_update == 1 {
                iou_candidates.push(ti);
            } else {
                unmatched_tracks.push(ti);
            }
        }
        iou_candidates.sort_unstable();

        if !iou_candidates.is_empty() && !unmatched_dets.is_empty() {
            let mut cost = vec![vec![GATED_COST; unmatched_dets.len()]; iou_candidates.len()];
            for (r, &ti) in iou_candidates.iter().enumerate() {
                let pred = self.tracks[ti].bbox();
                for (c, &di) in unmatched_dets.iter().enumerate() {
                    let d = 1.0 - pred.iou(&boxes[di]);
                    if d <= self.config.max_iou_distance {
                        cost[r][c] = d;
                    }
                }
            }
            let result = assign(&cost);
            for &(r, c) in &result.matches {
                matches.push((iou_candidates[r], unmatched_dets[c]));
            }
            unmatched_tracks.extend(result.unmatched_rows.iter().map(|&r| iou_candidates[r]));
            unmatched_dets = result.unmatched_cols.iter().map(|&c| unmatched_dets[c]).collect();
        } else {
            unmatched_tracks.extend(iou_candidates);
        }
        unmatched_tracks.sort_unstable();
        Ok((matches, unmatched_tracks, unmatched_dets))
    }
}

/// Picks the runner of interest: among tracks that are or were confirmed,
/// the one whose first box overlaps `seed` most, ties going to the lower
/// id. Fails if no such track overlaps the seed at all.
pub fn select_runner_of_interest<'a>(
    tracks: impl IntoIterator<Item = &'a Track>,
    seed: &BBox,
) -> Result<u64> {
    let mut best: Option<(f64, u64)> = None;
    for t in tracks {
        if !(t.is_confirmed() || t.was_confirmed()) {
            continue;
        }
        let iou = t.first_bbox.iou(seed);
        if iou <= 0.0 {
            continue;
        }
        let better = match best {
            None => true,
            Some((b_iou, b_id)) => iou > b_iou || (iou == b_iou && t.id < b_id),
        };
        if better {
            best = Some((iou, t.id));
        }
    }
    best.map(|(_, id)| id).ok_or_else(|| {
        Error::InsufficientData("no confirmed track overlaps the runner-of-interest seed box".into())
    })
}
