use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{BBox, Error};

/// How much scene context was left in the frames fed to the feature
/// extractor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ContextMode {
    /// Original frames.
    Raw,
    /// Everything outside the runner's bounding box blanked.
    Bb,
    /// Fine-grained silhouette segmentation.
    Vibe,
}

impl ContextMode {
    pub const ALL: [ContextMode; 3] = [ContextMode::Raw, ContextMode::Bb, ContextMode::Vibe];

    pub fn as_str(&self) -> &'static str {
        match self {
            ContextMode::Raw => "raw",
            ContextMode::Bb => "bb",
            ContextMode::Vibe => "vibe",
        }
    }

    pub(crate) fn code(&self) -> u8 {
        match self {
            ContextMode::Raw => 0,
            ContextMode::Bb => 1,
            ContextMode::Vibe => 2,
        }
    }

    pub(crate) fn from_code(code: u8) -> Option<Self> {
        Self::ALL.get(code as usize).copied()
    }
}

impl fmt::Display for ContextMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ContextMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "raw" => Ok(ContextMode::Raw),
            "bb" => Ok(ContextMode::Bb),
            "vibe" => Ok(ContextMode::Vibe),
            other => Err(Error::Invalid(format!("unknown context mode {other:?}"))),
        }
    }
}

/// One runner x RP x context-mode clip embedding.
///
/// Logits are kept as `f32`: the text format writes nine significant digits,
/// which is exactly enough to round-trip any `f32`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClipRecord {
    pub runner_id: String,
    pub rp_id: i64,
    pub context_mode: ContextMode,
    pub logits: Vec<f32>,
}

impl ClipRecord {
    pub fn key(&self) -> (&str, i64, ContextMode) {
        (&self.runner_id, self.rp_id, self.context_mode)
    }
}

/// Elapsed race time of a runner when passing a recording point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitRecord {
    #[serde(rename = "runner")]
    pub runner_id: String,
    #[serde(rename = "rp")]
    pub rp_id: i64,
    #[serde(rename = "seconds")]
    pub split_time: f64,
}

impl SplitRecord {
    pub fn new(runner_id: impl Into<String>, rp_id: i64, split_time: f64) -> Self {
        Self {
            runner_id: runner_id.into(),
            rp_id,
            split_time,
        }
    }
}

/// A per-frame person detection with its appearance descriptor.
#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    pub frame_index: u64,
    pub bbox: BBox,
    pub confidence: f64,
    /// Unit-norm appearance feature.
    pub feature: Vec<f64>,
}

impl Detection {
    /// Builds a detection, validating the box and confidence and
    /// L2-normalizing the feature.
    pub fn new(frame_index: u64, bbox: BBox, confidence: f64, feature: Vec<f64>) -> crate::Result<Self> {
        if !bbox.is_finite() || bbox.w <= 0.0 || bbox.h <= 0.0 {
            return Err(Error::Invalid(format!(
                "bbox must have positive width and height, got {:?}",
                <[f64; 4]>::from(bbox)
            )));
        }
        if !(0.0..=1.0).contains(&confidence) {
            return Err(Error::Invalid(format!("confidence {confidence} outside [0, 1]")));
        }
        let feature = normalize(feature)?;
        Ok(Self {
            frame_index,
            bbox,
            confidence,
            feature,
        })
    }
}

pub(crate) fn normalize(mut v: Vec<f64>) -> crate::Result<Vec<f64>> {
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::Invalid("feature contains non-finite values".into()));
    }
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::Invalid("feature vector has zero norm".into()));
    }
    v.iter_mut().for_each(|x| *x /= norm);
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn detection_normalizes_feature() {
        let d = Detection::new(0, BBox::new(1.0, 1.0, 2.0, 4.0), 0.9, vec![3.0, 4.0]).unwrap();
        let n: f64 = d.feature.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!((n - 1.0).abs() <= 1e-6);
        assert_eq!(d.feature, vec![0.6, 0.8]);
    }

    #[test]
    fn detection_rejects_bad_box_and_confidence() {
        assert!(Detection::new(0, BBox::new(1.0, 1.0, -2.0, 4.0), 0.9, vec![1.0]).is_err());
        assert!(Detection::new(0, BBox::new(1.0, 1.0, 2.0, 0.0), 0.9, vec![1.0]).is_err());
        assert!(Detection::new(0, BBox::new(1.0, 1.0, 2.0, 4.0), 1.5, vec![1.0]).is_err());
        assert!(Detection::new(0, BBox::new(1.0, 1.0, 2.0, 4.0), 0.5, vec![0.0]).is_err());
    }

    #[test]
    fn context_mode_parse() {
        assert_eq!("VIBE".parse::<ContextMode>().unwrap(), ContextMode::Vibe);
        assert!("depth".parse::<ContextMode>().is_err());
        for m in ContextMode::ALL {
            assert_eq!(ContextMode::from_code(m.code()), Some(m));
        }
    }
}
