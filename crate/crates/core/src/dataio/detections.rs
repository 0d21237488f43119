use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::types::Detection;
use crate::{BBox, Error, Result};

/// Appearance feature length used when a caller does not configure one.
pub const DEFAULT_FEATURE_DIM: usize = 128;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Line {
    frame: u64,
    bbox: [f64; 4],
    conf: f64,
    feat: Vec<f64>,
}

/// Loads `detections.jsonl`. Features are L2-normalized on load; when
/// `feature_dim` is given every feature must have that length, otherwise all
/// lines must agree with the first one.
pub fn load_detections(path: impl AsRef<Path>, feature_dim: Option<usize>) -> Result<Vec<Detection>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut dim = feature_dim;
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let line: Line =
            serde_json::from_str(raw).map_err(|e| Error::parse(path, lineno, e.to_string()))?;
        let expected = *dim.get_or_insert(line.feat.len());
        if line.feat.len() != expected {
            return Err(Error::parse(
                path,
                lineno,
                format!("expected feature of length {expected}, found {}", line.feat.len()),
            ));
        }
        let det = Detection::new(line.frame, BBox::from(line.bbox), line.conf, line.feat)
            .map_err(|e| Error::parse(path, lineno, e.to_string()))?;
        out.push(det);
    }
    Ok(out)
}

pub fn write_detections(path: impl AsRef<Path>, detections: &[Detection]) -> Result<()> {
    let path = path.as_ref();
    let mut buf = String::new();
    for d in detections {
        let line = Line {
            frame: d.frame_index,
            bbox: d.bbox.into(),
            conf: d.confidence,
            feat: d.feature.clone(),
        };
        buf.push_str(&serde_json::to_string(&line)?);
        buf.push('\n');
    }
    fs::write(path, buf).map_err(|e| Error::io(path, e))
}
