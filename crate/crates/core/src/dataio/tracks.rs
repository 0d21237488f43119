use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{BBox, Error, Result};

/// Where a reported box came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrackSource {
    /// Associated with a detection in this frame.
    Match,
    /// Proposed by the backup tracker while the detection was missing.
    Backup,
}

/// One line of `tracks.jsonl`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackRow {
    pub frame: u64,
    pub id: u64,
    pub bbox: BBox,
    pub source: TrackSource,
}

pub fn write_tracks(path: impl AsRef<Path>, rows: &[TrackRow]) -> Result<()> {
    let path = path.as_ref();
    let mut buf = String::new();
    for r in rows {
        buf.push_str(&serde_json::to_string(r)?);
        buf.push('\n');
    }
    fs::write(path, buf).map_err(|e| Error::io(path, e))
}

pub fn load_tracks(path: impl AsRef<Path>) -> Result<Vec<TrackRow>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| Error::parse(path, i + 1, e.to_string())))
        .collect()
}
