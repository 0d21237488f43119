use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Recording point metadata, one row of the race's camera table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RpInfo {
    pub rp_id: i64,
    pub km: f64,
    /// Offset from race start at which recording began, `hh:mm`.
    pub start_rec_time: String,
    pub footage_frames: u64,
    pub annotated_runners: u32,
}

#[derive(Serialize, Deserialize)]
struct Row {
    location: String,
    km: f64,
    start_rec_time: String,
    footage_frames: u64,
    annotated_runners: u32,
}

/// The five recording points of the 2020 Transgrancanaria Classic footage.
/// The last three (RP3 to RP5) are the ones used for performance analysis.
pub fn tgc_recording_points() -> Vec<RpInfo> {
    [
        (1, 16.5, "00:06", 140_616, 419),
        (2, 27.9, "01:08", 432_624, 586),
        (3, 84.2, "07:50", 667_872, 203),
        (4, 110.5, "10:20", 1_001_208, 139),
        (5, 124.5, "11:20", 1_462_056, 114),
    ]
    .into_iter()
    .map(|(rp_id, km, t, footage_frames, annotated_runners)| RpInfo {
        rp_id,
        km,
        start_rec_time: t.to_string(),
        footage_frames,
        annotated_runners,
    })
    .collect()
}

fn parse_hhmm(s: &str) -> Option<(u32, u32)> {
    let (h, m) = s.split_once(':')?;
    if h.is_empty() || m.len() != 2 {
        return None;
    }
    let h: u32 = h.parse().ok()?;
    let m: u32 = m.parse().ok()?;
    (m < 60).then_some((h, m))
}

/// Loads `rpinfo.csv`; columns
/// `location,km,start_rec_time,footage_frames,annotated_runners`, with
/// locations written `RP<id>`. Kilometers must increase with the RP id.
pub fn load_rpinfo(path: impl AsRef<Path>) -> Result<Vec<RpInfo>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| Error::parse(path, 1, e.to_string()))?
        .clone();
    let mut out: Vec<RpInfo> = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| Error::parse(path, 0, e.to_string()))?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
        let row: Row = rec
            .deserialize(Some(&headers))
            .map_err(|e| Error::parse(path, line, e.to_string()))?;
        let rp_id: i64 = row
            .location
            .strip_prefix("RP")
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::parse(path, line, format!("bad location {:?}", row.location)))?;
        if parse_hhmm(&row.start_rec_time).is_none() {
            return Err(Error::parse(path, line, format!("bad hh:mm time {:?}", row.start_rec_time)));
        }
        out.push(RpInfo {
            rp_id,
            km: row.km,
            start_rec_time: row.start_rec_time,
            footage_frames: row.footage_frames,
            annotated_runners: row.annotated_runners,
        });
    }
    let mut sorted = out.clone();
    sorted.sort_by_key(|r| r.rp_id);
    for w in sorted.windows(2) {
        if w[1].rp_id == w[0].rp_id {
            return Err(Error::Invalid(format!("duplicate RP{}", w[0].rp_id)));
        }
        if w[1].km <= w[0].km {
            return Err(Error::Invalid(format!(
                "km must increase with RP id: RP{} at {} km, RP{} at {} km",
                w[0].rp_id, w[0].km, w[1].rp_id, w[1].km
            )));
        }
    }
    Ok(out)
}

pub fn write_rpinfo(path: impl AsRef<Path>, rps: &[RpInfo]) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    for r in rps {
        w.serialize(Row {
            location: format!("RP{}", r.rp_id),
            km: r.km,
            start_rec_time: r.start_rec_time.clone(),
            footage_frames: r.footage_frames,
            annotated_runners: r.annotated_runners,
        })
        .map_err(|e| Error::Invalid(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Invalid(e.to_string()))?;
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_round_trip_and_counts() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("rpinfo.csv");
        let rps = tgc_recording_points();
        write_rpinfo(&p, &rps).unwrap();
        let back = load_rpinfo(&p).unwrap();
        assert_eq!(back, rps);
        let counts: Vec<u32> = back[2..].iter().map(|r| r.annotated_runners).collect();
        assert_eq!(counts, vec![203, 139, 114]);
    }

    #[test]
    fn km_must_increase() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("rpinfo.csv");
        fs::write(
            &p,
            "location,km,start_rec_time,footage_frames,annotated_runners\nRP3,84.2,07:50,1,1\nRP4,80.0,10:20,1,1\n",
        )
        .unwrap();
        assert!(load_rpinfo(&p).is_err());
    }
}
