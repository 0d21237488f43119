use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::Path;

use super::types::SplitRecord;
use crate::{Error, Result};

/// Loads `splits.csv` (`runner,rp,seconds`) and validates it.
///
/// Times must be positive, each (runner, RP) pair may appear once, and for
/// every runner the time must strictly increase with the RP id.
pub fn load_split_times(path: impl AsRef<Path>) -> Result<Vec<SplitRecord>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_split_times(&text, path)
}

pub fn parse_split_times(text: &str, origin: impl AsRef<Path>) -> Result<Vec<SplitRecord>> {
    let origin = origin.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| Error::parse(origin, 1, e.to_string()))?
        .clone();
    if headers.iter().collect::<Vec<_>>() != ["runner", "rp", "seconds"] {
        return Err(Error::parse(origin, 1, "expected header `runner,rp,seconds`"));
    }
    let mut out = Vec::new();
    let mut lines = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| {
            let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
            Error::parse(origin, line, e.to_string())
        })?;
        let line = row.position().map(|p| p.line() as usize).unwrap_or(0);
        let rec: SplitRecord = row
            .deserialize(Some(&headers))
            .map_err(|e| Error::parse(origin, line, e.to_string()))?;
        lines.push(line);
        out.push(rec);
    }
    validate_splits(&out).map_err(|(idx, msg)| Error::parse(origin, lines[idx], msg))?;
    Ok(out)
}

/// Checks positivity, uniqueness and per-runner monotonicity. On failure
/// returns the index of the offending record and a message.
pub fn validate_splits(records: &[SplitRecord]) -> std::result::Result<(), (usize, String)> {
    let mut by_runner: HashMap<&str, BTreeMap<i64, (usize, f64)>> = HashMap::new();
    for (i, r) in records.iter().enumerate() {
        if !(r.split_time.is_finite() && r.split_time > 0.0) {
            return Err((i, format!("split time must be positive, got {}", r.split_time)));
        }
        let per = by_runner.entry(&r.runner_id).or_default();
        if per.insert(r.rp_id, (i, r.split_time)).is_some() {
            return Err((i, format!("duplicate split for runner {} at RP {}", r.runner_id, r.rp_id)));
        }
    }
    let mut violations: Vec<(usize, String)> = Vec::new();
    for (runner, per) in &by_runner {
        let mut prev: Option<(i64, f64)> = None;
        for (&rp, &(idx, t)) in per {
            if let Some((prp, pt)) = prev {
                if t <= pt {
                    violations.push((
                        idx,
                        format!(
                            "split time for runner {runner} at RP {rp} ({t} s) does not exceed RP {prp} ({pt} s)"
                        ),
                    ));
                }
            }
            prev = Some((rp, t));
        }
    }
    // Report the earliest offending record for a stable message.
    match violations.into_iter().min_by_key(|(i, _)| *i) {
        Some(v) => Err(v),
        None => Ok(()),
    }
}

pub fn write_split_times(path: impl AsRef<Path>, records: &[SplitRecord]) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    for r in records {
        w.serialize(r).map_err(|e| Error::Invalid(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Invalid(e.to_string()))?;
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn direct_parse() {
        let recs = parse_split_times("runner,rp,seconds\nr1,3,28200\n", "mem").unwrap();
        assert_eq!(recs, vec![SplitRecord::new("r1", 3, 28200.0)]);
    }

    #[test]
    fn non_monotone_runner_is_an_error() {
        let text = "runner,rp,seconds\nr1,3,30000\nr1,4,29000\n";
        let err = parse_split_times(text, "mem").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        assert!(err.to_string().contains("r1"));
    }

    #[test]
    fn non_positive_time_is_an_error() {
        assert!(parse_split_times("runner,rp,seconds\nr1,3,0\n", "mem").is_err());
        assert!(parse_split_times("runner,rp,seconds\nr1,3,-5\n", "mem").is_err());
        assert!(parse_split_times("runner,rp,seconds\nr1,3,abc\n", "mem").is_err());
        assert!(parse_split_times("bib,rp,seconds\nr1,3,1\n", "mem").is_err());
    }

    #[test]
    fn winner_to_last_spread_is_valid() {
        // 13 h for the winner, 30 h for the last finisher.
        let text = format!("runner,rp,seconds\nfirst,5,{}\nlast,5,{}\n", 13 * 3600, 30 * 3600);
        let recs = parse_split_times(&text, "mem").unwrap();
        assert_eq!(recs.len(), 2);
    }

    #[test]
    fn write_then_load() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.csv");
        let recs = vec![
            SplitRecord::new("a", 3, 30000.5),
            SplitRecord::new("a", 4, 40000.25),
            SplitRecord::new("b", 3, 31000.0),
        ];
        write_split_times(&p, &recs).unwrap();
        let text = fs::read_to_string(&p).unwrap();
        assert!(text.starts_with("runner,rp,seconds\n"));
        assert!(!text.contains('\r'));
        assert_eq!(load_split_times(&p).unwrap(), recs);
    }
}
