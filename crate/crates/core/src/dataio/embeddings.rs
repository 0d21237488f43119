use std::collections::HashSet;
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Deserialize;
use serde_json::value::RawValue;

use super::numfmt::format_sig9;
use super::types::{ClipRecord, ContextMode};
use crate::{Error, Result, LOGITS_DIM};

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Line<'a> {
    runner: String,
    rp: i64,
    mode: ContextMode,
    #[serde(borrow)]
    logits: Vec<&'a RawValue>,
}

/// Loads `embeddings.jsonl`, validating every record.
pub fn load_embeddings(path: impl AsRef<Path>) -> Result<Vec<ClipRecord>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_embeddings(&text, path)
}

/// Parses embeddings text; `origin` only labels error messages.
pub fn parse_embeddings(text: &str, origin: impl AsRef<Path>) -> Result<Vec<ClipRecord>> {
    let origin = origin.as_ref();
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let line: Line = serde_json::from_str(raw)
            .map_err(|e| Error::parse(origin, lineno, e.to_string()))?;
        if line.logits.len() != LOGITS_DIM {
            return Err(Error::parse(
                origin,
                lineno,
                format!("expected {LOGITS_DIM} logits, found {}", line.logits.len()),
            ));
        }
        // Parse the decimal text straight to f32 so there is no intermediate
        // f64 rounding.
        let mut logits = Vec::with_capacity(LOGITS_DIM);
        for (j, v) in line.logits.iter().enumerate() {
            let x: f32 = v.get().trim().parse().map_err(|_| {
                Error::parse(origin, lineno, format!("logit {j} is not a number: {}", v.get()))
            })?;
            if !x.is_finite() {
                return Err(Error::parse(origin, lineno, format!("logit {j} is not finite")));
            }
            logits.push(x);
        }
        if !seen.insert((line.runner.clone(), line.rp, line.mode)) {
            return Err(Error::parse(
                origin,
                lineno,
                format!(
                    "duplicate record for runner {:?}, rp {}, mode {}",
                    line.runner, line.rp, line.mode
                ),
            ));
        }
        out.push(ClipRecord {
            runner_id: line.runner,
            rp_id: line.rp,
            context_mode: line.mode,
            logits,
        });
    }
    Ok(out)
}

pub fn write_embeddings(path: impl AsRef<Path>, records: &[ClipRecord]) -> Result<()> {
    let path = path.as_ref();
    let mut buf = String::new();
    for r in records {
        if r.logits.len() != LOGITS_DIM {
            return Err(Error::Dimension {
                expected: LOGITS_DIM,
                got: r.logits.len(),
            });
        }
        buf.push_str("{\"runner\":");
        buf.push_str(&serde_json::to_string(&r.runner_id)?);
        buf.push_str(&format!(",\"rp\":{},\"mode\":\"{}\",\"logits\":[", r.rp_id, r.context_mode));
        for (j, x) in r.logits.iter().enumerate() {
            if j > 0 {
                buf.push(',');
            }
            buf.push_str(&format_sig9(*x));
        }
        buf.push_str("]}\n");
    }
    fs::write(path, buf).map_err(|e| Error::io(path, e))
}

const SIDECAR_MAGIC: &[u8; 4] = b"RPLG";
const SIDECAR_VERSION: u32 = 1;

/// Writes the binary sidecar.
///
/// Layout, all little-endian: magic `RPLG`, `u32` version, `u32` record
/// count, `u32` logits dimension, then per record a `u16` byte length and
/// UTF-8 runner id, `i64` RP id, `u8` mode code (raw 0, bb 1, vibe 2) and
/// the logits as `f32`.
pub fn write_logits_sidecar(path: impl AsRef<Path>, records: &[ClipRecord]) -> Result<()> {
    let path = path.as_ref();
    let mut buf: Vec<u8> = Vec::with_capacity(16 + records.len() * (LOGITS_DIM * 4 + 32));
    buf.extend_from_slice(SIDECAR_MAGIC);
    buf.extend_from_slice(&SIDECAR_VERSION.to_le_bytes());
    buf.extend_from_slice(&(records.len() as u32).to_le_bytes());
    buf.extend_from_slice(&(LOGITS_DIM as u32).to_le_bytes());
    for r in records {
        let id = r.runner_id.as_bytes();
        let len = u16::try_from(id.len())
            .map_err(|_| Error::Invalid(format!("runner id too long: {}", r.runner_id)))?;
        if r.logits.len() != LOGITS_DIM {
            return Err(Error::Dimension {
                expected: LOGITS_DIM,
                got: r.logits.len(),
            });
        }
        buf.extend_from_slice(&len.to_le_bytes());
        buf.extend_from_slice(id);
        buf.extend_from_slice(&r.rp_id.to_le_bytes());
        buf.push(r.context_mode.code());
        for x in &r.logits {
            buf.extend_from_slice(&x.to_le_bytes());
        }
    }
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(&buf).map_err(|e| Error::io(path, e))
}

pub fn load_logits_sidecar(path: impl AsRef<Path>) -> Result<Vec<ClipRecord>> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let mut cur = Cursor { bytes: &bytes, pos: 0, path };
    if cur.take(4)? != SIDECAR_MAGIC {
        return Err(Error::parse(path, 0, "bad magic"));
    }
    let version = cur.u32()?;
    if version != SIDECAR_VERSION {
        return Err(Error::parse(path, 0, format!("unsupported version {version}")));
    }
    let count = cur.u32()? as usize;
    let dim = cur.u32()? as usize;
    if dim != LOGITS_DIM {
        return Err(Error::parse(path, 0, format!("expected {LOGITS_DIM} logits, header says {dim}")));
    }
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let len = u16::from_le_bytes(cur.take(2)?.try_into().unwrap()) as usize;
        let runner_id = String::from_utf8(cur.take(len)?.to_vec())
            .map_err(|_| Error::parse(path, i + 1, "runner id is not UTF-8"))?;
        let rp_id = i64::from_le_bytes(cur.take(8)?.try_into().unwrap());
        let code = cur.take(1)?[0];
        let context_mode = ContextMode::from_code(code)
            .ok_or_else(|| Error::parse(path, i + 1, format!("bad mode code {code}")))?;
        let raw = cur.take(4 * dim)?;
        let logits: Vec<f32> = raw
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        if logits.iter().any(|x| !x.is_finite()) {
            return Err(Error::parse(path, i + 1, "non-finite logit"));
        }
        if !seen.insert((runner_id.clone(), rp_id, context_mode)) {
            return Err(Error::parse(path, i + 1, format!("duplicate record for runner {runner_id:?}")));
        }
        out.push(ClipRecord {
            runner_id,
            rp_id,
            context_mode,
            logits,
        });
    }
    if cur.pos != bytes.len() {
        return Err(Error::parse(path, count, "trailing bytes"));
    }
    Ok(out)
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
    path: &'a Path,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.bytes.len() {
            return Err(Error::parse(self.path, 0, "truncated sidecar"));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(runner: &str, rp: i64, mode: &str, n: usize) -> String {
        let logits: Vec<String> = (0..n).map(|i| format!("{}", i as f32 * 0.5 - 3.0)).collect();
        format!(
            "{{\"runner\":\"{runner}\",\"rp\":{rp},\"mode\":\"{mode}\",\"logits\":[{}]}}",
            logits.join(",")
        )
    }

    #[test]
    fn single_valid_line() {
        let recs = parse_embeddings(&line("r1", 3, "raw", 400), "mem").unwrap();
        assert_eq!(recs.len(), 1);
        assert_eq!(recs[0].runner_id, "r1");
        assert_eq!(recs[0].logits[1], -2.5);
    }

    #[test]
    fn wrong_length_names_expected_dimension() {
        let err = parse_embeddings(&line("r1", 3, "raw", 399), "mem").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("400"), "{msg}");
        assert!(msg.contains(":1:"), "{msg}");
    }

    #[test]
    fn duplicate_key_rejected_with_line_number() {
        let text = [line("r1", 3, "raw", 400), line("r1", 3, "bb", 400), line("r1", 3, "raw", 400)]
            .join("\n");
        let err = parse_embeddings(&text, "mem").unwrap_err();
        assert!(err.to_string().contains(":3:"), "{err}");
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let text = format!("{}\n{{\"runner\": \"x\"", line("r1", 3, "raw", 400));
        let err = parse_embeddings(&text, "mem").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        let text = format!("{}\n", line("r1", 3, "sepia", 400));
        assert!(parse_embeddings(&text, "mem").is_err());
    }

    #[test]
    fn text_and_sidecar_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let recs: Vec<ClipRecord> = (0..3)
            .map(|i| ClipRecord {
                runner_id: format!("bib{i}"),
                rp_id: 3 + i,
                context_mode: ContextMode::ALL[i as usize],
                logits: (0..LOGITS_DIM).map(|j| (j as f32 * 0.731 + i as f32).sin() * 7.3).collect(),
            })
            .collect();
        let jp = dir.path().join("e.jsonl");
        write_embeddings(&jp, &recs).unwrap();
        assert_eq!(load_embeddings(&jp).unwrap(), recs);
        let bp = dir.path().join("e.bin");
        write_logits_sidecar(&bp, &recs).unwrap();
        assert_eq!(load_logits_sidecar(&bp).unwrap(), recs);
    }
}
