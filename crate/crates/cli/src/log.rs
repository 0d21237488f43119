//! Progress output: plain lines, or one JSON object per line with `--json`.

use std::path::Path;

use anyhow::{Context, Result};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

pub struct Log {
    json: bool,
}

impl Log {
    pub fn new(json: bool) -> Self {
        Self { json }
    }

    pub fn is_json(&self) -> bool {
        self.json
    }

    pub fn event(&self, event: &str, fields: Value, text: impl FnOnce() -> String) {
        if self.json {
            let mut obj = json!({ "event": event });
            if let (Some(o), Value::Object(f)) = (obj.as_object_mut(), fields) {
                o.extend(f);
            }
            println!("{obj}");
        } else {
            println!("{}", text());
        }
    }

    /// Reports a written file with its checksum.
    pub fn file(&self, path: &Path) -> Result<()> {
        let bytes = std::fs::read(path).with_context(|| format!("reading back {}", path.display()))?;
        let digest = hex::encode(Sha256::digest(&bytes));
        self.event(
            "file",
            json!({ "path": path.display().to_string(), "bytes": bytes.len(), "sha256": digest }),
            || format!("wrote {}  sha256:{digest}", path.display()),
        );
        Ok(())
    }
}
