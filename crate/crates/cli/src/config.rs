//! Run configuration: a TOML file whose values command-line flags override.

use std::path::{Component, Path, PathBuf};

use anyhow::{bail, Context, Result};
use runperf::dataio::{ContextMode, SynthConfig};
use runperf::eval::{ProtocolConfig, StdMode};
use runperf::learners::ClassifierSpec;
use runperf::perf::Task;
use runperf::tracker::TrackerConfig;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub paths: Paths,
    pub synth: SynthConfig,
    pub track: TrackSection,
    pub dataset: DatasetSection,
    pub protocol: ProtocolSection,
    pub classifier: ClassifierSpec,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub embeddings: Option<PathBuf>,
    pub splits: Option<PathBuf>,
    pub detections: Option<PathBuf>,
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrackSection {
    /// `[cx, cy, w, h]` of the runner of interest in the first frame.
    pub seed_bbox: Option<[f64; 4]>,
    pub backup: bool,
    pub feature_dim: Option<usize>,
    pub tracker: TrackerConfig,
}

impl Default for TrackSection {
    fn default() -> Self {
        Self {
            seed_bbox: None,
            backup: true,
            feature_dim: None,
            tracker: TrackerConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DatasetSection {
    pub task: Task,
    pub categories: usize,
    pub mode: ContextMode,
    /// A single RP; absent means the union of all RPs.
    pub rp: Option<i64>,
}

impl Default for DatasetSection {
    fn default() -> Self {
        Self {
            task: Task::Current,
            categories: 2,
            mode: ContextMode::Raw,
            rp: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProtocolSection {
    pub iterations: usize,
    pub folds: usize,
    pub std: StdMode,
    pub svg: bool,
}

impl Default for ProtocolSection {
    fn default() -> Self {
        let p = ProtocolConfig::default();
        Self {
            iterations: p.iterations,
            folds: p.folds,
            std: p.std,
            svg: false,
        }
    }
}

impl RunConfig {
    /// Reads a config file. Relative paths inside it are resolved against
    /// the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut config: RunConfig = toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new(""));
        let rebase = |p: &mut Option<PathBuf>| {
            if let Some(p) = p {
                if p.is_relative() {
                    let joined: PathBuf = base.join(&*p).components().filter(|c| *c != Component::CurDir).collect();
                    *p = if joined.as_os_str().is_empty() { PathBuf::from(".") } else { joined };
                }
            }
        };
        rebase(&mut config.out);
        rebase(&mut config.paths.embeddings);
        rebase(&mut config.paths.splits);
        rebase(&mut config.paths.detections);
        rebase(&mut config.paths.report);
        Ok(config)
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("out"))
    }

    pub fn protocol_config(&self) -> ProtocolConfig {
        ProtocolConfig {
            iterations: self.protocol.iterations,
            folds: self.protocol.folds,
            master_seed: self.seed(),
            classifier: self.classifier.clone(),
            std: self.protocol.std,
            parallel: true,
        }
    }
}

/// Returns the path or a "missing input" error naming the flag to set.
pub fn require<'a>(path: &'a Option<PathBuf>, flag: &str) -> Result<&'a Path> {
    match path {
        Some(p) if p.exists() => Ok(p),
        Some(p) => bail!("{} does not exist", p.display()),
        None => bail!("no input given: pass {flag} or set it in the config file"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_through_toml() {
        let config = RunConfig::default();
        let text = config.to_toml().unwrap();
        let back: RunConfig = toml::from_str(&text).unwrap();
        assert_eq!(back, config);
    }

    #[test]
    fn partial_file_and_relative_paths() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(
            &path,
            "seed = 9\n[paths]\nsplits = \"splits.csv\"\n[dataset]\ntask = \"next\"\ncategories = 3\n\
             [classifier]\nkind = \"random_forest\"\n[classifier.params]\nn_trees = 5\n",
        )
        .unwrap();
        let config = RunConfig::load(&path).unwrap();
        assert_eq!(config.seed(), 9);
        assert_eq!(config.paths.splits, Some(dir.path().join("splits.csv")));
        assert_eq!(config.dataset.task, Task::Next);
        assert_eq!(config.dataset.categories, 3);
        match config.classifier {
            ClassifierSpec::RandomForest(p) => assert_eq!(p.n_trees, 5),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_keys_are_errors() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(&path, "[protocol]\niteratons = 3\n").unwrap();
        assert!(RunConfig::load(&path).is_err());
    }
}
