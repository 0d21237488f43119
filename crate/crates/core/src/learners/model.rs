use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{
    argmax, train_boosted, train_decision_tree, train_linear_svm, train_logistic, train_random_forest, BoostedModel,
    BoostedParams, Dataset, DecisionTreeModel, ForestParams, LinearSvmModel, LogisticModel, LogisticParams,
    RandomForestModel, SvmParams, TreeParams,
};
use crate::perf::CategoryLabel;
use crate::{Error, Result};

pub const MODEL_FORMAT_VERSION: u32 = 1;
const MODEL_FORMAT: &str = "runperf-model";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassifierKind {
    Boosted,
    DecisionTree,
    RandomForest,
    LogisticRegression,
    LinearSvm,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 5] = [
        Self::Boosted,
        Self::DecisionTree,
        Self::RandomForest,
        Self::LogisticRegression,
        Self::LinearSvm,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Boosted => "boosted",
            Self::DecisionTree => "decision_tree",
            Self::RandomForest => "random_forest",
            Self::LogisticRegression => "logistic_regression",
            Self::LinearSvm => "linear_svm",
        }
    }
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ClassifierKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown classifier kind {s:?}")))
    }
}

/// Learner choice plus hyperparameters. Serializes as
/// `{"kind": "...", "params": {...}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum ClassifierSpec {
    Boosted(BoostedParams),
    DecisionTree(TreeParams),
    RandomForest(ForestParams),
    LogisticRegression(LogisticParams),
    LinearSvm(SvmParams),
}

impl Default for ClassifierSpec {
    fn default() -> Self {
        Self::Boosted(BoostedParams::default())
    }
}

impl ClassifierSpec {
    pub fn with_defaults(kind: ClassifierKind) -> Self {
        match kind {
            ClassifierKind::Boosted => Self::Boosted(Default::default()),
            ClassifierKind::DecisionTree => Self::DecisionTree(Default::default()),
            ClassifierKind::RandomForest => Self::RandomForest(Default::default()),
            ClassifierKind::LogisticRegression => Self::LogisticRegression(Default::default()),
            ClassifierKind::LinearSvm => Self::LinearSvm(Default::default()),
        }
    }

    pub fn kind(&self) -> ClassifierKind {
        match self {
            Self::Boosted(_) => ClassifierKind::Boosted,
            Self::DecisionTree(_) => ClassifierKind::DecisionTree,
            Self::RandomForest(_) => ClassifierKind::RandomForest,
            Self::LogisticRegression(_) => ClassifierKind::LogisticRegression,
            Self::LinearSvm(_) => ClassifierKind::LinearSvm,
        }
    }

    /// Copy with the learner's seed replaced. The linear learners are
    /// deterministic and ignore it.
    pub fn with_seed(&self, seed: u64) -> Self {
        let mut s = self.clone();
        match &mut s {
            Self::Boosted(p) => p.seed = seed,
            Self::DecisionTree(p) => p.seed = seed,
            Self::RandomForest(p) => p.seed = seed,
            Self::LogisticRegression(_) | Self::LinearSvm(_) => {}
        }
        s
    }
}

/// A fitted classifier of any kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TrainedModel {
    Boosted(BoostedModel),
    DecisionTree(DecisionTreeModel),
    RandomForest(RandomForestModel),
    LogisticRegression(LogisticModel),
    LinearSvm(LinearSvmModel),
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format: String,
    version: u32,
    model: TrainedModel,
}

pub fn train(spec: &ClassifierSpec, data: &Dataset) -> Result<TrainedModel> {
    Ok(match spec {
        ClassifierSpec::Boosted(p) => TrainedModel::Boosted(train_boosted(data, p)?),
        ClassifierSpec::DecisionTree(p) => TrainedModel::DecisionTree(train_decision_tree(data, p)?),
        ClassifierSpec::RandomForest(p) => TrainedModel::RandomForest(train_random_forest(data, p)?),
        ClassifierSpec::LogisticRegression(p) => TrainedModel::LogisticRegression(train_logistic(data, p)?),
        ClassifierSpec::LinearSvm(p) => TrainedModel::LinearSvm(train_linear_svm(data, p)?),
    })
}

impl TrainedModel {
    pub fn kind(&self) -> ClassifierKind {
        match self {
            Self::Boosted(_) => ClassifierKind::Boosted,
            Self::DecisionTree(_) => ClassifierKind::DecisionTree,
            Self::RandomForest(_) => ClassifierKind::RandomForest,
            Self::LogisticRegression(_) => ClassifierKind::LogisticRegression,
            Self::LinearSvm(_) => ClassifierKind::LinearSvm,
        }
    }

    pub fn n_features(&self) -> usize {
        match self {
            Self::Boosted(m) => m.n_features,
            Self::DecisionTree(m) => m.n_features,
            Self::RandomForest(m) => m.n_features,
            Self::LogisticRegression(m) => m.n_features,
            Self::LinearSvm(m) => m.n_features,
        }
    }

    pub fn n_classes(&self) -> usize {
        match self {
            Self::Boosted(m) => m.n_classes,
            Self::DecisionTree(m) => m.n_classes,
            Self::RandomForest(m) => m.n_classes,
            Self::LogisticRegression(m) => m.n_classes,
            Self::LinearSvm(m) => m.n_classes,
        }
    }

    /// Class probabilities, non-negative and summing to one.
    pub fn predict_proba(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n_features() {
            return Err(Error::Dimension {
                expected: self.n_features(),
                got: x.len(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Invalid("input features must be finite".into()));
        }
        let mut p = match self {
            Self::Boosted(m) => super::softmax(&m.raw_scores(x)),
            Self::DecisionTree(m) => m.proba(x),
            Self::RandomForest(m) => m.proba(x),
            Self::LogisticRegression(m) => m.proba(x),
            Self::LinearSvm(m) => m.proba(x),
        };
        p.iter_mut().for_each(|v| *v = v.max(0.0));
        let sum: f64 = p.iter().sum();
        p.iter_mut().for_each(|v| *v /= sum);
        Ok(p)
    }

    /// Zero-based predicted class: argmax of the probabilities, ties low.
    pub fn predict_index(&self, x: &[f64]) -> Result<usize> {
        Ok(argmax(&self.predict_proba(x)?))
    }

    pub fn predict(&self, x: &[f64]) -> Result<CategoryLabel> {
        CategoryLabel::new(self.predict_index(x)? + 1, self.n_classes())
    }

    /// Fraction of rows of `data` predicted correctly.
    pub fn accuracy(&self, data: &Dataset) -> Result<f64> {
        let mut ok = 0;
        for i in 0..data.n_rows() {
            ok += usize::from(self.predict_index(data.row(i))? == data.labels()[i]);
        }
        Ok(ok as f64 / data.n_rows() as f64)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&ModelFile {
            format: MODEL_FORMAT.into(),
            version: MODEL_FORMAT_VERSION,
            model: self.clone(),
        })?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: ModelFile = serde_json::from_str(text)?;
        if f.format != MODEL_FORMAT || f.version != MODEL_FORMAT_VERSION {
            return Err(Error::Invalid(format!(
                "unsupported model file {} v{} (expected {MODEL_FORMAT} v{MODEL_FORMAT_VERSION})",
                f.format, f.version
            )));
        }
        Ok(f.model)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> Dataset {
        Dataset::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0], vec![0.2, 0.9], vec![0.9, 0.1]], vec![0, 1, 0, 1], 2)
            .unwrap()
    }

    #[test]
    fn kinds_round_trip() {
        for k in ClassifierKind::ALL {
            assert_eq!(k.as_str().parse::<ClassifierKind>().unwrap(), k);
            assert_eq!(ClassifierSpec::with_defaults(k).kind(), k);
        }
        assert!("xgboost".parse::<ClassifierKind>().is_err());
    }

    #[test]
    fn spec_serde_shape() {
        let s = serde_json::to_value(ClassifierSpec::default()).unwrap();
        assert_eq!(s["kind"], "boosted");
        assert_eq!(s["params"]["n_rounds"], 200);
        assert_eq!(s["params"]["max_depth"], 7);
    }

    #[test]
    fn json_round_trip_every_kind() {
        let d = tiny();
        for k in ClassifierKind::ALL {
            let spec = match ClassifierSpec::with_defaults(k) {
                ClassifierSpec::Boosted(p) => ClassifierSpec::Boosted(BoostedParams { n_rounds: 3, ..p }),
                ClassifierSpec::RandomForest(p) => ClassifierSpec::RandomForest(ForestParams { n_trees: 3, ..p }),
                s => s,
            };
            let m = train(&spec, &d).unwrap();
            let text = m.to_json().unwrap();
            let back = TrainedModel::from_json(&text).unwrap();
            assert_eq!(back.to_json().unwrap(), text);
            assert_eq!(back.predict_proba(&[0.3, 0.3]).unwrap(), m.predict_proba(&[0.3, 0.3]).unwrap());
        }
    }

    #[test]
    fn dimension_and_version_checks() {
        let m = train(&ClassifierSpec::DecisionTree(Default::default()), &tiny()).unwrap();
        assert!(matches!(m.predict(&[1.0]), Err(Error::Dimension { expected: 2, got: 1 })));
        assert!(m.predict_proba(&[f64::NAN, 0.0]).is_err());
        let bad = m.to_json().unwrap().replace("\"version\":1", "\"version\":9");
        assert!(TrainedModel::from_json(&bad).is_err());
    }
}
