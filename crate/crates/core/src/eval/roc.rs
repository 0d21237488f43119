use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::{Error, Result};

/// One operating point: predicting positive when `score >= threshold`.
/// The first point of every curve has an infinite threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub fpr: f64,
    pub tpr: f64,
    #[serde(serialize_with = "ser_threshold", deserialize_with = "de_threshold")]
    pub threshold: f64,
}

fn ser_threshold<S: Serializer>(t: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if t.is_finite() {
        s.serialize_f64(*t)
    } else {
        s.serialize_str("inf")
    }
}

fn de_threshold<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum T {
        Num(f64),
        Str(String),
    }
    match T::deserialize(d)? {
        T::Num(v) => Ok(v),
        T::Str(s) if s == "inf" => Ok(f64::INFINITY),
        T::Str(s) => Err(serde::de::Error::custom(format!("bad threshold {s:?}"))),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    /// One-based label treated as positive.
    pub positive_label: usize,
    pub points: Vec<RocPoint>,
    pub auc: f64,
}

/// Curves and their summary AUC: the single curve's AUC for two classes,
/// the macro average of one-vs-rest AUCs otherwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocReport {
    pub curves: Vec<RocCurve>,
    pub auc: f64,
}

/// ROC curve with a point at every distinct score, sorted by falling
/// threshold, so fpr and tpr never decrease.
pub fn roc_curve(scores: &[f64], positive: &[bool]) -> Result<Vec<RocPoint>> {
    if scores.len() != positive.len() {
        return Err(Error::Dimension { expected: positive.len(), got: scores.len() });
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::Invalid("ROC scores must be finite".into()));
    }
    let n_pos = positive.iter().filter(|&&p| p).count();
    let n_neg = positive.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::InsufficientData("ROC needs both positive and negative examples".into()));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut points = vec![RocPoint { fpr: 0.0, tpr: 0.0, threshold: f64::INFINITY }];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < order.len() {
        let t = scores[order[i]];
        while i < order.len() && scores[order[i]] == t {
            if positive[order[i]] {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        points.push(RocPoint {
            fpr: fp as f64 / n_neg as f64,
            tpr: tp as f64 / n_pos as f64,
            threshold: t,
        });
    }
    Ok(points)
}

/// Trapezoid-rule area under a curve.
pub fn auc(points: &[RocPoint]) -> f64 {
    points
        .windows(2)
        .map(|w| (w[1].fpr - w[0].fpr) * (w[1].tpr + w[0].tpr) / 2.0)
        .sum()
}

/// ROC report from per-example class probabilities and one-based labels.
/// Two classes: label 2 is positive, scored by its probability. More
/// classes: one curve per label, AUC macro-averaged.
pub fn macro_auc(proba: &[Vec<f64>], labels: &[usize], categories: usize) -> Result<RocReport> {
    let targets: Vec<usize> = if categories == 2 { vec![2] } else { (1..=categories).collect() };
    let mut curves = Vec::new();
    for c in targets {
        let scores: Vec<f64> = proba.iter().map(|p| p[c - 1]).collect();
        let positive: Vec<bool> = labels.iter().map(|&y| y == c).collect();
        let points = roc_curve(&scores, &positive)?;
        curves.push(RocCurve { positive_label: c, auc: auc(&points), points });
    }
    let auc = curves.iter().map(|c| c.auc).sum::<f64>() / curves.len() as f64;
    Ok(RocReport { curves, auc })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_ranking() {
        let p = roc_curve(&[0.9, 0.8, 0.2, 0.1], &[true, true, false, false]).unwrap();
        assert_eq!(auc(&p), 1.0);
        assert_eq!(p.len(), 5);
    }

    #[test]
    fn ties_are_one_point() {
        let p = roc_curve(&[0.5, 0.5, 0.5, 0.5], &[true, false, true, false]).unwrap();
        assert_eq!(p.len(), 2);
        assert_eq!(auc(&p), 0.5);
    }

    #[test]
    fn reversed_ranking_and_errors() {
        let p = roc_curve(&[0.1, 0.2, 0.8, 0.9], &[true, true, false, false]).unwrap();
        assert_eq!(auc(&p), 0.0);
        assert!(roc_curve(&[0.1, 0.2], &[true, true]).is_err());
        assert!(roc_curve(&[0.1], &[true, false]).is_err());
    }

    #[test]
    fn infinite_threshold_round_trips() {
        let p = RocPoint { fpr: 0.0, tpr: 0.0, threshold: f64::INFINITY };
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(s, r#"{"fpr":0.0,"tpr":0.0,"threshold":"inf"}"#);
        assert_eq!(serde_json::from_str::<RocPoint>(&s).unwrap(), p);
    }

    #[test]
    fn multiclass_report() {
        let proba = vec![vec![0.8, 0.1, 0.1], vec![0.1, 0.8, 0.1], vec![0.1, 0.1, 0.8], vec![0.6, 0.3, 0.1]];
        let r = macro_auc(&proba, &[1, 2, 3, 1], 3).unwrap();
        assert_eq!(r.curves.len(), 3);
        assert_eq!(r.auc, 1.0);
    }
}
