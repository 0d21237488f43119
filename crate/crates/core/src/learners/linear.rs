use serde::{Deserialize, Serialize};

use super::{softmax, Dataset};
use crate::{Error, Result};

/// Per-feature centering and scaling fit on training data. Constant features
/// keep scale 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Standardizer {
    fn fit(data: &Dataset) -> Self {
        let n = data.n_rows() as f64;
        let d = data.n_features();
        let mut mean = vec![0.0; d];
        for i in 0..data.n_rows() {
            for (m, v) in mean.iter_mut().zip(data.row(i)) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; d];
        for i in 0..data.n_rows() {
            for ((s, v), m) in var.iter_mut().zip(data.row(i)).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        let scale = var
            .into_iter()
            .map(|s| {
                let sd = (s / n).sqrt();
                if sd > 1e-12 { sd } else { 1.0 }
            })
            .collect();
        Self { mean, scale }
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(&self.mean)
            .zip(&self.scale)
            .map(|((v, m), s)| (v - m) / s)
            .collect()
    }

    fn matrix(&self, data: &Dataset) -> Vec<Vec<f64>> {
        (0..data.n_rows()).map(|i| self.apply(data.row(i))).collect()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Multinomial logistic regression on standardized features, full-batch
/// gradient descent on mean cross-entropy plus `l2/2 * |W|^2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LogisticParams {
    pub learning_rate: f64,
    pub epochs: usize,
    pub l2: f64,
}

impl Default for LogisticParams {
    fn default() -> Self {
        Self { learning_rate: 0.5, epochs: 300, l2: 1e-3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub params: LogisticParams,
    pub n_features: usize,
    pub n_classes: usize,
    pub standardizer: Standardizer,
    /// `weights[c]` over standardized features.
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
}

impl LogisticModel {
    pub fn proba(&self, x: &[f64]) -> Vec<f64> {
        let z = self.standardizer.apply(x);
        let s: Vec<f64> = self.weights.iter().zip(&self.bias).map(|(w, b)| dot(w, &z) + b).collect();
        softmax(&s)
    }
}

fn check_rate(lr: f64, epochs: usize, l2: f64) -> Result<()> {
    if !(lr > 0.0 && lr.is_finite()) || epochs == 0 || !(l2 >= 0.0 && l2.is_finite()) {
        return Err(Error::Config("learning_rate > 0, epochs >= 1 and l2 >= 0 required".into()));
    }
    Ok(())
}

pub fn train_logistic(data: &Dataset, params: &LogisticParams) -> Result<LogisticModel> {
    check_rate(params.learning_rate, params.epochs, params.l2)?;
    data.check_trainable()?;
    let (k, d) = (data.n_classes(), data.n_features());
    let st = Standardizer::fit(data);
    let z = st.matrix(data);
    let n = z.len() as f64;
    let mut w = vec![vec![0.0; d]; k];
    let mut b = vec![0.0; k];
    let mut gw = vec![vec![0.0; d]; k];
    let mut gb = vec![0.0; k];
    for _ in 0..params.epochs {
        gw.iter_mut().for_each(|g| g.iter_mut().for_each(|v| *v = 0.0));
        gb.iter_mut().for_each(|v| *v = 0.0);
        for (zi, &yi) in z.iter().zip(data.labels()) {
            let s: Vec<f64> = w.iter().zip(&b).map(|(wc, bc)| dot(wc, zi) + bc).collect();
            let p = softmax(&s);
            for c in 0..k {
                let r = p[c] - f64::from(u8::from(c == yi));
                gb[c] += r;
                for (g, v) in gw[c].iter_mut().zip(zi) {
                    *g += r * v;
                }
            }
        }
        for c in 0..k {
            for (wv, g) in w[c].iter_mut().zip(&gw[c]) {
                *wv -= params.learning_rate * (g / n + params.l2 * *wv);
            }
            b[c] -= params.learning_rate * gb[c] / n;
        }
    }
    Ok(LogisticModel {
        params: params.clone(),
        n_features: d,
        n_classes: k,
        standardizer: st,
        weights: w,
        bias: b,
    })
}

/// Linear SVM on standardized features: full-batch subgradient descent on
/// `lambda/2 * |w|^2 + mean hinge`, step `learning_rate / sqrt(t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SvmParams {
    pub learning_rate: f64,
    pub epochs: usize,
    pub lambda: f64,
}

impl Default for SvmParams {
    fn default() -> Self {
        Self { learning_rate: 0.5, epochs: 500, lambda: 1e-3 }
    }
}

/// Two classes use a single hyperplane whose positive side is the second
/// class; more classes use one hyperplane per class (one-vs-rest).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearSvmModel {
    pub params: SvmParams,
    pub n_features: usize,
    pub n_classes: usize,
    pub standardizer: Standardizer,
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
}

impl LinearSvmModel {
    pub fn decision(&self, x: &[f64]) -> Vec<f64> {
        let z = self.standardizer.apply(x);
        self.weights.iter().zip(&self.bias).map(|(w, b)| dot(w, &z) + b).collect()
    }

    /// Probabilities from margins: logistic of the single margin for two
    /// classes, softmax of the one-vs-rest margins otherwise.
    pub fn proba(&self, x: &[f64]) -> Vec<f64> {
        let s = self.decision(x);
        if self.n_classes == 2 {
            let p = 1.0 / (1.0 + (-s[0]).exp());
            vec![1.0 - p, p]
        } else {
            softmax(&s)
        }
    }

    /// Hyperplanes in original feature units: `(w, b)` with margin `w.x + b`.
    pub fn raw_hyperplanes(&self) -> Vec<(Vec<f64>, f64)> {
        self.weights
            .iter()
            .zip(&self.bias)
            .map(|(w, &b)| {
                let wr: Vec<f64> = w.iter().zip(&self.standardizer.scale).map(|(a, s)| a / s).collect();
                let br = b - dot(&wr, &self.standardizer.mean);
                (wr, br)
            })
            .collect()
    }
}

fn fit_hinge(z: &[Vec<f64>], sign: &[f64], p: &SvmParams) -> (Vec<f64>, f64) {
    let d = z[0].len();
    let n = z.len() as f64;
    let mut w = vec![0.0; d];
    let mut b = 0.0;
    let mut gw = vec![0.0; d];
    for t in 1..=p.epochs {
        gw.iter_mut().zip(&w).for_each(|(g, wv)| *g = p.lambda * wv);
        let mut gb = 0.0;
        for (zi, &yi) in z.iter().zip(sign) {
            if yi * (dot(&w, zi) + b) < 1.0 {
                for (g, v) in gw.iter_mut().zip(zi) {
                    *g -= yi * v / n;
                }
                gb -= yi / n;
            }
        }
        let eta = p.learning_rate / (t as f64).sqrt();
        w.iter_mut().zip(&gw).for_each(|(wv, g)| *wv -= eta * g);
        b -= eta * gb;
    }
    (w, b)
}

pub fn train_linear_svm(data: &Dataset, params: &SvmParams) -> Result<LinearSvmModel> {
    check_rate(params.learning_rate, params.epochs, params.lambda)?;
    data.check_trainable()?;
    let k = data.n_classes();
    let st = Standardizer::fit(data);
    let z = st.matrix(data);
    let targets: Vec<usize> = if k == 2 { vec![1] } else { (0..k).collect() };
    let (weights, bias) = targets
        .iter()
        .map(|&c| {
            let sign: Vec<f64> = data.labels().iter().map(|&y| if y == c { 1.0 } else { -1.0 }).collect();
            fit_hinge(&z, &sign, params)
        })
        .unzip();
    Ok(LinearSvmModel {
        params: params.clone(),
        n_features: data.n_features(),
        n_classes: k,
        standardizer: st,
        weights,
        bias,
    })
}
