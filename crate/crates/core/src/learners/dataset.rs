use crate::{Error, Result};

/// Dense row-major feature matrix with zero-based class labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    x: Vec<f64>,
    y: Vec<usize>,
    n_rows: usize,
    n_features: usize,
    n_classes: usize,
}

impl Dataset {
    pub fn new(x: Vec<f64>, n_features: usize, y: Vec<usize>, n_classes: usize) -> Result<Self> {
        if n_features == 0 {
            return Err(Error::Invalid("dataset needs at least one feature".into()));
        }
        if x.len() != y.len() * n_features {
            return Err(Error::Dimension {
                expected: y.len() * n_features,
                got: x.len(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Invalid("features must be finite".into()));
        }
        if let Some(&bad) = y.iter().find(|&&c| c >= n_classes) {
            return Err(Error::Invalid(format!("label index {bad} out of range for {n_classes} classes")));
        }
        Ok(Self {
            n_rows: y.len(),
            x,
            y,
            n_features,
            n_classes,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>], y: Vec<usize>, n_classes: usize) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        if let Some(r) = rows.iter().find(|r| r.len() != d) {
            return Err(Error::Dimension { expected: d, got: r.len() });
        }
        Self::new(rows.concat(), d, y, n_classes)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.x[i * self.n_features..(i + 1) * self.n_features]
    }

    #[inline]
    pub fn value(&self, i: usize, f: usize) -> f64 {
        self.x[i * self.n_features + f]
    }

    pub fn labels(&self) -> &[usize] {
        &self.y
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut c = vec![0; self.n_classes];
        for &y in &self.y {
            c[y] += 1;
        }
        c
    }

    /// Rows at `indices`, in that order (repeats allowed).
    pub fn subset(&self, indices: &[usize]) -> Self {
        let mut x = Vec::with_capacity(indices.len() * self.n_features);
        for &i in indices {
            x.extend_from_slice(self.row(i));
        }
        Self {
            x,
            y: indices.iter().map(|&i| self.y[i]).collect(),
            n_rows: indices.len(),
            n_features: self.n_features,
            n_classes: self.n_classes,
        }
    }

    /// Checks the common training preconditions: at least two rows and at
    /// least two distinct classes.
    pub(crate) fn check_trainable(&self) -> Result<()> {
        if self.n_rows < 2 {
            return Err(Error::InsufficientData(format!("{} training rows", self.n_rows)));
        }
        if self.class_counts().iter().filter(|&&c| c > 0).count() < 2 {
            return Err(Error::InsufficientData("training data contains a single class".into()));
        }
        Ok(())
    }

    /// Per-feature row order by ascending value (ties by row index).
    pub(crate) fn sorted_columns(&self) -> Vec<Vec<u32>> {
        (0..self.n_features)
            .map(|f| {
                let mut idx: Vec<u32> = (0..self.n_rows as u32).collect();
                idx.sort_by(|&a, &b| {
                    self.value(a as usize, f)
                        .total_cmp(&self.value(b as usize, f))
                        .then(a.cmp(&b))
                });
                idx
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(Dataset::new(vec![1.0, 2.0], 1, vec![0, 2], 2).is_err());
        assert!(Dataset::new(vec![1.0, f64::NAN], 1, vec![0, 1], 2).is_err());
        assert!(Dataset::new(vec![1.0, 2.0, 3.0], 2, vec![0, 1], 2).is_err());
        let d = Dataset::new(vec![1.0, 2.0], 1, vec![0, 0], 2).unwrap();
        assert!(d.check_trainable().is_err());
    }

    #[test]
    fn subset_and_sorting() {
        let d = Dataset::from_rows(&[vec![3.0, 0.0], vec![1.0, 0.0], vec![2.0, 1.0]], vec![0, 1, 1], 2).unwrap();
        assert_eq!(d.sorted_columns()[0], vec![1, 2, 0]);
        assert_eq!(d.sorted_columns()[1], vec![0, 1, 2]);
        let s = d.subset(&[2, 2, 0]);
        assert_eq!(s.row(1), &[2.0, 1.0]);
        assert_eq!(s.labels(), &[1, 1, 0]);
    }
}
