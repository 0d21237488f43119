use crate::{Error, Result};

/// Smallest cosine distance `1 - <a, b>` between `feature` and any gallery
/// member. All vectors are assumed unit-norm; the result is clamped to
/// `[0, 2]`.
pub fn min_cosine_distance<'a>(
    gallery: impl IntoIterator<Item = &'a Vec<f64>>,
    feature: &[f64],
) -> Result<f64> {
    let mut best: Option<f64> = None;
    for g in gallery {
        if g.len() != feature.len() {
            return Err(Error::Dimension {
                expected: g.len(),
                got: feature.len(),
            });
        }
        let dot: f64 = g.iter().zip(feature).map(|(a, b)| a * b).sum();
        let d = (1.0 - dot).clamp(0.0, 2.0);
        best = Some(best.map_or(d, |b: f64| b.min(d)));
    }
    best.ok_or_else(|| Error::Invalid("appearance gallery is empty".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let u = vec![0.6, 0.8];
        let v = vec![-0.8, 0.6];
        let neg: Vec<f64> = u.iter().map(|x| -x).collect();
        assert!(min_cosine_distance([&u], &u).unwrap().abs() < 1e-12);
        assert!((min_cosine_distance([&v], &u).unwrap() - 1.0).abs() < 1e-12);
        assert!((min_cosine_distance([&neg], &u).unwrap() - 2.0).abs() < 1e-12);
        assert!(min_cosine_distance([&neg, &u], &u).unwrap().abs() < 1e-12);
        assert!(min_cosine_distance(std::iter::empty(), &u).is_err());
    }
}
