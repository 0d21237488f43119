use std::collections::BTreeMap;

use rand::seq::SliceRandom;

use crate::rng::rng_from_seed;
use crate::{Error, Result};

/// Splits example indices into `k` disjoint test folds, stratified by label.
///
/// Each class (in ascending label order) is shuffled and dealt round-robin;
/// the fold pointer carries over from one class to the next, so fold sizes
/// differ by at most one and each class is spread as evenly as possible.
/// Indices inside a fold are ascending.
///
/// ```
/// use runperf::eval::stratified_kfold;
/// let labels = [0, 0, 0, 0, 0, 1, 1, 1, 1, 1];
/// let folds = stratified_kfold(&labels, 4, 7).unwrap();
/// let sizes: Vec<usize> = folds.iter().map(Vec::len).collect();
/// assert_eq!(sizes, [3, 3, 2, 2]);
/// ```
pub fn stratified_kfold(labels: &[usize], k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 {
        return Err(Error::Config(format!("need at least 2 folds, got {k}")));
    }
    let mut by_class: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &y) in labels.iter().enumerate() {
        by_class.entry(y).or_default().push(i);
    }
    if let Some((c, members)) = by_class.iter().find(|(_, m)| m.len() < k) {
        return Err(Error::InsufficientData(format!(
            "class {} has {} members, fewer than {k} folds",
            c + 1,
            members.len()
        )));
    }
    let mut rng = rng_from_seed(seed);
    let mut folds = vec![Vec::new(); k];
    let mut next = 0;
    for members in by_class.values_mut() {
        members.shuffle(&mut rng);
        for &i in members.iter() {
            folds[next].push(i);
            next = (next + 1) % k;
        }
    }
    folds.iter_mut().for_each(|f| f.sort_unstable());
    Ok(folds)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_division() {
        let labels = [0, 0, 0, 0, 1, 1, 1, 1];
        for f in stratified_kfold(&labels, 4, 1).unwrap() {
            assert_eq!(f.len(), 2);
            assert_eq!(f.iter().filter(|&&i| labels[i] == 0).count(), 1);
        }
    }

    #[test]
    fn too_small_class() {
        assert!(matches!(
            stratified_kfold(&[0, 0, 0, 0, 1, 1, 1], 4, 0),
            Err(Error::InsufficientData(_))
        ));
        assert!(stratified_kfold(&[0, 1], 1, 0).is_err());
    }

    #[test]
    fn seed_changes_assignment() {
        let labels: Vec<usize> = (0..40).map(|i| i % 2).collect();
        let a = stratified_kfold(&labels, 4, 1).unwrap();
        assert_eq!(a, stratified_kfold(&labels, 4, 1).unwrap());
        assert_ne!(a, stratified_kfold(&labels, 4, 2).unwrap());
    }
}
