//! Stratified k-fold splitting and accuracy.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::BenchError;

/// Splits row indices into `k` folds, stratified by label.
///
/// Each class is shuffled with `seed` and dealt round-robin, the deal for a
/// class continuing where the previous class stopped, so fold sizes differ by
/// at most one and every fold's class counts differ by at most one from
/// each other. Indices inside a fold are sorted.
pub fn kfold_split(labels: &[u8], k: usize, seed: u64) -> Result<Vec<Vec<usize>>, BenchError> {
    let n = labels.len();
    if k < 2 || k > n {
        return Err(BenchError::Config(format!("need 2 <= k <= n, got k = {k}, n = {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds = vec![Vec::with_capacity(n / k + 1); k];
    let mut slot = 0;
    for class in [0u8, 1] {
        let mut members: Vec<usize> = (0..n).filter(|&i| labels[i] == class).collect();
        if members.is_empty() {
            continue;
        }
        if members.len() < k {
            return Err(BenchError::Config(format!(
                "class {class} has {} members, fewer than the {k} folds",
                members.len()
            )));
        }
        members.shuffle(&mut rng);
        for i in members {
            folds[slot].push(i);
            slot = (slot + 1) % k;
        }
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    Ok(folds)
}

/// Training rows for fold `held_out`: every index not in that fold.
pub fn training_indices(folds: &[Vec<usize>], held_out: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = folds
        .iter()
        .enumerate()
        .filter(|&(f, _)| f != held_out)
        .flat_map(|(_, rows)| rows.iter().copied())
        .collect();
    idx.sort_unstable();
    idx
}

pub fn accuracy(predictions: &[u8], labels: &[u8]) -> Result<f64, BenchError> {
    if predictions.len() != labels.len() {
        return Err(BenchError::Config(format!(
            "{} predictions for {} labels",
            predictions.len(),
            labels.len()
        )));
    }
    if labels.is_empty() {
        return Err(BenchError::Config("accuracy of an empty set".into()));
    }
    let hits = predictions.iter().zip(labels).filter(|(p, y)| p == y).count();
    Ok(hits as f64 / labels.len() as f64)
}
