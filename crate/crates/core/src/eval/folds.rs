use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::survey_data::LabeledDataset;

pub const DEFAULT_MAX_FOLDS: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fold {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Folds of one barrier.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BarrierFolds {
    pub folds: Vec<Fold>,
}

impl BarrierFolds {
    pub fn fold_count(&self) -> usize {
        self.folds.len()
    }

    /// `k` unstratified folds over `n` rows, shuffled with `seed`.
    pub fn kfold(n: usize, k: usize, seed: u64) -> Result<Self> {
        if k < 2 || k > n {
            return Err(Error::Config(format!(
                "cannot split {n} rows into {k} folds"
            )));
        }
        let mut idx: Vec<usize> = (0..n).collect();
        idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let mut assignment = vec![0; n];
        for (pos, &i) in idx.iter().enumerate() {
            assignment[i] = pos % k;
        }
        Ok(Self::from_assignment(&assignment, k))
    }

    fn from_assignment(assignment: &[usize], k: usize) -> Self {
        let folds = (0..k)
            .map(|f| {
                let (test, train): (Vec<usize>, Vec<usize>) =
                    (0..assignment.len()).partition(|&i| assignment[i] == f);
                Fold { train, test }
            })
            .collect();
        Self { folds }
    }
}

/// Stratified folds for one barrier: `min(max_folds, n_pos)` folds, positives
/// and negatives each shuffled and dealt round-robin so fold positive counts
/// differ by at most one.
pub fn stratified_folds(labels: &[bool], max_folds: usize, seed: u64) -> Result<BarrierFolds> {
    stratified_folds_with(labels, max_folds, &mut ChaCha8Rng::seed_from_u64(seed))
}

fn stratified_folds_with(
    labels: &[bool],
    max_folds: usize,
    rng: &mut ChaCha8Rng,
) -> Result<BarrierFolds> {
    let (mut pos, mut neg): (Vec<usize>, Vec<usize>) = (0..labels.len()).partition(|&i| labels[i]);
    if pos.len() < 2 {
        return Err(Error::TooFewPositives {
            needed: 2,
            found: pos.len(),
        });
    }
    if max_folds < 2 {
        return Err(Error::Config("max_folds must be at least 2".into()));
    }
    let k = max_folds.min(pos.len());
    pos.shuffle(rng);
    neg.shuffle(rng);
    let mut assignment = vec![0; labels.len()];
    // Negatives continue the deal where positives stopped, keeping fold sizes within one.
    for (slot, &i) in pos.iter().chain(&neg).enumerate() {
        assignment[i] = slot % k;
    }
    Ok(BarrierFolds::from_assignment(&assignment, k))
}

/// Per-barrier fold plans. Barriers with fewer than two positives cannot be
/// cross-validated and carry `None`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub barriers: Vec<Option<BarrierFolds>>,
}

impl FoldPlan {
    /// Stratified plan per barrier; barrier `b` shuffles on stream `b` of `seed`.
    pub fn stratified(data: &LabeledDataset, max_folds: usize, seed: u64) -> Result<Self> {
        let barriers = (0..data.n_barriers())
            .map(|b| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(b as u64);
                match stratified_folds_with(&data.column(b), max_folds, &mut rng) {
                    Ok(f) => Ok(Some(f)),
                    Err(Error::TooFewPositives { .. }) => Ok(None),
                    Err(e) => Err(e),
                }
            })
            .collect::<Result<_>>()?;
        Ok(Self { barriers })
    }

    /// The same folds for every barrier.
    pub fn shared(folds: BarrierFolds, n_barriers: usize) -> Self {
        Self {
            barriers: vec![Some(folds); n_barriers],
        }
    }

    /// The same `k` folds for every barrier with at least two positives.
    pub fn shared_kfold(data: &LabeledDataset, k: usize, seed: u64) -> Result<Self> {
        let folds = BarrierFolds::kfold(data.len(), k, seed)?;
        let barriers = (0..data.n_barriers())
            .map(|b| (data.positives(b) >= 2).then(|| folds.clone()))
            .collect();
        Ok(Self { barriers })
    }

    pub fn n_barriers(&self) -> usize {
        self.barriers.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(n: usize, n_pos: usize) -> Vec<bool> {
        (0..n)
            .map(|i| i % (n / n_pos) == 0 && i / (n / n_pos) < n_pos)
            .collect()
    }

    fn check_partition(f: &BarrierFolds, n: usize) {
        let mut seen = vec![0; n];
        for fold in &f.folds {
            for &i in &fold.test {
                seen[i] += 1;
            }
            assert_eq!(fold.train.len() + fold.test.len(), n);
            assert!(fold.train.iter().all(|i| !fold.test.contains(i)));
        }
        assert!(seen.iter().all(|&c| c == 1));
    }

    #[test]
    fn forty_positives_give_twenty_folds() {
        let l = labels(500, 40);
        assert_eq!(l.iter().filter(|&&b| b).count(), 40);
        let f = stratified_folds(&l, 20, 1).unwrap();
        assert_eq!(f.fold_count(), 20);
        for fold in &f.folds {
            assert_eq!(fold.test.iter().filter(|&&i| l[i]).count(), 2);
            assert_eq!(fold.test.len(), 25);
        }
        check_partition(&f, 500);
    }

    #[test]
    fn fold_count_follows_exemplars() {
        let l = labels(100, 7);
        let f = stratified_folds(&l, 20, 2).unwrap();
        assert_eq!(f.fold_count(), 7);
        assert!(f
            .folds
            .iter()
            .all(|fold| fold.test.iter().filter(|&&i| l[i]).count() == 1));
        assert_eq!(
            stratified_folds(&labels(100, 20), 20, 2)
                .unwrap()
                .fold_count(),
            20
        );
    }

    #[test]
    fn too_few_positives() {
        let mut l = vec![false; 10];
        l[3] = true;
        assert!(matches!(
            stratified_folds(&l, 20, 0),
            Err(Error::TooFewPositives {
                needed: 2,
                found: 1
            })
        ));
    }

    #[test]
    fn deterministic_given_seed() {
        let l = labels(60, 12);
        assert_eq!(
            stratified_folds(&l, 5, 3).unwrap(),
            stratified_folds(&l, 5, 3).unwrap()
        );
        assert_ne!(
            stratified_folds(&l, 5, 3).unwrap(),
            stratified_folds(&l, 5, 4).unwrap()
        );
    }

    #[test]
    fn kfold_partitions() {
        let f = BarrierFolds::kfold(23, 5, 0).unwrap();
        check_partition(&f, 23);
        assert!(BarrierFolds::kfold(3, 5, 0).is_err());
    }
}
