use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kg::EntityId;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldSplit {
    pub fold: usize,
    /// Ascending node ids.
    pub train: Vec<EntityId>,
    /// Ascending node ids.
    pub test: Vec<EntityId>,
}

/// Seeded shuffle, then round-robin assignment of positions to folds.
pub fn kfold_split(node_ids: &[EntityId], folds: usize, seed: u64) -> Result<Vec<FoldSplit>> {
    if folds < 2 {
        return Err(Error::Config(format!("need at least 2 folds, got {folds}")));
    }
    if node_ids.len() < folds {
        return Err(Error::Config(format!(
            "{} labeled nodes cannot fill {folds} folds",
            node_ids.len()
        )));
    }
    let mut shuffled = node_ids.to_vec();
    shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut fold_of = vec![0usize; shuffled.len()];
    for (pos, f) in fold_of.iter_mut().enumerate() {
        *f = pos % folds;
    }
    Ok((0..folds)
        .map(|fold| {
            let mut train = Vec::new();
            let mut test = Vec::new();
            for (&v, &f) in shuffled.iter().zip(&fold_of) {
                if f == fold {
                    test.push(v);
                } else {
                    train.push(v);
                }
            }
            train.sort_unstable();
            test.sort_unstable();
            FoldSplit { fold, train, test }
        })
        .collect())
}
