use alloc::vec::Vec;
use core::ops::Range;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::EvalError;

/// Fraction of a half that one block may occupy.
pub const BLOCK_FRACTION: (f64, f64) = (0.5, 0.8);
pub const MIN_SERIES: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeqFold {
    pub train_start: usize,
    pub train_len: usize,
    pub test_start: usize,
    pub test_len: usize,
}

impl SeqFold {
    pub fn train(&self) -> Range<usize> {
        self.train_start..self.train_start + self.train_len
    }

    pub fn test(&self) -> Range<usize> {
        self.test_start..self.test_start + self.test_len
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeqCvPlan {
    pub total: usize,
    pub seed: u64,
    pub folds: Vec<SeqFold>,
}

fn block_bounds(half: usize) -> (usize, usize) {
    let lo = libm::ceil(BLOCK_FRACTION.0 * half as f64) as usize;
    let hi = libm::floor(BLOCK_FRACTION.1 * half as f64) as usize;
    (lo.max(1), hi)
}

/// Draws `folds` train/test block pairs: training inside `[0, T/2)`, testing inside
/// `[T/2, T)`, each block spanning between half and four fifths of its half.
pub fn seq_cv_plan(total: usize, folds: usize, seed: u64) -> Result<SeqCvPlan, EvalError> {
    if total < MIN_SERIES {
        return Err(EvalError::SeriesTooShort { total, min: MIN_SERIES });
    }
    if folds == 0 {
        return Err(EvalError::Config("fold count must be positive"));
    }
    let half = total / 2;
    let test_half = total - half;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |offset: usize, size: usize| {
        let (lo, hi) = block_bounds(size);
        let len = rng.gen_range(lo..=hi);
        (offset + rng.gen_range(0..=size - len), len)
    };
    let folds = (0..folds)
        .map(|_| {
            let (train_start, train_len) = draw(0, half);
            let (test_start, test_len) = draw(half, test_half);
            SeqFold {
                train_start,
                train_len,
                test_start,
                test_len,
            }
        })
        .collect();
    Ok(SeqCvPlan { total, seed, folds })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blocks_stay_in_their_halves() {
        let plan = seq_cv_plan(1001, 10, 3).unwrap();
        assert_eq!(plan.folds.len(), 10);
        for f in &plan.folds {
            assert!(f.train().end <= 500);
            assert!(f.test().start >= 500 && f.test().end <= 1001);
            assert!((250..=400).contains(&f.train_len));
            assert!((251..=400).contains(&f.test_len));
        }
        assert_eq!(plan, seq_cv_plan(1001, 10, 3).unwrap());
    }

    #[test]
    fn too_short() {
        assert_eq!(
            seq_cv_plan(19, 10, 0),
            Err(EvalError::SeriesTooShort { total: 19, min: 20 })
        );
        assert!(seq_cv_plan(20, 10, 0).is_ok());
    }
}
