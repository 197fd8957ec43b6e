//! Deterministic train/test/eval dataset splits.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SplitError {
    #[error("invalid split fractions: train {train}, eval {eval}: {reason}")]
    BadFractions {
        train: f64,
        eval: f64,
        reason: String,
    },
    #[error("items must be nonempty")]
    NoItems,
    #[error("duplicate item {0:?}")]
    DuplicateItem(String),
}

/// Split configuration. `train_fraction + eval_fraction < 1`; the remainder
/// becomes the test set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub eval_fraction: f64,
    pub seed: u64,
}

impl SplitSpec {
    pub fn new(train_fraction: f64, eval_fraction: f64, seed: u64) -> Result<Self, SplitError> {
        let bad = |reason: &str| SplitError::BadFractions {
            train: train_fraction,
            eval: eval_fraction,
            reason: reason.to_string(),
        };
        if !train_fraction.is_finite() || !(0.0..1.0).contains(&train_fraction) || train_fraction == 0.0 {
            return Err(bad("train_fraction must lie in (0, 1)"));
        }
        if !eval_fraction.is_finite() || !(0.0..1.0).contains(&eval_fraction) {
            return Err(bad("eval_fraction must lie in [0, 1)"));
        }
        if train_fraction + eval_fraction >= 1.0 {
            return Err(bad("train_fraction + eval_fraction must be < 1"));
        }
        Ok(Self {
            train_fraction,
            eval_fraction,
            seed,
        })
    }
}

/// Disjoint partition of the input filenames.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitResult {
    pub train: Vec<String>,
    pub test: Vec<String>,
    pub eval: Vec<String>,
}

/// Partitions `items` into train/test/eval sets.
///
/// Deterministic under `(items, seed)`: items are sorted lexicographically
/// and shuffled with a seeded Fisher-Yates, so the incoming order never
/// matters. Sizes follow round-half-up of the fractions, with the eval count
/// capped so the test set is never negative.
pub fn split_dataset(items: &[String], spec: &SplitSpec) -> Result<SplitResult, SplitError> {
    if items.is_empty() {
        return Err(SplitError::NoItems);
    }
    let mut sorted: Vec<String> = items.to_vec();
    sorted.sort_unstable();
    for pair in sorted.windows(2) {
        if pair[0] == pair[1] {
            return Err(SplitError::DuplicateItem(pair[0].clone()));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    // Fisher-Yates over the sorted list.
    for i in (1..sorted.len()).rev() {
        let j = rng.random_range(0..=i);
        sorted.swap(i, j);
    }

    let n = sorted.len();
    let n_train = round_half_up(spec.train_fraction * n as f64).min(n);
    let n_eval = round_half_up(spec.eval_fraction * n as f64).min(n - n_train);

    let mut iter = sorted.into_iter();
    let train: Vec<String> = iter.by_ref().take(n_train).collect();
    let eval: Vec<String> = iter.by_ref().take(n_eval).collect();
    let test: Vec<String> = iter.collect();

    Ok(SplitResult { train, test, eval })
}

fn round_half_up(x: f64) -> usize {
    (x + 0.5).floor() as usize
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("img_{i:04}.jpg")).collect()
    }

    #[test]
    fn exact_fractions_split_cleanly() {
        let spec = SplitSpec::new(0.8, 0.0, 7).unwrap();
        let result = split_dataset(&names(10), &spec).unwrap();
        assert_eq!(result.train.len(), 8);
        assert_eq!(result.test.len(), 2);
        assert_eq!(result.eval.len(), 0);
    }

    #[test]
    fn same_seed_reproduces_partition() {
        let spec = SplitSpec::new(0.7, 0.1, 42).unwrap();
        let items = names(37);
        assert_eq!(
            split_dataset(&items, &spec).unwrap(),
            split_dataset(&items, &spec).unwrap()
        );
    }

    #[test]
    fn input_order_does_not_matter() {
        let spec = SplitSpec::new(0.7, 0.1, 42).unwrap();
        let items = names(20);
        let mut reversed = items.clone();
        reversed.reverse();
        assert_eq!(
            split_dataset(&items, &spec).unwrap(),
            split_dataset(&reversed, &spec).unwrap()
        );
    }

    #[test]
    fn corpus_sized_split_follows_rounding_rule() {
        // 258 * 0.85 = 219.3 -> 219; 258 * 0.074 = 19.092 -> 19; rest 20.
        let spec = SplitSpec::new(0.85, 0.074, 1).unwrap();
        let result = split_dataset(&names(258), &spec).unwrap();
        assert_eq!(result.train.len(), 219);
        assert_eq!(result.test.len(), 20);
        assert_eq!(result.eval.len(), 19);
    }

    #[test]
    fn partition_is_disjoint_and_covering() {
        let spec = SplitSpec::new(0.6, 0.2, 99).unwrap();
        let items = names(53);
        let result = split_dataset(&items, &spec).unwrap();
        let union: HashSet<&String> = result
            .train
            .iter()
            .chain(&result.test)
            .chain(&result.eval)
            .collect();
        assert_eq!(union.len(), items.len());
        assert_eq!(
            result.train.len() + result.test.len() + result.eval.len(),
            items.len()
        );
    }

    #[test]
    fn invalid_specs_rejected() {
        assert!(SplitSpec::new(0.0, 0.1, 0).is_err());
        assert!(SplitSpec::new(1.0, 0.0, 0).is_err());
        assert!(SplitSpec::new(0.8, 0.2, 0).is_err());
        assert!(SplitSpec::new(0.8, -0.1, 0).is_err());
        assert!(SplitSpec::new(0.7, 0.2, 0).is_ok());
    }

    #[test]
    fn duplicates_and_empty_input_rejected() {
        let spec = SplitSpec::new(0.8, 0.0, 0).unwrap();
        assert_eq!(split_dataset(&[], &spec).unwrap_err(), SplitError::NoItems);
        let items = vec!["a.jpg".to_string(), "a.jpg".to_string()];
        assert_eq!(
            split_dataset(&items, &spec).unwrap_err(),
            SplitError::DuplicateItem("a.jpg".into())
        );
    }
}
