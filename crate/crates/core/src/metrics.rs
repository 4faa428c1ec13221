//! Evaluation metrics on ordinarily labeled test sets.

use crate::error::{Error, Result};
use crate::model::Scorer;
use crate::types::{Sample, Sign};

/// Fraction of test samples with `sign(g(x)) == y`. A score of exactly 0
/// counts as wrong regardless of the label, matching the zero-one tie rule.
pub fn accuracy(scorer: &Scorer, test: &[Sample]) -> Result<f64> {
    if test.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut correct = 0usize;
    for s in test {
        let y = s
            .label
            .ok_or_else(|| Error::invalid("test samples must be labeled"))?;
        let z = scorer.forward(&s.features)?;
        let hit = match y {
            Sign::Plus => z > 0.0,
            Sign::Minus => z < 0.0,
        };
        if hit {
            correct += 1;
        }
    }
    Ok(correct as f64 / test.len() as f64)
}

/// Rank-based AUC: `P(score_pos > score_neg) + 0.5 * P(score_pos == score_neg)`,
/// computed exactly through midranks.
pub fn auc_from_scores(positives: &[f64], negatives: &[f64]) -> Result<f64> {
    if positives.is_empty() || negatives.is_empty() {
        return Err(Error::SingleClassTest);
    }
    let n_pos = positives.len();
    let n_neg = negatives.len();
    let mut all: Vec<(f64, bool)> = positives
        .iter()
        .map(|&s| (s, true))
        .chain(negatives.iter().map(|&s| (s, false)))
        .collect();
    all.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("scores must not be NaN"));

    // midrank sum of the positives: tied scores share the average rank
    let mut rank_sum_pos = 0.0;
    let mut i = 0;
    while i < all.len() {
        let mut j = i;
        while j < all.len() && all[j].0 == all[i].0 {
            j += 1;
        }
        let midrank = (i + 1 + j) as f64 / 2.0; // average of ranks i+1 ..= j
        let tied_pos = all[i..j].iter().filter(|(_, p)| *p).count();
        rank_sum_pos += midrank * tied_pos as f64;
        i = j;
    }
    let u = rank_sum_pos - (n_pos * (n_pos + 1)) as f64 / 2.0;
    Ok(u / (n_pos as f64 * n_neg as f64))
}

/// AUC of a scorer on a labeled test set. Fails with
/// [`Error::SingleClassTest`] when only one class is present.
pub fn auc(scorer: &Scorer, test: &[Sample]) -> Result<f64> {
    if test.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for s in test {
        let y = s
            .label
            .ok_or_else(|| Error::invalid("test samples must be labeled"))?;
        let z = scorer.forward(&s.features)?;
        match y {
            Sign::Plus => pos.push(z),
            Sign::Minus => neg.push(z),
        }
    }
    auc_from_scores(&pos, &neg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Architecture;

    fn sample(x: f64, y: i8) -> Sample {
        Sample::labeled(vec![x], Sign::from_int(y as i64).unwrap()).unwrap()
    }

    fn identity_scorer() -> Scorer {
        Scorer::from_params(Architecture::Linear, 1, vec![1.0, 0.0]).unwrap()
    }

    #[test]
    fn accuracy_counts_correct_signs() {
        let s = identity_scorer();
        let test = vec![
            sample(2.0, 1),
            sample(-1.0, -1),
            sample(0.5, 1),
            sample(1.0, -1),
        ];
        assert!((accuracy(&s, &test).unwrap() - 0.75).abs() < 1e-15);
    }

    #[test]
    fn zero_scorer_has_zero_accuracy() {
        let s = Scorer::from_params(Architecture::Linear, 1, vec![0.0, 0.0]).unwrap();
        let test = vec![sample(1.0, 1), sample(-1.0, -1)];
        assert_eq!(accuracy(&s, &test).unwrap(), 0.0);
    }

    #[test]
    fn accuracy_rejects_empty_test() {
        let s = identity_scorer();
        assert_eq!(accuracy(&s, &[]), Err(Error::EmptyDataset));
    }

    #[test]
    fn auc_perfect_and_inverted() {
        assert_eq!(auc_from_scores(&[0.9, 0.8], &[0.2]).unwrap(), 1.0);
        assert_eq!(auc_from_scores(&[0.2], &[0.8]).unwrap(), 0.0);
    }

    #[test]
    fn auc_all_ties_is_half() {
        assert_eq!(auc_from_scores(&[0.5, 0.5], &[0.5, 0.5, 0.5]).unwrap(), 0.5);
    }

    #[test]
    fn auc_matches_pairwise_count() {
        // brute-force Mann-Whitney over all (pos, neg) pairs
        let pos = [0.1, 0.4, 0.4, 2.0, -0.3];
        let neg = [0.0, 0.4, -1.0, 0.2];
        let mut total = 0.0;
        for p in pos {
            for n in neg {
                if p > n {
                    total += 1.0;
                } else if p == n {
                    total += 0.5;
                }
            }
        }
        let expect = total / (pos.len() * neg.len()) as f64;
        let got = auc_from_scores(&pos, &neg).unwrap();
        assert!((got - expect).abs() < 1e-15);
    }

    #[test]
    fn auc_requires_both_classes() {
        let s = identity_scorer();
        let test = vec![sample(1.0, 1), sample(2.0, 1)];
        assert_eq!(auc(&s, &test), Err(Error::SingleClassTest));
    }

    #[test]
    fn auc_invariant_under_strictly_increasing_transforms() {
        let pos = [0.3, -0.2, 1.4, 0.0];
        let neg = [0.1, -0.9, 0.0];
        let base = auc_from_scores(&pos, &neg).unwrap();
        for f in [
            (|x: f64| 2.0 * x + 1.0) as fn(f64) -> f64,
            |x| x.tanh(),
            |x| x.exp(),
        ] {
            let tp: Vec<f64> = pos.iter().map(|&x| f(x)).collect();
            let tn: Vec<f64> = neg.iter().map(|&x| f(x)).collect();
            assert_eq!(auc_from_scores(&tp, &tn).unwrap(), base);
        }
    }
}
