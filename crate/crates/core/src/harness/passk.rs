use serde::{Deserialize, Serialize};

use crate::model::Verdict;

use super::HarnessError;

/// Outcome of one generation: `None` is a metric-error.
pub type Outcome = Option<bool>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PassAtK {
    pub k: usize,
    pub passed: usize,
    pub scored: usize,
    /// Indices of samples with fewer than `k` usable generations.
    pub incomplete: Vec<usize>,
}

impl PassAtK {
    /// Fraction in [0, 1]; `None` when no sample could be scored.
    pub fn accuracy(&self) -> Option<f64> {
        (self.scored > 0).then(|| self.passed as f64 / self.scored as f64)
    }
}

/// A sample counts as solved when any of its first `k` usable generations
/// passes. Metric-errors are skipped; samples left with fewer than `k`
/// usable generations are excluded and listed as incomplete.
pub fn pass_at_k_outcomes(per_sample: &[Vec<Outcome>], k: usize) -> Result<PassAtK, HarnessError> {
    if k == 0 {
        return Err(HarnessError::Config("k must be at least 1".into()));
    }
    let mut r = PassAtK {
        k,
        passed: 0,
        scored: 0,
        incomplete: Vec::new(),
    };
    for (i, outcomes) in per_sample.iter().enumerate() {
        let usable: Vec<bool> = outcomes.iter().filter_map(|o| *o).take(k).collect();
        if usable.len() < k {
            r.incomplete.push(i);
            continue;
        }
        r.scored += 1;
        if usable.iter().any(|&p| p) {
            r.passed += 1;
        }
    }
    Ok(r)
}

/// Same rule over verdict lists, each already in generation order.
pub fn pass_at_k(per_sample: &[Vec<Verdict>], k: usize) -> Result<PassAtK, HarnessError> {
    let outcomes: Vec<Vec<Outcome>> = per_sample.iter().map(|vs| vs.iter().map(outcome).collect()).collect();
    pass_at_k_outcomes(&outcomes, k)
}

pub fn outcome(v: &Verdict) -> Outcome {
    (!v.is_metric_error()).then_some(v.pass)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumerated_example() {
        let (t, f) = (Some(true), Some(false));
        let m = vec![vec![f, f, t, f, f], vec![f, f, f, f, f], vec![t, f, f, f, f], vec![f, t, f, f, f]];
        assert_eq!(pass_at_k_outcomes(&m, 1).unwrap().accuracy(), Some(0.25));
        assert_eq!(pass_at_k_outcomes(&m, 5).unwrap().accuracy(), Some(0.75));
    }

    #[test]
    fn metric_errors_are_skipped() {
        let m = vec![vec![None, Some(true)], vec![None, None]];
        let r = pass_at_k_outcomes(&m, 1).unwrap();
        assert_eq!((r.passed, r.scored, r.incomplete.clone()), (1, 1, vec![1]));
        assert!(pass_at_k_outcomes(&m, 0).is_err());
        assert_eq!(pass_at_k_outcomes(&[], 1).unwrap().accuracy(), None);
    }
}
