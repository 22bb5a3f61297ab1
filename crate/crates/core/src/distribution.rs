use std::collections::HashSet;

use crate::error::{Error, Result};

/// Probabilities below zero by less than this are rounding noise and are
/// clamped to zero.
const NEGATIVE_SLACK: f64 = 1e-12;
const SUM_TOL: f64 = 1e-10;

/// A finite probability vector keyed by outcome labels (branch or pointer
/// indices).
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeDistribution {
    labels: Vec<usize>,
    probs: Vec<f64>,
}

impl OutcomeDistribution {
    pub fn new(labels: Vec<usize>, probs: Vec<f64>) -> Result<Self> {
        if labels.len() != probs.len() {
            return Err(Error::invalid(format!(
                "{} labels for {} probabilities",
                labels.len(),
                probs.len()
            )));
        }
        if labels.is_empty() {
            return Err(Error::invalid("empty outcome distribution"));
        }
        let mut seen = HashSet::new();
        if let Some(dup) = labels.iter().find(|l| !seen.insert(**l)) {
            return Err(Error::invalid(format!("duplicate outcome label {dup}")));
        }
        let mut clean = Vec::with_capacity(probs.len());
        for p in probs {
            if !p.is_finite() || p < -NEGATIVE_SLACK {
                return Err(Error::invalid(format!("invalid probability {p}")));
            }
            clean.push(p.max(0.0));
        }
        let total: f64 = clean.iter().sum();
        if (total - 1.0).abs() > SUM_TOL {
            return Err(Error::invalid(format!("probabilities sum to {total}")));
        }
        Ok(Self { labels, probs: clean })
    }

    /// Labels `0..probs.len()`.
    pub fn indexed(probs: Vec<f64>) -> Result<Self> {
        Self::new((0..probs.len()).collect(), probs)
    }

    /// Relative frequencies of `counts` (labels `0..counts.len()`).
    pub fn from_counts(counts: &[u64]) -> Result<Self> {
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return Err(Error::invalid("no samples"));
        }
        Self::indexed(counts.iter().map(|&k| k as f64 / total as f64).collect())
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn prob_of(&self, label: usize) -> Option<f64> {
        self.labels
            .iter()
            .position(|&l| l == label)
            .map(|k| self.probs[k])
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.labels.iter().copied().zip(self.probs.iter().copied())
    }

    /// `max |p_k - q_k|` over matching labels.
    pub fn max_abs_deviation(&self, other: &OutcomeDistribution) -> Result<f64> {
        self.paired(other)
            .map(|pairs| pairs.into_iter().map(|(p, q)| (p - q).abs()).fold(0.0, f64::max))
    }

    fn paired(&self, other: &OutcomeDistribution) -> Result<Vec<(f64, f64)>> {
        if self.len() != other.len() {
            return Err(Error::invalid("outcome label sets differ"));
        }
        self.iter()
            .map(|(label, p)| {
                other
                    .prob_of(label)
                    .map(|q| (p, q))
                    .ok_or_else(|| Error::invalid(format!("label {label} missing from other distribution")))
            })
            .collect()
    }
}

/// Total-variation distance `½∑|pₖ - qₖ|`.
pub fn tv_distance(p: &OutcomeDistribution, q: &OutcomeDistribution) -> Result<f64> {
    let pairs = p.paired(q)?;
    let d = 0.5 * pairs.iter().map(|(a, b)| (a - b).abs()).sum::<f64>();
    Ok(d.clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tv_examples() {
        let p = OutcomeDistribution::indexed(vec![0.36, 0.64]).unwrap();
        assert_eq!(tv_distance(&p, &p).unwrap(), 0.0);

        let a = OutcomeDistribution::indexed(vec![1.0, 0.0]).unwrap();
        let b = OutcomeDistribution::indexed(vec![0.0, 1.0]).unwrap();
        assert_eq!(tv_distance(&a, &b).unwrap(), 1.0);

        // q = 2 exponent rule on weights (0.36, 0.64)
        let s = 0.36f64.powi(2) + 0.64f64.powi(2);
        let q = OutcomeDistribution::indexed(vec![0.36f64.powi(2) / s, 0.64f64.powi(2) / s]).unwrap();
        let gap = tv_distance(&p, &q).unwrap();
        assert!((gap - (0.36 - 0.36f64.powi(2) / s)).abs() < 1e-15);
        assert!((gap - 0.119643).abs() < 1e-6);
    }

    #[test]
    fn tv_matches_by_label_not_position() {
        let p = OutcomeDistribution::new(vec![3, 7], vec![0.25, 0.75]).unwrap();
        let q = OutcomeDistribution::new(vec![7, 3], vec![0.75, 0.25]).unwrap();
        assert_eq!(tv_distance(&p, &q).unwrap(), 0.0);
    }

    #[test]
    fn tv_rejects_label_mismatch() {
        let p = OutcomeDistribution::new(vec![0, 1], vec![0.5, 0.5]).unwrap();
        let q = OutcomeDistribution::new(vec![0, 2], vec![0.5, 0.5]).unwrap();
        assert!(matches!(tv_distance(&p, &q), Err(Error::InvalidInput(_))));
        let r = OutcomeDistribution::indexed(vec![1.0]).unwrap();
        assert!(tv_distance(&p, &r).is_err());
    }

    #[test]
    fn constructor_invariants() {
        assert!(OutcomeDistribution::indexed(vec![0.5, 0.4]).is_err());
        assert!(OutcomeDistribution::indexed(vec![1.5, -0.5]).is_err());
        assert!(OutcomeDistribution::new(vec![1, 1], vec![0.5, 0.5]).is_err());
        let tiny_negative = OutcomeDistribution::indexed(vec![1.0, -1e-16]).unwrap();
        assert_eq!(tiny_negative.probs()[1], 0.0);
        let freq = OutcomeDistribution::from_counts(&[1, 3]).unwrap();
        assert_eq!(freq.probs(), &[0.25, 0.75]);
    }
}
