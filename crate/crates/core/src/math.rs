//! Probability-simplex primitives: validated probability vectors, a
//! numerically stable softmax, and deterministic argmax.

use crate::error::{Error, Result};

/// Tolerance on probability mass sums throughout the crate.
pub const PROB_SUM_TOL: f64 = 1e-12;

/// A distribution over `k >= 2` classes: finite, nonnegative entries that
/// sum to 1 within [`PROB_SUM_TOL`].
#[derive(Debug, Clone, PartialEq)]
pub struct ProbVector(Vec<f64>);

impl ProbVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InvalidInput(format!(
                "probability vector needs at least 2 entries, got {}",
                values.len()
            )));
        }
        let mut sum = 0.0;
        for (i, &p) in values.iter().enumerate() {
            if !p.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "probability entry {i} is not finite"
                )));
            }
            if !(0.0..=1.0 + PROB_SUM_TOL).contains(&p) {
                return Err(Error::InvalidInput(format!(
                    "probability entry {i} = {p} outside [0, 1]"
                )));
            }
            sum += p;
        }
        if (sum - 1.0).abs() > PROB_SUM_TOL {
            return Err(Error::InvalidInput(format!(
                "probabilities sum to {sum}, expected 1"
            )));
        }
        Ok(Self(values))
    }

    pub fn uniform(k: usize) -> Result<Self> {
        Self::new(vec![1.0 / k as f64; k])
    }

    pub fn one_hot(k: usize, j: usize) -> Result<Self> {
        if j >= k {
            return Err(Error::InvalidLabel { label: j, classes: k });
        }
        let mut v = vec![0.0; k];
        v[j] = 1.0;
        Self::new(v)
    }

    pub fn k(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.0.iter()
    }
}

impl std::ops::Index<usize> for ProbVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Softmax with the usual max shift, so large logits cannot overflow.
/// Rejects non-finite logits and inputs shorter than 2.
pub fn softmax(logits: &[f64]) -> Result<ProbVector> {
    if logits.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "softmax needs at least 2 logits, got {}",
            logits.len()
        )));
    }
    let mut max = f64::NEG_INFINITY;
    for &z in logits {
        if !z.is_finite() {
            return Err(Error::InvalidInput(format!("non-finite logit {z}")));
        }
        if z > max {
            max = z;
        }
    }
    let mut exps: Vec<f64> = logits.iter().map(|&z| (z - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    for e in &mut exps {
        *e /= sum;
    }
    ProbVector::new(exps)
}

/// Index of the largest entry; ties resolve to the smallest index so that
/// predictions are deterministic. Errors on empty input.
pub fn argmax_tiebreak(values: &[f64]) -> Result<usize> {
    if values.is_empty() {
        return Err(Error::InvalidInput("argmax of empty slice".into()));
    }
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;

    #[test]
    fn softmax_of_equal_logits_is_uniform() {
        let u = softmax(&[0.0, 0.0]).unwrap();
        assert_eq!(u.as_slice(), &[0.5, 0.5]);
        let u = softmax(&[1000.0, 1000.0, 1000.0]).unwrap();
        for &p in u.as_slice() {
            assert!((p - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn softmax_handles_large_spread_without_overflow() {
        let u = softmax(&[1000.0, 0.0, -1000.0]).unwrap();
        assert!((u[0] - 1.0).abs() < 1e-12);
        assert!(u[1] >= 0.0 && u[2] >= 0.0);
    }

    #[test]
    fn softmax_is_shift_invariant() {
        let mut rng = Rng::new(21);
        for _ in 0..100 {
            let k = 2 + (rng.uniform() * 6.0) as usize;
            let z: Vec<f64> = (0..k).map(|_| rng.uniform_in(-50.0, 50.0)).collect();
            let c = rng.uniform_in(-1e3, 1e3);
            let shifted: Vec<f64> = z.iter().map(|&x| x + c).collect();
            let a = softmax(&z).unwrap();
            let b = softmax(&shifted).unwrap();
            for (x, y) in a.iter().zip(b.iter()) {
                assert!((x - y).abs() <= 1e-12, "{x} vs {y}");
            }
        }
    }

    #[test]
    fn softmax_rejects_non_finite_input() {
        assert!(softmax(&[f64::NAN, 0.0]).is_err());
        assert!(softmax(&[f64::INFINITY, 0.0]).is_err());
        assert!(softmax(&[0.0, f64::NEG_INFINITY]).is_err());
    }

    #[test]
    fn softmax_rejects_short_input() {
        assert!(softmax(&[]).is_err());
        assert!(softmax(&[1.0]).is_err());
    }

    #[test]
    fn softmax_output_is_always_a_valid_distribution() {
        let mut rng = Rng::new(22);
        for i in 0..10_000 {
            let k = 2 + i % 9;
            let scale = 10f64.powf(rng.uniform_in(-3.0, 6.0));
            let z: Vec<f64> = (0..k).map(|_| rng.uniform_in(-1.0, 1.0) * scale).collect();
            let u = softmax(&z).unwrap();
            assert!(u.iter().all(|&p| (0.0..=1.0).contains(&p)));
            assert!((u.iter().sum::<f64>() - 1.0).abs() <= PROB_SUM_TOL);
        }
    }

    #[test]
    fn argmax_prefers_smallest_index_on_ties() {
        assert_eq!(argmax_tiebreak(&[1.0, 3.0, 3.0]).unwrap(), 1);
        assert_eq!(argmax_tiebreak(&[2.0, 2.0, 2.0]).unwrap(), 0);
        assert_eq!(argmax_tiebreak(&[0.1, 0.9, 0.5]).unwrap(), 1);
    }

    #[test]
    fn argmax_rejects_empty_input() {
        assert!(argmax_tiebreak(&[]).is_err());
    }

    #[test]
    fn prob_vector_validation() {
        assert!(ProbVector::new(vec![0.5, 0.5]).is_ok());
        assert!(ProbVector::new(vec![1.0]).is_err());
        assert!(ProbVector::new(vec![0.6, 0.6]).is_err());
        assert!(ProbVector::new(vec![-0.1, 1.1]).is_err());
        assert!(ProbVector::new(vec![f64::NAN, 1.0]).is_err());
        assert!(ProbVector::new(vec![0.5, 0.5 + 1e-10]).is_err());
        assert!(ProbVector::new(vec![0.5, 0.5 + 1e-13]).is_ok());
    }

    #[test]
    fn prob_vector_constructors() {
        let u = ProbVector::uniform(4).unwrap();
        assert_eq!(u.as_slice(), &[0.25, 0.25, 0.25, 0.25]);
        let h = ProbVector::one_hot(3, 2).unwrap();
        assert_eq!(h.as_slice(), &[0.0, 0.0, 1.0]);
        assert!(ProbVector::one_hot(3, 3).is_err());
        assert!(ProbVector::uniform(1).is_err());
    }
}
