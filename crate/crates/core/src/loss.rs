//! Classification losses over softmax outputs.
//!
//! Every loss takes the predicted distribution `u` and the true class `j`.
//! The key structural property is the class sum `sum_i loss(u, i)`: for MAE
//! and the 0-1 loss it is a constant independent of `u` (the losses are
//! *symmetric*), which is what the noise-tolerance results build on. For MSE
//! the sum is bounded; for CCE it is unbounded.

use crate::error::{Error, Result};
use crate::math::{argmax_tiebreak, ProbVector};

/// Floor applied to the predicted probability inside CCE so the value
/// stays finite even when the softmax underflows to exactly zero.
pub const CCE_PROB_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LossKind {
    /// Categorical cross entropy: log(1 / u_j).
    Cce,
    /// Mean absolute error against the one-hot target: 2 - 2 u_j.
    Mae,
    /// Squared error against the one-hot target: |u|^2 + 1 - 2 u_j.
    Mse,
    /// Misclassification indicator under deterministic argmax.
    ZeroOne,
}

impl LossKind {
    pub const ALL: [LossKind; 4] = [LossKind::Cce, LossKind::Mae, LossKind::Mse, LossKind::ZeroOne];

    /// The constant value of `sum_i loss(u, i)` when the loss is symmetric,
    /// `None` otherwise. MAE sums to 2k - 2; the 0-1 loss sums to k - 1.
    pub fn symmetry_constant(self, k: usize) -> Option<f64> {
        match self {
            LossKind::Mae => Some(2.0 * k as f64 - 2.0),
            LossKind::ZeroOne => Some(k as f64 - 1.0),
            LossKind::Cce | LossKind::Mse => None,
        }
    }

    pub fn is_symmetric(self) -> bool {
        matches!(self, LossKind::Mae | LossKind::ZeroOne)
    }

    /// Whether a gradient with respect to logits exists everywhere.
    pub fn differentiable(self) -> bool {
        !matches!(self, LossKind::ZeroOne)
    }

    /// Lowercase tag used in file names and config values.
    pub fn label(self) -> &'static str {
        match self {
            LossKind::Cce => "cce",
            LossKind::Mae => "mae",
            LossKind::Mse => "mse",
            LossKind::ZeroOne => "zeroone",
        }
    }
}

impl std::fmt::Display for LossKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            LossKind::Cce => "CCE",
            LossKind::Mae => "MAE",
            LossKind::Mse => "MSE",
            LossKind::ZeroOne => "ZeroOne",
        };
        f.write_str(name)
    }
}

impl std::str::FromStr for LossKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "cce" => Ok(LossKind::Cce),
            "mae" => Ok(LossKind::Mae),
            "mse" => Ok(LossKind::Mse),
            "zero-one" | "zeroone" | "0-1" => Ok(LossKind::ZeroOne),
            other => Err(Error::InvalidInput(format!("unknown loss '{other}'"))),
        }
    }
}

pub fn loss_value(kind: LossKind, u: &ProbVector, j: usize) -> Result<f64> {
    if j >= u.k() {
        return Err(Error::InvalidLabel { label: j, classes: u.k() });
    }
    let v = match kind {
        LossKind::Cce => -u[j].max(CCE_PROB_FLOOR).ln(),
        LossKind::Mae => 2.0 - 2.0 * u[j],
        LossKind::Mse => {
            let sq: f64 = u.iter().map(|p| p * p).sum();
            sq + 1.0 - 2.0 * u[j]
        }
        LossKind::ZeroOne => {
            if argmax_tiebreak(u.as_slice())? == j {
                0.0
            } else {
                1.0
            }
        }
    };
    Ok(v)
}

/// `sum_j loss(u, j)` over all classes.
pub fn class_sum(kind: LossKind, u: &ProbVector) -> f64 {
    (0..u.k())
        .map(|j| loss_value(kind, u, j).expect("class index in range"))
        .sum()
}

/// Gradient of `loss(softmax(z), j)` with respect to the logits `z`,
/// evaluated at `u = softmax(z)`.
///
/// CCE reduces to `u - e_j` and MAE to `-2 u_j (e_j - u)`. MSE goes through
/// the softmax Jacobian `J[i][m] = u_i (delta_im - u_m)` explicitly; class
/// counts are small here and the explicit product mirrors the derivation.
pub fn loss_grad_logits(kind: LossKind, u: &ProbVector, j: usize) -> Result<Vec<f64>> {
    let k = u.k();
    if j >= k {
        return Err(Error::InvalidLabel { label: j, classes: k });
    }
    match kind {
        LossKind::Cce => Ok((0..k)
            .map(|i| u[i] - if i == j { 1.0 } else { 0.0 })
            .collect()),
        LossKind::Mae => Ok((0..k)
            .map(|i| {
                let e = if i == j { 1.0 } else { 0.0 };
                -2.0 * u[j] * (e - u[i])
            })
            .collect()),
        LossKind::Mse => {
            let grad_u: Vec<f64> = (0..k)
                .map(|m| 2.0 * u[m] - if m == j { 2.0 } else { 0.0 })
                .collect();
            let mut grad_z = vec![0.0; k];
            for m in 0..k {
                for i in 0..k {
                    let delta = if i == m { 1.0 } else { 0.0 };
                    grad_z[m] += grad_u[i] * u[i] * (delta - u[m]);
                }
            }
            Ok(grad_z)
        }
        LossKind::ZeroOne => Err(Error::UnsupportedGradient(kind)),
    }
}
