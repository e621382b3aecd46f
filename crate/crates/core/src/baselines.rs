//! Zero-forcing and regularized zero-forcing baselines.
//!
//! Both precoders share the form `W = H^H (H H^H + alpha I)^{-1}` with
//! `alpha = 0` for ZF and `alpha = K sigma^2` for RZF. A slot's transmit
//! signal spends the whole power budget, `x = beta W s` with
//! `beta = sqrt(P_T) / ||W s||`, and the matched receive rescaling factor is
//! `gamma = beta` for ZF (the effective channel is exactly the identity) and
//! `gamma = beta * mean_k Re((H W)_{kk})` for RZF, the average diagonal gain
//! the regularization leaves in place.

use nalgebra::{Complex, DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal_model::ChannelMatrix;

/// Condition-number ceiling beyond which the Gram matrix is treated as
/// singular.
const MAX_CONDITION: f64 = 1e12;

/// Which closed-form linear precoder to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LinearPrecoderKind {
    Zf,
    Rzf,
}

impl LinearPrecoderKind {
    /// Diagonal loading `alpha` added to the Gram matrix.
    pub fn regularization(self, users: usize, sigma: f64) -> f64 {
        match self {
            LinearPrecoderKind::Zf => 0.0,
            LinearPrecoderKind::Rzf => users as f64 * sigma * sigma,
        }
    }
}

/// A channel-dependent precoding plan, built once per coherence block.
///
/// Precomputes `W` and the mean diagonal gain of `H W`, so precoding a slot
/// reduces to one matrix-vector product and a normalization.
#[derive(Debug, Clone)]
pub struct LinearPrecoderPlan {
    kind: LinearPrecoderKind,
    w: DMatrix<Complex<f64>>,
    mean_diag_gain: f64,
    users: usize,
    antennas: usize,
}

impl LinearPrecoderPlan {
    /// Factor the Gram matrix of `h` and precompute the precoder.
    ///
    /// Fails with [`Error::SingularChannel`] when the regularized Gram matrix
    /// has a condition number above `1e12`.
    pub fn new(h: &ChannelMatrix, sigma: f64, kind: LinearPrecoderKind) -> Result<Self> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::InvalidParam(format!(
                "noise level sigma must be positive and finite, got {sigma}"
            )));
        }
        let users = h.users();
        let antennas = h.antennas();
        let hm = DMatrix::from_fn(users, antennas, |r, c| h.row(r)[c]);
        let alpha = kind.regularization(users, sigma);
        let mut gram = &hm * hm.adjoint();
        for k in 0..users {
            gram[(k, k)] += Complex::new(alpha, 0.0);
        }
        let svd = gram.clone().svd(false, false);
        let s_max = svd.singular_values.max();
        let s_min = svd.singular_values.min();
        let cond = if s_min > 0.0 { s_max / s_min } else { f64::INFINITY };
        if !cond.is_finite() || cond > MAX_CONDITION {
            return Err(Error::SingularChannel {
                cond,
                context: format!("{users}x{antennas} channel, alpha = {alpha:.3e}"),
            });
        }
        let gram_inv = gram
            .try_inverse()
            .ok_or(Error::SingularChannel {
                cond,
                context: "Gram inversion failed".into(),
            })?;
        let w = hm.adjoint() * &gram_inv;
        // H W = (Gram - alpha I) Gram^{-1} = I - alpha Gram^{-1}: the mean
        // diagonal gain only needs the inverse's diagonal.
        let mean_diag_gain = (0..users)
            .map(|k| 1.0 - alpha * gram_inv[(k, k)].re)
            .sum::<f64>()
            / users as f64;
        Ok(Self {
            kind,
            w,
            mean_diag_gain,
            users,
            antennas,
        })
    }

    pub fn kind(&self) -> LinearPrecoderKind {
        self.kind
    }

    /// Mean of `Re((H W)_{kk})` over users (1 exactly for ZF).
    pub fn mean_diag_gain(&self) -> f64 {
        self.mean_diag_gain
    }

    /// Precode one symbol vector under the power budget.
    ///
    /// Returns the transmit signal `x` with `||x||^2 = P_T` and the matched
    /// receive rescaling factor `gamma`.
    pub fn precode(&self, symbols: &[Complex64], power_budget: f64) -> Result<(Vec<Complex64>, f64)> {
        if symbols.len() != self.users {
            return Err(Error::Dimension(format!(
                "slot has {} symbols for {} users",
                symbols.len(),
                self.users
            )));
        }
        if !(power_budget.is_finite() && power_budget > 0.0) {
            return Err(Error::InvalidParam(format!(
                "power budget must be positive and finite, got {power_budget}"
            )));
        }
        let s = DVector::from_column_slice(symbols);
        let ws = &self.w * s;
        let ws_norm = ws.norm();
        if !(ws_norm.is_finite() && ws_norm > 0.0) {
            return Err(Error::NonFinite("precoded signal norm"));
        }
        let beta = power_budget.sqrt() / ws_norm;
        let x = ws.iter().map(|v| v * beta).collect();
        let gamma = beta * self.mean_diag_gain;
        debug_assert_eq!(self.antennas, self.w.nrows());
        Ok((x, gamma))
    }
}

/// One-shot convenience wrapper: plan on `h`, then precode one slot.
pub fn linear_precode(
    h: &ChannelMatrix,
    symbols: &[Complex64],
    power_budget: f64,
    sigma: f64,
    kind: LinearPrecoderKind,
) -> Result<(Vec<Complex64>, f64)> {
    LinearPrecoderPlan::new(h, sigma, kind)?.precode(symbols, power_budget)
}
