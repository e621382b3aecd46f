//! Exact symbol-error-rate objective and its gradients.
//!
//! For user k with rotated symbol `s_hat_k`, receive rescaling `gamma` and
//! noise level `sigma`, a minimum-distance detector errs on the real axis
//! unless the rescaled observation falls inside the decision interval of
//! `s_hat_r`. With `u_k = f_k . x_bar` and `c = sqrt(2)/sigma`, the interval
//! bounds appear through the normalized margins
//!
//! ```text
//! delta_r_minus = (gamma s_hat_r - u_k - gamma d) c
//! delta_r_plus  = (gamma s_hat_r - u_k + gamma d) c
//! ```
//!
//! and the probability of a correct real decision is
//! `Q(delta_r_minus) - b_r Q(delta_r_plus)`: the outermost level errs only
//! toward the inside (`b_r = 0`), inner levels err both ways (`b_r = 1`).
//! The imaginary axis is identical with `v_k = g_k . x_bar`. Per-user SER is
//! `E_k = 1 - (prob real correct)(prob imag correct)` and the objective is
//! the average `(1/K) sum_k E_k`. Gradients are exact closed forms in the
//! Gaussian density; saturated tails underflow to zero gradient naturally.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal_model::LiftedSlot;

const INV_SQRT_2PI: f64 = 0.3989422804014327;

/// Gaussian tail probability `Q(x) = P(Z > x)` for standard normal Z.
#[inline]
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

/// Derivative `Q'(x) = -phi(x)`, the negated standard normal density.
#[inline]
fn q_prime(x: f64) -> f64 {
    -INV_SQRT_2PI * (-0.5 * x * x).exp()
}

/// The four normalized decision margins of one user, plus the symbol offsets
/// `s±` that drive the gamma derivative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaSet {
    pub delta_r_minus: f64,
    pub delta_r_plus: f64,
    pub delta_i_minus: f64,
    pub delta_i_plus: f64,
    /// `d - s_hat_r`.
    pub s_r_minus: f64,
    /// `d + s_hat_r`.
    pub s_r_plus: f64,
    /// `d - s_hat_i`.
    pub s_i_minus: f64,
    /// `d + s_hat_i`.
    pub s_i_plus: f64,
}

/// Decision margins of user `k` at the point `(x_bar, gamma)`.
pub fn delta_set(slot: &LiftedSlot, x_bar: &[f64], gamma: f64, k: usize) -> Result<DeltaSet> {
    check_point(slot, x_bar, gamma)?;
    if k >= slot.users() {
        return Err(Error::Dimension(format!(
            "user index {k} out of range for {} users",
            slot.users()
        )));
    }
    let u = dot(slot.f_row(k), x_bar);
    let v = dot(slot.g_row(k), x_bar);
    let rot = slot.rotated(k);
    let d = slot.half_distance();
    let c = std::f64::consts::SQRT_2 / slot.sigma();
    let gd = gamma * d;
    Ok(DeltaSet {
        delta_r_minus: (gamma * rot.s_hat_r - u - gd) * c,
        delta_r_plus: (gamma * rot.s_hat_r - u + gd) * c,
        delta_i_minus: (gamma * rot.s_hat_i - v - gd) * c,
        delta_i_plus: (gamma * rot.s_hat_i - v + gd) * c,
        s_r_minus: d - rot.s_hat_r,
        s_r_plus: d + rot.s_hat_r,
        s_i_minus: d - rot.s_hat_i,
        s_i_plus: d + rot.s_hat_i,
    })
}

/// Exact SER of user `k` under rescaled minimum-distance detection.
pub fn per_user_ser(slot: &LiftedSlot, x_bar: &[f64], gamma: f64, k: usize) -> Result<f64> {
    check_point(slot, x_bar, gamma)?;
    if k >= slot.users() {
        return Err(Error::Dimension(format!(
            "user index {k} out of range for {} users",
            slot.users()
        )));
    }
    let u = dot(slot.f_row(k), x_bar);
    let v = dot(slot.g_row(k), x_bar);
    let (a, b) = correct_probs(slot, k, u, v, gamma);
    Ok(1.0 - a * b)
}

/// Average SER objective `(1/K) sum_k E_k` at `(x_bar, gamma)`.
pub fn objective(slot: &LiftedSlot, x_bar: &[f64], gamma: f64) -> Result<f64> {
    check_point(slot, x_bar, gamma)?;
    let mut u = vec![0.0; slot.users()];
    let mut v = vec![0.0; slot.users()];
    eval_uv(slot, x_bar, &mut u, &mut v);
    Ok(objective_uv(slot, &u, &v, gamma))
}

/// Euclidean gradient of the objective with respect to `x_bar`.
pub fn grad_x(slot: &LiftedSlot, x_bar: &[f64], gamma: f64) -> Result<Vec<f64>> {
    check_point(slot, x_bar, gamma)?;
    let mut u = vec![0.0; slot.users()];
    let mut v = vec![0.0; slot.users()];
    eval_uv(slot, x_bar, &mut u, &mut v);
    let mut out = vec![0.0; slot.dim()];
    grad_x_uv(slot, &u, &v, gamma, &mut out);
    Ok(out)
}

/// Derivative of the objective with respect to `gamma`.
pub fn grad_gamma(slot: &LiftedSlot, x_bar: &[f64], gamma: f64) -> Result<f64> {
    check_point(slot, x_bar, gamma)?;
    let mut u = vec![0.0; slot.users()];
    let mut v = vec![0.0; slot.users()];
    eval_uv(slot, x_bar, &mut u, &mut v);
    Ok(grad_gamma_uv(slot, &u, &v, gamma))
}

fn check_point(slot: &LiftedSlot, x_bar: &[f64], gamma: f64) -> Result<()> {
    if x_bar.len() != slot.dim() {
        return Err(Error::Dimension(format!(
            "lifted point has length {}, expected {}",
            x_bar.len(),
            slot.dim()
        )));
    }
    if x_bar.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("lifted point"));
    }
    if !gamma.is_finite() || gamma <= 0.0 {
        return Err(Error::NonPositiveGamma(gamma));
    }
    Ok(())
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Fill `u[k] = f_k . x_bar` and `v[k] = g_k . x_bar` for all users.
///
/// These inner products are the only place `x_bar` enters the objective, so
/// the solver caches them across the gamma line search.
pub(crate) fn eval_uv(slot: &LiftedSlot, x_bar: &[f64], u: &mut [f64], v: &mut [f64]) {
    for k in 0..slot.users() {
        u[k] = dot(slot.f_row(k), x_bar);
        v[k] = dot(slot.g_row(k), x_bar);
    }
}

/// Per-axis probabilities of a correct decision, `(A_k, B_k)`.
#[inline]
fn correct_probs(slot: &LiftedSlot, k: usize, u: f64, v: f64, gamma: f64) -> (f64, f64) {
    let rot = slot.rotated(k);
    let d = slot.half_distance();
    let c = std::f64::consts::SQRT_2 / slot.sigma();
    let gd = gamma * d;
    let a = axis_correct(gamma * rot.s_hat_r - u, gd, c, rot.b_r);
    let b = axis_correct(gamma * rot.s_hat_i - v, gd, c, rot.b_i);
    (a, b)
}

#[inline]
fn axis_correct(center: f64, gd: f64, c: f64, inner: bool) -> f64 {
    let q_minus = q_function((center - gd) * c);
    let correct = if inner {
        q_minus - q_function((center + gd) * c)
    } else {
        q_minus
    };
    // Q is non-increasing so this is >= 0 exactly; guard the last-ulp
    // round-off of the subtraction.
    correct.max(0.0)
}

pub(crate) fn objective_uv(slot: &LiftedSlot, u: &[f64], v: &[f64], gamma: f64) -> f64 {
    let mut acc = 0.0;
    for k in 0..slot.users() {
        let (a, b) = correct_probs(slot, k, u[k], v[k], gamma);
        acc += 1.0 - a * b;
    }
    acc / slot.users() as f64
}

pub(crate) fn grad_x_uv(slot: &LiftedSlot, u: &[f64], v: &[f64], gamma: f64, out: &mut [f64]) {
    out.fill(0.0);
    let d = slot.half_distance();
    let c = std::f64::consts::SQRT_2 / slot.sigma();
    let gd = gamma * d;
    let scale = c / slot.users() as f64;
    for k in 0..slot.users() {
        let rot = slot.rotated(k);
        let cr = gamma * rot.s_hat_r - u[k];
        let ci = gamma * rot.s_hat_i - v[k];
        let a = axis_correct(cr, gd, c, rot.b_r);
        let b = axis_correct(ci, gd, c, rot.b_i);
        // d(E_k)/du = c [Q'(dr-) - b_r Q'(dr+)] B, and likewise for v.
        let mut qp_r = q_prime((cr - gd) * c);
        if rot.b_r {
            qp_r -= q_prime((cr + gd) * c);
        }
        let mut qp_i = q_prime((ci - gd) * c);
        if rot.b_i {
            qp_i -= q_prime((ci + gd) * c);
        }
        let wf = scale * qp_r * b;
        let wg = scale * a * qp_i;
        if wf == 0.0 && wg == 0.0 {
            continue;
        }
        for ((o, fi), gi) in out.iter_mut().zip(slot.f_row(k)).zip(slot.g_row(k)) {
            *o += wf * fi + wg * gi;
        }
    }
}

pub(crate) fn grad_gamma_uv(slot: &LiftedSlot, u: &[f64], v: &[f64], gamma: f64) -> f64 {
    let d = slot.half_distance();
    let c = std::f64::consts::SQRT_2 / slot.sigma();
    let gd = gamma * d;
    let mut acc = 0.0;
    for k in 0..slot.users() {
        let rot = slot.rotated(k);
        let cr = gamma * rot.s_hat_r - u[k];
        let ci = gamma * rot.s_hat_i - v[k];
        let a = axis_correct(cr, gd, c, rot.b_r);
        let b = axis_correct(ci, gd, c, rot.b_i);
        // d(E_k)/dgamma = c ([s_r^- Q'(dr-) + b_r s_r^+ Q'(dr+)] B
        //                   + A [s_i^- Q'(di-) + b_i s_i^+ Q'(di+)]).
        let mut gr = (d - rot.s_hat_r) * q_prime((cr - gd) * c);
        if rot.b_r {
            gr += (d + rot.s_hat_r) * q_prime((cr + gd) * c);
        }
        let mut gi = (d - rot.s_hat_i) * q_prime((ci - gd) * c);
        if rot.b_i {
            gi += (d + rot.s_hat_i) * q_prime((ci + gd) * c);
        }
        acc += gr * b + a * gi;
    }
    acc * c / slot.users() as f64
}
