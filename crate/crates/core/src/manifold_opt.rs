//! Riemannian first-order tools on the unit sphere, plus a guarded scalar
//! line search.
//!
//! The feasible set for the lifted precoder is the unit sphere S^{2N-1}
//! (every unit of power budget is spent). A descent iteration projects the
//! Euclidean gradient onto the tangent space at `x`, backtracks along the
//! projected direction under the Armijo condition, and retracts back to the
//! sphere by normalization. The scalar counterpart performs the same
//! backtracking on the rescaling factor, with a floor that rejects steps
//! below the initial value.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Armijo backtracking parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineSearchParams {
    /// First trial step length.
    pub initial_step: f64,
    /// Multiplicative step shrink per backtrack, in (0, 1).
    pub contraction: f64,
    /// Armijo sufficient-decrease constant, in (0, 1).
    pub sufficient_decrease: f64,
    /// Trial budget before the step is declared failed.
    pub max_backtracks: u32,
}

impl Default for LineSearchParams {
    fn default() -> Self {
        Self {
            initial_step: 1.0,
            contraction: 0.5,
            sufficient_decrease: 1e-4,
            max_backtracks: 30,
        }
    }
}

impl LineSearchParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.initial_step.is_finite() && self.initial_step > 0.0) {
            return Err(Error::InvalidParam(format!(
                "initial_step must be positive, got {}",
                self.initial_step
            )));
        }
        if !(self.contraction > 0.0 && self.contraction < 1.0) {
            return Err(Error::InvalidParam(format!(
                "contraction must lie in (0, 1), got {}",
                self.contraction
            )));
        }
        if !(self.sufficient_decrease > 0.0 && self.sufficient_decrease < 1.0) {
            return Err(Error::InvalidParam(format!(
                "sufficient_decrease must lie in (0, 1), got {}",
                self.sufficient_decrease
            )));
        }
        if self.max_backtracks == 0 {
            return Err(Error::InvalidParam("max_backtracks must be positive".into()));
        }
        Ok(())
    }
}

/// Outer-loop stopping rule; the first satisfied criterion wins.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StopCriteria {
    /// Hard cap on outer iterations.
    pub max_iters: u32,
    /// Stop when the Riemannian gradient norm falls below this.
    pub grad_tol: f64,
    /// Stop when the per-iteration objective decrease, relative to the
    /// current objective magnitude, falls below this.
    pub rel_obj_tol: f64,
}

impl Default for StopCriteria {
    fn default() -> Self {
        Self {
            max_iters: 200,
            grad_tol: 1e-6,
            rel_obj_tol: 1e-10,
        }
    }
}

impl StopCriteria {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::InvalidParam("max_iters must be positive".into()));
        }
        if !(self.grad_tol.is_finite() && self.grad_tol > 0.0) {
            return Err(Error::InvalidParam(format!(
                "grad_tol must be positive, got {}",
                self.grad_tol
            )));
        }
        if !(self.rel_obj_tol.is_finite() && self.rel_obj_tol > 0.0) {
            return Err(Error::InvalidParam(format!(
                "rel_obj_tol must be positive, got {}",
                self.rel_obj_tol
            )));
        }
        Ok(())
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn check_on_sphere(x: &[f64]) -> Result<()> {
    let n = norm(x);
    if (n - 1.0).abs() > 1e-9 {
        return Err(Error::NotOnSphere(n));
    }
    Ok(())
}

/// Project `xi` onto the tangent space of the sphere at `x`:
/// `P_x(xi) = xi - (x . xi) x`.
pub fn tangent_project(x: &[f64], xi: &[f64]) -> Result<Vec<f64>> {
    if x.len() != xi.len() {
        return Err(Error::Dimension(format!(
            "tangent_project: point has length {}, direction {}",
            x.len(),
            xi.len()
        )));
    }
    check_on_sphere(x)?;
    let inner = dot(x, xi);
    Ok(x.iter().zip(xi).map(|(xi_, v)| v - inner * xi_).collect())
}

/// Retract a tangent move back to the sphere: `R_x(xi) = (x + xi)/||x + xi||`.
pub fn retract(x: &[f64], xi: &[f64]) -> Result<Vec<f64>> {
    if x.len() != xi.len() {
        return Err(Error::Dimension(format!(
            "retract: point has length {}, direction {}",
            x.len(),
            xi.len()
        )));
    }
    check_on_sphere(x)?;
    let moved: Vec<f64> = x.iter().zip(xi).map(|(a, b)| a + b).collect();
    let n = norm(&moved);
    if n < 1e-300 {
        return Err(Error::DegenerateRetraction);
    }
    Ok(moved.into_iter().map(|v| v / n).collect())
}

/// Outcome of one backtracking step.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereStep {
    /// Next iterate (equals the input point when the search failed).
    pub x: Vec<f64>,
    /// Accepted step length, 0 when no trial satisfied Armijo.
    pub step: f64,
    /// Objective at the returned point.
    pub cost: f64,
    /// Riemannian gradient norm at the input point.
    pub grad_norm: f64,
}

/// One Riemannian gradient step with Armijo backtracking on the sphere.
///
/// Projects the Euclidean gradient at `x`, then shrinks the trial step until
/// `cost(R_x(-t rg)) <= cost(x) - sufficient_decrease * t * ||rg||^2`. A zero
/// projected gradient or an exhausted trial budget returns `x` unchanged with
/// `step = 0`.
pub fn riemannian_descent_step<C>(
    cost: C,
    x: &[f64],
    cost_x: f64,
    euclid_grad: &[f64],
    params: &LineSearchParams,
) -> Result<SphereStep>
where
    C: FnMut(&[f64]) -> f64,
{
    params.validate()?;
    if !cost_x.is_finite() {
        return Err(Error::NonFinite("cost at the current point"));
    }
    if euclid_grad.iter().any(|g| !g.is_finite()) {
        return Err(Error::NonFinite("gradient"));
    }
    let rg = tangent_project(x, euclid_grad)?;
    let gsq = dot(&rg, &rg);
    let grad_norm = gsq.sqrt();
    let mut out = SphereStep {
        x: x.to_vec(),
        step: 0.0,
        cost: cost_x,
        grad_norm,
    };
    if gsq == 0.0 {
        return Ok(out);
    }
    armijo_on_sphere(cost, x, cost_x, &rg, gsq, params, &mut out)?;
    Ok(out)
}

/// Shared Armijo loop over the direction `-rg`; `gsq = ||rg||^2`.
///
/// The candidate `x - t rg` has norm `sqrt(1 + t^2 gsq)` because `rg` is
/// tangent at the unit vector `x`, so the retraction never degenerates.
pub(crate) fn armijo_on_sphere<C>(
    mut cost: C,
    x: &[f64],
    cost_x: f64,
    rg: &[f64],
    gsq: f64,
    params: &LineSearchParams,
    out: &mut SphereStep,
) -> Result<bool>
where
    C: FnMut(&[f64]) -> f64,
{
    let mut t = params.initial_step;
    let mut candidate = vec![0.0; x.len()];
    for _ in 0..params.max_backtracks {
        let inv_norm = 1.0 / (1.0 + t * t * gsq).sqrt();
        for (c, (xi, gi)) in candidate.iter_mut().zip(x.iter().zip(rg)) {
            *c = (xi - t * gi) * inv_norm;
        }
        let trial = cost(&candidate);
        if trial.is_nan() {
            return Err(Error::NonFinite("cost during line search"));
        }
        if trial <= cost_x - params.sufficient_decrease * t * gsq {
            out.x.copy_from_slice(&candidate);
            out.step = t;
            out.cost = trial;
            return Ok(true);
        }
        t *= params.contraction;
    }
    Ok(false)
}

/// Outcome of one guarded scalar step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarStep {
    /// Next scalar (equals the input when the search failed or the accepted
    /// candidate fell below the floor).
    pub value: f64,
    /// Cost at the returned scalar.
    pub cost: f64,
    /// True iff the scalar moved.
    pub moved: bool,
}

/// One backtracking descent step on a scalar with a hard lower bound.
///
/// Backtracks until `cost(gamma - t grad) <= cost(gamma) - c1 t grad^2`; an
/// accepted candidate below `lower_bound` is then discarded and the scalar
/// kept (the floor guards the search result, it does not redirect it).
/// `cost` may return `+inf` for infeasible trial points; such trials are
/// rejected like any other failed Armijo trial.
pub fn scalar_descent_step<C>(
    mut cost: C,
    gamma: f64,
    cost_gamma: f64,
    grad: f64,
    lower_bound: f64,
    params: &LineSearchParams,
) -> Result<ScalarStep>
where
    C: FnMut(f64) -> f64,
{
    params.validate()?;
    if !gamma.is_finite() || gamma <= 0.0 {
        return Err(Error::NonPositiveGamma(gamma));
    }
    if !cost_gamma.is_finite() {
        return Err(Error::NonFinite("cost at the current scalar"));
    }
    if !grad.is_finite() {
        return Err(Error::NonFinite("scalar gradient"));
    }
    let unchanged = ScalarStep {
        value: gamma,
        cost: cost_gamma,
        moved: false,
    };
    if grad == 0.0 {
        return Ok(unchanged);
    }
    let gsq = grad * grad;
    let mut t = params.initial_step;
    for _ in 0..params.max_backtracks {
        let candidate = gamma - t * grad;
        let trial = cost(candidate);
        if trial.is_nan() {
            return Err(Error::NonFinite("cost during scalar line search"));
        }
        if trial <= cost_gamma - params.sufficient_decrease * t * gsq {
            if candidate < lower_bound {
                return Ok(unchanged);
            }
            return Ok(ScalarStep {
                value: candidate,
                cost: trial,
                moved: true,
            });
        }
        t *= params.contraction;
    }
    Ok(unchanged)
}
