//! Downlink MISO system model and the real-valued lifting used by the solver.
//!
//! An N-antenna transmitter serves K single-antenna users over a flat-fading
//! channel `H` (K x N). For one symbol slot the precoded signal `x` is sent
//! under the power budget `||x||^2 <= P_T`, user k observes
//! `y_k = h_k^T x + n_k` with `n_k ~ CN(0, sigma^2)`, and rescales by the
//! slot's factor `gamma` before minimum-distance detection.
//!
//! The solver works in a rotated, real-valued coordinate system: each user's
//! symbol is rotated into the first quadrant, the channel row is rotated with
//! it (`h_hat_k = h_k e^{-j theta_k}`), and everything is stacked into real
//! vectors of dimension 2N:
//!
//! ```text
//! f_k = sqrt(P_T) [ Re(h_hat_k); -Im(h_hat_k) ]
//! g_k = sqrt(P_T) [ Im(h_hat_k);  Re(h_hat_k) ]
//! x_bar = [ Re(x); Im(x) ] / sqrt(P_T)
//! ```
//!
//! so that `f_k . x_bar = Re(h_hat_k^T x)`, `g_k . x_bar = Im(h_hat_k^T x)`,
//! and the power budget becomes `||x_bar|| <= 1`.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::constellation::{rotate_symbol, ConstellationSpec, RotatedSymbol};
use crate::error::{Error, Result};

/// A K x N complex channel matrix, stored row-major (one row per user).
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMatrix {
    entries: Vec<Complex64>,
    users: usize,
    antennas: usize,
}

impl ChannelMatrix {
    /// Wrap a row-major entry buffer; requires `1 <= K <= N` and finite entries.
    pub fn new(users: usize, antennas: usize, entries: Vec<Complex64>) -> Result<Self> {
        if users == 0 || antennas == 0 {
            return Err(Error::InvalidParam(
                "channel dimensions must be positive".into(),
            ));
        }
        if antennas < users {
            return Err(Error::TooFewAntennas { users, antennas });
        }
        if entries.len() != users * antennas {
            return Err(Error::Dimension(format!(
                "channel entry buffer has {} elements, expected {}x{}",
                entries.len(),
                users,
                antennas
            )));
        }
        if entries.iter().any(|h| !h.re.is_finite() || !h.im.is_finite()) {
            return Err(Error::NonFinite("channel entries"));
        }
        Ok(Self {
            entries,
            users,
            antennas,
        })
    }

    pub fn users(&self) -> usize {
        self.users
    }

    pub fn antennas(&self) -> usize {
        self.antennas
    }

    /// Channel row of user `k`.
    pub fn row(&self, k: usize) -> &[Complex64] {
        &self.entries[k * self.antennas..(k + 1) * self.antennas]
    }

    /// All entries, row-major.
    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }
}

/// Draw a K x N channel with i.i.d. CN(0, 1) entries.
///
/// Entries are produced row-major, real part before imaginary part, so a
/// given RNG state always yields the same matrix.
pub fn draw_rayleigh_channel<R: Rng + ?Sized>(
    users: usize,
    antennas: usize,
    rng: &mut R,
) -> Result<ChannelMatrix> {
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let entries = (0..users * antennas)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(re * scale, im * scale)
        })
        .collect();
    ChannelMatrix::new(users, antennas, entries)
}

/// One symbol slot in lifted real coordinates: rotated symbols, the stacked
/// `f_k`/`g_k` rows, and the noise/power context the SER expressions need.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftedSlot {
    /// K x 2N row-major stack of the f_k vectors.
    f: Vec<f64>,
    /// K x 2N row-major stack of the g_k vectors.
    g: Vec<f64>,
    rotated: Vec<RotatedSymbol>,
    users: usize,
    dim: usize,
    sigma: f64,
    half_distance: f64,
    power_budget: f64,
    slot_index: usize,
}

impl LiftedSlot {
    pub fn users(&self) -> usize {
        self.users
    }

    /// Real dimension 2N of the lifted space.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Half minimum distance of the underlying constellation.
    pub fn half_distance(&self) -> f64 {
        self.half_distance
    }

    pub fn power_budget(&self) -> f64 {
        self.power_budget
    }

    pub fn slot_index(&self) -> usize {
        self.slot_index
    }

    pub fn f_row(&self, k: usize) -> &[f64] {
        &self.f[k * self.dim..(k + 1) * self.dim]
    }

    pub fn g_row(&self, k: usize) -> &[f64] {
        &self.g[k * self.dim..(k + 1) * self.dim]
    }

    pub fn rotated(&self, k: usize) -> &RotatedSymbol {
        &self.rotated[k]
    }

    /// The same slot with its power budget rescaled to `power_budget`.
    ///
    /// The f/g rows absorb the budget through their `sqrt(P_T)` factor, so a
    /// budget change is a uniform rescale of the stacked rows.
    pub fn with_power_budget(&self, power_budget: f64) -> Result<LiftedSlot> {
        if !(power_budget.is_finite() && power_budget > 0.0) {
            return Err(Error::InvalidParam(format!(
                "power budget must be positive and finite, got {power_budget}"
            )));
        }
        let scale = (power_budget / self.power_budget).sqrt();
        let mut out = self.clone();
        for v in out.f.iter_mut().chain(out.g.iter_mut()) {
            *v *= scale;
        }
        out.power_budget = power_budget;
        Ok(out)
    }

    /// Map a unit-budget lifted vector back to the complex transmit signal
    /// `x = sqrt(P_T) (x_bar[..N] + j x_bar[N..])`.
    pub fn unlift(&self, x_bar: &[f64]) -> Result<Vec<Complex64>> {
        if x_bar.len() != self.dim {
            return Err(Error::Dimension(format!(
                "lifted vector has length {}, expected {}",
                x_bar.len(),
                self.dim
            )));
        }
        Ok(unlift_transmit(x_bar, self.power_budget))
    }
}

/// Inverse of [`lift_transmit`]: `x = sqrt(P_T) (x_bar[..N] + j x_bar[N..])`.
pub fn unlift_transmit(x_bar: &[f64], power_budget: f64) -> Vec<Complex64> {
    let n = x_bar.len() / 2;
    let root_p = power_budget.sqrt();
    (0..n)
        .map(|i| Complex64::new(x_bar[i] * root_p, x_bar[n + i] * root_p))
        .collect()
}

/// A solved slot: the unit-norm lifted precoder, its rescaling factor and the
/// attained average-SER objective value.
#[derive(Debug, Clone, PartialEq)]
pub struct PrecodeSolution {
    /// Unit-norm point on the sphere S^{2N-1}.
    pub x_bar: Vec<f64>,
    /// Receive rescaling factor, strictly positive.
    pub gamma: f64,
    /// Average SER objective at `(x_bar, gamma)`, in [0, 1].
    pub objective: f64,
}

/// Rotate channel rows against each user's symbol and stack the real lifting.
pub fn lift_slot(
    h: &ChannelMatrix,
    symbols: &[Complex64],
    spec: &ConstellationSpec,
    sigma: f64,
    power_budget: f64,
    slot_index: usize,
) -> Result<LiftedSlot> {
    if symbols.len() != h.users() {
        return Err(Error::Dimension(format!(
            "slot has {} symbols for {} users",
            symbols.len(),
            h.users()
        )));
    }
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::InvalidParam(format!(
            "noise level sigma must be positive and finite, got {sigma}"
        )));
    }
    if !(power_budget.is_finite() && power_budget > 0.0) {
        return Err(Error::InvalidParam(format!(
            "power budget must be positive and finite, got {power_budget}"
        )));
    }
    let users = h.users();
    let n = h.antennas();
    let dim = 2 * n;
    let root_p = power_budget.sqrt();
    let mut f = vec![0.0; users * dim];
    let mut g = vec![0.0; users * dim];
    let mut rotated = Vec::with_capacity(users);
    for k in 0..users {
        let rot = rotate_symbol(symbols[k], spec)?;
        let phasor = rot.conj_phasor();
        let (fr, gr) = (&mut f[k * dim..(k + 1) * dim], &mut g[k * dim..(k + 1) * dim]);
        for (i, &hk) in h.row(k).iter().enumerate() {
            let h_hat = hk * phasor; // exact: phasor is a signed unit
            fr[i] = root_p * h_hat.re;
            fr[n + i] = -root_p * h_hat.im;
            gr[i] = root_p * h_hat.im;
            gr[n + i] = root_p * h_hat.re;
        }
        rotated.push(rot);
    }
    Ok(LiftedSlot {
        f,
        g,
        rotated,
        users,
        dim,
        sigma,
        half_distance: spec.half_distance(),
        power_budget,
        slot_index,
    })
}

/// Lift a complex transmit vector: `x_bar = [Re(x); Im(x)] / sqrt(P_T)`.
pub fn lift_transmit(x: &[Complex64], power_budget: f64) -> Vec<f64> {
    let n = x.len();
    let inv_root_p = 1.0 / power_budget.sqrt();
    let mut out = vec![0.0; 2 * n];
    for (i, xi) in x.iter().enumerate() {
        out[i] = xi.re * inv_root_p;
        out[n + i] = xi.im * inv_root_p;
    }
    out
}

/// Per-user rescaled receive samples `(h_k^T x + n_k) / gamma`.
pub fn received_signal(
    h: &ChannelMatrix,
    x: &[Complex64],
    noise: &[Complex64],
    gamma: f64,
) -> Result<Vec<Complex64>> {
    if x.len() != h.antennas() {
        return Err(Error::Dimension(format!(
            "transmit vector has length {}, expected {}",
            x.len(),
            h.antennas()
        )));
    }
    if noise.len() != h.users() {
        return Err(Error::Dimension(format!(
            "noise vector has length {}, expected {}",
            noise.len(),
            h.users()
        )));
    }
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(Error::NonPositiveGamma(gamma));
    }
    Ok((0..h.users())
        .map(|k| {
            let rx: Complex64 = h
                .row(k)
                .iter()
                .zip(x)
                .map(|(hk, xi)| hk * xi)
                .sum::<Complex64>()
                + noise[k];
            rx / gamma
        })
        .collect())
}
