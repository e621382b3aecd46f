//! Square-QAM constellation geometry.
//!
//! A square M-QAM constellation places `sqrt(M)` amplitude levels
//! `±d, ±3d, ..., ±(sqrt(M)-1)d` on each of the real and imaginary axes,
//! where `2d` is the minimum distance between adjacent symbols. This module
//! owns the level grid, the quadrant rotation that maps any symbol into the
//! first quadrant (where the error-probability expressions are written), the
//! inner/outer level classification, and minimum-distance demodulation.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How the level grid is scaled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// Scale so the average symbol energy over the constellation is 1.
    UnitEnergy,
    /// Fix the half minimum distance d = 1.
    UnitHalfDistance,
}

/// An immutable square-QAM constellation: order, half-distance and level set.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstellationSpec {
    order: u32,
    half_distance: f64,
    levels: Vec<f64>,
    avg_energy: f64,
}

/// A symbol rotated into the first quadrant.
///
/// `s_hat = s * exp(-j theta)` with `theta` a quarter-turn multiple chosen so
/// that both parts of `s_hat` are positive. `b_r`/`b_i` flag whether the
/// rotated real/imaginary level is an inner level (both half-planes of its
/// decision region are bounded) rather than the outermost one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotatedSymbol {
    /// Rotation angle in {0, pi/2, pi, -pi/2}.
    pub theta: f64,
    /// Real part of the rotated symbol; a positive level.
    pub s_hat_r: f64,
    /// Imaginary part of the rotated symbol; a positive level.
    pub s_hat_i: f64,
    /// True iff `s_hat_r` is an inner level.
    pub b_r: bool,
    /// True iff `s_hat_i` is an inner level.
    pub b_i: bool,
    /// Quarter turns (0..4) such that `s_hat = s * (-j)^quarter_turns`.
    quarter_turns: u8,
}

impl RotatedSymbol {
    /// The exact unit phasor `exp(-j theta)` as a complex number.
    ///
    /// Returned as one of (1, -j, -1, j) so that rotating a vector is a pure
    /// swap/negate with no trigonometric round-off.
    pub fn conj_phasor(&self) -> Complex64 {
        match self.quarter_turns {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, -1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, 1.0),
        }
    }

    /// Rotate a first-quadrant point back to the original quadrant,
    /// i.e. multiply by `exp(j theta)`.
    pub fn unrotate(&self, z: Complex64) -> Complex64 {
        match self.quarter_turns {
            0 => z,
            1 => Complex64::new(-z.im, z.re),
            2 => -z,
            _ => Complex64::new(z.im, -z.re),
        }
    }
}

impl ConstellationSpec {
    /// Modulation order M.
    pub fn order(&self) -> u32 {
        self.order
    }

    /// Half the minimum distance between adjacent symbols.
    pub fn half_distance(&self) -> f64 {
        self.half_distance
    }

    /// Per-axis amplitude levels in increasing order, `-(sqrt(M)-1)d ..= (sqrt(M)-1)d`.
    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    /// Number of levels per axis, `sqrt(M)`.
    pub fn levels_per_axis(&self) -> usize {
        self.levels.len()
    }

    /// Average symbol energy over the constellation.
    pub fn avg_energy(&self) -> f64 {
        self.avg_energy
    }

    /// Largest (outermost) positive level, `(sqrt(M)-1)d`.
    pub fn max_level(&self) -> f64 {
        *self.levels.last().expect("levels are non-empty")
    }

    /// All M constellation points, imaginary-major order.
    pub fn points(&self) -> Vec<Complex64> {
        let mut pts = Vec::with_capacity(self.levels.len() * self.levels.len());
        for &im in &self.levels {
            for &re in &self.levels {
                pts.push(Complex64::new(re, im));
            }
        }
        pts
    }

    /// Draw one symbol uniformly at random from the constellation.
    pub fn draw_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> Complex64 {
        let m = self.levels.len();
        let re = self.levels[rng.gen_range(0..m)];
        let im = self.levels[rng.gen_range(0..m)];
        Complex64::new(re, im)
    }

    /// Index of the level equal to `v`, or an off-grid error.
    fn level_index(&self, v: f64) -> Option<usize> {
        let d = self.half_distance;
        let m = self.levels.len() as f64;
        // Level i sits at (2i + 1 - sqrt(M)) * d; invert and round.
        let idx = ((v / d - 1.0 + m) / 2.0).round();
        if idx < 0.0 || idx >= m {
            return None;
        }
        let idx = idx as usize;
        ((v - self.levels[idx]).abs() <= 1e-9 * d).then_some(idx)
    }
}

/// Build a square M-QAM constellation for M in {4, 16, 64, 256}.
pub fn build_constellation(order: u32, normalization: Normalization) -> Result<ConstellationSpec> {
    let sqrt_m = match order {
        4 => 2usize,
        16 => 4,
        64 => 8,
        256 => 16,
        other => return Err(Error::UnsupportedOrder(other)),
    };
    // Average energy at d = 1 is 2(M - 1)/3; scale d to hit the target.
    let energy_at_unit_d = 2.0 * (order as f64 - 1.0) / 3.0;
    let half_distance = match normalization {
        Normalization::UnitEnergy => 1.0 / energy_at_unit_d.sqrt(),
        Normalization::UnitHalfDistance => 1.0,
    };
    let levels = (0..sqrt_m)
        .map(|i| (2.0 * i as f64 + 1.0 - sqrt_m as f64) * half_distance)
        .collect();
    Ok(ConstellationSpec {
        order,
        half_distance,
        levels,
        avg_energy: energy_at_unit_d * half_distance * half_distance,
    })
}

/// Rotate a constellation point into the first quadrant.
///
/// Picks the quarter turn `theta` in {0, pi/2, pi, -pi/2} with
/// `s_hat = s * exp(-j theta)` strictly in the open first quadrant, and
/// classifies each axis of `s_hat` as inner (`b = true`) or outermost.
/// The rotation is computed by exact swap/negate so that `s_hat` lands
/// exactly on the level grid.
pub fn rotate_symbol(s: Complex64, spec: &ConstellationSpec) -> Result<RotatedSymbol> {
    let off_grid = || Error::OffGridSymbol {
        re: s.re,
        im: s.im,
        d: spec.half_distance,
    };
    spec.level_index(s.re).ok_or_else(off_grid)?;
    spec.level_index(s.im).ok_or_else(off_grid)?;

    // Grid levels are never zero, so the quadrant is unambiguous.
    let (quarter_turns, theta, s_hat_r, s_hat_i) = match (s.re > 0.0, s.im > 0.0) {
        (true, true) => (0u8, 0.0, s.re, s.im),
        (false, true) => (1, std::f64::consts::FRAC_PI_2, s.im, -s.re),
        (false, false) => (2, std::f64::consts::PI, -s.re, -s.im),
        (true, false) => (3, -std::f64::consts::FRAC_PI_2, -s.im, s.re),
    };
    // Inner levels sit strictly below the outermost one; compare with half a
    // grid step of slack so scaling round-off cannot flip the class.
    let inner_cut = spec.max_level() - spec.half_distance;
    Ok(RotatedSymbol {
        theta,
        s_hat_r,
        s_hat_i,
        b_r: s_hat_r < inner_cut,
        b_i: s_hat_i < inner_cut,
        quarter_turns,
    })
}

/// Minimum-distance demodulation of an arbitrary complex observation.
///
/// Because the constellation is a Cartesian product of the same level grid on
/// each axis, the nearest point is found by slicing each axis independently.
/// Ties (observation exactly midway between two levels) break toward the
/// level of smaller magnitude, and toward the positive level when magnitudes
/// also tie (only possible between `-d` and `d`).
pub fn demodulate(y: Complex64, spec: &ConstellationSpec) -> Complex64 {
    Complex64::new(slice_axis(y.re, spec), slice_axis(y.im, spec))
}

fn slice_axis(v: f64, spec: &ConstellationSpec) -> f64 {
    let levels = &spec.levels;
    let m = levels.len();
    let d = spec.half_distance;
    // Fractional index into the level grid.
    let t = (v / d - 1.0 + m as f64) / 2.0;
    if t <= 0.0 {
        return levels[0];
    }
    if t >= (m - 1) as f64 {
        return levels[m - 1];
    }
    let lo = t.floor() as usize;
    let hi = lo + 1;
    let d_lo = v - levels[lo];
    let d_hi = levels[hi] - v;
    if d_lo < d_hi {
        levels[lo]
    } else if d_hi < d_lo {
        levels[hi]
    } else {
        // Midpoint tie: prefer the smaller magnitude, then the positive one.
        if levels[lo].abs() < levels[hi].abs() || levels[lo].abs() == levels[hi].abs() && levels[lo] > 0.0 {
            levels[lo]
        } else {
            levels[hi]
        }
    }
}
