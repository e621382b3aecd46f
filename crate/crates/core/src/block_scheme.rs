//! Block transmission with a unified rescaling factor.
//!
//! A receiver applies one rescaling factor per coherence block, but the
//! per-slot optimizer produces a different `gamma[l]` for every slot. The
//! block scheme reconciles the two by reallocating power across slots:
//!
//! ```text
//! gamma_blk = sqrt( sum_l P_T[l] / sum_l (P_T[l] / gamma[l]^2) )
//! P_bar[l]  = (gamma_blk / gamma[l])^2 P_T[l]
//! ```
//!
//! Scaling slot l's transmit signal by `gamma_blk / gamma[l]` leaves the
//! rescaled observation `h^T x / gamma` unchanged while every slot now shares
//! `gamma_blk`; the total block power is conserved by construction. In
//! lifted coordinates the reallocated signal is the same unit vector under
//! the new budget `P_bar[l]`, so each slot can then be re-optimized on its
//! sphere at the frozen `gamma_blk` to claw back the SER lost where the
//! budget shrank.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::constellation::ConstellationSpec;
use crate::dsao::{initialize, optimize_x_at_gamma, solve_slot, DsaoConfig, Initializer};
use crate::error::{Error, Result};
use crate::manifold_opt::StopCriteria;
use crate::ser_objective::objective;
use crate::signal_model::{lift_slot, unlift_transmit, ChannelMatrix, LiftedSlot, PrecodeSolution};

/// One slot of a power-reallocated block.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockSlot {
    /// Unit-norm lifted precoder under the reallocated budget.
    pub x_pa: Vec<f64>,
    /// Reallocated power budget `P_bar[l]`.
    pub power_budget: f64,
    /// The original per-slot solution this slot was derived from.
    pub solution: PrecodeSolution,
}

impl BlockSlot {
    /// Complex transmit signal of this slot, `sqrt(P_bar) x_pa` unlifted.
    pub fn transmit_signal(&self) -> Vec<Complex64> {
        unlift_transmit(&self.x_pa, self.power_budget)
    }
}

/// A transmission block sharing one rescaling factor.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockPlan {
    /// Unified rescaling factor applied to every slot of the block.
    pub gamma_blk: f64,
    pub slots: Vec<BlockSlot>,
}

impl BlockPlan {
    /// Total power spent across the block.
    pub fn total_power(&self) -> f64 {
        self.slots.iter().map(|s| s.power_budget).sum()
    }
}

/// Merge per-slot solutions into one block with a common rescaling factor.
///
/// Power moves between slots (weak slots with small `gamma[l]` receive more)
/// while each slot's rescaled observation is untouched; the summed budget is
/// conserved exactly.
pub fn unify_gamma(solutions: &[PrecodeSolution], power_budgets: &[f64]) -> Result<BlockPlan> {
    if solutions.is_empty() {
        return Err(Error::InvalidParam("block has no slots".into()));
    }
    if solutions.len() != power_budgets.len() {
        return Err(Error::Dimension(format!(
            "{} solutions but {} power budgets",
            solutions.len(),
            power_budgets.len()
        )));
    }
    let mut total = 0.0;
    let mut weighted = 0.0;
    for (sol, &p) in solutions.iter().zip(power_budgets) {
        if !sol.gamma.is_finite() || sol.gamma <= 0.0 {
            return Err(Error::NonPositiveGamma(sol.gamma));
        }
        if !(p.is_finite() && p > 0.0) {
            return Err(Error::InvalidParam(format!(
                "power budget must be positive and finite, got {p}"
            )));
        }
        total += p;
        weighted += p / (sol.gamma * sol.gamma);
    }
    let gamma_blk = (total / weighted).sqrt();
    let slots = solutions
        .iter()
        .zip(power_budgets)
        .map(|(sol, &p)| {
            let ratio = gamma_blk / sol.gamma;
            BlockSlot {
                x_pa: sol.x_bar.clone(),
                power_budget: ratio * ratio * p,
                solution: sol.clone(),
            }
        })
        .collect();
    Ok(BlockPlan { gamma_blk, slots })
}

/// Re-optimize one reallocated slot on its sphere at the frozen `gamma_blk`.
///
/// The slot is re-lifted under the reallocated budget and descended from
/// `x_pa` with half the configured iteration budget. Returns the objective
/// before and after; the descent never increases it.
pub fn reoptimize_slot(
    block_slot: &mut BlockSlot,
    gamma_blk: f64,
    slot: &LiftedSlot,
    config: &DsaoConfig,
) -> Result<(f64, f64)> {
    let adjusted = slot.with_power_budget(block_slot.power_budget)?;
    let before = objective(&adjusted, &block_slot.x_pa, gamma_blk)?;
    let stop = StopCriteria {
        max_iters: (config.stop.max_iters / 2).max(1),
        ..config.stop
    };
    let (x, after) = optimize_x_at_gamma(
        &adjusted,
        &block_slot.x_pa,
        gamma_blk,
        &config.x_search,
        &stop,
    )?;
    block_slot.x_pa = x;
    Ok((before, after))
}

/// Plan a whole block: solve every slot, unify the rescaling factor, then
/// re-optimize each slot under its reallocated budget.
///
/// Slots are independent, so both the solves and the re-optimizations run in
/// parallel; results are collected in slot order, keeping the plan
/// deterministic for a fixed input.
pub fn plan_block(
    h: &ChannelMatrix,
    symbols: &[Vec<Complex64>],
    spec: &ConstellationSpec,
    sigma: f64,
    power_budgets: &[f64],
    config: &DsaoConfig,
) -> Result<BlockPlan> {
    if symbols.is_empty() {
        return Err(Error::InvalidParam("block has no slots".into()));
    }
    if symbols.len() != power_budgets.len() {
        return Err(Error::Dimension(format!(
            "{} slots but {} power budgets",
            symbols.len(),
            power_budgets.len()
        )));
    }
    config.validate()?;
    let lifted: Vec<LiftedSlot> = symbols
        .par_iter()
        .enumerate()
        .map(|(l, s)| lift_slot(h, s, spec, sigma, power_budgets[l], l))
        .collect::<Result<_>>()?;
    let solutions: Vec<PrecodeSolution> = lifted
        .par_iter()
        .map(|slot| {
            let l = slot.slot_index();
            let (x0, g0) = initialize(slot, h, &symbols[l], &Initializer::Rzf)?;
            solve_slot(slot, config, &x0, g0)
        })
        .collect::<Result<_>>()?;
    let mut plan = unify_gamma(&solutions, power_budgets)?;
    let gamma_blk = plan.gamma_blk;
    plan.slots
        .par_iter_mut()
        .zip(&lifted)
        .map(|(bs, slot)| reoptimize_slot(bs, gamma_blk, slot, config).map(|_| ()))
        .collect::<Result<()>>()?;
    Ok(plan)
}
