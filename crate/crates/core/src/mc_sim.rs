//! Seeded Monte Carlo SER-versus-SNR sweeps.
//!
//! The channel is block fading: one Rayleigh draw serves a block of
//! `block_len` slots, and the receive rescaling factor is unified per block
//! by the power-reallocation scheme before detection. SNR is defined as
//! `1/sigma^2` under the unit per-slot power budget, so `sigma =
//! 10^(-snr_db/20)`.
//!
//! Randomness discipline: every (quantity, SNR point, block) triple gets its
//! own ChaCha8 stream derived from the run seed, so channel, symbols and
//! noise are identical across precoders (paired comparisons), independent of
//! the precoder list, and independent of how blocks are scheduled across
//! threads. Blocks run in parallel; error counts are integers reduced in
//! block order, making every sweep bit-reproducible.

use log::{info, warn};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use crate::baselines::{LinearPrecoderKind, LinearPrecoderPlan};
use crate::block_scheme::{plan_block, unify_gamma, BlockPlan};
use crate::constellation::{build_constellation, demodulate, ConstellationSpec, Normalization};
use crate::dsao::DsaoConfig;
use crate::error::{Error, Result};
use crate::ser_objective::objective;
use crate::signal_model::{
    draw_rayleigh_channel, lift_slot, lift_transmit, received_signal, ChannelMatrix,
    PrecodeSolution,
};

/// Precoding schemes the sweep can evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PrecoderKind {
    /// Average-SER-minimizing symbol-level precoder.
    Asm,
    /// Zero-forcing baseline.
    Zf,
    /// Regularized zero-forcing baseline.
    Rzf,
}

impl fmt::Display for PrecoderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PrecoderKind::Asm => "asm",
            PrecoderKind::Zf => "zf",
            PrecoderKind::Rzf => "rzf",
        })
    }
}

impl FromStr for PrecoderKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "asm" => Ok(PrecoderKind::Asm),
            "zf" => Ok(PrecoderKind::Zf),
            "rzf" => Ok(PrecoderKind::Rzf),
            other => Err(Error::InvalidParam(format!(
                "unknown precoder {other:?}: expected one of asm, zf, rzf"
            ))),
        }
    }
}

/// Full description of one sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub users: usize,
    pub antennas: usize,
    pub mod_order: u32,
    /// SNR grid in dB.
    pub snr_db_grid: Vec<f64>,
    /// Slots per coherence block (L).
    pub block_len: usize,
    /// Independent channel blocks per SNR point.
    pub num_blocks: usize,
    pub precoders: Vec<PrecoderKind>,
    pub seed: u64,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.users == 0 {
            return Err(Error::InvalidParam("users must be positive".into()));
        }
        if self.antennas < self.users {
            return Err(Error::TooFewAntennas {
                users: self.users,
                antennas: self.antennas,
            });
        }
        build_constellation(self.mod_order, Normalization::UnitEnergy)?;
        if self.snr_db_grid.is_empty() {
            return Err(Error::InvalidParam("SNR grid is empty".into()));
        }
        if self.snr_db_grid.iter().any(|s| !s.is_finite()) {
            return Err(Error::InvalidParam("SNR grid contains non-finite values".into()));
        }
        if self.block_len == 0 {
            return Err(Error::InvalidParam("block length must be positive".into()));
        }
        if self.num_blocks == 0 {
            return Err(Error::InvalidParam("number of blocks must be positive".into()));
        }
        if self.precoders.is_empty() {
            return Err(Error::InvalidParam("no precoders selected".into()));
        }
        for (i, p) in self.precoders.iter().enumerate() {
            if self.precoders[..i].contains(p) {
                return Err(Error::InvalidParam(format!("duplicate precoder {p}")));
            }
        }
        Ok(())
    }
}

/// Noise level for an SNR in dB under the unit power budget:
/// `SNR = 1/sigma^2`.
pub fn sigma_for_snr_db(snr_db: f64) -> f64 {
    10f64.powf(-snr_db / 20.0)
}

/// Aggregated result of one (precoder, SNR) point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SerRecord {
    pub precoder: PrecoderKind,
    pub snr_db: f64,
    /// Symbol decisions counted (skipped blocks excluded).
    pub trials: u64,
    pub errors: u64,
    pub ser: f64,
    /// Half-width of the normal-approximation 95% confidence interval.
    pub ci95: f64,
}

/// Per-block counts of one (precoder, SNR) point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockCount {
    pub errors: u64,
    pub trials: u64,
    /// True when the precoder was infeasible on this block's channel.
    pub skipped: bool,
}

/// One (precoder, SNR) point with its per-block breakdown.
#[derive(Debug, Clone, PartialEq)]
pub struct PointDetail {
    pub precoder: PrecoderKind,
    pub snr_db: f64,
    pub per_block: Vec<BlockCount>,
}

/// Sweep result: aggregate records plus per-block details.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutput {
    pub records: Vec<SerRecord>,
    pub details: Vec<PointDetail>,
}

/// Which random quantity a stream feeds; part of the stream label.
#[derive(Debug, Clone, Copy)]
#[repr(u64)]
enum StreamKind {
    Channel = 1,
    Symbols = 2,
    Noise = 3,
}

/// Dedicated ChaCha8 stream for one (quantity, SNR point, block) triple.
fn block_rng(seed: u64, kind: StreamKind, snr_idx: usize, block_idx: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((kind as u64) << 56) | ((snr_idx as u64) << 40) | block_idx as u64);
    rng
}

fn draw_symbols(
    cfg: &SweepConfig,
    spec: &ConstellationSpec,
    snr_idx: usize,
    block_idx: usize,
) -> Vec<Vec<Complex64>> {
    let mut rng = block_rng(cfg.seed, StreamKind::Symbols, snr_idx, block_idx);
    (0..cfg.block_len)
        .map(|_| (0..cfg.users).map(|_| spec.draw_uniform(&mut rng)).collect())
        .collect()
}

fn draw_channel(cfg: &SweepConfig, snr_idx: usize, block_idx: usize) -> Result<ChannelMatrix> {
    let mut rng = block_rng(cfg.seed, StreamKind::Channel, snr_idx, block_idx);
    draw_rayleigh_channel(cfg.users, cfg.antennas, &mut rng)
}

/// Plan one block for one precoder: DSAO slots for `asm`, closed-form slots
/// for the baselines. Baselines get the unified rescaling factor but no
/// re-optimization pass (their precoders are not sphere points to descend).
fn build_block_plan(
    precoder: PrecoderKind,
    h: &ChannelMatrix,
    symbols: &[Vec<Complex64>],
    spec: &ConstellationSpec,
    sigma: f64,
    power_budgets: &[f64],
    solver: &DsaoConfig,
) -> Result<BlockPlan> {
    match precoder {
        PrecoderKind::Asm => plan_block(h, symbols, spec, sigma, power_budgets, solver),
        PrecoderKind::Zf | PrecoderKind::Rzf => {
            let kind = match precoder {
                PrecoderKind::Zf => LinearPrecoderKind::Zf,
                _ => LinearPrecoderKind::Rzf,
            };
            let plan = LinearPrecoderPlan::new(h, sigma, kind)?;
            let solutions = symbols
                .iter()
                .enumerate()
                .map(|(l, s)| {
                    let (x, gamma) = plan.precode(s, power_budgets[l])?;
                    let lifted = lift_slot(h, s, spec, sigma, power_budgets[l], l)?;
                    let x_bar = lift_transmit(&x, power_budgets[l]);
                    let obj = objective(&lifted, &x_bar, gamma)?;
                    Ok(PrecodeSolution {
                        x_bar,
                        gamma,
                        objective: obj,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            unify_gamma(&solutions, power_budgets)
        }
    }
}

/// Detect every slot of a planned block and count symbol errors.
fn count_errors(
    plan: &BlockPlan,
    h: &ChannelMatrix,
    symbols: &[Vec<Complex64>],
    noise: &[Vec<Complex64>],
    spec: &ConstellationSpec,
) -> Result<(u64, u64)> {
    let mut errors = 0u64;
    let mut trials = 0u64;
    for (l, slot) in plan.slots.iter().enumerate() {
        let x = slot.transmit_signal();
        let rx = received_signal(h, &x, &noise[l], plan.gamma_blk)?;
        for (k, y) in rx.iter().enumerate() {
            if demodulate(*y, spec) != symbols[l][k] {
                errors += 1;
            }
            trials += 1;
        }
    }
    Ok((errors, trials))
}

/// Simulate one block at one SNR point for every requested precoder.
///
/// Returns one entry per precoder in configuration order; `None` marks a
/// block skipped because that precoder was infeasible on the drawn channel.
fn simulate_block(
    cfg: &SweepConfig,
    solver: &DsaoConfig,
    spec: &ConstellationSpec,
    snr_idx: usize,
    block_idx: usize,
) -> Result<Vec<Option<(u64, u64)>>> {
    let sigma = sigma_for_snr_db(cfg.snr_db_grid[snr_idx]);
    let h = draw_channel(cfg, snr_idx, block_idx)?;
    let symbols = draw_symbols(cfg, spec, snr_idx, block_idx);
    let noise: Vec<Vec<Complex64>> = {
        let mut rng = block_rng(cfg.seed, StreamKind::Noise, snr_idx, block_idx);
        let s = sigma * std::f64::consts::FRAC_1_SQRT_2;
        (0..cfg.block_len)
            .map(|_| {
                (0..cfg.users)
                    .map(|_| {
                        let re: f64 = rng.sample(StandardNormal);
                        let im: f64 = rng.sample(StandardNormal);
                        Complex64::new(re * s, im * s)
                    })
                    .collect()
            })
            .collect()
    };
    let power_budgets = vec![1.0; cfg.block_len];
    cfg.precoders
        .iter()
        .map(|&p| {
            match build_block_plan(p, &h, &symbols, spec, sigma, &power_budgets, solver) {
                Ok(plan) => count_errors(&plan, &h, &symbols, &noise, spec).map(Some),
                Err(err) => {
                    warn!(
                        "skipping block {block_idx} at SNR index {snr_idx} for {p}: {err}"
                    );
                    Ok(None)
                }
            }
        })
        .collect()
}

/// Run a sweep and keep the per-block breakdown.
pub fn run_sweep_detailed(cfg: &SweepConfig, solver: &DsaoConfig) -> Result<SweepOutput> {
    cfg.validate()?;
    solver.validate()?;
    let spec = build_constellation(cfg.mod_order, Normalization::UnitEnergy)?;
    let mut records = Vec::new();
    let mut details = Vec::new();
    for (snr_idx, &snr_db) in cfg.snr_db_grid.iter().enumerate() {
        let started = Instant::now();
        let per_block: Vec<Vec<Option<(u64, u64)>>> = (0..cfg.num_blocks)
            .into_par_iter()
            .map(|block_idx| simulate_block(cfg, solver, &spec, snr_idx, block_idx))
            .collect::<Result<_>>()?;
        for (pi, &precoder) in cfg.precoders.iter().enumerate() {
            let counts: Vec<BlockCount> = per_block
                .iter()
                .map(|row| match row[pi] {
                    Some((errors, trials)) => BlockCount {
                        errors,
                        trials,
                        skipped: false,
                    },
                    None => BlockCount {
                        errors: 0,
                        trials: 0,
                        skipped: true,
                    },
                })
                .collect();
            let errors: u64 = counts.iter().map(|c| c.errors).sum();
            let trials: u64 = counts.iter().map(|c| c.trials).sum();
            let (ser, ci95) = if trials > 0 {
                let p = errors as f64 / trials as f64;
                (p, 1.96 * (p * (1.0 - p) / trials as f64).sqrt())
            } else {
                (f64::NAN, f64::NAN)
            };
            records.push(SerRecord {
                precoder,
                snr_db,
                trials,
                errors,
                ser,
                ci95,
            });
            details.push(PointDetail {
                precoder,
                snr_db,
                per_block: counts,
            });
        }
        info!(
            "snr {snr_db} dB done in {:.1}s ({} blocks)",
            started.elapsed().as_secs_f64(),
            cfg.num_blocks
        );
    }
    Ok(SweepOutput { records, details })
}

/// Run a sweep, returning only the aggregate records.
pub fn run_sweep(cfg: &SweepConfig, solver: &DsaoConfig) -> Result<Vec<SerRecord>> {
    run_sweep_detailed(cfg, solver).map(|out| out.records)
}

/// One noise-free rescaled receive sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatterSample {
    pub user: usize,
    /// Slot index counted across blocks.
    pub slot: usize,
    /// `h_k^T x / gamma_blk`, noise-free.
    pub value: Complex64,
    /// The symbol this slot intends for the user.
    pub tx_symbol: Complex64,
}

/// Scatter output: samples plus the per-block unified rescaling factors.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatterOutput {
    pub samples: Vec<ScatterSample>,
    pub gamma_blks: Vec<f64>,
}

/// Sample the noise-free rescaled constellation seen by each user at one SNR
/// point under one precoder.
///
/// Uses the same per-block streams as [`run_sweep`] (matching the grid
/// position of `snr_db` when present, stream 0 otherwise), so scatter plots
/// pair exactly with sweep blocks across precoders.
pub fn emit_scatter(
    cfg: &SweepConfig,
    solver: &DsaoConfig,
    snr_db: f64,
    precoder: PrecoderKind,
) -> Result<ScatterOutput> {
    cfg.validate()?;
    solver.validate()?;
    if !snr_db.is_finite() {
        return Err(Error::InvalidParam(format!("SNR must be finite, got {snr_db}")));
    }
    let spec = build_constellation(cfg.mod_order, Normalization::UnitEnergy)?;
    let snr_idx = cfg
        .snr_db_grid
        .iter()
        .position(|&s| s == snr_db)
        .unwrap_or(0);
    let sigma = sigma_for_snr_db(snr_db);
    let power_budgets = vec![1.0; cfg.block_len];
    let mut samples = Vec::new();
    let mut gamma_blks = Vec::new();
    for block_idx in 0..cfg.num_blocks {
        let h = draw_channel(cfg, snr_idx, block_idx)?;
        let symbols = draw_symbols(cfg, &spec, snr_idx, block_idx);
        let plan =
            match build_block_plan(precoder, &h, &symbols, &spec, sigma, &power_budgets, solver) {
                Ok(plan) => plan,
                Err(err) => {
                    warn!("skipping scatter block {block_idx} for {precoder}: {err}");
                    continue;
                }
            };
        gamma_blks.push(plan.gamma_blk);
        for (l, slot) in plan.slots.iter().enumerate() {
            let x = slot.transmit_signal();
            for (k, &tx_symbol) in symbols[l].iter().enumerate() {
                let direct: Complex64 = h.row(k).iter().zip(&x).map(|(a, b)| a * b).sum();
                samples.push(ScatterSample {
                    user: k,
                    slot: block_idx * cfg.block_len + l,
                    value: direct / plan.gamma_blk,
                    tx_symbol,
                });
            }
        }
    }
    Ok(ScatterOutput {
        samples,
        gamma_blks,
    })
}
