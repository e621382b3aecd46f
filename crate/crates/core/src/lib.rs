//! Symbol-level precoding for average-SER minimization in the multiuser
//! MISO downlink.
//!
//! The library implements the full chain from channel model to Monte Carlo
//! evaluation:
//!
//! - [`constellation`]: square-QAM grids, quadrant rotation, demodulation;
//! - [`signal_model`]: downlink model and the real-valued lifting;
//! - [`ser_objective`]: exact per-user SER, its average, and closed-form
//!   gradients in the precoder and the receive rescaling factor;
//! - [`manifold_opt`]: Riemannian descent primitives on the unit sphere;
//! - [`dsao`]: the alternating sphere/scalar optimizer for one symbol slot;
//! - [`baselines`]: zero-forcing and regularized zero-forcing precoding;
//! - [`block_scheme`]: power reallocation that unifies the rescaling factor
//!   across a transmission block, with per-slot re-optimization;
//! - [`mc_sim`]: seeded, parallel SER-versus-SNR sweeps and constellation
//!   scatter sampling;
//! - [`cli`]: argument/config handling and CSV/manifest output for the
//!   `slpsim` binary.

pub mod baselines;
pub mod block_scheme;
pub mod cli;
pub mod constellation;
pub mod dsao;
pub mod error;
pub mod manifold_opt;
pub mod mc_sim;
pub mod ser_objective;
pub mod signal_model;

pub use error::{Error, Result};
