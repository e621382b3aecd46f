//! Python bindings for the `slpsim` core crate.
//!
//! Builds as the extension module `slpsim_py` and mirrors the library's main
//! types and operations: constellation handling, the channel model and its
//! real lifting, the SER objective with its gradients, the DSAO slot solver,
//! the linear baselines, the block transmission scheme, and the Monte Carlo
//! sweep/scatter drivers. Scalars cross the boundary as plain Python numbers,
//! complex samples as `complex`, and vectors as lists.

// `#[pymethods]` expands fallible methods through an `Into<PyErr>` conversion
// that is an identity here, which trips this lint in generated code.
#![allow(clippy::useless_conversion)]

use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use slpsim::baselines::{linear_precode as core_linear_precode, LinearPrecoderKind};
use slpsim::block_scheme::{plan_block as core_plan_block, BlockPlan as CoreBlockPlan};
use slpsim::constellation::{build_constellation, ConstellationSpec, Normalization};
use slpsim::dsao::{
    initialize as core_initialize, solve_slot_traced as core_solve_slot_traced,
    DsaoConfig as CoreDsaoConfig, Initializer,
};
use slpsim::manifold_opt::StopCriteria;
use slpsim::mc_sim::{
    emit_scatter as core_emit_scatter, run_sweep as core_run_sweep, sigma_for_snr_db,
    PrecoderKind, SerRecord as CoreSerRecord, SweepConfig as CoreSweepConfig,
};
use slpsim::ser_objective::{grad_gamma, grad_x, objective, per_user_ser, q_function};
use slpsim::signal_model::{
    draw_rayleigh_channel, lift_slot as core_lift_slot, ChannelMatrix,
    LiftedSlot as CoreLiftedSlot, PrecodeSolution,
};

fn to_py_err(e: slpsim::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_precoder(name: &str) -> PyResult<PrecoderKind> {
    name.parse().map_err(to_py_err)
}

/// One scatter sample: `(user, slot, rescaled value, transmitted symbol)`.
type ScatterTuple = (usize, usize, Complex64, Complex64);

/// A square-QAM constellation of the given order.
#[pyclass(frozen, name = "Constellation")]
struct PyConstellation {
    inner: ConstellationSpec,
}

#[pymethods]
impl PyConstellation {
    /// Build a constellation; `normalization` is `"unit_energy"` (default)
    /// or `"unit_half_distance"`.
    #[new]
    #[pyo3(signature = (order, normalization = "unit_energy"))]
    fn new(order: u32, normalization: &str) -> PyResult<Self> {
        let norm = match normalization {
            "unit_energy" => Normalization::UnitEnergy,
            "unit_half_distance" => Normalization::UnitHalfDistance,
            other => {
                return Err(PyValueError::new_err(format!(
                    "unknown normalization {other:?}: expected unit_energy or unit_half_distance"
                )))
            }
        };
        Ok(Self {
            inner: build_constellation(order, norm).map_err(to_py_err)?,
        })
    }

    #[getter]
    fn order(&self) -> u32 {
        self.inner.order()
    }

    /// Half of the minimum distance between constellation points.
    #[getter]
    fn half_distance(&self) -> f64 {
        self.inner.half_distance()
    }

    #[getter]
    fn avg_energy(&self) -> f64 {
        self.inner.avg_energy()
    }

    /// All constellation points, row-major over the level grid.
    fn points(&self) -> Vec<Complex64> {
        self.inner.points()
    }

    /// Nearest constellation point to `y`.
    fn demodulate(&self, y: Complex64) -> Complex64 {
        slpsim::constellation::demodulate(y, &self.inner)
    }

    /// Rotate `s` into the first quadrant.
    ///
    /// Returns `(s_hat, theta, b_r, b_i)`: the rotated point, the rotation
    /// angle (a quarter-turn multiple), and the inner-level flags for the
    /// real and imaginary axes.
    fn rotate(&self, s: Complex64) -> PyResult<(Complex64, f64, bool, bool)> {
        let rot = slpsim::constellation::rotate_symbol(s, &self.inner).map_err(to_py_err)?;
        Ok((
            Complex64::new(rot.s_hat_r, rot.s_hat_i),
            rot.theta,
            rot.b_r,
            rot.b_i,
        ))
    }

    /// Draw `count` symbols uniformly from the constellation, reproducibly.
    fn draw_symbols(&self, seed: u64, count: usize) -> Vec<Complex64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count).map(|_| self.inner.draw_uniform(&mut rng)).collect()
    }

    fn __repr__(&self) -> String {
        format!("Constellation(order={})", self.inner.order())
    }
}

/// A K x N downlink channel matrix.
#[pyclass(frozen, name = "Channel")]
struct PyChannel {
    inner: ChannelMatrix,
}

#[pymethods]
impl PyChannel {
    /// Build a channel from its rows (one list of complex gains per user).
    #[new]
    fn new(rows: Vec<Vec<Complex64>>) -> PyResult<Self> {
        let users = rows.len();
        let antennas = rows.first().map_or(0, Vec::len);
        let entries: Vec<Complex64> = rows.into_iter().flatten().collect();
        if entries.len() != users * antennas {
            return Err(PyValueError::new_err("channel rows have unequal lengths"));
        }
        Ok(Self {
            inner: ChannelMatrix::new(users, antennas, entries).map_err(to_py_err)?,
        })
    }

    /// Draw a K x N channel with i.i.d. CN(0, 1) entries from `seed`.
    #[staticmethod]
    fn rayleigh(users: usize, antennas: usize, seed: u64) -> PyResult<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Ok(Self {
            inner: draw_rayleigh_channel(users, antennas, &mut rng).map_err(to_py_err)?,
        })
    }

    #[getter]
    fn users(&self) -> usize {
        self.inner.users()
    }

    #[getter]
    fn antennas(&self) -> usize {
        self.inner.antennas()
    }

    fn rows(&self) -> Vec<Vec<Complex64>> {
        (0..self.inner.users())
            .map(|k| self.inner.row(k).to_vec())
            .collect()
    }

    fn __repr__(&self) -> String {
        format!(
            "Channel(users={}, antennas={})",
            self.inner.users(),
            self.inner.antennas()
        )
    }
}

/// One symbol slot in lifted real coordinates.
///
/// Carries the rotated symbols and the stacked real-valued channel rows, and
/// evaluates the average-SER objective and its gradients at a candidate
/// precoder `(x_bar, gamma)`.
#[pyclass(frozen, name = "LiftedSlot")]
struct PyLiftedSlot {
    inner: CoreLiftedSlot,
}

#[pymethods]
impl PyLiftedSlot {
    #[getter]
    fn users(&self) -> usize {
        self.inner.users()
    }

    /// Real dimension 2N of the lifted precoder.
    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn sigma(&self) -> f64 {
        self.inner.sigma()
    }

    #[getter]
    fn power_budget(&self) -> f64 {
        self.inner.power_budget()
    }

    /// Average SER over the slot's users at `(x_bar, gamma)`.
    fn objective(&self, x_bar: Vec<f64>, gamma: f64) -> PyResult<f64> {
        objective(&self.inner, &x_bar, gamma).map_err(to_py_err)
    }

    /// Exact SER of user `k` at `(x_bar, gamma)`.
    fn per_user_ser(&self, x_bar: Vec<f64>, gamma: f64, k: usize) -> PyResult<f64> {
        per_user_ser(&self.inner, &x_bar, gamma, k).map_err(to_py_err)
    }

    /// Euclidean gradient of the objective in `x_bar`.
    fn grad_x(&self, x_bar: Vec<f64>, gamma: f64) -> PyResult<Vec<f64>> {
        grad_x(&self.inner, &x_bar, gamma).map_err(to_py_err)
    }

    /// Derivative of the objective in `gamma`.
    fn grad_gamma(&self, x_bar: Vec<f64>, gamma: f64) -> PyResult<f64> {
        grad_gamma(&self.inner, &x_bar, gamma).map_err(to_py_err)
    }

    /// Map a lifted unit vector back to the complex transmit signal, scaled
    /// by the slot's power budget.
    fn unlift(&self, x_bar: Vec<f64>) -> PyResult<Vec<Complex64>> {
        self.inner.unlift(&x_bar).map_err(to_py_err)
    }

    fn __repr__(&self) -> String {
        format!(
            "LiftedSlot(users={}, dim={}, sigma={})",
            self.inner.users(),
            self.inner.dim(),
            self.inner.sigma()
        )
    }
}

/// DSAO solver configuration (line searches kept at their defaults).
#[pyclass(name = "DsaoConfig")]
#[derive(Clone)]
struct PyDsaoConfig {
    inner: CoreDsaoConfig,
}

#[pymethods]
impl PyDsaoConfig {
    #[new]
    #[pyo3(signature = (max_iters = 200, grad_tol = 1e-6, rel_obj_tol = 1e-10))]
    fn new(max_iters: u32, grad_tol: f64, rel_obj_tol: f64) -> PyResult<Self> {
        let inner = CoreDsaoConfig {
            stop: StopCriteria {
                max_iters,
                grad_tol,
                rel_obj_tol,
            },
            ..Default::default()
        };
        inner.validate().map_err(to_py_err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn max_iters(&self) -> u32 {
        self.inner.stop.max_iters
    }

    #[getter]
    fn grad_tol(&self) -> f64 {
        self.inner.stop.grad_tol
    }

    #[getter]
    fn rel_obj_tol(&self) -> f64 {
        self.inner.stop.rel_obj_tol
    }

    fn __repr__(&self) -> String {
        format!(
            "DsaoConfig(max_iters={}, grad_tol={}, rel_obj_tol={})",
            self.inner.stop.max_iters, self.inner.stop.grad_tol, self.inner.stop.rel_obj_tol
        )
    }
}

/// A solved slot: unit-norm lifted precoder, rescaling factor and objective.
#[pyclass(frozen, name = "Solution")]
struct PySolution {
    inner: PrecodeSolution,
}

#[pymethods]
impl PySolution {
    #[getter]
    fn x_bar(&self) -> Vec<f64> {
        self.inner.x_bar.clone()
    }

    #[getter]
    fn gamma(&self) -> f64 {
        self.inner.gamma
    }

    #[getter]
    fn objective(&self) -> f64 {
        self.inner.objective
    }

    fn __repr__(&self) -> String {
        format!(
            "Solution(gamma={:.6}, objective={:.6e})",
            self.inner.gamma, self.inner.objective
        )
    }
}

/// A block plan: per-slot reallocated precoders sharing one rescaling factor.
#[pyclass(frozen, name = "BlockPlan")]
struct PyBlockPlan {
    inner: CoreBlockPlan,
}

#[pymethods]
impl PyBlockPlan {
    /// The unified block-level rescaling factor.
    #[getter]
    fn gamma_blk(&self) -> f64 {
        self.inner.gamma_blk
    }

    #[getter]
    fn num_slots(&self) -> usize {
        self.inner.slots.len()
    }

    /// Sum of per-slot transmit powers after reallocation.
    fn total_power(&self) -> f64 {
        self.inner.total_power()
    }

    /// Reallocated power budget of slot `i`.
    fn power_budget(&self, i: usize) -> PyResult<f64> {
        self.slot(i).map(|s| s.power_budget)
    }

    /// Complex transmit signal of slot `i` under the reallocated budget.
    fn transmit_signal(&self, i: usize) -> PyResult<Vec<Complex64>> {
        self.slot(i).map(|s| s.transmit_signal())
    }

    /// Unit-norm lifted precoder of slot `i` after power reallocation and
    /// re-optimization at the unified `gamma_blk`.
    fn x_pa(&self, i: usize) -> PyResult<Vec<f64>> {
        self.slot(i).map(|s| s.x_pa.clone())
    }

    /// Original per-slot solution of slot `i`, before unification (carries
    /// the slot's own rescaling factor).
    fn solution(&self, i: usize) -> PyResult<PySolution> {
        self.slot(i).map(|s| PySolution {
            inner: s.solution.clone(),
        })
    }

    fn __repr__(&self) -> String {
        format!(
            "BlockPlan(gamma_blk={:.6}, num_slots={})",
            self.inner.gamma_blk,
            self.inner.slots.len()
        )
    }
}

impl PyBlockPlan {
    fn slot(&self, i: usize) -> PyResult<&slpsim::block_scheme::BlockSlot> {
        self.inner.slots.get(i).ok_or_else(|| {
            PyValueError::new_err(format!(
                "slot index {i} out of range for a block of {} slots",
                self.inner.slots.len()
            ))
        })
    }
}

/// Full description of one SER-versus-SNR sweep.
#[pyclass(name = "SweepConfig")]
#[derive(Clone)]
struct PySweepConfig {
    inner: CoreSweepConfig,
}

#[pymethods]
impl PySweepConfig {
    #[new]
    #[pyo3(signature = (
        users,
        antennas,
        mod_order,
        snr_db_grid,
        block_len = 500,
        num_blocks = 200,
        precoders = vec![String::from("asm"), String::from("zf"), String::from("rzf")],
        seed = 0,
    ))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        users: usize,
        antennas: usize,
        mod_order: u32,
        snr_db_grid: Vec<f64>,
        block_len: usize,
        num_blocks: usize,
        precoders: Vec<String>,
        seed: u64,
    ) -> PyResult<Self> {
        let precoders = precoders
            .iter()
            .map(|p| parse_precoder(p))
            .collect::<PyResult<Vec<_>>>()?;
        let inner = CoreSweepConfig {
            users,
            antennas,
            mod_order,
            snr_db_grid,
            block_len,
            num_blocks,
            precoders,
            seed,
        };
        inner.validate().map_err(to_py_err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn users(&self) -> usize {
        self.inner.users
    }

    #[getter]
    fn antennas(&self) -> usize {
        self.inner.antennas
    }

    #[getter]
    fn mod_order(&self) -> u32 {
        self.inner.mod_order
    }

    #[getter]
    fn snr_db_grid(&self) -> Vec<f64> {
        self.inner.snr_db_grid.clone()
    }

    #[getter]
    fn block_len(&self) -> usize {
        self.inner.block_len
    }

    #[getter]
    fn num_blocks(&self) -> usize {
        self.inner.num_blocks
    }

    #[getter]
    fn precoders(&self) -> Vec<String> {
        self.inner.precoders.iter().map(|p| p.to_string()).collect()
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.seed
    }

    fn __repr__(&self) -> String {
        format!(
            "SweepConfig(users={}, antennas={}, mod_order={}, points={}, block_len={}, num_blocks={}, seed={})",
            self.inner.users,
            self.inner.antennas,
            self.inner.mod_order,
            self.inner.snr_db_grid.len(),
            self.inner.block_len,
            self.inner.num_blocks,
            self.inner.seed
        )
    }
}

/// Aggregated result of one (precoder, SNR) sweep point.
#[pyclass(frozen, name = "SerRecord")]
struct PySerRecord {
    inner: CoreSerRecord,
}

#[pymethods]
impl PySerRecord {
    #[getter]
    fn precoder(&self) -> String {
        self.inner.precoder.to_string()
    }

    #[getter]
    fn snr_db(&self) -> f64 {
        self.inner.snr_db
    }

    #[getter]
    fn trials(&self) -> u64 {
        self.inner.trials
    }

    #[getter]
    fn errors(&self) -> u64 {
        self.inner.errors
    }

    #[getter]
    fn ser(&self) -> f64 {
        self.inner.ser
    }

    /// Half-width of the normal-approximation 95% confidence interval.
    #[getter]
    fn ci95(&self) -> f64 {
        self.inner.ci95
    }

    fn __repr__(&self) -> String {
        format!(
            "SerRecord(precoder='{}', snr_db={}, trials={}, errors={}, ser={:.6e}, ci95={:.6e})",
            self.inner.precoder,
            self.inner.snr_db,
            self.inner.trials,
            self.inner.errors,
            self.inner.ser,
            self.inner.ci95
        )
    }
}

/// Rotate channel rows against each user's symbol and stack the real lifting.
#[pyfunction]
#[pyo3(signature = (channel, symbols, constellation, sigma, power_budget = 1.0, slot_index = 0))]
fn lift_slot(
    channel: &PyChannel,
    symbols: Vec<Complex64>,
    constellation: &PyConstellation,
    sigma: f64,
    power_budget: f64,
    slot_index: usize,
) -> PyResult<PyLiftedSlot> {
    Ok(PyLiftedSlot {
        inner: core_lift_slot(
            &channel.inner,
            &symbols,
            &constellation.inner,
            sigma,
            power_budget,
            slot_index,
        )
        .map_err(to_py_err)?,
    })
}

/// Produce a feasible DSAO starting point `(x_bar0, gamma0)`.
///
/// `init` is `"zf"` or `"rzf"`; the returned gamma also acts as the gamma
/// floor of the subsequent optimization.
#[pyfunction]
#[pyo3(signature = (slot, channel, symbols, init = "rzf"))]
fn initialize(
    slot: &PyLiftedSlot,
    channel: &PyChannel,
    symbols: Vec<Complex64>,
    init: &str,
) -> PyResult<(Vec<f64>, f64)> {
    let initializer = match init {
        "zf" => Initializer::Zf,
        "rzf" => Initializer::Rzf,
        other => {
            return Err(PyValueError::new_err(format!(
                "unknown initializer {other:?}: expected zf or rzf"
            )))
        }
    };
    core_initialize(&slot.inner, &channel.inner, &symbols, &initializer).map_err(to_py_err)
}

/// Run the DSAO alternating optimizer on one slot from `(x_bar0, gamma0)`.
#[pyfunction]
fn solve_slot(
    slot: &PyLiftedSlot,
    config: &PyDsaoConfig,
    x_bar0: Vec<f64>,
    gamma0: f64,
) -> PyResult<PySolution> {
    let (sol, _) =
        core_solve_slot_traced(&slot.inner, &config.inner, &x_bar0, gamma0).map_err(to_py_err)?;
    Ok(PySolution { inner: sol })
}

/// Like `solve_slot`, additionally returning the per-iteration objective
/// trace (leading entry is the objective at the starting point).
#[pyfunction]
fn solve_slot_traced(
    slot: &PyLiftedSlot,
    config: &PyDsaoConfig,
    x_bar0: Vec<f64>,
    gamma0: f64,
) -> PyResult<(PySolution, Vec<f64>)> {
    let (sol, trace) =
        core_solve_slot_traced(&slot.inner, &config.inner, &x_bar0, gamma0).map_err(to_py_err)?;
    Ok((PySolution { inner: sol }, trace))
}

/// Precode one slot with a linear baseline (`kind` is `"zf"` or `"rzf"`).
///
/// Returns `(x, gamma)`: the complex transmit signal and the matched
/// receive rescaling factor.
#[pyfunction]
#[pyo3(signature = (channel, symbols, sigma, kind = "zf", power_budget = 1.0))]
fn linear_precode(
    channel: &PyChannel,
    symbols: Vec<Complex64>,
    sigma: f64,
    kind: &str,
    power_budget: f64,
) -> PyResult<(Vec<Complex64>, f64)> {
    let kind = match kind {
        "zf" => LinearPrecoderKind::Zf,
        "rzf" => LinearPrecoderKind::Rzf,
        other => {
            return Err(PyValueError::new_err(format!(
                "unknown linear precoder {other:?}: expected zf or rzf"
            )))
        }
    };
    core_linear_precode(&channel.inner, &symbols, power_budget, sigma, kind).map_err(to_py_err)
}

/// Solve every slot of a block, unify the rescaling factor by power
/// reallocation and re-optimize each slot under its new budget.
#[pyfunction]
#[pyo3(signature = (channel, symbols, constellation, sigma, power_budgets = None, config = None))]
fn plan_block(
    channel: &PyChannel,
    symbols: Vec<Vec<Complex64>>,
    constellation: &PyConstellation,
    sigma: f64,
    power_budgets: Option<Vec<f64>>,
    config: Option<PyDsaoConfig>,
) -> PyResult<PyBlockPlan> {
    let budgets = power_budgets.unwrap_or_else(|| vec![1.0; symbols.len()]);
    let config = config.map_or_else(CoreDsaoConfig::default, |c| c.inner);
    Ok(PyBlockPlan {
        inner: core_plan_block(
            &channel.inner,
            &symbols,
            &constellation.inner,
            sigma,
            &budgets,
            &config,
        )
        .map_err(to_py_err)?,
    })
}

/// Run a seeded SER-versus-SNR sweep; returns one record per
/// (precoder, SNR) point, grouped by SNR in grid order with the precoders
/// in config order inside each group.
#[pyfunction]
#[pyo3(signature = (cfg, solver = None))]
fn run_sweep(
    py: Python<'_>,
    cfg: &PySweepConfig,
    solver: Option<PyDsaoConfig>,
) -> PyResult<Vec<PySerRecord>> {
    let solver = solver.map_or_else(CoreDsaoConfig::default, |c| c.inner);
    let cfg = cfg.inner.clone();
    let records = py
        .allow_threads(move || core_run_sweep(&cfg, &solver))
        .map_err(to_py_err)?;
    Ok(records
        .into_iter()
        .map(|inner| PySerRecord { inner })
        .collect())
}

/// Sample the noise-free rescaled constellation each user sees at one SNR
/// point under one precoder.
///
/// Returns `(samples, gamma_blks)` where each sample is a tuple
/// `(user, slot, value, tx_symbol)` and `gamma_blks` holds the block-level
/// rescaling factor of every sampled block.
#[pyfunction]
#[pyo3(signature = (cfg, snr_db, precoder = "asm", solver = None))]
fn emit_scatter(
    py: Python<'_>,
    cfg: &PySweepConfig,
    snr_db: f64,
    precoder: &str,
    solver: Option<PyDsaoConfig>,
) -> PyResult<(Vec<ScatterTuple>, Vec<f64>)> {
    let kind = parse_precoder(precoder)?;
    let solver = solver.map_or_else(CoreDsaoConfig::default, |c| c.inner);
    let cfg = cfg.inner.clone();
    let out = py
        .allow_threads(move || core_emit_scatter(&cfg, &solver, snr_db, kind))
        .map_err(to_py_err)?;
    let samples = out
        .samples
        .into_iter()
        .map(|s| (s.user, s.slot, s.value, s.tx_symbol))
        .collect();
    Ok((samples, out.gamma_blks))
}

/// Noise standard deviation for an SNR in dB under a unit power budget.
#[pyfunction(name = "sigma_for_snr_db")]
fn py_sigma_for_snr_db(snr_db: f64) -> f64 {
    sigma_for_snr_db(snr_db)
}

/// Gaussian tail probability Q(x).
#[pyfunction(name = "q_function")]
fn py_q_function(x: f64) -> f64 {
    q_function(x)
}

/// Symbol-level precoding for average-SER minimization: Python bindings.
#[pymodule]
fn slpsim_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyConstellation>()?;
    m.add_class::<PyChannel>()?;
    m.add_class::<PyLiftedSlot>()?;
    m.add_class::<PyDsaoConfig>()?;
    m.add_class::<PySolution>()?;
    m.add_class::<PyBlockPlan>()?;
    m.add_class::<PySweepConfig>()?;
    m.add_class::<PySerRecord>()?;
    m.add_function(wrap_pyfunction!(lift_slot, m)?)?;
    m.add_function(wrap_pyfunction!(initialize, m)?)?;
    m.add_function(wrap_pyfunction!(solve_slot, m)?)?;
    m.add_function(wrap_pyfunction!(solve_slot_traced, m)?)?;
    m.add_function(wrap_pyfunction!(linear_precode, m)?)?;
    m.add_function(wrap_pyfunction!(plan_block, m)?)?;
    m.add_function(wrap_pyfunction!(run_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(emit_scatter, m)?)?;
    m.add_function(wrap_pyfunction!(py_sigma_for_snr_db, m)?)?;
    m.add_function(wrap_pyfunction!(py_q_function, m)?)?;
    Ok(())
}
