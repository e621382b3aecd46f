//! Command-line front end: argument/config resolution, CSV emission and run
//! manifests.
//!
//! A run is fully described by a [`RunManifest`]: the resolved sweep
//! configuration plus the solver settings and the toolkit version. The
//! manifest is written as JSON next to every results file, and can be fed
//! back through `--manifest` to reproduce the CSV byte for byte.
//!
//! Option precedence, lowest to highest: built-in defaults, `--manifest`
//! file, `--config` file (flat `key = value` lines mirroring the flag
//! names), then explicit flags.

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use crate::dsao::DsaoConfig;
use crate::error::{Error, Result};
use crate::mc_sim::{
    emit_scatter, run_sweep, PrecoderKind, ScatterOutput, SerRecord, SweepConfig,
};

/// Everything needed to reproduce one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    /// Unix timestamp (seconds) of manifest creation.
    pub created_unix: u64,
    /// Which subcommand produced the artifact.
    pub command: String,
    pub seed: u64,
    pub sweep: SweepConfig,
    pub solver: DsaoConfig,
    /// Present only for scatter runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scatter: Option<ScatterParams>,
}

/// Scatter-specific parameters recorded in the manifest.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScatterParams {
    pub snr_db: f64,
    pub precoder: PrecoderKind,
}

/// A parsed invocation: the manifest plus where to write results.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedRun {
    pub manifest: RunManifest,
    pub out: PathBuf,
}

#[derive(Parser, Debug)]
#[command(
    name = "slpsim",
    version,
    about = "Symbol-level precoding SER simulator for the multiuser MISO downlink"
)]
struct Cli {
    #[command(subcommand)]
    command: CliCommand,
}

#[derive(Subcommand, Debug)]
enum CliCommand {
    /// Run a Monte Carlo SER-vs-SNR sweep and write CSV plus a manifest.
    Sweep(SweepArgs),
    /// Write noise-free rescaled receive samples at one SNR point.
    Scatter(ScatterArgs),
}

#[derive(Args, Debug, Default)]
struct SweepArgs {
    /// Number of single-antenna users (K).
    #[arg(long)]
    users: Option<usize>,
    /// Number of transmit antennas (N >= K).
    #[arg(long)]
    antennas: Option<usize>,
    /// QAM order: 4, 16, 64 or 256.
    #[arg(long = "mod")]
    mod_order: Option<u32>,
    /// SNR grid in dB: `start:step:stop` (inclusive) or a single value.
    #[arg(long)]
    snr: Option<String>,
    /// Slots per coherence block (L).
    #[arg(long)]
    block: Option<usize>,
    /// Channel blocks per SNR point.
    #[arg(long)]
    blocks: Option<usize>,
    /// Comma-separated subset of asm,zf,rzf.
    #[arg(long)]
    precoders: Option<String>,
    /// Master seed for all random streams.
    #[arg(long)]
    seed: Option<u64>,
    /// Output CSV path; the manifest lands next to it.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Flat key = value config file mirroring the flag names.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Re-run from a previously written manifest.
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Args, Debug, Default)]
struct ScatterArgs {
    /// Number of single-antenna users (K).
    #[arg(long)]
    users: Option<usize>,
    /// Number of transmit antennas (N >= K).
    #[arg(long)]
    antennas: Option<usize>,
    /// QAM order: 4, 16, 64 or 256.
    #[arg(long = "mod")]
    mod_order: Option<u32>,
    /// SNR point in dB.
    #[arg(long)]
    snr: Option<String>,
    /// Slots per coherence block (L).
    #[arg(long)]
    block: Option<usize>,
    /// Channel blocks to sample.
    #[arg(long)]
    blocks: Option<usize>,
    /// Precoder to sample: asm, zf or rzf.
    #[arg(long)]
    precoder: Option<String>,
    /// Master seed for all random streams.
    #[arg(long)]
    seed: Option<u64>,
    /// Output CSV path; the manifest lands next to it.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Flat key = value config file mirroring the flag names.
    #[arg(long)]
    config: Option<PathBuf>,
}

/// Parse an SNR grid: `start:step:stop` (inclusive) or one bare value.
pub fn parse_snr_grid(text: &str) -> Result<Vec<f64>> {
    let bad = |msg: &str| Error::Usage(format!("invalid SNR grid {text:?}: {msg}"));
    let parts: Vec<&str> = text.split(':').collect();
    match parts.as_slice() {
        [single] => {
            let v: f64 = single
                .trim()
                .parse()
                .map_err(|_| bad("not a number"))?;
            if !v.is_finite() {
                return Err(bad("not finite"));
            }
            Ok(vec![v])
        }
        [start, step, stop] => {
            let start: f64 = start.trim().parse().map_err(|_| bad("bad start"))?;
            let step: f64 = step.trim().parse().map_err(|_| bad("bad step"))?;
            let stop: f64 = stop.trim().parse().map_err(|_| bad("bad stop"))?;
            if !(start.is_finite() && step.is_finite() && stop.is_finite()) {
                return Err(bad("not finite"));
            }
            if step <= 0.0 {
                return Err(bad("step must be positive"));
            }
            if stop < start {
                return Err(bad("stop is below start"));
            }
            // Tolerate representation error so e.g. 0:0.3:0.9 includes 0.9.
            let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
            Ok((0..count).map(|i| start + i as f64 * step).collect())
        }
        _ => Err(bad("expected start:step:stop or a single value")),
    }
}

fn parse_precoder_list(text: &str) -> Result<Vec<PrecoderKind>> {
    text.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| p.parse())
        .collect()
}

/// One source of sweep options; later sources overlay earlier ones.
#[derive(Debug, Clone, Default)]
struct RawOpts {
    users: Option<usize>,
    antennas: Option<usize>,
    mod_order: Option<u32>,
    snr_grid: Option<Vec<f64>>,
    block_len: Option<usize>,
    num_blocks: Option<usize>,
    precoders: Option<Vec<PrecoderKind>>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    precoder: Option<PrecoderKind>,
    solver: Option<DsaoConfig>,
}

impl RawOpts {
    /// `self` wins over `base` field by field.
    fn overlay(self, base: RawOpts) -> RawOpts {
        RawOpts {
            users: self.users.or(base.users),
            antennas: self.antennas.or(base.antennas),
            mod_order: self.mod_order.or(base.mod_order),
            snr_grid: self.snr_grid.or(base.snr_grid),
            block_len: self.block_len.or(base.block_len),
            num_blocks: self.num_blocks.or(base.num_blocks),
            precoders: self.precoders.or(base.precoders),
            seed: self.seed.or(base.seed),
            out: self.out.or(base.out),
            precoder: self.precoder.or(base.precoder),
            solver: self.solver.or(base.solver),
        }
    }

    fn from_sweep_args(a: &SweepArgs) -> Result<RawOpts> {
        Ok(RawOpts {
            users: a.users,
            antennas: a.antennas,
            mod_order: a.mod_order,
            snr_grid: a.snr.as_deref().map(parse_snr_grid).transpose()?,
            block_len: a.block,
            num_blocks: a.blocks,
            precoders: a.precoders.as_deref().map(parse_precoder_list).transpose()?,
            seed: a.seed,
            out: a.out.clone(),
            precoder: None,
            solver: None,
        })
    }

    fn from_scatter_args(a: &ScatterArgs) -> Result<RawOpts> {
        Ok(RawOpts {
            users: a.users,
            antennas: a.antennas,
            mod_order: a.mod_order,
            snr_grid: a.snr.as_deref().map(parse_snr_grid).transpose()?,
            block_len: a.block,
            num_blocks: a.blocks,
            precoders: None,
            seed: a.seed,
            out: a.out.clone(),
            precoder: a.precoder.as_deref().map(str::parse).transpose()?,
            solver: None,
        })
    }

    fn from_manifest_file(path: &Path) -> Result<RawOpts> {
        let manifest: RunManifest = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        Ok(RawOpts {
            users: Some(manifest.sweep.users),
            antennas: Some(manifest.sweep.antennas),
            mod_order: Some(manifest.sweep.mod_order),
            snr_grid: Some(manifest.sweep.snr_db_grid),
            block_len: Some(manifest.sweep.block_len),
            num_blocks: Some(manifest.sweep.num_blocks),
            precoders: Some(manifest.sweep.precoders),
            seed: Some(manifest.sweep.seed),
            out: None,
            precoder: manifest.scatter.map(|s| s.precoder),
            solver: Some(manifest.solver),
        })
    }

    /// Parse a flat `key = value` config file mirroring the flag names.
    fn from_config_file(path: &Path) -> Result<RawOpts> {
        let mut opts = RawOpts::default();
        let text = std::fs::read_to_string(path)?;
        for (lineno, raw_line) in text.lines().enumerate() {
            let line = raw_line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Usage(format!(
                    "{}:{}: expected `key = value`, got {raw_line:?}",
                    path.display(),
                    lineno + 1
                ))
            })?;
            let key = key.trim();
            let value = value.trim();
            let parse_err = |what: &str| {
                Error::Usage(format!(
                    "{}:{}: invalid {what} value {value:?}",
                    path.display(),
                    lineno + 1
                ))
            };
            match key {
                "users" => opts.users = Some(value.parse().map_err(|_| parse_err("users"))?),
                "antennas" => {
                    opts.antennas = Some(value.parse().map_err(|_| parse_err("antennas"))?)
                }
                "mod" => opts.mod_order = Some(value.parse().map_err(|_| parse_err("mod"))?),
                "snr" => opts.snr_grid = Some(parse_snr_grid(value)?),
                "block" => opts.block_len = Some(value.parse().map_err(|_| parse_err("block"))?),
                "blocks" => {
                    opts.num_blocks = Some(value.parse().map_err(|_| parse_err("blocks"))?)
                }
                "precoders" => opts.precoders = Some(parse_precoder_list(value)?),
                "precoder" => opts.precoder = Some(value.parse()?),
                "seed" => opts.seed = Some(value.parse().map_err(|_| parse_err("seed"))?),
                "out" => opts.out = Some(PathBuf::from(value)),
                other => {
                    return Err(Error::Usage(format!(
                        "{}:{}: unknown config key {other:?}",
                        path.display(),
                        lineno + 1
                    )))
                }
            }
        }
        Ok(opts)
    }

    fn resolve_sweep_config(&self, defaults_precoders: bool) -> Result<SweepConfig> {
        let mut missing = Vec::new();
        if self.users.is_none() {
            missing.push("--users");
        }
        if self.antennas.is_none() {
            missing.push("--antennas");
        }
        if self.mod_order.is_none() {
            missing.push("--mod");
        }
        if self.snr_grid.is_none() {
            missing.push("--snr");
        }
        if self.out.is_none() {
            missing.push("--out");
        }
        if !missing.is_empty() {
            return Err(Error::Usage(format!(
                "missing required options: {}",
                missing.join(", ")
            )));
        }
        let precoders = if defaults_precoders {
            self.precoders.clone().unwrap_or_else(|| {
                vec![PrecoderKind::Asm, PrecoderKind::Zf, PrecoderKind::Rzf]
            })
        } else {
            vec![self.precoder.unwrap_or(PrecoderKind::Asm)]
        };
        let cfg = SweepConfig {
            users: self.users.unwrap(),
            antennas: self.antennas.unwrap(),
            mod_order: self.mod_order.unwrap(),
            snr_db_grid: self.snr_grid.clone().unwrap(),
            block_len: self.block_len.unwrap_or(500),
            num_blocks: self.num_blocks.unwrap_or(200),
            precoders,
            seed: self.seed.unwrap_or(0),
        };
        cfg.validate().map_err(|e| Error::Usage(e.to_string()))?;
        Ok(cfg)
    }
}

fn now_unix() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

fn build_manifest(
    command: &str,
    sweep: SweepConfig,
    solver: DsaoConfig,
    scatter: Option<ScatterParams>,
) -> RunManifest {
    RunManifest {
        tool: "slpsim".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        created_unix: now_unix(),
        command: command.into(),
        seed: sweep.seed,
        sweep,
        solver,
        scatter,
    }
}

/// Resolve an argument vector into a reproducible run description.
///
/// Does not execute anything; [`run`] drives the resolved run.
pub fn parse_args<I, T>(argv: I) -> Result<ParsedRun>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(|e| Error::Usage(e.to_string()))?;
    resolve_cli(cli)
}

fn resolve_cli(cli: Cli) -> Result<ParsedRun> {
    match cli.command {
        CliCommand::Sweep(args) => {
            let mut merged = RawOpts::from_sweep_args(&args)?;
            if let Some(path) = &args.config {
                merged = merged.overlay(RawOpts::from_config_file(path)?);
            }
            if let Some(path) = &args.manifest {
                merged = merged.overlay(RawOpts::from_manifest_file(path)?);
            }
            let sweep = merged.resolve_sweep_config(true)?;
            let solver = merged.solver.unwrap_or_default();
            Ok(ParsedRun {
                manifest: build_manifest("sweep", sweep, solver, None),
                out: merged.out.expect("checked by resolve"),
            })
        }
        CliCommand::Scatter(args) => {
            let mut merged = RawOpts::from_scatter_args(&args)?;
            if let Some(path) = &args.config {
                merged = merged.overlay(RawOpts::from_config_file(path)?);
            }
            // Scatter defaults to the Fig. 3-style single long block.
            if merged.block_len.is_none() {
                merged.block_len = Some(1024);
            }
            if merged.num_blocks.is_none() {
                merged.num_blocks = Some(1);
            }
            let sweep = merged.resolve_sweep_config(false)?;
            if sweep.snr_db_grid.len() != 1 {
                return Err(Error::Usage(
                    "scatter expects a single --snr value, not a grid".into(),
                ));
            }
            let scatter = ScatterParams {
                snr_db: sweep.snr_db_grid[0],
                precoder: sweep.precoders[0],
            };
            let solver = merged.solver.unwrap_or_default();
            Ok(ParsedRun {
                manifest: build_manifest("scatter", sweep, solver, Some(scatter)),
                out: merged.out.expect("checked by resolve"),
            })
        }
    }
}

/// Manifest path placed next to a results file: `results.csv` ->
/// `results.manifest.json`.
pub fn manifest_path_for(out: &Path) -> PathBuf {
    out.with_extension("manifest.json")
}

/// Render sweep records as CSV: header `precoder,snr_db,trials,errors,ser,ci95`,
/// rows ordered by precoder name then SNR ascending.
pub fn render_results_csv(records: &[SerRecord]) -> String {
    let mut rows: Vec<&SerRecord> = records.iter().collect();
    rows.sort_by(|a, b| {
        a.precoder
            .to_string()
            .cmp(&b.precoder.to_string())
            .then(a.snr_db.partial_cmp(&b.snr_db).expect("finite SNR"))
    });
    let mut out = String::from("precoder,snr_db,trials,errors,ser,ci95\n");
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.precoder, r.snr_db, r.trials, r.errors, r.ser, r.ci95
        )
        .expect("string write");
    }
    out
}

/// Render scatter samples as CSV: header `user,slot,re,im` in sample order.
pub fn render_scatter_csv(output: &ScatterOutput) -> String {
    let mut out = String::from("user,slot,re,im\n");
    for s in &output.samples {
        writeln!(out, "{},{},{},{}", s.user, s.slot, s.value.re, s.value.im)
            .expect("string write");
    }
    out
}

/// Write the results CSV and its manifest JSON side by side.
pub fn write_results(records: &[SerRecord], out: &Path, manifest: &RunManifest) -> Result<()> {
    std::fs::write(out, render_results_csv(records))?;
    let json = serde_json::to_string_pretty(manifest)?;
    std::fs::write(manifest_path_for(out), json + "\n")?;
    Ok(())
}

/// Write the scatter CSV and its manifest JSON side by side.
pub fn write_scatter(output: &ScatterOutput, out: &Path, manifest: &RunManifest) -> Result<()> {
    std::fs::write(out, render_scatter_csv(output))?;
    let json = serde_json::to_string_pretty(manifest)?;
    std::fs::write(manifest_path_for(out), json + "\n")?;
    Ok(())
}

/// Parse `argv`, execute the run and write the artifacts.
pub fn run<I, T>(argv: I) -> Result<()>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e)
            if matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            ) =>
        {
            print!("{e}");
            return Ok(());
        }
        Err(e) => return Err(Error::Usage(e.to_string())),
    };
    let parsed = resolve_cli(cli)?;
    match parsed.manifest.command.as_str() {
        "sweep" => {
            let records = run_sweep(&parsed.manifest.sweep, &parsed.manifest.solver)?;
            write_results(&records, &parsed.out, &parsed.manifest)?;
            println!(
                "wrote {} records to {} (manifest: {})",
                records.len(),
                parsed.out.display(),
                manifest_path_for(&parsed.out).display()
            );
        }
        "scatter" => {
            let params = parsed.manifest.scatter.expect("scatter params present");
            let output = emit_scatter(
                &parsed.manifest.sweep,
                &parsed.manifest.solver,
                params.snr_db,
                params.precoder,
            )?;
            write_scatter(&output, &parsed.out, &parsed.manifest)?;
            let gamma_summary: Vec<String> =
                output.gamma_blks.iter().map(|g| format!("{g:.6}")).collect();
            println!(
                "wrote {} samples to {} (gamma_blk per block: {})",
                output.samples.len(),
                parsed.out.display(),
                gamma_summary.join(", ")
            );
        }
        other => return Err(Error::InvalidParam(format!("unknown command {other}"))),
    }
    Ok(())
}
