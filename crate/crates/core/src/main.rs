//! `slpsim` binary: SER-vs-SNR sweeps and receive-constellation scatter
//! exports for symbol-level precoding in the multiuser MISO downlink.
//!
//! Exit codes: 0 when every requested point completed, 2 for usage errors,
//! 1 for runtime failures.

use slpsim::Error;

/// Honor `SLPSIM_WORKERS` for the global rayon pool; unset means one worker
/// per core.
fn configure_workers() {
    let Ok(raw) = std::env::var("SLPSIM_WORKERS") else {
        return;
    };
    match raw.trim().parse::<usize>() {
        Ok(n) if n > 0 => {
            if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                log::warn!("could not size worker pool to {n}: {e}");
            }
        }
        _ => log::warn!("ignoring invalid SLPSIM_WORKERS value {raw:?}"),
    }
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    configure_workers();
    match slpsim::cli::run(std::env::args_os()) {
        Ok(()) => {}
        Err(Error::Usage(msg)) => {
            eprintln!("{msg}");
            std::process::exit(2);
        }
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(1);
        }
    }
}
