use std::process::ExitCode;

use clap::Parser;
use dhm_cli::{run, Cli};

fn init_threads() -> Result<(), String> {
    let Ok(v) = std::env::var("DHM_THREADS") else {
        return Ok(());
    };
    let n: usize = v.trim().parse().ok().filter(|n| *n > 0).ok_or_else(|| format!("DHM_THREADS must be a positive integer, got `{v}`"))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    if let Err(e) = init_threads() {
        eprintln!("dhm: {e}");
        return ExitCode::from(2);
    }
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("dhm: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
