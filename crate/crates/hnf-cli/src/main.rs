use std::process::ExitCode;

use clap::Parser;

use hnf_cli::{commands, RunConfig};

fn threads() -> Result<(), String> {
    let Ok(v) = std::env::var("HNF_THREADS") else { return Ok(()) };
    let n: usize = v.parse().map_err(|_| format!("HNF_THREADS={v:?} is not a thread count"))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cfg = match RunConfig::try_parse() {
        Ok(cfg) => cfg,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    if let Err(e) = threads() {
        eprintln!("hnf: {e}");
        return ExitCode::from(1);
    }
    match commands::execute(&cfg) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("hnf: {e}");
            ExitCode::from(1)
        }
    }
}
