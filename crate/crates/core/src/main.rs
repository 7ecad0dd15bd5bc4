use std::process::ExitCode;

use clap::Parser;

use lslopes::cli::{exit_code, render, run_verify, Args};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = Args::parse();
    let out = args.out.clone();
    let report = match args.into_config().and_then(|run| run_verify(&run).map(|r| (r, run.format))) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let text = render(&report.0, report.1);
    match out {
        Some(path) => {
            if let Err(e) = std::fs::write(&path, text) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::from(3);
            }
        }
        None => print!("{text}"),
    }
    ExitCode::from(exit_code(&report.0) as u8)
}
