use std::process::ExitCode;

use clap::Parser;
use ramsey_duality::cli::{run, Cli, RunConfig};
use ramsey_duality::Error;

fn diagnostic(kind: &str, message: &str) {
    eprintln!(
        "{}",
        serde_json::json!({ "error": kind, "message": message })
    );
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Calibration(_) => 3,
        Error::Config(_) | Error::Domain(_) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help / --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            diagnostic("usage", e.to_string().trim());
            return ExitCode::from(2);
        }
    };
    let result = RunConfig::try_from(cli).and_then(|cfg| run(&cfg).map(|out| (cfg, out)));
    let (cfg, out) = match result {
        Ok(v) => v,
        Err(e) => {
            diagnostic(e.kind(), &e.to_string());
            return ExitCode::from(exit_code(&e));
        }
    };
    match &cfg.output_path {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &out.text) {
                diagnostic("io", &format!("{path}: {e}"));
                return ExitCode::from(1);
            }
        }
        None => print!("{}", out.text),
    }
    match out.failure {
        Some(e) => {
            diagnostic(e.kind(), &e.to_string());
            ExitCode::from(exit_code(&e))
        }
        None => ExitCode::SUCCESS,
    }
}
