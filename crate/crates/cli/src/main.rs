use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

mod args;
mod commands;

use args::Cli;

/// Exit status contract: 0 success, 1 usage or I/O error, 2 non-convergence.
pub enum Outcome {
    Done,
    NotConverged(String),
}

fn main() -> ExitCode {
    let json_errors = std::env::args().any(|a| a == "--json-errors");
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            if json_errors {
                report_json("usage", &e.to_string().trim().replace("error: ", ""), 1);
            } else {
                let _ = e.print();
            }
            return ExitCode::from(1);
        }
    };

    init_logging(&cli);
    if let Err(e) = configure_threads(&cli) {
        return fail(&cli, e);
    }
    match commands::run(&cli) {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::NotConverged(msg)) => {
            if cli.json_errors {
                report_json("not_converged", &msg, 2);
            } else {
                eprintln!("warning: {msg}");
            }
            ExitCode::from(2)
        }
        Err(e) => fail(&cli, e),
    }
}

fn fail(cli: &Cli, e: anyhow::Error) -> ExitCode {
    if cli.json_errors {
        let kind =
            e.chain().find_map(|c| c.downcast_ref::<fewmode::Error>()).map_or("error", |fe| error_kind(fe.root()));
        report_json(kind, &describe(&e), 1);
    } else {
        eprintln!("error: {}", describe(&e));
    }
    ExitCode::from(1)
}

/// The error chain joined by ": ", skipping causes already spelled out by
/// the message before them.
fn describe(e: &anyhow::Error) -> String {
    let mut out = String::new();
    for cause in e.chain() {
        let msg = cause.to_string();
        if !out.contains(&msg) {
            if !out.is_empty() {
                out.push_str(": ");
            }
            out.push_str(&msg);
        }
    }
    out
}

fn error_kind(e: &fewmode::Error) -> &'static str {
    use fewmode::Error::*;
    match e {
        InvalidParameters(_) => "invalid_parameters",
        InvalidTable(_) => "invalid_table",
        Precondition(_) => "precondition",
        Numerical(_) => "numerical",
        Defective { .. } => "defective",
        StepTooLarge { .. } => "step_too_large",
        Dimension(_) => "dimension",
        Unsupported(_) => "unsupported",
        Limit(_) => "limit",
        Parse { .. } => "parse",
        Io { .. } => "io",
        Stage { .. } => "error",
        Json(_) => "json",
        Csv(_) => "csv",
    }
}

fn report_json(kind: &str, message: &str, code: u8) {
    let v = serde_json::json!({ "error": { "kind": kind, "message": message, "exit_code": code } });
    eprintln!("{v}");
}

fn init_logging(cli: &Cli) {
    env_logger::Builder::new().filter_level(cli.log_level.into()).format_timestamp(None).parse_default_env().init();
}

fn configure_threads(cli: &Cli) -> anyhow::Result<()> {
    if let Some(n) = cli.threads.count() {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}
