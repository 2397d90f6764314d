mod commands;
mod config;
mod output;
mod svg;

use std::io::Write;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use config::{Format, RunConfig};

const EXIT_FAILURE: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

/// Environment variable capping the worker pool size.
const THREADS_VAR: &str = "BANDSCOPE_THREADS";

fn fail(kind: &str, code: u8, message: &str) -> ExitCode {
    eprintln!("{}", output::error_record(kind, code.into(), message));
    ExitCode::from(code)
}

fn configure_threads() -> Result<(), String> {
    let Ok(value) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("{THREADS_VAR} must be a positive integer, got {value:?}"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| e.to_string())
}

fn write_output(config: &RunConfig, text: &str) -> std::io::Result<()> {
    match &config.output {
        Some(path) => std::fs::write(path, text),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()
        }
    }
}

fn main() -> ExitCode {
    let config = match RunConfig::try_parse() {
        Ok(config) => config,
        Err(err) if matches!(err.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = err.print();
            return ExitCode::SUCCESS;
        }
        Err(err) => return fail("usage", EXIT_USAGE, err.to_string().trim_end()),
    };
    if let Err(message) = configure_threads() {
        return fail("usage", EXIT_USAGE, &message);
    }
    if config.format == Format::Svg
        && !matches!(config.command, config::Command::Bands(_) | config::Command::Butterfly(_))
    {
        return fail("usage", EXIT_USAGE, "svg output is only available for `bands` and `butterfly`");
    }

    let report = match commands::run(&config.command, config.seed) {
        Ok(report) => report,
        Err(err) if err.is_numerical() => return fail("numerical", EXIT_NUMERICAL, &err.to_string()),
        // remaining library errors come from argument values clap cannot validate alone
        Err(err) => return fail("usage", EXIT_USAGE, &err.to_string()),
    };
    let text = match output::render(&config, &report) {
        Ok(text) => text,
        Err(err) => return fail("internal", EXIT_FAILURE, &format!("{err:#}")),
    };
    if let Err(err) = write_output(&config, &text) {
        return fail("io", EXIT_FAILURE, &err.to_string());
    }
    if !report.passed() {
        return fail("check_failed", EXIT_FAILURE, "one or more checks failed; see the report");
    }
    ExitCode::SUCCESS
}
