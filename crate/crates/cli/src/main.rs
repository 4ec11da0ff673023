mod args;
mod commands;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

/// Bad arguments discovered after clap's own parsing; exits like a clap error.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn run(cli: &Cli) -> anyhow::Result<bool> {
    match &cli.command {
        Command::Partition(a) => commands::partition(a)?,
        Command::Resample(a) => commands::resample_cmd(a)?,
        Command::Nested(a) => commands::nested(a)?,
        Command::Synth(a) => commands::synth(a)?,
        Command::Validate(a) => return commands::validate(a),
        Command::Plot(a) => commands::plot(a)?,
        Command::Range(a) => commands::range(a)?,
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
