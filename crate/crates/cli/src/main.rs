use std::process::ExitCode;

use clap::Parser;

mod args;
mod commands;
mod io;
mod report;

use args::{Cli, Command};

/// Exit status 2 for bad input or configuration, 1 when the computation
/// itself failed.
#[derive(Debug)]
pub enum CliError {
    Input(anyhow::Error),
    Compute(anyhow::Error),
}

impl CliError {
    fn context(self, msg: String) -> Self {
        match self {
            CliError::Input(e) => CliError::Input(e.context(msg)),
            CliError::Compute(e) => CliError::Compute(e.context(msg)),
        }
    }
}

impl From<simplex_clf::Error> for CliError {
    fn from(e: simplex_clf::Error) -> Self {
        use simplex_clf::Error as E;
        let numeric = e.is_ill_conditioned()
            || matches!(
                e,
                E::OutsideImage { .. } | E::PairFailed { .. } | E::NotClosed { .. }
            );
        if numeric {
            CliError::Compute(e.into())
        } else {
            CliError::Input(e.into())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(CliError::Input(anyhow::anyhow!(
                "--threads must be positive"
            )));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::Input(e.into()))?;
    }
    match &cli.command {
        Command::Transform(a) => commands::transform(a),
        Command::Distance(a) => commands::distance(a),
        Command::Summarize(a) => commands::summarize(a),
        Command::Fit(a) => commands::fit(a),
        Command::Predict(a) => commands::predict(a),
        Command::Cv(a) => commands::cv(a),
        Command::Grid(a) => commands::grid(a),
        Command::Synth(a) => commands::synth(a),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Input(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(CliError::Compute(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
