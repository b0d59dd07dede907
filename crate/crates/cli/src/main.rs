//! `npf`: generate datasets, precompute Gram caches, train and evaluate, run the oracle studies.

mod args;
mod echo;
mod gen;
mod inputs;
mod precompute;
mod study;
mod train;

use std::process::ExitCode;

use clap::Parser;
use npf_core::NpfError;

use args::{Cli, Command};

/// Bad flags or config values.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

const USAGE: u8 = 1;
const DATA: u8 = 2;
const NUMERIC: u8 = 3;

fn classify(e: &NpfError) -> u8 {
    match e {
        NpfError::Cloud { source, .. } => classify(source),
        NpfError::InvalidDegree { .. } | NpfError::InvalidParams(_) | NpfError::Config(_) => USAGE,
        NpfError::DegenerateDensity(_)
        | NpfError::DimensionEstimate(_)
        | NpfError::IsolatedPoint(_)
        | NpfError::OraclePrecision(_)
        | NpfError::NumericFailure { .. }
        | NpfError::UndefinedMetric(_)
        | NpfError::IntegrationBlowup { .. } => NUMERIC,
        _ => DATA,
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<NpfError>() {
            return classify(e);
        }
        if cause.downcast_ref::<UsageError>().is_some() {
            return USAGE;
        }
    }
    DATA
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(USAGE) } else { ExitCode::SUCCESS };
        }
    };
    let result = match &cli.command {
        Command::Gen(a) => gen::run(a),
        Command::Precompute(a) => precompute::run(a),
        Command::Train(a) => train::run_train(a),
        Command::Eval(a) => train::run_eval(a),
        Command::Consistency(a) => study::run_consistency(a),
        Command::DensityCheck(a) => study::run_density_check(a),
        Command::Mem(a) => study::run_mem(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
