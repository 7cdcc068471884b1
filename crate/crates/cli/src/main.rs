//! `fingersynth`: generate synthetic fingerprint datasets and evaluate them.

mod args;
mod evaluate;
mod generate;
mod pairs;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::new()
        .filter_level(if cli.verbose { log::LevelFilter::Info } else { log::LevelFilter::Warn })
        .format_target(false)
        .init();
    let result = match cli.command {
        Command::Generate(a) => generate::run(&a),
        Command::Evaluate(a) => evaluate::run(&a),
        Command::Match(a) => pairs::run_match(&a),
        Command::Balance(a) => pairs::run_balance(&a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
