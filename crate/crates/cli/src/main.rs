mod args;
mod commands;
mod config;
mod failure;
mod output;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command};
use failure::Failure;

fn run(cli: &Cli) -> Result<(), Failure> {
    let cfg = config::load(cli.config.as_deref())?;
    let (artifacts, dir) = match &cli.command {
        Command::Analyze(a) => (commands::analyze(&cfg, a)?, &a.out_dir),
        Command::Compare(a) => (commands::compare(&cfg, a)?, &a.out_dir),
        Command::Evaluate(a) => (commands::evaluate(&cfg, a)?, &a.out_dir),
        Command::Timeline(a) => (commands::timeline(&cfg, a)?, &a.out_dir),
        Command::Synth(a) => (commands::synth(a)?, &a.out_dir),
        Command::Validate(a) => {
            let (artifacts, text) = commands::validate(a)?;
            print!("{text}");
            match &a.out_dir {
                Some(dir) => return artifacts.write_to(dir),
                None => return Ok(()),
            }
        }
    };
    let names: Vec<&str> = artifacts.names().collect();
    artifacts.write_to(dir)?;
    for n in names {
        eprintln!("wrote {}", dir.join(n).display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(3),
            };
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("orfocus: {f}");
            ExitCode::from(f.exit_code())
        }
    }
}
