//! `modlab` command-line driver.
//!
//! ```text
//! modlab <subcommand> [--config PATH] [--out DIR] [--seed-list 1,2,3]
//!                     [--weight local|global] [--optimizer adam|adamw]
//!
//! subcommands: verify-appendix, stft, phase-identity, rate,
//!              train-compare, params
//! exit codes:  0 all declared checks passed, 1 a check failed,
//!              2 configuration or usage error
//! ```

use modlab::cli::{self, CliError, CommandOutcome, Overrides};
use modlab::config::{parse_seed_list, Config};
use num_complex::Complex64;
use std::path::PathBuf;
use std::process::ExitCode;

const USAGE: &str = "\
usage: modlab <subcommand> [flags]

subcommands:
  verify-appendix   closed-form transform vs quadrature, origin value,
                    nonvanishing condition, pointwise bound sweep
  stft              transform the configured target and check the round trip
  phase-identity    residual battery for the plane-wave expansion
  rate              Monte-Carlo N-term approximation rate experiment
  train-compare     modulation vs plain ReLU training benchmark
  params            parameter-count table for the benchmark configurations

flags:
  --config PATH             key = value configuration file
  --out DIR                 output directory (overrides experiment.out)
  --seed-list 1,2,3         seeds (overrides experiment.seeds)
  --weight local|global     dictionary weight (overrides rate.weight)
  --optimizer adam|adamw    optimizer (overrides train.optimizer)
";

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    match run(&args) {
        Ok(outcome) => {
            print!("{}", outcome.summary);
            if outcome.passed {
                ExitCode::from(0)
            } else {
                ExitCode::from(1)
            }
        }
        Err(CliError::Config(e)) => {
            eprintln!("{e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(2)
        }
    }
}

fn run(args: &[String]) -> Result<CommandOutcome, CliError> {
    let Some(subcommand) = args.first() else {
        eprint!("{USAGE}");
        return Err(CliError::Run("missing subcommand".into()));
    };
    let mut config_path: Option<PathBuf> = None;
    let mut overrides = Overrides::default();
    let mut i = 1;
    while i < args.len() {
        let flag = args[i].as_str();
        let value = |i: usize| -> Result<&String, CliError> {
            args.get(i + 1)
                .ok_or_else(|| CliError::Run(format!("flag {flag} needs a value")))
        };
        match flag {
            "--config" => {
                config_path = Some(PathBuf::from(value(i)?));
                i += 2;
            }
            "--out" => {
                overrides.out_dir = Some(PathBuf::from(value(i)?));
                i += 2;
            }
            "--seed-list" => {
                overrides.seed_list = Some(parse_seed_list(value(i)?)?);
                i += 2;
            }
            "--weight" => {
                overrides.weight = Some(value(i)?.clone());
                i += 2;
            }
            "--optimizer" => {
                overrides.optimizer = Some(value(i)?.clone());
                i += 2;
            }
            "--help" | "-h" => {
                print!("{USAGE}");
                return Ok(CommandOutcome { passed: true, summary: String::new() });
            }
            other => {
                eprint!("{USAGE}");
                return Err(CliError::Run(format!("unknown flag {other}")));
            }
        }
    }
    let config = match &config_path {
        Some(path) => Config::from_file(path)?,
        None => Config::default(),
    };
    match subcommand.as_str() {
        "verify-appendix" => {
            cli::cmd_verify_appendix(&config, &overrides, Complex64::new(0.0, 0.0))
        }
        "stft" => cli::cmd_stft(&config, &overrides),
        "phase-identity" => cli::cmd_phase_identity(&config, &overrides),
        "rate" => cli::cmd_rate(&config, &overrides),
        "train-compare" => cli::cmd_train_compare(&config, &overrides),
        "params" => cli::cmd_params(&config, &overrides),
        other => {
            eprint!("{USAGE}");
            Err(CliError::Run(format!("unknown subcommand {other}")))
        }
    }
}
