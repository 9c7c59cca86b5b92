use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use lacheck::eval::EvalMode;
use lacheck::examples;
use lacheck::model::load_model;
use lacheck::runner::{run, RunOptions, Suite};

#[derive(Parser)]
#[command(name = "lacheck", version, about = "Residual checks for Lie algebroid momentum sections")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run check suites against a model file.
    Check {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = SuiteArg::All)]
        suite: SuiteArg,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        points: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Make H1 and HM1 blocking.
        #[arg(long)]
        require_h1: bool,
        /// Evaluate on one thread.
        #[arg(long)]
        sequential: bool,
    },
    /// Built-in example models.
    Examples {
        #[command(subcommand)]
        action: ExamplesAction,
    },
}

#[derive(Subcommand)]
enum ExamplesAction {
    List,
    Emit { name: String, path: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Axioms,
    Momentum,
    Mechanics,
    Sigma2d,
    Multisym,
    All,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Text,
}

fn usage_error(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(2)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match cli.command {
        Command::Examples { action: ExamplesAction::List } => {
            for n in examples::names() {
                println!("{n}");
            }
            ExitCode::SUCCESS
        }
        Command::Examples { action: ExamplesAction::Emit { name, path } } => match examples::emit(&name, &path) {
            Ok(true) => ExitCode::SUCCESS,
            Ok(false) => usage_error(format!("unknown example `{name}`")),
            Err(e) => usage_error(e),
        },
        Command::Check { file, suite, format, tol, points, seed, require_h1, sequential } => {
            if matches!(tol, Some(t) if !(t.is_finite() && t >= 0.0)) {
                return usage_error("--tol must be a finite non-negative number");
            }
            if points == Some(0) {
                return usage_error("--points must be positive");
            }
            let model = match load_model(&file) {
                Ok(m) => m,
                Err(e) => return usage_error(e),
            };
            let suites = match suite {
                SuiteArg::All => Vec::new(),
                SuiteArg::Axioms => vec![Suite::Axioms],
                SuiteArg::Momentum => vec![Suite::Momentum],
                SuiteArg::Mechanics => vec![Suite::Mechanics],
                SuiteArg::Sigma2d => vec![Suite::Sigma2d],
                SuiteArg::Multisym => vec![Suite::Multisym],
            };
            let mode = if sequential { EvalMode::Sequential } else { EvalMode::default() };
            let opts = RunOptions { suites, seed, points, tol, require_h1, mode };
            let report = match run(&model, &opts) {
                Ok(r) => r,
                Err(e) => return usage_error(e),
            };
            match format {
                Format::Json => print!("{}", report.to_json()),
                Format::Text => print!("{}", report.to_text()),
            }
            ExitCode::from(report.exit_code() as u8)
        }
    }
}
