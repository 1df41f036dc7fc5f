use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand as ClapSubcommand};

use rdtm_cli::{run, CommandConfig, Input, OutputFormat, Subcommand};

/// Reduced differential transform solver for nonlinear wave-like equations.
#[derive(Parser)]
#[command(name = "rdtm", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(ClapSubcommand)]
enum Command {
    /// Print the spectra V_0..V_{N-1} and the truncated series.
    Solve(CommonArgs),
    /// Absolute-error table against the exact solution.
    Table(CommonArgs),
    /// Columnar error data for plotting.
    Figure(CommonArgs),
    /// Residual and closed-form checks; exits nonzero on failure.
    Check(CommonArgs),
    /// Run all built-in models end to end.
    Demo(DemoArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Built-in model (ex1, ex2, ex3) or path to a problem file.
    input: String,
    /// Number of spectra N.
    #[arg(long)]
    order: Option<usize>,
    /// Working precision in decimal digits.
    #[arg(long, default_value_t = 50)]
    precision: u32,
    /// text, latex, csv or json.
    #[arg(long, default_value = "text")]
    format: OutputFormat,
    /// Grid, e.g. "t=0.1:1:0.1;x=0.1:1:0.1;y=x".
    #[arg(long)]
    grid: Option<String>,
    /// Fixed variables for `figure`, e.g. "y=1/2".
    #[arg(long)]
    slice: Option<String>,
    /// Significant digits in tables and figure data.
    #[arg(long, default_value_t = 5)]
    digits: usize,
    /// Write output to a file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DemoArgs {
    #[arg(long, default_value_t = 50)]
    precision: u32,
    #[arg(long, default_value_t = 5)]
    digits: usize,
}

fn config(sub: Subcommand, a: CommonArgs) -> CommandConfig {
    CommandConfig {
        order: a.order,
        precision: a.precision,
        format: a.format,
        grid: a.grid,
        slice: a.slice,
        digits: a.digits,
        out: a.out,
        ..CommandConfig::new(sub, Some(Input::parse(&a.input)))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match cli.command {
        Command::Solve(a) => config(Subcommand::Solve, a),
        Command::Table(a) => config(Subcommand::Table, a),
        Command::Figure(a) => config(Subcommand::Figure, a),
        Command::Check(a) => config(Subcommand::Check, a),
        Command::Demo(a) => CommandConfig {
            precision: a.precision,
            digits: a.digits,
            ..CommandConfig::new(Subcommand::Demo, None)
        },
    };
    match run(&cfg) {
        Ok(outcome) => {
            print!("{}", outcome.output);
            if outcome.success {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
