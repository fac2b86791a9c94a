use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

/// Certified verification of STL properties over parameterized ODE systems.
///
/// Exit status of `verify`: 0 Valid, 1 Unsat, 2 Unknown, 64 usage or parse
/// error, 74 I/O error.
#[derive(Debug, Parser)]
#[command(name = "stlcert", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Verify one formula over the model's parameter and initial boxes.
    Verify(VerifyArgs),
    /// Verify a formula for many sampled parameter values.
    Batch(BatchArgs),
    /// Write the enclosure of the model's solutions as CSV.
    Trace(TraceArgs),
    /// List the built-in models, or print one of them.
    Models { name: Option<String> },
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// Model file, or the name of a built-in model (rotation, lorenz, timer).
    #[arg(long)]
    pub model: String,
    /// Override a parameter domain: NAME=VALUE or NAME=LO,HI. Repeatable.
    #[arg(long = "param", value_name = "NAME=RANGE")]
    pub param: Vec<String>,
}

#[derive(Debug, Args)]
pub struct FormulaArgs {
    /// Formula text.
    #[arg(long, conflicts_with = "formula_file")]
    pub formula: Option<String>,
    /// File holding the formula.
    #[arg(long)]
    pub formula_file: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ConfigArgs {
    /// Progress threshold of the root search.
    #[arg(long, default_value_t = 1e-14)]
    pub epsilon: f64,
    /// Inflation parameter of the root verification, in (0, 1).
    #[arg(long, default_value_t = 0.01)]
    pub theta: f64,
    /// Smallest integration step.
    #[arg(long, default_value_t = 1e-14)]
    pub tmin: f64,
    /// Taylor order of the integrator.
    #[arg(long, default_value_t = 15)]
    pub order: usize,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub formula: FormulaArgs,
    #[command(flatten)]
    pub config: ConfigArgs,
    /// Also write the enclosure used for the verdict as CSV.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Include the set of every subformula in the output.
    #[arg(long)]
    pub dump_sets: bool,
}

#[derive(Debug, Args)]
pub struct BatchArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub formula: FormulaArgs,
    #[command(flatten)]
    pub config: ConfigArgs,
    #[arg(long, default_value_t = 100)]
    pub runs: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Half-width added around every sampled parameter value.
    #[arg(long, default_value_t = 0.0)]
    pub widen: f64,
    /// Leave wall-clock times out so that runs with equal seeds print
    /// identical output.
    #[arg(long)]
    pub omit_timing: bool,
    /// Write every run's parameters and verdict to this JSON file.
    #[arg(long)]
    pub records: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TraceArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub config: ConfigArgs,
    /// End time of the enclosure.
    #[arg(long)]
    pub horizon: f64,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}
