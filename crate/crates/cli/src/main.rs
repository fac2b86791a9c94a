//! `stlcert` command-line front end.

mod args;

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use serde_json::Value;
use thiserror::Error;

use stlcert::batch::{run_batch, BatchSpec};
use stlcert::integrator::SignalEnclosure;
use stlcert::interval::{Interval, IntervalBox};
use stlcert::model::numeric::parse_decimal;
use stlcert::model::{builtin_source, parse_model, ContinuousSystem, BUILTIN_NAMES};
use stlcert::monitor::{monitor_stl_traced, MonitorConfig, Outcome};
use stlcert::stl::{parse_formula, Formula};

use args::{BatchArgs, Cli, Command, ConfigArgs, FormulaArgs, ModelArgs, TraceArgs, VerifyArgs};

const EXIT_USAGE: u8 = 64;
const EXIT_IO: u8 = 74;

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Parse { .. } => EXIT_USAGE,
            CliError::Io { .. } => EXIT_IO,
        }
    }

    fn io(path: impl AsRef<Path>, source: io::Error) -> CliError {
        CliError::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("stlcert: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: Cli) -> Result<u8, CliError> {
    match cli.command {
        Command::Verify(a) => verify(a),
        Command::Batch(a) => batch(a),
        Command::Trace(a) => trace(a),
        Command::Models { name } => models(name.as_deref()),
    }
}

fn verify(a: VerifyArgs) -> Result<u8, CliError> {
    let sys = load_model(&a.model)?;
    let phi = load_formula(&a.formula, &sys)?;
    let cfg = config(&a.config)?;
    let (mut verdict, enc) = monitor_stl_traced(&sys, &phi, &cfg);
    if let Some(path) = &a.trace {
        write_trace(path, &enc)?;
    }
    if !a.dump_sets {
        verdict.sets.clear();
    }
    print_json(&serde_json::to_value(&verdict).expect("verdict serializes"))?;
    Ok(match verdict.outcome {
        Outcome::Valid => 0,
        Outcome::Unsat => 1,
        Outcome::Unknown => 2,
    })
}

fn batch(a: BatchArgs) -> Result<u8, CliError> {
    let sys = load_model(&a.model)?;
    let phi = load_formula(&a.formula, &sys)?;
    if a.runs == 0 {
        return Err(CliError::Usage("--runs must be at least 1".into()));
    }
    if !(a.widen >= 0.0 && a.widen.is_finite()) {
        return Err(CliError::Usage("--widen must be a non-negative number".into()));
    }
    let spec = BatchSpec {
        runs: a.runs,
        seed: a.seed,
        widen: a.widen,
        config: config(&a.config)?,
    };
    let (report, records) = run_batch(&sys, &phi, &spec).map_err(|e| CliError::Parse {
        path: a.model.model.clone(),
        message: e.to_string(),
    })?;
    let mut report = serde_json::to_value(&report).expect("report serializes");
    let mut records = serde_json::to_value(&records).expect("records serialize");
    if a.omit_timing {
        strip_timing(&mut report);
        strip_timing(&mut records);
    }
    if let Some(path) = &a.records {
        let text = serde_json::to_string_pretty(&records).expect("records serialize");
        fs::write(path, text + "\n").map_err(|e| CliError::io(path, e))?;
    }
    print_json(&report)?;
    Ok(0)
}

fn trace(a: TraceArgs) -> Result<u8, CliError> {
    let sys = load_model(&a.model)?;
    if !(a.horizon >= 0.0 && a.horizon.is_finite()) {
        return Err(CliError::Usage("--horizon must be a non-negative number".into()));
    }
    let cfg = config(&a.config)?;
    let mut enc = SignalEnclosure::new(&sys, sys.param_domain.clone(), sys.init.clone(), cfg.integrator());
    let result = enc.extend(a.horizon);
    match &a.out {
        Some(path) => write_trace(path, &enc)?,
        None => {
            let stdout = io::stdout();
            enc.write_csv(BufWriter::new(stdout.lock()))
                .map_err(|e| CliError::io("<stdout>", e))?;
        }
    }
    match result {
        Ok(()) => Ok(0),
        Err(e) => {
            eprintln!("stlcert: integration stopped: {e}");
            Ok(2)
        }
    }
}

fn models(name: Option<&str>) -> Result<u8, CliError> {
    match name {
        None => {
            for n in BUILTIN_NAMES {
                println!("{n}");
            }
        }
        Some(n) => {
            let src = builtin_source(n).ok_or_else(|| CliError::Usage(format!("no built-in model `{n}`")))?;
            print!("{src}");
        }
    }
    Ok(0)
}

/// Reads a model file, or a built-in model when no file of that name exists.
fn load_model(a: &ModelArgs) -> Result<ContinuousSystem, CliError> {
    let path = Path::new(&a.model);
    let (text, origin) = if path.exists() {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        (text, a.model.clone())
    } else if let Some(src) = builtin_source(&a.model) {
        (src.to_string(), format!("<built-in {}>", a.model))
    } else {
        return Err(CliError::io(
            path,
            io::Error::new(io::ErrorKind::NotFound, "no such file or built-in model"),
        ));
    };
    let mut sys = parse_model(&text).map_err(|e| CliError::Parse {
        path: origin.clone(),
        message: e.to_string(),
    })?;
    if !a.param.is_empty() {
        let mut u: Vec<Interval> = sys.param_domain.iter().copied().collect();
        for assignment in &a.param {
            let (name, value) = parse_param(assignment)?;
            let i = sys
                .params
                .iter()
                .position(|p| *p == name)
                .ok_or_else(|| CliError::Usage(format!("model has no parameter `{name}`")))?;
            u[i] = value;
        }
        sys = sys
            .with_param_domain(IntervalBox::new(u))
            .map_err(|e| CliError::Parse {
                path: origin,
                message: e.to_string(),
            })?;
    }
    Ok(sys)
}

/// `name=value` or `name=lo,hi`.
fn parse_param(text: &str) -> Result<(String, Interval), CliError> {
    let bad = || CliError::Usage(format!("--param expects NAME=VALUE or NAME=LO,HI, got `{text}`"));
    let (name, value) = text.split_once('=').ok_or_else(bad)?;
    let num = |s: &str| parse_decimal(s.trim()).ok_or_else(bad);
    let iv = match value.split_once(',') {
        Some((lo, hi)) => Interval::try_new(num(lo)?.lo(), num(hi)?.hi()).ok_or_else(bad)?,
        None => num(value)?,
    };
    Ok((name.trim().to_string(), iv))
}

fn load_formula(a: &FormulaArgs, sys: &ContinuousSystem) -> Result<Formula, CliError> {
    let (text, origin) = match (&a.formula, &a.formula_file) {
        (Some(text), None) => (text.clone(), "<formula>".to_string()),
        (None, Some(path)) => (
            fs::read_to_string(path).map_err(|e| CliError::io(path, e))?,
            path.display().to_string(),
        ),
        _ => {
            return Err(CliError::Usage(
                "give exactly one of --formula and --formula-file".into(),
            ))
        }
    };
    parse_formula(&text, &sys.scope()).map_err(|e| CliError::Parse {
        path: origin,
        message: e.to_string(),
    })
}

// Negated comparisons so that NaN is rejected too.
#[allow(clippy::neg_cmp_op_on_partial_ord)]
fn config(a: &ConfigArgs) -> Result<MonitorConfig, CliError> {
    let cfg = MonitorConfig {
        epsilon: a.epsilon,
        theta: a.theta,
        t_min: a.tmin,
        order: a.order,
    };
    if !(cfg.epsilon > 0.0) {
        return Err(CliError::Usage("--epsilon must be positive".into()));
    }
    if !(cfg.theta > 0.0 && cfg.theta < 1.0) {
        return Err(CliError::Usage("--theta must lie in (0, 1)".into()));
    }
    if !(cfg.t_min > 0.0) {
        return Err(CliError::Usage("--tmin must be positive".into()));
    }
    if !(2..=40).contains(&cfg.order) {
        return Err(CliError::Usage("--order must lie in 2..=40".into()));
    }
    Ok(cfg)
}

fn write_trace(path: &PathBuf, enc: &SignalEnclosure) -> Result<(), CliError> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut w = BufWriter::new(file);
    enc.write_csv(&mut w)
        .and_then(|_| w.flush())
        .map_err(|e| CliError::io(path, e))
}

fn print_json(v: &Value) -> Result<(), CliError> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, v)
        .map_err(io::Error::from)
        .and_then(|_| writeln!(out))
        .map_err(|e| CliError::io("<stdout>", e))
}

fn strip_timing(v: &mut Value) {
    match v {
        Value::Object(map) => {
            map.remove("mean_valid_time");
            map.remove("seconds");
            map.values_mut().for_each(strip_timing);
        }
        Value::Array(items) => items.iter_mut().for_each(strip_timing),
        _ => {}
    }
}
