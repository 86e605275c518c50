//! `sturm`: band coverings, pressure curves and spectral exponents from the
//! command line.

use std::io::Write;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use sturm_core::bands::{BandRecord, BandTree, TransferContext, CSV_HEADER};
use sturm_core::characteristics::{
    asymptotic_constants, beta_interval, characteristics_with, dimension_sweep, log_eigenvalue, multifractal_with,
    SWEEP_LAMBDAS,
};
use sturm_core::thermo::{Depth, Potential};
use sturm_core::verify::{run_suite, SuiteConfig, AUDIT_SEED};
use sturm_core::{check_alpha, Error};

/// Significant digits of every serialized real.
const PRECISION: usize = 17;

#[derive(Parser, Debug)]
#[command(name = "sturm", version, about = "Spectral exponents of Sturm Hamiltonians with eventually periodic frequencies")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// Period of the continued fraction, comma separated.
    #[arg(long, global = true, value_delimiter = ',', default_value = "1", value_parser = clap::value_parser!(u32).range(1..))]
    a: Vec<u32>,
    /// Coupling constant, greater than 20.
    #[arg(long, global = true, default_value_t = 24.0, value_parser = parse_lambda)]
    lambda: f64,
    /// Tree levels (bands) or largest word length (pressure and exponents).
    #[arg(long, global = true)]
    levels: Option<usize>,
    /// Bands allowed per tree level.
    #[arg(long, global = true, env = "STURM_BAND_BUDGET", default_value_t = Depth::default().budget)]
    budget: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write to a file instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<std::path::PathBuf>,
    /// Worker threads; all cores when absent.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true, default_value_t = AUDIT_SEED)]
    seed: u64,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// All spectral generating bands down to `--levels`.
    Bands,
    /// Pressure curve with the abscissae of γ, d, D and 𝒯.
    Pressure {
        #[arg(long, default_value_t = -2.0, allow_hyphen_values = true)]
        s_min: f64,
        #[arg(long, default_value_t = 3.0, allow_hyphen_values = true)]
        s_max: f64,
        #[arg(long, default_value_t = 51)]
        steps: usize,
    },
    /// γ, d, D and 𝒯 with error estimates.
    Chars,
    /// Large-coupling constants ρ_γ, ρ_d, ρ_𝒯 exactly and ρ_D from a sweep.
    Asymptotics {
        /// Skip the coupling sweep behind ρ_D.
        #[arg(long)]
        no_sweep: bool,
    },
    /// Multifractal spectrum of the density of states on a grid inside [γ, 𝒯].
    Multifractal {
        #[arg(long, default_value_t = 21)]
        beta_steps: usize,
    },
    /// The audit suite.
    Verify {
        /// Add the period (2,3).
        #[arg(long)]
        deep: bool,
        /// Run only audits whose name starts with one of these.
        #[arg(long, value_delimiter = ',')]
        only: Vec<String>,
    },
}

fn parse_lambda(s: &str) -> Result<f64, String> {
    let x: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if x > 20.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(format!("coupling must exceed 20, got {x}"))
    }
}

/// Exit status: 0 ok, 1 audit failure, 2 budget exhaustion, 3 invariant
/// violation, 64 usage or input error.
enum Outcome {
    Ok,
    AuditFailed,
    Budget,
}

fn real(x: f64) -> Value {
    if x.is_finite() {
        Value::String(format!("{:.*e}", PRECISION - 1, x))
    } else {
        Value::String(x.to_string())
    }
}

/// Replaces every non-integer number by a decimal string.
fn stringify(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => real(n.as_f64().unwrap()),
        Value::Array(xs) => Value::Array(xs.into_iter().map(stringify).collect()),
        Value::Object(m) => Value::Object(m.into_iter().map(|(k, v)| (k, stringify(v))).collect()),
        v => v,
    }
}

fn with_precision(v: Value) -> Value {
    match stringify(v) {
        Value::Object(mut m) => {
            m.insert("precision".into(), json!(PRECISION));
            Value::Object(m)
        }
        v => v,
    }
}

fn csv_real(x: f64) -> String {
    format!("{:.*e}", PRECISION - 1, x)
}

struct Out {
    sink: Box<dyn Write>,
}

impl Out {
    fn json(&mut self, v: Value) -> anyhow::Result<()> {
        writeln!(self.sink, "{}", serde_json::to_string_pretty(&v)?)?;
        Ok(())
    }

    fn line(&mut self, s: &str) -> anyhow::Result<()> {
        writeln!(self.sink, "{s}")?;
        Ok(())
    }
}

fn depth(c: &Common) -> Depth {
    Depth {
        max_len: c.levels.unwrap_or(Depth::default().max_len),
        budget: c.budget,
    }
}

/// The potential, or exit status 2 when an explicit depth was not reached.
fn potential(c: &Common) -> anyhow::Result<(Potential, Outcome)> {
    let pot = Potential::new(&c.a, c.lambda, depth(c))?;
    let outcome = if pot.truncated() && c.levels.is_some() {
        Outcome::Budget
    } else {
        Outcome::Ok
    };
    Ok((pot, outcome))
}

fn cmd_bands(c: &Common, out: &mut Out) -> anyhow::Result<Outcome> {
    let levels = c.levels.unwrap_or(4);
    let mut tree = BandTree::new(TransferContext::new(check_alpha(&c.a)?, c.lambda, 64)?);
    let mut truncated = false;
    while tree.depth() < levels {
        if tree.next_level_size() > c.budget {
            truncated = true;
            break;
        }
        tree.grow()?;
    }
    let records: Vec<BandRecord> = (0..=tree.depth())
        .flat_map(|n| tree.level(n).iter().map(|b| b.record()))
        .collect();
    match c.format {
        Format::Json => out.json(with_precision(json!({
            "a": c.a,
            "lambda": c.lambda,
            "levels": tree.depth(),
            "truncated": truncated,
            "bands": records,
        })))?,
        Format::Csv => {
            out.line(CSV_HEADER)?;
            for r in &records {
                out.line(&r.csv_row())?;
            }
        }
    }
    Ok(if truncated { Outcome::Budget } else { Outcome::Ok })
}

fn cmd_pressure(c: &Common, s_min: f64, s_max: f64, steps: usize, out: &mut Out) -> anyhow::Result<Outcome> {
    if !(s_min < s_max) || steps < 2 {
        return Err(Error::InvalidInput("need s-min < s-max and at least 2 steps".into()).into());
    }
    let (pot, outcome) = potential(c)?;
    let curve = pot.curve(s_min, s_max, steps)?;
    let ch = characteristics_with(&pot)?;
    let p0 = log_eigenvalue(&c.a)?;
    match c.format {
        Format::Json => {
            let mut v = serde_json::to_value(&curve)?;
            let m = v.as_object_mut().expect("curve is an object");
            m.insert("P0".into(), json!(p0));
            m.insert("dP0".into(), json!(pot.derivative(0.0)));
            m.insert(
                "abscissae".into(),
                json!({"gamma": ch.gamma, "d": ch.d, "D": ch.dim, "T": ch.transport}),
            );
            out.json(with_precision(v))?;
        }
        Format::Csv => {
            out.line("s,P,P_err,dP")?;
            for p in &curve.grid {
                out.line(&format!("{},{},{},{}", csv_real(p.s), csv_real(p.p), csv_real(p.p_err), csv_real(p.dp)))?;
            }
        }
    }
    Ok(outcome)
}

fn cmd_chars(c: &Common, out: &mut Out) -> anyhow::Result<Outcome> {
    let (pot, outcome) = potential(c)?;
    let ch = characteristics_with(&pot)?;
    match c.format {
        Format::Json => out.json(with_precision(serde_json::to_value(&ch)?))?,
        Format::Csv => {
            out.line("a,lambda,gamma,d,D,T")?;
            let a = c.a.iter().map(u32::to_string).collect::<Vec<_>>().join(" ");
            out.line(&format!(
                "{a},{},{},{},{},{}",
                csv_real(ch.lambda),
                csv_real(ch.gamma),
                csv_real(ch.d),
                csv_real(ch.dim),
                csv_real(ch.transport)
            ))?;
        }
    }
    Ok(outcome)
}

fn cmd_asymptotics(c: &Common, no_sweep: bool, out: &mut Out) -> anyhow::Result<Outcome> {
    let mut k = asymptotic_constants(&c.a)?;
    if !no_sweep {
        k.rho_dim = Some(dimension_sweep(&c.a, &SWEEP_LAMBDAS, depth(c))?);
    }
    match c.format {
        Format::Json => out.json(with_precision(serde_json::to_value(&k)?))?,
        Format::Csv => {
            out.line("constant,exact,value")?;
            for (name, e) in [("rho_gamma", &k.rho_gamma), ("rho_d", &k.rho_d), ("rho_T", &k.rho_transport)] {
                out.line(&format!("{name},{},{}", e.exact, csv_real(e.value)))?;
            }
            if let Some(s) = &k.rho_dim {
                out.line(&format!("rho_D,,{}", csv_real(s.estimate)))?;
            }
        }
    }
    Ok(Outcome::Ok)
}

fn cmd_multifractal(c: &Common, steps: usize, out: &mut Out) -> anyhow::Result<Outcome> {
    if steps < 3 {
        return Err(Error::InvalidInput("need at least 3 beta steps".into()).into());
    }
    let (pot, outcome) = potential(c)?;
    let (lo, hi) = beta_interval(&pot)?;
    let betas: Vec<f64> = (1..=steps).map(|i| lo + (hi - lo) * i as f64 / (steps + 1) as f64).collect();
    let points = multifractal_with(&pot, &betas)?;
    match c.format {
        Format::Json => out.json(with_precision(json!({
            "a": c.a,
            "lambda": c.lambda,
            "beta_min": lo,
            "beta_max": hi,
            "points": points,
        })))?,
        Format::Csv => {
            out.line("beta,dim")?;
            for p in &points {
                out.line(&format!("{},{}", csv_real(p.beta), csv_real(p.dim)))?;
            }
        }
    }
    Ok(outcome)
}

fn cmd_verify(c: &Common, deep: bool, only: Vec<String>, out: &mut Out) -> anyhow::Result<Outcome> {
    let reports = run_suite(&SuiteConfig {
        a: c.a.clone(),
        lambda: c.lambda,
        deep,
        seed: c.seed,
        only,
    })?;
    match c.format {
        Format::Json => out.json(stringify(serde_json::to_value(&reports)?))?,
        Format::Csv => {
            out.line("name,passed,checked,elapsed_ms")?;
            for r in &reports {
                out.line(&format!("{},{},{},{}", r.name, r.passed, r.checked, r.elapsed_ms))?;
            }
        }
    }
    Ok(if reports.iter().all(|r| r.passed) {
        Outcome::Ok
    } else {
        Outcome::AuditFailed
    })
}

fn run(cli: Cli) -> anyhow::Result<Outcome> {
    let c = &cli.common;
    if let Some(n) = c.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .context("configuring the thread pool")?;
    }
    let sink: Box<dyn Write> = match &c.output {
        Some(p) => Box::new(std::fs::File::create(p).with_context(|| format!("creating {}", p.display()))?),
        None => Box::new(std::io::stdout().lock()),
    };
    let mut out = Out { sink };
    let outcome = match cli.command {
        Command::Bands => cmd_bands(c, &mut out),
        Command::Pressure { s_min, s_max, steps } => cmd_pressure(c, s_min, s_max, steps, &mut out),
        Command::Chars => cmd_chars(c, &mut out),
        Command::Asymptotics { no_sweep } => cmd_asymptotics(c, no_sweep, &mut out),
        Command::Multifractal { beta_steps } => cmd_multifractal(c, beta_steps, &mut out),
        Command::Verify { deep, only } => cmd_verify(c, deep, only, &mut out),
    }?;
    out.sink.flush()?;
    Ok(outcome)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 64 } else { 0 });
        }
    };
    match run(cli) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::AuditFailed) => ExitCode::from(1),
        Ok(Outcome::Budget) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            match e.downcast_ref::<Error>() {
                Some(Error::Budget { .. }) => ExitCode::from(2),
                Some(Error::Invariant(_)) => ExitCode::from(3),
                _ => ExitCode::from(64),
            }
        }
    }
}
