mod config;
mod query;
mod record;
mod suites;

use std::io::{self, BufRead, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use sixj_core::mellin_barnes::RacahLabels;
use sixj_core::{BalancedExponent, Complex64, Error, SpinLabel};

use config::{init_workers, ConfigArgs, RunConfig};
use query::{evaluate, PhiMethod, Query, RacahMethod};
use record::{Emitter, Inputs, Record};
use suites::Suite;

const EXIT_FAILED: u8 = 1;
const EXIT_PRECONDITION: u8 = 2;
const EXIT_NOT_CONVERGED: u8 = 3;

/// Numerics for the SL(2,C) Clebsch-Gordan kernels and 6j symbols.
#[derive(Parser)]
#[command(name = "sixj", version)]
struct Cli {
    #[command(flatten)]
    config: ConfigArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute one quantity and emit a record.
    Compute {
        #[command(subcommand)]
        quantity: Quantity,
    },
    /// Run a property suite; exit 1 if any property fails.
    Verify {
        #[arg(value_enum)]
        suite: Suite,
        /// Multiplies the sample counts of randomized suites.
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
    },
    /// Tabulate the Racah coefficient (MB1) over a grid in one σ.
    Scan {
        #[arg(long, value_enum)]
        label: ScanLabel,
        #[arg(long, allow_hyphen_values = true)]
        from: f64,
        #[arg(long, allow_hyphen_values = true)]
        to: f64,
        #[arg(long)]
        step: f64,
        #[command(flatten)]
        labels: LabelArgs,
    },
    /// Recompute JSON records (file or stdin) and check values are bit-identical.
    Replay { file: Option<PathBuf> },
}

/// Spin labels, in the order a1 a2 a3 l c cprime where six are needed.
#[derive(Args, Clone)]
struct LabelArgs {
    #[arg(long, num_args = 1.., required = true, allow_negative_numbers = true)]
    m: Vec<i64>,
    #[arg(long, num_args = 1.., required = true, allow_negative_numbers = true)]
    sigma: Vec<f64>,
}

impl LabelArgs {
    fn take<const N: usize>(&self) -> Result<[SpinLabel; N], Error> {
        if self.m.len() != N || self.sigma.len() != N {
            return Err(Error::InvalidParameter(format!(
                "expected {N} labels, got {} m and {} sigma values",
                self.m.len(),
                self.sigma.len()
            )));
        }
        Ok(std::array::from_fn(|k| SpinLabel::new(self.m[k], self.sigma[k])))
    }

    fn racah(&self) -> Result<RacahLabels, Error> {
        let [a1, a2, a3, l, c, cp] = self.take::<6>()?;
        Ok(RacahLabels { a1, a2, a3, l, c, cp })
    }
}

#[derive(Subcommand)]
enum Quantity {
    AFunc {
        /// "hol_re,hol_im,anti_re,anti_im"
        #[arg(long, allow_hyphen_values = true)]
        alpha: String,
    },
    Bracket {
        /// "re,im"
        #[arg(long, allow_hyphen_values = true)]
        z: String,
        #[arg(long, allow_hyphen_values = true)]
        alpha: String,
    },
    WKernel {
        #[command(flatten)]
        labels: LabelArgs,
        /// Three points, each "re,im".
        #[arg(long, num_args = 3, required = true, allow_hyphen_values = true)]
        points: Vec<String>,
    },
    CoeffA {
        #[command(flatten)]
        labels: LabelArgs,
    },
    CoeffB {
        #[command(flatten)]
        labels: LabelArgs,
    },
    Rho {
        #[command(flatten)]
        labels: LabelArgs,
    },
    Racah {
        #[command(flatten)]
        labels: LabelArgs,
        #[arg(long, value_enum, default_value_t = RacahMethod::Both)]
        method: RacahMethod,
    },
    Phi1 {
        #[command(flatten)]
        labels: LabelArgs,
        #[arg(long, allow_hyphen_values = true)]
        z: String,
        #[arg(long, value_enum, default_value_t = PhiMethod::Mb)]
        method: PhiMethod,
    },
    Phi2 {
        #[command(flatten)]
        labels: LabelArgs,
        #[arg(long, allow_hyphen_values = true)]
        z: String,
        #[arg(long, value_enum, default_value_t = PhiMethod::Mb)]
        method: PhiMethod,
    },
    MbPropagator {
        #[arg(long, allow_hyphen_values = true)]
        z: String,
        #[arg(long, allow_hyphen_values = true)]
        y: String,
        #[arg(long, allow_hyphen_values = true)]
        alpha: String,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ScanLabel {
    A1,
    A2,
    A3,
    L,
    C,
    Cprime,
}

fn numbers(s: &str, want: usize, what: &str) -> Result<Vec<f64>, Error> {
    let parts: Result<Vec<f64>, _> = s.split(',').map(|t| t.trim().parse::<f64>()).collect();
    match parts {
        Ok(v) if v.len() == want => Ok(v),
        _ => Err(Error::InvalidParameter(format!("{what} = {s:?}: expected {want} comma-separated numbers"))),
    }
}

fn complex(s: &str) -> Result<Complex64, Error> {
    let v = numbers(s, 2, "point")?;
    Ok(Complex64::new(v[0], v[1]))
}

fn exponent(s: &str) -> Result<BalancedExponent, Error> {
    let v = numbers(s, 4, "exponent")?;
    BalancedExponent::new(Complex64::new(v[0], v[1]), Complex64::new(v[2], v[3]))
}

fn build_query(q: &Quantity) -> Result<Query, Error> {
    Ok(match q {
        Quantity::AFunc { alpha } => Query::AFunc { alpha: exponent(alpha)? },
        Quantity::Bracket { z, alpha } => Query::Bracket { z: complex(z)?, alpha: exponent(alpha)? },
        Quantity::WKernel { labels, points } => {
            let p: Vec<Complex64> = points.iter().map(|s| complex(s)).collect::<Result<_, _>>()?;
            Query::WKernel { labels: labels.take::<3>()?, points: [p[0], p[1], p[2]] }
        }
        Quantity::CoeffA { labels } => Query::CoeffA { labels: labels.take::<3>()? },
        Quantity::CoeffB { labels } => Query::CoeffB { labels: labels.take::<3>()? },
        Quantity::Rho { labels } => Query::Rho { label: labels.take::<1>()?[0] },
        Quantity::Racah { labels, method } => Query::Racah { labels: labels.racah()?, method: *method },
        Quantity::Phi1 { labels, z, method } => Query::Phi1 { labels: labels.racah()?, z: complex(z)?, method: *method },
        Quantity::Phi2 { labels, z, method } => Query::Phi2 { labels: labels.racah()?, z: complex(z)?, method: *method },
        Quantity::MbPropagator { z, y, alpha } => {
            Query::MbPropagator { z: complex(z)?, y: complex(y)?, alpha: exponent(alpha)? }
        }
    })
}

/// Grid `from, from + step, ...` up to `to`; empty when `from > to`.
fn grid(from: f64, to: f64, step: f64) -> Result<Vec<f64>, Error> {
    if !(from.is_finite() && to.is_finite()) {
        return Err(Error::InvalidParameter("grid bounds must be finite".into()));
    }
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::InvalidParameter(format!("step = {step} must be positive")));
    }
    if from > to {
        return Ok(Vec::new());
    }
    let count = ((to - from) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|k| from + k as f64 * step).collect())
}

fn with_sigma(labels: &RacahLabels, which: ScanLabel, sigma: f64) -> RacahLabels {
    let mut l = *labels;
    let slot = match which {
        ScanLabel::A1 => &mut l.a1,
        ScanLabel::A2 => &mut l.a2,
        ScanLabel::A3 => &mut l.a3,
        ScanLabel::L => &mut l.l,
        ScanLabel::C => &mut l.c,
        ScanLabel::Cprime => &mut l.cp,
    };
    slot.sigma = sigma;
    l
}

/// Exit status of a command that ran to completion.
struct Status(u8);

fn compute(cfg: &RunConfig, q: &Quantity, out: &mut Emitter<impl Write>) -> Result<Status, Error> {
    let inputs = Inputs { query: build_query(q)?, config: cfg.clone() };
    let rec = match evaluate(&inputs) {
        Ok(r) => r,
        Err(e) if e.is_numerical() => Record::failed(inputs.clone(), inputs.query.name(), &e),
        Err(e) => return Err(e),
    };
    out.record(&rec).map_err(io_error)?;
    Ok(Status(if rec.converged { 0 } else { EXIT_NOT_CONVERGED }))
}

fn verify(cfg: &RunConfig, suite: Suite, scale: f64, out: &mut Emitter<impl Write>) -> Result<Status, Error> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::InvalidParameter(format!("scale = {scale} must be positive")));
    }
    let mut failed = 0;
    for p in suites::run(suite, cfg, scale) {
        if !p.passed {
            failed += 1;
            eprintln!("FAIL {} / {}: worst {:.3e} > {:.1e}", p.suite, p.property, p.worst_residual, p.threshold);
        }
        out.property(&p).map_err(io_error)?;
    }
    Ok(Status(if failed == 0 { 0 } else { EXIT_FAILED }))
}

fn scan(
    cfg: &RunConfig,
    label: ScanLabel,
    (from, to, step): (f64, f64, f64),
    labels: &LabelArgs,
    out: &mut Emitter<impl Write>,
) -> Result<Status, Error> {
    let base = labels.racah()?;
    base.check_parity()?;
    let queries: Vec<Inputs> = grid(from, to, step)?
        .into_iter()
        .map(|s| Inputs {
            query: Query::Racah { labels: with_sigma(&base, label, s), method: RacahMethod::Mb1 },
            config: cfg.clone(),
        })
        .collect();
    let records: Vec<Record> = queries
        .par_iter()
        .map(|inputs| evaluate(inputs).unwrap_or_else(|e| Record::failed(inputs.clone(), "mb1", &e)))
        .collect();
    let mut status = 0;
    for r in &records {
        if let Some(e) = &r.error {
            eprintln!("scan point failed: {}", e.message);
        } else if !r.converged {
            status = EXIT_NOT_CONVERGED;
        }
        out.record(r).map_err(io_error)?;
    }
    Ok(Status(status))
}

fn replay(file: Option<&PathBuf>, format: config::OutputFormat, out: &mut Emitter<impl Write>) -> Result<Status, Error> {
    let reader: Box<dyn BufRead> = match file {
        Some(p) => Box::new(io::BufReader::new(std::fs::File::open(p).map_err(io_error)?)),
        None => Box::new(io::stdin().lock()),
    };
    let mut mismatches = 0;
    for (k, line) in reader.lines().enumerate() {
        let line = line.map_err(io_error)?;
        if line.trim().is_empty() {
            continue;
        }
        let old: Record = serde_json::from_str(&line)
            .map_err(|e| Error::InvalidParameter(format!("line {}: not a record: {e}", k + 1)))?;
        let mut inputs = old.inputs.clone();
        inputs.config.output_format = Some(format);
        let new = match evaluate(&inputs) {
            Ok(r) => r,
            Err(e) => Record::failed(inputs.clone(), &old.method, &e),
        };
        let same = old.value.map(|v| v.bits()) == new.value.map(|v| v.bits())
            && old.error.as_ref().map(|e| &e.kind) == new.error.as_ref().map(|e| &e.kind);
        if !same {
            mismatches += 1;
            eprintln!("line {}: replay differs ({:?} vs {:?})", k + 1, old.value, new.value);
        }
        out.record(&new).map_err(io_error)?;
    }
    Ok(Status(if mismatches == 0 { 0 } else { EXIT_FAILED }))
}

fn io_error(e: impl std::fmt::Display) -> Error {
    Error::InvalidParameter(format!("i/o: {e}"))
}

fn run(cli: Cli) -> Result<Status, Error> {
    init_workers()?;
    let cfg = RunConfig::from_args(&cli.config)?;
    let stdout = io::stdout().lock();
    let mut out = Emitter::new(cfg.format(), stdout);
    match &cli.command {
        Command::Compute { quantity } => compute(&cfg, quantity, &mut out),
        Command::Verify { suite, scale } => verify(&cfg, *suite, *scale, &mut out),
        Command::Scan { label, from, to, step, labels } => scan(&cfg, *label, (*from, *to, *step), labels, &mut out),
        Command::Replay { file } => replay(file.as_ref(), cfg.format(), &mut out),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(Status(code)) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_PRECONDITION)
        }
    }
}
