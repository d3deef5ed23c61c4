use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use sixj_core::mellin_barnes::ContourSpec;
use sixj_core::quad2d::{PlaneOptions, DEFAULT_BUDGET, MIN_BUDGET};
use sixj_core::{Error, Result};

/// Caps used by the windowed engines (propagator, Φ) when none are given;
/// they only bind for evaluation points close to the singular locus.
pub const WINDOWED_CAP: i64 = 500;
pub const MB_TOL: f64 = 1e-8;
pub const QUADRATURE_TOL: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Convention {
    Paper,
    /// Negates `c'` before dispatch.
    Ismagilov,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Csv,
}

/// Flags shared by every subcommand.
#[derive(Clone, Debug, Args)]
pub struct ConfigArgs {
    /// Relative tolerance [default: 1e-8 for MB engines, 1e-3 for quadrature suites]
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Evaluation budget of the plane integrator.
    #[arg(long, global = true, default_value_t = DEFAULT_BUDGET)]
    pub budget: usize,
    #[arg(long, global = true, allow_hyphen_values = true, default_value_t = ContourSpec::default().eta)]
    pub eta: f64,
    /// [default: 60, or 500 for the propagator and Φ]
    #[arg(long, global = true)]
    pub nu_max: Option<f64>,
    /// [default: 40, or 500 for the propagator and Φ]
    #[arg(long, global = true)]
    pub n_max: Option<i64>,
    #[arg(long, global = true, default_value_t = ContourSpec::default().nodes_per_unit)]
    pub nodes_per_unit: usize,
    #[arg(long, global = true, default_value_t = ContourSpec::default().pole_clearance)]
    pub pole_clearance: f64,
    /// Seed for the random samples drawn by `verify`.
    #[arg(long, global = true, default_value_t = 2024)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Convention::Paper)]
    pub convention: Convention,
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Json)]
    pub output: OutputFormat,
}

/// Everything that influences a computed value; echoed in every record.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub tolerance: Option<f64>,
    pub budget: usize,
    pub eta: f64,
    pub nu_max: Option<f64>,
    pub n_max: Option<i64>,
    pub nodes_per_unit: usize,
    pub pole_clearance: f64,
    pub seed: u64,
    pub convention: Convention,
    #[serde(skip)]
    pub output_format: Option<OutputFormat>,
}

impl RunConfig {
    pub fn from_args(a: &ConfigArgs) -> Result<Self> {
        let cfg = Self {
            tolerance: a.tol,
            budget: a.budget,
            eta: a.eta,
            nu_max: a.nu_max,
            n_max: a.n_max,
            nodes_per_unit: a.nodes_per_unit,
            pole_clearance: a.pole_clearance,
            seed: a.seed,
            convention: a.convention,
            output_format: Some(a.output),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(t) = self.tolerance {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::InvalidParameter(format!("tol = {t} must be positive")));
            }
        }
        if self.budget < MIN_BUDGET {
            return Err(Error::InvalidParameter(format!("budget = {} must be at least {MIN_BUDGET}", self.budget)));
        }
        self.contour(false).validate()
    }

    pub fn format(&self) -> OutputFormat {
        self.output_format.unwrap_or(OutputFormat::Json)
    }

    pub fn mb_tol(&self) -> f64 {
        self.tolerance.unwrap_or(MB_TOL)
    }

    pub fn quadrature_tol(&self) -> f64 {
        self.tolerance.unwrap_or(QUADRATURE_TOL)
    }

    /// Contour for the Racah sums (`windowed = false`) or the windowed
    /// engines, which need much larger truncations.
    pub fn contour(&self, windowed: bool) -> ContourSpec {
        let d = ContourSpec::default();
        let (nu, n) = if windowed { (WINDOWED_CAP as f64, WINDOWED_CAP) } else { (d.nu_max, d.n_max) };
        ContourSpec {
            eta: self.eta,
            nu_max: self.nu_max.unwrap_or(nu),
            n_max: self.n_max.unwrap_or(n),
            nodes_per_unit: self.nodes_per_unit,
            pole_clearance: self.pole_clearance,
            tol: self.mb_tol(),
        }
    }

    /// Integrator options for a quantity computed by plane quadrature.
    pub fn plane(&self, tol: f64) -> PlaneOptions {
        PlaneOptions { tol, budget: self.budget }
    }
}

/// Sizes the global worker pool from `SIXJ_WORKERS` when set.
pub fn init_workers() -> Result<()> {
    if let Ok(v) = std::env::var("SIXJ_WORKERS") {
        let n: usize = v
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| Error::InvalidParameter(format!("SIXJ_WORKERS = {v:?} must be a positive integer")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    }
    Ok(())
}
