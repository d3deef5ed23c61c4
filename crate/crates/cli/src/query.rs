use std::collections::BTreeMap;

use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sixj_core::kernels::{coefficient_a, coefficient_b, w_kernel, weight_rho};
use sixj_core::mellin_barnes::{
    mb_propagator_estimate, phi1_mb_estimate, phi2_mb_estimate, racah_estimate, MbResult, RacahForm, RacahLabels,
};
use sixj_core::quad2d::{phi1_direct, phi2_direct, QuadratureResult};
use sixj_core::{a_func, bracket_pow, BalancedExponent, Complex64, PointPair, Result, SpinLabel};

use crate::config::{Convention, RunConfig};
use crate::record::{Inputs, Record};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum RacahMethod {
    Both,
    Mb1,
    Mb2,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum PhiMethod {
    Mb,
    Direct,
    Both,
}

/// A quantity and its parameters, as echoed under `inputs`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "quantity", rename_all = "kebab-case")]
pub enum Query {
    AFunc { alpha: BalancedExponent },
    Bracket { z: Complex64, alpha: BalancedExponent },
    WKernel { labels: [SpinLabel; 3], points: [Complex64; 3] },
    CoeffA { labels: [SpinLabel; 3] },
    CoeffB { labels: [SpinLabel; 3] },
    Rho { label: SpinLabel },
    Racah { labels: RacahLabels, method: RacahMethod },
    Phi1 { labels: RacahLabels, z: Complex64, method: PhiMethod },
    Phi2 { labels: RacahLabels, z: Complex64, method: PhiMethod },
    MbPropagator { z: Complex64, y: Complex64, alpha: BalancedExponent },
}

impl Query {
    pub fn name(&self) -> &'static str {
        match self {
            Query::AFunc { .. } => "a-func",
            Query::Bracket { .. } => "bracket",
            Query::WKernel { .. } => "w-kernel",
            Query::CoeffA { .. } => "coeff-a",
            Query::CoeffB { .. } => "coeff-b",
            Query::Rho { .. } => "rho",
            Query::Racah { .. } => "racah",
            Query::Phi1 { .. } => "phi1",
            Query::Phi2 { .. } => "phi2",
            Query::MbPropagator { .. } => "mb-propagator",
        }
    }
}

fn convention(labels: &RacahLabels, c: Convention) -> RacahLabels {
    match c {
        Convention::Paper => *labels,
        Convention::Ismagilov => RacahLabels { cp: labels.cp.negate(), ..*labels },
    }
}

fn mb_parts(r: &MbResult, tol: f64) -> (Complex64, f64, Value, bool) {
    (r.value, r.abs_err, serde_json::to_value(&r.diagnostics).unwrap_or(Value::Null), r.converged(tol))
}

fn quad_parts(r: &QuadratureResult) -> (Complex64, f64, Value, bool) {
    let diag = json!({ "evaluations": r.evaluations, "abs_integral": r.abs_integral });
    (r.value, r.abs_err, diag, r.converged)
}

type Parts = (Complex64, f64, Value, bool);

impl Record {
    fn set(&mut self, method: &str, (value, abs_err, diagnostics, converged): Parts) {
        self.method = method.into();
        self.value = Some(value.into());
        self.abs_err = Some(abs_err);
        self.diagnostics = diagnostics;
        self.converged = converged;
    }

    fn set_closed(&mut self, value: Complex64) {
        self.method = "closed-form".into();
        self.value = Some(value.into());
        self.abs_err = None;
        self.converged = true;
    }

    /// Two methods for the same quantity: the first is the reported value.
    fn set_pair(&mut self, names: [&str; 2], a: Parts, b: Parts) {
        let discrepancy = (a.0 - b.0).norm() / a.0.norm();
        self.method = "both".into();
        self.value = Some(a.0.into());
        self.abs_err = Some(a.1.max(b.1));
        self.converged = a.3 && b.3;
        self.diagnostics = json!({ names[0]: a.2, names[1]: b.2 });
        self.extra.insert(names[0].into(), json!({ "re": a.0.re, "im": a.0.im }));
        self.extra.insert(names[1].into(), json!({ "re": b.0.re, "im": b.0.im }));
        self.extra.insert("discrepancy".into(), json!(discrepancy));
    }
}

/// Computes one record. Precondition violations are errors; numerical
/// non-convergence yields a record with `converged = false`.
pub fn evaluate(inputs: &Inputs) -> Result<Record> {
    let cfg: &RunConfig = &inputs.config;
    cfg.validate()?;
    let mut rec = Record {
        value: None,
        abs_err: None,
        diagnostics: json!({}),
        inputs: inputs.clone(),
        method: String::new(),
        converged: false,
        error: None,
        extra: BTreeMap::new(),
    };
    match &inputs.query {
        Query::AFunc { alpha } => rec.set_closed(a_func(alpha)?),
        Query::Bracket { z, alpha } => rec.set_closed(bracket_pow(&PointPair::new(*z), alpha)?),
        Query::WKernel { labels: [a1, a2, a3], points } => {
            let p = points.map(PointPair::new);
            rec.set_closed(w_kernel(a1, a2, a3, &p[0], &p[1], &p[2])?)
        }
        Query::CoeffA { labels: [a1, a2, a3] } => rec.set_closed(coefficient_a(a1, a2, a3)?),
        Query::CoeffB { labels: [a1, a2, a3] } => rec.set_closed(coefficient_b(a1, a2, a3)?),
        Query::Rho { label } => rec.set_closed(weight_rho(label).into()),
        Query::Racah { labels, method } => {
            let labels = convention(labels, cfg.convention);
            let spec = cfg.contour(false);
            let run = |form| racah_estimate(&labels, form, &spec).map(|r| mb_parts(&r, spec.tol));
            match method {
                RacahMethod::Mb1 => rec.set("mb1", run(RacahForm::Mb1)?),
                RacahMethod::Mb2 => rec.set("mb2", run(RacahForm::Mb2)?),
                RacahMethod::Both => rec.set_pair(["mb1", "mb2"], run(RacahForm::Mb1)?, run(RacahForm::Mb2)?),
            }
        }
        Query::Phi1 { labels, z, method } | Query::Phi2 { labels, z, method } => {
            let second = matches!(inputs.query, Query::Phi2 { .. });
            let l = convention(labels, cfg.convention);
            let z = PointPair::new(*z);
            let spec = cfg.contour(true);
            let opts = cfg.plane(cfg.quadrature_tol());
            let mb = || -> Result<Parts> {
                let r = if second {
                    phi2_mb_estimate(&l.a1, &l.a2, &l.a3, &l.l, &l.c, &z, &spec)?
                } else {
                    phi1_mb_estimate(&l.a1, &l.a2, &l.a3, &l.l, &l.cp, &z, &spec)?
                };
                Ok(mb_parts(&r, spec.tol))
            };
            let direct = || -> Result<Parts> {
                let r = if second {
                    phi2_direct(&l.a1, &l.a2, &l.a3, &l.l, &l.c, &z, &opts)?
                } else {
                    phi1_direct(&l.a1, &l.a2, &l.a3, &l.l, &l.cp, &z, &opts)?
                };
                Ok(quad_parts(&r))
            };
            match method {
                PhiMethod::Mb => rec.set("mb", mb()?),
                PhiMethod::Direct => rec.set("direct", direct()?),
                PhiMethod::Both => rec.set_pair(["mb", "direct"], mb()?, direct()?),
            }
        }
        Query::MbPropagator { z, y, alpha } => {
            let spec = cfg.contour(true);
            let r = mb_propagator_estimate(&PointPair::new(*z), &PointPair::new(*y), alpha, &spec)?;
            rec.set("mb", mb_parts(&r, spec.tol));
        }
    }
    Ok(rec)
}
