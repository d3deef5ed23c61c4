use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sixj_core::{Complex64, Error};

use crate::config::{OutputFormat, RunConfig};
use crate::query::Query;

/// A complex number as `{"re": .., "im": ..}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cplx {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for Cplx {
    fn from(z: Complex64) -> Self {
        Self { re: z.re, im: z.im }
    }
}

impl Cplx {
    pub fn bits(&self) -> (u64, u64) {
        (self.re.to_bits(), self.im.to_bits())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Inputs {
    #[serde(flatten)]
    pub query: Query,
    pub config: RunConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorInfo {
    pub kind: String,
    pub message: String,
}

impl From<&Error> for ErrorInfo {
    fn from(e: &Error) -> Self {
        Self { kind: e.kind().into(), message: e.to_string() }
    }
}

/// One computed quantity with its provenance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub value: Option<Cplx>,
    pub abs_err: Option<f64>,
    pub diagnostics: Value,
    pub inputs: Inputs,
    pub method: String,
    pub converged: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorInfo>,
    /// Per-method values when several methods ran.
    #[serde(flatten)]
    pub extra: BTreeMap<String, Value>,
}

impl Record {
    pub fn failed(inputs: Inputs, method: &str, e: &Error) -> Self {
        Self {
            value: None,
            abs_err: None,
            diagnostics: Value::Null,
            inputs,
            method: method.into(),
            converged: false,
            error: Some(e.into()),
            extra: BTreeMap::new(),
        }
    }
}

/// Pass/fail line of a verification suite.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropertyRecord {
    pub suite: String,
    pub property: String,
    pub passed: bool,
    pub worst_residual: f64,
    pub threshold: f64,
    pub samples: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorInfo>,
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// Writes records to stdout as JSON lines or CSV.
pub struct Emitter<W: Write> {
    format: OutputFormat,
    csv: Option<csv::Writer<W>>,
    json: Option<W>,
}

impl<W: Write> Emitter<W> {
    pub fn new(format: OutputFormat, out: W) -> Self {
        match format {
            OutputFormat::Json => Self { format, csv: None, json: Some(out) },
            OutputFormat::Csv => Self { format, csv: Some(csv::Writer::from_writer(out)), json: None },
        }
    }

    fn json_line<T: Serialize>(&mut self, v: &T) -> std::io::Result<()> {
        let out = self.json.as_mut().expect("json emitter");
        serde_json::to_writer(&mut *out, v)?;
        writeln!(out)
    }

    pub fn record(&mut self, r: &Record) -> std::io::Result<()> {
        if self.format == OutputFormat::Json {
            return self.json_line(r);
        }
        let w = self.csv.as_mut().expect("csv emitter");
        let extra = |k: &str| r.extra.get(k).and_then(|v| v.as_f64());
        let inputs = serde_json::to_string(&r.inputs)?;
        w.serialize(CsvRecord {
            quantity: r.inputs.query.name(),
            method: &r.method,
            value_re: fmt_opt(r.value.map(|v| v.re)),
            value_im: fmt_opt(r.value.map(|v| v.im)),
            abs_err: fmt_opt(r.abs_err),
            converged: r.converged,
            discrepancy: fmt_opt(extra("discrepancy")),
            error: r.error.as_ref().map(|e| e.kind.as_str()).unwrap_or(""),
            inputs: &inputs,
        })?;
        w.flush()
    }

    pub fn property(&mut self, p: &PropertyRecord) -> std::io::Result<()> {
        if self.format == OutputFormat::Json {
            return self.json_line(p);
        }
        let w = self.csv.as_mut().expect("csv emitter");
        w.serialize(CsvProperty {
            suite: &p.suite,
            property: &p.property,
            passed: p.passed,
            worst_residual: p.worst_residual,
            threshold: p.threshold,
            samples: p.samples,
            error: p.error.as_ref().map(|e| e.kind.as_str()).unwrap_or(""),
        })?;
        w.flush()
    }
}

#[derive(Serialize)]
struct CsvRecord<'a> {
    quantity: &'a str,
    method: &'a str,
    value_re: String,
    value_im: String,
    abs_err: String,
    converged: bool,
    discrepancy: String,
    error: &'a str,
    inputs: &'a str,
}

#[derive(Serialize)]
struct CsvProperty<'a> {
    suite: &'a str,
    property: &'a str,
    passed: bool,
    worst_residual: f64,
    threshold: f64,
    samples: usize,
    error: &'a str,
}
