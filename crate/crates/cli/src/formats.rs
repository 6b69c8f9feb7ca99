//! CSV and JSON tables.
//!
//! CSV cells are fixed at six decimals; JSON keeps full `f64` precision.

use std::io::Write;

use faraday_ecp_core::analytics::{Figure4Row, Figure5Row};
use serde_json::{Map, Number, Value};

use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
}

/// One table cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(u64),
    Float(f64),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => fixed(*v),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(v) => Value::from(*v),
            Cell::Float(v) => Number::from_f64(*v).map(Value::Number).unwrap_or(Value::Null),
            Cell::Text(s) => Value::String(s.clone()),
        }
    }
}

/// A row type with a fixed column layout.
pub trait TableRow {
    const HEADER: &'static [&'static str];

    fn cells(&self) -> Vec<Cell>;
}

/// Six-decimal rendering that never prints `-0.000000`.
pub fn fixed(v: f64) -> String {
    let s = format!("{v:.6}");
    if s == "-0.000000" {
        "0.000000".to_string()
    } else {
        s
    }
}

/// `a+bi` with both parts at six decimals.
pub fn fixed_complex(re: f64, im: f64) -> String {
    let im = fixed(im);
    if im.starts_with('-') {
        format!("{}{}i", fixed(re), im)
    } else {
        format!("{}+{}i", fixed(re), im)
    }
}

pub fn write_csv<W: Write, T: TableRow>(out: W, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(T::HEADER)?;
    for row in rows {
        w.write_record(row.cells().iter().map(Cell::csv))?;
    }
    w.flush()?;
    Ok(())
}

/// Rows as JSON objects keyed by the header names.
pub fn json_records<T: TableRow>(rows: &[T]) -> Value {
    Value::Array(
        rows.iter()
            .map(|row| {
                let map: Map<String, Value> = T::HEADER
                    .iter()
                    .zip(row.cells())
                    .map(|(k, c)| (k.to_string(), c.json()))
                    .collect();
                Value::Object(map)
            })
            .collect(),
    )
}

pub fn write_json<W: Write>(mut out: W, value: &Value) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

pub fn write_table<W: Write, T: TableRow>(out: W, rows: &[T], format: OutputFormat) -> Result<()> {
    match format {
        OutputFormat::Csv => write_csv(out, rows),
        OutputFormat::Json => write_json(out, &json_records(rows)),
    }
}

impl TableRow for Figure4Row {
    const HEADER: &'static [&'static str] = &["alpha", "alpha2", "p_total_ours", "p_reference"];

    fn cells(&self) -> Vec<Cell> {
        [self.alpha, self.alpha2, self.p_total_ours, self.p_reference]
            .into_iter()
            .map(Cell::Float)
            .collect()
    }
}

impl TableRow for Figure5Row {
    const HEADER: &'static [&'static str] =
        &["alpha", "alpha2", "p_total_ours", "p_reference", "p_ref_n5", "p_ref_n10"];

    fn cells(&self) -> Vec<Cell> {
        [
            self.alpha,
            self.alpha2,
            self.p_total_ours,
            self.p_reference,
            self.p_ref_n5,
            self.p_ref_n10,
        ]
        .into_iter()
        .map(Cell::Float)
        .collect()
    }
}

/// One probe frequency of a cavity sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityRow {
    pub omega_p: f64,
    pub r_re: f64,
    pub r_im: f64,
    pub r0_re: f64,
    pub r0_im: f64,
    pub phi: f64,
    pub phi_0: f64,
    pub theta_minus: f64,
    pub theta_plus: f64,
    pub gate_phase_error: f64,
}

impl TableRow for CavityRow {
    const HEADER: &'static [&'static str] = &[
        "omega_p",
        "r_re",
        "r_im",
        "r0_re",
        "r0_im",
        "phi",
        "phi_0",
        "theta_minus",
        "theta_plus",
        "gate_phase_error",
    ];

    fn cells(&self) -> Vec<Cell> {
        [
            self.omega_p,
            self.r_re,
            self.r_im,
            self.r0_re,
            self.r0_im,
            self.phi,
            self.phi_0,
            self.theta_minus,
            self.theta_plus,
            self.gate_phase_error,
        ]
        .into_iter()
        .map(Cell::Float)
        .collect()
    }
}

/// Sampled vs closed-form success probability of one round, or of the
/// whole run when `round` is `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct LedgerRow {
    pub round: Option<usize>,
    pub successes: u64,
    pub trials: u64,
    pub empirical_p: f64,
    pub stderr: f64,
    pub analytic_p: f64,
    pub z: f64,
    pub verdict: String,
}

impl TableRow for LedgerRow {
    const HEADER: &'static [&'static str] = &[
        "round",
        "successes",
        "trials",
        "empirical_p",
        "stderr",
        "analytic_p",
        "z",
        "verdict",
    ];

    fn cells(&self) -> Vec<Cell> {
        vec![
            match self.round {
                Some(k) => Cell::Int(k as u64),
                None => Cell::Text("total".into()),
            },
            Cell::Int(self.successes),
            Cell::Int(self.trials),
            Cell::Float(self.empirical_p),
            Cell::Float(self.stderr),
            Cell::Float(self.analytic_p),
            Cell::Float(self.z),
            Cell::Text(self.verdict.clone()),
        ]
    }
}
