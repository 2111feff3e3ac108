//! Serializable summaries of geometric runs.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::cones::BodySpec;
use crate::error::{Error, Result};

use super::checks::RadiiReport;
use super::Estimate;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Quantity {
    Exact { value: f64 },
    Estimate { estimate: Estimate },
    Interval { lo: f64, hi: f64 },
}

impl Quantity {
    pub fn point(&self) -> f64 {
        match *self {
            Quantity::Exact { value } => value,
            Quantity::Estimate { estimate } => estimate.value,
            Quantity::Interval { lo, hi } => 0.5 * (lo + hi),
        }
    }

    pub fn stderr(&self) -> f64 {
        match *self {
            Quantity::Estimate { estimate } => estimate.stderr,
            _ => 0.0,
        }
    }
}

/// A value compared against a known bracket.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub body: String,
    pub quantity: String,
    pub value: f64,
    pub stderr: f64,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    /// Short name of the inequality being checked.
    pub source: String,
    pub pass: bool,
}

impl BoundCheck {
    /// Passes when `value` is within `k` standard errors of `[lower, upper]`.
    pub fn new(
        body: impl Into<String>,
        quantity: impl Into<String>,
        value: f64,
        stderr: f64,
        lower: Option<f64>,
        upper: Option<f64>,
        source: impl Into<String>,
        k: f64,
    ) -> Self {
        let ok_lo = lower.is_none_or(|l| value + k * stderr >= l);
        let ok_hi = upper.is_none_or(|u| value - k * stderr <= u);
        Self {
            body: body.into(),
            quantity: quantity.into(),
            value,
            stderr,
            lower,
            upper,
            source: source.into(),
            pass: ok_lo && ok_hi,
        }
    }

    fn bound_text(&self) -> String {
        let f = |b: Option<f64>| b.map_or("-".to_string(), |v| format!("{v:.6e}"));
        format!("[{}, {}]", f(self.lower), f(self.upper))
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GeometryReport {
    pub body: BodySpec,
    pub seed: u64,
    pub version: String,
    pub vrad: Option<Quantity>,
    pub width: Option<Quantity>,
    pub radii: Option<RadiiReport>,
    pub bounds: Vec<BoundCheck>,
}

impl GeometryReport {
    pub fn new(body: BodySpec, seed: u64) -> Self {
        Self {
            body,
            seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            vrad: None,
            width: None,
            radii: None,
            bounds: Vec::new(),
        }
    }

    pub fn all_pass(&self) -> bool {
        self.bounds.iter().all(|b| b.pass) && self.radii.as_ref().is_none_or(|r| r.pass())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// One CSV row per bound check.
    pub fn write_csv(&self, out: impl Write) -> Result<()> {
        write_bounds_csv(out, &self.bounds)
    }
}

pub const CSV_HEADER: [&str; 7] = [
    "body", "quantity", "value", "stderr", "bound", "source", "pass",
];

pub fn write_bounds_csv<'a>(
    out: impl Write,
    rows: impl IntoIterator<Item = &'a BoundCheck>,
) -> Result<()> {
    let err = |e: csv::Error| Error::Io(std::io::Error::other(e));
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER).map_err(err)?;
    for b in rows {
        w.write_record([
            b.body.clone(),
            b.quantity.clone(),
            format!("{:.10e}", b.value),
            format!("{:.3e}", b.stderr),
            b.bound_text(),
            b.source.clone(),
            b.pass.to_string(),
        ])
        .map_err(err)?;
    }
    w.flush()?;
    Ok(())
}
