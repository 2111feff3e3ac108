//! Volume-radius tables for the five nested cones, assembled from cached
//! `volume`, `width` and `radii` runs.

use qmap_cones::cones::{ConeId, Slice};
use qmap_cones::geometry::{vrad_cp_base, BoundCheck};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::commands::{
    base_vrad_bounds, base_width_bound, cp_tp_section_bounds, run_cached, Context, Report,
    RunError, RunResult, K_SIGMA,
};
use crate::config::{Command, ExperimentConfig, Suite};

pub const TABLE_HEADER: [&str; 12] = [
    "set",
    "lower",
    "estimate",
    "stderr",
    "upper",
    "source",
    "width",
    "width_stderr",
    "width_upper",
    "radii_pass",
    "pass",
    "status",
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub set: String,
    pub lower: Option<f64>,
    pub estimate: Option<f64>,
    pub stderr: Option<f64>,
    pub upper: Option<f64>,
    pub source: String,
    pub width: Option<f64>,
    pub width_stderr: Option<f64>,
    pub width_upper: Option<f64>,
    pub radii_pass: Option<bool>,
    /// `None` while any input is pending.
    pub pass: Option<bool>,
    /// Runs that have not been made yet, as `command:body`.
    pub pending: Vec<String>,
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or(String::new(), |x| format!("{x:.10e}"))
}

/// RFC-4180 table, one row per set. An empty slice gives the header only.
pub fn emit_tables(rows: &[TableRow]) -> RunResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| RunError::Io(std::io::Error::other(e));
    w.write_record(TABLE_HEADER).map_err(csv_err)?;
    for r in rows {
        let flag = |b: Option<bool>| b.map_or(String::new(), |b| b.to_string());
        w.write_record([
            r.set.clone(),
            fmt_opt(r.lower),
            fmt_opt(r.estimate),
            fmt_opt(r.stderr),
            fmt_opt(r.upper),
            r.source.clone(),
            fmt_opt(r.width),
            fmt_opt(r.width_stderr),
            fmt_opt(r.width_upper),
            flag(r.radii_pass),
            flag(r.pass),
            if r.pending.is_empty() {
                "complete".into()
            } else {
                format!("pending: {}", r.pending.join(" "))
            },
        ])
        .map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| RunError::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("CSV is UTF-8"))
}

pub fn csv_from_report(report: &Report) -> RunResult<String> {
    let rows: Vec<TableRow> = serde_json::from_value(report.result["rows"].clone())
        .map_err(|e| RunError::Core(e.into()))?;
    emit_tables(&rows)
}

/// The report of `cfg` if cached, or freshly run when `run_missing` is set.
fn fetch(cfg: &ExperimentConfig, run_missing: bool, ctx: &Context) -> RunResult<Option<Report>> {
    let cached = ctx.cache.as_ref().and_then(|c| c.get(cfg));
    if let Some(hit) = cached {
        return Ok(Some(
            serde_json::from_str(&hit.report).map_err(|e| RunError::Core(e.into()))?,
        ));
    }
    if !run_missing || cfg.validate().is_err() {
        return Ok(None);
    }
    Ok(Some(run_cached(cfg, ctx)?.parsed()?))
}

fn estimate_at(v: &Value, path: &[&str]) -> Option<(f64, f64)> {
    let mut cur = v;
    for p in path {
        cur = cur.get(p)?;
    }
    Some((cur.get("value")?.as_f64()?, cur.get("stderr")?.as_f64()?))
}

pub fn tables(cfg: &ExperimentConfig, ctx: &Context) -> RunResult<Report> {
    let n = cfg.n;
    let slice = match cfg.suite {
        Suite::Bases => Slice::Base,
        Suite::Tp => Slice::TP,
    };
    let mut rows = Vec::new();
    let mut bounds = Vec::new();
    for cone in ConeId::CHAIN {
        let set = format!("{cone}_{n}^{slice}");
        let mut pending = Vec::new();
        let (lower, upper, source) = match slice {
            Slice::Base => {
                let (lo, hi, src) = base_vrad_bounds(cone, n).expect("chain cones have bounds");
                (Some(lo), Some(hi), src.to_string())
            }
            _ if cone == ConeId::CP => {
                let (lo, hi, _, _) = cp_tp_section_bounds(n)?;
                (Some(lo), Some(hi), "section".to_string())
            }
            _ => (None, None, String::new()),
        };

        let vrad = if slice == Slice::Base && cone == ConeId::CP {
            Some((vrad_cp_base(n)?, 0.0))
        } else {
            let sub = cfg.derived(Command::Volume, cone, slice);
            ctx.heartbeat(format_args!("tables: {set} vrad"));
            match fetch(&sub, cfg.run_missing, ctx)? {
                Some(r) => estimate_at(&r.result, &["estimate", "vrad"]),
                None => {
                    pending.push(format!("volume:{set}"));
                    None
                }
            }
        };

        let (width, width_upper) = if slice == Slice::Base {
            let sub = cfg.derived(Command::Width, cone, slice);
            let w = match fetch(&sub, cfg.run_missing, ctx)? {
                Some(r) => estimate_at(&r.result, &["width", "hi"]),
                None => {
                    pending.push(format!("width:{set}"));
                    None
                }
            };
            (w, base_width_bound(cone, n).map(|(b, _)| b))
        } else {
            (None, None)
        };

        let radii_pass = {
            let sub = cfg.derived(Command::Radii, cone, slice);
            match fetch(&sub, cfg.run_missing, ctx)? {
                Some(r) => Some(r.pass),
                None => {
                    pending.push(format!("radii:{set}"));
                    None
                }
            }
        };

        let mut row_pass = true;
        if let Some((v, se)) = vrad {
            let b = BoundCheck::new(&set, "vrad", v, se, lower, upper, source.clone(), K_SIGMA);
            row_pass &= b.pass;
            bounds.push(b);
        }
        if let (Some((w, se)), Some(ub)) = (width, width_upper) {
            let src = base_width_bound(cone, n).map_or("", |(_, s)| s);
            let b = BoundCheck::new(&set, "width", w, se, None, Some(ub), src, K_SIGMA);
            row_pass &= b.pass;
            bounds.push(b);
        }
        row_pass &= radii_pass.unwrap_or(true);
        rows.push(TableRow {
            set,
            lower,
            estimate: vrad.map(|v| v.0),
            stderr: vrad.map(|v| v.1),
            upper,
            source,
            width: width.map(|w| w.0),
            width_stderr: width.map(|w| w.1),
            width_upper,
            radii_pass,
            pass: pending.is_empty().then_some(row_pass),
            pending,
        });
    }
    // Radii results are not bound rows; fold them into the overall verdict.
    let radii_ok = rows.iter().all(|r| r.radii_pass != Some(false));
    let pending = rows.iter().filter(|r| !r.pending.is_empty()).count();
    let mut report = Report::new(cfg, json!({ "suite": cfg.suite, "rows": rows }), bounds);
    report.pass &= radii_ok;
    if pending > 0 {
        report.warnings.push(format!(
            "{pending} row(s) pending; run the listed commands first or pass --run-missing"
        ));
    }
    Ok(report)
}
