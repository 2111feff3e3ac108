//! Command implementations. Each produces a [`Report`] rendered as JSON and CSV.

use std::fmt;

use qmap_cones::cones::{
    cone_membership, slice_membership, BodySpec, ConeId, OracleParams, Slice, Status,
};
use qmap_cones::error::Error as CoreError;
use qmap_cones::geometry::{
    duality_pair_value, mean_width_mc, no_duality_discrepancy, radii_verify, random_base_point,
    section_bounds, tni_experiment, urysohn_bracket, volume_mcmc_with_progress, vrad_cp_base,
    write_bounds_csv, BoundCheck, VolumeSchedule,
};
use qmap_cones::matcore::{matrix_from_json, ChoiMat, HermMat};
use qmap_cones::randgen::{MatrixBody, RngStream};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::cache::ResultCache;
use crate::config::{Command, ConfigError, ExperimentConfig};
use crate::tables;

/// Standard errors allowed between an estimate and a bound.
pub const K_SIGMA: f64 = 3.0;

#[derive(Debug)]
pub enum RunError {
    Config(String),
    Core(CoreError),
    Io(std::io::Error),
}

impl RunError {
    pub fn exit_code(&self) -> u8 {
        match self {
            RunError::Config(_) => 3,
            RunError::Core(e) => match e {
                CoreError::InvalidParams(_)
                | CoreError::Unsupported(_)
                | CoreError::DimensionMismatch { .. }
                | CoreError::NotHermitian(_)
                | CoreError::Normalization(_)
                | CoreError::Json(_) => 3,
                _ => 1,
            },
            RunError::Io(_) => 1,
        }
    }
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Config(m) => write!(f, "configuration error: {m}"),
            RunError::Core(e) => write!(f, "{e}"),
            RunError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl From<CoreError> for RunError {
    fn from(e: CoreError) -> Self {
        RunError::Core(e)
    }
}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Config(e.0)
    }
}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        RunError::Io(e)
    }
}

pub type RunResult<T> = Result<T, RunError>;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Report {
    pub tool: String,
    pub version: String,
    pub command: Command,
    pub seed: u64,
    pub config: ExperimentConfig,
    pub result: Value,
    pub bounds: Vec<BoundCheck>,
    pub warnings: Vec<String>,
    pub pass: bool,
}

impl Report {
    pub fn new(cfg: &ExperimentConfig, result: Value, bounds: Vec<BoundCheck>) -> Self {
        let pass = bounds.iter().all(|b| b.pass);
        Self {
            tool: "qmap".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: cfg.command,
            seed: cfg.seed,
            config: cfg.clone(),
            result,
            bounds,
            warnings: Vec::new(),
            pass,
        }
    }
}

/// A report in its two file formats.
#[derive(Clone, Debug)]
pub struct Rendered {
    pub report: String,
    pub csv: String,
}

impl Rendered {
    pub fn parsed(&self) -> RunResult<Report> {
        serde_json::from_str(&self.report).map_err(|e| RunError::Core(e.into()))
    }
}

pub struct Context {
    pub cache: Option<ResultCache>,
    pub quiet: bool,
}

impl Context {
    pub fn heartbeat(&self, msg: impl fmt::Display) {
        if !self.quiet {
            eprintln!("qmap: {msg}");
        }
    }
}

fn render(report: &Report) -> RunResult<(String, String)> {
    let json = serde_json::to_string_pretty(report).map_err(CoreError::from)?;
    let csv = match report.command {
        Command::Tables => tables::csv_from_report(report)?,
        _ => {
            let mut buf = Vec::new();
            write_bounds_csv(&mut buf, &report.bounds)?;
            String::from_utf8(buf).expect("CSV is UTF-8")
        }
    };
    Ok((json, csv))
}

/// Runs `cfg`, answering from the cache when an entry exists.
pub fn run_cached(cfg: &ExperimentConfig, ctx: &Context) -> RunResult<Rendered> {
    if let Some(cache) = &ctx.cache {
        if let Some(hit) = cache.get(cfg) {
            ctx.heartbeat(format_args!("{} cache hit {}", cfg.command, &hit.key[..12]));
            return Ok(Rendered {
                report: hit.report,
                csv: hit.csv,
            });
        }
    }
    let report = run(cfg, ctx)?;
    let (json, csv) = render(&report)?;
    if let Some(cache) = &ctx.cache {
        if let Err(e) = cache.put(cfg, &json, &csv) {
            ctx.heartbeat(format_args!("cache write failed: {e}"));
        }
    }
    Ok(Rendered { report: json, csv })
}

pub fn run(cfg: &ExperimentConfig, ctx: &Context) -> RunResult<Report> {
    match cfg.command {
        Command::Membership => membership(cfg),
        Command::Volume => volume(cfg, ctx),
        Command::Width => width(cfg, ctx),
        Command::Duality => duality(cfg, ctx),
        Command::Radii => radii(cfg, ctx),
        Command::Tables => tables::tables(cfg, ctx),
        Command::Tni => tni(cfg, ctx),
        Command::NoDuality => no_duality(cfg, ctx),
        Command::SectionBounds => section(cfg),
    }
}

fn body_spec(cfg: &ExperimentConfig) -> RunResult<BodySpec> {
    let params = OracleParams {
        seed: cfg.seed,
        ..OracleParams::default()
    };
    Ok(cfg.body()?.with_params(params))
}

/// Volume-radius bracket for the base of `cone`, with its short name.
pub fn base_vrad_bounds(cone: ConeId, n: usize) -> Option<(f64, f64, &'static str)> {
    let rn = (n as f64).sqrt();
    let r_cp = vrad_cp_base(n).ok()?;
    match cone {
        ConeId::P => Some((rn / 4.0, 6.0 * rn, "p-base")),
        ConeId::D => Some((r_cp, 8.0 * r_cp, "d-over-cp")),
        ConeId::CP | ConeId::CcP => Some((0.5, 1.0, "cp-base")),
        ConeId::T => Some((r_cp / 4.0, r_cp, "t-over-cp")),
        ConeId::SP => Some((1.0 / (6.0 * rn), 4.0 / rn, "sp-base")),
    }
}

/// Upper bound on the mean width of the base of `cone`, with its short name.
pub fn base_width_bound(cone: ConeId, n: usize) -> Option<(f64, &'static str)> {
    match cone {
        ConeId::CP | ConeId::CcP | ConeId::T => Some((2.0, "cp-width")),
        ConeId::D => Some((4.0, "d-width")),
        ConeId::SP => Some((4.0 / (n as f64).sqrt(), "sp-width")),
        ConeId::P => None,
    }
}

/// Section bounds for the CP trace-preserving section from the exact base value.
pub fn cp_tp_section_bounds(n: usize) -> RunResult<(f64, f64, usize, usize)> {
    let base = BodySpec::new(ConeId::CP, n, Slice::Base)?;
    let tp = BodySpec::new(ConeId::CP, n, Slice::TP)?;
    let (r, big_r) = base.radii().expect("bases have radii");
    let (m, k) = (base.dimension(), tp.dimension());
    let (lo, hi) = section_bounds(vrad_cp_base(n)?, r, big_r, m, k)?;
    Ok((lo, hi, m, k))
}

fn membership(cfg: &ExperimentConfig) -> RunResult<Report> {
    let path = cfg.input.as_ref().expect("validated");
    let text = std::fs::read_to_string(path)?;
    let m = matrix_from_json(&text)?;
    let d = m.dim();
    let n = (d as f64).sqrt().round() as usize;
    if n * n != d {
        return Err(RunError::Config(format!("input is {d}×{d}, not N²×N²")));
    }
    if n != cfg.n {
        return Err(RunError::Config(format!(
            "input has N={n} but --n is {}",
            cfg.n
        )));
    }
    let choi = ChoiMat::new(n, m)?;
    let spec = body_spec(cfg)?;
    let verdict = match cfg.slice {
        Slice::Cone => cone_membership(&choi, cfg.cone, &spec.params)?,
        _ => slice_membership(&choi, &spec)?,
    };
    let body = match cfg.slice {
        Slice::Cone => format!("{}_{}", cfg.cone, n),
        _ => spec.label(),
    };
    let mut report = Report::new(
        cfg,
        json!({ "body": body, "verdict": serde_json::to_value(&verdict).map_err(CoreError::from)? }),
        Vec::new(),
    );
    if verdict.status == Status::Unknown {
        report.warnings.push("oracle returned Unknown".into());
    }
    if verdict.heuristic {
        report
            .warnings
            .push("verdict rests on a heuristic search".into());
    }
    Ok(report)
}

fn volume(cfg: &ExperimentConfig, ctx: &Context) -> RunResult<Report> {
    let spec = body_spec(cfg)?;
    let body = MatrixBody::new(spec.clone())?;
    let schedule = VolumeSchedule {
        chains: cfg.chains,
        samples_per_phase: cfg.steps,
        ..VolumeSchedule::default()
    };
    ctx.heartbeat(format_args!(
        "volume {} dim {} chains {} samples/phase {}",
        spec.label(),
        spec.dimension(),
        cfg.chains,
        cfg.steps
    ));
    let est = volume_mcmc_with_progress(&body, &schedule, cfg.seed, |i, total, stat| {
        ctx.heartbeat(format_args!(
            "volume phase {}/{} radius {:.4} ratio {:.4} ± {:.4}",
            i, total, stat.radius, stat.ratio, stat.stderr
        ));
    })?;
    let v = est.vrad;
    let label = spec.label();
    let mut bounds = Vec::new();
    match spec.slice {
        Slice::Base => {
            if let Some((lo, hi, src)) = base_vrad_bounds(spec.cone, spec.n) {
                bounds.push(BoundCheck::new(
                    &label,
                    "vrad",
                    v.value,
                    v.stderr,
                    Some(lo),
                    Some(hi),
                    src,
                    K_SIGMA,
                ));
            }
            if matches!(spec.cone, ConeId::CP | ConeId::CcP) {
                let exact = vrad_cp_base(spec.n)?;
                let tol = 0.1 * exact;
                bounds.push(BoundCheck::new(
                    &label,
                    "vrad",
                    v.value,
                    v.stderr,
                    Some(exact - tol),
                    Some(exact + tol),
                    "exact-formula",
                    K_SIGMA,
                ));
            }
        }
        Slice::TP if spec.cone == ConeId::CP => {
            let (lo, hi, _, _) = cp_tp_section_bounds(spec.n)?;
            bounds.push(BoundCheck::new(
                &label,
                "vrad",
                v.value,
                v.stderr,
                Some(lo),
                Some(hi),
                "section",
                K_SIGMA,
            ));
        }
        _ => {}
    }
    let result = json!({ "body": label, "estimate": est });
    Ok(Report::new(cfg, result, bounds))
}

fn width(cfg: &ExperimentConfig, ctx: &Context) -> RunResult<Report> {
    let spec = body_spec(cfg)?;
    let label = spec.label();
    ctx.heartbeat(format_args!("width {label} with {} directions", cfg.dirs));
    let mut bounds = Vec::new();
    let result = match spec.slice {
        Slice::Base => {
            let b = urysohn_bracket(&spec, cfg.dirs, cfg.seed)?;
            if let Some((ub, src)) = base_width_bound(spec.cone, spec.n) {
                let w = b.width.hi;
                bounds.push(BoundCheck::new(
                    &label,
                    "width",
                    w.value,
                    w.stderr,
                    None,
                    Some(ub),
                    src,
                    K_SIGMA,
                ));
            }
            if matches!(spec.cone, ConeId::CP | ConeId::CcP) {
                let exact = vrad_cp_base(spec.n)?;
                bounds.push(BoundCheck::new(
                    &label,
                    "vrad",
                    exact,
                    0.0,
                    Some(b.lower.value - K_SIGMA * b.lower.stderr),
                    Some(b.upper.value + K_SIGMA * b.upper.stderr),
                    "urysohn",
                    0.0,
                ));
            }
            json!({ "body": label, "width": b.width, "polar_width": b.polar_width,
                    "urysohn": { "lower": b.lower, "upper": b.upper } })
        }
        _ => {
            let w = mean_width_mc(&spec, cfg.dirs, cfg.seed)?;
            json!({ "body": label, "width": w })
        }
    };
    Ok(Report::new(cfg, result, bounds))
}

fn duality(cfg: &ExperimentConfig, ctx: &Context) -> RunResult<Report> {
    let n = cfg.n;
    let (a_cone, b_cone) = (cfg.cone, cfg.cone.dual());
    let mut rng = RngStream::new(cfg.seed, 0xd0a1);
    let mut max: f64 = f64::NEG_INFINITY;
    let mut sum = 0.0;
    let beat = (cfg.pairs / 10).max(1);
    for i in 0..cfg.pairs {
        let a = ChoiMat::from_herm(n, random_base_point(a_cone, n, &mut rng)?)?;
        let b = ChoiMat::from_herm(n, random_base_point(b_cone, n, &mut rng)?)?;
        let v = duality_pair_value(&a, &b)?;
        max = max.max(v);
        sum += v;
        if (i + 1) % beat == 0 {
            ctx.heartbeat(format_args!(
                "duality {}/{} pairs, max {max:.6}",
                i + 1,
                cfg.pairs
            ));
        }
    }
    // Orthogonal pure states attain the bound for the CP base.
    let psi = rng.unit_complex(n * n);
    let mut phi = rng.unit_complex(n * n);
    let ov: qmap_cones::matcore::C64 = psi.iter().zip(&phi).map(|(a, b)| a.conj() * b).sum();
    phi.iter_mut().zip(&psi).for_each(|(p, s)| *p -= ov * s);
    let norm = phi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    phi.iter_mut().for_each(|z| *z /= norm);
    let nf = n as f64;
    let attained = duality_pair_value(
        &ChoiMat::from_herm(n, HermMat::projector(&psi).scale(nf))?,
        &ChoiMat::from_herm(n, HermMat::projector(&phi).scale(nf))?,
    )?;
    let label = format!("({a_cone}, {b_cone})_{n}^base");
    let bounds = vec![
        BoundCheck::new(
            &label,
            "max pair value",
            max,
            0.0,
            None,
            Some(1.0 + 1e-9),
            "base-duality",
            0.0,
        ),
        BoundCheck::new(
            format!("CP_{n}^base"),
            "orthogonal pure pair",
            attained,
            0.0,
            Some(1.0 - 1e-12),
            Some(1.0 + 1e-12),
            "base-duality",
            0.0,
        ),
    ];
    let result = json!({
        "pairs": cfg.pairs, "first": a_cone, "second": b_cone,
        "max": max, "mean": sum / cfg.pairs as f64, "orthogonal_pure": attained,
    });
    Ok(Report::new(cfg, result, bounds))
}

fn radii(cfg: &ExperimentConfig, ctx: &Context) -> RunResult<Report> {
    let spec = body_spec(cfg)?;
    let label = spec.label();
    ctx.heartbeat(format_args!("radii {label} with {} probes", cfg.probes));
    let r = radii_verify(&spec, cfg.probes, cfg.seed)?;
    let tol = 1e-9;
    let mut outer = BoundCheck::new(
        &label,
        "outer witness distance",
        r.outer_witness_norm,
        0.0,
        Some(r.outradius - tol),
        Some(r.outradius + tol),
        "outradius",
        0.0,
    );
    outer.pass &= r.outer_witness_in_body;
    let mut inner = BoundCheck::new(
        &label,
        "inner witness defect",
        r.inner_witness_defect,
        0.0,
        None,
        Some(tol),
        "inradius",
        0.0,
    );
    inner.pass &= r.inner_witness_ok;
    let mut inside = BoundCheck::new(
        &label,
        "inradius probes",
        r.inradius,
        0.0,
        None,
        None,
        "inradius",
        0.0,
    );
    inside.pass = r.inradius_ok;
    let bounds = vec![
        inside,
        BoundCheck::new(
            &label,
            "max probe distance",
            r.max_probe_norm,
            0.0,
            None,
            Some(r.outradius + tol),
            "outradius",
            0.0,
        ),
        outer,
        inner,
    ];
    let mut report = Report::new(
        cfg,
        serde_json::to_value(&r).map_err(CoreError::from)?,
        bounds,
    );
    if let Some((_, true_r)) = spec.radii() {
        if true_r < r.outradius - tol {
            report.warnings.push(format!(
                "{label} lies within distance {true_r:.6} of its center; the outradius {:.6} is not attained",
                r.outradius
            ));
        }
    }
    Ok(report)
}

fn tni(cfg: &ExperimentConfig, ctx: &Context) -> RunResult<Report> {
    let schedule = VolumeSchedule {
        chains: cfg.chains,
        samples_per_phase: cfg.steps,
        ..VolumeSchedule::default()
    };
    ctx.heartbeat(format_args!(
        "tni: three volume runs (dims 16, 12, 4) and {} fiber samples",
        cfg.probes
    ));
    let r = tni_experiment(cfg.n, &schedule, cfg.seed, cfg.probes)?;
    let label = format!("CP_{}^tni", cfg.n);
    let (lo, hi) = r.bracket;
    let mut bounds = vec![
        BoundCheck::new(
            &label,
            "fiber error",
            r.fiber_error,
            0.0,
            None,
            Some(1e-9),
            "fiber",
            0.0,
        ),
        BoundCheck::new(
            &label,
            "unital fiber error",
            r.unital_fiber_error,
            0.0,
            None,
            Some(1e-9),
            "fiber",
            0.0,
        ),
        BoundCheck::new(
            &label,
            "identity error",
            r.identity_error,
            0.0,
            None,
            Some(1e-9),
            "fiber",
            0.0,
        ),
    ];
    if let (Some(ratio), Some(lse)) = (r.ratio, r.log_ratio_stderr) {
        bounds.push(BoundCheck::new(
            &label,
            "volume ratio",
            ratio,
            ratio * lse,
            Some(lo),
            Some(hi),
            "tni-ratio",
            K_SIGMA,
        ));
    }
    let mut report = Report::new(
        cfg,
        serde_json::to_value(&r).map_err(CoreError::from)?,
        bounds,
    );
    if let Some(why) = &r.aborted {
        report
            .warnings
            .push(format!("volume run aborted: {why}; ratio not reported"));
    }
    Ok(report)
}

fn no_duality(cfg: &ExperimentConfig, ctx: &Context) -> RunResult<Report> {
    ctx.heartbeat(format_args!(
        "no-duality N={} with {} channels",
        cfg.n, cfg.probes
    ));
    let r = no_duality_discrepancy(cfg.n, cfg.probes, cfg.seed)?;
    let label = format!("CP_{}", cfg.n);
    let nf = cfg.n as f64;
    let mut ratio = BoundCheck::new(
        &label,
        "ratio",
        r.ratio,
        0.0,
        Some(nf - 1e-9),
        None,
        "no-duality",
        0.0,
    );
    ratio.pass &= r.x_in_cp_base;
    let bounds = vec![
        ratio,
        BoundCheck::new(
            &label,
            "sampled channel maximum",
            r.sampled_max,
            0.0,
            None,
            Some(r.analytic_denominator + 1e-9),
            "no-duality",
            0.0,
        ),
    ];
    Ok(Report::new(
        cfg,
        serde_json::to_value(r).map_err(CoreError::from)?,
        bounds,
    ))
}

fn section(cfg: &ExperimentConfig) -> RunResult<Report> {
    let s = &cfg.section;
    let (lo, hi, inputs) = match (s.vrad, s.r, s.big_r, s.m, s.k) {
        (Some(v), Some(r), Some(big_r), Some(m), Some(k)) => {
            let (lo, hi) = section_bounds(v, r, big_r, m, k)?;
            (
                lo,
                hi,
                json!({ "vrad": v, "r": r, "big_r": big_r, "m": m, "k": k }),
            )
        }
        _ => {
            let (lo, hi, m, k) = cp_tp_section_bounds(cfg.n)?;
            let base = BodySpec::new(ConeId::CP, cfg.n, Slice::Base)?;
            let (r, big_r) = base.radii().expect("bases have radii");
            (
                lo,
                hi,
                json!({ "vrad": vrad_cp_base(cfg.n)?, "r": r, "big_r": big_r, "m": m, "k": k }),
            )
        }
    };
    let mut bounds = Vec::new();
    if let Some(v) = s.check {
        bounds.push(BoundCheck::new(
            "section",
            "vrad",
            v,
            0.0,
            Some(lo),
            Some(hi),
            "section",
            0.0,
        ));
    }
    Ok(Report::new(
        cfg,
        json!({ "inputs": inputs, "lower": lo, "upper": hi }),
        bounds,
    ))
}
