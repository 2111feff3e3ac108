//! Closed-form volumes, Monte Carlo estimators and the verification suite.
//!
//! Volumes are carried as natural logarithms throughout; `vrad` is
//! `exp((log vol − log vol B^m) / m)`.

mod checks;
mod report;
mod tni;
mod volume;
mod width;

pub use checks::{
    block_positive_trace_check, duality_pair_value, no_duality_discrepancy, radii_verify,
    random_base_point, random_block_positive, santalo_product, NoDualityReport, ProbeFailure,
    RadiiReport, TraceCheck,
};
pub use report::{write_bounds_csv, BoundCheck, GeometryReport, Quantity, CSV_HEADER};
pub use tni::{dual_map_choi, g_m, g_m_tp, tni_bracket, tni_experiment, TniReport};
pub use volume::{
    volume_mcmc, volume_mcmc_with_progress, PhaseStat, VolumeEstimate, VolumeSchedule,
};
pub use width::{mean_width_fn, mean_width_mc, urysohn_bracket, UrysohnBracket, WidthEstimate};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Monte Carlo estimate with a between-chain standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
    pub n_samples: u64,
    pub seed: u64,
    /// Seconds.
    pub wall_time: f64,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Self {
            value,
            stderr: 0.0,
            n_samples: 0,
            seed: 0,
            wall_time: 0.0,
        }
    }

    /// `value ≤ bound` up to `k` standard errors.
    pub fn below(&self, bound: f64, k: f64) -> bool {
        self.value - k * self.stderr <= bound
    }

    pub fn above(&self, bound: f64, k: f64) -> bool {
        self.value + k * self.stderr >= bound
    }
}

/// Mean and standard error of the mean.
pub(crate) fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, f64::INFINITY);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn lgamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// A positive number stored by its logarithm.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogVolume {
    pub log: f64,
}

impl LogVolume {
    /// Linear value, if it is a finite non-zero `f64`.
    pub fn value(&self) -> Option<f64> {
        let v = self.log.exp();
        (v.is_finite() && v > 0.0).then_some(v)
    }
}

/// Volume of the `d×d` density matrices in the HS metric
/// (real dimension `d² − 1`).
pub fn exact_vol_states(d: usize) -> Result<LogVolume> {
    if d < 2 {
        return Err(Error::InvalidParams(format!(
            "d must be at least 2, got {d}"
        )));
    }
    let df = d as f64;
    let mut log = 0.5 * df.ln() + 0.5 * df * (df - 1.0) * (2.0 * std::f64::consts::PI).ln();
    for j in 1..=d {
        log += lgamma(j as f64);
    }
    log -= lgamma(df * df);
    Ok(LogVolume { log })
}

/// `log vol(B₂^m) = (m/2) log π − log Γ(m/2 + 1)`.
pub fn log_ball_vol(m: usize) -> f64 {
    let mf = m as f64;
    0.5 * mf * std::f64::consts::PI.ln() - lgamma(0.5 * mf + 1.0)
}

pub fn ball_vol(m: usize) -> f64 {
    log_ball_vol(m).exp()
}

pub fn vrad_from_log_vol(log_vol: f64, m: usize) -> f64 {
    ((log_vol - log_ball_vol(m)) / m as f64).exp()
}

pub fn vrad_from_vol(vol: f64, m: usize) -> Result<f64> {
    if !(vol > 0.0) || m == 0 {
        return Err(Error::InvalidParams(format!(
            "need vol > 0 and m ≥ 1, got {vol}, {m}"
        )));
    }
    Ok(vrad_from_log_vol(vol.ln(), m))
}

/// Volume radius of the `d×d` density matrices.
pub fn vrad_states(d: usize) -> Result<f64> {
    Ok(vrad_from_log_vol(exact_vol_states(d)?.log, d * d - 1))
}

/// Volume radius of the base of the completely positive cone: `N·vrad(M_{N²})`.
pub fn vrad_cp_base(n: usize) -> Result<f64> {
    Ok(n as f64 * vrad_states(n * n)?)
}

/// `b(m,k) = (vol B^m / (vol B^k · vol B^{m−k}))^{1/m}`.
pub fn bmk(m: usize, k: usize) -> Result<f64> {
    if !(0 < k && k < m) {
        return Err(Error::InvalidParams(format!(
            "need 0 < k < m, got m={m}, k={k}"
        )));
    }
    let (mf, kf) = (m as f64, k as f64);
    let log = lgamma(0.5 * kf + 1.0) + lgamma(0.5 * (mf - kf) + 1.0) - lgamma(0.5 * mf + 1.0);
    Ok((log / mf).exp())
}

fn log_binomial(m: usize, k: usize) -> f64 {
    lgamma(m as f64 + 1.0) - lgamma(k as f64 + 1.0) - lgamma((m - k) as f64 + 1.0)
}

/// Bounds on the volume radius of a central `k`-dimensional section of an
/// `m`-dimensional body with volume radius `vrad_k` and radii `r ≤ R`.
pub fn section_bounds(vrad_k: f64, r: f64, big_r: f64, m: usize, k: usize) -> Result<(f64, f64)> {
    if !(0.0 < r && r <= big_r) || !(vrad_k > 0.0) {
        return Err(Error::InvalidParams(format!(
            "need 0 < r ≤ R and vrad > 0, got r={r}, R={big_r}, vrad={vrad_k}"
        )));
    }
    let b = bmk(m, k)?;
    let (mf, kf) = (m as f64, k as f64);
    let s = (mf - kf) / mf;
    let lo = (vrad_k * big_r.powf(-s) * b).powf(mf / kf);
    let hi = (vrad_k * r.powf(-s) * b * (log_binomial(m, k) / mf).exp()).powf(mf / kf);
    Ok((lo, hi))
}
