//! Trace-non-increasing channels against channels times the operator interval.

use serde::{Deserialize, Serialize};

use crate::cones::{BodySpec, ConeId, Slice};
use crate::error::{Error, Result};
use crate::matcore::{
    choi_to_map, map_to_choi, partial_trace, CMat, ChoiMat, HermMat, Subsystem, SuperOp,
};
use crate::randgen::{haar_unitary, random_channel_tp, MatrixBody, OperatorInterval, RngStream};

use super::volume::{volume_mcmc, VolumeSchedule};
use super::Estimate;

/// Choi matrix of the adjoint map `Φ*` (`Tr X†Φ(Y) = Tr Φ*(X)†Y`).
pub fn dual_map_choi(d: &ChoiMat) -> ChoiMat {
    let s = choi_to_map(d);
    map_to_choi(&SuperOp::new(s.n(), s.mat().adjoint()).expect("same size"))
}

fn sqrt_psd(m: &HermMat) -> Result<CMat> {
    Ok(m.map_spectrum(|x| x.max(0.0).sqrt())?.into_cmat())
}

fn sandwich(d: &ChoiMat, a: &CMat) -> Result<ChoiMat> {
    ChoiMat::new(d.n(), a.matmul(d.mat()).matmul(a))
}

/// `Φ ↦ M^{1/2} Φ(·) M^{1/2}`: every block `D_jk` becomes `M^{1/2} D_jk M^{1/2}`.
///
/// Sends unital maps (`Tr_A D = I`) to the fiber `Tr_A D = M`.
pub fn g_m(d: &ChoiMat, m: &HermMat) -> Result<ChoiMat> {
    let n = d.n();
    if m.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: m.dim(),
        });
    }
    sandwich(d, &CMat::identity(n).kron(&sqrt_psd(m)?))
}

/// `D ↦ (M^{1/2} ⊗ I) D (M^{1/2} ⊗ I)`: sends channels (`Tr_B D = I`) to
/// the fiber `Tr_B D = M` of the trace-non-increasing maps.
pub fn g_m_tp(d: &ChoiMat, m: &HermMat) -> Result<ChoiMat> {
    let n = d.n();
    if m.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: m.dim(),
        });
    }
    sandwich(d, &sqrt_psd(m)?.kron(&CMat::identity(n)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TniReport {
    pub n: usize,
    pub log_vol_tni: Option<f64>,
    pub log_vol_tp: Option<f64>,
    pub log_vol_interval: Option<f64>,
    pub vrad_tni: Option<Estimate>,
    pub vrad_tp: Option<Estimate>,
    pub vrad_interval: Option<Estimate>,
    /// `vol(TNI) / (vol(TP) · vol(interval))` with a log-space stderr.
    pub ratio: Option<f64>,
    pub log_ratio_stderr: Option<f64>,
    pub bracket: (f64, f64),
    pub in_bracket: Option<bool>,
    pub aborted: Option<String>,
    pub fiber_samples: usize,
    /// Largest `‖Tr_B g(D) − M‖` over channels `D` and random `M`.
    pub fiber_error: f64,
    /// Same for the block form on the adjoint (unital) maps, with `Tr_A`.
    pub unital_fiber_error: f64,
    /// Largest `‖g_I(D) − D‖`.
    pub identity_error: f64,
}

/// `(e N^{5/2})^{−N²}` and `N^{−N²/2}`.
pub fn tni_bracket(n: usize) -> (f64, f64) {
    let nf = n as f64;
    let n2 = nf * nf;
    (
        (-(n2) * (1.0 + 2.5 * nf.ln())).exp(),
        (-(n2 / 2.0) * nf.ln()).exp(),
    )
}

fn random_interval_point(n: usize, rng: &mut RngStream) -> HermMat {
    let u = haar_unitary(n, rng);
    let diag: Vec<f64> = (0..n).map(|_| rng.uniform()).collect();
    let d = CMat::from_real_diag(&diag);
    HermMat::symmetrize(&u.matmul(&d).matmul(&u.adjoint()))
}

fn fiber_checks(n: usize, samples: usize, seed: u64) -> Result<(f64, f64, f64)> {
    let mut rng = RngStream::new(seed, 0xf1b);
    let (mut fiber, mut unital, mut ident) = (0.0f64, 0.0f64, 0.0f64);
    let id = HermMat::identity(n);
    for _ in 0..samples {
        let d = random_channel_tp(n, &mut rng)?;
        let m = random_interval_point(n, &mut rng);
        let img = g_m_tp(&d, &m)?;
        let tb = partial_trace(&img, Subsystem::B);
        fiber = fiber.max((&tb - m.as_cmat()).hs_norm());
        let du = dual_map_choi(&d);
        let img = g_m(&du, &m)?;
        let ta = partial_trace(&img, Subsystem::A);
        unital = unital.max((&ta - m.as_cmat()).hs_norm());
        ident = ident.max((g_m_tp(&d, &id)?.mat() - d.mat()).hs_norm());
        ident = ident.max((g_m(&du, &id)?.mat() - du.mat()).hs_norm());
    }
    Ok((fiber, unital, ident))
}

/// Volume ratio of the trace-non-increasing CP maps over the product of the
/// channel volume and the operator-interval volume, plus the fiber checks.
pub fn tni_experiment(
    n: usize,
    schedule: &VolumeSchedule,
    seed: u64,
    fiber_samples: usize,
) -> Result<TniReport> {
    if n != 2 {
        return Err(Error::InvalidParams(format!(
            "the volume ratio is estimated at N = 2 only (dimension {} is out of reach)",
            n.pow(4)
        )));
    }
    let (fiber_error, unital_fiber_error, identity_error) = fiber_checks(n, fiber_samples, seed)?;
    let mut report = TniReport {
        n,
        log_vol_tni: None,
        log_vol_tp: None,
        log_vol_interval: None,
        vrad_tni: None,
        vrad_tp: None,
        vrad_interval: None,
        ratio: None,
        log_ratio_stderr: None,
        bracket: tni_bracket(n),
        in_bracket: None,
        aborted: None,
        fiber_samples,
        fiber_error,
        unital_fiber_error,
        identity_error,
    };
    let tni = MatrixBody::new(BodySpec::new(ConeId::CP, n, Slice::TNI)?)?;
    let tp = MatrixBody::new(BodySpec::new(ConeId::CP, n, Slice::TP)?)?;
    let interval = OperatorInterval::new(n);
    let runs = [
        volume_mcmc(&tni, schedule, seed),
        volume_mcmc(&tp, schedule, seed.wrapping_add(1)),
        volume_mcmc(&interval, schedule, seed.wrapping_add(2)),
    ];
    let mut logs = Vec::new();
    for (k, r) in runs.into_iter().enumerate() {
        match r {
            Ok(est) => {
                match k {
                    0 => {
                        report.log_vol_tni = Some(est.log_volume);
                        report.vrad_tni = Some(est.vrad);
                    }
                    1 => {
                        report.log_vol_tp = Some(est.log_volume);
                        report.vrad_tp = Some(est.vrad);
                    }
                    _ => {
                        report.log_vol_interval = Some(est.log_volume);
                        report.vrad_interval = Some(est.vrad);
                    }
                }
                logs.push((est.log_volume, est.log_volume_stderr));
            }
            Err(Error::NotMixing(msg)) => {
                report.aborted = Some(msg);
                return Ok(report);
            }
            Err(e) => return Err(e),
        }
    }
    let log_ratio = logs[0].0 - logs[1].0 - logs[2].0;
    let se = logs.iter().map(|(_, s)| s * s).sum::<f64>().sqrt();
    let ratio = log_ratio.exp();
    report.ratio = Some(ratio);
    report.log_ratio_stderr = Some(se);
    report.in_bracket = Some(report.bracket.0 <= ratio && ratio <= report.bracket.1);
    Ok(report)
}
