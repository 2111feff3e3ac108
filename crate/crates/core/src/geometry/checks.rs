//! Numerical checks of duality, radii, block positivity and the
//! unital/trace-preserving asymmetry.

use serde::{Deserialize, Serialize};

use crate::cones::{
    block_positive_ray, cone_membership_herm, slice_membership_herm, BodySpec, ConeId, Slice,
    Status,
};
use crate::error::{Error, Result};
use crate::matcore::{
    map_to_choi, partial_transpose_herm, psd_interval, CMat, ChoiMat, HermMat, MatrixJson, SuperOp,
    C64,
};
use crate::randgen::{haar_unitary, random_channel_tp, random_state_hs, MatrixBody, RngStream};

use super::Estimate;

/// `⟨−(D_Φ − D_*), D_Ψ − D_*⟩` for two maps with `Tr D = N`.
pub fn duality_pair_value(phi: &ChoiMat, psi: &ChoiMat) -> Result<f64> {
    let n = phi.n();
    if psi.n() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: psi.n(),
        });
    }
    let nf = n as f64;
    let a = phi.to_herm()?;
    let b = psi.to_herm()?;
    for (name, m) in [("first", &a), ("second", &b)] {
        let tr = m.trace_re();
        if (tr - nf).abs() > 1e-9 * nf {
            return Err(Error::Normalization(format!(
                "{name} argument has trace {tr}, expected {n}"
            )));
        }
    }
    let c = HermMat::identity(n * n).scale(1.0 / nf);
    Ok(-a.sub(&c).hs_inner(&b.sub(&c)))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProbeFailure {
    pub kind: String,
    pub detail: String,
    pub point: MatrixJson,
}

/// Outcome of [`radii_verify`] against `r = (N²−1)^{−1/2}`, `R = (N²−1)^{1/2}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RadiiReport {
    pub body: String,
    pub inradius: f64,
    pub outradius: f64,
    pub probes: usize,
    pub inradius_ok: bool,
    /// Largest `‖D − D_*‖` over the probe points.
    pub max_probe_norm: f64,
    pub outradius_ok: bool,
    /// `‖D_w − D_*‖` of the outer witness and whether `D_w` is in the body.
    pub outer_witness_norm: f64,
    pub outer_witness_in_body: bool,
    pub outer_witness_ok: bool,
    /// Boundary defect of the reflected witness at distance `r`.
    pub inner_witness_defect: f64,
    pub inner_witness_ok: bool,
    pub failures: Vec<ProbeFailure>,
}

impl RadiiReport {
    pub fn pass(&self) -> bool {
        self.inradius_ok && self.outradius_ok && self.outer_witness_ok && self.inner_witness_ok
    }
}

const WITNESS_TOL: f64 = 1e-9;

fn failure(kind: &str, detail: String, m: &HermMat) -> ProbeFailure {
    ProbeFailure {
        kind: kind.to_string(),
        detail,
        point: MatrixJson::from(m.as_cmat()),
    }
}

/// Largest `t` with `c + t·v` satisfying the body's cone constraint.
fn boundary_ray(spec: &BodySpec, c: &HermMat, v: &HermMat, rng: &mut RngStream) -> Option<f64> {
    let n = spec.n;
    let psd = |a: &HermMat, b: &HermMat| psd_interval(a.as_cmat(), b.as_cmat()).map(|(_, hi)| hi);
    let ppt = || psd(&partial_transpose_herm(c, n), &partial_transpose_herm(v, n));
    let p = &spec.params;
    match (spec.cone, n) {
        (ConeId::CP, _) => psd(c, v),
        (ConeId::CcP, _) => ppt(),
        (ConeId::T, _) | (ConeId::SP, 2) => Some(psd(c, v)?.min(ppt()?)),
        (ConeId::P, _) | (ConeId::D, 2) => Some(block_positive_ray(
            c,
            v,
            n,
            p.seesaw_restarts,
            p.seesaw_iters,
            rng,
        )),
        _ => None,
    }
}

fn random_pure(d: usize, rng: &mut RngStream) -> HermMat {
    HermMat::projector(&rng.unit_complex(d))
}

/// A random point of `D^b` (N ≥ 3) or `SP^b` built from extreme points.
fn mixture_point(spec: &BodySpec, rng: &mut RngStream) -> HermMat {
    let n = spec.n;
    let nf = n as f64;
    let k = 1 + rng.index(3);
    let w: Vec<f64> = (0..k).map(|_| -rng.uniform().max(1e-300).ln()).collect();
    let total: f64 = w.iter().sum();
    let mut acc = HermMat::zeros(n * n);
    for wi in w {
        let term = match spec.cone {
            ConeId::SP => crate::randgen::random_product_state(n, rng),
            _ => {
                let p = random_pure(n * n, rng);
                if rng.uniform() < 0.5 {
                    p
                } else {
                    partial_transpose_herm(&p, n)
                }
            }
        };
        acc.axpy(nf * wi / total, &term);
    }
    acc
}

/// Probes the claimed in- and outradius of a base or trace-preserving section.
///
/// Outradius probes are boundary points along random directions where an
/// exact or see-saw ray is available, and mixtures of extreme points
/// otherwise.
pub fn radii_verify(spec: &BodySpec, n_probes: usize, seed: u64) -> Result<RadiiReport> {
    if !matches!(spec.slice, Slice::Base | Slice::TP) {
        return Err(Error::Unsupported(format!(
            "radii check for {}",
            spec.label()
        )));
    }
    let n = spec.n;
    let nf = n as f64;
    let k = (nf * nf - 1.0).sqrt();
    let (r, big_r) = (1.0 / k, k);
    let body = MatrixBody::new(spec.clone())?;
    let frame = body.frame();
    let c = spec.center();
    let mut rng = RngStream::new(seed, 0x4ad1);
    let mut failures = Vec::new();
    let eps = 1e-6;

    let mut inradius_ok = true;
    for _ in 0..n_probes {
        let v = frame.linear(&rng.unit_real(frame.dim()));
        let x = c.add(&v.scale(r * (1.0 - eps)));
        let verdict = slice_membership_herm(&x, spec)?;
        if verdict.status != Status::In {
            inradius_ok = false;
            if failures.len() < 5 {
                failures.push(failure("inradius", format!("{:?}", verdict.status), &x));
            }
        }
    }

    let mut max_norm: f64 = 0.0;
    for _ in 0..n_probes {
        let v = frame.linear(&rng.unit_real(frame.dim()));
        let x = match boundary_ray(spec, &c, &v, &mut rng) {
            Some(t) if t.is_finite() => c.add(&v.scale(t)),
            Some(_) => {
                failures.push(failure("outradius", "unbounded ray".into(), &v));
                max_norm = f64::INFINITY;
                continue;
            }
            None => mixture_point(spec, &mut rng),
        };
        let norm = x.sub(&c).hs_norm();
        if norm > big_r + WITNESS_TOL && failures.len() < 10 {
            failures.push(failure("outradius", format!("‖D − D_*‖ = {norm}"), &x));
        }
        max_norm = max_norm.max(norm);
    }
    let outradius_ok = max_norm <= big_r + WITNESS_TOL;

    // Outer witness: N·(product pure state) for bases, a unitary channel for TP.
    let (w, probe): (HermMat, Vec<C64>) = match spec.slice {
        Slice::Base => {
            let xi = rng.unit_complex(n);
            let eta = rng.unit_complex(n);
            let v = crate::randgen::kron_vec(&xi, &eta);
            (HermMat::projector(&v).scale(nf), v)
        }
        _ => {
            let u = haar_unitary(n, &mut rng);
            let d = map_to_choi(&SuperOp::unitary(&u));
            let h = d.to_herm()?;
            let v = h.eigh()?.top_vector();
            (h, v)
        }
    };
    let outer_norm = w.sub(&c).hs_norm();
    let outer_in = slice_membership_herm(&w, spec)?.status == Status::In;
    let outer_ok = outer_in && (outer_norm - big_r).abs() <= WITNESS_TOL;
    if !outer_ok {
        failures.push(failure(
            "outer_witness",
            format!("in body: {outer_in}, ‖D_w − D_*‖ = {outer_norm}"),
            &w,
        ));
    }
    // Its reflection through the center, at distance r, is a boundary point:
    // the witness vector is a null vector there.
    let dir = w.sub(&c).scale(1.0 / outer_norm);
    let inner = c.sub(&dir.scale(r));
    let defect = inner.expectation(&probe).re.abs();
    let inner_in = slice_membership_herm(&inner, spec)?.status == Status::In;
    let inner_ok = inner_in && defect <= WITNESS_TOL;
    if !inner_ok {
        failures.push(failure(
            "inner_witness",
            format!("in body: {inner_in}, boundary defect {defect:e}"),
            &inner,
        ));
    }

    Ok(RadiiReport {
        body: spec.label(),
        inradius: r,
        outradius: big_r,
        probes: n_probes,
        inradius_ok,
        max_probe_norm: max_norm,
        outradius_ok,
        outer_witness_norm: outer_norm,
        outer_witness_in_body: outer_in,
        outer_witness_ok: outer_ok,
        inner_witness_defect: defect,
        inner_witness_ok: inner_ok,
        failures,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceCheck {
    pub tr_sq: f64,
    pub sq_tr: f64,
    pub pass: bool,
}

/// `Tr M² ≤ (Tr M)²` for a block-positive `M`.
pub fn block_positive_trace_check(m: &HermMat, tol: f64) -> TraceCheck {
    let tr = m.trace_re();
    let tr_sq = m.hs_norm().powi(2);
    TraceCheck {
        tr_sq,
        sq_tr: tr * tr,
        pass: tr_sq <= tr * tr + tol,
    }
}

/// A random block-positive matrix accepted by the see-saw oracle: a uniform
/// point on a chord from `I/N` to the boundary of the positive base.
pub fn random_block_positive(n: usize, rng: &mut RngStream) -> Result<HermMat> {
    let spec = BodySpec::new(ConeId::P, n, Slice::Base)?;
    let frame = MatrixBody::new(spec.clone())?.frame().clone();
    let c = spec.center();
    loop {
        let v = frame.linear(&rng.unit_real(frame.dim()));
        let p = &spec.params;
        let t = block_positive_ray(&c, &v, n, p.seesaw_restarts, p.seesaw_iters, rng);
        if !t.is_finite() {
            continue;
        }
        let x = c.add(&v.scale(t * rng.uniform().sqrt()));
        if cone_membership_herm(&x, n, ConeId::P, p)?.status == Status::In {
            return Ok(x);
        }
    }
}

/// A random point of the base `C^b` (trace `N`), not uniform.
///
/// CP/CcP: Hilbert-Schmidt states and their partial transposes. T: a state
/// mixed with `I/N` until PPT. D: a mixture of a state and a partially
/// transposed state. SP: a mixture of up to four product states. P: see
/// [`random_block_positive`].
pub fn random_base_point(cone: ConeId, n: usize, rng: &mut RngStream) -> Result<HermMat> {
    let nf = n as f64;
    let state = |rng: &mut RngStream| random_state_hs(n * n, rng).scale(nf);
    Ok(match cone {
        ConeId::CP => state(rng),
        ConeId::CcP => partial_transpose_herm(&state(rng), n),
        ConeId::T => {
            let x = state(rng);
            let lam = crate::matcore::eigh(&partial_transpose_herm(&x, n))?.min();
            if lam >= 0.0 {
                x
            } else {
                let s = -lam / (1.0 / nf - lam);
                x.scale(1.0 - s)
                    .add(&HermMat::identity(n * n).scale(s / nf))
            }
        }
        ConeId::D => {
            let w = rng.uniform();
            let b = partial_transpose_herm(&state(rng), n);
            state(rng).scale(w).add(&b.scale(1.0 - w))
        }
        ConeId::SP => mixture_point(&BodySpec::new(ConeId::SP, n, Slice::Base)?, rng),
        ConeId::P => random_block_positive(n, rng)?,
    })
}

/// Product of two volume-radius estimates with propagated error.
pub fn santalo_product(k: &Estimate, polar: &Estimate) -> Estimate {
    let value = k.value * polar.value;
    let stderr = ((k.stderr * polar.value).powi(2) + (polar.stderr * k.value).powi(2)).sqrt();
    Estimate {
        value,
        stderr,
        n_samples: k.n_samples + polar.n_samples,
        seed: k.seed,
        wall_time: k.wall_time + polar.wall_time,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoDualityReport {
    pub n: usize,
    /// `⟨u, x⟩` for the base point `x = N·E₁₁⊗E₁₁`.
    pub numerator: f64,
    /// `1 − 1/N`, the maximum of `⟨u, y⟩` over channels.
    pub analytic_denominator: f64,
    /// Largest `⟨u, y⟩` over the sampled channels.
    pub sampled_max: f64,
    pub ratio: f64,
    pub x_in_cp_base: bool,
    pub probes: usize,
}

/// Ratio of the maxima of the functional `u` (first diagonal block
/// `E₁₁ − I/N`, zero elsewhere) over the CP base and over channels.
pub fn no_duality_discrepancy(n: usize, n_probes: usize, seed: u64) -> Result<NoDualityReport> {
    if n < 2 {
        return Err(Error::InvalidParams(format!(
            "N must be at least 2, got {n}"
        )));
    }
    let nf = n as f64;
    let d = n * n;
    let mut u = CMat::zeros(d);
    for j in 0..n {
        u[(j, j)] = C64::new(if j == 0 { 1.0 } else { 0.0 } - 1.0 / nf, 0.0);
    }
    let u = HermMat::new(u)?;
    let x = HermMat::from_real_diag(
        &(0..d)
            .map(|i| if i == 0 { nf } else { 0.0 })
            .collect::<Vec<_>>(),
    );
    let base = BodySpec::new(ConeId::CP, n, Slice::Base)?;
    let x_in = slice_membership_herm(&x, &base)?.is_in();
    let numerator = u.hs_inner(&x);
    let mut rng = RngStream::new(seed, 0xd0d);
    let mut sampled_max = f64::NEG_INFINITY;
    for _ in 0..n_probes {
        let y = random_channel_tp(n, &mut rng)?.to_herm()?;
        sampled_max = sampled_max.max(u.hs_inner(&y));
    }
    let analytic_denominator = 1.0 - 1.0 / nf;
    Ok(NoDualityReport {
        n,
        numerator,
        analytic_denominator,
        sampled_max,
        ratio: numerator / analytic_denominator,
        x_in_cp_base: x_in,
        probes: n_probes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag_choi(n: usize, diag: &[f64]) -> ChoiMat {
        ChoiMat::new(n, CMat::from_real_diag(diag)).unwrap()
    }

    #[test]
    fn random_base_points_are_members() {
        let params = crate::cones::OracleParams::default();
        let mut rng = RngStream::new(3, 0);
        for cone in [ConeId::CP, ConeId::CcP, ConeId::T, ConeId::D, ConeId::SP] {
            for n in [2, 3] {
                for _ in 0..5 {
                    let x = random_base_point(cone, n, &mut rng).unwrap();
                    assert!((x.trace_re() - n as f64).abs() < 1e-9);
                    let v = cone_membership_herm(&x, n, cone, &params).unwrap();
                    if cone == ConeId::SP && n > 2 {
                        // low-rank separable points; the N≥3 search may stop short
                        assert_ne!(v.status, Status::Out, "{cone} N={n}");
                    } else {
                        assert_eq!(v.status, Status::In, "{cone} N={n}");
                    }
                }
            }
        }
    }

    #[test]
    fn pair_values() {
        let e11 = diag_choi(2, &[2.0, 0.0, 0.0, 0.0]);
        let e22 = diag_choi(2, &[0.0, 2.0, 0.0, 0.0]);
        assert!((duality_pair_value(&e11, &e22).unwrap() - 1.0).abs() < 1e-12);
        assert!((duality_pair_value(&e11, &e11).unwrap() + 3.0).abs() < 1e-12);
        let star = ChoiMat::depolarizing(2);
        assert!(duality_pair_value(&star, &star).unwrap().abs() < 1e-15);
        let bad = diag_choi(2, &[1.0, 0.0, 0.0, 0.0]);
        assert!(matches!(
            duality_pair_value(&bad, &e11),
            Err(Error::Normalization(_))
        ));
    }

    #[test]
    fn cp_base_radii_at_n2() {
        let spec = BodySpec::new(ConeId::CP, 2, Slice::Base).unwrap();
        let rep = radii_verify(&spec, 100, 1).unwrap();
        assert!(rep.pass(), "{rep:?}");
        assert!((rep.outradius - 3f64.sqrt()).abs() < 1e-15);
        assert!((rep.inradius - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        // D = 2E₁₁ is at distance √3 from I/2.
        let w = HermMat::from_real_diag(&[2.0, 0.0, 0.0, 0.0]);
        assert!((w.sub(&spec.center()).hs_norm() - 3f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn cp_channel_radii_at_n2() {
        let spec = BodySpec::new(ConeId::CP, 2, Slice::TP).unwrap();
        let rep = radii_verify(&spec, 100, 2).unwrap();
        assert!(rep.pass(), "{rep:?}");
    }

    #[test]
    fn ppt_channels_do_not_reach_the_claimed_outradius() {
        let spec = BodySpec::new(ConeId::T, 2, Slice::TP).unwrap();
        let rep = radii_verify(&spec, 100, 3).unwrap();
        assert!(
            rep.inradius_ok && rep.outradius_ok && rep.inner_witness_ok,
            "{rep:?}"
        );
        assert!(!rep.outer_witness_in_body);
        assert!(rep.max_probe_norm <= 1.0 + 1e-9, "{}", rep.max_probe_norm);
    }

    #[test]
    fn trace_inequality() {
        let swap = ChoiMat::swap(2).to_herm().unwrap();
        let t = block_positive_trace_check(&swap, 1e-12);
        assert!(t.pass && (t.tr_sq - 4.0).abs() < 1e-12 && (t.sq_tr - 4.0).abs() < 1e-12);
        let mut rng = RngStream::new(4, 0);
        for _ in 0..20 {
            let m = random_block_positive(2, &mut rng).unwrap();
            assert!(block_positive_trace_check(&m, 1e-9).pass);
        }
    }

    #[test]
    fn santalo_of_exact_values() {
        let a = Estimate::exact(0.5);
        let p = santalo_product(&a, &Estimate::exact(2.0));
        assert_eq!((p.value, p.stderr), (1.0, 0.0));
    }

    #[test]
    fn no_duality_ratio() {
        for n in 2..=4 {
            let rep = no_duality_discrepancy(n, 200, 5).unwrap();
            assert!(rep.x_in_cp_base);
            assert!((rep.numerator - (n as f64 - 1.0)).abs() < 1e-12);
            assert!((rep.ratio - n as f64).abs() < 1e-12);
            assert!(rep.sampled_max <= rep.analytic_denominator + 1e-9);
        }
    }
}
