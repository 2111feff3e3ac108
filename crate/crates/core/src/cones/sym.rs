//! Symmetrized bodies `conv(−C^b ∪ C^b)`, taken about the zero matrix.
//!
//! `y` belongs iff `y = P − Q` with `P, Q ∈ C` and `Tr P + Tr Q ≤ N`.
//! For `CP` the minimal `Tr P + Tr Q` is `‖y‖₁`; for `CcP` it is `‖y^Γ‖₁`;
//! for `D` it is `min_X ‖X‖₁ + ‖(y − X)^Γ‖₁`.

use crate::error::{Error, Result};
use crate::matcore::{eigh, partial_transpose_herm, HermMat, MatrixJson};

use super::{Certificate, ConeId, OracleParams, Verdict};

/// Bracket on `min_X ‖X‖₁ + ‖(y − X)^Γ‖₁`.
#[derive(Clone, Debug)]
pub struct SymDecision {
    /// Cost of the best primal split found (upper bound).
    pub primal: f64,
    pub x: HermMat,
    /// `⟨y, Z⟩` for the best feasible dual `Z` found (lower bound).
    pub dual: f64,
    pub z: HermMat,
}

fn sign_part(h: &HermMat) -> Result<HermMat> {
    h.map_spectrum(|x| {
        if x > 0.0 {
            1.0
        } else if x < 0.0 {
            -1.0
        } else {
            0.0
        }
    })
}

fn shrink(h: &HermMat, tau: f64) -> Result<HermMat> {
    h.map_spectrum(|x| x.signum() * (x.abs() - tau).max(0.0))
}

/// ADMM on `min ‖X‖₁ + ‖V^Γ‖₁` subject to `X + V = y`.
///
/// Every iterate gives a primal value; the scaled multiplier, rescaled into
/// `{‖Z‖_∞ ≤ 1, ‖Z^Γ‖_∞ ≤ 1}`, gives a dual value.
pub fn sym_trace_norm_d(y: &HermMat, n: usize, iters: usize) -> Result<SymDecision> {
    let d = y.dim();
    let cost = |x: &HermMat| -> Result<f64> {
        Ok(x.trace_norm()? + partial_transpose_herm(&y.sub(x), n).trace_norm()?)
    };
    let scale = y.hs_norm().max(1e-300);
    let rho = (d as f64).sqrt() / scale;
    let c_y = cost(y)?;
    let zero = HermMat::zeros(d);
    let c_0 = cost(&zero)?;
    let (mut best, mut best_x) = if c_y <= c_0 {
        (c_y, y.clone())
    } else {
        (c_0, zero.clone())
    };
    let mut best_dual = 0.0f64;
    let mut best_z = zero.clone();
    let mut v = zero.clone();
    let mut u = zero;
    for k in 0..iters.max(1) {
        let x = shrink(&y.sub(&v).sub(&u), 1.0 / rho)?;
        let w = partial_transpose_herm(&y.sub(&x).sub(&u), n);
        v = partial_transpose_herm(&shrink(&w, 1.0 / rho)?, n);
        u = u.add(&x).add(&v).sub(y);
        let c = cost(&x)?;
        if c < best {
            best = c;
            best_x = x;
        }
        if k % 5 == 4 || k + 1 == iters {
            let z = u.scale(-rho);
            let s = z.op_norm()?.max(partial_transpose_herm(&z, n).op_norm()?);
            if s > 0.0 {
                let zf = z.scale(1.0 / s.max(1.0));
                let val = y.hs_inner(&zf);
                if val > best_dual {
                    best_dual = val;
                    best_z = zf;
                }
            }
            if best - best_dual <= 1e-9 * best.max(1.0) {
                break;
            }
        }
    }
    Ok(SymDecision {
        primal: best,
        x: best_x,
        dual: best_dual,
        z: best_z,
    })
}

/// Membership of `y` in `conv(−C^b ∪ C^b)`.
pub(crate) fn sym_membership(
    y: &HermMat,
    n: usize,
    cone: ConeId,
    params: &OracleParams,
) -> Result<Verdict> {
    let nf = n as f64;
    let tol = params.psd_slack(y) * nf;
    let norm_verdict = |m: &HermMat| -> Result<Verdict> {
        let tn = m.trace_norm()?;
        if tn <= nf + tol {
            Ok(Verdict::inside(nf - tn, None))
        } else {
            Ok(Verdict::outside(
                nf - tn,
                Certificate::SymDual {
                    z: MatrixJson::from(sign_part(m)?.as_cmat()),
                    value: tn,
                },
            ))
        }
    };
    match cone {
        ConeId::CP => norm_verdict(y),
        ConeId::CcP => {
            let mut v = norm_verdict(&partial_transpose_herm(y, n))?;
            if let Some(Certificate::SymDual { z, value }) = v.certificate.take() {
                // Z^Γ is the dual certificate for y itself.
                let zm = HermMat::new(crate::matcore::CMat::try_from(z)?)?;
                v.certificate = Some(Certificate::SymDual {
                    z: MatrixJson::from(partial_transpose_herm(&zm, n).as_cmat()),
                    value,
                });
            }
            Ok(v)
        }
        ConeId::D => {
            let a = norm_verdict(y)?;
            if a.is_in() {
                return Ok(a);
            }
            let b = sym_membership(y, n, ConeId::CcP, params)?;
            if b.is_in() {
                return Ok(b);
            }
            let dec = sym_trace_norm_d(y, n, 400)?;
            if dec.primal <= nf + tol {
                Ok(Verdict::inside(
                    nf - dec.primal,
                    Some(Certificate::SymPrimal {
                        x: MatrixJson::from(dec.x.as_cmat()),
                        value: dec.primal,
                    }),
                ))
            } else if dec.dual > nf + tol {
                Ok(Verdict::outside(
                    nf - dec.dual,
                    Certificate::SymDual {
                        z: MatrixJson::from(dec.z.as_cmat()),
                        value: dec.dual,
                    },
                ))
            } else {
                Ok(Verdict::unknown(nf - dec.primal, None))
            }
        }
        ConeId::T => {
            for c in [ConeId::CP, ConeId::CcP] {
                let v = sym_membership(y, n, c, params)?;
                if v.is_out() {
                    return Ok(v);
                }
            }
            sym_ppt_feasibility(y, n, params)
        }
        ConeId::P | ConeId::SP => Err(Error::Unsupported(format!(
            "symmetrized {cone} body has no membership oracle"
        ))),
    }
}

/// Dykstra over `P ⪰ 0, P^Γ ⪰ 0, P − y ⪰ 0, (P − y)^Γ ⪰ 0, 2 Tr P ≤ N + Tr y`.
fn sym_ppt_feasibility(y: &HermMat, n: usize, params: &OracleParams) -> Result<Verdict> {
    let d = y.dim();
    let nf = n as f64;
    let cap = nf + y.trace_re();
    let tol = params.psd_slack(y);
    let violation = |p: &HermMat| -> Result<f64> {
        let q = p.sub(y);
        let worst = [
            -eigh(p)?.min(),
            -eigh(&partial_transpose_herm(p, n))?.min(),
            -eigh(&q)?.min(),
            -eigh(&partial_transpose_herm(&q, n))?.min(),
            (2.0 * p.trace_re() - cap) / (2.0 * d as f64),
        ];
        Ok(worst.into_iter().fold(f64::NEG_INFINITY, f64::max))
    };
    let project = |k: usize, z: &HermMat| -> Result<HermMat> {
        Ok(match k {
            0 => z.psd_part()?,
            1 => partial_transpose_herm(&partial_transpose_herm(z, n).psd_part()?, n),
            2 => z.sub(y).psd_part()?.add(y),
            3 => {
                partial_transpose_herm(&partial_transpose_herm(&z.sub(y), n).psd_part()?, n).add(y)
            }
            _ => {
                let excess = 2.0 * z.trace_re() - cap;
                if excess <= 0.0 {
                    z.clone()
                } else {
                    let mut m = z.clone().into_cmat();
                    m.add_identity(-excess / (2.0 * d as f64));
                    HermMat::symmetrize(&m)
                }
            }
        })
    };
    let mut p = y.psd_part()?;
    let mut corr: Vec<HermMat> = (0..5).map(|_| HermMat::zeros(d)).collect();
    let mut worst = violation(&p)?;
    for it in 0..2000 {
        if worst <= tol {
            return Ok(Verdict::inside(-worst, None).heuristic());
        }
        for (k, c) in corr.iter_mut().enumerate() {
            let z = p.add(c);
            let proj = project(k, &z)?;
            *c = z.sub(&proj);
            p = proj;
        }
        if it % 10 == 9 {
            worst = violation(&p)?;
        }
    }
    Ok(Verdict::unknown(-worst, None))
}
