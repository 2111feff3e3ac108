//! Support functions `h_K(u) = max_{x∈K} ⟨u, x − c⟩` of the bases and
//! symmetrized bodies.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::{eigh, partial_transpose_herm, psd_interval, HermMat};
use crate::randgen::RngStream;

use super::oracle::cone_membership_herm;
use super::seesaw::product_extremum;
use super::{BodySpec, ConeId, Slice, Status};

/// Value of a support function, with its reliability.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Support {
    Exact(f64),
    /// Lower bound from a local search that is usually attained.
    Heuristic(f64),
    Interval {
        lo: f64,
        hi: f64,
    },
}

impl Support {
    pub fn lo(&self) -> f64 {
        match *self {
            Support::Exact(v) | Support::Heuristic(v) => v,
            Support::Interval { lo, .. } => lo,
        }
    }

    pub fn hi(&self) -> f64 {
        match *self {
            Support::Exact(v) | Support::Heuristic(v) => v,
            Support::Interval { hi, .. } => hi,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Support::Exact(_))
    }
}

fn check_direction(u: &HermMat, body: &BodySpec, traceless: bool) -> Result<()> {
    if u.dim() != body.choi_dim() {
        return Err(Error::DimensionMismatch {
            expected: body.choi_dim(),
            got: u.dim(),
        });
    }
    let norm = u.hs_norm();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidDirection(format!(
            "‖u‖_HS = {norm}, expected 1"
        )));
    }
    if traceless && u.trace_re().abs() > 1e-9 {
        return Err(Error::InvalidDirection(format!(
            "Tr u = {}, expected 0",
            u.trace_re()
        )));
    }
    Ok(())
}

/// Support function of `body` in direction `u` (unit, and traceless for bases).
pub fn support_function(u: &HermMat, body: &BodySpec) -> Result<Support> {
    match body.slice {
        Slice::Base => {
            check_direction(u, body, true)?;
            base_support(u, body)
        }
        Slice::Sym => {
            check_direction(u, body, false)?;
            sym_support(u, body)
        }
        s => Err(Error::Unsupported(format!(
            "support function of the {s} slice"
        ))),
    }
}

fn lambda_max(h: &HermMat) -> Result<(f64, Vec<crate::matcore::C64>)> {
    let s = eigh(h)?;
    Ok((s.max(), s.top_vector()))
}

fn base_support(u: &HermMat, body: &BodySpec) -> Result<Support> {
    let n = body.n;
    let nf = n as f64;
    let ug = partial_transpose_herm(u, n);
    let h_cp = || -> Result<f64> { Ok(nf * eigh(u)?.max()) };
    let h_ccp = || -> Result<f64> { Ok(nf * eigh(&ug)?.max()) };
    let mut rng = RngStream::new(body.params.seed, 0x5a9);
    match body.cone {
        ConeId::CP => Ok(Support::Exact(h_cp()?)),
        ConeId::CcP => Ok(Support::Exact(h_ccp()?)),
        ConeId::D => Ok(Support::Exact(h_cp()?.max(h_ccp()?))),
        ConeId::SP => {
            let r = product_extremum(
                u,
                n,
                1.0,
                body.params.seesaw_restarts,
                body.params.seesaw_iters,
                &mut rng,
            );
            Ok(Support::Heuristic(nf * r.value))
        }
        ConeId::T => {
            let hi = h_cp()?.min(h_ccp()?);
            let lo = ppt_support_lower(u, &ug, body, &mut rng)?;
            Ok(Support::Interval { lo: lo.min(hi), hi })
        }
        ConeId::P => positive_support(u, body),
    }
}

/// Best feasible value among three candidate points of `T^b`.
fn ppt_support_lower(
    u: &HermMat,
    ug: &HermMat,
    body: &BodySpec,
    rng: &mut RngStream,
) -> Result<f64> {
    let n = body.n;
    let nf = n as f64;
    let center = body.center();
    let mut best = 0.0f64;
    let (_, v) = lambda_max(u)?;
    let (_, w) = lambda_max(ug)?;
    let x1 = HermMat::projector(&v).scale(nf);
    let x2 = partial_transpose_herm(&HermMat::projector(&w), n).scale(nf);
    for x in [x1, x2] {
        let step = x.sub(&center);
        let reach = ppt_reach(&center, &step, n)?.min(1.0);
        best = best.max(reach * u.hs_inner(&x));
    }
    let r = product_extremum(
        u,
        n,
        1.0,
        body.params.seesaw_restarts,
        body.params.seesaw_iters,
        rng,
    );
    Ok(best.max(nf * r.value))
}

/// Largest `s ≥ 0` with `c + s·b` PSD and PPT (`c` positive definite).
fn ppt_reach(c: &HermMat, b: &HermMat, n: usize) -> Result<f64> {
    let (_, t1) = psd_interval(c.as_cmat(), b.as_cmat())
        .ok_or_else(|| Error::Singular("center not positive definite".into()))?;
    let cg = partial_transpose_herm(c, n);
    let bg = partial_transpose_herm(b, n);
    let (_, t2) = psd_interval(cg.as_cmat(), bg.as_cmat())
        .ok_or_else(|| Error::Singular("center not positive definite".into()))?;
    Ok(t1.min(t2))
}

/// Gauge of `u` in the polar `−(SP^b − c)`: smallest `t` with `c − u/t ∈ SP^b`.
///
/// Bisection runs twice, treating `Unknown` first as inside and then as
/// outside; the two roots bracket the value. `t` lies between the support
/// of `D^b` and the outradius.
fn positive_support(u: &HermMat, body: &BodySpec) -> Result<Support> {
    let n = body.n;
    let nf = n as f64;
    let center = body.center();
    let ug = partial_transpose_herm(u, n);
    let lo0 = (nf * eigh(u)?.max()).max(nf * eigh(&ug)?.max());
    let hi0 = (nf * nf - 1.0).sqrt();
    if n == 2 {
        // SP and T coincide, so the gauge equals the D^b support.
        return Ok(Support::Exact(lo0));
    }
    let mut roots = [0.0; 2];
    for (k, unknown_inside) in [true, false].into_iter().enumerate() {
        let (mut lo, mut hi) = (lo0, hi0);
        for _ in 0..30 {
            if hi - lo <= 1e-6 * hi {
                break;
            }
            let t = 0.5 * (lo + hi);
            let x = center.sub(&u.scale(1.0 / t));
            let v = cone_membership_herm(&x, n, ConeId::SP, &body.params)?;
            let inside = match v.status {
                Status::In => true,
                Status::Out => false,
                Status::Unknown => unknown_inside,
            };
            if inside {
                hi = t;
            } else {
                lo = t;
            }
        }
        roots[k] = hi;
    }
    let (lo, hi) = (roots[0].min(roots[1]), roots[0].max(roots[1]));
    Ok(Support::Interval { lo, hi })
}

fn sym_support(u: &HermMat, body: &BodySpec) -> Result<Support> {
    let n = body.n;
    let nf = n as f64;
    let ug = partial_transpose_herm(u, n);
    let h_cp = nf * u.op_norm()?;
    let h_ccp = nf * ug.op_norm()?;
    let mut rng = RngStream::new(body.params.seed, 0x5a9);
    let prod = |rng: &mut RngStream| -> f64 {
        let hi = product_extremum(
            u,
            n,
            1.0,
            body.params.seesaw_restarts,
            body.params.seesaw_iters,
            rng,
        );
        let lo = product_extremum(
            u,
            n,
            -1.0,
            body.params.seesaw_restarts,
            body.params.seesaw_iters,
            rng,
        );
        nf * hi.value.max(-lo.value)
    };
    match body.cone {
        ConeId::CP => Ok(Support::Exact(h_cp)),
        ConeId::CcP => Ok(Support::Exact(h_ccp)),
        ConeId::D => Ok(Support::Exact(h_cp.max(h_ccp))),
        ConeId::SP => Ok(Support::Heuristic(prod(&mut rng))),
        ConeId::T => {
            let hi = h_cp.min(h_ccp);
            let base = BodySpec {
                slice: Slice::Base,
                ..body.clone()
            };
            // conv(−T^b ∪ T^b) about 0: max over ± of the base maximum of ⟨±u, x⟩.
            let tr = u.trace_re();
            let mut lo = prod(&mut rng);
            for s in [1.0, -1.0] {
                let mut dir = u.scale(s).into_cmat();
                dir.add_identity(-s * tr / (n * n) as f64);
                let dir = HermMat::symmetrize(&dir);
                let norm = dir.hs_norm();
                if norm < 1e-12 {
                    lo = lo.max(s * tr / nf);
                    continue;
                }
                let unit = dir.scale(1.0 / norm);
                let ugd = partial_transpose_herm(&unit, n);
                let b = ppt_support_lower(&unit, &ugd, &base, &mut rng)?;
                // ⟨su, x⟩ = ⟨dir, x − c⟩ + s·Tr(u)/N on the base.
                lo = lo.max(norm * b + s * tr / nf);
            }
            Ok(Support::Interval { lo: lo.min(hi), hi })
        }
        ConeId::P => Err(Error::Unsupported(
            "support of the symmetrized P body".into(),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::ChoiMat;

    fn u0() -> HermMat {
        // (SWAP − I/2)/√3.
        let mut m = ChoiMat::swap(2).mat().clone();
        m.add_identity(-0.5);
        HermMat::new(m).unwrap().scale(1.0 / 3f64.sqrt())
    }

    fn body(cone: ConeId, n: usize) -> BodySpec {
        BodySpec::new(cone, n, Slice::Base).unwrap()
    }

    #[test]
    fn swap_direction_values() {
        let u = u0();
        assert!((u.hs_norm() - 1.0).abs() < 1e-15);
        let cp = support_function(&u, &body(ConeId::CP, 2)).unwrap();
        assert!((cp.lo() - 1.0 / 3f64.sqrt()).abs() < 1e-12);
        let ccp = support_function(&u, &body(ConeId::CcP, 2)).unwrap();
        assert!((ccp.lo() - 3f64.sqrt()).abs() < 1e-12);
        let d = support_function(&u, &body(ConeId::D, 2)).unwrap();
        assert!((d.lo() - 3f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn diagonal_direction() {
        let u = HermMat::from_real_diag(&[0.5, 0.5, -0.5, -0.5]);
        let cp = support_function(&u, &body(ConeId::CP, 2)).unwrap();
        assert_eq!(cp, Support::Exact(1.0));
        // The maximizer 2E_11 is a product state, so every base attains 1.
        for c in [ConeId::T, ConeId::SP, ConeId::P, ConeId::D] {
            let s = support_function(&u, &body(c, 2)).unwrap();
            assert!(
                (s.lo() - 1.0).abs() < 1e-9 && (s.hi() - 1.0).abs() < 1e-9,
                "{c}: {s:?}"
            );
        }
    }

    #[test]
    fn ordering_of_supports() {
        let mut rng = RngStream::new(9, 0);
        for _ in 0..20 {
            let g = crate::matcore::CMat::from_fn(4, |_, _| rng.complex_normal());
            let mut h = HermMat::symmetrize(&g).into_cmat();
            let t = h.trace().re / 4.0;
            h.add_identity(-t);
            let h = HermMat::symmetrize(&h);
            let u = h.scale(1.0 / h.hs_norm());
            let sp = support_function(&u, &body(ConeId::SP, 2)).unwrap();
            let t = support_function(&u, &body(ConeId::T, 2)).unwrap();
            let cp = support_function(&u, &body(ConeId::CP, 2)).unwrap();
            let d = support_function(&u, &body(ConeId::D, 2)).unwrap();
            let p = support_function(&u, &body(ConeId::P, 2)).unwrap();
            assert!(sp.lo() <= t.hi() + 1e-9);
            assert!(t.lo() <= t.hi() + 1e-12);
            assert!(t.hi() <= cp.lo() + 1e-12);
            assert!(cp.lo() <= d.lo() + 1e-12);
            assert!(d.lo() <= p.lo() + 1e-12);
            // N = 2: SP and T coincide, so the product search reaches the T interval.
            assert!(sp.lo() >= t.lo() - 1e-9);
        }
    }

    #[test]
    fn rejects_bad_directions() {
        let b = body(ConeId::CP, 2);
        let r = support_function(&HermMat::identity(4).scale(0.5), &b);
        assert!(matches!(r, Err(Error::InvalidDirection(_))));
        let r = support_function(&HermMat::from_real_diag(&[1.0, -1.0, 0.0, 0.0]), &b);
        assert!(matches!(r, Err(Error::InvalidDirection(_))));
    }

    #[test]
    fn sym_cp_is_scaled_operator_norm() {
        let b = BodySpec::new(ConeId::CP, 2, Slice::Sym).unwrap();
        let u = HermMat::from_real_diag(&[0.1, -0.7, 0.5, 0.5]);
        let u = u.scale(1.0 / u.hs_norm());
        let s = support_function(&u, &b).unwrap();
        assert!((s.lo() - 2.0 * u.op_norm().unwrap()).abs() < 1e-12);
    }
}
