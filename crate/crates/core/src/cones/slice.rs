//! Membership in slices of the cones.

use crate::error::{Error, Result};
use crate::matcore::{eigh, partial_trace_herm, ChoiMat, HermMat, Subsystem};

use super::oracle::cone_membership_herm;
use super::sym::sym_membership;
use super::{BodySpec, Certificate, Slice, Status, Verdict};

/// Membership of `D` in `body`.
pub fn slice_membership(d: &ChoiMat, body: &BodySpec) -> Result<Verdict> {
    if d.n() != body.n {
        return Err(Error::DimensionMismatch {
            expected: body.n,
            got: d.n(),
        });
    }
    let h = d.to_herm()?;
    slice_membership_herm(&h, body)
}

pub(crate) fn slice_membership_herm(h: &HermMat, body: &BodySpec) -> Result<Verdict> {
    let n = body.n;
    let nf = n as f64;
    let params = &body.params;
    let tol = params.slice_tol;
    let constraint = |name: &str, value: f64| {
        Verdict::outside(
            -value.abs(),
            Certificate::Constraint {
                name: name.to_string(),
                value,
            },
        )
    };
    match body.slice {
        Slice::Cone => cone_membership_herm(h, n, body.cone, params),
        Slice::Base => {
            let dev = h.trace_re() - nf;
            if dev.abs() > tol * nf {
                return Ok(constraint("trace", dev));
            }
            cone_membership_herm(h, n, body.cone, params)
        }
        Slice::TP => {
            let mut tb = partial_trace_herm(h, n, Subsystem::B).into_cmat();
            tb.add_identity(-1.0);
            let dev = tb.hs_norm();
            if dev > tol * nf {
                return Ok(constraint("partial_trace", dev));
            }
            cone_membership_herm(h, n, body.cone, params)
        }
        Slice::TNI => {
            let tb = partial_trace_herm(h, n, Subsystem::B);
            let slack = eigh(&HermMat::identity(n).sub(&tb))?.min();
            if slack < -tol * nf {
                return Ok(constraint("trace_non_increasing", slack));
            }
            let mut v = cone_membership_herm(h, n, body.cone, params)?;
            v.margin = v.margin.min(slack);
            Ok(v)
        }
        Slice::Sym => sym_membership(h, n, body.cone, params),
        Slice::SymPolar => {
            let e = HermMat::identity(n * n).scale(1.0 / nf);
            let dual = body.cone.dual();
            let mut margin = f64::INFINITY;
            let mut heuristic = false;
            let mut unknown = None;
            for side in [1i8, -1] {
                let m = e.add(&h.scale(-(side as f64)));
                let v = cone_membership_herm(&m, n, dual, params)?;
                margin = margin.min(v.margin);
                heuristic |= v.heuristic;
                match v.status {
                    Status::Out => {
                        return Ok(Verdict::outside(
                            v.margin,
                            Certificate::Dual {
                                side,
                                inner: Box::new(v),
                            },
                        ))
                    }
                    Status::Unknown => unknown = Some(v),
                    Status::In => {}
                }
            }
            if let Some(v) = unknown {
                return Ok(Verdict::unknown(
                    margin,
                    Some(Certificate::Dual {
                        side: 0,
                        inner: Box::new(v),
                    }),
                ));
            }
            let mut v = Verdict::inside(margin, None);
            v.heuristic = heuristic;
            Ok(v)
        }
    }
}
