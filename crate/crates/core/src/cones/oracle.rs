//! Cone membership for Choi matrices.

use crate::error::{Error, Result};
use crate::matcore::{eigh, partial_transpose_herm, CMat, ChoiMat, HermMat, MatrixJson, C64};
use crate::randgen::RngStream;

use super::dykstra::{decomposable_split, SplitOutcome};
use super::seesaw::seesaw_min;
use super::separable::separable_decomposition;
use super::witness::ppt_witness_search;
use super::{Certificate, ConeId, OracleParams, Verdict};

/// Membership of `D` in `cone`.
pub fn cone_membership(d: &ChoiMat, cone: ConeId, params: &OracleParams) -> Result<Verdict> {
    let h = d.to_herm()?;
    cone_membership_herm(&h, d.n(), cone, params)
}

/// As [`cone_membership`] on a Hermitian carrier of size `N²`.
pub fn cone_membership_herm(
    h: &HermMat,
    n: usize,
    cone: ConeId,
    params: &OracleParams,
) -> Result<Verdict> {
    if h.dim() != n * n {
        return Err(Error::DimensionMismatch {
            expected: n * n,
            got: h.dim(),
        });
    }
    params.validate()?;
    match cone {
        ConeId::CP => psd_verdict(h, false, params),
        ConeId::CcP => psd_verdict(&partial_transpose_herm(h, n), true, params),
        ConeId::T => ppt_verdict(h, n, params),
        ConeId::P => positive_verdict(h, n, params),
        ConeId::SP => separable_verdict(h, n, params),
        ConeId::D => decomposable_verdict(h, n, params),
    }
}

fn psd_verdict(m: &HermMat, transposed: bool, params: &OracleParams) -> Result<Verdict> {
    let spec = eigh(m)?;
    let lmin = spec.min();
    if lmin >= -params.psd_slack(m) {
        Ok(Verdict::inside(lmin, None))
    } else {
        Ok(Verdict::outside(
            lmin,
            Certificate::Eigenvector {
                vector: spec.bottom_vector(),
                value: lmin,
                partial_transpose: transposed,
            },
        ))
    }
}

fn ppt_verdict(h: &HermMat, n: usize, params: &OracleParams) -> Result<Verdict> {
    let a = psd_verdict(h, false, params)?;
    if a.is_out() {
        return Ok(a);
    }
    let b = psd_verdict(&partial_transpose_herm(h, n), true, params)?;
    if b.is_out() {
        return Ok(b);
    }
    Ok(Verdict::inside(a.margin.min(b.margin), None))
}

fn positive_verdict(h: &HermMat, n: usize, params: &OracleParams) -> Result<Verdict> {
    let threshold = -params.seesaw_out * h.hs_norm().max(1.0);
    let mut rng = RngStream::new(params.seed, 0xb10c);
    let r = seesaw_min(
        h,
        n,
        params.seesaw_restarts,
        params.seesaw_iters,
        &mut rng,
        Some(threshold),
    );
    if r.value < threshold {
        Ok(Verdict::outside(
            r.value,
            Certificate::ProductPair {
                xi: r.xi,
                eta: r.eta,
                value: r.value,
            },
        ))
    } else {
        Ok(Verdict::inside(r.value, None).heuristic())
    }
}

fn separable_verdict(h: &HermMat, n: usize, params: &OracleParams) -> Result<Verdict> {
    let t = ppt_verdict(h, n, params)?;
    if !t.is_in() || n == 2 {
        return Ok(t);
    }
    let tr = h.trace_re();
    if tr <= params.psd_slack(h) {
        return Ok(Verdict::inside(t.margin, None));
    }
    let sigma = h.scale(1.0 / tr);
    let d = (n * n) as f64;
    let mut centered = sigma.clone().into_cmat();
    centered.add_identity(-1.0 / d);
    let distance = centered.hs_norm();
    let radius = 1.0 / (d * (d - 1.0)).sqrt();
    // Relative slack absorbs rounding for points placed exactly on the sphere.
    if distance <= radius * (1.0 + 1e-12) {
        return Ok(Verdict::inside(
            t.margin,
            Some(Certificate::Ball { distance, radius }),
        ));
    }
    if let Some((xi, eta, residual)) = product_rank_one(&sigma, n, params.separable_tol)? {
        return Ok(Verdict::inside(
            t.margin,
            Some(Certificate::Separable {
                terms: vec![(1.0, xi, eta)],
                residual,
            }),
        ));
    }
    let fit = separable_decomposition(
        &sigma,
        n,
        params.separable_pool,
        params.separable_tol,
        params.seed,
    );
    if fit.residual <= params.separable_tol {
        return Ok(Verdict::inside(
            t.margin,
            Some(Certificate::Separable {
                terms: fit.terms,
                residual: fit.residual,
            }),
        ));
    }
    Ok(Verdict::unknown(
        t.margin,
        Some(Certificate::Note {
            text: format!("PPT; separable fit residual {:.3e}", fit.residual),
        }),
    ))
}

/// `σ = |ξ⊗η⟩⟨ξ⊗η|` up to `tol` in HS norm, for a unit-trace `σ`.
fn product_rank_one(
    sigma: &HermMat,
    n: usize,
    tol: f64,
) -> Result<Option<(Vec<C64>, Vec<C64>, f64)>> {
    let spec = eigh(sigma)?;
    if spec.values[1] > tol {
        return Ok(None);
    }
    let v = spec.top_vector();
    let m = CMat::from_fn(n, |i, j| v[i * n + j]);
    let left = HermMat::symmetrize(&m.matmul(&m.adjoint()));
    let xi = eigh(&left)?.top_vector();
    let eta: Vec<C64> = (0..n)
        .map(|j| (0..n).map(|i| xi[i].conj() * m[(i, j)]).sum())
        .collect();
    let norm = eta.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let eta: Vec<C64> = eta.iter().map(|z| z / norm).collect();
    let p = HermMat::projector(&crate::randgen::kron_vec(&xi, &eta));
    let residual = sigma.sub(&p).hs_norm();
    Ok((residual <= tol).then_some((xi, eta, residual)))
}

fn decomposable_verdict(h: &HermMat, n: usize, params: &OracleParams) -> Result<Verdict> {
    let cp = psd_verdict(h, false, params)?;
    let zero = HermMat::zeros(h.dim());
    if cp.is_in() {
        return Ok(Verdict::inside(
            cp.margin,
            Some(Certificate::Decomposition {
                a: MatrixJson::from(h.as_cmat()),
                b: MatrixJson::from(zero.as_cmat()),
                residual: 0.0,
            }),
        ));
    }
    let pt = partial_transpose_herm(h, n);
    let ccp = psd_verdict(&pt, true, params)?;
    if ccp.is_in() {
        return Ok(Verdict::inside(
            ccp.margin,
            Some(Certificate::Decomposition {
                a: MatrixJson::from(zero.as_cmat()),
                b: MatrixJson::from(pt.as_cmat()),
                residual: 0.0,
            }),
        ));
    }
    let pos = positive_verdict(h, n, params)?;
    if pos.is_out() {
        return Ok(pos);
    }
    let tol = params.dykstra_tol * h.hs_norm().max(1.0);
    let outcome = decomposable_split(h, n, tol, params.dykstra_max_iter)?;
    let gap = match outcome {
        SplitOutcome::Success(s) => {
            return Ok(Verdict::inside(
                -s.residual,
                Some(Certificate::Decomposition {
                    a: MatrixJson::from(s.a.as_cmat()),
                    b: MatrixJson::from(s.b.as_cmat()),
                    residual: s.residual,
                }),
            ));
        }
        SplitOutcome::Failure { gap, .. } => gap,
    };
    let mut rng = RngStream::new(params.seed, 0x717);
    let w = ppt_witness_search(h, n, params.witness_iters, &mut rng, Some(&gap))?;
    let threshold = -params.psd_slack(h);
    if w.value < threshold {
        return Ok(Verdict::outside(
            w.value,
            Certificate::PptWitness {
                sigma: MatrixJson::from(w.sigma.as_cmat()),
                value: w.value,
            },
        ));
    }
    Ok(Verdict::unknown(
        w.value,
        Some(Certificate::Note {
            text: "split did not converge and no PPT witness found".into(),
        }),
    ))
}
