//! Decomposition `D = A + B^{T_B}` with `A, B ⪰ 0` by Dykstra's alternating projections.

use crate::error::Result;
use crate::matcore::{partial_transpose_herm, HermMat};

#[derive(Clone, Debug)]
pub struct Split {
    pub a: HermMat,
    pub b: HermMat,
    /// `‖D − A − B^{T_B}‖_HS`.
    pub residual: f64,
    pub iterations: usize,
}

#[derive(Clone, Debug)]
pub enum SplitOutcome {
    Success(Split),
    /// Residual stalled above tolerance or the cap was reached.
    Failure {
        residual: f64,
        iterations: usize,
        plateau: bool,
        /// Last iterates, kept for witness construction.
        gap: HermMat,
    },
}

impl SplitOutcome {
    pub fn is_success(&self) -> bool {
        matches!(self, SplitOutcome::Success(_))
    }

    pub fn residual(&self) -> f64 {
        match self {
            SplitOutcome::Success(s) => s.residual,
            SplitOutcome::Failure { residual, .. } => *residual,
        }
    }
}

const CHECK_EVERY: usize = 10;
const PLATEAU_WINDOW: usize = 500;
const PLATEAU_REL: f64 = 1e-10;

/// Searches `A ⪰ 0` with `(D − A)^{T_B} ⪰ 0`.
///
/// Alternates projections onto the PSD cone and onto `{X : (D − X)^{T_B} ⪰ 0}`
/// (the latter through the partial-transpose isometry). Success when the
/// exact reconstruction residual drops to `tol`.
pub fn decomposable_split(
    d: &HermMat,
    n: usize,
    tol: f64,
    max_iter: usize,
) -> Result<SplitOutcome> {
    let residual_of = |y: &HermMat| -> Result<(f64, HermMat)> {
        let g = partial_transpose_herm(&d.sub(y), n);
        let spec = g.eigh()?;
        let neg: f64 = spec
            .values
            .iter()
            .filter(|&&x| x < 0.0)
            .map(|x| x * x)
            .sum();
        Ok((neg.sqrt(), spec.reconstruct_with(|x| x.max(0.0))))
    };

    // Exact shortcuts: already PSD, or already PSD after partial transpose.
    let spec = d.eigh()?;
    if spec.min() >= 0.0 {
        return Ok(SplitOutcome::Success(Split {
            a: d.clone(),
            b: HermMat::zeros(d.dim()),
            residual: 0.0,
            iterations: 0,
        }));
    }
    let (r0, b0) = residual_of(&HermMat::zeros(d.dim()))?;
    if r0 == 0.0 {
        return Ok(SplitOutcome::Success(Split {
            a: HermMat::zeros(d.dim()),
            b: b0,
            residual: 0.0,
            iterations: 0,
        }));
    }

    let mut x = d.clone();
    let mut p = HermMat::zeros(d.dim());
    let mut q = HermMat::zeros(d.dim());
    let mut history: Vec<f64> = Vec::new();
    let mut last_y = x.clone();
    let mut best = f64::INFINITY;
    for it in 1..=max_iter {
        let xp = x.add(&p);
        let y = xp.psd_part()?;
        p = xp.sub(&y);
        let yq = y.add(&q);
        let t = partial_transpose_herm(&d.sub(&yq), n).psd_part()?;
        let x_new = d.sub(&partial_transpose_herm(&t, n));
        q = yq.sub(&x_new);
        x = x_new;
        last_y = y;

        if it % CHECK_EVERY == 0 || it == max_iter {
            let (res, b) = residual_of(&last_y)?;
            best = best.min(res);
            if res <= tol {
                return Ok(SplitOutcome::Success(Split {
                    a: last_y,
                    b,
                    residual: res,
                    iterations: it,
                }));
            }
            history.push(res);
            let w = PLATEAU_WINDOW / CHECK_EVERY;
            if history.len() > w {
                let old = history[history.len() - 1 - w];
                if (old - res) <= PLATEAU_REL * old {
                    return Ok(SplitOutcome::Failure {
                        residual: res,
                        iterations: it,
                        plateau: true,
                        gap: last_y.sub(&x),
                    });
                }
            }
        }
    }
    Ok(SplitOutcome::Failure {
        residual: best,
        iterations: max_iter,
        plateau: false,
        gap: last_y.sub(&x),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::{eigh, ChoiMat};

    fn check_split(d: &HermMat, n: usize, s: &Split, tol: f64) {
        let rec = s.a.add(&partial_transpose_herm(&s.b, n));
        assert!(d.sub(&rec).hs_norm() <= tol);
        assert!(eigh(&s.a).unwrap().min() >= -tol);
        assert!(eigh(&s.b).unwrap().min() >= -tol);
    }

    #[test]
    fn psd_input_is_trivial() {
        let d = ChoiMat::max_entangled(2).to_herm().unwrap();
        match decomposable_split(&d, 2, 1e-9, 100).unwrap() {
            SplitOutcome::Success(s) => {
                assert_eq!(s.a, d);
                assert_eq!(s.b.hs_norm(), 0.0);
            }
            f => panic!("{f:?}"),
        }
    }

    #[test]
    fn swap_splits_into_max_entangled() {
        let d = ChoiMat::swap(2).to_herm().unwrap();
        match decomposable_split(&d, 2, 1e-9, 100).unwrap() {
            SplitOutcome::Success(s) => {
                check_split(&d, 2, &s, 1e-9);
                let rho = ChoiMat::max_entangled(2).to_herm().unwrap();
                assert!(s.b.max_abs_diff(&rho) < 1e-12);
            }
            f => panic!("{f:?}"),
        }
    }

    #[test]
    fn mixture_converges() {
        let mut rng = crate::randgen::RngStream::new(11, 0);
        let a = crate::randgen::random_state_hs(9, &mut rng);
        let b = crate::randgen::random_state_hs(9, &mut rng);
        // Make the sum neither PSD nor co-PSD by using pure-ish pieces.
        let pa = HermMat::projector(&rng.unit_complex(9));
        let pb = HermMat::projector(&rng.unit_complex(9));
        let d = a
            .scale(0.1)
            .add(&pa)
            .add(&partial_transpose_herm(&b.scale(0.1).add(&pb), 3));
        match decomposable_split(&d, 3, 1e-8, 50_000).unwrap() {
            SplitOutcome::Success(s) => check_split(&d, 3, &s, 1e-8),
            f => panic!("{f:?}"),
        }
    }
}
