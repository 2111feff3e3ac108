//! Search for PPT states `σ` with `Tr(Dσ) < 0`, which certify `D ∉ D`.

use crate::error::Result;
use crate::matcore::{eigh, partial_transpose_herm, HermMat};
use crate::randgen::{random_product_state, RngStream};

#[derive(Clone, Debug)]
pub struct WitnessResult {
    /// PPT density matrix (exactly, after the final mixing repair).
    pub sigma: HermMat,
    /// `Tr(Dσ)`.
    pub value: f64,
}

/// Mixes `x` (normalized to unit trace) with `I/d` just enough to make it PPT.
fn repair(x: &HermMat, n: usize) -> Result<HermMat> {
    let d = x.dim();
    let mixed = HermMat::maximally_mixed(d);
    let tr = x.trace_re();
    if !(tr > 1e-300) {
        return Ok(mixed);
    }
    let x = x.scale(1.0 / tr);
    let lam = eigh(&x)?
        .min()
        .min(eigh(&partial_transpose_herm(&x, n))?.min());
    if lam >= 0.0 {
        return Ok(x);
    }
    let inv_d = 1.0 / d as f64;
    let s = (-lam / (inv_d - lam) * (1.0 + 1e-12)).min(1.0);
    Ok(x.scale(1.0 - s).add(&mixed.scale(s)))
}

/// Approximate projection onto unit-trace PPT matrices (Dykstra over three sets).
fn project_ppt_states(x: &HermMat, n: usize, sweeps: usize) -> Result<HermMat> {
    let d = x.dim();
    let mut y = x.clone();
    let mut c = [HermMat::zeros(d), HermMat::zeros(d), HermMat::zeros(d)];
    for _ in 0..sweeps {
        for (k, corr) in c.iter_mut().enumerate() {
            let z = y.add(corr);
            let proj = match k {
                0 => z.psd_part()?,
                1 => partial_transpose_herm(&partial_transpose_herm(&z, n).psd_part()?, n),
                _ => {
                    let shift = (1.0 - z.trace_re()) / d as f64;
                    let mut m = z.clone().into_cmat();
                    m.add_identity(shift);
                    HermMat::symmetrize(&m)
                }
            };
            *corr = z.sub(&proj);
            y = proj;
        }
    }
    Ok(y)
}

/// Projected-gradient minimization of `Tr(Dσ)` over PPT states from several
/// sampled starts (`I/d`, random product states, and `hint` when given).
///
/// The returned `σ` is exactly PPT; `value` is evaluated on it.
pub fn ppt_witness_search(
    d: &HermMat,
    n: usize,
    iters: usize,
    rng: &mut RngStream,
    hint: Option<&HermMat>,
) -> Result<WitnessResult> {
    let dim = d.dim();
    let mut starts = vec![HermMat::maximally_mixed(dim)];
    if let Some(h) = hint {
        starts.insert(0, h.clone());
    }
    for _ in 0..3 {
        starts.push(random_product_state(n, rng));
    }
    let step = 1.0 / d.hs_norm().max(1e-300);
    let mut best: Option<WitnessResult> = None;
    for start in starts {
        let mut sigma = repair(&start, n)?;
        let consider = |s: &HermMat, best: &mut Option<WitnessResult>| -> Result<()> {
            let r = repair(s, n)?;
            let value = d.hs_inner(&r);
            if best.as_ref().map_or(true, |b| value < b.value) {
                *best = Some(WitnessResult { sigma: r, value });
            }
            Ok(())
        };
        consider(&sigma, &mut best)?;
        for it in 0..iters {
            let mut g = sigma.clone();
            g.axpy(-step, d);
            sigma = project_ppt_states(&g, n, 20)?;
            if it % 20 == 19 {
                consider(&sigma, &mut best)?;
            }
        }
        consider(&sigma, &mut best)?;
        if best.as_ref().is_some_and(|b| b.value < 0.0) {
            break;
        }
    }
    Ok(best.expect("at least one start"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::ChoiMat;

    #[test]
    fn repaired_states_are_ppt() {
        let mut rng = RngStream::new(1, 0);
        let rho = ChoiMat::max_entangled(3).to_herm().unwrap();
        let r = repair(&rho, 3).unwrap();
        assert!((r.trace_re() - 1.0).abs() < 1e-12);
        assert!(eigh(&r).unwrap().min() >= -1e-15);
        assert!(eigh(&partial_transpose_herm(&r, 3)).unwrap().min() >= -1e-15);
        let p = random_product_state(2, &mut rng);
        assert!(repair(&p, 2).unwrap().max_abs_diff(&p) < 1e-14);
    }

    #[test]
    fn decomposable_input_has_no_witness() {
        // SWAP is decomposable, so Tr(SWAP σ) ≥ 0 on PPT states.
        let s = ChoiMat::swap(2).to_herm().unwrap();
        let w = ppt_witness_search(&s, 2, 100, &mut RngStream::new(2, 0), None).unwrap();
        assert!(w.value > -1e-9, "value {}", w.value);
    }

    #[test]
    fn non_psd_input_has_witness() {
        // D = I − 2P for a product projector P: a product σ = P gives Tr(Dσ) = −1.
        let p = random_product_state(2, &mut RngStream::new(3, 0));
        let d = HermMat::identity(4).sub(&p.scale(2.0));
        let w = ppt_witness_search(&d, 2, 200, &mut RngStream::new(4, 0), None).unwrap();
        assert!(w.value < -0.9, "value {}", w.value);
    }
}
