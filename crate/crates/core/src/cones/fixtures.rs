//! Choi's positive, non-decomposable map on `M_3`, shipped as data and
//! validated before use.

use crate::error::Result;
use crate::matcore::{eigh, CMat, ChoiMat, C64};
use crate::randgen::RngStream;

use super::seesaw::seesaw_min;

/// Choi matrix of
/// `X ↦ [[x11+x33, −x12, −x13], [−x21, x22+x11, −x23], [−x31, −x32, x33+x22]]`.
pub fn choi_map_fixture() -> ChoiMat {
    // Diagonal blocks Φ(E_mm) as (row, row) positions, then −E_mμ off the diagonal.
    const DIAG: [[usize; 2]; 3] = [[0, 1], [1, 2], [2, 0]];
    let n = 3;
    let mut m = CMat::zeros(9);
    for (blk, outs) in DIAG.iter().enumerate() {
        for &o in outs {
            m[(blk * n + o, blk * n + o)] = C64::new(1.0, 0.0);
        }
    }
    for a in 0..n {
        for b in 0..n {
            if a != b {
                m[(a * n + a, b * n + b)] = C64::new(-1.0, 0.0);
            }
        }
    }
    ChoiMat::new(n, m).expect("9x9")
}

#[derive(Clone, Debug)]
pub struct FixtureReport {
    /// Smallest see-saw value of `⟨η|Φ(|ξ⟩⟨ξ|)|η⟩`.
    pub seesaw_min: f64,
    pub restarts: usize,
    /// Smallest eigenvalue of the Choi matrix.
    pub choi_min_eig: f64,
    pub valid: bool,
}

/// Checks block positivity by see-saw and the negative Choi eigenvalue.
pub fn validate_fixture(d: &ChoiMat, restarts: usize, seed: u64) -> Result<FixtureReport> {
    let h = d.to_herm()?;
    let mut rng = RngStream::new(seed, 0);
    let r = seesaw_min(&h, d.n(), restarts, 200, &mut rng, None);
    let lmin = eigh(&h)?.min();
    Ok(FixtureReport {
        seesaw_min: r.value,
        restarts,
        choi_min_eig: lmin,
        valid: r.value >= -1e-8 && lmin < -1e-6,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::{apply_map_raw, choi_to_map};

    #[test]
    fn fixture_matches_the_map_formula() {
        let phi = choi_to_map(&choi_map_fixture());
        let x = CMat::from_fn(3, |i, j| {
            C64::new((1 + 3 * i + j) as f64, (i as f64) - (j as f64))
        });
        let y = apply_map_raw(&phi, &x).unwrap();
        let g = |i: usize, j: usize| x[(i, j)];
        let expect = CMat::from_vec(
            3,
            vec![
                g(0, 0) + g(2, 2),
                -g(0, 1),
                -g(0, 2),
                -g(1, 0),
                g(1, 1) + g(0, 0),
                -g(1, 2),
                -g(2, 0),
                -g(2, 1),
                g(2, 2) + g(1, 1),
            ],
        )
        .unwrap();
        assert_eq!(y, expect);
    }

    #[test]
    fn fixture_validates() {
        let rep = validate_fixture(&choi_map_fixture(), 500, 17).unwrap();
        assert!(rep.valid, "{rep:?}");
        assert!(rep.choi_min_eig < -0.5);
    }
}
