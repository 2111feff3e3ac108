//! Superoperators, Choi matrices, and the reshuffling between them.

use super::{CMat, HermMat, C64, ONE, ZERO};
use crate::error::{Error, Result};

/// Which tensor factor of `C^N ⊗ C^N` to act on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subsystem {
    /// Block index (input side).
    A,
    /// In-block index (output side).
    B,
}

/// Linear map on `M_N` as an `N²×N²` matrix acting on row-major vectorized inputs.
#[derive(Clone, Debug, PartialEq)]
pub struct SuperOp {
    n: usize,
    mat: CMat,
}

impl SuperOp {
    pub fn new(n: usize, mat: CMat) -> Result<Self> {
        if mat.dim() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                got: mat.dim(),
            });
        }
        Ok(Self { n, mat })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            n,
            mat: CMat::identity(n * n),
        }
    }

    /// Completely depolarizing map `ρ ↦ Tr(ρ) I/N`.
    pub fn depolarizing(n: usize) -> Self {
        let w = C64::new(1.0 / n as f64, 0.0);
        let mat = CMat::from_fn(n * n, |r, c| {
            let (rn, rv) = (r / n, r % n);
            let (cm, cu) = (c / n, c % n);
            if rn == rv && cm == cu {
                w
            } else {
                ZERO
            }
        });
        Self { n, mat }
    }

    /// Transposition `ρ ↦ ρᵀ`.
    pub fn transpose(n: usize) -> Self {
        let mat = CMat::from_fn(n * n, |r, c| {
            let (rn, rv) = (r / n, r % n);
            let (cm, cu) = (c / n, c % n);
            if rn == cu && rv == cm {
                ONE
            } else {
                ZERO
            }
        });
        Self { n, mat }
    }

    /// Unitary channel `ρ ↦ V ρ V†`.
    pub fn unitary(v: &CMat) -> Self {
        let n = v.dim();
        let mat = CMat::from_fn(n * n, |r, c| {
            let (rn, rv) = (r / n, r % n);
            let (cm, cu) = (c / n, c % n);
            v[(rn, cm)] * v[(rv, cu)].conj()
        });
        Self { n, mat }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mat(&self) -> &CMat {
        &self.mat
    }

    /// `Φ_{nν,mμ} = conj(Φ_{νn,μm})` within `tol`.
    pub fn is_hermiticity_preserving(&self, tol: f64) -> bool {
        let n = self.n;
        let flip = |k: usize| (k % n) * n + k / n;
        let d = n * n;
        (0..d).all(|r| {
            (0..d).all(|c| (self.mat[(r, c)] - self.mat[(flip(r), flip(c))].conj()).norm() <= tol)
        })
    }
}

/// Choi (dynamical) matrix of a map on `M_N`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChoiMat {
    n: usize,
    mat: CMat,
}

impl ChoiMat {
    pub fn new(n: usize, mat: CMat) -> Result<Self> {
        if mat.dim() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                got: mat.dim(),
            });
        }
        Ok(Self { n, mat })
    }

    pub fn from_herm(n: usize, h: HermMat) -> Result<Self> {
        Self::new(n, h.into_cmat())
    }

    /// `ρ_max = |ξ⟩⟨ξ|` with `ξ = Σ e_m ⊗ e_m`, the Choi matrix of the identity map.
    pub fn max_entangled(n: usize) -> Self {
        let mat = CMat::from_fn(n * n, |r, c| {
            if r % (n + 1) == 0 && c % (n + 1) == 0 {
                ONE
            } else {
                ZERO
            }
        });
        Self { n, mat }
    }

    /// Swap operator on `C^N ⊗ C^N`, the Choi matrix of transposition.
    pub fn swap(n: usize) -> Self {
        let mat = CMat::from_fn(
            n * n,
            |r, c| {
                if c == (r % n) * n + r / n {
                    ONE
                } else {
                    ZERO
                }
            },
        );
        Self { n, mat }
    }

    /// `I/N`, the Choi matrix of the completely depolarizing map.
    pub fn depolarizing(n: usize) -> Self {
        Self {
            n,
            mat: CMat::identity(n * n).scale(1.0 / n as f64),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mat(&self) -> &CMat {
        &self.mat
    }

    pub fn into_cmat(self) -> CMat {
        self.mat
    }

    /// Block `(m, μ)`, equal to `Φ(E_{mμ})`.
    pub fn block(&self, m: usize, mu: usize) -> CMat {
        let n = self.n;
        CMat::from_fn(n, |i, j| self.mat[(m * n + i, mu * n + j)])
    }

    pub fn is_hermitian(&self) -> bool {
        self.mat.is_hermitian(super::HERMITIAN_TOL)
    }

    pub fn to_herm(&self) -> Result<HermMat> {
        HermMat::new(self.mat.clone())
    }
}

/// `D_{mn,μν} = Φ_{nν,mμ}`.
pub fn map_to_choi(phi: &SuperOp) -> ChoiMat {
    let n = phi.n;
    let mut mat = CMat::zeros(n * n);
    for m in 0..n {
        for nn in 0..n {
            for mu in 0..n {
                for nu in 0..n {
                    mat[(m * n + nn, mu * n + nu)] = phi.mat[(nn * n + nu, m * n + mu)];
                }
            }
        }
    }
    ChoiMat { n, mat }
}

/// Inverse of [`map_to_choi`].
pub fn choi_to_map(d: &ChoiMat) -> SuperOp {
    let n = d.n;
    let mut mat = CMat::zeros(n * n);
    for m in 0..n {
        for nn in 0..n {
            for mu in 0..n {
                for nu in 0..n {
                    mat[(nn * n + nu, m * n + mu)] = d.mat[(m * n + nn, mu * n + nu)];
                }
            }
        }
    }
    SuperOp { n, mat }
}

fn ptrace(mat: &CMat, n: usize, sub: Subsystem) -> CMat {
    let mut out = CMat::zeros(n);
    for i in 0..n {
        for j in 0..n {
            let mut s = ZERO;
            for k in 0..n {
                s += match sub {
                    Subsystem::B => mat[(i * n + k, j * n + k)],
                    Subsystem::A => mat[(k * n + i, k * n + j)],
                };
            }
            out[(i, j)] = s;
        }
    }
    out
}

fn ptranspose(mat: &CMat, n: usize) -> CMat {
    CMat::from_fn(n * n, |r, c| {
        let (m, nn) = (r / n, r % n);
        let (mu, nu) = (c / n, c % n);
        mat[(m * n + nu, mu * n + nn)]
    })
}

/// Partial trace over `sub`. `Tr_B D = I` is the trace-preservation condition.
pub fn partial_trace(d: &ChoiMat, sub: Subsystem) -> CMat {
    ptrace(&d.mat, d.n, sub)
}

/// Transposes every `N×N` block (partial transpose on `B`).
pub fn partial_transpose(d: &ChoiMat) -> ChoiMat {
    ChoiMat {
        n: d.n,
        mat: ptranspose(&d.mat, d.n),
    }
}

/// Hermitian-typed partial trace for internal hot paths.
pub fn partial_trace_herm(h: &HermMat, n: usize, sub: Subsystem) -> HermMat {
    HermMat::from_trusted(ptrace(h.as_cmat(), n, sub))
}

/// Hermitian-typed partial transpose for internal hot paths.
pub fn partial_transpose_herm(h: &HermMat, n: usize) -> HermMat {
    HermMat::from_trusted(ptranspose(h.as_cmat(), n))
}

/// `Φ(ρ)_{nν} = Σ Φ_{nν,mμ} ρ_{mμ}` with no Hermiticity assumption.
pub fn apply_map_raw(phi: &SuperOp, rho: &CMat) -> Result<CMat> {
    let n = phi.n;
    if rho.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: rho.dim(),
        });
    }
    let out = phi.mat.mul_vec(rho.data());
    CMat::from_vec(n, out)
}

/// `Tr_A[D (ρᵀ ⊗ I)]`, an independent route to `Φ(ρ)` through the Choi matrix.
pub fn apply_via_choi(d: &ChoiMat, rho: &CMat) -> Result<CMat> {
    let n = d.n;
    if rho.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: rho.dim(),
        });
    }
    let lifted = rho.transpose().kron(&CMat::identity(n));
    Ok(ptrace(&d.mat.matmul(&lifted), n, Subsystem::A))
}

/// Applies a Hermiticity-preserving map to a Hermitian input.
pub fn apply_map(phi: &SuperOp, rho: &HermMat) -> Result<HermMat> {
    let out = apply_map_raw(phi, rho.as_cmat())?;
    let scale = 1.0 + out.hs_norm();
    let asym = out.max_asymmetry();
    if asym > 1e-10 * scale {
        return Err(Error::NotHermitian(asym));
    }
    Ok(HermMat::from_trusted(out))
}
