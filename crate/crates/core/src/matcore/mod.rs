//! Dense complex linear algebra and the map/Choi-matrix transforms.
//!
//! Conventions (fixed once, used everywhere):
//!
//! * A superoperator `Φ` on `M_N` is an `N²×N²` matrix with compound row
//!   `(n, ν)` and column `(m, μ)`, both flattened as `first * N + second`, so
//!   that `Φ(ρ)_{nν} = Σ Φ[(n,ν),(m,μ)] ρ_{mμ}`.
//! * The Choi (dynamical) matrix is the reshuffle `D[(m,n),(μ,ν)] = Φ[(n,ν),(m,μ)]`.
//!   Viewed as an `N×N` block matrix, block `(m, μ)` is `Φ(E_{mμ})`.
//!   The block index is subsystem `A` (input), the in-block index is `B` (output).
//! * `Tr_B D` sums over the in-block index and equals `I_N` exactly for
//!   trace-preserving maps; `D^{T_B}` transposes every block.

mod choi;
mod eigh;
mod json;

pub use choi::{
    apply_map, apply_map_raw, apply_via_choi, choi_to_map, map_to_choi, partial_trace,
    partial_trace_herm, partial_transpose, partial_transpose_herm, ChoiMat, Subsystem, SuperOp,
};
pub(crate) use eigh::{cholesky, pencil_eigenvalues, psd_interval};
pub use eigh::{eigh, is_psd_shifted, min_eigenvalue, Spectrum, MAX_SWEEPS};
pub use json::{matrix_from_json, matrix_to_json, MatrixJson};

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Absolute Hermiticity tolerance used when constructing a [`HermMat`].
pub const HERMITIAN_TOL: f64 = 1e-12;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Dense square complex matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct CMat {
    dim: usize,
    data: Vec<C64>,
}

impl CMat {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_vec(dim: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                got: data.len(),
            });
        }
        Ok(Self { dim, data })
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(f(i, j));
            }
        }
        Self { dim, data }
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &x) in diag.iter().enumerate() {
            m[(i, i)] = C64::new(x, 0.0);
        }
        m
    }

    /// Matrix unit `E_{ij}`.
    pub fn unit(dim: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(dim);
        m[(i, j)] = ONE;
        m
    }

    /// `|v⟩⟨w|`.
    pub fn outer(v: &[C64], w: &[C64]) -> Self {
        assert_eq!(v.len(), w.len());
        Self::from_fn(v.len(), |i, j| v[i] * w[j].conj())
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn data(&self) -> &[C64] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<C64> {
        self.data
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "matmul dimension mismatch");
        let d = self.dim;
        let mut out = vec![ZERO; d * d];
        for i in 0..d {
            let row = &self.data[i * d..(i + 1) * d];
            let dst = &mut out[i * d..(i + 1) * d];
            for (k, &a) in row.iter().enumerate() {
                if a == ZERO {
                    continue;
                }
                let orow = &other.data[k * d..(k + 1) * d];
                for (o, &b) in dst.iter_mut().zip(orow) {
                    *o += a * b;
                }
            }
        }
        Self { dim: d, data: out }
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.dim, v.len());
        self.data
            .chunks_exact(self.dim)
            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `⟨v|A|v⟩`.
    pub fn expectation(&self, v: &[C64]) -> C64 {
        self.mul_vec(v)
            .iter()
            .zip(v)
            .map(|(av, x)| x.conj() * av)
            .sum()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn scale_c(&self, s: C64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    /// `self += s * other`.
    pub fn axpy(&mut self, s: f64, other: &Self) {
        assert_eq!(self.dim, other.dim);
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b * s;
        }
    }

    pub fn add_identity(&mut self, s: f64) {
        for i in 0..self.dim {
            self.data[i * self.dim + i] += s;
        }
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn hs_norm_sqr(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn hs_norm(&self) -> f64 {
        self.hs_norm_sqr().sqrt()
    }

    /// `Re Tr(A† B)`, the real Hilbert-Schmidt pairing.
    pub fn hs_dot(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.re * b.re + a.im * b.im)
            .sum()
    }

    /// Largest `|a_jk - conj(a_kj)|`.
    pub fn max_asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.dim {
            for j in i..self.dim {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.max_asymmetry() <= tol
    }

    pub fn kron(&self, other: &Self) -> Self {
        let (a, b) = (self.dim, other.dim);
        Self::from_fn(a * b, |i, j| self[(i / b, j / b)] * other[(i % b, j % b)])
    }

    /// `U A U†`.
    pub fn conjugate_by(&self, u: &Self) -> Self {
        u.matmul(self).matmul(&u.adjoint())
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

impl Index<(usize, usize)> for CMat {
    type Output = C64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for CMat {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.dim + j]
    }
}

impl Add for &CMat {
    type Output = CMat;
    fn add(self, rhs: &CMat) -> CMat {
        assert_eq!(self.dim, rhs.dim);
        CMat {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &CMat {
    type Output = CMat;
    fn sub(self, rhs: &CMat) -> CMat {
        assert_eq!(self.dim, rhs.dim);
        CMat {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl Mul for &CMat {
    type Output = CMat;
    fn mul(self, rhs: &CMat) -> CMat {
        self.matmul(rhs)
    }
}

/// Dense Hermitian matrix. Construction rejects inputs whose asymmetry
/// exceeds [`HERMITIAN_TOL`]; use [`HermMat::symmetrize`] to repair drift.
#[derive(Clone, Debug, PartialEq)]
pub struct HermMat(CMat);

impl HermMat {
    pub fn new(m: CMat) -> Result<Self> {
        let asym = m.max_asymmetry();
        if asym > HERMITIAN_TOL {
            return Err(Error::NotHermitian(asym));
        }
        Ok(Self(m))
    }

    /// `(M + M†)/2`, always Hermitian.
    pub fn symmetrize(m: &CMat) -> Self {
        let d = m.dim();
        Self(CMat::from_fn(d, |i, j| {
            (m[(i, j)] + m[(j, i)].conj()) * 0.5
        }))
    }

    /// Wraps a matrix already known to be Hermitian up to rounding,
    /// symmetrizing it in place.
    pub(crate) fn from_trusted(m: CMat) -> Self {
        let d = m.dim();
        let mut m = m;
        for i in 0..d {
            m[(i, i)].im = 0.0;
            for j in i + 1..d {
                let avg = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
                m[(i, j)] = avg;
                m[(j, i)] = avg.conj();
            }
        }
        Self(m)
    }

    pub fn zeros(d: usize) -> Self {
        Self(CMat::zeros(d))
    }

    pub fn identity(d: usize) -> Self {
        Self(CMat::identity(d))
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        Self(CMat::from_real_diag(diag))
    }

    /// Maximally mixed state `I_d / d`.
    pub fn maximally_mixed(d: usize) -> Self {
        Self(CMat::identity(d).scale(1.0 / d as f64))
    }

    /// Rank-one projector `|v⟩⟨v|` (not normalized).
    pub fn projector(v: &[C64]) -> Self {
        Self::from_trusted(CMat::outer(v, v))
    }

    pub fn as_cmat(&self) -> &CMat {
        &self.0
    }

    pub fn into_cmat(self) -> CMat {
        self.0
    }

    pub fn trace_re(&self) -> f64 {
        self.0.trace().re
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(self.0.scale(s))
    }

    pub fn add(&self, other: &Self) -> Self {
        Self(&self.0 + &other.0)
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self(&self.0 - &other.0)
    }

    pub fn axpy(&mut self, s: f64, other: &Self) {
        self.0.axpy(s, &other.0);
    }

    /// `Tr(AB)` for Hermitian arguments, which is real.
    pub fn hs_inner(&self, other: &Self) -> f64 {
        self.0.hs_dot(&other.0)
    }

    pub fn eigh(&self) -> Result<Spectrum> {
        eigh(self)
    }

    /// Applies `f` to the spectrum.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        let spec = self.eigh()?;
        Ok(spec.reconstruct_with(f))
    }

    /// Projection onto the PSD cone in Hilbert-Schmidt norm.
    pub fn psd_part(&self) -> Result<Self> {
        self.map_spectrum(|x| x.max(0.0))
    }

    /// Trace norm `Σ|λ|`.
    pub fn trace_norm(&self) -> Result<f64> {
        Ok(self.eigh()?.values.iter().map(|x| x.abs()).sum())
    }

    /// Operator norm `max|λ|`.
    pub fn op_norm(&self) -> Result<f64> {
        Ok(self
            .eigh()?
            .values
            .iter()
            .fold(0.0f64, |acc, x| acc.max(x.abs())))
    }

    /// Real coordinates in an orthonormal basis of the Hermitian matrices
    /// (diagonal, then `√2 Re`, `√2 Im` of the strict upper triangle).
    pub fn to_real_coords(&self) -> Vec<f64> {
        let d = self.dim();
        let mut out = Vec::with_capacity(d * d);
        for i in 0..d {
            out.push(self.0[(i, i)].re);
        }
        let s = std::f64::consts::SQRT_2;
        for i in 0..d {
            for j in i + 1..d {
                let z = self.0[(i, j)];
                out.push(s * z.re);
                out.push(s * z.im);
            }
        }
        out
    }
}

impl std::ops::Deref for HermMat {
    type Target = CMat;
    fn deref(&self) -> &CMat {
        &self.0
    }
}

impl TryFrom<CMat> for HermMat {
    type Error = Error;
    fn try_from(m: CMat) -> Result<Self> {
        Self::new(m)
    }
}

/// `Tr(A B)` for Hermitian `A`, `B` of equal size.
pub fn hs_inner(a: &HermMat, b: &HermMat) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    Ok(a.hs_inner(b))
}

/// HS-orthonormal basis of the real space of `d×d` Hermitian matrices.
///
/// The first `d²-1` elements are traceless (generalized Gell-Mann); when
/// `include_identity` is set the normalized identity `I/√d` is appended.
pub fn hermitian_basis(d: usize, include_identity: bool) -> Vec<HermMat> {
    let mut basis = Vec::with_capacity(d * d);
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    for j in 0..d {
        for k in j + 1..d {
            let mut sym = CMat::zeros(d);
            sym[(j, k)] = C64::new(inv_sqrt2, 0.0);
            sym[(k, j)] = C64::new(inv_sqrt2, 0.0);
            basis.push(HermMat(sym));
            let mut asym = CMat::zeros(d);
            asym[(j, k)] = C64::new(0.0, -inv_sqrt2);
            asym[(k, j)] = C64::new(0.0, inv_sqrt2);
            basis.push(HermMat(asym));
        }
    }
    for l in 1..d {
        let norm = ((l * (l + 1)) as f64).sqrt();
        let mut diag = vec![0.0; d];
        for x in diag.iter_mut().take(l) {
            *x = 1.0 / norm;
        }
        diag[l] = -(l as f64) / norm;
        basis.push(HermMat::from_real_diag(&diag));
    }
    if include_identity {
        basis.push(HermMat::identity(d).scale(1.0 / (d as f64).sqrt()));
    }
    basis
}

#[cfg(test)]
mod tests {
    use super::*;

    fn swap(n: usize) -> CMat {
        CMat::from_fn(n * n, |r, c| {
            let (a, b) = (r / n, r % n);
            if c == b * n + a {
                ONE
            } else {
                ZERO
            }
        })
    }

    #[test]
    fn hs_inner_examples() {
        let i2 = HermMat::identity(2);
        assert_eq!(hs_inner(&i2, &i2).unwrap(), 2.0);
        let e11 = HermMat::from_real_diag(&[1.0, 0.0]);
        let e22 = HermMat::from_real_diag(&[0.0, 1.0]);
        assert_eq!(hs_inner(&e11, &e22).unwrap(), 0.0);

        // ⟨SWAP, ρ_max⟩ = ⟨ξ|SWAP|ξ⟩ = ⟨ξ|ξ⟩ = 2 for N = 2.
        let rho_max = ChoiMat::max_entangled(2).to_herm().unwrap();
        let sw = HermMat::new(swap(2)).unwrap();
        assert!((hs_inner(&sw, &rho_max).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn hs_inner_rejects_mismatch() {
        let err = hs_inner(&HermMat::identity(2), &HermMat::identity(3)).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
    }

    #[test]
    fn construction_rejects_non_hermitian() {
        let mut m = CMat::identity(2);
        m[(0, 1)] = C64::new(1e-6, 0.0);
        assert!(matches!(
            HermMat::new(m.clone()),
            Err(Error::NotHermitian(_))
        ));
        let fixed = HermMat::symmetrize(&m);
        assert!(fixed.is_hermitian(0.0));
        assert_eq!(fixed[(0, 1)].re, 5e-7);
    }

    #[test]
    fn gell_mann_basis_is_orthonormal() {
        for d in 1..5 {
            let basis = hermitian_basis(d, true);
            assert_eq!(basis.len(), d * d);
            for (i, a) in basis.iter().enumerate() {
                for (j, b) in basis.iter().enumerate() {
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!((a.hs_inner(b) - expect).abs() < 1e-14);
                }
            }
            for b in &basis[..d * d - 1] {
                assert!(b.trace_re().abs() < 1e-14);
            }
        }
    }

    #[test]
    fn real_coords_are_isometric() {
        let a = HermMat::symmetrize(&CMat::from_fn(3, |i, j| {
            C64::new((i + 2 * j) as f64, (i as f64) - (j as f64))
        }));
        let x = a.to_real_coords();
        let n2: f64 = x.iter().map(|v| v * v).sum();
        assert!((n2 - a.hs_norm_sqr()).abs() < 1e-12);
    }

    #[test]
    fn kron_matches_block_layout() {
        let a = CMat::from_fn(2, |i, j| C64::new((i * 2 + j) as f64, 0.0));
        let b = CMat::identity(2);
        let k = a.kron(&b);
        assert_eq!(k[(2, 0)], a[(1, 0)]);
        assert_eq!(k[(3, 1)], a[(1, 0)]);
        assert_eq!(k[(3, 0)], ZERO);
    }
}
