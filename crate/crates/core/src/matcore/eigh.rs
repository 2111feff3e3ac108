//! Cyclic Jacobi eigensolver for complex Hermitian matrices.

use super::{CMat, HermMat, C64, ZERO};
use crate::error::{Error, Result};

/// Sweep cap for the cyclic Jacobi iteration.
pub const MAX_SWEEPS: usize = 100;

/// Full spectral decomposition `A = U diag(λ) U†`, eigenvalues descending.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub values: Vec<f64>,
    /// Column `k` is the eigenvector of `values[k]`.
    pub vectors: CMat,
}

impl Spectrum {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn max(&self) -> f64 {
        self.values[0]
    }

    pub fn min(&self) -> f64 {
        *self.values.last().expect("empty spectrum")
    }

    pub fn vector(&self, k: usize) -> Vec<C64> {
        let d = self.dim();
        (0..d).map(|i| self.vectors[(i, k)]).collect()
    }

    /// Eigenvector of the smallest eigenvalue.
    pub fn bottom_vector(&self) -> Vec<C64> {
        self.vector(self.dim() - 1)
    }

    pub fn top_vector(&self) -> Vec<C64> {
        self.vector(0)
    }

    pub fn reconstruct(&self) -> HermMat {
        self.reconstruct_with(|x| x)
    }

    /// `U diag(f(λ)) U†`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> HermMat {
        let d = self.dim();
        let fv: Vec<f64> = self.values.iter().map(|&x| f(x)).collect();
        let u = &self.vectors;
        let m = CMat::from_fn(d, |i, j| {
            let mut acc = ZERO;
            for (k, &w) in fv.iter().enumerate() {
                if w != 0.0 {
                    acc += u[(i, k)] * u[(j, k)].conj() * w;
                }
            }
            acc
        });
        HermMat::from_trusted(m)
    }
}

/// Spectral decomposition by cyclic complex Jacobi rotations.
pub fn eigh(a: &HermMat) -> Result<Spectrum> {
    jacobi(a.as_cmat())
}

fn jacobi(input: &CMat) -> Result<Spectrum> {
    let n = input.dim();
    let mut a = input.data().to_vec();
    let mut v = CMat::identity(n).into_vec();
    let norm = input.hs_norm();

    let off_norm = |a: &[C64]| -> f64 {
        let mut s = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                s += a[p * n + q].norm_sqr();
            }
        }
        (2.0 * s).sqrt()
    };

    let target = 4.0 * f64::EPSILON * norm;
    let mut converged = norm == 0.0 || n < 2;
    let mut sweeps = 0;
    while !converged && sweeps < MAX_SWEEPS {
        if off_norm(&a) <= target {
            converged = true;
            break;
        }
        sweeps += 1;
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = a[p * n + q];
                let mag = apq.norm();
                if mag <= f64::MIN_POSITIVE {
                    continue;
                }
                let app = a[p * n + p].re;
                let aqq = a[q * n + q].re;
                // Skip rotations that would not change the diagonal in floating point.
                if sweeps > 4 && mag * 1e18 < app.abs().min(aqq.abs()) {
                    a[p * n + q] = ZERO;
                    a[q * n + p] = ZERO;
                    continue;
                }
                let theta = (aqq - app) / (2.0 * mag);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let e = apq / mag;
                let ec = e.conj();

                // A <- A J with J = [[c, s], [-s ē, c ē]] on columns (p, q).
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = akp * c - akq * ec * s;
                    a[k * n + q] = akp * s + akq * ec * c;
                }
                // A <- J† A on rows (p, q).
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = apk * c - aqk * e * s;
                    a[q * n + k] = apk * s + aqk * e * c;
                }
                a[p * n + q] = ZERO;
                a[q * n + p] = ZERO;
                a[p * n + p].im = 0.0;
                a[q * n + q].im = 0.0;
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = vkp * c - vkq * ec * s;
                    v[k * n + q] = vkp * s + vkq * ec * c;
                }
            }
        }
    }
    if !converged && off_norm(&a) > target {
        return Err(Error::NoConvergence {
            sweeps,
            off_norm: off_norm(&a),
            norm,
        });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j * n + j].re.total_cmp(&a[i * n + i].re));
    let values = order.iter().map(|&i| a[i * n + i].re).collect();
    let vectors = CMat::from_fn(n, |r, k| v[r * n + order[k]]);
    Ok(Spectrum { values, vectors })
}

/// Smallest eigenvalue.
pub fn min_eigenvalue(a: &HermMat) -> Result<f64> {
    Ok(eigh(a)?.min())
}

/// Cholesky test for `A + shift·I ≻ 0`.
///
/// Much cheaper than a full eigendecomposition; used by membership
/// bisections. Only the lower triangle of `a` is read.
pub fn is_psd_shifted(a: &CMat, shift: f64) -> bool {
    let n = a.dim();
    let mut l = vec![ZERO; n * n];
    for j in 0..n {
        let mut diag = a[(j, j)].re + shift;
        for k in 0..j {
            diag -= l[j * n + k].norm_sqr();
        }
        if diag.is_nan() || diag <= 0.0 {
            return false;
        }
        let ljj = diag.sqrt();
        l[j * n + j] = C64::new(ljj, 0.0);
        for i in j + 1..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k].conj();
            }
            l[i * n + j] = s / ljj;
        }
    }
    true
}

/// Lower Cholesky factor of a positive definite matrix.
pub(crate) fn cholesky(a: &CMat) -> Option<CMat> {
    let n = a.dim();
    let mut l = CMat::zeros(n);
    for j in 0..n {
        let mut diag = a[(j, j)].re;
        for k in 0..j {
            diag -= l[(j, k)].norm_sqr();
        }
        if diag.is_nan() || diag <= 0.0 {
            return None;
        }
        let ljj = diag.sqrt();
        l[(j, j)] = C64::new(ljj, 0.0);
        for i in j + 1..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s / ljj;
        }
    }
    Some(l)
}

/// Solves `L X = B` for lower-triangular `L`, column by column.
pub(crate) fn lower_solve(l: &CMat, b: &CMat) -> CMat {
    let n = l.dim();
    let mut x = b.clone();
    for col in 0..n {
        for i in 0..n {
            let mut s = x[(i, col)];
            for k in 0..i {
                s -= l[(i, k)] * x[(k, col)];
            }
            x[(i, col)] = s / l[(i, i)];
        }
    }
    x
}

/// Eigenvalues of `L⁻¹ B L⁻†`, the pencil `(B, LL†)` reduced to standard form.
pub(crate) fn pencil_eigenvalues(l: &CMat, b: &CMat) -> Result<Spectrum> {
    let y = lower_solve(l, b); // L⁻¹ B
    let z = lower_solve(l, &y.adjoint()); // L⁻¹ (L⁻¹ B)† = L⁻¹ B L⁻†
    eigh(&HermMat::from_trusted(z))
}

/// For positive definite `A`: the interval `[t−, t+]` of `t` with `A + tB ⪰ 0`.
///
/// `None` when `A` fails the Cholesky factorization.
pub(crate) fn psd_interval(a: &CMat, b: &CMat) -> Option<(f64, f64)> {
    let l = cholesky(a)?;
    let spec = pencil_eigenvalues(&l, b).ok()?;
    let (lo, hi) = (spec.min(), spec.max());
    let t_plus = if lo < 0.0 { -1.0 / lo } else { f64::INFINITY };
    let t_minus = if hi > 0.0 {
        -1.0 / hi
    } else {
        f64::NEG_INFINITY
    };
    Some((t_minus, t_plus))
}
