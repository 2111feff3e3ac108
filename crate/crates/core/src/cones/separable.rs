//! Separable decomposition by nonnegative least squares over random product projectors.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::matcore::{HermMat, C64};
use crate::randgen::{kron_vec, RngStream};

/// Pool of product vectors `ξ⊗η` with the real coordinates of their projectors.
struct Pool {
    vectors: Vec<(Vec<C64>, Vec<C64>)>,
    /// Column `j` occupies `cols[j*m .. (j+1)*m]`.
    cols: Vec<f64>,
    m: usize,
}

type PoolKey = (usize, usize, u64);

fn pool_cache() -> &'static Mutex<HashMap<PoolKey, Arc<Pool>>> {
    static CACHE: OnceLock<Mutex<HashMap<PoolKey, Arc<Pool>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn pool(n: usize, size: usize, seed: u64) -> Arc<Pool> {
    let key = (n, size, seed);
    if let Some(p) = pool_cache().lock().expect("pool cache").get(&key) {
        return p.clone();
    }
    let mut rng = RngStream::new(seed, 0x9001);
    let d = n * n;
    let m = d * d;
    let mut vectors = Vec::with_capacity(size);
    let mut cols = Vec::with_capacity(size * m);
    for _ in 0..size {
        let xi = rng.unit_complex(n);
        let eta = rng.unit_complex(n);
        let v = kron_vec(&xi, &eta);
        cols.extend(HermMat::projector(&v).to_real_coords());
        vectors.push((xi, eta));
    }
    let p = Arc::new(Pool { vectors, cols, m });
    pool_cache()
        .lock()
        .expect("pool cache")
        .insert(key, p.clone());
    p
}

/// Result of fitting `σ ≈ Σ w_i P_i` with `w ≥ 0`.
#[derive(Clone, Debug)]
pub struct SeparableFit {
    /// Nonzero terms `(weight, ξ, η)`.
    pub terms: Vec<(f64, Vec<C64>, Vec<C64>)>,
    /// `‖σ − Σ w_i P_i‖_HS`.
    pub residual: f64,
}

/// Fits the unit-trace state `sigma` by a nonnegative combination of `pool_size`
/// seeded random product projectors (Lawson–Hanson active set).
pub fn separable_decomposition(
    sigma: &HermMat,
    n: usize,
    pool_size: usize,
    tol: f64,
    seed: u64,
) -> SeparableFit {
    let pool = pool(n, pool_size, seed);
    let b = sigma.to_real_coords();
    let (x, residual) = nnls(&pool.cols, pool.m, pool_size, &b, tol);
    let terms = x
        .into_iter()
        .map(|(j, w)| (w, pool.vectors[j].0.clone(), pool.vectors[j].1.clone()))
        .collect();
    SeparableFit { terms, residual }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Least squares on the given columns by modified Gram–Schmidt QR.
fn lsq(cols: &[f64], m: usize, active: &[usize], b: &[f64]) -> Vec<f64> {
    let k = active.len();
    let mut q: Vec<Vec<f64>> = Vec::with_capacity(k);
    let mut r = vec![0.0; k * k];
    for (c, &j) in active.iter().enumerate() {
        let mut v = cols[j * m..(j + 1) * m].to_vec();
        for (i, qi) in q.iter().enumerate() {
            let rij = dot(qi, &v);
            r[i * k + c] = rij;
            for (vv, qq) in v.iter_mut().zip(qi) {
                *vv -= rij * qq;
            }
        }
        let norm = dot(&v, &v).sqrt();
        r[c * k + c] = norm;
        if norm > 0.0 {
            for vv in v.iter_mut() {
                *vv /= norm;
            }
        }
        q.push(v);
    }
    let mut z: Vec<f64> = q.iter().map(|qi| dot(qi, b)).collect();
    for i in (0..k).rev() {
        let mut s = z[i];
        for j in i + 1..k {
            s -= r[i * k + j] * z[j];
        }
        z[i] = if r[i * k + i].abs() > 1e-14 {
            s / r[i * k + i]
        } else {
            0.0
        };
    }
    z
}

/// Lawson–Hanson NNLS; returns the nonzero `(index, value)` pairs and the residual norm.
fn nnls(cols: &[f64], m: usize, ncols: usize, b: &[f64], tol: f64) -> (Vec<(usize, f64)>, f64) {
    let mut active: Vec<usize> = Vec::new();
    let mut x: Vec<f64> = Vec::new();
    let mut resid = b.to_vec();
    let mut in_active = vec![false; ncols];
    let bnorm = dot(b, b).sqrt();
    let grad_tol = 1e-12 * bnorm.max(1.0);
    let mut rnorm = bnorm;
    for _outer in 0..(3 * m).max(30) {
        if rnorm <= tol {
            break;
        }
        // Most positive gradient component outside the active set.
        let mut best = (usize::MAX, grad_tol);
        for j in 0..ncols {
            if in_active[j] {
                continue;
            }
            let w = dot(&cols[j * m..(j + 1) * m], &resid);
            if w > best.1 {
                best = (j, w);
            }
        }
        if best.0 == usize::MAX {
            break;
        }
        active.push(best.0);
        in_active[best.0] = true;
        x.push(0.0);
        loop {
            let z = lsq(cols, m, &active, b);
            if z.iter().all(|&v| v > 0.0) {
                x = z;
                break;
            }
            let mut alpha = f64::INFINITY;
            for (xi, zi) in x.iter().zip(&z) {
                if *zi <= 0.0 {
                    let a = xi / (xi - zi);
                    if a < alpha {
                        alpha = a;
                    }
                }
            }
            for (xi, zi) in x.iter_mut().zip(&z) {
                *xi += alpha * (zi - *xi);
            }
            let mut k = 0;
            while k < active.len() {
                if x[k] <= 1e-15 {
                    in_active[active[k]] = false;
                    active.remove(k);
                    x.remove(k);
                } else {
                    k += 1;
                }
            }
            if active.is_empty() {
                break;
            }
        }
        resid = b.to_vec();
        for (&j, &w) in active.iter().zip(&x) {
            for (r, c) in resid.iter_mut().zip(&cols[j * m..(j + 1) * m]) {
                *r -= w * c;
            }
        }
        rnorm = dot(&resid, &resid).sqrt();
    }
    (active.into_iter().zip(x).collect(), rnorm)
}
