//! Alternating minimization of `⟨a⊗η|D|a⊗η⟩` over unit product vectors.

use crate::matcore::{eigh, CMat, HermMat, C64, ZERO};
use crate::randgen::RngStream;

/// Best product pair found. `xi` is the input vector of the map,
/// so `value = ⟨η|Φ(|ξ⟩⟨ξ|)|η⟩`.
#[derive(Clone, Debug)]
pub struct SeesawResult {
    pub value: f64,
    pub xi: Vec<C64>,
    pub eta: Vec<C64>,
    pub restarts_run: usize,
}

/// The `N²` blocks `D_{mμ}` of a Choi matrix.
pub(crate) struct Blocks {
    n: usize,
    blocks: Vec<CMat>,
}

impl Blocks {
    pub(crate) fn new(d: &CMat, n: usize) -> Self {
        let blocks = (0..n * n)
            .map(|k| {
                let (m, mu) = (k / n, k % n);
                CMat::from_fn(n, |i, j| d[(m * n + i, mu * n + j)])
            })
            .collect();
        Self { n, blocks }
    }

    fn block(&self, m: usize, mu: usize) -> &CMat {
        &self.blocks[m * self.n + mu]
    }

    /// `Σ ā_m a_μ D_{mμ}`.
    pub(crate) fn contract_a(&self, a: &[C64]) -> HermMat {
        let n = self.n;
        let mut out = CMat::zeros(n);
        for m in 0..n {
            for mu in 0..n {
                let w = a[m].conj() * a[mu];
                if w == ZERO {
                    continue;
                }
                let b = self.block(m, mu);
                for (o, x) in out.data_mut().iter_mut().zip(b.data()) {
                    *o += w * x;
                }
            }
        }
        HermMat::symmetrize(&out)
    }

    /// `M[m][μ] = ⟨η|D_{mμ}|η⟩`.
    pub(crate) fn contract_b(&self, eta: &[C64]) -> HermMat {
        let n = self.n;
        let m = CMat::from_fn(n, |m, mu| self.block(m, mu).expectation(eta));
        HermMat::symmetrize(&m)
    }
}

fn bottom(h: &HermMat) -> (f64, Vec<C64>) {
    let s = eigh(h).expect("small Hermitian eigensolve");
    (s.min(), s.bottom_vector())
}

fn conj(v: &[C64]) -> Vec<C64> {
    v.iter().map(|z| z.conj()).collect()
}

/// `⟨η|Φ(|ξ⟩⟨ξ|)|η⟩ = ⟨ξ̄⊗η|D|ξ̄⊗η⟩`.
pub(crate) fn product_value(d: &HermMat, n: usize, xi: &[C64], eta: &[C64]) -> f64 {
    let v = crate::randgen::kron_vec(&conj(xi), eta);
    debug_assert_eq!(v.len(), n * n);
    d.expectation(&v).re
}

/// Minimizes `⟨η|Φ(|ξ⟩⟨ξ|)|η⟩` over unit `ξ, η` with random restarts.
///
/// Stops early once the value drops below `stop_below`.
pub fn seesaw_min(
    d: &HermMat,
    n: usize,
    restarts: usize,
    iters: usize,
    rng: &mut RngStream,
    stop_below: Option<f64>,
) -> SeesawResult {
    let blocks = Blocks::new(d.as_cmat(), n);
    let scale = d.hs_norm().max(1e-300);
    let mut best = SeesawResult {
        value: f64::INFINITY,
        xi: vec![],
        eta: vec![],
        restarts_run: 0,
    };
    for r in 0..restarts {
        let mut a = rng.unit_complex(n);
        let mut eta;
        let mut val = f64::INFINITY;
        let mut it = 0;
        loop {
            let (v1, e) = bottom(&blocks.contract_a(&a));
            eta = e;
            let (v2, a_new) = bottom(&blocks.contract_b(&eta));
            a = a_new;
            let v = v1.min(v2);
            it += 1;
            let done = val - v <= 1e-14 * scale || it >= iters;
            val = v;
            if done {
                break;
            }
        }
        // Recompute exactly at the final pair.
        let xi = conj(&a);
        let value = product_value(d, n, &xi, &eta);
        best.restarts_run = r + 1;
        if value < best.value {
            best.value = value;
            best.xi = xi;
            best.eta = eta;
        }
        if let Some(t) = stop_below {
            if best.value < t {
                break;
            }
        }
    }
    best
}

/// `max` (`sign = 1`) or `min` (`sign = -1`) of `⟨ξ⊗η|u|ξ⊗η⟩` over product unit vectors.
pub fn product_extremum(
    u: &HermMat,
    n: usize,
    sign: f64,
    restarts: usize,
    iters: usize,
    rng: &mut RngStream,
) -> SeesawResult {
    let target = if sign > 0.0 { u.scale(-1.0) } else { u.clone() };
    let mut r = seesaw_min(&target, n, restarts, iters, rng, None);
    // seesaw works with ξ̄; return the vector that enters the product state directly.
    r.xi = conj(&r.xi);
    if sign > 0.0 {
        r.value = -r.value;
    }
    r
}

/// Largest `t ≥ 0` with `X + tY` block positive, estimated by see-saw over
/// product directions (each inner step is an exact pencil computation).
///
/// Returns `f64::INFINITY` when no product direction limits the ray.
pub(crate) fn block_positive_ray(
    x: &HermMat,
    y: &HermMat,
    n: usize,
    restarts: usize,
    iters: usize,
    rng: &mut RngStream,
) -> f64 {
    let bx = Blocks::new(x.as_cmat(), n);
    let by = Blocks::new(y.as_cmat(), n);
    let mut best = f64::INFINITY;
    for _ in 0..restarts {
        let mut a = rng.unit_complex(n);
        let mut t_prev = f64::INFINITY;
        for _ in 0..iters {
            let (t1, eta) = match pencil_limit(&bx.contract_a(&a), &by.contract_a(&a)) {
                Some(r) => r,
                None => break,
            };
            let (t2, a_new) = match pencil_limit(&bx.contract_b(&eta), &by.contract_b(&eta)) {
                Some(r) => r,
                None => {
                    best = best.min(t1);
                    break;
                }
            };
            a = a_new;
            let t = t1.min(t2);
            best = best.min(t);
            if !(t < t_prev * (1.0 - 1e-13)) {
                break;
            }
            t_prev = t;
        }
    }
    best
}

/// For `A ≻ 0`: largest `t` with `A + tB ⪰ 0`, and the null vector at that `t`.
/// `None` when `A` is not positive definite; `(∞, v)` when `B ⪰ 0`.
fn pencil_limit(a: &HermMat, b: &HermMat) -> Option<(f64, Vec<C64>)> {
    let l = crate::matcore::cholesky(a.as_cmat())?;
    let spec = crate::matcore::pencil_eigenvalues(&l, b.as_cmat()).ok()?;
    let mu = spec.min();
    if mu >= 0.0 {
        return Some((f64::INFINITY, spec.bottom_vector()));
    }
    // Null vector of A + tB is L^{-†} w for the eigenvector w of μ.
    let w = spec.bottom_vector();
    let v = upper_solve_adjoint(&l, &w);
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    Some((-1.0 / mu, v.into_iter().map(|z| z / norm).collect()))
}

/// Solves `L† v = w` for lower-triangular `L`.
fn upper_solve_adjoint(l: &CMat, w: &[C64]) -> Vec<C64> {
    let n = l.dim();
    let mut v = w.to_vec();
    for i in (0..n).rev() {
        let mut s = v[i];
        for k in i + 1..n {
            s -= l[(k, i)].conj() * v[k];
        }
        v[i] = s / l[(i, i)].conj();
    }
    v
}
