//! Random ensembles and the hit-and-run sampler.

mod body;
mod dump;
mod walk;

pub use body::{BallBody, Chord, ConvexBody, CubeBody, MatrixBody, OperatorInterval, StateSpace};
pub use dump::{read_sample_dump, write_sample_csv, write_sample_dump, DumpHeader, DUMP_FORMAT};
pub use walk::{hit_and_run_step, run_walk, WalkConfig, WalkState, WalkStats, MIN_CHORD};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::matcore::{partial_trace_herm, CMat, ChoiMat, HermMat, Subsystem, C64, ZERO};

/// Reproducible random stream identified by `(seed, stream_id)`.
#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha20Rng,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        Self {
            seed,
            stream_id,
            rng,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Independent child stream; depends only on `(seed, stream_id, tag)`.
    pub fn derive(&self, tag: u64) -> Self {
        let s = splitmix64(self.seed ^ splitmix64(self.stream_id.wrapping_add(0x51ed)));
        Self::new(splitmix64(s ^ tag.wrapping_mul(0x2545_f491_4f6c_dd1d)), tag)
    }

    pub fn uniform(&mut self) -> f64 {
        // 53 random mantissa bits.
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.rng)
    }

    /// Standard complex Gaussian, `E|z|² = 1`.
    pub fn complex_normal(&mut self) -> C64 {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        C64::new(self.normal() * s, self.normal() * s)
    }

    pub fn index(&mut self, n: usize) -> usize {
        ((self.uniform() * n as f64) as usize).min(n - 1)
    }

    /// Uniform point on the unit sphere of `R^m`.
    pub fn unit_real(&mut self, m: usize) -> Vec<f64> {
        loop {
            let v: Vec<f64> = (0..m).map(|_| self.normal()).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 1e-300 {
                return v.into_iter().map(|x| x / norm).collect();
            }
        }
    }

    /// Uniform point on the unit sphere of `C^d`.
    pub fn unit_complex(&mut self, d: usize) -> Vec<C64> {
        loop {
            let v: Vec<C64> = (0..d).map(|_| self.complex_normal()).collect();
            let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm > 1e-300 {
                return v.into_iter().map(|z| z / norm).collect();
            }
        }
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }
    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }
    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

/// `rows×cols` matrix of iid standard complex Gaussians, row-major.
pub fn ginibre(rows: usize, cols: usize, rng: &mut RngStream) -> Vec<C64> {
    (0..rows * cols).map(|_| rng.complex_normal()).collect()
}

fn ginibre_square(d: usize, rng: &mut RngStream) -> CMat {
    CMat::from_vec(d, ginibre(d, d, rng)).expect("square draw")
}

/// Hilbert-Schmidt random density matrix `GG†/Tr(GG†)`.
pub fn random_state_hs(d: usize, rng: &mut RngStream) -> HermMat {
    let g = ginibre_square(d, rng);
    let w = g.matmul(&g.adjoint());
    let tr = w.trace().re;
    HermMat::symmetrize(&w.scale(1.0 / tr))
}

/// Haar unitary from Householder QR of a Ginibre matrix, with `diag(R) > 0`.
pub fn haar_unitary(d: usize, rng: &mut RngStream) -> CMat {
    let mut a = ginibre_square(d, rng);
    let mut q = CMat::identity(d);
    for k in 0..d {
        let norm: f64 = (k..d).map(|i| a[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let x0 = a[(k, k)];
        let phase = if x0.norm() > 0.0 {
            x0 / x0.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        // v = x + phase·‖x‖ e_k reflects x onto −phase·‖x‖ e_k.
        let mut v: Vec<C64> = (k..d).map(|i| a[(i, k)]).collect();
        v[0] += phase * norm;
        let vnorm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        for j in 0..d {
            let dot: C64 = v
                .iter()
                .enumerate()
                .map(|(i, vi)| vi.conj() * a[(k + i, j)])
                .sum();
            let f = dot * (2.0 / vnorm2);
            for (i, vi) in v.iter().enumerate() {
                a[(k + i, j)] -= vi * f;
            }
        }
        // Accumulate Q = H_0 H_1 ... by right-multiplying.
        for r in 0..d {
            let dot: C64 = v.iter().enumerate().map(|(i, vi)| q[(r, k + i)] * vi).sum();
            let f = dot * (2.0 / vnorm2);
            for (i, vi) in v.iter().enumerate() {
                q[(r, k + i)] -= f * vi.conj();
            }
        }
    }
    // A now holds R; rescale columns of Q so that diag(R) is positive.
    for k in 0..d {
        let r = a[(k, k)];
        let ph = if r.norm() > 0.0 {
            r / r.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        for i in 0..d {
            q[(i, k)] *= ph;
        }
    }
    q
}

/// Random CP trace-preserving map: `D = (Y^{-1/2} ⊗ I) W (Y^{-1/2} ⊗ I)`
/// with `W = GG†` and `Y = Tr_B W`. Induced measure, not uniform on the section.
pub fn random_channel_tp(n: usize, rng: &mut RngStream) -> Result<ChoiMat> {
    if n < 2 {
        return Err(Error::InvalidParams(format!(
            "N must be at least 2, got {n}"
        )));
    }
    for _ in 0..8 {
        let g = ginibre_square(n * n, rng);
        let w = HermMat::symmetrize(&g.matmul(&g.adjoint()));
        let y = partial_trace_herm(&w, n, Subsystem::B);
        let spec = y.eigh()?;
        if spec.min() <= 1e-12 * spec.max() {
            continue;
        }
        let yinv = spec.reconstruct_with(|x| 1.0 / x.sqrt());
        let lift = yinv.kron(&CMat::identity(n));
        let d = HermMat::symmetrize(&lift.matmul(w.as_cmat()).matmul(&lift));
        return ChoiMat::from_herm(n, d);
    }
    Err(Error::Singular("Tr_B W singular on repeated draws".into()))
}

/// `|ξ⟩⟨ξ| ⊗ |η⟩⟨η|` with uniform unit `ξ`, `η ∈ C^N`.
pub fn random_product_state(n: usize, rng: &mut RngStream) -> HermMat {
    let xi = rng.unit_complex(n);
    let eta = rng.unit_complex(n);
    HermMat::projector(&kron_vec(&xi, &eta))
}

pub fn kron_vec(a: &[C64], b: &[C64]) -> Vec<C64> {
    let mut out = vec![ZERO; a.len() * b.len()];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i * b.len() + j] = x * y;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::{eigh, partial_transpose_herm};

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let mut a = RngStream::new(42, 3);
        let mut b = RngStream::new(42, 3);
        let mut c = RngStream::new(42, 4);
        let xa: Vec<u64> = (0..16).map(|_| a.next_u64()).collect();
        let xb: Vec<u64> = (0..16).map(|_| b.next_u64()).collect();
        let xc: Vec<u64> = (0..16).map(|_| c.next_u64()).collect();
        assert_eq!(xa, xb);
        assert_ne!(xa, xc);
        let d1 = RngStream::new(1, 0).derive(5).next_u64();
        let d2 = RngStream::new(1, 0).derive(5).next_u64();
        assert_eq!(d1, d2);
    }

    #[test]
    fn ginibre_moments() {
        let mut rng = RngStream::new(1, 0);
        let n = 1_000_000;
        let g = ginibre(1000, 1000, &mut rng);
        let mean: C64 = g.iter().sum::<C64>() / n as f64;
        let second: f64 = g.iter().map(|z| z.norm_sqr()).sum::<f64>() / n as f64;
        // Standard error of the mean is 1/√n per component.
        assert!(mean.norm() < 4.0 * (1.0 / n as f64).sqrt());
        assert!((second - 1.0).abs() < 0.01);

        let first = ginibre(1, 1, &mut RngStream::new(9, 0))[0];
        assert_eq!(first, ginibre(1, 1, &mut RngStream::new(9, 0))[0]);
    }

    #[test]
    fn hs_states_are_states_with_flat_mean() {
        let mut rng = RngStream::new(2, 0);
        let mut acc = CMat::zeros(4);
        let draws = 100_000;
        for _ in 0..draws {
            let rho = random_state_hs(4, &mut rng);
            acc.axpy(1.0, rho.as_cmat());
        }
        let mean = acc.scale(1.0 / draws as f64);
        assert!(mean.max_abs_diff(&CMat::identity(4).scale(0.25)) < 1e-2);

        for _ in 0..200 {
            let rho = random_state_hs(3, &mut rng);
            assert!((rho.trace_re() - 1.0).abs() < 1e-12);
            assert!(eigh(&rho).unwrap().min() > -1e-12);
        }
        let one = random_state_hs(1, &mut rng);
        assert!((one[(0, 0)].re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn haar_unitaries() {
        let mut rng = RngStream::new(3, 0);
        for d in 1..8 {
            let u = haar_unitary(d, &mut rng);
            assert!(u.matmul(&u.adjoint()).max_abs_diff(&CMat::identity(d)) < 1e-10);
        }
        let u1 = haar_unitary(1, &mut rng);
        assert!((u1[(0, 0)].norm() - 1.0).abs() < 1e-14);

        // E|U_11|² = 1/d; the variance of |U_11|² is (d−1)/(d²(d+1)).
        let d = 3;
        let draws = 100_000;
        let mut s = 0.0;
        for _ in 0..draws {
            s += haar_unitary(d, &mut rng)[(0, 0)].norm_sqr();
        }
        let mean = s / draws as f64;
        let var = (d - 1) as f64 / ((d * d * (d + 1)) as f64);
        let se = (var / draws as f64).sqrt();
        assert!((mean - 1.0 / 3.0).abs() < 3.0 * se, "mean {mean}, se {se}");
    }

    #[test]
    fn random_channels_are_cptp() {
        let mut rng = RngStream::new(4, 0);
        let mut acc = CMat::zeros(4);
        let draws = 10_000;
        for i in 0..draws {
            let d = random_channel_tp(2, &mut rng).unwrap();
            let h = d.to_herm().unwrap();
            acc.axpy(1.0, h.as_cmat());
            if i < 100 {
                assert!(eigh(&h).unwrap().min() > -1e-10);
                let tb = partial_trace_herm(&h, 2, Subsystem::B);
                assert!(tb.max_abs_diff(&CMat::identity(2)) < 1e-10);
                assert!((h.trace_re() - 2.0).abs() < 1e-10);
            }
        }
        let mean = HermMat::symmetrize(&acc.scale(1.0 / draws as f64));
        let tb = partial_trace_herm(&mean, 2, Subsystem::B);
        assert!(tb.max_abs_diff(&CMat::identity(2)) < 1e-10);
        assert!(random_channel_tp(1, &mut rng).is_err());
    }

    #[test]
    fn product_states_are_pure_and_ppt() {
        let mut rng = RngStream::new(5, 0);
        for n in 2..4 {
            let p = random_product_state(n, &mut rng);
            assert!((p.trace_re() - 1.0).abs() < 1e-12);
            let s = eigh(&p).unwrap();
            assert!((s.max() - 1.0).abs() < 1e-12);
            assert!(s.values[1].abs() < 1e-12);
            assert!(eigh(&partial_transpose_herm(&p, n)).unwrap().min() > -1e-12);
        }
    }
}
