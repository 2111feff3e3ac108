//! Convex bodies in coordinates, with chord computations for hit-and-run.
//!
//! A matrix body is parametrized as `X(x) = C + Σ x_k B_k` with an
//! HS-orthonormal tangent basis `B_k`, so the walk runs in `R^m` and
//! affine constraints (trace, partial trace) hold by construction.

use crate::cones::{BodySpec, ConeId, Slice, Status};
use crate::error::{Error, Result};
use crate::matcore::{
    hermitian_basis, partial_trace_herm, partial_transpose_herm, psd_interval, CMat, ChoiMat,
    HermMat, Subsystem, C64,
};

use super::RngStream;

/// Parameter range `[lo, hi]` of a chord `x + t·d`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Chord {
    pub lo: f64,
    pub hi: f64,
}

impl Chord {
    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn is_empty(&self) -> bool {
        !(self.hi > self.lo)
    }

    /// Intersection with the ball `|x + t d| ≤ r` (unit `d`).
    pub fn clip_ball(self, x: &[f64], d: &[f64], r: f64) -> Chord {
        let b: f64 = x.iter().zip(d).map(|(a, c)| a * c).sum();
        let c: f64 = x.iter().map(|a| a * a).sum::<f64>() - r * r;
        let disc = b * b - c;
        if disc < 0.0 {
            return Chord { lo: 0.0, hi: 0.0 };
        }
        let s = disc.sqrt();
        Chord {
            lo: self.lo.max(-b - s),
            hi: self.hi.min(-b + s),
        }
    }
}

/// A convex body in `R^m` containing a ball about the origin.
pub trait ConvexBody: Send + Sync {
    fn dim(&self) -> usize;
    fn contains(&self, x: &[f64]) -> bool;
    /// Radius of a ball about the origin inside the body.
    fn inradius(&self) -> f64;
    /// Radius of a ball about the origin containing the body.
    fn outradius(&self) -> f64;
    fn label(&self) -> String;

    /// Chord through the interior point `x` along the unit vector `d`.
    fn chord(&self, x: &[f64], d: &[f64]) -> Chord {
        bisection_chord(
            |p| self.contains(p),
            x,
            d,
            self.inradius(),
            self.outradius(),
        )
    }
}

fn along(x: &[f64], d: &[f64], t: f64) -> Vec<f64> {
    x.iter().zip(d).map(|(a, b)| a + t * b).collect()
}

/// Doubling then 40 bisection steps on each side, using only a membership test.
pub(crate) fn bisection_chord(
    contains: impl Fn(&[f64]) -> bool,
    x: &[f64],
    d: &[f64],
    inradius: f64,
    outradius: f64,
) -> Chord {
    let side = |sign: f64| -> f64 {
        let cap = 2.0 * outradius;
        let mut inside = 0.0;
        let mut step = (inradius * 1e-3).max(1e-12);
        let outside = loop {
            let t = inside + step;
            if t > cap {
                break cap;
            }
            if contains(&along(x, d, sign * t)) {
                inside = t;
                step *= 2.0;
            } else {
                break t;
            }
        };
        let (mut a, mut b) = (inside, outside);
        for _ in 0..40 {
            let m = 0.5 * (a + b);
            if contains(&along(x, d, sign * m)) {
                a = m;
            } else {
                b = m;
            }
        }
        a
    };
    Chord {
        lo: -side(-1.0),
        hi: side(1.0),
    }
}

/// Euclidean ball of radius `r` about the origin of `R^m`.
#[derive(Clone, Debug)]
pub struct BallBody {
    pub m: usize,
    pub r: f64,
}

impl ConvexBody for BallBody {
    fn dim(&self) -> usize {
        self.m
    }
    fn contains(&self, x: &[f64]) -> bool {
        x.iter().map(|a| a * a).sum::<f64>() <= self.r * self.r
    }
    fn inradius(&self) -> f64 {
        self.r
    }
    fn outradius(&self) -> f64 {
        self.r
    }
    fn label(&self) -> String {
        format!("ball(m={}, r={})", self.m, self.r)
    }
    fn chord(&self, x: &[f64], d: &[f64]) -> Chord {
        Chord {
            lo: f64::NEG_INFINITY,
            hi: f64::INFINITY,
        }
        .clip_ball(x, d, self.r)
    }
}

/// Cube `[−a, a]^m`.
#[derive(Clone, Debug)]
pub struct CubeBody {
    pub m: usize,
    pub half: f64,
}

impl ConvexBody for CubeBody {
    fn dim(&self) -> usize {
        self.m
    }
    fn contains(&self, x: &[f64]) -> bool {
        x.iter().all(|a| a.abs() <= self.half)
    }
    fn inradius(&self) -> f64 {
        self.half
    }
    fn outradius(&self) -> f64 {
        self.half * (self.m as f64).sqrt()
    }
    fn label(&self) -> String {
        format!("cube(m={}, a={})", self.m, self.half)
    }
    fn chord(&self, x: &[f64], d: &[f64]) -> Chord {
        let mut c = Chord {
            lo: f64::NEG_INFINITY,
            hi: f64::INFINITY,
        };
        for (xi, di) in x.iter().zip(d) {
            if di.abs() < 1e-300 {
                continue;
            }
            let t1 = (-self.half - xi) / di;
            let t2 = (self.half - xi) / di;
            c.lo = c.lo.max(t1.min(t2));
            c.hi = c.hi.min(t1.max(t2));
        }
        c
    }
}

/// Sparse HS-orthonormal frame `C + Σ x_k B_k` over `d×d` Hermitian matrices.
#[derive(Clone, Debug)]
pub struct Frame {
    d: usize,
    center: HermMat,
    basis: Vec<Vec<(usize, C64)>>,
}

impl Frame {
    fn new(center: HermMat, basis: Vec<HermMat>) -> Self {
        let d = center.dim();
        let basis = basis
            .into_iter()
            .map(|b| {
                b.data()
                    .iter()
                    .enumerate()
                    .filter(|(_, z)| z.norm_sqr() > 0.0)
                    .map(|(k, z)| (k, *z))
                    .collect()
            })
            .collect();
        Self { d, center, basis }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn center(&self) -> &HermMat {
        &self.center
    }

    /// `Σ x_k B_k` (without the center).
    pub fn linear(&self, x: &[f64]) -> HermMat {
        let mut m = CMat::zeros(self.d);
        let data = m.data_mut();
        for (b, &c) in self.basis.iter().zip(x) {
            if c == 0.0 {
                continue;
            }
            for &(k, z) in b {
                data[k] += z * c;
            }
        }
        HermMat::symmetrize(&m)
    }

    pub fn point(&self, x: &[f64]) -> HermMat {
        self.center.add(&self.linear(x))
    }

    /// Coordinates of `X − C` (assumed to lie in the span).
    pub fn coords(&self, x: &HermMat) -> Vec<f64> {
        let diff = x.sub(&self.center);
        let data = diff.data();
        self.basis
            .iter()
            .map(|b| {
                b.iter()
                    .map(|&(k, z)| z.re * data[k].re + z.im * data[k].im)
                    .sum()
            })
            .collect()
    }

    pub fn basis_matrix(&self, k: usize) -> HermMat {
        let mut e = vec![0.0; self.dim()];
        e[k] = 1.0;
        self.linear(&e)
    }
}

/// Orthonormal basis of the kernel of `Tr_B` on `N²×N²` Hermitian matrices.
pub(crate) fn tp_tangent_basis(n: usize) -> Vec<HermMat> {
    let g = hermitian_basis(n, false);
    let d = n * n;
    let mut out = Vec::with_capacity(d * d - d);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for m in 0..n {
        for gi in &g {
            out.push(HermMat::new(CMat::unit(n, m, m).kron(gi)).expect("hermitian"));
        }
    }
    for m in 0..n {
        for mu in m + 1..n {
            for gi in &g {
                for phase in [C64::new(1.0, 0.0), C64::new(0.0, 1.0)] {
                    let z = gi.scale_c(phase);
                    let a = CMat::unit(n, m, mu).kron(&z);
                    let b = CMat::unit(n, mu, m).kron(&z.adjoint());
                    out.push(HermMat::new((&a + &b).scale(s)).expect("hermitian"));
                }
            }
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum ChordRoute {
    /// Exact pencil eigenvalues on a list of linear matrix inequalities.
    Spectrahedral,
    /// See-saw over product vectors (block positivity).
    BlockPositive,
    /// Doubling and bisection on the membership oracle.
    Oracle,
}

/// A slice of a cone of maps, as a body in tangent coordinates about its center.
#[derive(Clone, Debug)]
pub struct MatrixBody {
    spec: BodySpec,
    frame: Frame,
    r: f64,
    big_r: f64,
    route: ChordRoute,
    psd: bool,
    ppt: bool,
    tni: bool,
    /// See-saw restarts for block-positive chords.
    pub chord_restarts: usize,
}

impl MatrixBody {
    pub fn new(spec: BodySpec) -> Result<Self> {
        let n = spec.n;
        let d = n * n;
        let basis = match spec.slice {
            Slice::Base => hermitian_basis(d, false),
            Slice::TP => tp_tangent_basis(n),
            Slice::TNI | Slice::Sym | Slice::SymPolar => hermitian_basis(d, true),
            Slice::Cone => {
                return Err(Error::Unsupported(
                    "a cone is unbounded; pick a slice".into(),
                ))
            }
        };
        let frame = Frame::new(spec.center(), basis);
        let (r, big_r) = match spec.radii() {
            Some(rr) => rr,
            None => sym_radii(&spec)?,
        };
        use ConeId::*;
        let affine = matches!(spec.slice, Slice::Base | Slice::TP | Slice::TNI);
        let (route, psd, ppt) = match (spec.cone, n) {
            _ if !affine => (ChordRoute::Oracle, false, false),
            (CP, _) => (ChordRoute::Spectrahedral, true, false),
            (CcP, _) => (ChordRoute::Spectrahedral, false, true),
            (T, _) | (SP, 2) => (ChordRoute::Spectrahedral, true, true),
            (P, _) | (D, 2) => (ChordRoute::BlockPositive, false, false),
            _ => (ChordRoute::Oracle, false, false),
        };
        Ok(Self {
            tni: spec.slice == Slice::TNI,
            spec,
            frame,
            r,
            big_r,
            route,
            psd,
            ppt,
            chord_restarts: 12,
        })
    }

    pub fn spec(&self) -> &BodySpec {
        &self.spec
    }

    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    pub fn matrix_at(&self, x: &[f64]) -> HermMat {
        self.frame.point(x)
    }

    pub fn choi_at(&self, x: &[f64]) -> ChoiMat {
        ChoiMat::from_herm(self.spec.n, self.frame.point(x)).expect("size matches")
    }

    /// Linear matrix inequalities `A(x) ⪰ 0` with their direction parts.
    fn lmis(&self, x: &HermMat, dir: &HermMat) -> Vec<(HermMat, HermMat)> {
        let n = self.spec.n;
        let mut out = Vec::with_capacity(3);
        if self.psd {
            out.push((x.clone(), dir.clone()));
        }
        if self.ppt {
            out.push((partial_transpose_herm(x, n), partial_transpose_herm(dir, n)));
        }
        if self.tni {
            let tx = HermMat::identity(n).sub(&partial_trace_herm(x, n, Subsystem::B));
            let td = partial_trace_herm(dir, n, Subsystem::B).scale(-1.0);
            out.push((tx, td));
        }
        out
    }

    fn spectrahedral_chord(&self, x: &[f64], d: &[f64]) -> Chord {
        let xm = self.frame.point(x);
        let dm = self.frame.linear(d);
        let mut c = Chord {
            lo: f64::NEG_INFINITY,
            hi: f64::INFINITY,
        };
        for (a, b) in self.lmis(&xm, &dm) {
            let iv = psd_interval(a.as_cmat(), b.as_cmat()).or_else(|| {
                // Rounding put the point on the boundary; nudge inward.
                let mut sh = a.clone().into_cmat();
                sh.add_identity(1e-13 * a.hs_norm().max(1.0));
                psd_interval(&sh, b.as_cmat())
            });
            match iv {
                Some((lo, hi)) => {
                    c.lo = c.lo.max(lo);
                    c.hi = c.hi.min(hi);
                }
                None => return Chord { lo: 0.0, hi: 0.0 },
            }
        }
        c.clip_ball(x, d, self.big_r * (1.0 + 1e-9))
    }

    fn block_positive_chord(&self, x: &[f64], d: &[f64]) -> Chord {
        let xm = self.frame.point(x);
        let dm = self.frame.linear(d);
        // Deterministic per point so that chords are reproducible.
        let seed = x
            .iter()
            .chain(d)
            .fold(self.spec.params.seed, |h, v| h.rotate_left(7) ^ v.to_bits());
        let mut rng = RngStream::new(seed, 0xc40d);
        let n = self.spec.n;
        let iters = self.spec.params.seesaw_iters;
        let hi =
            crate::cones::block_positive_ray(&xm, &dm, n, self.chord_restarts, iters, &mut rng);
        let lo = crate::cones::block_positive_ray(
            &xm,
            &dm.scale(-1.0),
            n,
            self.chord_restarts,
            iters,
            &mut rng,
        );
        Chord { lo: -lo, hi }.clip_ball(x, d, self.big_r * (1.0 + 1e-9))
    }

    fn oracle_contains(&self, x: &[f64]) -> bool {
        let m = self.frame.point(x);
        match crate::cones::slice_membership_herm(&m, &self.spec) {
            Ok(v) => v.status == Status::In,
            Err(_) => false,
        }
    }
}

fn sym_radii(spec: &BodySpec) -> Result<(f64, f64)> {
    let n = spec.n as f64;
    let k = (n * n - 1.0).sqrt();
    // conv(±C^b) about 0 and its polar; crude but valid bounds.
    match spec.slice {
        Slice::Sym => Ok((1.0 / (n * k.max(1.0)), n)),
        Slice::SymPolar => Ok((1.0 / n, n * k)),
        _ => Err(Error::Unsupported(format!("radii of {}", spec.label()))),
    }
}

impl ConvexBody for MatrixBody {
    fn dim(&self) -> usize {
        self.frame.dim()
    }

    fn contains(&self, x: &[f64]) -> bool {
        match self.route {
            ChordRoute::Spectrahedral => {
                let xm = self.frame.point(x);
                let zero = HermMat::zeros(xm.dim());
                self.lmis(&xm, &zero).iter().all(|(a, _)| {
                    let tol = self.spec.params.psd_tol * a.hs_norm().max(1.0);
                    crate::matcore::is_psd_shifted(a.as_cmat(), tol)
                })
            }
            ChordRoute::BlockPositive => {
                let xm = self.frame.point(x);
                crate::cones::cone_membership_herm(
                    &xm,
                    self.spec.n,
                    self.spec.cone,
                    &self.spec.params,
                )
                .map(|v| v.status == Status::In)
                .unwrap_or(false)
            }
            ChordRoute::Oracle => self.oracle_contains(x),
        }
    }

    fn inradius(&self) -> f64 {
        self.r
    }

    fn outradius(&self) -> f64 {
        self.big_r
    }

    fn label(&self) -> String {
        self.spec.label()
    }

    fn chord(&self, x: &[f64], d: &[f64]) -> Chord {
        match self.route {
            ChordRoute::Spectrahedral => self.spectrahedral_chord(x, d),
            ChordRoute::BlockPositive => self.block_positive_chord(x, d),
            ChordRoute::Oracle => {
                bisection_chord(|p| self.oracle_contains(p), x, d, self.r, self.big_r)
            }
        }
    }
}

/// Density matrices `M_d^tot`, in traceless coordinates about `I/d`.
#[derive(Clone, Debug)]
pub struct StateSpace {
    frame: Frame,
}

impl StateSpace {
    pub fn new(d: usize) -> Self {
        Self {
            frame: Frame::new(HermMat::maximally_mixed(d), hermitian_basis(d, false)),
        }
    }

    pub fn matrix_at(&self, x: &[f64]) -> HermMat {
        self.frame.point(x)
    }

    fn d(&self) -> usize {
        self.frame.center().dim()
    }
}

impl ConvexBody for StateSpace {
    fn dim(&self) -> usize {
        self.frame.dim()
    }
    fn contains(&self, x: &[f64]) -> bool {
        crate::matcore::is_psd_shifted(self.frame.point(x).as_cmat(), 1e-12)
    }
    fn inradius(&self) -> f64 {
        let d = self.d() as f64;
        1.0 / (d * (d - 1.0)).sqrt()
    }
    fn outradius(&self) -> f64 {
        let d = self.d() as f64;
        ((d - 1.0) / d).sqrt()
    }
    fn label(&self) -> String {
        format!("states(d={})", self.d())
    }
    fn chord(&self, x: &[f64], d: &[f64]) -> Chord {
        let a = self.frame.point(x);
        let b = self.frame.linear(d);
        match psd_interval(a.as_cmat(), b.as_cmat()) {
            Some((lo, hi)) => Chord { lo, hi }.clip_ball(x, d, self.outradius() * (1.0 + 1e-9)),
            None => Chord { lo: 0.0, hi: 0.0 },
        }
    }
}

/// Operator interval `{0 ⪯ M ⪯ I}` in `N×N` Hermitian matrices, about `I/2`.
#[derive(Clone, Debug)]
pub struct OperatorInterval {
    frame: Frame,
    n: usize,
}

impl OperatorInterval {
    pub fn new(n: usize) -> Self {
        Self {
            frame: Frame::new(HermMat::identity(n).scale(0.5), hermitian_basis(n, true)),
            n,
        }
    }

    pub fn matrix_at(&self, x: &[f64]) -> HermMat {
        self.frame.point(x)
    }
}

impl ConvexBody for OperatorInterval {
    fn dim(&self) -> usize {
        self.n * self.n
    }
    fn contains(&self, x: &[f64]) -> bool {
        let m = self.frame.point(x);
        let c = HermMat::identity(self.n).sub(&m);
        crate::matcore::is_psd_shifted(m.as_cmat(), 1e-12)
            && crate::matcore::is_psd_shifted(c.as_cmat(), 1e-12)
    }
    fn inradius(&self) -> f64 {
        0.5
    }
    fn outradius(&self) -> f64 {
        0.5 * (self.n as f64).sqrt()
    }
    fn label(&self) -> String {
        format!("interval(N={})", self.n)
    }
    fn chord(&self, x: &[f64], d: &[f64]) -> Chord {
        let m = self.frame.point(x);
        let b = self.frame.linear(d);
        let c = HermMat::identity(self.n).sub(&m);
        let nb = b.scale(-1.0);
        match (
            psd_interval(m.as_cmat(), b.as_cmat()),
            psd_interval(c.as_cmat(), nb.as_cmat()),
        ) {
            (Some((l1, h1)), Some((l2, h2))) => Chord {
                lo: l1.max(l2),
                hi: h1.min(h2),
            },
            _ => Chord { lo: 0.0, hi: 0.0 },
        }
    }
}
