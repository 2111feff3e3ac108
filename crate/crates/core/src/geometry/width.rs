//! Mean width `w(K) = ∫_{S^{m−1}} h_K(u) du` and the Urysohn bracket
//! `1/w(K°) ≤ vrad(K) ≤ w(K)`.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::cones::{support_function, BodySpec, Slice, Support};
use crate::error::{Error, Result};
use crate::randgen::{MatrixBody, RngStream};

use super::{mean_stderr, Estimate};

/// Number of independent direction streams.
const STREAMS: usize = 8;

/// Mean width, as an interval when the support function is only bracketed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WidthEstimate {
    pub lo: Estimate,
    pub hi: Estimate,
    /// Some support values were local-search lower bounds.
    pub heuristic: bool,
}

impl WidthEstimate {
    pub fn is_point(&self) -> bool {
        self.lo.value == self.hi.value
    }
}

/// Mean of `h` over uniform unit vectors of `R^m`, split into eight streams.
pub fn mean_width_fn(
    m: usize,
    n_dirs: usize,
    seed: u64,
    h: impl Fn(&[f64]) -> Result<Support>,
) -> Result<WidthEstimate> {
    if n_dirs < STREAMS {
        return Err(Error::InvalidParams(format!(
            "need at least {STREAMS} directions"
        )));
    }
    let start = Instant::now();
    let per = n_dirs / STREAMS;
    let mut lo_means = Vec::with_capacity(STREAMS);
    let mut hi_means = Vec::with_capacity(STREAMS);
    let mut heuristic = false;
    for s in 0..STREAMS {
        let mut rng = RngStream::new(seed, 0x3d1 + s as u64);
        let (mut lo, mut hi) = (0.0, 0.0);
        for _ in 0..per {
            let u = rng.unit_real(m);
            let v = h(&u)?;
            heuristic |= matches!(v, Support::Heuristic(_));
            lo += v.lo();
            hi += v.hi();
        }
        lo_means.push(lo / per as f64);
        hi_means.push(hi / per as f64);
    }
    let wall = start.elapsed().as_secs_f64();
    let est = |xs: &[f64]| {
        let (value, stderr) = mean_stderr(xs);
        Estimate {
            value,
            stderr,
            n_samples: (per * STREAMS) as u64,
            seed,
            wall_time: wall,
        }
    };
    Ok(WidthEstimate {
        lo: est(&lo_means),
        hi: est(&hi_means),
        heuristic,
    })
}

/// Mean width of a base or symmetrized body over uniform tangent directions.
pub fn mean_width_mc(body: &BodySpec, n_dirs: usize, seed: u64) -> Result<WidthEstimate> {
    if !matches!(body.slice, Slice::Base | Slice::Sym) {
        return Err(Error::Unsupported(format!(
            "mean width needs a support function; none for {}",
            body.label()
        )));
    }
    let frame = MatrixBody::new(body.clone())?.frame().clone();
    let m = frame.dim();
    mean_width_fn(m, n_dirs, seed, |x| {
        support_function(&frame.linear(x), body)
    })
}

/// `[1/w(K°), w(K)]`, with the polar of a base taken as the reflected dual base.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UrysohnBracket {
    pub lower: Estimate,
    pub upper: Estimate,
    pub width: WidthEstimate,
    pub polar_width: WidthEstimate,
}

impl UrysohnBracket {
    /// `v` inside the bracket up to `k` combined standard errors.
    pub fn contains(&self, v: &Estimate, k: f64) -> bool {
        let lo_se = (self.lower.stderr.powi(2) + v.stderr.powi(2)).sqrt();
        let hi_se = (self.upper.stderr.powi(2) + v.stderr.powi(2)).sqrt();
        v.value + k * lo_se >= self.lower.value && v.value - k * hi_se <= self.upper.value
    }
}

pub fn urysohn_bracket(body: &BodySpec, n_dirs: usize, seed: u64) -> Result<UrysohnBracket> {
    if body.slice != Slice::Base {
        return Err(Error::Unsupported(format!(
            "Urysohn bracket of {}",
            body.label()
        )));
    }
    let width = mean_width_mc(body, n_dirs, seed)?;
    let polar = BodySpec {
        cone: body.cone.dual(),
        ..body.clone()
    };
    let polar_width = mean_width_mc(&polar, n_dirs, seed ^ 0x9017)?;
    // A smaller width only raises the lower bound, so use the upper end.
    let w = polar_width.hi;
    let lower = Estimate {
        value: 1.0 / w.value,
        stderr: w.stderr / (w.value * w.value),
        ..w
    };
    Ok(UrysohnBracket {
        lower,
        upper: width.hi,
        width,
        polar_width,
    })
}
