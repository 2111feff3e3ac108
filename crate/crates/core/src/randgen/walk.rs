//! Hit-and-run over a [`ConvexBody`].

use serde::{Deserialize, Serialize};

use super::body::ConvexBody;
use super::RngStream;

/// Chords shorter than this leave the point in place and count as stuck.
pub const MIN_CHORD: f64 = 1e-12;

/// Position of a chain in body coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct WalkState {
    pub x: Vec<f64>,
    pub steps_taken: u64,
    pub stuck: u64,
    /// Optional ball `|x| ≤ cap` intersected with the body.
    pub cap: Option<f64>,
}

impl WalkState {
    /// Start at the body's center (the coordinate origin).
    pub fn at_center(body: &(impl ConvexBody + ?Sized)) -> Self {
        Self::at(vec![0.0; body.dim()])
    }

    pub fn at(x: Vec<f64>) -> Self {
        Self {
            x,
            steps_taken: 0,
            stuck: 0,
            cap: None,
        }
    }

    pub fn with_cap(mut self, cap: f64) -> Self {
        self.cap = Some(cap);
        self
    }

    pub fn norm(&self) -> f64 {
        self.x.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// One hit-and-run step. Returns `false` when the chord collapsed.
pub fn hit_and_run_step(
    body: &(impl ConvexBody + ?Sized),
    state: &mut WalkState,
    rng: &mut RngStream,
) -> bool {
    let d = rng.unit_real(state.x.len());
    let mut c = body.chord(&state.x, &d);
    if let Some(r) = state.cap {
        c = c.clip_ball(&state.x, &d, r);
    }
    state.steps_taken += 1;
    // The current point is on the chord; guard against rounding at the ends.
    let lo = c.lo.min(0.0);
    let hi = c.hi.max(0.0);
    if !(hi - lo > MIN_CHORD) {
        state.stuck += 1;
        return false;
    }
    let t = lo + (hi - lo) * rng.uniform();
    for (xi, di) in state.x.iter_mut().zip(&d) {
        *xi += t * di;
    }
    true
}

/// Burn-in and thinning schedule.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WalkConfig {
    pub samples: usize,
    pub burn_in: usize,
    pub thin: usize,
}

impl WalkConfig {
    /// Burn-in `10·m` and thinning `m`.
    pub fn for_dim(m: usize, samples: usize) -> Self {
        Self {
            samples,
            burn_in: 10 * m,
            thin: m.max(1),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct WalkStats {
    pub steps: u64,
    pub stuck: u64,
    pub samples: u64,
    pub mean_sq_norm: f64,
}

/// Runs the walk and hands every kept sample to `observe`.
pub fn run_walk(
    body: &(impl ConvexBody + ?Sized),
    state: &mut WalkState,
    cfg: WalkConfig,
    rng: &mut RngStream,
    mut observe: impl FnMut(&[f64]),
) -> WalkStats {
    let start_steps = state.steps_taken;
    let start_stuck = state.stuck;
    for _ in 0..cfg.burn_in {
        hit_and_run_step(body, state, rng);
    }
    let mut sq = 0.0;
    for _ in 0..cfg.samples {
        for _ in 0..cfg.thin.max(1) {
            hit_and_run_step(body, state, rng);
        }
        sq += state.x.iter().map(|v| v * v).sum::<f64>();
        observe(&state.x);
    }
    WalkStats {
        steps: state.steps_taken - start_steps,
        stuck: state.stuck - start_stuck,
        samples: cfg.samples as u64,
        mean_sq_norm: if cfg.samples > 0 {
            sq / cfg.samples as f64
        } else {
            0.0
        },
    }
}
