//! Multiphase volume estimation by hit-and-run.
//!
//! With radii `r₀ < r₁ < … < r_k = R` growing by `2^{1/m}`,
//! `vol K = vol B_{r₀} · Π vol(K∩B_{r_i}) / vol(K∩B_{r_{i−1}})`, and each ratio
//! is the fraction of uniform points of `K∩B_{r_i}` lying in `B_{r_{i−1}}`.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::randgen::{hit_and_run_step, ConvexBody, RngStream, WalkState};

use super::{log_ball_vol, mean_stderr, vrad_from_log_vol, Estimate};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VolumeSchedule {
    pub chains: usize,
    /// Kept samples per chain and phase (before any doubling).
    pub samples_per_phase: usize,
    /// Steps between kept samples; defaults to the dimension.
    pub thin: Option<usize>,
    /// Initial burn-in; defaults to ten times the dimension.
    pub burn_in: Option<usize>,
    /// Times a phase may double its samples to reach `target_rel_stderr`.
    pub max_doublings: usize,
    pub target_rel_stderr: f64,
    /// A ratio with a larger relative error aborts the run.
    pub abort_rel_stderr: f64,
}

impl Default for VolumeSchedule {
    fn default() -> Self {
        Self {
            chains: 8,
            samples_per_phase: 1000,
            thin: None,
            burn_in: None,
            max_doublings: 2,
            target_rel_stderr: 0.1,
            abort_rel_stderr: 0.25,
        }
    }
}

impl VolumeSchedule {
    pub fn with_samples(samples_per_phase: usize) -> Self {
        Self {
            samples_per_phase,
            ..Self::default()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseStat {
    pub radius: f64,
    /// `vol(K∩B_{r_{i−1}}) / vol(K∩B_{r_i})`.
    pub ratio: f64,
    pub stderr: f64,
    pub samples: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VolumeEstimate {
    pub vrad: Estimate,
    pub log_volume: f64,
    pub log_volume_stderr: f64,
    pub dim: usize,
    pub phases: Vec<PhaseStat>,
}

/// Radii `r₀·2^{i/m}` capped by `R`, including both ends.
fn schedule_radii(r0: f64, big_r: f64, m: usize) -> Vec<f64> {
    let mut radii = vec![r0];
    let f = 2f64.powf(1.0 / m as f64);
    let mut r = r0;
    while r * f < big_r {
        r *= f;
        radii.push(r);
    }
    if big_r > r0 * (1.0 + 1e-12) {
        radii.push(big_r);
    }
    radii
}

struct Chain {
    state: WalkState,
    rng: RngStream,
    hits: u64,
    total: u64,
}

fn for_each_chain(chains: &mut [Chain], f: impl Fn(&mut Chain) + Sync + Send) {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        chains.par_iter_mut().for_each(f);
    }
    #[cfg(not(feature = "parallel"))]
    chains.iter_mut().for_each(f);
}

/// Estimates `vrad(K)` for a body with known in- and outradius about the origin.
pub fn volume_mcmc(
    body: &(impl ConvexBody + ?Sized),
    schedule: &VolumeSchedule,
    seed: u64,
) -> Result<VolumeEstimate> {
    volume_mcmc_with_progress(body, schedule, seed, |_, _, _| {})
}

/// As [`volume_mcmc`], calling `progress(phase, phases, stat)` after each phase
/// (`phase` counts from 1).
pub fn volume_mcmc_with_progress(
    body: &(impl ConvexBody + ?Sized),
    schedule: &VolumeSchedule,
    seed: u64,
    mut progress: impl FnMut(usize, usize, &PhaseStat),
) -> Result<VolumeEstimate> {
    let start = Instant::now();
    let m = body.dim();
    if schedule.chains < 2 || schedule.samples_per_phase == 0 {
        return Err(Error::InvalidParams(
            "volume estimation needs at least two chains and one sample per phase".into(),
        ));
    }
    let r0 = body.inradius();
    let big_r = body.outradius();
    if !(r0 > 0.0 && big_r >= r0) {
        return Err(Error::InvalidParams(format!("bad radii r={r0}, R={big_r}")));
    }
    let thin = schedule.thin.unwrap_or(m).max(1);
    let burn_in = schedule.burn_in.unwrap_or(10 * m);
    let radii = schedule_radii(r0, big_r, m);
    let phases = radii.len() - 1;

    let mut chains: Vec<Chain> = (0..schedule.chains)
        .map(|c| Chain {
            state: WalkState::at(vec![0.0; m]),
            rng: RngStream::new(seed, c as u64),
            hits: 0,
            total: 0,
        })
        .collect();
    // Per chain, the running sum of log ratios.
    let mut chain_logs = vec![0.0f64; schedule.chains];
    let mut delta_var = 0.0;
    let mut stats = Vec::with_capacity(phases);
    let mut n_samples = 0u64;

    for i in 1..=phases {
        let (inner, outer) = (radii[i - 1], radii[i]);
        let warm = if i == 1 { burn_in } else { 2 * m };
        for_each_chain(&mut chains, |ch| {
            ch.state.cap = Some(outer);
            ch.hits = 0;
            ch.total = 0;
            for _ in 0..warm {
                hit_and_run_step(body, &mut ch.state, &mut ch.rng);
            }
        });
        let mut batch = schedule.samples_per_phase;
        let mut doublings = 0;
        let (ratio, se) = loop {
            for_each_chain(&mut chains, |ch| {
                for _ in 0..batch {
                    for _ in 0..thin {
                        hit_and_run_step(body, &mut ch.state, &mut ch.rng);
                    }
                    ch.total += 1;
                    if ch.state.norm() <= inner {
                        ch.hits += 1;
                    }
                }
            });
            let fracs: Vec<f64> = chains
                .iter()
                .map(|c| c.hits as f64 / c.total as f64)
                .collect();
            let hits: u64 = chains.iter().map(|c| c.hits).sum();
            let total: u64 = chains.iter().map(|c| c.total).sum();
            let ratio = hits as f64 / total as f64;
            let (_, se) = mean_stderr(&fracs);
            let rel = if ratio > 0.0 {
                se / ratio
            } else {
                f64::INFINITY
            };
            if rel <= schedule.target_rel_stderr || doublings >= schedule.max_doublings {
                break (ratio, se);
            }
            doublings += 1;
            batch *= 2;
        };
        let samples: u64 = chains.iter().map(|c| c.total).sum();
        n_samples += samples;
        let stat = PhaseStat {
            radius: outer,
            ratio,
            stderr: se,
            samples,
        };
        stats.push(stat);
        progress(i, phases, &stat);
        if !(ratio > 0.0) || se / ratio > schedule.abort_rel_stderr {
            return Err(Error::NotMixing(format!(
                "phase {i}/{phases} (radius {outer:.4}) ratio {ratio:.4} ± {se:.4}; completed phases: {}",
                serde_json::to_string(&stats).unwrap_or_default()
            )));
        }
        delta_var += (se / ratio).powi(2);
        for (log, ch) in chain_logs.iter_mut().zip(&chains) {
            let f = ch.hits as f64 / ch.total as f64;
            *log += if f > 0.0 { f.ln() } else { f64::NEG_INFINITY };
        }
    }

    let pooled: f64 = stats.iter().map(|s| s.ratio.ln()).sum();
    let log_volume = log_ball_vol(m) + m as f64 * r0.ln() - pooled;
    let vrad = vrad_from_log_vol(log_volume, m);
    // Between-chain spread of the per-chain estimates; falls back to the
    // per-phase delta method if some chain saw an empty phase.
    let per_chain: Vec<f64> = chain_logs
        .iter()
        .map(|l| log_ball_vol(m) + m as f64 * r0.ln() - l)
        .collect();
    let log_volume_stderr = if per_chain.iter().all(|v| v.is_finite()) {
        let (_, se) = mean_stderr(&per_chain);
        se.max(delta_var.sqrt())
    } else {
        delta_var.sqrt()
    };
    Ok(VolumeEstimate {
        vrad: Estimate {
            value: vrad,
            stderr: vrad * log_volume_stderr / m as f64,
            n_samples,
            seed,
            wall_time: start.elapsed().as_secs_f64(),
        },
        log_volume,
        log_volume_stderr,
        dim: m,
        phases: stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::vrad_from_vol;
    use crate::randgen::{BallBody, CubeBody, StateSpace};

    #[test]
    fn radii_schedule_covers_the_range() {
        let r = schedule_radii(1.0, 3.0, 3);
        assert_eq!(r[0], 1.0);
        assert_eq!(*r.last().unwrap(), 3.0);
        for w in r.windows(2) {
            assert!(w[1] / w[0] <= 2f64.powf(1.0 / 3.0) + 1e-12);
        }
        assert_eq!(schedule_radii(2.0, 2.0, 5), vec![2.0]);
    }

    #[test]
    fn cube_volume() {
        let body = CubeBody { m: 3, half: 1.0 };
        let est = volume_mcmc(&body, &VolumeSchedule::with_samples(4000), 1).unwrap();
        let vol = est.log_volume.exp();
        assert!((vol - 8.0).abs() < 0.05 * 8.0, "vol = {vol}");
        let want = vrad_from_vol(8.0, 3).unwrap();
        assert!(
            (est.vrad.value - want).abs() < 3.0 * est.vrad.stderr + 0.01,
            "{est:?}"
        );
    }

    #[test]
    fn bloch_ball_volume_radius() {
        let body = StateSpace::new(2);
        let est = volume_mcmc(&body, &VolumeSchedule::with_samples(2000), 2).unwrap();
        // Inradius equals outradius: no phases, exact answer.
        assert!(est.phases.is_empty());
        assert!((est.vrad.value - 0.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn ball_with_loose_inner_radius() {
        struct Loose(BallBody);
        impl ConvexBody for Loose {
            fn dim(&self) -> usize {
                self.0.m
            }
            fn contains(&self, x: &[f64]) -> bool {
                self.0.contains(x)
            }
            fn inradius(&self) -> f64 {
                0.25 * self.0.r
            }
            fn outradius(&self) -> f64 {
                2.0 * self.0.r
            }
            fn label(&self) -> String {
                "loose".into()
            }
            fn chord(&self, x: &[f64], d: &[f64]) -> crate::randgen::Chord {
                self.0.chord(x, d)
            }
        }
        let body = Loose(BallBody { m: 5, r: 0.7 });
        let est = volume_mcmc(&body, &VolumeSchedule::with_samples(3000), 3).unwrap();
        assert!((est.vrad.value - 0.7).abs() < 0.03 * 0.7, "{est:?}");
        assert!(
            (est.vrad.value - 0.7).abs() < 4.0 * est.vrad.stderr + 0.005,
            "{est:?}"
        );
    }

    #[test]
    fn estimates_are_reproducible() {
        let body = CubeBody { m: 2, half: 1.0 };
        let s = VolumeSchedule::with_samples(200);
        let a = volume_mcmc(&body, &s, 9).unwrap();
        let b = volume_mcmc(&body, &s, 9).unwrap();
        assert_eq!(a.log_volume, b.log_volume);
        assert_eq!(a.phases, b.phases);
    }

    #[test]
    fn rejects_degenerate_schedules() {
        let body = CubeBody { m: 2, half: 1.0 };
        let s = VolumeSchedule {
            chains: 1,
            ..VolumeSchedule::default()
        };
        assert!(volume_mcmc(&body, &s, 0).is_err());
    }
}
