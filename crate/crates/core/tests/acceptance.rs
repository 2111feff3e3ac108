//! Acceptance suite. Runs every criterion in sequence and prints one
//! `criterion k: PASS|FAIL` line each; exits non-zero on a blocking failure.
//!
//! Reference values marked "mpmath" were computed independently at 30 digits.

use std::f64::consts::{E, PI};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use qmap_cones::cones::{
    choi_map_fixture, cone_membership, cone_membership_herm, decomposable_split,
    ppt_witness_search, BodySpec, ConeId, OracleParams, Slice, SplitOutcome, Status,
};
use qmap_cones::geometry::{
    block_positive_trace_check, duality_pair_value, exact_vol_states, mean_width_mc,
    no_duality_discrepancy, radii_verify, random_block_positive, section_bounds, tni_experiment,
    urysohn_bracket, volume_mcmc, vrad_cp_base, vrad_from_vol, vrad_states, Estimate,
    VolumeSchedule,
};
use qmap_cones::matcore::{eigh, partial_transpose_herm, CMat, ChoiMat, HermMat, C64};
use qmap_cones::randgen::{ginibre, random_state_hs, CubeBody, MatrixBody, RngStream};

const SEED: u64 = 20_240_917;

struct Outcome {
    pass: bool,
    /// A failure here is reported but does not fail the run.
    blocking: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: String) -> Self {
        Self {
            pass,
            blocking: true,
            detail,
        }
    }
}

// Independent oracles ------------------------------------------------------

/// `ln Γ(x)` for `x` a positive integer or half-integer, by recursion from
/// `Γ(1) = 1` and `Γ(1/2) = √π`.
fn ln_gamma_half(twice_x: usize) -> f64 {
    assert!(twice_x > 0);
    let (mut acc, mut k) = if twice_x % 2 == 0 {
        (0.0, 2)
    } else {
        (0.5 * PI.ln(), 1)
    };
    while k < twice_x {
        acc += (k as f64 / 2.0).ln();
        k += 2;
    }
    acc
}

/// `ln vol` of the Hilbert-Schmidt state space of `d×d` density matrices.
fn ln_vol_states_oracle(d: usize) -> f64 {
    let df = d as f64;
    let mut acc = 0.5 * df.ln() + (df * (df - 1.0) / 2.0) * (2.0 * PI).ln();
    for j in 1..=d {
        acc += ln_gamma_half(2 * j);
    }
    acc - ln_gamma_half(2 * d * d)
}

fn ln_ball_oracle(m: usize) -> f64 {
    m as f64 / 2.0 * PI.ln() - ln_gamma_half(m + 2)
}

fn vrad_states_oracle(d: usize) -> f64 {
    let m = d * d - 1;
    ((ln_vol_states_oracle(d) - ln_ball_oracle(m)) / m as f64).exp()
}

/// Wootters concurrence of a two-qubit state with unit trace.
fn concurrence(rho: &HermMat) -> f64 {
    let y = CMat::from_fn(4, |i, j| {
        // σ_y ⊗ σ_y is real: anti-diagonal with signs (−1, 1, 1, −1).
        if i + j == 3 {
            C64::new(if i == 0 || i == 3 { -1.0 } else { 1.0 }, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let conj = CMat::from_fn(4, |i, j| rho.as_cmat()[(i, j)].conj());
    let tilde = y.matmul(&conj).matmul(&y);
    let sqrt_rho = rho.map_spectrum(|x| x.max(0.0).sqrt()).unwrap();
    let s = sqrt_rho.as_cmat();
    let m = HermMat::symmetrize(&s.matmul(&tilde).matmul(s));
    let mut l: Vec<f64> = eigh(&m)
        .unwrap()
        .values
        .iter()
        .map(|x| x.max(0.0).sqrt())
        .collect();
    l.sort_by(|a, b| b.total_cmp(a));
    l[0] - l[1] - l[2] - l[3]
}

// Generators ---------------------------------------------------------------

fn random_base_point(n: usize, rng: &mut RngStream) -> HermMat {
    random_state_hs(n * n, rng).scale(n as f64)
}

/// Random point of `T^b`: a random state pulled toward `I/N` until PPT.
fn random_ppt_point(n: usize, rng: &mut RngStream) -> HermMat {
    let x = random_base_point(n, rng);
    let lam = eigh(&partial_transpose_herm(&x, n)).unwrap().min();
    if lam >= 0.0 {
        return x;
    }
    let c = 1.0 / n as f64;
    let s = -lam / (c - lam);
    x.scale(1.0 - s).add(&HermMat::identity(n * n).scale(s * c))
}

/// Random point of `D^b`: a mixture of a state and a partially transposed state.
fn random_decomposable_point(n: usize, rng: &mut RngStream) -> HermMat {
    let w = rng.uniform();
    let a = random_base_point(n, rng);
    let b = partial_transpose_herm(&random_base_point(n, rng), n);
    a.scale(w).add(&b.scale(1.0 - w))
}

/// `G G† / Tr` with `G` a `d×k` Ginibre matrix: a random state of rank `k`.
fn random_rank_state(d: usize, k: usize, rng: &mut RngStream) -> HermMat {
    let g = ginibre(d, k, rng);
    let m = CMat::from_fn(d, |i, j| {
        (0..k).map(|l| g[i * k + l] * g[j * k + l].conj()).sum()
    });
    let h = HermMat::symmetrize(&m);
    h.scale(1.0 / h.trace_re())
}

fn choi(n: usize, h: HermMat) -> ChoiMat {
    ChoiMat::from_herm(n, h).unwrap()
}

fn isotropic(p: f64) -> ChoiMat {
    let mut d = ChoiMat::depolarizing(2).mat().scale(1.0 - p);
    d.axpy(p, ChoiMat::max_entangled(2).mat());
    ChoiMat::new(2, d).unwrap()
}

fn secs(d: Duration) -> f64 {
    d.as_secs_f64()
}

// Criteria -----------------------------------------------------------------

fn criterion_1() -> Outcome {
    let t = Instant::now();
    let log_vol = exact_vol_states(2).unwrap().log;
    let vrad = vrad_states(2).unwrap();
    let elapsed = t.elapsed();
    let vol = log_vol.exp();
    let bloch = 4.0 * PI / 3.0 * 2f64.powf(-1.5);
    let vol_err = (vol - PI * 2f64.sqrt() / 3.0).abs() / vol;
    let bloch_err = (vol - bloch).abs() / bloch;
    let vrad_err = (vrad - 0.5f64.sqrt()).abs() / 0.5f64.sqrt();
    let pass = vol_err < 1e-12
        && bloch_err < 1e-12
        && vrad_err < 1e-12
        && elapsed < Duration::from_millis(1);
    Outcome::new(
        pass,
        format!(
            "vol rel err {vol_err:.1e}, vrad rel err {vrad_err:.1e}, {:.1} µs",
            secs(elapsed) * 1e6
        ),
    )
}

fn criterion_2() -> Outcome {
    let t = Instant::now();
    let exact = vrad_cp_base(2).unwrap();
    // mpmath: 2·vrad(M_4).
    let oracle = 2.0 * vrad_states_oracle(4);
    let exact_ok = (exact - oracle).abs() < 1e-12 && (0.5..=1.0).contains(&exact);
    let body = MatrixBody::new(BodySpec::new(ConeId::CP, 2, Slice::Base).unwrap()).unwrap();
    let est = volume_mcmc(&body, &VolumeSchedule::with_samples(1000), SEED).unwrap();
    let v = est.vrad;
    let mc_ok = (v.value - exact).abs() + 3.0 * v.stderr <= 0.1 * exact;
    let elapsed = t.elapsed();
    Outcome::new(
        exact_ok && mc_ok && elapsed < Duration::from_secs(600),
        format!(
            "exact {exact:.6}, MCMC {:.4} ± {:.4} (dim {}), {:.0} s",
            v.value,
            v.stderr,
            est.dim,
            secs(elapsed)
        ),
    )
}

fn criterion_3() -> Outcome {
    let t = Instant::now();
    // mpmath.
    let reference = [
        (4, 0.855961150431),
        (9, 0.800204441837),
        (16, 0.787083978781),
        (25, 0.782688616690),
    ];
    let vals: Vec<f64> = reference
        .iter()
        .map(|&(d, _)| vrad_states(d).unwrap() * (d as f64).sqrt())
        .collect();
    let elapsed = t.elapsed();
    let agree = reference.iter().zip(&vals).all(|(&(d, r), v)| {
        (v - r).abs() < 1e-9 && (v - vrad_states_oracle(d) * (d as f64).sqrt()).abs() < 1e-9
    });
    let limit = (-0.25f64).exp();
    let monotone = vals.windows(2).all(|w| w[1] < w[0]) && vals.iter().all(|&v| v > limit);
    let close = (vals[3] - limit).abs() / limit < 0.05;
    Outcome::new(
        agree && monotone && close && elapsed < Duration::from_secs(1),
        format!("{vals:.4?} → e^(-1/4) = {limit:.4}"),
    )
}

fn criterion_4() -> Outcome {
    let t = Instant::now();
    let mut lines = Vec::new();
    let mut all_ok = true;
    let mut literal_ok = true;
    for n in [2, 3] {
        let mut specs: Vec<BodySpec> = [ConeId::P, ConeId::D, ConeId::CP, ConeId::T, ConeId::SP]
            .iter()
            .map(|&c| BodySpec::new(c, n, Slice::Base).unwrap())
            .collect();
        specs.push(BodySpec::new(ConeId::CP, n, Slice::TP).unwrap());
        specs.push(BodySpec::new(ConeId::T, n, Slice::TP).unwrap());
        for spec in specs {
            let r = radii_verify(&spec, 1000, SEED ^ n as u64).unwrap();
            literal_ok &= r.pass();
            if spec.cone == ConeId::T && spec.slice == Slice::TP {
                // PPT channels obey D ⪯ I, so no point of this section is
                // farther than √(N−1) from the center; the unitary witness
                // at √(N²−1) is outside it.
                let (_, true_r) = spec.radii().unwrap();
                let ok = r.inradius_ok
                    && r.inner_witness_ok
                    && r.max_probe_norm <= true_r + 1e-9
                    && !r.outer_witness_in_body;
                all_ok &= ok;
                lines.push(format!(
                    "{}: outer witness not attainable (max probe {:.4} ≤ √(N−1) = {:.4})",
                    r.body, r.max_probe_norm, true_r
                ));
            } else {
                all_ok &= r.pass();
                if !r.pass() {
                    lines.push(format!(
                        "{}: {:?}",
                        r.body,
                        r.failures.first().map(|f| &f.detail)
                    ));
                }
            }
        }
    }
    let elapsed = t.elapsed();
    println!("    criterion 4 detail: {}", lines.join("; "));
    let mut o = Outcome::new(
        literal_ok && elapsed < Duration::from_secs(300),
        format!(
            "14 bodies, 10³ probes each, {:.0} s; all but T^TP outer witness {}",
            secs(elapsed),
            if all_ok { "pass" } else { "FAIL" }
        ),
    );
    // The literal claim fails only where it is provably unattainable.
    o.blocking = !all_ok;
    o
}

fn criterion_5() -> Outcome {
    let mut worst: f64 = f64::NEG_INFINITY;
    let mut rng = RngStream::new(SEED, 5);
    for n in [2, 3] {
        for _ in 0..100_000 {
            let a = choi(n, random_base_point(n, &mut rng));
            let b = choi(n, random_base_point(n, &mut rng));
            worst = worst.max(duality_pair_value(&a, &b).unwrap());
        }
        for _ in 0..10_000 {
            let a = choi(n, random_ppt_point(n, &mut rng));
            let b = choi(n, random_decomposable_point(n, &mut rng));
            worst = worst.max(duality_pair_value(&a, &b).unwrap());
        }
    }
    let mut attain: f64 = 0.0;
    for n in [2, 3] {
        let d = n * n;
        let psi = rng.unit_complex(d);
        // Any unit vector orthogonal to ψ.
        let mut phi = rng.unit_complex(d);
        let ov: C64 = psi.iter().zip(&phi).map(|(a, b)| a.conj() * b).sum();
        for (p, s) in phi.iter_mut().zip(&psi) {
            *p -= ov * s;
        }
        let norm = phi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        phi.iter_mut().for_each(|z| *z /= norm);
        let nf = n as f64;
        let a = choi(n, HermMat::projector(&psi).scale(nf));
        let b = choi(n, HermMat::projector(&phi).scale(nf));
        attain = attain.max((duality_pair_value(&a, &b).unwrap() - 1.0).abs());
    }
    Outcome::new(
        worst <= 1.0 + 1e-9 && attain <= 1e-12,
        format!("max pair value {worst:.6}, orthogonal-pure |value − 1| = {attain:.1e}"),
    )
}

fn criterion_6() -> Outcome {
    let params = OracleParams::default();
    let in_t = |p: f64| {
        cone_membership(&isotropic(p), ConeId::T, &params)
            .unwrap()
            .is_in()
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    assert!(in_t(lo) && !in_t(hi));
    while hi - lo > 1e-7 {
        let mid = 0.5 * (lo + hi);
        if in_t(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let p_star = 0.5 * (lo + hi);
    let threshold_ok = (p_star - 1.0 / 3.0).abs() <= 1e-6;

    let mut rng = RngStream::new(SEED, 6);
    let (mut agree, mut skipped, mut disagree) = (0, 0, 0);
    for _ in 0..10_000 {
        let rho = random_state_hs(4, &mut rng);
        let c = concurrence(&rho);
        if c.abs() < 1e-7 {
            skipped += 1;
            continue;
        }
        let h = rho.scale(2.0);
        let sp = cone_membership_herm(&h, 2, ConeId::SP, &params)
            .unwrap()
            .status;
        let t = cone_membership_herm(&h, 2, ConeId::T, &params)
            .unwrap()
            .status;
        let truth = if c < 0.0 { Status::In } else { Status::Out };
        if sp == truth && t == truth {
            agree += 1;
        } else {
            disagree += 1;
        }
    }
    Outcome::new(
        threshold_ok && disagree == 0,
        format!(
            "threshold p = {p_star:.8}; SP = T = concurrence verdict on {agree} points ({skipped} near the boundary skipped, {disagree} disagreements)"
        ),
    )
}

fn criterion_7() -> Outcome {
    let dirs = 10_000;
    let cp = BodySpec::new(ConeId::CP, 2, Slice::Base).unwrap();
    let sp = BodySpec::new(ConeId::SP, 2, Slice::Base).unwrap();
    let w_cp = mean_width_mc(&cp, dirs, SEED).unwrap();
    let w_sp = mean_width_mc(&sp, dirs, SEED + 1).unwrap();
    let widths_ok = w_cp.hi.below(2.0, 3.0) && w_sp.hi.below(2.0 * 2f64.sqrt(), 3.0);

    let b_cp = urysohn_bracket(&cp, dirs, SEED + 2).unwrap();
    let b_sp = urysohn_bracket(&sp, dirs, SEED + 3).unwrap();
    let v_cp = Estimate::exact(vrad_cp_base(2).unwrap());
    let body = MatrixBody::new(sp.clone()).unwrap();
    let v_sp = volume_mcmc(&body, &VolumeSchedule::with_samples(1000), SEED + 4)
        .unwrap()
        .vrad;
    let bracket_ok = b_cp.contains(&v_cp, 3.0) && b_sp.contains(&v_sp, 3.0);
    Outcome::new(
        widths_ok && bracket_ok,
        format!(
            "w(CP) = {:.4} ± {:.4}, w(SP) = {:.4} ± {:.4}; CP [{:.4}, {:.4}] ∋ {:.4}; SP [{:.4}, {:.4}] ∋ {:.4} ± {:.4}",
            w_cp.hi.value,
            w_cp.hi.stderr,
            w_sp.hi.value,
            w_sp.hi.stderr,
            b_cp.lower.value,
            b_cp.upper.value,
            v_cp.value,
            b_sp.lower.value,
            b_sp.upper.value,
            v_sp.value,
            v_sp.stderr
        ),
    )
}

fn criterion_8() -> Outcome {
    let base = vrad_cp_base(2).unwrap();
    let r = 1.0 / 3f64.sqrt();
    let (lo, hi) = section_bounds(base, r, 3f64.sqrt(), 15, 12).unwrap();
    let body = MatrixBody::new(BodySpec::new(ConeId::CP, 2, Slice::TP).unwrap()).unwrap();
    let v = volume_mcmc(&body, &VolumeSchedule::with_samples(1000), SEED + 8)
        .unwrap()
        .vrad;
    let tp_ok = v.above(lo, 3.0) && v.below(hi, 3.0);

    // Cube [−1,1]³ cut by a coordinate plane: the section is [−1,1]².
    let cube = vrad_from_vol(8.0, 3).unwrap();
    let (clo, chi) = section_bounds(cube, 1.0, 3f64.sqrt(), 3, 2).unwrap();
    let square = (4.0 / PI).sqrt();
    let square_mc = volume_mcmc(
        &CubeBody { m: 2, half: 1.0 },
        &VolumeSchedule::with_samples(1000),
        SEED + 9,
    )
    .unwrap()
    .vrad;
    let cube_ok = clo <= square
        && square <= chi
        && (square_mc.value - square).abs() <= 3.0 * square_mc.stderr + 1e-3;
    Outcome::new(
        tp_ok && cube_ok,
        format!(
            "CP₂^TP {:.4} ± {:.4} in [{lo:.4}, {hi:.4}]; square {square:.4} in [{clo:.4}, {chi:.4}]",
            v.value, v.stderr
        ),
    )
}

fn criterion_9() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for n in 2..=5 {
        let r = no_duality_discrepancy(n, 10_000, SEED + n as u64).unwrap();
        let ok = r.ratio >= n as f64 - 1e-9
            && r.x_in_cp_base
            && r.sampled_max <= r.analytic_denominator + 1e-12;
        pass &= ok;
        parts.push(format!(
            "N={n}: ratio {:.6}, max ⟨u,y⟩ {:.4} ≤ {:.4}",
            r.ratio, r.sampled_max, r.analytic_denominator
        ));
    }
    Outcome::new(pass, parts.join("; "))
}

fn criterion_10() -> Outcome {
    let mut rng = RngStream::new(SEED, 10);
    let mut worst: f64 = f64::NEG_INFINITY;
    let mut pass = true;
    for n in [2, 3] {
        for _ in 0..1000 {
            let m = random_block_positive(n, &mut rng).unwrap();
            let c = block_positive_trace_check(&m, 1e-9);
            pass &= c.pass;
            worst = worst.max(c.tr_sq - c.sq_tr);
        }
    }
    let mut swap_gap: f64 = 0.0;
    for n in [2, 3] {
        let s = ChoiMat::swap(n).to_herm().unwrap();
        let c = block_positive_trace_check(&s, 1e-9);
        swap_gap = swap_gap.max((c.tr_sq - c.sq_tr).abs());
    }
    Outcome::new(
        pass && swap_gap < 1e-12,
        format!("max Tr M² − (Tr M)² = {worst:.4}; SWAP gap {swap_gap:.1e}"),
    )
}

fn criterion_11() -> Outcome {
    let mut rng = RngStream::new(SEED, 11);
    let mut worst: f64 = 0.0;
    let (mut failures, mut iterated) = (0, 0);
    for i in 0..1000 {
        let n = if i % 2 == 0 { 2 } else { 3 };
        let w = rng.uniform();
        // Low-rank parts keep both D and D^Γ indefinite in most draws; the
        // small identity share keeps D off the boundary of the cone.
        let part = |rng: &mut RngStream| {
            let d = n * n;
            random_rank_state(d, 1 + rng.index(2), rng)
                .scale(0.95)
                .add(&HermMat::identity(d).scale(0.05 / d as f64))
        };
        let a = part(&mut rng).scale(w);
        let b = part(&mut rng).scale(1.0 - w);
        let d = a.add(&partial_transpose_herm(&b, n));
        match decomposable_split(&d, n, 1e-7, 50_000).unwrap() {
            SplitOutcome::Success(s) => {
                iterated += usize::from(s.iterations > 0);
                let rebuilt = s.a.add(&partial_transpose_herm(&s.b, n));
                let psd = eigh(&s.a).unwrap().min() >= -1e-9 && eigh(&s.b).unwrap().min() >= -1e-9;
                let res = d.sub(&rebuilt).hs_norm();
                worst = worst.max(res);
                if !psd || res >= 1e-6 {
                    failures += 1;
                }
            }
            SplitOutcome::Failure { .. } => failures += 1,
        }
    }
    let fixture = choi_map_fixture().to_herm().unwrap();
    let plateau = matches!(
        decomposable_split(&fixture, 3, 1e-7, 50_000).unwrap(),
        SplitOutcome::Failure { plateau: true, .. }
    );
    let witness = ppt_witness_search(&fixture, 3, 400, &mut rng, None).unwrap();
    let sigma = &witness.sigma;
    let sigma_ppt = eigh(sigma).unwrap().min() >= -1e-12
        && eigh(&partial_transpose_herm(sigma, 3)).unwrap().min() >= -1e-12;
    let rejected = sigma_ppt && fixture.hs_inner(sigma) < 0.0;
    Outcome::new(
        failures == 0 && plateau && rejected,
        format!(
            "{} splits ({iterated} iterative), max residual {worst:.1e}; fixture plateau {plateau}, witness Tr(Dσ) = {:.4}",
            1000 - failures,
            witness.value
        ),
    )
}

fn criterion_12() -> Outcome {
    let t = Instant::now();
    let r = tni_experiment(2, &VolumeSchedule::with_samples(1000), SEED + 12, 1000).unwrap();
    let fibers_ok = r.fiber_error < 1e-9 && r.unital_fiber_error < 1e-9 && r.identity_error < 1e-9;
    let ratio_ok = r.in_bracket == Some(true);
    let (lo, hi) = r.bracket;
    let expect_lo = (E * 2f64.powf(2.5)).powi(-4);
    let bracket_ok = (lo - expect_lo).abs() < 1e-15 && (hi - 0.25).abs() < 1e-15;
    let mut o = Outcome::new(
        fibers_ok && ratio_ok && bracket_ok,
        format!(
            "ratio {} in [{lo:.3e}, {hi}]{}; fiber err {:.1e}/{:.1e} on {} samples, {:.0} s",
            r.ratio.map_or("n/a".to_string(), |x| format!("{x:.4e}")),
            r.aborted
                .as_deref()
                .map_or(String::new(), |a| format!(" (aborted: {a})")),
            r.fiber_error,
            r.unital_fiber_error,
            r.fiber_samples,
            secs(t.elapsed())
        ),
    );
    // The volume ratio is non-blocking only when the chains fail to mix.
    o.blocking = !(fibers_ok && bracket_ok) || (r.aborted.is_none() && !ratio_ok);
    o
}

fn main() -> ExitCode {
    let filter: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let criteria: [(u32, fn() -> Outcome); 12] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
        (10, criterion_10),
        (11, criterion_11),
        (12, criterion_12),
    ];
    let mut blocking_failures = 0;
    for (k, run) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| f == &k.to_string()) {
            continue;
        }
        let o = run();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        let note = if !o.pass && !o.blocking {
            " [non-blocking]"
        } else {
            ""
        };
        println!("criterion {k}: {tag}{note} {}", o.detail);
        if !o.pass && o.blocking {
            blocking_failures += 1;
        }
    }
    if blocking_failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
