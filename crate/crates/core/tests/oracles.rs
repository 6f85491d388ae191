mod common;

use beamalign::alignment::{misalignment_cost_binary, misalignment_cost_two_term, misalignment_cost_union};
use beamalign::codebooks::Codebook;
use beamalign::cvec;
use beamalign::estimator::update_posteriors;
use beamalign::{
    build_channel_codebook, marcum_q1, pr_mag_sq_greater, run_experiment, select_sounding_vector, Complex64,
    PepParams, SelectorStrategy, SoundingState, SystemConfig,
};
use common::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[test]
fn bessel_quadrature_matches_reference_values() {
    // e^{-x} I0(x) at x = 0, 1, 10, 100.
    for (x, want) in [
        (0.0, 1.0),
        (1.0, 0.465_759_607_593_640_4),
        (10.0, 0.127_833_337_163_428_6),
        (100.0, 0.039_944_379_299_096_68),
    ] {
        let got = scaled_bessel_i0_quadrature(x);
        assert!((got - want).abs() < 1e-13 * want.max(1.0), "x={x}: {got} vs {want}");
    }
}

#[test]
fn marcum_quadrature_matches_closed_forms() {
    for b in [0.0f64, 0.5, 1.0, 3.0, 7.0] {
        let want = (-0.5 * b * b).exp();
        assert!((marcum_q1_quadrature(0.0, b) - want).abs() < 1e-11);
    }
    assert!((marcum_q1_quadrature(3.0, 0.0) - 1.0).abs() < 1e-11);
}

#[test]
fn marcum_agrees_with_quadrature_off_grid() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..60 {
        let a = rng.gen_range(0.0..14.0);
        let b = rng.gen_range(0.0..14.0);
        let got = marcum_q1(a, b).unwrap();
        let want = marcum_q1_quadrature(a, b);
        assert!((got - want).abs() < 1e-8, "Q1({a}, {b}) = {got}, oracle {want}");
    }
}

#[test]
fn unscaled_marcum_arguments_disagree_with_simulation() {
    // Feeding |λ|, |β| to Q1 without the √2 factor is wrong for CN(0, 1) noise.
    let p = PepParams::new(c(1.0, 0.0), c(0.3, 0.0), c(0.2, 0.0), c(1.0, 0.0)).unwrap();
    let d = p.q_y.norm_sqr() - p.q_x.norm_sqr();
    let lambda = (p.mu_y * p.q_y.conj() - p.mu_x * p.q_x.conj()) / d;
    let beta = (p.mu_x * p.q_y - p.q_x * p.mu_y) / d;
    let unscaled = 1.0 - marcum_q1(lambda.norm(), beta.norm()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mc = mc_mag_sq_greater(&p, 400_000, &mut rng);
    let analytic = pr_mag_sq_greater(&p).unwrap();
    assert!((analytic - mc.p).abs() < 4.0 * mc.stderr_at(analytic));
    assert!((unscaled - mc.p).abs() > 0.05, "unscaled {unscaled}, simulation {}", mc.p);
}

#[test]
fn equal_noise_magnitudes_match_simulation() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..20 {
        let q = c(rng.gen_range(0.2..1.5), rng.gen_range(-1.0..1.0));
        let phase = Complex64::from_polar(1.0, rng.gen_range(0.0..std::f64::consts::TAU));
        let p = PepParams::new(
            c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)),
            q,
            c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)),
            q * phase,
        )
        .unwrap();
        let analytic = pr_mag_sq_greater(&p).unwrap();
        let mc = mc_mag_sq_greater(&p, 200_000, &mut rng);
        assert!((analytic - mc.p).abs() < 4.0 * mc.stderr_at(analytic), "{p:?}: {analytic} vs {}", mc.p);
    }
}

#[test]
fn binary_selection_prefers_the_discriminating_candidate() {
    let m = 4;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let h1: Vec<Complex64> = vec![c(s, 0.0), c(s, 0.0), c(0.0, 0.0), c(0.0, 0.0)];
    let h2: Vec<Complex64> = vec![c(s, 0.0), c(-s, 0.0), c(0.0, 0.0), c(0.0, 0.0)];
    let channel = Codebook::new(vec![h1, h2], None).unwrap();
    // Orthogonal to both codewords, then aligned with their difference.
    let sounding = Codebook::new(vec![cvec::unit_vector(2, m), cvec::unit_vector(1, m)], None).unwrap();

    let mut state = SoundingState::new(m, 2);
    state.push(&cvec::unit_vector(0, m), c(1.3, -0.4)).unwrap();
    state.set_posteriors(vec![0.5, 0.5]).unwrap();
    let (power, sigma) = (1.0, 1.0);

    let costs: Vec<f64> = sounding
        .iter()
        .map(|w| misalignment_cost_binary(w, &channel, &state, power, sigma).unwrap())
        .collect();
    assert!(costs[1] < costs[0], "{costs:?}");
    let pick = select_sounding_vector(&sounding, &channel, &state, power, sigma, SelectorStrategy::ExactBinary).unwrap();
    assert_eq!(pick.index, 1);

    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mc: Vec<f64> = sounding
        .iter()
        .map(|w| mc_misalignment(&state, &channel, w, power, sigma * sigma, 200_000, &mut rng).p)
        .collect();
    assert!(mc[1] < mc[0], "{mc:?}");
    for (cost, sim) in costs.iter().zip(&mc) {
        assert!((cost - sim).abs() < 0.01, "cost {cost} vs simulation {sim}");
    }
}

#[test]
fn two_term_ranks_like_union_for_peaked_posteriors() {
    let (m, n, l) = (4, 8, 8);
    let channel = build_channel_codebook(m, n);
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (power, sigma2) = (1.0, 1.0);
    let (mut instances, mut agree) = (0, 0);
    while instances < 500 {
        let k = rng.gen_range(2..=4);
        let (mut state, _) = random_state(&channel, k, power, sigma2, &mut rng);
        let p = update_posteriors(&channel, &state, sigma2);
        if p.iter().copied().fold(0.0, f64::max) <= 0.99 {
            continue;
        }
        state.set_posteriors(p).unwrap();
        let candidates: Vec<Vec<Complex64>> = (0..l).map(|_| random_unit(m, &mut rng)).collect();
        let best = |cost: &dyn Fn(&[Complex64]) -> f64| {
            let v: Vec<f64> = candidates.iter().map(|w| cost(w)).collect();
            argmin(&v)
        };
        let union = best(&|w| misalignment_cost_union(w, &channel, &state, power, 1.0).unwrap());
        let two = best(&|w| misalignment_cost_two_term(w, &channel, &state, power, 1.0).unwrap());
        instances += 1;
        if union == two {
            agree += 1;
        }
    }
    assert!(agree >= 475, "two-term and union agree on {agree}/500 instances");
}

fn argmin(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if *x < v[best] {
            best = i;
        }
    }
    best
}

fn small_experiment(trials: usize) -> SystemConfig {
    let mut cfg = SystemConfig::new(8).with_snr_db(0.0);
    cfg.trials = trials;
    cfg.training_length = 6;
    cfg.rng_seed = 11;
    cfg
}

#[test]
fn standard_error_shrinks_with_root_trials() {
    let few = run_experiment(&small_experiment(100), None).unwrap();
    let many = run_experiment(&small_experiment(400), None).unwrap();
    for (a, b) in few.closed_loop.iter().zip(&many.closed_loop).skip(2) {
        let ratio = a.stderr / b.stderr;
        assert!((ratio / 2.0 - 1.0).abs() < 0.25, "k={}: ratio {ratio}", a.k);
    }
}

#[test]
fn closed_loop_gain_does_not_decrease() {
    let mut cfg = SystemConfig::new(16).with_snr_db(0.0);
    cfg.trials = 400;
    cfg.training_length = 12;
    let summary = run_experiment(&cfg, None).unwrap();
    for pair in summary.closed_loop.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let band = 3.0 * (a.stderr.powi(2) + b.stderr.powi(2)).sqrt();
        assert!(b.mean >= a.mean - band, "k={} -> {}: {} -> {}", a.k, b.k, a.mean, b.mean);
    }
}
