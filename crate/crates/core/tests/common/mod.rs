//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use beamalign::channel::complex_gaussian;
use beamalign::codebooks::Codebook;
use beamalign::cvec;
use beamalign::estimator::{gain_estimate, SoundingState};
use beamalign::{Complex64, PepParams};
use rand::Rng;

/// Monte Carlo estimate and standard error of a probability.
#[derive(Debug, Clone, Copy)]
pub struct McEstimate {
    pub p: f64,
    pub draws: usize,
}

impl McEstimate {
    pub fn from_count(hits: usize, draws: usize) -> Self {
        McEstimate {
            p: hits as f64 / draws as f64,
            draws,
        }
    }

    /// Binomial standard error at probability `p`, floored at one draw's
    /// worth of mass so that certain events still get a finite band.
    pub fn stderr_at(&self, p: f64) -> f64 {
        (p * (1.0 - p) / self.draws as f64).sqrt().max(1.0 / self.draws as f64)
    }
}

/// `Pr(|μx + qx n|² > |μy + qy n|²)` with one shared `n ~ CN(0, 1)`.
pub fn mc_mag_sq_greater<R: Rng>(p: &PepParams, draws: usize, rng: &mut R) -> McEstimate {
    let mut hits = 0;
    for _ in 0..draws {
        let n = complex_gaussian(rng, 1.0);
        let x = p.mu_x + p.q_x * n;
        let y = p.mu_y + p.q_y * n;
        if x.norm_sqr() > y.norm_sqr() {
            hits += 1;
        }
    }
    McEstimate::from_count(hits, draws)
}

/// GLRT metrics of every codeword after appending `(w, sample)` to `state`,
/// computed from scratch.
pub fn metrics_after(state: &SoundingState, channel: &Codebook, w: &[Complex64], sample: Complex64) -> Vec<f64> {
    channel
        .iter()
        .map(|h| {
            let mut corr = Complex64::new(0.0, 0.0);
            let mut energy = 0.0;
            for (wt, yt) in state.soundings().iter().zip(state.samples()) {
                let proj = cvec::inner(wt, h);
                corr += yt.conj() * proj;
                energy += proj.norm_sqr();
            }
            let proj = cvec::inner(w, h);
            corr += sample.conj() * proj;
            energy += proj.norm_sqr();
            if energy > 1e-24 {
                corr.norm_sqr() / energy
            } else {
                0.0
            }
        })
        .collect()
}

/// Plug-in draw of the next sample when codeword `i` is the truth.
pub fn plug_in_sample<R: Rng>(
    state: &SoundingState,
    h_true: &[Complex64],
    w: &[Complex64],
    power: f64,
    noise_variance: f64,
    rng: &mut R,
) -> Complex64 {
    let alpha = gain_estimate(h_true, state, power).value;
    alpha * power.sqrt() * cvec::inner(w, h_true) + complex_gaussian(rng, noise_variance)
}

/// Event-level estimate of `Pr(d_{k+1}(h_alt) > d_{k+1}(h_true))` under the
/// plug-in model.
#[allow(clippy::too_many_arguments)]
pub fn mc_pep<R: Rng>(
    state: &SoundingState,
    channel: &Codebook,
    i_true: usize,
    j_alt: usize,
    w: &[Complex64],
    power: f64,
    noise_variance: f64,
    draws: usize,
    rng: &mut R,
) -> McEstimate {
    let sub = Codebook::new(vec![channel.entry(i_true).to_vec(), channel.entry(j_alt).to_vec()], None)
        .expect("codewords are unit norm");
    let mut hits = 0;
    for _ in 0..draws {
        let y = plug_in_sample(state, sub.entry(0), w, power, noise_variance, rng);
        let d = metrics_after(state, &sub, w, y);
        if d[1] > d[0] {
            hits += 1;
        }
    }
    McEstimate::from_count(hits, draws)
}

/// Probability that the GLRT after one more sounding with `w` misses the
/// truth, with the truth drawn from the state's posteriors.
pub fn mc_misalignment<R: Rng>(
    state: &SoundingState,
    channel: &Codebook,
    w: &[Complex64],
    power: f64,
    noise_variance: f64,
    draws: usize,
    rng: &mut R,
) -> McEstimate {
    let p = state.posteriors();
    let mut hits = 0;
    for _ in 0..draws {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        let mut truth = p.len() - 1;
        for (i, pi) in p.iter().enumerate() {
            acc += pi;
            if u < acc {
                truth = i;
                break;
            }
        }
        let y = plug_in_sample(state, channel.entry(truth), w, power, noise_variance, rng);
        let d = metrics_after(state, channel, w, y);
        // The estimator breaks ties toward the lowest index.
        let missed = d.iter().enumerate().any(|(j, dj)| (j < truth && *dj >= d[truth]) || (j > truth && *dj > d[truth]));
        if missed {
            hits += 1;
        }
    }
    McEstimate::from_count(hits, draws)
}

pub fn random_unit<R: Rng>(m: usize, rng: &mut R) -> Vec<Complex64> {
    let v: Vec<Complex64> = (0..m).map(|_| complex_gaussian(rng, 1.0)).collect();
    let n = cvec::norm(&v);
    v.into_iter().map(|x| x / n).collect()
}

/// `k` random unit soundings of a random codeword with gain `CN(0, M)`.
pub fn random_state<R: Rng>(
    channel: &Codebook,
    k: usize,
    power: f64,
    noise_variance: f64,
    rng: &mut R,
) -> (SoundingState, usize) {
    let m = channel.dim();
    let truth = rng.gen_range(0..channel.len());
    let alpha = complex_gaussian(rng, m as f64);
    let mut state = SoundingState::new(m, channel.len());
    for _ in 0..k {
        let w = random_unit(m, rng);
        let y = alpha * power.sqrt() * cvec::inner(&w, channel.entry(truth)) + complex_gaussian(rng, noise_variance);
        state.push(&w, y).expect("matching dimension");
    }
    (state, truth)
}

/// `e^{-x} I0(x)` from the integral `(1/π) ∫_0^π e^{x (cos θ − 1)} dθ`; the
/// trapezoid rule is spectrally accurate for this periodic integrand.
pub fn scaled_bessel_i0_quadrature(x: f64) -> f64 {
    let n = 40 + (8.0 * x.sqrt()).ceil() as usize;
    let h = std::f64::consts::PI / n as f64;
    let mut sum = 0.5 * (1.0 + (-2.0 * x).exp());
    for i in 1..n {
        sum += (x * ((i as f64 * h).cos() - 1.0)).exp();
    }
    sum * h / std::f64::consts::PI
}

/// `Q1(a, b) = ∫_b^∞ x e^{−(x² + a²)/2} I0(a x) dx` by adaptive Simpson.
pub fn marcum_q1_quadrature(a: f64, b: f64) -> f64 {
    let f = |x: f64| x * (-0.5 * (x - a) * (x - a)).exp() * scaled_bessel_i0_quadrature(a * x);
    let upper = a.max(b) + 40.0;
    // Unit panels keep the adaptive rule from skipping a narrow bump.
    let panels = (upper - b).ceil() as usize;
    let width = (upper - b) / panels as f64;
    (0..panels)
        .map(|i| {
            let lo = b + i as f64 * width;
            adaptive_simpson(&f, lo, lo + width, 1e-14, 40)
        })
        .sum()
}

fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let c = 0.5 * (a + b);
    let (fa, fb, fc) = (f(a), f(b), f(c));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fc + fb);
    simpson_step(f, a, b, fa, fb, fc, whole, tol, depth)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fb: f64,
    fc: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let c = 0.5 * (a + b);
    let (d, e) = (0.5 * (a + c), 0.5 * (c + b));
    let (fd, fe) = (f(d), f(e));
    let left = (c - a) / 6.0 * (fa + 4.0 * fd + fc);
    let right = (b - c) / 6.0 * (fc + 4.0 * fe + fb);
    if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
        return left + right + (left + right - whole) / 15.0;
    }
    simpson_step(f, a, c, fa, fc, fd, left, 0.5 * tol, depth - 1)
        + simpson_step(f, c, b, fc, fb, fe, right, 0.5 * tol, depth - 1)
}
