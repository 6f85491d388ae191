//! Generalized maximum-likelihood direction estimation.
//!
//! The complex channel gain is a nuisance parameter replaced by its own ML
//! estimate `α̂_h = h* W y / (√ρ ‖W* h‖²)`. Substituting it back leaves the
//! metric `d_k(h) = |y* W* h|² / ‖W* h‖²`, and the residual satisfies
//! `‖y − α̂_h √ρ W* h‖² = ‖y‖² − d_k(h)`, so the plug-in posterior of each
//! codeword is a softmax of `d_k / σ²`.
//!
//! The plug-in posterior cannot rule out a codeword that was sounded and
//! returned only noise, because `α̂` shrinks to fit. Integrating the gain out
//! under a `CN(0, v)` prior instead gives the log-evidence
//!
//! `v ρ |y* W* h|² / (σ² (σ² + v ρ ‖W* h‖²)) − ln(1 + v ρ ‖W* h‖² / σ²)`
//!
//! up to a codeword-independent constant.

use num_complex::Complex64;

use crate::codebooks::Codebook;
use crate::cvec;
use crate::error::{Error, Result};

/// `‖W* h‖²` at or below this value means the soundings so far carry no
/// information about `h`.
pub const UNOBSERVABLE_ENERGY: f64 = 1e-24;

/// Sounding vectors, received samples and codeword posteriors of one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct SoundingState {
    dim: usize,
    soundings: Vec<Vec<Complex64>>,
    samples: Vec<Complex64>,
    posteriors: Vec<f64>,
}

impl SoundingState {
    /// Empty history with a uniform prior over `num_codewords` entries.
    pub fn new(dim: usize, num_codewords: usize) -> Self {
        SoundingState {
            dim,
            soundings: Vec::new(),
            samples: Vec::new(),
            posteriors: vec![1.0 / num_codewords as f64; num_codewords],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of channel uses so far.
    pub fn channel_use(&self) -> usize {
        self.samples.len()
    }

    pub fn soundings(&self) -> &[Vec<Complex64>] {
        &self.soundings
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn posteriors(&self) -> &[f64] {
        &self.posteriors
    }

    pub fn push(&mut self, sounding: &[Complex64], sample: Complex64) -> Result<()> {
        if sounding.len() != self.dim {
            return Err(Error::Precondition(format!(
                "sounding vector has length {}, expected {}",
                sounding.len(),
                self.dim
            )));
        }
        self.soundings.push(sounding.to_vec());
        self.samples.push(sample);
        Ok(())
    }

    pub fn set_posteriors(&mut self, posteriors: Vec<f64>) -> Result<()> {
        if posteriors.len() != self.posteriors.len() {
            return Err(Error::Precondition(format!(
                "{} posteriors for {} codewords",
                posteriors.len(),
                self.posteriors.len()
            )));
        }
        self.posteriors = posteriors;
        Ok(())
    }

    /// Recomputes the posteriors from the current history.
    pub fn refresh_posteriors(&mut self, channel: &Codebook, noise_variance: f64) {
        self.posteriors = update_posteriors(channel, self, noise_variance);
    }

    /// `(y* W* h, ‖W* h‖²)`.
    pub fn project(&self, h: &[Complex64]) -> Projection {
        let mut correlation = Complex64::new(0.0, 0.0);
        let mut energy = 0.0;
        for (w, y) in self.soundings.iter().zip(&self.samples) {
            let p = cvec::inner(w, h);
            correlation += y.conj() * p;
            energy += p.norm_sqr();
        }
        Projection {
            correlation,
            energy,
        }
    }

    pub fn project_codebook(&self, channel: &Codebook) -> Vec<Projection> {
        channel.iter().map(|h| self.project(h)).collect()
    }
}

/// Sufficient statistics of the history for one candidate direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projection {
    /// `y_k* W_k* h`
    pub correlation: Complex64,
    /// `‖W_k* h‖²`
    pub energy: f64,
}

impl Projection {
    pub fn is_observable(&self) -> bool {
        self.energy > UNOBSERVABLE_ENERGY
    }

    /// `d_k(h)`, zero for unobservable directions.
    pub fn metric(&self) -> f64 {
        if self.is_observable() {
            self.correlation.norm_sqr() / self.energy
        } else {
            0.0
        }
    }

    /// Log-evidence of the codeword with `α ~ CN(0, gain_variance)`, zero for
    /// unobservable directions.
    pub fn log_evidence(&self, gain_variance: f64, power: f64, noise_variance: f64) -> f64 {
        if !self.is_observable() {
            return 0.0;
        }
        let spread = gain_variance * power;
        let snr = spread * self.energy / noise_variance;
        spread * self.correlation.norm_sqr() / (noise_variance * (noise_variance + spread * self.energy))
            - snr.ln_1p()
    }

    /// `α̂_h`, zero for unobservable directions.
    pub fn gain(&self, power: f64) -> GainEstimate {
        if self.is_observable() {
            GainEstimate {
                value: self.correlation.conj() / (power.sqrt() * self.energy),
                observable: true,
            }
        } else {
            GainEstimate {
                value: Complex64::new(0.0, 0.0),
                observable: false,
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainEstimate {
    pub value: Complex64,
    /// False when `‖W_k* h‖ = 0`; `value` is then 0.
    pub observable: bool,
}

/// ML estimate of the complex gain assuming the channel direction is `h`.
pub fn gain_estimate(h: &[Complex64], state: &SoundingState, power: f64) -> GainEstimate {
    state.project(h).gain(power)
}

/// `d_k(h) = |y_k* W_k* h|² / ‖W_k* h‖²`.
pub fn glrt_metric(h: &[Complex64], state: &SoundingState) -> f64 {
    state.project(h).metric()
}

/// Index (lowest on ties) and entry of the codeword maximizing `d_k`.
pub fn estimate_direction<'a>(channel: &'a Codebook, state: &SoundingState) -> (usize, &'a [Complex64]) {
    let metrics: Vec<f64> = channel.iter().map(|h| glrt_metric(h, state)).collect();
    let index = argmax(&metrics);
    (index, channel.entry(index))
}

/// Generalized-likelihood posterior `p_i ∝ exp(d_k(h_i) / σ²)`; uniform
/// before the first observation.
pub fn update_posteriors(channel: &Codebook, state: &SoundingState, noise_variance: f64) -> Vec<f64> {
    if state.channel_use() == 0 {
        return vec![1.0 / channel.len() as f64; channel.len()];
    }
    let metrics: Vec<f64> = channel.iter().map(|h| glrt_metric(h, state)).collect();
    softmax(&metrics, noise_variance)
}

/// Posterior with the channel gain integrated out under `α ~ CN(0, gain_variance)`;
/// uniform before the first observation.
pub fn update_posteriors_marginal(
    channel: &Codebook,
    state: &SoundingState,
    gain_variance: f64,
    power: f64,
    noise_variance: f64,
) -> Vec<f64> {
    if state.channel_use() == 0 {
        return vec![1.0 / channel.len() as f64; channel.len()];
    }
    let scores: Vec<f64> = state
        .project_codebook(channel)
        .iter()
        .map(|p| p.log_evidence(gain_variance, power, noise_variance))
        .collect();
    softmax(&scores, 1.0)
}

/// `exp(x_i / temperature)` normalized, with the maximum subtracted first.
pub fn softmax(values: &[f64], temperature: f64) -> Vec<f64> {
    let top = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut weights: Vec<f64> = values
        .iter()
        .map(|v| ((v - top) / temperature).exp())
        .collect();
    let total: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= total;
    }
    weights
}

/// First index of the maximum.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    best
}
