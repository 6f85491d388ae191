//! Closed-loop sounding vector selection.
//!
//! For a candidate `w` the next sample is modeled as
//! `y_{k+1} = α̂_{h_i} √ρ w* h_i + n` under the hypothesis that `h_i` is the
//! true direction. The normalized correlations `y* W* h / ‖W* h‖` of the
//! extended history are then affine in the single noise term `n`, and the
//! pairwise error probability (PEP) of preferring `h_j` follows from
//! [`pr_mag_sq_greater`]. The misalignment cost weights PEPs by the
//! current posteriors; the next sounding vector is the codeword minimizing it.

use std::sync::atomic::{AtomicU64, Ordering};

use num_complex::Complex64;

use crate::codebooks::Codebook;
use crate::config::SelectorStrategy;
use crate::cvec;
use crate::error::{Error, Result};
use crate::estimator::{GainEstimate, Projection, SoundingState, UNOBSERVABLE_ENERGY};
use crate::numerics::{pr_mag_sq_greater, PepParams};

/// Inputs to a single pairwise error probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PepInput {
    Params(PepParams),
    /// One of the two codewords stays unobservable after the candidate
    /// sounding; the PEP is fixed (0 if the alternative is unobservable,
    /// 1 if only the true codeword is).
    Degenerate(f64),
}

/// The misalignment model of one sounding state, ready to score candidates.
///
/// Counts every PEP it evaluates.
#[derive(Debug)]
pub struct MisalignmentModel<'a> {
    channel: &'a Codebook,
    posteriors: &'a [f64],
    amplitude: f64,
    noise_std: f64,
    projections: Vec<Projection>,
    gains: Vec<GainEstimate>,
    pep_calls: AtomicU64,
}

impl<'a> MisalignmentModel<'a> {
    /// `power` is the transmit power ρ; `noise_std` is σ_n.
    pub fn new(
        channel: &'a Codebook,
        state: &'a SoundingState,
        power: f64,
        noise_std: f64,
    ) -> Result<Self> {
        if state.channel_use() == 0 {
            return Err(Error::Precondition(
                "misalignment cost needs at least one observation".into(),
            ));
        }
        if state.posteriors().len() != channel.len() {
            return Err(Error::Precondition(format!(
                "{} posteriors for a {}-entry channel codebook",
                state.posteriors().len(),
                channel.len()
            )));
        }
        let projections = state.project_codebook(channel);
        let gains = projections.iter().map(|p| p.gain(power)).collect();
        Ok(MisalignmentModel {
            channel,
            posteriors: state.posteriors(),
            amplitude: power.sqrt(),
            noise_std,
            projections,
            gains,
            pep_calls: AtomicU64::new(0),
        })
    }

    pub fn pep_calls(&self) -> u64 {
        self.pep_calls.load(Ordering::Relaxed)
    }

    pub fn channel(&self) -> &Codebook {
        self.channel
    }

    /// Parameters of `Pr(d_{k+1}(h_alt) > d_{k+1}(h_true))` after sounding
    /// with `w`.
    pub fn pep_params(&self, i_true: usize, j_alt: usize, w: &[Complex64]) -> PepInput {
        let to_true = cvec::inner(w, self.channel.entry(i_true));
        let to_alt = cvec::inner(w, self.channel.entry(j_alt));
        self.pep_params_projected(i_true, j_alt, to_true, to_alt)
    }

    /// Same as [`Self::pep_params`] with `w* h_true` and `w* h_alt` given.
    fn pep_params_projected(
        &self,
        i_true: usize,
        j_alt: usize,
        to_true: Complex64,
        to_alt: Complex64,
    ) -> PepInput {
        let hist_true = &self.projections[i_true];
        let hist_alt = &self.projections[j_alt];
        let energy_true = hist_true.energy + to_true.norm_sqr();
        let energy_alt = hist_alt.energy + to_alt.norm_sqr();
        if energy_alt <= UNOBSERVABLE_ENERGY {
            return PepInput::Degenerate(0.0);
        }
        if energy_true <= UNOBSERVABLE_ENERGY {
            return PepInput::Degenerate(1.0);
        }
        let norm_true = energy_true.sqrt();
        let norm_alt = energy_alt.sqrt();
        // Predicted conj(y_{k+1}) without noise: √ρ α̂* (h_true* w).
        let predicted = self.amplitude * self.gains[i_true].value.conj() * to_true.conj();
        PepInput::Params(PepParams {
            mu_x: (hist_alt.correlation + predicted * to_alt) / norm_alt,
            q_x: self.noise_std * to_alt / norm_alt,
            mu_y: (hist_true.correlation + predicted * to_true) / norm_true,
            q_y: self.noise_std * to_true / norm_true,
        })
    }

    /// Probability that `h_alt` beats `h_true` at channel use `k + 1`.
    pub fn pep(&self, i_true: usize, j_alt: usize, w: &[Complex64]) -> Result<f64> {
        let to_true = cvec::inner(w, self.channel.entry(i_true));
        let to_alt = cvec::inner(w, self.channel.entry(j_alt));
        self.pep_projected(i_true, j_alt, to_true, to_alt)
    }

    fn pep_projected(
        &self,
        i_true: usize,
        j_alt: usize,
        to_true: Complex64,
        to_alt: Complex64,
    ) -> Result<f64> {
        self.pep_calls.fetch_add(1, Ordering::Relaxed);
        match self.pep_params_projected(i_true, j_alt, to_true, to_alt) {
            PepInput::Degenerate(p) => Ok(p),
            PepInput::Params(p) => pr_mag_sq_greater(&p),
        }
    }

    /// Exact cost for a two-entry channel codebook.
    pub fn cost_binary(&self, w: &[Complex64]) -> Result<f64> {
        if self.channel.len() != 2 {
            return Err(Error::Strategy(format!(
                "exact binary cost needs 2 channel codewords, got {}",
                self.channel.len()
            )));
        }
        self.pair_cost(0, 1, w)
    }

    /// Union bound `Σ_i Σ_{j≠i} PEP(i → j) p_i`.
    pub fn cost_union(&self, w: &[Complex64]) -> Result<f64> {
        let proj: Vec<Complex64> = self.channel.iter().map(|h| cvec::inner(w, h)).collect();
        let mut total = 0.0;
        for i in 0..self.channel.len() {
            let mut row = 0.0;
            for j in 0..self.channel.len() {
                if j != i {
                    row += self.pep_projected(i, j, proj[i], proj[j])?;
                }
            }
            total += row * self.posteriors[i];
        }
        Ok(total)
    }

    /// Cost restricted to the two most likely codewords.
    pub fn cost_two_term(&self, w: &[Complex64]) -> Result<f64> {
        let (first, second) = top_two(self.posteriors);
        self.pair_cost(first, second, w)
    }

    fn pair_cost(&self, a: usize, b: usize, w: &[Complex64]) -> Result<f64> {
        let to_a = cvec::inner(w, self.channel.entry(a));
        let to_b = cvec::inner(w, self.channel.entry(b));
        Ok(self.pep_projected(a, b, to_a, to_b)? * self.posteriors[a]
            + self.pep_projected(b, a, to_b, to_a)? * self.posteriors[b])
    }

    pub fn cost(&self, strategy: SelectorStrategy, w: &[Complex64]) -> Result<f64> {
        match strategy {
            SelectorStrategy::ExactBinary => self.cost_binary(w),
            SelectorStrategy::UnionBound => self.cost_union(w),
            SelectorStrategy::TwoTerm => self.cost_two_term(w),
        }
    }
}

/// Indices of the largest and second-largest posterior, lower index first
/// on ties.
pub fn top_two(p: &[f64]) -> (usize, usize) {
    debug_assert!(p.len() >= 2);
    let (mut first, mut second) = if p[1] > p[0] { (1, 0) } else { (0, 1) };
    for (i, &v) in p.iter().enumerate().skip(2) {
        if v > p[first] {
            second = first;
            first = i;
        } else if v > p[second] {
            second = i;
        }
    }
    (first, second)
}

/// Outcome of a candidate sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Selection {
    /// Index into the sounding codebook.
    pub index: usize,
    /// Cost of the chosen candidate; `None` for the cold start.
    pub cost: Option<f64>,
    pub pep_calls: u64,
}

/// Picks the sounding codeword minimizing the misalignment cost (lowest
/// index on ties). Before any observation the first codeword is used.
pub fn select_sounding_vector(
    sounding: &Codebook,
    channel: &Codebook,
    state: &SoundingState,
    power: f64,
    noise_std: f64,
    strategy: SelectorStrategy,
) -> Result<Selection> {
    if sounding.is_empty() {
        return Err(Error::Precondition("sounding codebook is empty".into()));
    }
    if state.channel_use() == 0 {
        return Ok(Selection {
            index: 0,
            cost: None,
            pep_calls: 0,
        });
    }
    let model = MisalignmentModel::new(channel, state, power, noise_std)?;
    let mut best = (0, f64::INFINITY);
    for (l, w) in sounding.iter().enumerate() {
        let cost = model.cost(strategy, w)?;
        if cost < best.1 {
            best = (l, cost);
        }
    }
    Ok(Selection {
        index: best.0,
        cost: Some(best.1),
        pep_calls: model.pep_calls(),
    })
}

// Free-function forms of the model's methods, for one-off evaluations.

pub fn pep_params(
    i_true: usize,
    j_alt: usize,
    channel: &Codebook,
    state: &SoundingState,
    w: &[Complex64],
    power: f64,
    noise_std: f64,
) -> Result<PepInput> {
    Ok(MisalignmentModel::new(channel, state, power, noise_std)?.pep_params(i_true, j_alt, w))
}

pub fn pep(
    i_true: usize,
    j_alt: usize,
    channel: &Codebook,
    state: &SoundingState,
    w: &[Complex64],
    power: f64,
    noise_std: f64,
) -> Result<f64> {
    MisalignmentModel::new(channel, state, power, noise_std)?.pep(i_true, j_alt, w)
}

pub fn misalignment_cost_binary(
    w: &[Complex64],
    channel: &Codebook,
    state: &SoundingState,
    power: f64,
    noise_std: f64,
) -> Result<f64> {
    MisalignmentModel::new(channel, state, power, noise_std)?.cost_binary(w)
}

pub fn misalignment_cost_union(
    w: &[Complex64],
    channel: &Codebook,
    state: &SoundingState,
    power: f64,
    noise_std: f64,
) -> Result<f64> {
    MisalignmentModel::new(channel, state, power, noise_std)?.cost_union(w)
}

pub fn misalignment_cost_two_term(
    w: &[Complex64],
    channel: &Codebook,
    state: &SoundingState,
    power: f64,
    noise_std: f64,
) -> Result<f64> {
    MisalignmentModel::new(channel, state, power, noise_std)?.cost_two_term(w)
}
