//! Open-loop orthogonal training: identity-column soundings, a linear MMSE
//! estimate of the channel vector `g = α h`, and quantization of that
//! estimate to the channel codebook.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::codebooks::Codebook;
use crate::cvec;
use crate::error::{Error, Result};
use crate::estimator::{argmax, SoundingState};

/// Second-moment matrix `R_g = E[g g*]` of the channel vector.
#[derive(Debug, Clone, PartialEq)]
pub struct PriorModel {
    pub covariance: DMatrix<Complex64>,
}

/// `R_g = M · (1/N) Σ_i h_i h_i*`: directions uniform over the codebook and
/// `E|α|² = M`.
pub fn build_prior(channel: &Codebook, m: usize) -> PriorModel {
    let n = channel.len() as f64;
    let mut covariance = DMatrix::<Complex64>::zeros(m, m);
    for h in channel.iter() {
        let v = DVector::from_column_slice(h);
        covariance += &v * v.adjoint();
    }
    covariance *= Complex64::new(m as f64 / n, 0.0);
    PriorModel { covariance }
}

/// `e_k` for channel use `k` (counting from 1).
pub fn open_loop_sounding(k: usize, m: usize) -> Result<Vec<Complex64>> {
    if k == 0 || k > m {
        return Err(Error::Precondition(format!(
            "open-loop channel use {k} outside 1..={m}"
        )));
    }
    Ok(cvec::unit_vector(k - 1, m))
}

/// `ĝ = √ρ R W (ρ W* R W + σ² I)^{-1} y`.
pub fn lmmse_estimate(
    state: &SoundingState,
    prior: &PriorModel,
    power: f64,
    noise_variance: f64,
) -> Result<Vec<Complex64>> {
    let k = state.channel_use();
    if k == 0 {
        return Err(Error::Precondition("LMMSE needs at least one observation".into()));
    }
    let m = state.dim();
    let w = DMatrix::from_fn(m, k, |row, col| state.soundings()[col][row]);
    let y = DVector::from_column_slice(state.samples());
    let rw = &prior.covariance * &w;
    let mut gram = w.adjoint() * &rw * Complex64::new(power, 0.0);
    for i in 0..k {
        gram[(i, i)] += Complex64::new(noise_variance, 0.0);
    }
    let coeffs = match gram.clone().cholesky() {
        Some(chol) => chol.solve(&y),
        None => gram
            .lu()
            .solve(&y)
            .ok_or_else(|| Error::Precondition("singular LMMSE system".into()))?,
    };
    let estimate = rw * coeffs * Complex64::new(power.sqrt(), 0.0);
    Ok(estimate.iter().copied().collect())
}

/// Codeword with the largest `|ĝ* h_i|` (lowest index on ties); index 0
/// for a zero estimate.
pub fn quantize_direction<'a>(g_hat: &[Complex64], channel: &'a Codebook) -> (usize, &'a [Complex64]) {
    let scores: Vec<f64> = channel.iter().map(|h| cvec::inner(g_hat, h).norm()).collect();
    let index = argmax(&scores);
    (index, channel.entry(index))
}
