//! Line-of-sight MISO channel on a half-wavelength uniform linear array and
//! its noisy training observations `y = α √ρ (w* h) + n`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::codebooks::Codebook;
use crate::config::{DrawMode, SystemConfig};
use crate::cvec;
use crate::error::{Error, Result};

/// Tolerance on `‖w‖ = 1` for sounding vectors.
pub const UNIT_NORM_TOL: f64 = 1e-9;

/// Steering vector `[a(θ)]_m = e^{jπ m sin θ} / √M`, `m = 0..M`.
pub fn array_manifold(theta: f64, m: usize) -> Vec<Complex64> {
    let scale = 1.0 / (m as f64).sqrt();
    let phase_step = PI * theta.sin();
    (0..m)
        .map(|i| Complex64::from_polar(scale, phase_step * i as f64))
        .collect()
}

/// Circularly-symmetric complex Gaussian sample with total variance `variance`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex64 {
    let s = (0.5 * variance).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(s * re, s * im)
}

/// Hidden truth of one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub direction: Vec<Complex64>,
    pub angle: f64,
    pub gain: Complex64,
    /// Index into the channel codebook when drawn on-grid.
    pub grid_index: Option<usize>,
}

/// One received training sample. `channel_use` counts from 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    pub sample: Complex64,
    pub channel_use: usize,
}

/// Draws a direction according to `cfg.draw_mode` and a gain
/// `α = Σ_{i<M} g_i`, `g_i ~ CN(0, 1)`.
pub fn draw_channel<R: Rng + ?Sized>(
    cfg: &SystemConfig,
    channel_codebook: &Codebook,
    rng: &mut R,
) -> Result<ChannelRealization> {
    if channel_codebook.is_empty() {
        return Err(Error::Precondition("channel codebook is empty".into()));
    }
    let m = cfg.num_antennas;
    let gain = (0..m).fold(Complex64::new(0.0, 0.0), |acc, _| {
        acc + complex_gaussian(rng, 1.0)
    });
    let realization = match cfg.draw_mode {
        DrawMode::OnGrid => {
            let index = rng.gen_range(0..channel_codebook.len());
            ChannelRealization {
                direction: channel_codebook.entry(index).to_vec(),
                angle: channel_codebook.label(index).unwrap_or(f64::NAN),
                gain,
                grid_index: Some(index),
            }
        }
        DrawMode::Continuous => {
            let angle = rng.gen_range(-PI..=PI);
            ChannelRealization {
                direction: array_manifold(angle, m),
                angle,
                gain,
                grid_index: None,
            }
        }
    };
    Ok(realization)
}

/// Sounds the channel with `w` once.
pub fn observe<R: Rng + ?Sized>(
    ch: &ChannelRealization,
    w: &[Complex64],
    cfg: &SystemConfig,
    channel_use: usize,
    rng: &mut R,
) -> Result<Observation> {
    let norm = cvec::norm(w);
    if (norm - 1.0).abs() > UNIT_NORM_TOL {
        return Err(Error::Precondition(format!(
            "sounding vector must have unit norm, got {norm}"
        )));
    }
    let clean = ch.gain * cfg.transmit_power.sqrt() * cvec::inner(w, &ch.direction);
    let noise = complex_gaussian(rng, cfg.noise_variance);
    Ok(Observation {
        sample: clean + noise,
        channel_use,
    })
}
