//! Scenario parameters shared by every module.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// How the misalignment cost of a candidate sounding vector is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SelectorStrategy {
    /// Exact two-hypothesis cost; only valid for a two-entry channel codebook.
    ExactBinary,
    /// Posterior-weighted sum of every ordered pairwise error probability.
    UnionBound,
    /// Only the two most likely codewords contribute.
    TwoTerm,
}

impl SelectorStrategy {
    pub fn as_str(self) -> &'static str {
        match self {
            SelectorStrategy::ExactBinary => "exact-binary",
            SelectorStrategy::UnionBound => "union",
            SelectorStrategy::TwoTerm => "two-term",
        }
    }
}

impl fmt::Display for SelectorStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SelectorStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact-binary" => Ok(SelectorStrategy::ExactBinary),
            "union" => Ok(SelectorStrategy::UnionBound),
            "two-term" => Ok(SelectorStrategy::TwoTerm),
            other => Err(Error::Config(format!(
                "unknown strategy '{other}' (expected exact-binary, union or two-term)"
            ))),
        }
    }
}

/// Where the true channel direction is drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DrawMode {
    /// Uniformly among the channel codebook entries.
    OnGrid,
    /// On the array manifold with the angle uniform over `[-π, π]`.
    Continuous,
}

impl DrawMode {
    pub fn as_str(self) -> &'static str {
        match self {
            DrawMode::OnGrid => "grid",
            DrawMode::Continuous => "continuous",
        }
    }
}

impl fmt::Display for DrawMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DrawMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "grid" => Ok(DrawMode::OnGrid),
            "continuous" => Ok(DrawMode::Continuous),
            other => Err(Error::Config(format!(
                "unknown draw mode '{other}' (expected grid or continuous)"
            ))),
        }
    }
}

/// How codeword posteriors are refreshed after each observation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PosteriorModel {
    /// Exact posterior with the channel gain integrated out under its
    /// `CN(0, M)` prior.
    GainMarginalized,
    /// Plug-in of the ML gain estimate: softmax of the GLRT metric.
    Glrt,
}

impl PosteriorModel {
    pub fn as_str(self) -> &'static str {
        match self {
            PosteriorModel::GainMarginalized => "marginal",
            PosteriorModel::Glrt => "glrt",
        }
    }
}

impl fmt::Display for PosteriorModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PosteriorModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "marginal" => Ok(PosteriorModel::GainMarginalized),
            "glrt" => Ok(PosteriorModel::Glrt),
            other => Err(Error::Config(format!(
                "unknown posterior model '{other}' (expected marginal or glrt)"
            ))),
        }
    }
}

/// All parameters of one simulated scenario.
///
/// The signal-to-noise ratio is `transmit_power / noise_variance`;
/// [`SystemConfig::new`] fixes the noise variance at 1.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    pub num_antennas: usize,
    pub transmit_power: f64,
    pub noise_variance: f64,
    pub training_length: usize,
    pub channel_codebook_size: usize,
    pub sounding_codebook_size: usize,
    pub rng_seed: u64,
    pub trials: usize,
    pub strategy: SelectorStrategy,
    pub draw_mode: DrawMode,
    pub posterior: PosteriorModel,
    /// Replace sin-aliased duplicates in the channel codebook.
    pub dedup_channel_codebook: bool,
}

impl SystemConfig {
    /// `M` antennas with `|H| = 2M`, `|W| = M`, 0 dB and `K = M`.
    pub fn new(num_antennas: usize) -> Self {
        SystemConfig {
            num_antennas,
            transmit_power: 1.0,
            noise_variance: 1.0,
            training_length: num_antennas,
            channel_codebook_size: 2 * num_antennas,
            sounding_codebook_size: num_antennas,
            rng_seed: 0,
            trials: 1,
            strategy: SelectorStrategy::TwoTerm,
            draw_mode: DrawMode::OnGrid,
            posterior: PosteriorModel::GainMarginalized,
            dedup_channel_codebook: true,
        }
    }

    /// Sets `transmit_power` so that `transmit_power / noise_variance`
    /// equals `snr_db`.
    pub fn with_snr_db(mut self, snr_db: f64) -> Self {
        self.transmit_power = self.noise_variance * 10f64.powf(snr_db / 10.0);
        self
    }

    pub fn snr_db(&self) -> f64 {
        10.0 * (self.transmit_power / self.noise_variance).log10()
    }

    pub fn noise_std(&self) -> f64 {
        self.noise_variance.sqrt()
    }

    /// `E|α|²` of the channel gain model (a sum of `M` unit complex normals).
    pub fn gain_variance(&self) -> f64 {
        self.num_antennas as f64
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.num_antennas < 1 {
            return fail("num_antennas must be at least 1".into());
        }
        if self.training_length < 1 {
            return fail("training_length must be at least 1".into());
        }
        if self.channel_codebook_size < 2 {
            return fail("channel codebook needs at least 2 entries".into());
        }
        if self.sounding_codebook_size < 1 {
            return fail("sounding codebook needs at least 1 entry".into());
        }
        if self.trials < 1 {
            return fail("trials must be at least 1".into());
        }
        if !(self.transmit_power.is_finite() && self.transmit_power > 0.0) {
            return fail(format!("transmit power must be positive, got {}", self.transmit_power));
        }
        if !(self.noise_variance.is_finite() && self.noise_variance > 0.0) {
            return fail(format!("noise variance must be positive, got {}", self.noise_variance));
        }
        if self.strategy == SelectorStrategy::ExactBinary && self.channel_codebook_size != 2 {
            return fail(format!(
                "exact-binary strategy needs a 2-entry channel codebook, got {}",
                self.channel_codebook_size
            ));
        }
        Ok(())
    }
}
