//! Closed-loop beam alignment for massive MISO channel estimation.
//!
//! A transmitter with `M` antennas probes a line-of-sight channel one
//! channel use at a time. After every use the receiver feeds back the index
//! of the next sounding vector, chosen from a codebook to minimize the
//! probability that the next direction estimate is wrong. Direction
//! estimates are generalized maximum-likelihood decisions over a channel
//! codebook, with the complex channel gain treated as a nuisance parameter.
//!
//! Module map:
//!
//! - [`numerics`]: Marcum Q, `erf`, and `Pr(|X|² > |Y|²)` for shared-noise
//!   complex Gaussians.
//! - [`channel`]: array manifold, channel draws, noisy observations.
//! - [`codebooks`]: channel and sounding codebooks.
//! - [`estimator`]: gain estimate, direction metric, posteriors.
//! - [`alignment`]: pairwise error probabilities, misalignment costs,
//!   sounding vector selection.
//! - [`baseline`]: open-loop identity training with LMMSE estimation.
//! - [`harness`]: Monte Carlo runner and CSV output.

pub mod alignment;
pub mod baseline;
pub mod channel;
pub mod codebooks;
pub mod config;
pub mod cvec;
pub mod error;
pub mod estimator;
pub mod harness;
pub mod numerics;

pub use num_complex::Complex64;

pub use alignment::{select_sounding_vector, MisalignmentModel, PepInput, Selection};
pub use channel::{array_manifold, ChannelRealization, Observation};
pub use codebooks::{build_channel_codebook, build_channel_codebook_with, build_sounding_codebook, Codebook};
pub use config::{DrawMode, PosteriorModel, SelectorStrategy, SystemConfig};
pub use error::{Error, Result};
pub use estimator::SoundingState;
pub use harness::{run_experiment, ExperimentSummary, GainPoint, Scenario, TrialRecord};
pub use numerics::{marcum_q1, pr_mag_sq_greater, PepParams};
