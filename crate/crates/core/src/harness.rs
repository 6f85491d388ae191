//! Monte Carlo runner comparing closed-loop beam alignment against the
//! open-loop baseline, reporting the average beamforming gain `|h* ĥ^(k)|²`
//! per channel use.
//!
//! Every trial owns three ChaCha streams keyed by `(seed, trial, substream)`
//! (channel draw, closed-loop noise, open-loop noise), so results do not
//! depend on how trials are scheduled across threads.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::alignment::select_sounding_vector;
use crate::baseline::{build_prior, lmmse_estimate, open_loop_sounding, quantize_direction, PriorModel};
use crate::channel::{draw_channel, observe, ChannelRealization};
use crate::codebooks::{build_channel_codebook_with, build_sounding_codebook, Codebook};
use crate::config::{PosteriorModel, SelectorStrategy, SystemConfig};
use crate::cvec;
use crate::error::{Error, Result};
use crate::estimator::{argmax, softmax, update_posteriors_marginal, SoundingState};

pub const CSV_HEADER: &str =
    "scheme,k,mean_gain_linear,mean_gain_db,stderr_linear,trials,M,snr_db,strategy,seed";

const CHANNEL_STREAM: u64 = 0;
const CLOSED_LOOP_STREAM: u64 = 1;
const OPEN_LOOP_STREAM: u64 = 2;

/// Independent generator for one `(trial, substream)` pair.
pub fn trial_rng(seed: u64, trial: u64, substream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((trial << 2) | substream);
    rng
}

/// Per-trial outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub trial_id: u64,
    /// `|h* ĥ^(k)|²` for `k = 1..=K`.
    pub closed_gains: Vec<f64>,
    /// Open-loop gains for `k = 1..=min(K, M)`.
    pub open_gains: Vec<f64>,
    pub true_index: Option<usize>,
    /// Whether the final closed-loop estimate is the true codeword (on-grid)
    /// or the codeword nearest to the true direction (continuous).
    pub final_alignment_correct: bool,
    pub final_index: usize,
    pub open_final_index: Option<usize>,
    pub pep_calls: u64,
}

/// A configuration with its codebooks and baseline prior built once.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub config: SystemConfig,
    pub channel: Codebook,
    pub sounding: Codebook,
    pub prior: PriorModel,
}

impl Scenario {
    pub fn new(config: SystemConfig) -> Result<Self> {
        config.validate()?;
        let m = config.num_antennas;
        let channel =
            build_channel_codebook_with(m, config.channel_codebook_size, config.dedup_channel_codebook);
        let sounding = build_sounding_codebook(m, config.sounding_codebook_size);
        let prior = build_prior(&channel, m);
        Ok(Scenario {
            config,
            channel,
            sounding,
            prior,
        })
    }

    pub fn run_trial(&self, trial_id: u64) -> Result<TrialRecord> {
        run_trial(&self.config, &self.channel, &self.sounding, &self.prior, trial_id)
    }

    /// PEP evaluations in one candidate sweep.
    pub fn pep_calls_per_sweep(&self) -> u64 {
        let n = self.channel.len() as u64;
        let l = self.sounding.len() as u64;
        match self.config.strategy {
            SelectorStrategy::UnionBound => n * (n - 1) * l,
            SelectorStrategy::TwoTerm | SelectorStrategy::ExactBinary => 2 * l,
        }
    }
}

/// One closed-loop and one open-loop training phase on the same channel.
pub fn run_trial(
    cfg: &SystemConfig,
    channel: &Codebook,
    sounding: &Codebook,
    prior: &PriorModel,
    trial_id: u64,
) -> Result<TrialRecord> {
    let seed = cfg.rng_seed;
    let truth = draw_channel(cfg, channel, &mut trial_rng(seed, trial_id, CHANNEL_STREAM))?;

    let (closed_gains, final_index, pep_calls) = run_closed_loop(
        cfg,
        channel,
        sounding,
        &truth,
        &mut trial_rng(seed, trial_id, CLOSED_LOOP_STREAM),
    )?;
    let (open_gains, open_final_index) = run_open_loop(
        cfg,
        channel,
        prior,
        &truth,
        &mut trial_rng(seed, trial_id, OPEN_LOOP_STREAM),
    )?;

    let target = truth.grid_index.unwrap_or_else(|| {
        let scores: Vec<f64> = channel
            .iter()
            .map(|h| cvec::beamforming_gain(h, &truth.direction))
            .collect();
        argmax(&scores)
    });
    Ok(TrialRecord {
        trial_id,
        closed_gains,
        open_gains,
        true_index: truth.grid_index,
        final_alignment_correct: final_index == target,
        final_index,
        open_final_index,
        pep_calls,
    })
}

fn run_closed_loop(
    cfg: &SystemConfig,
    channel: &Codebook,
    sounding: &Codebook,
    truth: &ChannelRealization,
    rng: &mut ChaCha8Rng,
) -> Result<(Vec<f64>, usize, u64)> {
    let mut state = SoundingState::new(cfg.num_antennas, channel.len());
    let mut gains = Vec::with_capacity(cfg.training_length);
    let mut pep_calls = 0;
    let mut estimate = 0;
    for k in 1..=cfg.training_length {
        let pick = select_sounding_vector(
            sounding,
            channel,
            &state,
            cfg.transmit_power,
            cfg.noise_std(),
            cfg.strategy,
        )?;
        pep_calls += pick.pep_calls;
        let w = sounding.entry(pick.index);
        let obs = observe(truth, w, cfg, k, rng)?;
        state.push(w, obs.sample)?;

        let metrics: Vec<f64> = state
            .project_codebook(channel)
            .iter()
            .map(|p| p.metric())
            .collect();
        estimate = argmax(&metrics);
        let posteriors = match cfg.posterior {
            PosteriorModel::Glrt => softmax(&metrics, cfg.noise_variance),
            PosteriorModel::GainMarginalized => update_posteriors_marginal(
                channel,
                &state,
                cfg.gain_variance(),
                cfg.transmit_power,
                cfg.noise_variance,
            ),
        };
        state.set_posteriors(posteriors)?;
        gains.push(cvec::beamforming_gain(channel.entry(estimate), &truth.direction));
    }
    Ok((gains, estimate, pep_calls))
}

fn run_open_loop(
    cfg: &SystemConfig,
    channel: &Codebook,
    prior: &PriorModel,
    truth: &ChannelRealization,
    rng: &mut ChaCha8Rng,
) -> Result<(Vec<f64>, Option<usize>)> {
    let m = cfg.num_antennas;
    let uses = cfg.training_length.min(m);
    let mut state = SoundingState::new(m, channel.len());
    let mut gains = Vec::with_capacity(uses);
    let mut last = None;
    for k in 1..=uses {
        let w = open_loop_sounding(k, m)?;
        let obs = observe(truth, &w, cfg, k, rng)?;
        state.push(&w, obs.sample)?;
        let g_hat = lmmse_estimate(&state, prior, cfg.transmit_power, cfg.noise_variance)?;
        let (index, h_hat) = quantize_direction(&g_hat, channel);
        gains.push(cvec::beamforming_gain(h_hat, &truth.direction));
        last = Some(index);
    }
    Ok((gains, last))
}

/// Mean and standard error of the gain at one channel use.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainPoint {
    pub k: usize,
    pub mean: f64,
    pub stderr: f64,
}

impl GainPoint {
    pub fn mean_db(&self) -> f64 {
        10.0 * self.mean.log10()
    }

    fn from_samples(k: usize, samples: &[f64]) -> Self {
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let stderr = if samples.len() > 1 {
            let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
            (var / n).sqrt()
        } else {
            0.0
        };
        GainPoint { k, mean, stderr }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSummary {
    pub config: SystemConfig,
    pub trials: usize,
    pub closed_loop: Vec<GainPoint>,
    pub open_loop: Vec<GainPoint>,
    pub pep_calls: u64,
    pub alignment_rate: f64,
    pub elapsed: Duration,
}

impl ExperimentSummary {
    /// Closed-loop minus open-loop mean gain in dB at channel use `k`.
    pub fn advantage_db(&self, k: usize) -> Option<f64> {
        let closed = self.closed_loop.iter().find(|p| p.k == k)?;
        let open = self.open_loop.iter().find(|p| p.k == k)?;
        Some(closed.mean_db() - open.mean_db())
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{CSV_HEADER}")?;
        let cfg = &self.config;
        // The SNR is stored as a power ratio; undo the log10 round-trip noise.
        let snr_db = (cfg.snr_db() * 1e9).round() / 1e9;
        for (scheme, points) in [("closed-loop", &self.closed_loop), ("open-loop", &self.open_loop)] {
            for p in points {
                writeln!(
                    out,
                    "{scheme},{},{},{},{},{},{},{},{},{}",
                    p.k,
                    p.mean,
                    p.mean_db(),
                    p.stderr,
                    self.trials,
                    cfg.num_antennas,
                    snr_db,
                    cfg.strategy,
                    cfg.rng_seed
                )?;
            }
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("CSV is ASCII")
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = BufWriter::new(file);
        self.write_csv(&mut out).map_err(|e| Error::io(path, e))?;
        out.flush().map_err(|e| Error::io(path, e))
    }
}

/// Ordered reduction of trial records.
pub fn summarize(config: &SystemConfig, records: &[TrialRecord], elapsed: Duration) -> ExperimentSummary {
    let points = |select: &dyn Fn(&TrialRecord) -> &[f64]| {
        let len = records.iter().map(|r| select(r).len()).min().unwrap_or(0);
        (0..len)
            .map(|i| {
                let samples: Vec<f64> = records.iter().map(|r| select(r)[i]).collect();
                GainPoint::from_samples(i + 1, &samples)
            })
            .collect::<Vec<_>>()
    };
    let aligned = records.iter().filter(|r| r.final_alignment_correct).count();
    ExperimentSummary {
        config: config.clone(),
        trials: records.len(),
        closed_loop: points(&|r| &r.closed_gains),
        open_loop: points(&|r| &r.open_gains),
        pep_calls: records.iter().map(|r| r.pep_calls).sum(),
        alignment_rate: aligned as f64 / records.len().max(1) as f64,
        elapsed,
    }
}

/// Runs every trial of a scenario on `threads` workers (rayon's default
/// when `None`) and returns the records in trial order.
pub fn run_trials(scenario: &Scenario, threads: Option<usize>) -> Result<Vec<TrialRecord>> {
    let trials = scenario.config.trials as u64;
    let work = || {
        (0..trials)
            .into_par_iter()
            .map(|t| scenario.run_trial(t))
            .collect::<Result<Vec<_>>>()
    };
    match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::Config(format!("cannot start {n} worker threads: {e}")))?
            .install(work),
        None => work(),
    }
}

pub fn run_experiment(cfg: &SystemConfig, threads: Option<usize>) -> Result<ExperimentSummary> {
    let start = Instant::now();
    let scenario = Scenario::new(cfg.clone())?;
    let records = run_trials(&scenario, threads)?;
    Ok(summarize(cfg, &records, start.elapsed()))
}
