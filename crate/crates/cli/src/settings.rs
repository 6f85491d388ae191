//! `key=value` run settings. Keys are the long flag names of `beamalign run`
//! (without the leading dashes). Values from the command line override the
//! file.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::str::FromStr;

use beamalign::{DrawMode, Error, PosteriorModel, Result, SelectorStrategy, SystemConfig};

pub const KEYS: &[&str] = &[
    "antennas",
    "snr-db",
    "noise-variance",
    "channel-uses",
    "trials",
    "seed",
    "strategy",
    "draw-mode",
    "posterior",
    "codebook-mult",
    "sounding-size",
    "out",
    "threads",
    "no-dedup",
];

/// Parses a flat `key=value` file. Blank lines and `#` comments are ignored.
pub fn parse_file(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected key=value, got '{line}'", n + 1)))?;
        let key = key.trim().trim_start_matches("--");
        if !KEYS.contains(&key) {
            return Err(Error::Config(format!("line {}: unknown key '{key}'", n + 1)));
        }
        map.insert(key.to_string(), value.trim().to_string());
    }
    Ok(map)
}

/// Everything `beamalign run` needs.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSettings {
    pub config: SystemConfig,
    pub out: PathBuf,
    pub threads: Option<usize>,
}

/// Builds settings from merged `key -> value` pairs (file first, then
/// command-line overrides).
pub fn resolve(values: &BTreeMap<String, String>) -> Result<RunSettings> {
    let antennas: usize = required(values, "antennas")?;
    let mut config = SystemConfig::new(antennas);
    if let Some(v) = optional::<f64>(values, "noise-variance")? {
        config.noise_variance = v;
    }
    let snr_db = optional::<f64>(values, "snr-db")?.unwrap_or(0.0);
    config = config.with_snr_db(snr_db);
    if let Some(k) = optional(values, "channel-uses")? {
        config.training_length = k;
    }
    if let Some(t) = optional(values, "trials")? {
        config.trials = t;
    }
    if let Some(s) = optional(values, "seed")? {
        config.rng_seed = s;
    }
    if let Some(s) = optional::<SelectorStrategy>(values, "strategy")? {
        config.strategy = s;
    }
    if let Some(d) = optional::<DrawMode>(values, "draw-mode")? {
        config.draw_mode = d;
    }
    if let Some(p) = optional::<PosteriorModel>(values, "posterior")? {
        config.posterior = p;
    }
    let mult: usize = optional(values, "codebook-mult")?.unwrap_or(2);
    config.channel_codebook_size = mult * antennas;
    if let Some(l) = optional(values, "sounding-size")? {
        config.sounding_codebook_size = l;
    }
    if let Some(flag) = optional::<bool>(values, "no-dedup")? {
        config.dedup_channel_codebook = !flag;
    }
    config.validate()?;

    let out = values
        .get("out")
        .map(PathBuf::from)
        .ok_or_else(|| Error::Config("missing required setting 'out'".into()))?;
    let threads = optional(values, "threads")?;
    if threads == Some(0) {
        return Err(Error::Config("threads must be at least 1".into()));
    }
    Ok(RunSettings {
        config,
        out,
        threads,
    })
}

fn optional<T: FromStr>(values: &BTreeMap<String, String>, key: &str) -> Result<Option<T>> {
    values
        .get(key)
        .map(|v| {
            v.parse::<T>()
                .map_err(|_| Error::Config(format!("invalid value '{v}' for '{key}'")))
        })
        .transpose()
}

fn required<T: FromStr>(values: &BTreeMap<String, String>, key: &str) -> Result<T> {
    optional(values, key)?.ok_or_else(|| Error::Config(format!("missing required setting '{key}'")))
}
