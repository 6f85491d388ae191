//! Channel and sounding codebooks.
//!
//! The channel codebook quantizes the steering angle uniformly over
//! `[-π, π]` with cell midpoints `θ_i = -π + (i + ½)·2π/N`. Because
//! `a(θ) = a(π − θ)`, half of those midpoints produce a vector that is
//! already in the set. Such a duplicate is moved to the midpoint of one half
//! of its own cell (`θ_i ± Δ/4`), which keeps `N` distinct entries in
//! ascending angle order.
//!
//! The sounding codebook holds unitary DFT beams.

use std::f64::consts::PI;
use std::io::{BufRead, Write};

use num_complex::Complex64;

use crate::channel::{array_manifold, UNIT_NORM_TOL};
use crate::cvec;
use crate::error::{Error, Result};

/// Two entries whose normalized correlation exceeds `1 − DISTINCT_TOL` are
/// the same direction up to a global phase.
pub const DISTINCT_TOL: f64 = 1e-9;

/// An ordered set of unit-norm complex vectors of a common dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    dim: usize,
    entries: Vec<Vec<Complex64>>,
    labels: Option<Vec<f64>>,
}

impl Codebook {
    pub fn new(entries: Vec<Vec<Complex64>>, labels: Option<Vec<f64>>) -> Result<Self> {
        let dim = entries.first().map_or(0, Vec::len);
        for (i, e) in entries.iter().enumerate() {
            if e.len() != dim {
                return Err(Error::Format(format!(
                    "entry {i} has length {}, expected {dim}",
                    e.len()
                )));
            }
            let norm = cvec::norm(e);
            if (norm - 1.0).abs() > UNIT_NORM_TOL {
                return Err(Error::Format(format!("entry {i} has norm {norm}")));
            }
        }
        if let Some(l) = &labels {
            if l.len() != entries.len() {
                return Err(Error::Format(format!(
                    "{} labels for {} entries",
                    l.len(),
                    entries.len()
                )));
            }
        }
        Ok(Codebook {
            dim,
            entries,
            labels,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entry(&self, i: usize) -> &[Complex64] {
        &self.entries[i]
    }

    pub fn entries(&self) -> &[Vec<Complex64>] {
        &self.entries
    }

    pub fn iter(&self) -> impl Iterator<Item = &[Complex64]> {
        self.entries.iter().map(Vec::as_slice)
    }

    pub fn labels(&self) -> Option<&[f64]> {
        self.labels.as_deref()
    }

    pub fn label(&self, i: usize) -> Option<f64> {
        self.labels.as_ref().map(|l| l[i])
    }

    /// `max_{i≠j} |e_i* e_j|`.
    pub fn max_cross_correlation(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..self.len() {
            for j in (i + 1)..self.len() {
                worst = worst.max(cvec::inner(&self.entries[i], &self.entries[j]).norm());
            }
        }
        worst
    }

    /// Writes the `M=<int> size=<int>` text format: one line per entry of
    /// comma-separated `re:im` pairs. Labels are not stored.
    pub fn write_text<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "M={} size={}", self.dim, self.len())?;
        for e in &self.entries {
            let line = e
                .iter()
                .map(|c| format!("{}:{}", c.re, c.im))
                .collect::<Vec<_>>()
                .join(",");
            writeln!(out, "{line}")?;
        }
        Ok(())
    }

    pub fn read_text<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = input.lines();
        let header = match lines.next() {
            Some(line) => line.map_err(|e| Error::Format(e.to_string()))?,
            None => return Err(Error::Format("empty input".into())),
        };
        let (dim, size) = parse_header(&header)?;
        let mut entries = Vec::with_capacity(size);
        for (row, line) in lines.enumerate() {
            let line = line.map_err(|e| Error::Format(e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let entry = line
                .split(',')
                .map(|pair| parse_complex(pair.trim()))
                .collect::<Result<Vec<_>>>()
                .map_err(|e| Error::Format(format!("line {}: {e}", row + 2)))?;
            if entry.len() != dim {
                return Err(Error::Format(format!(
                    "line {}: {} values, header says M={dim}",
                    row + 2,
                    entry.len()
                )));
            }
            entries.push(entry);
        }
        if entries.len() != size {
            return Err(Error::Format(format!(
                "{} entries, header says size={size}",
                entries.len()
            )));
        }
        Codebook::new(entries, None)
    }
}

fn parse_header(header: &str) -> Result<(usize, usize)> {
    let mut dim = None;
    let mut size = None;
    for field in header.split_whitespace() {
        let (key, value) = field
            .split_once('=')
            .ok_or_else(|| Error::Format(format!("bad header field '{field}'")))?;
        let value: usize = value
            .parse()
            .map_err(|_| Error::Format(format!("bad header value '{field}'")))?;
        match key {
            "M" => dim = Some(value),
            "size" => size = Some(value),
            _ => return Err(Error::Format(format!("unknown header key '{key}'"))),
        }
    }
    match (dim, size) {
        (Some(d), Some(s)) => Ok((d, s)),
        _ => Err(Error::Format(format!("header '{header}' needs M= and size="))),
    }
}

fn parse_complex(pair: &str) -> Result<Complex64> {
    let (re, im) = pair
        .split_once(':')
        .ok_or_else(|| Error::Format(format!("expected re:im, got '{pair}'")))?;
    let re: f64 = re
        .parse()
        .map_err(|_| Error::Format(format!("bad real part '{re}'")))?;
    let im: f64 = im
        .parse()
        .map_err(|_| Error::Format(format!("bad imaginary part '{im}'")))?;
    Ok(Complex64::new(re, im))
}

/// Channel codebook of `n` manifold vectors with sin-aliased duplicates
/// replaced.
pub fn build_channel_codebook(m: usize, n: usize) -> Codebook {
    build_channel_codebook_with(m, n, true)
}

/// Channel codebook; `dedup = false` keeps the raw midpoint quantizer even
/// when it repeats directions.
///
/// With `m = 1` every direction coincides and no replacement can separate
/// them; the raw entries are kept.
pub fn build_channel_codebook_with(m: usize, n: usize, dedup: bool) -> Codebook {
    let step = 2.0 * PI / n as f64;
    let mut entries: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let centre = -PI + (i as f64 + 0.5) * step;
        let mut chosen = (centre, array_manifold(centre, m));
        if dedup && is_duplicate(&chosen.1, &entries) {
            for theta in [centre + 0.25 * step, centre - 0.25 * step] {
                let candidate = array_manifold(theta, m);
                if !is_duplicate(&candidate, &entries) {
                    chosen = (theta, candidate);
                    break;
                }
            }
        }
        labels.push(chosen.0);
        entries.push(chosen.1);
    }
    Codebook {
        dim: m,
        entries,
        labels: Some(labels),
    }
}

fn is_duplicate(v: &[Complex64], kept: &[Vec<Complex64>]) -> bool {
    kept.iter()
        .any(|e| cvec::inner(e, v).norm() > 1.0 - DISTINCT_TOL)
}

/// `l` unit-norm DFT beams `w_m = e^{j2π mℓ/M} / √M`.
///
/// For `l ≤ m` these are the first `l` columns of the unitary DFT matrix.
/// For `l > m` the beam grid is oversampled to `e^{j2π mℓ/l}` so that the
/// entries stay distinct. Labels hold the steering angle of each beam.
pub fn build_sounding_codebook(m: usize, l: usize) -> Codebook {
    let period = if l <= m { m } else { l } as f64;
    let scale = 1.0 / (m as f64).sqrt();
    let mut entries = Vec::with_capacity(l);
    let mut labels = Vec::with_capacity(l);
    for beam in 0..l {
        let frac = beam as f64 / period;
        let entry = (0..m)
            .map(|i| Complex64::from_polar(scale, 2.0 * PI * frac * i as f64))
            .collect();
        // spatial frequency u = 2ℓ/P folded into [-1, 1)
        let mut u = 2.0 * frac;
        if u >= 1.0 {
            u -= 2.0;
        }
        entries.push(entry);
        labels.push(u.asin());
    }
    Codebook {
        dim: m,
        entries,
        labels: Some(labels),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn midpoint_quantizer_angles() {
        let cb = build_channel_codebook_with(2, 4, false);
        let expected = [-0.75 * PI, -0.25 * PI, 0.25 * PI, 0.75 * PI];
        for (got, want) in cb.labels().unwrap().iter().zip(expected) {
            assert!((got - want).abs() < 1e-15);
        }
        for i in 0..4 {
            assert_eq!(cb.entry(i), array_manifold(expected[i], 2).as_slice());
        }
    }

    #[test]
    fn raw_codebook_contains_aliases() {
        let raw = build_channel_codebook_with(16, 32, false);
        assert!(raw.max_cross_correlation() > 1.0 - 1e-12);
    }

    #[test]
    fn dedup_makes_entries_distinct() {
        for &(m, n) in &[(16usize, 32usize), (4, 8), (5, 10), (8, 6), (64, 128), (3, 7)] {
            let cb = build_channel_codebook(m, n);
            assert_eq!(cb.len(), n);
            assert!(
                cb.max_cross_correlation() < 1.0 - DISTINCT_TOL,
                "m={m} n={n}: {}",
                cb.max_cross_correlation()
            );
        }
    }

    #[test]
    fn channel_entries_lie_on_manifold_in_ascending_order() {
        let cb = build_channel_codebook(16, 32);
        let labels = cb.labels().unwrap();
        for (i, e) in cb.iter().enumerate() {
            assert!((cvec::norm(e) - 1.0).abs() < 1e-12);
            assert_eq!(e, array_manifold(labels[i], 16).as_slice());
        }
        assert!(labels.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn default_size_is_twice_the_array() {
        let cfg = crate::config::SystemConfig::new(16);
        let cb = build_channel_codebook(cfg.num_antennas, cfg.channel_codebook_size);
        assert_eq!(cb.len(), 32);
    }

    #[test]
    fn single_antenna_keeps_raw_entries() {
        let cb = build_channel_codebook(1, 4);
        assert_eq!(cb.len(), 4);
    }

    #[test]
    fn construction_is_deterministic() {
        assert_eq!(build_channel_codebook(16, 32), build_channel_codebook(16, 32));
        assert_eq!(build_sounding_codebook(16, 16), build_sounding_codebook(16, 16));
    }

    #[test]
    fn dft_codebook_is_orthonormal() {
        for m in [2usize, 4, 16] {
            let cb = build_sounding_codebook(m, m);
            for i in 0..m {
                for j in 0..m {
                    let g = cvec::inner(cb.entry(i), cb.entry(j));
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((g - Complex64::new(want, 0.0)).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn two_point_dft() {
        let cb = build_sounding_codebook(2, 2);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let expect = [[s, s], [s, -s]];
        for (e, want) in cb.iter().zip(expect) {
            for (x, w) in e.iter().zip(want) {
                assert!((x - Complex64::new(w, 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn dft_beams_cover_the_manifold() {
        let cb = build_sounding_codebook(16, 16);
        for t in 0..512 {
            let theta = -PI + (t as f64 + 0.5) * 2.0 * PI / 512.0;
            let a = array_manifold(theta, 16);
            let best = cb
                .iter()
                .map(|w| cvec::beamforming_gain(w, &a))
                .fold(0.0, f64::max);
            assert!(best >= 0.4, "theta={theta}: {best}");
        }
    }

    #[test]
    fn dft_beams_are_manifold_beams() {
        let cb = build_sounding_codebook(8, 8);
        for (i, w) in cb.iter().enumerate() {
            let a = array_manifold(cb.label(i).unwrap(), 8);
            assert!((cvec::beamforming_gain(w, &a) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn oversampled_sounding_is_distinct() {
        let cb = build_sounding_codebook(4, 10);
        assert_eq!(cb.len(), 10);
        assert!(cb.max_cross_correlation() < 1.0 - DISTINCT_TOL);
        let truncated = build_sounding_codebook(8, 3);
        assert_eq!(truncated.entries(), &build_sounding_codebook(8, 8).entries()[..3]);
    }

    #[test]
    fn text_format_round_trips() {
        let cb = build_channel_codebook(4, 8);
        let mut buf = Vec::new();
        cb.write_text(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("M=4 size=8\n"));
        assert_eq!(text.lines().count(), 9);
        let back = Codebook::read_text(buf.as_slice()).unwrap();
        assert_eq!(back.entries(), cb.entries());
    }

    #[test]
    fn text_format_rejects_garbage() {
        let bad = [
            "",
            "M=2\n1:0,0:0\n",
            "M=2 size=1\n1:0\n",
            "M=2 size=1\n1:0,0:0\n1:0,0:0\n",
            "M=2 size=1\n1,0\n",
            "M=2 size=1\n2:0,0:0\n",
            "M=x size=1\n1:0,0:0\n",
        ];
        for text in bad {
            assert!(
                matches!(Codebook::read_text(text.as_bytes()), Err(Error::Format(_))),
                "{text:?}"
            );
        }
    }
}
