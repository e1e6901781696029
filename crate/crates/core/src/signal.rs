//! Uniformly sampled real waveforms.
//!
//! A [`SampledSignal`] is the common currency between synthesis, channel
//! simulation, and detection: samples `s[i]` represent the waveform value at
//! `t0 + i / fs`.  Integrals are evaluated on the grid as `Σ s[i] · Δ` with
//! `Δ = 1/fs`, so a signal's [`energy`](SampledSignal::energy) approximates
//! `∫ s(t)² dt`.

use crate::{Error, Result};

/// A real waveform sampled uniformly at rate `fs`, starting at time `t0`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledSignal {
    fs: f64,
    t0: f64,
    samples: Vec<f64>,
}

impl SampledSignal {
    /// Wraps existing samples.  `fs` must be positive.
    pub fn new(fs: f64, t0: f64, samples: Vec<f64>) -> Result<Self> {
        if !(fs > 0.0) || !fs.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "sample rate must be positive and finite, got {fs}"
            )));
        }
        Ok(Self { fs, t0, samples })
    }

    /// An all-zero signal of `len` samples.
    pub fn zeros(fs: f64, t0: f64, len: usize) -> Result<Self> {
        Self::new(fs, t0, vec![0.0; len])
    }

    pub fn fs(&self) -> f64 {
        self.fs
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    /// Sample period `Δ = 1/fs` in seconds.
    pub fn dt(&self) -> f64 {
        1.0 / self.fs
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn samples_mut(&mut self) -> &mut [f64] {
        &mut self.samples
    }

    /// Time of sample `i`.
    pub fn time_at(&self, i: usize) -> f64 {
        self.t0 + i as f64 / self.fs
    }

    /// Index of the sample nearest to time `t` (may fall outside the signal).
    pub fn nearest_index(&self, t: f64) -> i64 {
        ((t - self.t0) * self.fs).round() as i64
    }

    /// Sample value at index `i`, treating everything outside the sampled
    /// extent as zero.
    pub fn value_or_zero(&self, i: i64) -> f64 {
        if i < 0 || i as usize >= self.samples.len() {
            0.0
        } else {
            self.samples[i as usize]
        }
    }

    /// Discrete energy `Σ s[i]² · Δ`.
    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|s| s * s).sum::<f64>() / self.fs
    }

    /// Adds `scale * shape` starting at sample index `at` (clipped to the
    /// signal's extent; out-of-range parts of the shape are dropped).
    pub fn add_scaled_at(&mut self, at: i64, shape: &[f64], scale: f64) {
        for (j, &v) in shape.iter().enumerate() {
            let i = at + j as i64;
            if i >= 0 && (i as usize) < self.samples.len() {
                self.samples[i as usize] += scale * v;
            }
        }
    }

    /// Returns the sub-signal covering `[t_start, t_end)`.
    pub fn crop(&self, t_start: f64, t_end: f64) -> Result<SampledSignal> {
        if t_end <= t_start {
            return Err(Error::InvalidArgument(format!(
                "empty crop window [{t_start}, {t_end})"
            )));
        }
        let i0 = ((t_start - self.t0) * self.fs).round() as i64;
        let i1 = ((t_end - self.t0) * self.fs).round() as i64;
        if i0 < 0 || i1 as usize > self.samples.len() {
            return Err(Error::OutOfRange(format!(
                "crop [{t_start}, {t_end}) exceeds sampled extent [{}, {})",
                self.t0,
                self.time_at(self.samples.len())
            )));
        }
        SampledSignal::new(
            self.fs,
            self.time_at(i0 as usize),
            self.samples[i0 as usize..i1 as usize].to_vec(),
        )
    }

    /// Checks that `other` shares this signal's sample grid (rate and origin).
    pub fn check_same_grid(&self, other: &SampledSignal) -> Result<()> {
        if self.fs != other.fs {
            return Err(Error::GridMismatch(format!(
                "sample rates {} and {} differ",
                self.fs, other.fs
            )));
        }
        // Origins must coincide up to a negligible fraction of a sample.
        if (self.t0 - other.t0).abs() * self.fs > 1e-6 {
            return Err(Error::GridMismatch(format!(
                "time origins {} and {} differ",
                self.t0, other.t0
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn test_energy_matches_manual_sum() {
        let fs = 10.0;
        let s = SampledSignal::new(fs, 0.0, vec![1.0, -2.0, 3.0]).unwrap();
        assert!((s.energy() - (1.0 + 4.0 + 9.0) / fs).abs() < 1e-12);
    }

    #[test]
    fn test_nearest_index_round_trip() {
        let s = SampledSignal::zeros(1e9, 2e-9, 100).unwrap();
        for i in [0usize, 1, 57, 99] {
            assert_eq!(s.nearest_index(s.time_at(i)), i as i64);
        }
    }

    #[test]
    fn test_add_scaled_clips_at_boundaries() {
        let mut s = SampledSignal::zeros(1.0, 0.0, 4).unwrap();
        s.add_scaled_at(-1, &[1.0, 2.0, 3.0], 1.0);
        assert_eq!(s.samples(), &[2.0, 3.0, 0.0, 0.0]);
        s.add_scaled_at(3, &[5.0, 7.0], 1.0);
        assert_eq!(s.samples(), &[2.0, 3.0, 0.0, 5.0]);
    }

    #[test]
    fn test_crop_preserves_grid() {
        let fs = 1e6;
        let samples: Vec<f64> = (0..100).map(|i| i as f64).collect();
        let s = SampledSignal::new(fs, 0.0, samples).unwrap();
        let c = s.crop(10e-6, 20e-6).unwrap();
        assert_eq!(c.len(), 10);
        assert_eq!(c.samples()[0], 10.0);
        assert!((c.t0() - 10e-6).abs() < 1e-18);
        assert!(s.crop(95e-6, 110e-6).is_err(), "crop beyond extent must fail");
    }

    #[test]
    fn test_grid_mismatch_detected() {
        let a = SampledSignal::zeros(1e9, 0.0, 10).unwrap();
        let b = SampledSignal::zeros(2e9, 0.0, 10).unwrap();
        let c = SampledSignal::zeros(1e9, 1e-3, 10).unwrap();
        assert!(a.check_same_grid(&b).is_err());
        assert!(a.check_same_grid(&c).is_err());
        assert!(a.check_same_grid(&a).is_ok());
    }

    #[test]
    fn test_rejects_nonpositive_rate() {
        assert!(SampledSignal::new(0.0, 0.0, vec![]).is_err());
        assert!(SampledSignal::new(-1.0, 0.0, vec![]).is_err());
    }
}
