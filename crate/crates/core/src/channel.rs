//! Channel effects between a transmitter and the receiving agent: clock
//! offset and drift, propagation delay, multipath taps, and additive white
//! Gaussian noise on the sampled waveform.
//!
//! Pulse trains are warped in continuous time *before* rendering, so clock
//! drift accumulates exactly rather than through per-sample resampling.

use crate::error::{Error, Result};
use crate::signal::SampledSignal;
use crate::waveform::PulseTrain;
use crate::SPEED_OF_LIGHT;
use rand::Rng;
use rand_distr::{Distribution, Normal};

// ---------------------------------------------------------------------------
// Clock model
// ---------------------------------------------------------------------------

/// Affine map from a transmitter's local clock to the receiver's clock.
///
/// A transmitter event at local time `t` is observed by the receiver at
/// `offset + (1 + drift) * t` (plus propagation delay).  `drift` is the
/// dimensionless fractional rate error, e.g. `20e-6` for 20 ppm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClockModel {
    /// Receiver-clock time of the transmitter's local time origin, seconds.
    pub offset: f64,
    /// Fractional rate error of the transmitter clock (dimensionless).
    pub drift: f64,
}

impl ClockModel {
    /// A perfectly synchronized clock.
    pub fn ideal() -> Self {
        ClockModel { offset: 0.0, drift: 0.0 }
    }

    /// Maps transmitter-local time to receiver time.
    pub fn warp(&self, t: f64) -> f64 {
        self.offset + (1.0 + self.drift) * t
    }
}

// ---------------------------------------------------------------------------
// Multipath profile
// ---------------------------------------------------------------------------

/// One resolvable propagation path, relative to the line-of-sight arrival.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelTap {
    /// Excess delay beyond the geometric propagation time, seconds.
    pub delay: f64,
    /// Amplitude gain of this path.
    pub gain: f64,
}

/// A set of propagation paths applied to every transmitted pulse.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelProfile {
    taps: Vec<ChannelTap>,
}

impl ChannelProfile {
    /// Single unobstructed path at the geometric delay with unit gain.
    pub fn line_of_sight() -> Self {
        ChannelProfile { taps: vec![ChannelTap { delay: 0.0, gain: 1.0 }] }
    }

    /// Single path whose direct component is blocked: the energy arrives
    /// late (positive `excess_delay`) and attenuated (`gain` below 1).
    pub fn obstructed(excess_delay: f64, gain: f64) -> Self {
        ChannelProfile { taps: vec![ChannelTap { delay: excess_delay, gain }] }
    }

    /// Arbitrary tap set; delays must be nonnegative and finite.
    pub fn with_taps(taps: Vec<ChannelTap>) -> Result<Self> {
        if taps.is_empty() {
            return Err(Error::InvalidArgument(
                "channel profile needs at least one tap".to_string(),
            ));
        }
        for tap in &taps {
            if !(tap.delay >= 0.0) || !tap.delay.is_finite() || !tap.gain.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "invalid channel tap: delay {} gain {}",
                    tap.delay, tap.gain
                )));
            }
        }
        Ok(ChannelProfile { taps })
    }

    /// The taps of this profile.
    pub fn taps(&self) -> &[ChannelTap] {
        &self.taps
    }

    /// Gain of the earliest-arriving tap.
    pub fn leading_gain(&self) -> f64 {
        self.taps
            .iter()
            .min_by(|a, b| a.delay.total_cmp(&b.delay))
            .map(|t| t.gain)
            .unwrap_or(0.0)
    }
}

// ---------------------------------------------------------------------------
// Propagation and channel application
// ---------------------------------------------------------------------------

/// Free-space propagation delay for a path of the given length in meters.
pub fn propagation_delay(distance: f64) -> f64 {
    distance / SPEED_OF_LIGHT
}

/// Transforms a transmitted pulse train into the receiver's timeline.
///
/// Each pulse epoch `t` becomes `clock.warp(t) + prop_delay + tap.delay` for
/// every tap, with the amplitude multiplied by the tap gain.
pub fn apply_channel(
    train: &PulseTrain,
    clock: &ClockModel,
    prop_delay: f64,
    profile: &ChannelProfile,
) -> PulseTrain {
    let mut out = PulseTrain::new();
    out.pulses.reserve(train.pulses.len() * profile.taps.len());
    for p in &train.pulses {
        let arrival = clock.warp(p.time) + prop_delay;
        for tap in &profile.taps {
            out.push(arrival + tap.delay, p.scale * tap.gain);
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Noise
// ---------------------------------------------------------------------------

/// Per-sample noise standard deviation for a target symbol-energy-to-noise
/// ratio.
///
/// With symbol energy `e_b` and ratio `ebn0_db` in dB, the one-sided noise
/// density is `n0 = e_b / 10^(ebn0_db/10)` and the sampled noise variance is
/// `n0 * fs / 2`, making the discrete waveform's two-sided density
/// `sigma^2 / fs = n0 / 2` consistent with the continuous-time model.
pub fn noise_sigma(e_b: f64, ebn0_db: f64, fs: f64) -> f64 {
    let n0 = e_b * 10f64.powf(-ebn0_db / 10.0);
    (n0 * fs / 2.0).sqrt()
}

/// Adds independent zero-mean Gaussian noise of the given standard deviation
/// to every sample.
pub fn add_awgn<R: Rng + ?Sized>(signal: &mut SampledSignal, sigma: f64, rng: &mut R) {
    if sigma == 0.0 {
        return;
    }
    let dist = Normal::new(0.0, sigma).expect("sigma validated by caller");
    for s in signal.samples_mut() {
        *s += dist.sample(rng);
    }
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use crate::waveform::PulseTrain;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn clock_warp_is_affine() {
        let clock = ClockModel { offset: 3.2e-6, drift: 25e-6 };
        assert_relative_eq!(clock.warp(0.0), 3.2e-6, max_relative = 1e-15);
        let t1 = 1.0e-3;
        let t2 = 2.5e-3;
        let rate = (clock.warp(t2) - clock.warp(t1)) / (t2 - t1);
        assert_relative_eq!(rate, 1.0 + 25e-6, max_relative = 1e-12);
        assert_relative_eq!(ClockModel::ideal().warp(0.125), 0.125, max_relative = 1e-15);
    }

    #[test]
    fn channel_transforms_every_pulse_through_every_tap() {
        let mut train = PulseTrain::new();
        train.push(1.0e-6, 2.0);
        train.push(4.0e-6, -1.0);
        let clock = ClockModel { offset: 5.0e-9, drift: 10e-6 };
        let profile = ChannelProfile::with_taps(vec![
            ChannelTap { delay: 0.0, gain: 1.0 },
            ChannelTap { delay: 7.0e-9, gain: 0.4 },
        ])
        .unwrap();
        let delay = propagation_delay(6.0);
        assert_relative_eq!(delay, 2.0e-8, max_relative = 1e-12);

        let rx = apply_channel(&train, &clock, delay, &profile);
        assert_eq!(rx.pulses.len(), 4);
        let expect0 = 5.0e-9 + (1.0 + 10e-6) * 1.0e-6 + 2.0e-8;
        assert_relative_eq!(rx.pulses[0].time, expect0, max_relative = 1e-12);
        assert_relative_eq!(rx.pulses[0].scale, 2.0, max_relative = 1e-12);
        assert_relative_eq!(rx.pulses[1].time, expect0 + 7.0e-9, max_relative = 1e-12);
        assert_relative_eq!(rx.pulses[1].scale, 0.8, max_relative = 1e-12);
    }

    #[test]
    fn obstructed_profile_delays_and_attenuates() {
        let p = ChannelProfile::obstructed(12.0e-9, 0.5);
        assert_eq!(p.taps().len(), 1);
        assert_relative_eq!(p.leading_gain(), 0.5, max_relative = 1e-12);
        assert!(ChannelProfile::with_taps(vec![]).is_err());
        assert!(ChannelProfile::with_taps(vec![ChannelTap { delay: -1e-9, gain: 1.0 }])
            .is_err());
    }

    #[test]
    fn noise_sigma_matches_hand_computation() {
        // e_b = 3, 0 dB: n0 = 3; at 10 GHz the per-sample variance is
        // n0 * fs / 2 = 1.5e10.
        let sigma = noise_sigma(3.0, 0.0, 10e9);
        assert_relative_eq!(sigma * sigma, 1.5e10, max_relative = 1e-12);
        // +10 dB reduces the variance tenfold.
        let sigma10 = noise_sigma(3.0, 10.0, 10e9);
        assert_relative_eq!(sigma10 * sigma10, 1.5e9, max_relative = 1e-12);
    }

    #[test]
    fn awgn_moments_and_determinism() {
        let n = 200_000;
        let sigma = 2.0;
        let mut a = SampledSignal::zeros(1.0, 0.0, n).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        add_awgn(&mut a, sigma, &mut rng);

        let mean: f64 = a.samples().iter().sum::<f64>() / n as f64;
        let var: f64 = a.samples().iter().map(|s| (s - mean) * (s - mean)).sum::<f64>()
            / (n - 1) as f64;
        // Mean is within 5 standard errors; variance within 2%.
        assert!(mean.abs() < 5.0 * sigma / (n as f64).sqrt(), "mean {mean}");
        assert_relative_eq!(var, sigma * sigma, max_relative = 0.02);

        let mut b = SampledSignal::zeros(1.0, 0.0, n).unwrap();
        let mut rng2 = ChaCha8Rng::seed_from_u64(42);
        add_awgn(&mut b, sigma, &mut rng2);
        assert_eq!(a.samples(), b.samples());
    }
}
