//! Per-symbol confidence scoring and reference-anchored differential
//! demodulation.
//!
//! A demodulated symbol carries a confidence triple: an amplitude score from
//! the matched-filter peak, an interval score from how well the measured
//! symbol-to-symbol spacing fits its two bit hypotheses, and their product.
//! Symbols whose combined confidence clears a threshold become the timing
//! reference for the symbols that follow; low-confidence symbols leave the
//! old reference in place and widen the expected spacing by one slot per
//! skipped symbol.

use crate::detection::{correlate, local_maxima, Peak, SlotTemplate};
use crate::error::{Error, Result};
use crate::signal::SampledSignal;
use crate::waveform::{FrameConfig, Pulse, ThCode};
use std::collections::HashMap;

/// Worst-case uncompensated relative clock drift assumed by the interval
/// likelihood, as a fraction of elapsed time.
///
/// Free-running crystal pairs disagree by tens of ppm plus temperature and
/// aging margins; the budget is deliberately conservative so that the
/// interval score only vetoes gross timing outliers (a wrong peak, a wrong
/// interval) and never ordinary thermal jitter, which is graded by the
/// amplitude score instead.
pub const DRIFT_BUDGET: f64 = 400e-6;

/// Consecutive non-reference symbols tolerated before a frame is abandoned.
pub const DEFAULT_RESYNC_HORIZON: u32 = 8;

// ---------------------------------------------------------------------------
// Scores
// ---------------------------------------------------------------------------

/// Amplitude score: the matched-filter value relative to the detection
/// threshold, saturating at one.
///
/// Values at or above `gamma` score 1; smaller values score proportionally;
/// negative values score 0.
pub fn amplitude_confidence(value: f64, gamma: f64) -> Result<f64> {
    if !(gamma > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "detection threshold must be positive, got {gamma}"
        )));
    }
    Ok((value / gamma).clamp(0.0, 1.0))
}

/// Combined score: the product of the amplitude and interval scores.
pub fn combined_confidence(amplitude: f64, interval: f64) -> f64 {
    amplitude * interval
}

/// The confidence triple attached to each demodulated symbol.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Confidence {
    /// Amplitude score in [0, 1].
    pub amplitude: f64,
    /// Interval score in [0, 1].
    pub interval: f64,
    /// Product of the two, in [0, 1].
    pub combined: f64,
    /// Whether the combined score clears the reference threshold.
    pub is_reference: bool,
}

impl Confidence {
    /// Scores a candidate and applies the reference threshold.
    pub fn score(amplitude: f64, interval: f64, c_thres: f64) -> Self {
        let combined = combined_confidence(amplitude, interval);
        Confidence {
            amplitude,
            interval,
            combined,
            is_reference: combined > c_thres,
        }
    }

    /// The all-zero score given to symbols with no usable candidate.
    pub fn zero() -> Self {
        Confidence {
            amplitude: 0.0,
            interval: 0.0,
            combined: 0.0,
            is_reference: false,
        }
    }
}

// ---------------------------------------------------------------------------
// Interval model
// ---------------------------------------------------------------------------

/// Expected spacings between a reference symbol and the next symbol, one per
/// (reference bit, current bit) pair, with an acceptance half-width and a
/// likelihood scale.
///
/// With pulse-position signalling the spacing is one slot when the bits are
/// equal, one slot plus the position shift when a 0 precedes a 1, and one
/// slot minus the shift when a 1 precedes a 0.  Each skipped symbol adds one
/// more slot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntervalModel {
    /// Nominal symbol spacing (s): repetitions-per-symbol times frame time.
    pub slot: f64,
    /// Pulse-position shift between bit values (s).
    pub shift: f64,
    /// Acceptance half-width around each expected spacing (s); half the
    /// shift, so the three intervals tile the symbol window without overlap.
    pub tolerance: f64,
    /// Standard deviation of the Gaussian interval likelihood (s).
    pub sigma: f64,
}

/// Standard deviation bound for a single matched-filter arrival-time
/// estimate at the given RMS bandwidth (Hz) and linear SNR.
pub fn toa_sigma(rms_bandwidth: f64, snr: f64) -> Result<f64> {
    if !(rms_bandwidth > 0.0) || !(snr > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "rms bandwidth and snr must be positive, got {rms_bandwidth}, {snr}"
        )));
    }
    Ok(1.0 / (8.0 * std::f64::consts::PI.powi(2) * rms_bandwidth.powi(2) * snr).sqrt())
}

impl IntervalModel {
    /// Builds the model from the frame layout and an explicit likelihood
    /// scale.
    pub fn new(cfg: &FrameConfig, sigma: f64) -> Result<Self> {
        cfg.validate()?;
        if !(sigma > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "interval likelihood scale must be positive, got {sigma}"
            )));
        }
        Ok(IntervalModel {
            slot: cfg.slot(),
            shift: cfg.xi,
            tolerance: cfg.xi / 2.0,
            sigma,
        })
    }

    /// Builds the model with the likelihood scale derived from the link.
    ///
    /// The scale combines the thermal jitter of the two differenced
    /// arrival-time measurements with the worst-case clock-drift
    /// displacement accumulated over the resynchronization horizon:
    /// `sigma² = 2·toa_sigma² + (DRIFT_BUDGET · horizon · slot)²`.
    ///
    /// The drift term dominates by design.  A scale as tight as the thermal
    /// jitter would let ordinary noise fluctuations veto references, and a
    /// reference whose own measurement error sits in the tail would then
    /// suppress every later promotion until the frame is abandoned.  The
    /// drift bound keeps the likelihood insensitive to jitter while still
    /// collapsing to zero for wrong-peak outliers, which sit nanoseconds
    /// from every hypothesis.
    pub fn from_snr(
        cfg: &FrameConfig,
        rms_bandwidth: f64,
        ebn0_db: f64,
        resync_horizon: u32,
    ) -> Result<Self> {
        let snr = 10f64.powf(ebn0_db / 10.0);
        let toa = toa_sigma(rms_bandwidth, snr)?;
        let drift = DRIFT_BUDGET * resync_horizon as f64 * cfg.slot();
        Self::new(cfg, (2.0 * toa * toa + drift * drift).sqrt())
    }

    /// Expected spacing for (reference bit, current bit) after `skip`
    /// skipped symbols.
    pub fn mean(&self, q_ref: u8, q: u8, skip: u32) -> f64 {
        (skip as f64 + 1.0) * self.slot + (q as f64 - q_ref as f64) * self.shift
    }

    /// Classifies a measured spacing into a bit, or `None` when it falls
    /// outside both acceptance intervals.
    ///
    /// Each interval is left-open and right-closed, `(mean - tolerance,
    /// mean + tolerance]`, so the touching boundary between the two bit
    /// hypotheses belongs to the lower interval.
    pub fn classify(&self, dt: f64, q_ref: u8, skip: u32) -> Option<u8> {
        // The bit-0 mean is the lower of the two for either reference bit.
        for bit in [0u8, 1u8] {
            let u = self.mean(q_ref, bit, skip);
            if dt > u - self.tolerance && dt <= u + self.tolerance {
                return Some(bit);
            }
        }
        None
    }

    /// Interval likelihood: the sum of the two bit-hypothesis Gaussians at
    /// the measured spacing, clamped to one.
    pub fn likelihood(&self, dt: f64, q_ref: u8, skip: u32) -> f64 {
        let two_var = 2.0 * self.sigma * self.sigma;
        let l: f64 = [0u8, 1u8]
            .iter()
            .map(|&bit| {
                let d = dt - self.mean(q_ref, bit, skip);
                (-d * d / two_var).exp()
            })
            .sum();
        l.min(1.0)
    }
}

// ---------------------------------------------------------------------------
// Per-symbol output
// ---------------------------------------------------------------------------

/// One demodulated payload symbol.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymbolEstimate {
    /// Payload symbol index.
    pub index: usize,
    /// Refined receiver-clock arrival time of the chosen candidate, when
    /// one existed.
    pub time: Option<f64>,
    /// Demodulated bit; `None` marks an erasure (no candidate, spacing
    /// outside every interval, or frame abandoned).
    pub bit: Option<u8>,
    /// Confidence triple of the chosen candidate.
    pub confidence: Confidence,
    /// Symbols skipped since the reference at scoring time (0 = adjacent).
    pub skip: u32,
}

/// Demodulation result for one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameDemod {
    /// One entry per payload symbol, in order.
    pub symbols: Vec<SymbolEstimate>,
    /// Payload index at which the frame was abandoned, if the skip count
    /// exceeded the resynchronization horizon.
    pub abandoned_at: Option<usize>,
}

impl FrameDemod {
    /// Bit errors against the transmitted payload; erasures count as
    /// errors.
    pub fn bit_errors(&self, truth: &[u8]) -> usize {
        self.symbols
            .iter()
            .zip(truth)
            .filter(|(s, &t)| s.bit != Some(t))
            .count()
    }
}

// ---------------------------------------------------------------------------
// Demodulator
// ---------------------------------------------------------------------------

/// Reference-anchored differential demodulator for one link.
///
/// Holds the frame layout, hopping code, pulse shape, interval model,
/// detection threshold, and reference threshold; [`Demodulator::demod_frame`]
/// runs the per-frame state machine.
#[derive(Debug, Clone)]
pub struct Demodulator {
    cfg: FrameConfig,
    code: ThCode,
    pulse: Pulse,
    model: IntervalModel,
    gamma: f64,
    c_thres: f64,
    resync_horizon: u32,
}

/// Internal per-frame state: the current reference and the skip count.
struct RefState {
    t_ref: f64,
    q_ref: u8,
    skip: u32,
}

/// Memo of symbol-window peak lists, shared across a threshold sweep.
///
/// The peak list for a symbol window depends on the received waveform, the
/// code and pulse, the detection threshold, and the window's sample
/// position — but not on the reference threshold.  Demodulation passes
/// over one waveform that differ only in that threshold follow largely
/// identical reference trajectories, so their windows coincide and the
/// correlation work can be shared.  A cache is only valid for a fixed
/// waveform and demodulator parameter set aside from the threshold.
#[derive(Debug, Default)]
pub struct PeakCache {
    map: HashMap<(u64, i64), Vec<Peak>>,
}

impl Demodulator {
    /// Builds a demodulator; fails on a non-positive detection threshold or
    /// a reference threshold outside `[0, 1)`.
    pub fn new(
        cfg: &FrameConfig,
        code: &ThCode,
        pulse: &Pulse,
        model: IntervalModel,
        gamma: f64,
        c_thres: f64,
    ) -> Result<Self> {
        cfg.validate()?;
        if !(gamma > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "detection threshold must be positive, got {gamma}"
            )));
        }
        if !(0.0..1.0).contains(&c_thres) {
            return Err(Error::InvalidArgument(format!(
                "reference threshold must be in [0, 1), got {c_thres}"
            )));
        }
        Ok(Demodulator {
            cfg: cfg.clone(),
            code: code.clone(),
            pulse: pulse.clone(),
            model,
            gamma,
            c_thres,
            resync_horizon: DEFAULT_RESYNC_HORIZON,
        })
    }

    /// Replaces the default resynchronization horizon.
    pub fn with_resync_horizon(mut self, horizon: u32) -> Result<Self> {
        if horizon == 0 {
            return Err(Error::InvalidArgument(
                "resync horizon must be at least one symbol".into(),
            ));
        }
        self.resync_horizon = horizon;
        Ok(self)
    }

    /// The interval model in use.
    pub fn model(&self) -> &IntervalModel {
        &self.model
    }

    /// Demodulates `payload_len` symbols following the start-frame
    /// delimiter whose first symbol was acquired at `t_sfd`.
    ///
    /// The trailing delimiter symbols are run through the same state
    /// machine first, so the payload starts from the freshest possible
    /// reference rather than from the delimiter head several slots back;
    /// they are not reported.  When the skip count exceeds the horizon the
    /// frame is abandoned and the remaining symbols are erasures.
    pub fn demod_frame(
        &self,
        rx: &SampledSignal,
        t_sfd: f64,
        payload_len: usize,
    ) -> FrameDemod {
        self.demod_frame_cached(rx, t_sfd, payload_len, &mut PeakCache::default())
    }

    /// [`Demodulator::demod_frame`] with an externally owned window memo,
    /// for demodulating the same frame at several reference thresholds.
    pub fn demod_frame_cached(
        &self,
        rx: &SampledSignal,
        t_sfd: f64,
        payload_len: usize,
        cache: &mut PeakCache,
    ) -> FrameDemod {
        let mut state = RefState {
            t_ref: t_sfd,
            q_ref: 0,
            skip: 0,
        };
        let mut symbols = Vec::with_capacity(payload_len);
        let mut abandoned_at = None;

        let warmup = self.cfg.n_sfd as u64;
        let total = warmup - 1 + payload_len as u64;
        for step in 0..total {
            let slot_index = 1 + step;
            let payload_index = (slot_index as i64) - (warmup as i64);
            if abandoned_at.is_none() && state.skip > self.resync_horizon {
                abandoned_at = Some(payload_index.max(0) as usize);
            }
            if abandoned_at.is_some() {
                if payload_index >= 0 {
                    symbols.push(SymbolEstimate {
                        index: payload_index as usize,
                        time: None,
                        bit: None,
                        confidence: Confidence::zero(),
                        skip: state.skip,
                    });
                }
                continue;
            }
            let est = self.step(rx, slot_index, &mut state, cache);
            if payload_index >= 0 {
                symbols.push(SymbolEstimate {
                    index: payload_index as usize,
                    ..est
                });
            }
        }
        FrameDemod {
            symbols,
            abandoned_at,
        }
    }

    /// Scores one symbol slot: searches the window implied by the current
    /// reference, picks the candidate with the highest combined confidence,
    /// and promotes it to reference when it clears the threshold.
    fn step(
        &self,
        rx: &SampledSignal,
        slot_index: u64,
        state: &mut RefState,
        cache: &mut PeakCache,
    ) -> SymbolEstimate {
        let fs = rx.fs();
        let m = &self.model;
        // The window spans both bit hypotheses plus the acceptance
        // tolerance on each side.
        let lo = m.mean(state.q_ref, 0, state.skip) - m.tolerance;
        let hi = m.mean(state.q_ref, 1, state.skip) + m.tolerance;
        let i_lo = ((state.t_ref + lo - rx.t0()) * fs).round() as i64;
        let count = ((hi - lo) * fs).round() as usize + 1;

        // The window width is threshold-independent, so the start sample
        // and the slot's hopping pattern fully key the correlation.
        let peaks = cache.map.entry((slot_index, i_lo)).or_insert_with(|| {
            let tpl = SlotTemplate::new(&self.cfg, &self.code, &self.pulse, slot_index);
            let y = correlate(rx, &tpl, i_lo, count);
            local_maxima(&y, 0.3 * self.gamma)
        });

        let mut best: Option<(f64, f64, f64, f64)> = None; // (C, S, L, t)
        for peak in peaks.iter() {
            let t = rx.t0() + (i_lo as f64 + peak.index as f64 + peak.offset) / fs;
            let dt = t - state.t_ref;
            let s = amplitude_confidence(peak.value, self.gamma)
                .expect("threshold positivity is validated at construction");
            let l = m.likelihood(dt, state.q_ref, state.skip);
            let c = combined_confidence(s, l);
            if best.map_or(true, |(bc, ..)| c > bc) {
                best = Some((c, s, l, t));
            }
        }

        let est = match best {
            None => SymbolEstimate {
                index: 0,
                time: None,
                bit: None,
                confidence: Confidence::zero(),
                skip: state.skip,
            },
            Some((_, s, l, t)) => {
                let dt = t - state.t_ref;
                let bit = m.classify(dt, state.q_ref, state.skip);
                SymbolEstimate {
                    index: 0,
                    time: Some(t),
                    bit,
                    confidence: Confidence::score(s, l, self.c_thres),
                    skip: state.skip,
                }
            }
        };

        match (est.confidence.is_reference, est.bit, est.time) {
            (true, Some(bit), Some(t)) => {
                state.t_ref = t;
                state.q_ref = bit;
                state.skip = 0;
            }
            _ => state.skip += 1,
        }
        est
    }
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
