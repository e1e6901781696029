//! Packet acquisition via the start-frame delimiter (SFD): analytic
//! acceptance probabilities, preamble energy shaping, packet synthesis, and
//! the two-stage search that produces the packet timing reference.
//!
//! The SFD is a run of `n_sfd` bit-0 symbols at the head of each packet.
//! Acquisition detects a candidate first symbol, then verifies the
//! candidate by testing the remaining `n_sfd - 1` slots at their predicted
//! positions; the candidate is accepted when at least `n_suc` of them
//! detect.  The refined arrival time of the first symbol becomes the packet
//! timing reference for demodulation and ranging.

use crate::detection::{correlate, local_maxima, SlotTemplate};
use crate::error::Result;
use crate::signal::SampledSignal;
use crate::stats::binomial_tail;
use crate::waveform::{FrameConfig, Pulse, PulseTrain, ThCode};

/// Samples scanned on each side of a predicted verification slot; covers
/// clock drift accumulated over the SFD plus grid rounding.
const VERIFY_TOLERANCE: i64 = 4;

// ---------------------------------------------------------------------------
// Analytic acceptance probabilities
// ---------------------------------------------------------------------------

/// Per-stage and overall SFD acceptance probabilities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Acceptance {
    /// Detection probability of the first (timing) symbol.
    pub pd_first: f64,
    /// Detection probability of each trailing symbol.
    pub pd_rest: f64,
    /// Probability that at least `n_suc` of the trailing symbols detect.
    pub pd_verify: f64,
    /// Overall acceptance probability: `pd_first * pd_verify`.
    pub p_accept: f64,
}

/// Probability that the verification stage passes when each trailing symbol
/// detects independently with probability `pd_rest`.
pub fn verify_probability(cfg: &FrameConfig, pd_rest: f64) -> Result<f64> {
    binomial_tail(cfg.n_sfd_rest(), cfg.n_suc(), pd_rest)
}

/// Acceptance probabilities for a given per-test false-alarm probability
/// and total matched-filter noise deviation (thermal plus interference).
///
/// The first SFD symbol is transmitted with amplitude scale `a1` and the
/// rest with `a2` (see [`FrameConfig::sfd_amplitudes`]); the matched-filter
/// means scale accordingly.
pub fn acceptance_probability(
    cfg: &FrameConfig,
    p_fa: f64,
    sigma_total: f64,
) -> Result<Acceptance> {
    let (a1, a2) = cfg.sfd_amplitudes();
    let mean = cfg.e_b();
    let pd_first = crate::detection::detection_probability(p_fa, a1 * mean, sigma_total)?;
    let pd_rest = crate::detection::detection_probability(p_fa, a2 * mean, sigma_total)?;
    let pd_verify = verify_probability(cfg, pd_rest)?;
    Ok(Acceptance { pd_first, pd_rest, pd_verify, p_accept: pd_first * pd_verify })
}

/// Analytic acceptance probability as a function of the first-symbol energy
/// fraction, over the supplied grid of fractions.
pub fn sweep_energy_split(
    cfg: &FrameConfig,
    p_fa: f64,
    sigma_total: f64,
    fractions: &[f64],
) -> Result<Vec<(f64, f64)>> {
    let mut out = Vec::with_capacity(fractions.len());
    for &f in fractions {
        let mut c = cfg.clone();
        c.first_symbol_fraction = f;
        c.validate()?;
        let acc = acceptance_probability(&c, p_fa, sigma_total)?;
        out.push((f, acc.p_accept));
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Packet synthesis
// ---------------------------------------------------------------------------

/// Builds the pulse train for one packet in transmitter-local time.
///
/// Slots `0..n_sfd` carry the SFD (bit 0) with the configured energy split;
/// subsequent slots carry `payload` bits at nominal amplitude.  The packet
/// occupies `n_sfd + payload.len()` slots starting at local time zero.
pub fn synth_packet(cfg: &FrameConfig, code: &ThCode, payload: &[u8]) -> PulseTrain {
    let (a1, a2) = cfg.sfd_amplitudes();
    let mut train = PulseTrain::new();
    for k in 0..cfg.n_sfd as u64 {
        let amp = if k == 0 { a1 } else { a2 };
        train.push_symbol(cfg, code, k, 0, amp);
    }
    for (i, &bit) in payload.iter().enumerate() {
        train.push_symbol(cfg, code, cfg.n_sfd as u64 + i as u64, bit, 1.0);
    }
    train
}

// ---------------------------------------------------------------------------
// Acquisition search
// ---------------------------------------------------------------------------

/// Result of a successful SFD acquisition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SfdDetection {
    /// Refined receiver-clock arrival time of the first SFD symbol; the
    /// packet timing reference.
    pub t_ref: f64,
    /// Matched-filter value at the first symbol's peak.
    pub value: f64,
    /// Trailing symbols that passed verification (out of `n_sfd - 1`).
    pub hits: u32,
}

/// Searches `[t_min, t_max)` for the packet start.
///
/// Stage 1 scans the window with the slot-0 template and collects local
/// correlation maxima at or above `gamma`, earliest first.  Stage 2 tests
/// each candidate by correlating the slot-`k` template around the predicted
/// position of every trailing SFD symbol; the first candidate with at least
/// `n_suc` verified symbols is accepted.
pub fn detect_sfd(
    rx: &SampledSignal,
    cfg: &FrameConfig,
    code: &ThCode,
    pulse: &Pulse,
    gamma: f64,
    t_min: f64,
    t_max: f64,
) -> Option<SfdDetection> {
    let fs = rx.fs();
    let i_start = ((t_min - rx.t0()) * fs).round() as i64;
    let i_end = ((t_max - rx.t0()) * fs).round() as i64;
    if i_end <= i_start {
        return None;
    }
    let count = (i_end - i_start) as usize;
    let tpl0 = SlotTemplate::new(cfg, code, pulse, 0);
    let y = correlate(rx, &tpl0, i_start, count);
    let slot_samples = (cfg.slot() * fs).round() as i64;

    for peak in local_maxima(&y, gamma) {
        let cand = i_start + peak.index as i64;
        let mut hits = 0u32;
        for k in 1..cfg.n_sfd as u64 {
            let tpl_k = SlotTemplate::new(cfg, code, pulse, k);
            let predicted = cand + k as i64 * slot_samples - VERIFY_TOLERANCE;
            let window = correlate(rx, &tpl_k, predicted, 2 * VERIFY_TOLERANCE as usize + 1);
            if window.iter().any(|&v| v >= gamma) {
                hits += 1;
            }
        }
        if hits >= cfg.n_suc() {
            let t_ref = rx.t0() + (cand as f64 + peak.offset) / fs;
            return Some(SfdDetection { t_ref, value: peak.value, hits });
        }
    }
    None
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
