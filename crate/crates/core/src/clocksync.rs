//! Clock-offset calibration between anchors and clock-drift estimation from
//! per-symbol timing.
//!
//! Each demodulated symbol yields a *pseudo-delay*: its arrival time with
//! the data-dependent position shift and the nominal slot grid removed.
//! For a stationary receiver the pseudo-delay is constant up to clock
//! drift, so its slope over the symbol index estimates the drift; symbol
//! confidences select which symbols enter the fit so that timing outliers
//! (wrong-bit or wrong-peak symbols) are excluded.

use crate::error::{Error, Result};
use crate::waveform::FrameConfig;

// ---------------------------------------------------------------------------
// Pseudo-delay
// ---------------------------------------------------------------------------

/// One symbol's timing residue after removing modulation and the slot grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PseudoDelay {
    /// Symbol slot index within the series.
    pub index: u64,
    /// Pseudo-delay (s): clock offset plus propagation delay plus
    /// drift-accumulated error for this symbol.
    pub beta: f64,
}

/// Strips the position shift of the demodulated bit and the nominal slot
/// grid from an arrival time.
///
/// For a drift-free link the result is the same for every symbol: the sum
/// of clock offset and propagation delay.  Drift shows up as a linear trend
/// over the index, and a wrongly demodulated bit as a ±shift outlier.
pub fn pseudo_delay(time: f64, bit: u8, index: u64, cfg: &FrameConfig) -> PseudoDelay {
    let beta = time - cfg.xi * bit as f64 - index as f64 * cfg.slot();
    PseudoDelay { index, beta }
}

/// Removes an estimated drift trend from a pseudo-delay series.
///
/// The compensated series has zero slope up to estimator noise and can be
/// averaged into a single arrival-time figure for positioning.
pub fn compensate_drift(series: &[PseudoDelay], drift: f64, slot: f64) -> Vec<PseudoDelay> {
    series
        .iter()
        .map(|p| PseudoDelay {
            index: p.index,
            beta: p.beta - drift * p.index as f64 * slot,
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Anchor offset calibration
// ---------------------------------------------------------------------------

/// Clock offsets of listening anchors relative to a transmitting reference
/// anchor, from repeated receive-time measurements and known geometry.
///
/// `times[i]` holds the local receive times recorded by the `i`-th
/// listening anchor and `prop_delays[i]` its known propagation delay from
/// the reference; the least-squares offset is the per-anchor mean of
/// `time − delay`.
pub fn anchor_offsets(times: &[Vec<f64>], prop_delays: &[f64]) -> Result<Vec<f64>> {
    if times.len() != prop_delays.len() {
        return Err(Error::InvalidArgument(format!(
            "{} time series but {} propagation delays",
            times.len(),
            prop_delays.len()
        )));
    }
    times
        .iter()
        .zip(prop_delays)
        .enumerate()
        .map(|(i, (series, delay))| {
            if series.is_empty() {
                return Err(Error::InsufficientData(format!(
                    "no receive times for listening anchor {i}"
                )));
            }
            Ok(series.iter().sum::<f64>() / series.len() as f64 - delay)
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Drift estimation
// ---------------------------------------------------------------------------

/// Estimated relative clock drift over a pseudo-delay series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftEstimate {
    /// Dimensionless drift (seconds per second).
    pub drift: f64,
    /// RMS residual (s) of the series around the fitted line.
    pub residual_rms: f64,
    /// Number of pseudo-delays that entered the fit.
    pub samples: usize,
}

/// Physical plausibility bound on relative crystal drift.
const DRIFT_BOUND: f64 = 1e-3;

fn validate_series(series: &[PseudoDelay]) -> Result<()> {
    if series.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "drift estimation needs at least 2 pseudo-delays, got {}",
            series.len()
        )));
    }
    for pair in series.windows(2) {
        if pair[1].index <= pair[0].index {
            return Err(Error::InvalidArgument(format!(
                "pseudo-delay indices must be strictly increasing, got {} then {}",
                pair[0].index, pair[1].index
            )));
        }
    }
    if series.iter().any(|p| !p.beta.is_finite()) {
        return Err(Error::InvalidArgument("non-finite pseudo-delay".into()));
    }
    Ok(())
}

/// Slope of consecutive pseudo-delay differences.
///
/// Model: `β_{i+1} − β_i = ε · (κ_{i+1} − κ_i) · slot`; index gaps widen
/// the regressor instead of imputing missing entries.  The slope is the
/// ratio `Σ Δβ / Σ Δκ·slot` rather than the regression form
/// `Σ x·y / Σ x²`: the ratio telescopes exactly to the endpoint slope
/// whatever the index gaps, so interior structure in the series (including
/// anything correlated with why an entry is missing) cannot leak into the
/// estimate.  The two forms coincide on gap-free series.
fn diff_slope(series: &[PseudoDelay], slot: f64) -> Result<DriftEstimate> {
    let mut sy = 0.0;
    let mut sx = 0.0;
    for pair in series.windows(2) {
        sy += pair[1].beta - pair[0].beta;
        sx += (pair[1].index - pair[0].index) as f64 * slot;
    }
    if sx <= 0.0 {
        return Err(Error::Solver(
            "degenerate drift design: no usable index spacing".into(),
        ));
    }
    let drift = sy / sx;
    if !drift.is_finite() || drift.abs() >= DRIFT_BOUND {
        return Err(Error::Solver(format!(
            "estimated drift {drift:.3e} exceeds the plausibility bound {DRIFT_BOUND:.0e}"
        )));
    }
    // Intercept and residuals of the undifferenced series around the line.
    let n = series.len() as f64;
    let intercept = series
        .iter()
        .map(|p| p.beta - drift * p.index as f64 * slot)
        .sum::<f64>()
        / n;
    let ss = series
        .iter()
        .map(|p| {
            let r = p.beta - intercept - drift * p.index as f64 * slot;
            r * r
        })
        .sum::<f64>();
    Ok(DriftEstimate {
        drift,
        residual_rms: (ss / n).sqrt(),
        samples: series.len(),
    })
}

/// Unweighted drift estimate over the full series.
///
/// With uniform index spacing the consecutive-difference design telescopes,
/// so isolated pseudo-delay outliers cancel out of the slope.
pub fn drift_ls(series: &[PseudoDelay], slot: f64) -> Result<DriftEstimate> {
    if !(slot > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "slot duration must be positive, got {slot}"
        )));
    }
    validate_series(series)?;
    diff_slope(series, slot)
}

/// Confidence-gated drift estimate.
///
/// Entries with combined confidence at or below `c_thres` are dropped and
/// the surviving subset is fitted exactly as [`drift_ls`] would fit it.
/// The confidence acts purely as a selection weight: the demodulator's
/// bounded classification windows cap how far a symbol's timing can be
/// wrong, so surviving symbols share one error scale and proportional
/// weights would only add weight noise (measurably inflating the estimator
/// variance by a few percent) without an outlier population to suppress.
/// Fails when fewer than two entries survive.
pub fn drift_mwls(
    series: &[PseudoDelay],
    confidences: &[f64],
    c_thres: f64,
    slot: f64,
) -> Result<DriftEstimate> {
    if !(slot > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "slot duration must be positive, got {slot}"
        )));
    }
    if series.len() != confidences.len() {
        return Err(Error::InvalidArgument(format!(
            "{} pseudo-delays but {} confidences",
            series.len(),
            confidences.len()
        )));
    }
    if !(0.0..=1.0).contains(&c_thres) {
        return Err(Error::InvalidArgument(format!(
            "confidence threshold must be in [0, 1], got {c_thres}"
        )));
    }
    let kept: Vec<PseudoDelay> = series
        .iter()
        .zip(confidences)
        .filter(|(_, &c)| c > c_thres)
        .map(|(p, _)| *p)
        .collect();
    if kept.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "only {} pseudo-delays above the confidence threshold, need 2",
            kept.len()
        )));
    }
    validate_series(&kept)?;
    diff_slope(&kept, slot)
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
