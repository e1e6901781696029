//! Waveform-level simulator for an impulse-radio ultra-wideband (IR-UWB)
//! downlink in which a receiver simultaneously demodulates data, estimates
//! per-link clock drift, and self-localizes from time-difference-of-arrival
//! (TDOA) measurements.
//!
//! Anchors broadcast time-hopped, pulse-position-modulated (TH-PPM) pulse
//! trains.  The receiver matched-filters each symbol, converts peak times into
//! pseudo time-of-arrival measurements, and attaches a *confidence* to every
//! symbol that blends amplitude evidence (peak vs. detection threshold) with
//! timing evidence (inter-symbol interval vs. the modulation hypotheses).
//! That one number then drives three consumers:
//!
//! * demodulation — the reference symbol for the next differential decision
//!   is only advanced on high-confidence symbols;
//! * clock sync — drift is estimated by confidence-gated least squares
//!   over the pseudo-delay series;
//! * localization — low-confidence links and symbols are down-weighted or
//!   excluded before the TDOA solve.
//!
//! Module map:
//!
//! * [`signal`] — uniformly sampled real waveforms.
//! * [`waveform`] — pulse shapes, frame/timing parameters, Gold time-hopping
//!   codes, and transmit-side synthesis.
//! * [`channel`] — clock offset/drift warping, propagation delay, multipath,
//!   and the multi-anchor superposition with AWGN.
//! * [`detection`] — matched filter, CFAR thresholding, and the analytic
//!   detection-probability model.
//! * [`sfd`] — start-of-frame-delimiter acquisition and its analytic model.
//! * [`confidence`] — per-symbol confidence and the sequential demodulator.
//! * [`clocksync`] — pseudo-delay bookkeeping, drift estimators, anchor
//!   offset calibration.
//! * [`localization`] — TDOA/range solvers, tracking, anchor selection.
//! * [`harness`] — reproducible Monte-Carlo experiments and CSV output.

pub mod channel;
pub mod clocksync;
pub mod confidence;
pub mod detection;
pub mod error;
pub mod harness;
pub mod localization;
pub mod sfd;
pub mod signal;
pub mod stats;
pub mod waveform;

pub use error::{Error, Result};

/// Propagation speed used to convert delays to distances, in m/s.
pub const SPEED_OF_LIGHT: f64 = 3.0e8;
