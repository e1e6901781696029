//! Multi-anchor network synthesis and per-link receiver processing.
//!
//! Builds receiver-grid waveforms carrying one packet from every anchor —
//! each link with its own clock model, propagation delay, and channel
//! profile — and runs the acquisition → demodulation → pseudo-delay
//! pipeline on individual links. Also provides the single-cell
//! matched-filter draws used by the threshold-characterization runs.

use rand::Rng;

use crate::channel::{add_awgn, apply_channel, propagation_delay, ChannelProfile, ClockModel};
use crate::clocksync::{pseudo_delay, PseudoDelay};
use crate::confidence::{Demodulator, FrameDemod, IntervalModel, PeakCache};
use crate::detection::{
    cfar_threshold, correlate, interference_var, mf_noise_sigma, SlotTemplate,
};
use crate::error::Result;
use crate::sfd::{detect_sfd, synth_packet};
use crate::signal::SampledSignal;
use crate::waveform::{FrameConfig, Pulse, PulseTrain, ThCode};

use super::config::ScenarioConfig;

/// Register length of the Gold family supplying anchor time-hopping codes.
const GOLD_DEGREE: u32 = 7;

// ---------------------------------------------------------------------------
// Scene description
// ---------------------------------------------------------------------------

/// One anchor-to-agent link: clock error, geometry, and channel.
#[derive(Debug, Clone)]
pub struct LinkSetup {
    /// Fractional rate error of the anchor clock relative to the agent.
    pub drift: f64,
    /// Residual synchronization offset of the anchor clock, seconds.
    pub sync_offset: f64,
    /// One-way propagation delay, seconds.
    pub delay: f64,
    /// Multipath profile of the link.
    pub profile: ChannelProfile,
}

impl LinkSetup {
    /// A single-path link with the given clock error and delay.
    pub fn line_of_sight(drift: f64, sync_offset: f64, delay: f64) -> Self {
        LinkSetup {
            drift,
            sync_offset,
            delay,
            profile: ChannelProfile::line_of_sight(),
        }
    }
}

/// Euclidean distance between two points of equal dimension.
pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Line-of-sight links from the scenario's geometry and clock tables.
pub fn scenario_links(scenario: &ScenarioConfig) -> Vec<LinkSetup> {
    let drifts = scenario.drifts();
    scenario
        .geometry
        .anchors
        .iter()
        .enumerate()
        .map(|(m, anchor)| {
            LinkSetup::line_of_sight(
                drifts[m],
                scenario.clocks.offsets_s[m],
                propagation_delay(distance(anchor, &scenario.geometry.agent)),
            )
        })
        .collect()
}

/// Distinct time-hopping codes for `n` anchors drawn from one Gold family.
///
/// All anchors share the family's preferred polynomial pair; each gets a
/// different phase of the second register, which selects a different
/// codeword. `n_chips` should cover the longest packet so no anchor wraps
/// its stored sequence mid-frame.
pub fn anchor_codes(cfg: &FrameConfig, n: usize, n_chips: usize) -> Result<Vec<ThCode>> {
    (0..n)
        .map(|m| ThCode::from_gold(GOLD_DEGREE, 1, 2 * m as u32 + 1, cfg, n_chips))
        .collect()
}

// ---------------------------------------------------------------------------
// Receiver-side constants
// ---------------------------------------------------------------------------

/// Noise and threshold constants the receiver derives before a run.
#[derive(Debug, Clone, Copy)]
pub struct ReceiverDesign {
    /// Per-sample noise standard deviation.
    pub sigma_z: f64,
    /// Matched-filter output deviation from thermal noise alone.
    pub sigma_mf: f64,
    /// Total deviation including the concurrent-transmitter allowance.
    pub sigma_tot: f64,
    /// Detection threshold at the configured false-alarm probability.
    pub gamma: f64,
}

impl ReceiverDesign {
    /// Derives the constants for one link.
    ///
    /// `interferers` lists the other transmitters the threshold must
    /// tolerate as `(relative gain, per-pulse energy)` pairs; pass an empty
    /// slice for a single-anchor scene.
    pub fn new(
        cfg: &FrameConfig,
        code: &ThCode,
        pulse: &Pulse,
        p_fa: f64,
        sigma_z: f64,
        interferers: &[(f64, f64)],
    ) -> Result<Self> {
        let tpl = SlotTemplate::new(cfg, code, pulse, 0);
        let sigma_mf = mf_noise_sigma(sigma_z, pulse.fs(), tpl.energy());
        let sigma_tot = (sigma_mf * sigma_mf + interference_var(cfg, pulse, interferers)).sqrt();
        let gamma = cfar_threshold(p_fa, sigma_tot)?;
        Ok(ReceiverDesign {
            sigma_z,
            sigma_mf,
            sigma_tot,
            gamma,
        })
    }
}

/// Demodulation settings shared by every link in one run.
#[derive(Debug, Clone)]
pub struct DemodSettings {
    /// Spacing-likelihood model for candidate scoring.
    pub model: IntervalModel,
    /// Detection threshold applied to matched-filter peaks.
    pub gamma: f64,
    /// Reference-promotion confidence threshold.
    pub c_thres: f64,
    /// Symbols a frame may skip before it is abandoned.
    pub horizon: u32,
}

// ---------------------------------------------------------------------------
// Network rendering and per-link observation
// ---------------------------------------------------------------------------

/// A fixed multi-anchor scene: shared frame layout, per-anchor codes, and
/// per-link channel and clock parameters.
#[derive(Debug, Clone)]
pub struct NetworkSim {
    pub cfg: FrameConfig,
    pub pulse: Pulse,
    pub codes: Vec<ThCode>,
    pub links: Vec<LinkSetup>,
}

impl NetworkSim {
    /// Number of links in the scene.
    pub fn n_links(&self) -> usize {
        self.links.len()
    }

    /// Samples needed for every link's packet plus `slack` slots of margin
    /// for clock offset, propagation, and pulse tails.
    pub fn window_len(&self, payload_len: usize, slack: f64) -> usize {
        let slots = (self.cfg.n_sfd as usize + payload_len) as f64 + slack;
        (slots * self.cfg.slot() * self.pulse.fs()).ceil() as usize
    }

    /// Renders one synchronized packet burst onto the receiver grid.
    ///
    /// Every anchor starts its packet at anchor-local time `tx_time`;
    /// `agent_offset` is the receiver-clock reading at anchor-local zero,
    /// common to all links on top of each link's residual offset. White
    /// noise of deviation `sigma_z` is added in place.
    #[allow(clippy::too_many_arguments)]
    pub fn render<R: Rng + ?Sized>(
        &self,
        payloads: &[Vec<u8>],
        agent_offset: f64,
        tx_time: f64,
        t0: f64,
        n_samples: usize,
        sigma_z: f64,
        rng: &mut R,
    ) -> Result<SampledSignal> {
        let mut rx = SampledSignal::zeros(self.pulse.fs(), t0, n_samples)?;
        for (m, link) in self.links.iter().enumerate() {
            let train = synth_packet(&self.cfg, &self.codes[m], &payloads[m]);
            let clock = ClockModel {
                offset: agent_offset + link.sync_offset + (1.0 + link.drift) * tx_time,
                drift: link.drift,
            };
            let warped = apply_channel(&train, &clock, link.delay, &link.profile);
            warped.render_into(&self.pulse, &mut rx);
        }
        add_awgn(&mut rx, sigma_z, rng);
        Ok(rx)
    }

    /// Runs acquisition and demodulation for one link.
    ///
    /// Searches `[search.0, search.1)` for the packet start; on acquisition
    /// the payload is demodulated and every classified symbol contributes a
    /// pseudo-delay observation and its combined confidence. `truth` is the
    /// transmitted payload used for error counting.
    pub fn observe(
        &self,
        rx: &SampledSignal,
        link: usize,
        settings: &DemodSettings,
        search: (f64, f64),
        truth: &[u8],
    ) -> Result<LinkObservation> {
        match self.acquire(rx, link, settings, search) {
            Some(t_ref) => self.observe_from(rx, link, settings, t_ref, truth),
            None => Ok(LinkObservation::unacquired()),
        }
    }

    /// Runs only the packet-start search for one link.
    ///
    /// Returns the acquired timing reference, or `None` when the search
    /// fails.  Acquisition depends on the detection threshold but not on
    /// the confidence threshold, so one acquisition can feed payload
    /// demodulation at several thresholds.
    pub fn acquire(
        &self,
        rx: &SampledSignal,
        link: usize,
        settings: &DemodSettings,
        search: (f64, f64),
    ) -> Option<f64> {
        detect_sfd(
            rx,
            &self.cfg,
            &self.codes[link],
            &self.pulse,
            settings.gamma,
            search.0,
            search.1,
        )
        .map(|det| det.t_ref)
    }

    /// Demodulates one link's payload from a known timing reference.
    pub fn observe_from(
        &self,
        rx: &SampledSignal,
        link: usize,
        settings: &DemodSettings,
        t_ref: f64,
        truth: &[u8],
    ) -> Result<LinkObservation> {
        let demod = self.demodulator(link, settings, settings.c_thres)?;
        let frame = demod.demod_frame(rx, t_ref, truth.len());
        Ok(self.collect_observation(&frame, t_ref, truth))
    }

    /// Demodulates one link's payload at several confidence thresholds
    /// from a shared timing reference.
    ///
    /// Returns one observation per threshold, in order.  The passes share
    /// the per-window correlation work, which dominates demodulation cost;
    /// `settings.c_thres` is ignored in favor of `thresholds`.
    pub fn observe_sweep(
        &self,
        rx: &SampledSignal,
        link: usize,
        settings: &DemodSettings,
        thresholds: &[f64],
        t_ref: f64,
        truth: &[u8],
    ) -> Result<Vec<LinkObservation>> {
        let mut cache = PeakCache::default();
        thresholds
            .iter()
            .map(|&c| {
                let demod = self.demodulator(link, settings, c)?;
                let frame = demod.demod_frame_cached(rx, t_ref, truth.len(), &mut cache);
                Ok(self.collect_observation(&frame, t_ref, truth))
            })
            .collect()
    }

    fn demodulator(
        &self,
        link: usize,
        settings: &DemodSettings,
        c_thres: f64,
    ) -> Result<Demodulator> {
        Demodulator::new(
            &self.cfg,
            &self.codes[link],
            &self.pulse,
            settings.model.clone(),
            settings.gamma,
            c_thres,
        )?
        .with_resync_horizon(settings.horizon)
    }

    fn collect_observation(
        &self,
        frame: &FrameDemod,
        t_ref: f64,
        truth: &[u8],
    ) -> LinkObservation {
        let mut series = Vec::new();
        let mut confidences = Vec::new();
        let mut conf_sum = 0.0;
        for s in &frame.symbols {
            conf_sum += s.confidence.combined;
            if let (Some(time), Some(bit)) = (s.time, s.bit) {
                let slot_index = self.cfg.n_sfd as u64 + s.index as u64;
                series.push(pseudo_delay(time, bit, slot_index, &self.cfg));
                confidences.push(s.confidence.combined);
            }
        }
        let mean_confidence = if frame.symbols.is_empty() {
            0.0
        } else {
            conf_sum / frame.symbols.len() as f64
        };
        LinkObservation {
            acquired: true,
            t_ref: Some(t_ref),
            abandoned: frame.abandoned_at.is_some(),
            bit_errors: frame.bit_errors(truth) as u64,
            bits: truth.len() as u64,
            mean_confidence,
            series,
            confidences,
        }
    }
}

/// Outcome of one link's acquisition and demodulation pass.
#[derive(Debug, Clone)]
pub struct LinkObservation {
    /// Whether the packet start was acquired at all.
    pub acquired: bool,
    /// Acquired packet timing reference (receiver clock), if any.
    pub t_ref: Option<f64>,
    /// Whether demodulation gave up before the end of the payload.
    pub abandoned: bool,
    /// Bit errors against the transmitted payload (erasures count).
    pub bit_errors: u64,
    /// Payload bits processed; zero when the packet was never acquired.
    pub bits: u64,
    /// Mean combined confidence over all payload symbols (erasures score
    /// zero); zero when the packet was never acquired.
    pub mean_confidence: f64,
    /// Pseudo-delay observation per classified symbol, in symbol order.
    pub series: Vec<PseudoDelay>,
    /// Combined confidence aligned with `series`.
    pub confidences: Vec<f64>,
}

impl LinkObservation {
    fn unacquired() -> Self {
        LinkObservation {
            acquired: false,
            t_ref: None,
            abandoned: false,
            bit_errors: 0,
            bits: 0,
            mean_confidence: 0.0,
            series: Vec::new(),
            confidences: Vec::new(),
        }
    }
}

// ---------------------------------------------------------------------------
// Single-cell detection draws
// ---------------------------------------------------------------------------

/// One Monte-Carlo draw of the slot-aligned matched-filter statistic.
///
/// Returns `(signal_cell, noise_cell)`: the filter output at the true
/// symbol position of a freshly rendered slot, and at a signal-free
/// position, each with independent noise. `interferers` adds asynchronous
/// same-frame-rate transmitters, one uniformly timed pulse per frame each,
/// to both cells.
pub fn detection_draw<R: Rng + ?Sized>(
    cfg: &FrameConfig,
    code: &ThCode,
    tpl: &SlotTemplate,
    pulse: &Pulse,
    sigma_z: f64,
    interferers: &[(f64, f64)],
    rng: &mut R,
) -> (f64, f64) {
    let fs = pulse.fs();
    let window = (cfg.slot() * fs).round() as usize + pulse.len();
    let frame_len = (cfg.t_f * fs).round() as i64;
    let mut cells = [0.0; 2];
    for (cell, with_signal) in cells.iter_mut().zip([true, false]) {
        let mut rx = SampledSignal::zeros(fs, 0.0, window)
            .expect("pulse sampling rate is validated at construction");
        if with_signal {
            let mut train = PulseTrain::new();
            train.push_symbol(cfg, code, 0, 0, 1.0);
            train.render_into(pulse, &mut rx);
        }
        for &(gain, e_tb_i) in interferers {
            let scale = gain * e_tb_i.sqrt();
            for r in 0..cfg.n_r as i64 {
                let at = r * frame_len + rng.random_range(0..frame_len);
                rx.add_scaled_at(at, pulse.samples(), scale);
            }
        }
        add_awgn(&mut rx, sigma_z, rng);
        *cell = correlate(&rx, tpl, 0, 1)[0];
    }
    (cells[0], cells[1])
}

/// Uniform random payload bits.
pub fn random_payload<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Vec<u8> {
    (0..len).map(|_| rng.random_range(0..=1u8)).collect()
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
