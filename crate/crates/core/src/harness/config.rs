//! Scenario configuration: a TOML file with sections for the frame layout,
//! radio front end, network geometry, clocks, sweep grids, and per-experiment
//! settings.  Every key has a default, so an empty file (or no file) runs the
//! reference scenario; unknown keys are rejected so typos cannot silently
//! fall back to defaults.
//!
//! Units are fixed per key and documented on each field: seconds for
//! durations, Hz for rates, dB for energy ratios, meters for positions, and
//! ppm for clock drifts.

use crate::error::{Error, Result};
use crate::waveform::FrameConfig;
use serde::Deserialize;
use std::path::Path;

// ---------------------------------------------------------------------------
// Sections
// ---------------------------------------------------------------------------

/// `[frame]` — slot/frame layout and per-pulse energy; mirrors
/// [`FrameConfig`] field for field.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FrameSection {
    /// Frame duration, seconds.
    pub t_f: f64,
    /// Pulses (frames) per symbol.
    pub n_r: u32,
    /// Symbols per packet, including the start-frame delimiter.
    pub n_f: u32,
    /// Pulse-position modulation shift, seconds.
    pub xi: f64,
    /// Time-hopping chip duration, seconds.
    pub t_c: f64,
    /// Energy per transmitted pulse, joules.
    pub e_tb: f64,
    /// Symbols in the start-frame delimiter.
    pub n_sfd: u32,
    /// Per-symbol miss probability the delimiter acceptance rule is sized for.
    pub p_e: f64,
    /// Fraction of delimiter energy on its first symbol.
    pub first_symbol_fraction: f64,
    /// Guard time for channel delay spread, seconds.
    pub t_spr: f64,
    /// Pulse support duration, seconds.
    pub t_b: f64,
}

impl Default for FrameSection {
    fn default() -> Self {
        let f = FrameConfig::default();
        FrameSection {
            t_f: f.t_f,
            n_r: f.n_r,
            n_f: f.n_f,
            xi: f.xi,
            t_c: f.t_c,
            e_tb: f.e_tb,
            n_sfd: f.n_sfd,
            p_e: f.p_e,
            first_symbol_fraction: f.first_symbol_fraction,
            t_spr: f.t_spr,
            t_b: f.t_b,
        }
    }
}

impl FrameSection {
    /// Converts to the core frame type, validating the combination.
    pub fn to_frame_config(&self) -> Result<FrameConfig> {
        let cfg = FrameConfig {
            t_f: self.t_f,
            n_r: self.n_r,
            n_f: self.n_f,
            xi: self.xi,
            t_c: self.t_c,
            e_tb: self.e_tb,
            n_sfd: self.n_sfd,
            p_e: self.p_e,
            first_symbol_fraction: self.first_symbol_fraction,
            t_spr: self.t_spr,
            t_b: self.t_b,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// `[radio]` — receiver front-end parameters.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RadioSection {
    /// Sampling rate, Hz.
    pub fs: f64,
    /// Per-test false-alarm probability the detection threshold is set for.
    pub p_fa: f64,
}

impl Default for RadioSection {
    fn default() -> Self {
        RadioSection { fs: 10e9, p_fa: 1e-3 }
    }
}

/// `[geometry]` — anchor and agent positions for the localization studies.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GeometrySection {
    /// Anchor positions, meters (3-vectors).
    pub anchors: Vec<Vec<f64>>,
    /// Agent position, meters (3-vector).
    pub agent: Vec<f64>,
}

impl Default for GeometrySection {
    fn default() -> Self {
        GeometrySection {
            anchors: vec![
                vec![2.0, 5.0, 2.0],
                vec![4.0, 8.0, 3.0],
                vec![5.0, 5.0, 3.0],
                vec![7.0, 3.0, 2.0],
            ],
            agent: vec![4.0, 5.5, 2.4],
        }
    }
}

/// `[clocks]` — per-anchor clock models relative to the agent.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClocksSection {
    /// Per-anchor clock drift, ppm.
    pub drifts_ppm: Vec<f64>,
    /// Per-anchor synchronization residual offsets, seconds.  Zero means the
    /// anchors share a common timebase; the agent's own offset is drawn per
    /// trial and cancels in delay differences.
    pub offsets_s: Vec<f64>,
}

impl Default for ClocksSection {
    fn default() -> Self {
        ClocksSection {
            drifts_ppm: vec![20.0, 10.0, 30.0, 20.0],
            offsets_s: vec![0.0; 4],
        }
    }
}

/// `[sweep]` — shared parameter grids.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    /// Energy-ratio grid for the detection characteristic, dB.
    pub ebn0_db: Vec<f64>,
    /// Repetition-count grid for the detection characteristic.
    pub n_r: Vec<u32>,
    /// Confidence-threshold grid for demodulation and drift studies.
    pub c_thres: Vec<f64>,
    /// False-alarm grid for the detection characteristic.
    pub p_fa_grid: Vec<f64>,
    /// First-symbol energy fractions for the delimiter split study.
    pub sfd_fractions: Vec<f64>,
}

impl Default for SweepSection {
    fn default() -> Self {
        SweepSection {
            ebn0_db: vec![7.0, 9.0, 11.0],
            n_r: vec![1, 3],
            c_thres: vec![0.85, 0.88, 0.90, 0.92, 0.94, 0.95, 0.96, 0.996],
            p_fa_grid: vec![
                1e-4, 2e-4, 5e-4, 1e-3, 2e-3, 5e-3, 1e-2, 2e-2, 5e-2, 0.1, 0.2, 0.5,
            ],
            sfd_fractions: (0..24).map(|i| 0.045 + 0.02 * i as f64).collect(),
        }
    }
}

/// `[demod]` — operating point of the sequential demodulator.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DemodSection {
    /// Operating confidence threshold for reference promotion.
    pub c_thres: f64,
    /// Symbols a reference may age before the frame is abandoned.
    pub resync_horizon: u32,
}

impl Default for DemodSection {
    fn default() -> Self {
        DemodSection { c_thres: 0.92, resync_horizon: 8 }
    }
}

/// `[sfd]` — delimiter energy-split experiment.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SfdSection {
    /// Operating energy ratio for the split sweep, dB.
    pub ebn0_db: f64,
}

impl Default for SfdSection {
    fn default() -> Self {
        SfdSection { ebn0_db: 9.0 }
    }
}

/// `[drift]` — clock-drift estimation experiment.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DriftSection {
    /// Energy ratios to run the threshold sweep at, dB.
    pub ebn0_db: Vec<f64>,
    /// Payload symbols per packet (sets the observation span).
    pub symbols: u32,
    /// Confidence-threshold grid for this experiment.  Kept separate from
    /// the shared sweep grid: near-1 thresholds leave too few symbols for
    /// a slope fit, which measures series truncation rather than weighting.
    pub c_thres: Vec<f64>,
}

impl Default for DriftSection {
    fn default() -> Self {
        // 640 payload symbols span ~0.31 ms; the slope estimator's error
        // floor scales as 1/span, and this span brings the high-SNR RMSE
        // under 0.15 ppm.
        DriftSection {
            ebn0_db: vec![9.0, 16.0],
            symbols: 640,
            c_thres: vec![0.5, 0.85, 0.90, 0.92, 0.95, 0.98],
        }
    }
}

/// `[ber]` — bit-error-rate vs confidence threshold experiment.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BerSection {
    /// Energy ratios to run the threshold sweep at, dB.
    pub ebn0_db: Vec<f64>,
}

impl Default for BerSection {
    fn default() -> Self {
        BerSection { ebn0_db: vec![9.0, 11.0] }
    }
}

/// `[rmse]` — localization accuracy experiment.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RmseSection {
    /// Energy-ratio grid for the accuracy-vs-ratio curve, dB.
    pub ebn0_db: Vec<f64>,
    /// Energy ratio for the accuracy-vs-threshold curve, dB.
    pub cthres_ebn0_db: f64,
}

impl Default for RmseSection {
    fn default() -> Self {
        RmseSection {
            ebn0_db: vec![7.0, 9.0, 11.0, 13.0, 16.0, 18.0],
            cthres_ebn0_db: 16.0,
        }
    }
}

/// `[rep]` — repetition-count vs transmit-power experiment.
///
/// Compares two network-wide ways of doubling symbol energy from the base
/// frame config: doubling the repetition count (same per-pulse energy) and
/// doubling per-pulse energy (same repetition count).  Both raise the
/// thermal energy ratio by 3 dB; only the former thins out inter-anchor
/// collision energy.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RepSection {
    /// Base energy ratios (per-pulse energy at the base repetition count
    /// against noise), dB.
    pub ebn0_db: Vec<f64>,
}

impl Default for RepSection {
    fn default() -> Self {
        RepSection { ebn0_db: vec![10.0, 12.0] }
    }
}

/// `[tracking]` — moving-agent experiment with per-epoch packets, clock
/// calibration, and confidence-based anchor selection (planar geometry).
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrackingSection {
    /// Energy ratio of an unobstructed link, dB.
    pub ebn0_db: f64,
    /// Anchor positions, meters (2-vectors).
    pub anchors: Vec<Vec<f64>>,
    /// Anchor indices (into `anchors`) used in the clean scenario.
    pub case1: Vec<usize>,
    /// Anchor indices used in the obstructed scenario.
    pub case2: Vec<usize>,
    /// Agent start position, meters.
    pub start: Vec<f64>,
    /// Agent velocity, meters per second.
    pub velocity: Vec<f64>,
    /// Wall-clock spacing between measurement epochs, seconds.
    pub epoch_dt: f64,
    /// Static epochs at the known start position used for clock calibration.
    pub cal_epochs: u32,
    /// Scored (moving) epochs after calibration.
    pub epochs: u32,
    /// Per-epoch, per-link range jitter injected on top of waveform noise,
    /// meters; stands in for hardware error sources the waveform model does
    /// not carry.
    pub range_sigma_m: f64,
    /// Index (into `anchors`) of the link whose line of sight is obstructed
    /// in the second scenario.
    pub obstructed_anchor: usize,
    /// Amplitude gain of the obstructed path.
    pub obstruction_gain: f64,
    /// Excess delay of the obstructed path, seconds.
    pub obstruction_excess_s: f64,
    /// Scored-epoch interval `[from, to)` during which the obstruction is
    /// present.
    pub obstruction_window: Vec<u32>,
    /// Links kept by confidence-based selection.
    pub selected: usize,
    /// Independent trajectory repetitions aggregated into the error CDF.
    pub trials: u64,
}

impl Default for TrackingSection {
    fn default() -> Self {
        TrackingSection {
            ebn0_db: 12.0,
            anchors: vec![
                vec![0.0, 3.6],
                vec![0.0, 1.8],
                vec![0.0, 0.0],
                vec![7.2, 1.8],
            ],
            case1: vec![0, 1, 2],
            case2: vec![0, 2, 3],
            start: vec![1.5, 0.8],
            velocity: vec![0.42, 0.2],
            epoch_dt: 0.1,
            cal_epochs: 20,
            epochs: 100,
            range_sigma_m: 0.028,
            obstructed_anchor: 2,
            obstruction_gain: 0.65,
            obstruction_excess_s: 1.67e-9,
            obstruction_window: vec![5, 95],
            selected: 2,
            trials: 5,
        }
    }
}

/// `[run]` — trial counts and the master seed.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    /// Monte-Carlo trials per grid point.
    pub trials: u64,
    /// Master seed all per-trial random streams derive from.
    pub seed: u64,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection { trials: 2000, seed: 20260823 }
    }
}

// ---------------------------------------------------------------------------
// Whole scenario
// ---------------------------------------------------------------------------

/// Complete scenario configuration; the deserialized form of a config file.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub frame: FrameSection,
    pub radio: RadioSection,
    pub geometry: GeometrySection,
    pub clocks: ClocksSection,
    pub sweep: SweepSection,
    pub demod: DemodSection,
    pub sfd: SfdSection,
    pub drift: DriftSection,
    pub ber: BerSection,
    pub rmse: RmseSection,
    pub rep: RepSection,
    pub tracking: TrackingSection,
    pub run: RunSection,
}

impl ScenarioConfig {
    /// Parses a TOML document; unknown keys anywhere are errors.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig =
            toml::from_str(text).map_err(|e| Error::ConfigParse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads and parses a config file.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::Io(std::io::Error::new(
                e.kind(),
                format!("{}: {e}", path.display()),
            ))
        })?;
        Self::from_toml_str(&text)
    }

    /// Cross-section consistency checks beyond per-field deserialization.
    pub fn validate(&self) -> Result<()> {
        self.frame.to_frame_config()?;
        let bad = |msg: String| Err(Error::InvalidConfig(msg));

        if !(self.radio.fs > 0.0) || !self.radio.fs.is_finite() {
            return bad(format!("radio.fs must be positive, got {}", self.radio.fs));
        }
        if !(self.radio.p_fa > 0.0 && self.radio.p_fa < 1.0) {
            return bad(format!(
                "radio.p_fa must lie in (0, 1), got {}",
                self.radio.p_fa
            ));
        }

        let n_anchors = self.geometry.anchors.len();
        if n_anchors < 4 {
            return bad(format!(
                "geometry.anchors needs at least 4 anchors for 3D work, got {n_anchors}"
            ));
        }
        for (i, a) in self.geometry.anchors.iter().enumerate() {
            if a.len() != 3 {
                return bad(format!(
                    "geometry.anchors[{i}] must be a 3-vector, got {} entries",
                    a.len()
                ));
            }
        }
        if self.geometry.agent.len() != 3 {
            return bad(format!(
                "geometry.agent must be a 3-vector, got {} entries",
                self.geometry.agent.len()
            ));
        }

        if self.clocks.drifts_ppm.len() != n_anchors {
            return bad(format!(
                "clocks.drifts_ppm has {} entries for {n_anchors} anchors",
                self.clocks.drifts_ppm.len()
            ));
        }
        if self.clocks.offsets_s.len() != n_anchors {
            return bad(format!(
                "clocks.offsets_s has {} entries for {n_anchors} anchors",
                self.clocks.offsets_s.len()
            ));
        }
        for &d in &self.clocks.drifts_ppm {
            if d.abs() >= 1000.0 {
                return bad(format!(
                    "clocks.drifts_ppm entry {d} is not ppm-scale (|drift| < 1000 ppm)"
                ));
            }
        }

        let grids: [(&str, &[f64]); 4] = [
            ("sweep.ebn0_db", &self.sweep.ebn0_db),
            ("sweep.c_thres", &self.sweep.c_thres),
            ("sweep.p_fa_grid", &self.sweep.p_fa_grid),
            ("sweep.sfd_fractions", &self.sweep.sfd_fractions),
        ];
        for (name, grid) in grids {
            if grid.is_empty() {
                return bad(format!("{name} must not be empty"));
            }
        }
        if self.sweep.n_r.is_empty() {
            return bad("sweep.n_r must not be empty".to_string());
        }
        for &c in &self.sweep.c_thres {
            if !(0.0..1.0).contains(&c) {
                return bad(format!("sweep.c_thres entry {c} must lie in [0, 1)"));
            }
        }
        for &p in &self.sweep.p_fa_grid {
            if !(p > 0.0 && p < 1.0) {
                return bad(format!("sweep.p_fa_grid entry {p} must lie in (0, 1)"));
            }
        }
        for &f in &self.sweep.sfd_fractions {
            if !(f > 0.0 && f < 1.0) {
                return bad(format!("sweep.sfd_fractions entry {f} must lie in (0, 1)"));
            }
        }
        if !(0.0..1.0).contains(&self.demod.c_thres) {
            return bad(format!(
                "demod.c_thres must lie in [0, 1), got {}",
                self.demod.c_thres
            ));
        }
        if self.demod.resync_horizon == 0 {
            return bad("demod.resync_horizon must be at least 1".to_string());
        }
        if self.drift.symbols < 8 {
            return bad(format!(
                "drift.symbols = {} is too short to regress a slope",
                self.drift.symbols
            ));
        }
        if self.drift.c_thres.is_empty() {
            return bad("drift.c_thres must not be empty".to_string());
        }
        for &c in &self.drift.c_thres {
            if !(0.0..1.0).contains(&c) {
                return bad(format!("drift.c_thres entry {c} must lie in [0, 1)"));
            }
        }

        let t = &self.tracking;
        if t.anchors.iter().any(|a| a.len() != 2)
            || t.start.len() != 2
            || t.velocity.len() != 2
        {
            return bad("tracking positions and velocity must be 2-vectors".to_string());
        }
        for (name, set) in [("case1", &t.case1), ("case2", &t.case2)] {
            if set.len() < 2 {
                return bad(format!("tracking.{name} needs at least two anchors"));
            }
            if let Some(&i) = set.iter().find(|&&i| i >= t.anchors.len()) {
                return bad(format!("tracking.{name} index {i} out of range"));
            }
        }
        if t.obstructed_anchor >= t.anchors.len() {
            return bad(format!(
                "tracking.obstructed_anchor {} out of range",
                t.obstructed_anchor
            ));
        }
        if !t.case2.contains(&t.obstructed_anchor) {
            return bad(format!(
                "tracking.obstructed_anchor {} is not part of tracking.case2",
                t.obstructed_anchor
            ));
        }
        if t.obstruction_window.len() != 2 || t.obstruction_window[0] > t.obstruction_window[1]
        {
            return bad("tracking.obstruction_window must be [from, to] with from <= to"
                .to_string());
        }
        if !(t.obstruction_gain > 0.0) || !(t.epoch_dt > 0.0) || !(t.range_sigma_m >= 0.0) {
            return bad("tracking gains, epoch spacing, and jitter must be positive"
                .to_string());
        }
        if t.selected < 2 || t.selected > t.case2.len() {
            return bad(format!(
                "tracking.selected = {} must lie in [2, {}]",
                t.selected,
                t.case2.len()
            ));
        }
        if t.cal_epochs < 2 || t.epochs == 0 || t.trials == 0 {
            return bad("tracking needs cal_epochs >= 2, epochs >= 1, trials >= 1"
                .to_string());
        }

        if self.run.trials == 0 {
            return bad("run.trials must be at least 1".to_string());
        }
        Ok(())
    }

    /// The validated core frame configuration.
    pub fn frame_config(&self) -> FrameConfig {
        self.frame
            .to_frame_config()
            .expect("validated at construction")
    }

    /// Per-anchor drifts as dimensionless fractions.
    pub fn drifts(&self) -> Vec<f64> {
        self.clocks.drifts_ppm.iter().map(|d| d * 1e-6).collect()
    }
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_yields_reference_scenario() {
        let cfg = ScenarioConfig::from_toml_str("").unwrap();
        assert_eq!(cfg.frame.n_r, 3);
        assert_eq!(cfg.geometry.anchors.len(), 4);
        assert_eq!(cfg.clocks.drifts_ppm, vec![20.0, 10.0, 30.0, 20.0]);
        assert_eq!(cfg.run.trials, 2000);
        assert_eq!(cfg.sweep.sfd_fractions.len(), 24);
        let frame = cfg.frame_config();
        assert_eq!(frame.e_b(), 3.0);
    }

    #[test]
    fn partial_section_overrides_only_named_keys() {
        let cfg = ScenarioConfig::from_toml_str(
            "[run]\ntrials = 17\n\n[frame]\nn_r = 4\n",
        )
        .unwrap();
        assert_eq!(cfg.run.trials, 17);
        assert_eq!(cfg.run.seed, RunSection::default().seed);
        assert_eq!(cfg.frame.n_r, 4);
        assert_eq!(cfg.frame.t_f, 160e-9);
    }

    #[test]
    fn unknown_keys_are_rejected_everywhere() {
        let top = ScenarioConfig::from_toml_str("speling = 3\n");
        assert!(top.is_err(), "unknown top-level key must fail");
        let nested = ScenarioConfig::from_toml_str("[frame]\nt_ff = 1e-9\n");
        assert!(nested.is_err(), "unknown section key must fail");
        let section = ScenarioConfig::from_toml_str("[framez]\nt_f = 1e-9\n");
        assert!(section.is_err(), "unknown section must fail");
    }

    #[test]
    fn cross_field_validation_catches_mismatches() {
        // Wrong drift vector length.
        let cfg = ScenarioConfig::from_toml_str(
            "[clocks]\ndrifts_ppm = [20.0, 10.0]\noffsets_s = [0.0, 0.0]\n",
        );
        assert!(cfg.is_err());
        // Drift not ppm-scale.
        let cfg = ScenarioConfig::from_toml_str(
            "[clocks]\ndrifts_ppm = [2e6, 10.0, 30.0, 20.0]\noffsets_s = [0.0, 0.0, 0.0, 0.0]\n",
        );
        assert!(cfg.is_err());
        // Invalid frame combination (no hop room).
        let cfg = ScenarioConfig::from_toml_str("[frame]\nt_f = 50e-9\n");
        assert!(cfg.is_err());
        // Threshold outside [0, 1).
        let cfg = ScenarioConfig::from_toml_str("[sweep]\nc_thres = [1.0]\n");
        assert!(cfg.is_err());
        // Obstructed anchor outside the scenario's anchor set.
        let cfg = ScenarioConfig::from_toml_str("[tracking]\nobstructed_anchor = 1\n");
        assert!(cfg.is_err());
    }

    #[test]
    fn default_scenario_validates() {
        ScenarioConfig::default().validate().unwrap();
    }
}
