//! Python bindings for the IR-UWB downlink simulation library.
//!
//! Exposes the waveform/frame types, the sequential demodulator with its
//! per-symbol confidence, the drift estimators, the TDOA solver, and the
//! scripted Monte-Carlo experiment runner.  Scalar-heavy work stays in
//! Rust; Python sees plain floats, lists, and small wrapper classes.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use std::path::{Path, PathBuf};

use uwb_icl::channel::{add_awgn, apply_channel, ChannelProfile, ClockModel};
use uwb_icl::clocksync::{self, PseudoDelay};
use uwb_icl::confidence;
use uwb_icl::detection;
use uwb_icl::harness::config::ScenarioConfig;
use uwb_icl::harness::experiments::Runner as CoreRunner;
use uwb_icl::harness::results::ResultRow;
use uwb_icl::localization;
use uwb_icl::sfd;
use uwb_icl::signal::SampledSignal;
use uwb_icl::waveform;

fn err(e: uwb_icl::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

// ---------------------------------------------------------------------------
// Waveform types
// ---------------------------------------------------------------------------

/// Frame and modulation parameters shared by transmitter and receiver.
#[pyclass(module = "uwb_icl_py", name = "FrameConfig")]
#[derive(Clone)]
struct PyFrameConfig {
    inner: waveform::FrameConfig,
}

#[pymethods]
impl PyFrameConfig {
    /// Builds a frame layout; parameters default to the reference scenario.
    #[new]
    #[pyo3(signature = (*, t_f=None, n_r=None, n_f=None, xi=None, t_c=None,
                        e_tb=None, n_sfd=None, p_e=None,
                        first_symbol_fraction=None, t_spr=None, t_b=None))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        t_f: Option<f64>,
        n_r: Option<u32>,
        n_f: Option<u32>,
        xi: Option<f64>,
        t_c: Option<f64>,
        e_tb: Option<f64>,
        n_sfd: Option<u32>,
        p_e: Option<f64>,
        first_symbol_fraction: Option<f64>,
        t_spr: Option<f64>,
        t_b: Option<f64>,
    ) -> PyResult<Self> {
        let mut cfg = waveform::FrameConfig::default();
        macro_rules! apply {
            ($($field:ident),*) => {
                $(if let Some(v) = $field { cfg.$field = v; })*
            };
        }
        apply!(t_f, n_r, n_f, xi, t_c, e_tb, n_sfd, p_e, first_symbol_fraction, t_spr, t_b);
        cfg.validate().map_err(err)?;
        Ok(PyFrameConfig { inner: cfg })
    }

    #[getter]
    fn t_f(&self) -> f64 {
        self.inner.t_f
    }
    #[getter]
    fn n_r(&self) -> u32 {
        self.inner.n_r
    }
    #[getter]
    fn n_f(&self) -> u32 {
        self.inner.n_f
    }
    #[getter]
    fn xi(&self) -> f64 {
        self.inner.xi
    }
    #[getter]
    fn t_c(&self) -> f64 {
        self.inner.t_c
    }
    #[getter]
    fn e_tb(&self) -> f64 {
        self.inner.e_tb
    }
    #[getter]
    fn n_sfd(&self) -> u32 {
        self.inner.n_sfd
    }

    /// Symbol slot duration in seconds.
    fn slot(&self) -> f64 {
        self.inner.slot()
    }

    /// Received energy per payload bit.
    fn e_b(&self) -> f64 {
        self.inner.e_b()
    }

    /// Trailing delimiter hits required to accept a packet start.
    fn n_suc(&self) -> u32 {
        self.inner.n_suc()
    }

    fn __repr__(&self) -> String {
        format!(
            "FrameConfig(n_f={}, n_r={}, t_f={:.3e}, xi={:.3e})",
            self.inner.n_f, self.inner.n_r, self.inner.t_f, self.inner.xi
        )
    }
}

/// Unit-energy bandpass pulse sampled on a uniform grid.
#[pyclass(module = "uwb_icl_py", name = "Pulse")]
#[derive(Clone)]
struct PyPulse {
    inner: waveform::Pulse,
}

#[pymethods]
impl PyPulse {
    /// Second-derivative Gaussian pulse of the given support, sampled at `fs`.
    #[staticmethod]
    fn gauss2(duration: f64, fs: f64) -> PyResult<Self> {
        Ok(PyPulse {
            inner: waveform::Pulse::gauss2(duration, fs).map_err(err)?,
        })
    }

    #[getter]
    fn fs(&self) -> f64 {
        self.inner.fs()
    }
    #[getter]
    fn duration(&self) -> f64 {
        self.inner.duration()
    }

    fn energy(&self) -> f64 {
        self.inner.energy()
    }

    /// Gabor (RMS) bandwidth in Hz.
    fn rms_bandwidth(&self) -> f64 {
        self.inner.rms_bandwidth()
    }

    fn samples(&self) -> Vec<f64> {
        self.inner.samples().to_vec()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }
}

/// Periodic time-hopping code drawn from a Gold sequence.
#[pyclass(module = "uwb_icl_py", name = "ThCode")]
#[derive(Clone)]
struct PyThCode {
    inner: waveform::ThCode,
}

#[pymethods]
impl PyThCode {
    /// Gold-sequence hopping code for LFSR degree and seeds, quantized to
    /// the frame's chip grid.
    #[staticmethod]
    fn from_gold(
        degree: u32,
        seed_a: u32,
        seed_b: u32,
        cfg: &PyFrameConfig,
        n_chips: usize,
    ) -> PyResult<Self> {
        Ok(PyThCode {
            inner: waveform::ThCode::from_gold(degree, seed_a, seed_b, &cfg.inner, n_chips)
                .map_err(err)?,
        })
    }

    fn chips(&self) -> Vec<u16> {
        self.inner.chips().to_vec()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }
}

/// Uniformly sampled real waveform.
#[pyclass(module = "uwb_icl_py", name = "Signal")]
#[derive(Clone)]
struct PySignal {
    inner: SampledSignal,
}

#[pymethods]
impl PySignal {
    #[new]
    fn new(fs: f64, t0: f64, samples: Vec<f64>) -> PyResult<Self> {
        Ok(PySignal {
            inner: SampledSignal::new(fs, t0, samples).map_err(err)?,
        })
    }

    #[getter]
    fn fs(&self) -> f64 {
        self.inner.fs()
    }
    #[getter]
    fn t0(&self) -> f64 {
        self.inner.t0()
    }

    fn energy(&self) -> f64 {
        self.inner.energy()
    }

    fn samples(&self) -> Vec<f64> {
        self.inner.samples().to_vec()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }
}

// ---------------------------------------------------------------------------
// Single-link synthesis and reception
// ---------------------------------------------------------------------------

/// Renders one anchor's packet through clock skew, propagation delay, an
/// optional obstructed channel, and additive white noise.
///
/// `offset`/`drift` describe the receiver clock relative to the anchor,
/// `delay` the propagation delay in seconds.  `n_samples` sets the
/// receiver window length starting at time zero.
#[pyfunction]
#[pyo3(signature = (cfg, code, pulse, payload, n_samples, *, offset=0.0,
                    drift=0.0, delay=0.0, sigma=0.0, seed=0,
                    excess_delay=None, excess_gain=None))]
#[allow(clippy::too_many_arguments)]
fn render_link(
    cfg: &PyFrameConfig,
    code: &PyThCode,
    pulse: &PyPulse,
    payload: Vec<u8>,
    n_samples: usize,
    offset: f64,
    drift: f64,
    delay: f64,
    sigma: f64,
    seed: u64,
    excess_delay: Option<f64>,
    excess_gain: Option<f64>,
) -> PyResult<PySignal> {
    let train = sfd::synth_packet(&cfg.inner, &code.inner, &payload);
    let clock = ClockModel { offset, drift };
    let profile = match (excess_delay, excess_gain) {
        (Some(d), Some(g)) => ChannelProfile::obstructed(d, g),
        (None, None) => ChannelProfile::line_of_sight(),
        _ => {
            return Err(PyValueError::new_err(
                "excess_delay and excess_gain must be given together",
            ))
        }
    };
    let warped = apply_channel(&train, &clock, delay, &profile);
    let mut rx = SampledSignal::zeros(pulse.inner.fs(), 0.0, n_samples).map_err(err)?;
    warped.render_into(&pulse.inner, &mut rx);
    if sigma > 0.0 {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        add_awgn(&mut rx, sigma, &mut rng);
    }
    Ok(PySignal { inner: rx })
}

/// Searches `[t_min, t_max)` of a waveform for the packet start.
///
/// Returns `(t_ref, peak_value, verified_hits)` or `None`.
#[pyfunction]
fn detect_sfd(
    rx: &PySignal,
    cfg: &PyFrameConfig,
    code: &PyThCode,
    pulse: &PyPulse,
    gamma: f64,
    t_min: f64,
    t_max: f64,
) -> Option<(f64, f64, u32)> {
    sfd::detect_sfd(&rx.inner, &cfg.inner, &code.inner, &pulse.inner, gamma, t_min, t_max)
        .map(|d| (d.t_ref, d.value, d.hits))
}

// ---------------------------------------------------------------------------
// Demodulation
// ---------------------------------------------------------------------------

/// Expected symbol spacing model behind the interval confidence.
#[pyclass(module = "uwb_icl_py", name = "IntervalModel")]
#[derive(Clone)]
struct PyIntervalModel {
    inner: confidence::IntervalModel,
}

#[pymethods]
impl PyIntervalModel {
    /// Model with an explicitly chosen likelihood scale `sigma` (seconds).
    #[new]
    fn new(cfg: &PyFrameConfig, sigma: f64) -> PyResult<Self> {
        Ok(PyIntervalModel {
            inner: confidence::IntervalModel::new(&cfg.inner, sigma).map_err(err)?,
        })
    }

    /// Model whose scale follows from the timing Cramér–Rao bound at the
    /// given energy ratio plus the worst-case drift over the resync horizon.
    #[staticmethod]
    fn from_snr(
        cfg: &PyFrameConfig,
        rms_bandwidth: f64,
        ebn0_db: f64,
        resync_horizon: u32,
    ) -> PyResult<Self> {
        Ok(PyIntervalModel {
            inner: confidence::IntervalModel::from_snr(
                &cfg.inner,
                rms_bandwidth,
                ebn0_db,
                resync_horizon,
            )
            .map_err(err)?,
        })
    }

    #[getter]
    fn sigma(&self) -> f64 {
        self.inner.sigma
    }
    #[getter]
    fn tolerance(&self) -> f64 {
        self.inner.tolerance
    }
    #[getter]
    fn slot(&self) -> f64 {
        self.inner.slot
    }
    #[getter]
    fn shift(&self) -> f64 {
        self.inner.shift
    }
}

/// One demodulated payload symbol.
#[pyclass(module = "uwb_icl_py", name = "Symbol")]
#[derive(Clone)]
struct PySymbol {
    /// Payload symbol index.
    #[pyo3(get)]
    index: usize,
    /// Arrival time of the chosen candidate, if any.
    #[pyo3(get)]
    time: Option<f64>,
    /// Demodulated bit; `None` marks an erasure.
    #[pyo3(get)]
    bit: Option<u8>,
    /// Amplitude score in [0, 1].
    #[pyo3(get)]
    amplitude: f64,
    /// Interval score in [0, 1].
    #[pyo3(get)]
    interval: f64,
    /// Combined confidence in [0, 1].
    #[pyo3(get)]
    confidence: f64,
    /// Whether this symbol became the new timing reference.
    #[pyo3(get)]
    is_reference: bool,
}

#[pymethods]
impl PySymbol {
    fn __repr__(&self) -> String {
        format!(
            "Symbol(index={}, bit={:?}, confidence={:.4})",
            self.index, self.bit, self.confidence
        )
    }
}

/// Result of demodulating one frame.
#[pyclass(module = "uwb_icl_py", name = "FrameResult")]
struct PyFrameResult {
    /// One entry per payload symbol.
    #[pyo3(get)]
    symbols: Vec<PySymbol>,
    /// Payload index where the frame was abandoned, if it was.
    #[pyo3(get)]
    abandoned_at: Option<usize>,
    inner: confidence::FrameDemod,
}

#[pymethods]
impl PyFrameResult {
    /// Bit errors against a transmitted payload; erasures count as errors.
    fn bit_errors(&self, truth: Vec<u8>) -> usize {
        self.inner.bit_errors(&truth)
    }
}

/// Reference-anchored sequential demodulator.
#[pyclass(module = "uwb_icl_py", name = "Demodulator")]
struct PyDemodulator {
    inner: confidence::Demodulator,
    cfg: waveform::FrameConfig,
}

#[pymethods]
impl PyDemodulator {
    #[new]
    #[pyo3(signature = (cfg, code, pulse, model, gamma, c_thres, resync_horizon=None))]
    fn new(
        cfg: &PyFrameConfig,
        code: &PyThCode,
        pulse: &PyPulse,
        model: &PyIntervalModel,
        gamma: f64,
        c_thres: f64,
        resync_horizon: Option<u32>,
    ) -> PyResult<Self> {
        let mut demod = confidence::Demodulator::new(
            &cfg.inner,
            &code.inner,
            &pulse.inner,
            model.inner.clone(),
            gamma,
            c_thres,
        )
        .map_err(err)?;
        if let Some(h) = resync_horizon {
            demod = demod.with_resync_horizon(h).map_err(err)?;
        }
        Ok(PyDemodulator {
            inner: demod,
            cfg: cfg.inner.clone(),
        })
    }

    /// Demodulates `payload_len` symbols following a packet start at `t_sfd`.
    fn demod_frame(&self, rx: &PySignal, t_sfd: f64, payload_len: usize) -> PyFrameResult {
        let frame = self.inner.demod_frame(&rx.inner, t_sfd, payload_len);
        let symbols = frame
            .symbols
            .iter()
            .map(|s| PySymbol {
                index: s.index,
                time: s.time,
                bit: s.bit,
                amplitude: s.confidence.amplitude,
                interval: s.confidence.interval,
                confidence: s.confidence.combined,
                is_reference: s.confidence.is_reference,
            })
            .collect();
        PyFrameResult {
            symbols,
            abandoned_at: frame.abandoned_at,
            inner: frame,
        }
    }

    /// Pseudo-delay series of a demodulated frame: `(indices, betas,
    /// confidences)` over the classified symbols, with slot indices offset
    /// past the delimiter.
    fn pseudo_delays(&self, frame: &PyFrameResult) -> (Vec<u64>, Vec<f64>, Vec<f64>) {
        let mut idx = Vec::new();
        let mut betas = Vec::new();
        let mut confs = Vec::new();
        for s in &frame.inner.symbols {
            if let (Some(time), Some(bit)) = (s.time, s.bit) {
                let slot_index = self.cfg.n_sfd as u64 + s.index as u64;
                let p = clocksync::pseudo_delay(time, bit, slot_index, &self.cfg);
                idx.push(p.index);
                betas.push(p.beta);
                confs.push(s.confidence.combined);
            }
        }
        (idx, betas, confs)
    }
}

// ---------------------------------------------------------------------------
// Clock sync and localization
// ---------------------------------------------------------------------------

fn zip_series(indices: &[u64], betas: &[f64]) -> PyResult<Vec<PseudoDelay>> {
    if indices.len() != betas.len() {
        return Err(PyValueError::new_err(format!(
            "{} indices but {} pseudo-delays",
            indices.len(),
            betas.len()
        )));
    }
    Ok(indices
        .iter()
        .zip(betas)
        .map(|(&index, &beta)| PseudoDelay { index, beta })
        .collect())
}

/// Fitted clock drift over a pseudo-delay series.
#[pyclass(module = "uwb_icl_py", name = "DriftEstimate")]
struct PyDriftEstimate {
    /// Dimensionless drift (seconds per second).
    #[pyo3(get)]
    drift: f64,
    /// RMS residual (s) around the fitted line.
    #[pyo3(get)]
    residual_rms: f64,
    /// Pseudo-delays that entered the fit.
    #[pyo3(get)]
    samples: usize,
}

#[pymethods]
impl PyDriftEstimate {
    fn __repr__(&self) -> String {
        format!(
            "DriftEstimate(drift={:.3e}, residual_rms={:.3e}, samples={})",
            self.drift, self.residual_rms, self.samples
        )
    }
}

fn wrap_estimate(e: clocksync::DriftEstimate) -> PyDriftEstimate {
    PyDriftEstimate {
        drift: e.drift,
        residual_rms: e.residual_rms,
        samples: e.samples,
    }
}

/// Unweighted drift fit over the full pseudo-delay series.
#[pyfunction]
fn drift_ls(indices: Vec<u64>, betas: Vec<f64>, slot: f64) -> PyResult<PyDriftEstimate> {
    let series = zip_series(&indices, &betas)?;
    Ok(wrap_estimate(
        clocksync::drift_ls(&series, slot).map_err(err)?,
    ))
}

/// Confidence-gated drift fit: symbols at or below `c_thres` are excluded.
#[pyfunction]
fn drift_mwls(
    indices: Vec<u64>,
    betas: Vec<f64>,
    confidences: Vec<f64>,
    c_thres: f64,
    slot: f64,
) -> PyResult<PyDriftEstimate> {
    let series = zip_series(&indices, &betas)?;
    Ok(wrap_estimate(
        clocksync::drift_mwls(&series, &confidences, c_thres, slot).map_err(err)?,
    ))
}

/// Removes a fitted drift ramp from a pseudo-delay series.
#[pyfunction]
fn compensate_drift(
    indices: Vec<u64>,
    betas: Vec<f64>,
    drift: f64,
    slot: f64,
) -> PyResult<Vec<f64>> {
    let series = zip_series(&indices, &betas)?;
    Ok(clocksync::compensate_drift(&series, drift, slot)
        .iter()
        .map(|p| p.beta)
        .collect())
}

/// Listening-anchor clock offsets from receive times and known delays.
#[pyfunction]
fn anchor_offsets(times: Vec<Vec<f64>>, prop_delays: Vec<f64>) -> PyResult<Vec<f64>> {
    clocksync::anchor_offsets(&times, &prop_delays).map_err(err)
}

/// Position estimate with its residual and the anchors that produced it.
#[pyclass(module = "uwb_icl_py", name = "PositionFix")]
struct PyPositionFix {
    /// Estimated coordinates in meters.
    #[pyo3(get)]
    position: Vec<f64>,
    /// Euclidean residual norm (m) at the estimate.
    #[pyo3(get)]
    residual: f64,
    /// Anchor indices that entered the solve.
    #[pyo3(get)]
    anchors: Vec<usize>,
    /// Gauss–Newton iterations taken.
    #[pyo3(get)]
    iterations: u32,
}

#[pymethods]
impl PyPositionFix {
    fn __repr__(&self) -> String {
        format!(
            "PositionFix(position={:?}, residual={:.3e})",
            self.position, self.residual
        )
    }
}

/// Solves for a position from per-anchor pseudo-delays (seconds) sharing
/// one unknown clock offset, via differences against the first anchor.
#[pyfunction]
#[pyo3(signature = (pseudo_delays, anchors, initial=None))]
fn tdoa_solve(
    pseudo_delays: Vec<f64>,
    anchors: Vec<Vec<f64>>,
    initial: Option<Vec<f64>>,
) -> PyResult<PyPositionFix> {
    let fix = localization::tdoa_solve(&pseudo_delays, &anchors, initial.as_deref())
        .map_err(err)?;
    Ok(PyPositionFix {
        position: fix.position,
        residual: fix.residual,
        anchors: fix.anchors,
        iterations: fix.iterations,
    })
}

/// Indices of the `k` highest-confidence anchors, best first.
#[pyfunction]
fn select_anchors_by_confidence(confidences: Vec<f64>, k: usize) -> PyResult<Vec<usize>> {
    localization::select_anchors_by_confidence(&confidences, k).map_err(err)
}

// ---------------------------------------------------------------------------
// Analytic helpers
// ---------------------------------------------------------------------------

/// Per-sample noise deviation that realizes an energy ratio in dB.
#[pyfunction]
fn noise_sigma(e_b: f64, ebn0_db: f64, fs: f64) -> f64 {
    uwb_icl::channel::noise_sigma(e_b, ebn0_db, fs)
}

/// Matched-filter threshold for a target false alarm probability.
#[pyfunction]
fn cfar_threshold(p_fa: f64, sigma_total: f64) -> PyResult<f64> {
    detection::cfar_threshold(p_fa, sigma_total).map_err(err)
}

/// Analytic per-symbol detection probability at a threshold set for `p_fa`.
#[pyfunction]
fn detection_probability(p_fa: f64, mean: f64, sigma: f64) -> PyResult<f64> {
    detection::detection_probability(p_fa, mean, sigma).map_err(err)
}

// ---------------------------------------------------------------------------
// Experiment runner
// ---------------------------------------------------------------------------

/// Full simulation scenario: geometry, clocks, sweeps, and run settings.
#[pyclass(module = "uwb_icl_py", name = "Scenario")]
#[derive(Clone)]
struct PyScenario {
    inner: ScenarioConfig,
}

#[pymethods]
impl PyScenario {
    /// The built-in reference scenario.
    #[staticmethod]
    fn default() -> PyResult<Self> {
        let cfg = ScenarioConfig::default();
        cfg.validate().map_err(err)?;
        Ok(PyScenario { inner: cfg })
    }

    /// Parses a TOML document; unknown keys are errors.
    #[staticmethod]
    fn from_toml(text: &str) -> PyResult<Self> {
        Ok(PyScenario {
            inner: ScenarioConfig::from_toml_str(text).map_err(err)?,
        })
    }

    /// Reads and parses a TOML config file.
    #[staticmethod]
    fn from_path(path: PathBuf) -> PyResult<Self> {
        Ok(PyScenario {
            inner: ScenarioConfig::from_path(Path::new(&path)).map_err(err)?,
        })
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.run.seed
    }
    #[getter]
    fn trials(&self) -> u64 {
        self.inner.run.trials
    }
}

fn rows_to_py(py: Python<'_>, rows: &[ResultRow]) -> PyResult<Vec<Py<PyDict>>> {
    rows.iter()
        .map(|r| {
            let d = PyDict::new(py);
            d.set_item("experiment", &r.experiment)?;
            for (k, v) in &r.sweep {
                d.set_item(k, *v)?;
            }
            d.set_item("metric", &r.metric)?;
            d.set_item("value", r.value)?;
            d.set_item("stderr", r.stderr)?;
            d.set_item("trials", r.trials)?;
            Ok(d.unbind())
        })
        .collect()
}

/// Seeded Monte-Carlo experiment runner over a scenario.
#[pyclass(module = "uwb_icl_py", name = "Runner")]
struct PyRunner {
    inner: CoreRunner,
}

#[pymethods]
impl PyRunner {
    /// Builds a runner; `seed` and `trials` override the scenario's values.
    #[new]
    #[pyo3(signature = (scenario, *, seed=None, trials=None))]
    fn new(scenario: &PyScenario, seed: Option<u64>, trials: Option<u64>) -> PyResult<Self> {
        let mut runner = CoreRunner::new(scenario.inner.clone()).map_err(err)?;
        if let Some(s) = seed {
            runner = runner.with_seed(s);
        }
        if let Some(t) = trials {
            runner = runner.with_trials(t).map_err(err)?;
        }
        Ok(PyRunner { inner: runner })
    }

    /// Runs one experiment by name and returns its result rows as dicts.
    ///
    /// Names: `roc`, `sfd_split`, `drift`, `ber`, `rmse`, `rep`, `track`.
    fn run(&self, py: Python<'_>, name: &str) -> PyResult<Vec<Py<PyDict>>> {
        let rows = match name {
            "roc" => self.inner.run_roc(),
            "sfd_split" => self.inner.run_sfd_split(),
            "drift" => self.inner.run_drift(),
            "ber" => self.inner.run_ber(),
            "rmse" => self.inner.run_rmse(),
            "rep" => self.inner.run_rep(),
            "track" => self.inner.run_tracking().map(|(rows, _)| rows),
            other => {
                return Err(PyValueError::new_err(format!(
                    "unknown experiment '{other}'"
                )))
            }
        }
        .map_err(err)?;
        rows_to_py(py, &rows)
    }

    /// Runs the tracking experiment and returns its trajectories as
    /// `{case: [(epoch, true_x, true_y, est_x, est_y), ...]}`.
    fn run_track_trajectories(
        &self,
        py: Python<'_>,
    ) -> PyResult<Py<PyDict>> {
        let (_, tracks) = self.inner.run_tracking().map_err(err)?;
        let d = PyDict::new(py);
        for (name, points) in tracks {
            let rows: Vec<(u64, f64, f64, f64, f64)> = points
                .iter()
                .map(|p| (p.epoch, p.true_x, p.true_y, p.est_x, p.est_y))
                .collect();
            d.set_item(name, rows)?;
        }
        Ok(d.unbind())
    }

    /// Runs every experiment and writes one CSV per experiment into `out`.
    fn run_all(&self, out: PathBuf) -> PyResult<Vec<String>> {
        let written = self.inner.run_all(&out).map_err(err)?;
        Ok(written
            .iter()
            .map(|p| p.display().to_string())
            .collect())
    }
}

// ---------------------------------------------------------------------------
// Module
// ---------------------------------------------------------------------------

#[pymodule]
fn uwb_icl_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyFrameConfig>()?;
    m.add_class::<PyPulse>()?;
    m.add_class::<PyThCode>()?;
    m.add_class::<PySignal>()?;
    m.add_class::<PyIntervalModel>()?;
    m.add_class::<PySymbol>()?;
    m.add_class::<PyFrameResult>()?;
    m.add_class::<PyDemodulator>()?;
    m.add_class::<PyDriftEstimate>()?;
    m.add_class::<PyPositionFix>()?;
    m.add_class::<PyScenario>()?;
    m.add_class::<PyRunner>()?;
    m.add_function(wrap_pyfunction!(render_link, m)?)?;
    m.add_function(wrap_pyfunction!(detect_sfd, m)?)?;
    m.add_function(wrap_pyfunction!(drift_ls, m)?)?;
    m.add_function(wrap_pyfunction!(drift_mwls, m)?)?;
    m.add_function(wrap_pyfunction!(compensate_drift, m)?)?;
    m.add_function(wrap_pyfunction!(anchor_offsets, m)?)?;
    m.add_function(wrap_pyfunction!(tdoa_solve, m)?)?;
    m.add_function(wrap_pyfunction!(select_anchors_by_confidence, m)?)?;
    m.add_function(wrap_pyfunction!(noise_sigma, m)?)?;
    m.add_function(wrap_pyfunction!(cfar_threshold, m)?)?;
    m.add_function(wrap_pyfunction!(detection_probability, m)?)?;
    m.add("SPEED_OF_LIGHT", uwb_icl::SPEED_OF_LIGHT)?;
    Ok(())
}
