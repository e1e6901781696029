//! Matched-filter symbol detection: sparse correlation against a slot
//! template, constant-false-alarm-rate thresholding, interference
//! statistics, and sub-sample peak refinement.
//!
//! The matched-filter statistic at alignment `k` is
//! `y[k] = sum_j r[k + j] h[j] / fs`, where `h` is the slot template.  For a
//! noise-free pulse-aligned input the statistic equals the template energy;
//! for white noise of per-sample deviation `sigma_z` it is Gaussian with
//! variance `sigma_z^2 / fs * E_template`.

use crate::error::Result;
use crate::signal::SampledSignal;
use crate::stats::{q, q_inv};
use crate::waveform::{FrameConfig, Pulse, ThCode};

// ---------------------------------------------------------------------------
// Slot template
// ---------------------------------------------------------------------------

/// Sparse matched-filter template for one slot: the symbol's pulses at their
/// code-selected offsets, stored as a shared pulse shape plus start offsets.
#[derive(Debug, Clone)]
pub struct SlotTemplate {
    offsets: Vec<i64>,
    shape: Vec<f64>,
    energy: f64,
    fs: f64,
}

impl SlotTemplate {
    /// Builds the bit-0 template for the given absolute slot index.
    pub fn new(cfg: &FrameConfig, code: &ThCode, pulse: &Pulse, slot: u64) -> Self {
        let fs = pulse.fs();
        let offsets = (0..cfg.n_r as u64)
            .map(|r| {
                let chip = code.chip(slot * cfg.n_r as u64 + r) as f64;
                ((r as f64 * cfg.t_f + chip * cfg.t_c) * fs).round() as i64
            })
            .collect();
        let amp = cfg.e_tb.sqrt();
        let shape: Vec<f64> = pulse.samples().iter().map(|s| s * amp).collect();
        let pulse_energy: f64 = shape.iter().map(|s| s * s).sum::<f64>() / fs;
        SlotTemplate {
            offsets,
            shape,
            energy: cfg.n_r as f64 * pulse_energy,
            fs,
        }
    }

    /// Sample offsets of each pulse start within the slot.
    pub fn offsets(&self) -> &[i64] {
        &self.offsets
    }

    /// Discrete template energy (equals the symbol energy `n_r * e_tb`).
    pub fn energy(&self) -> f64 {
        self.energy
    }

    /// Sampling rate the template was built for.
    pub fn fs(&self) -> f64 {
        self.fs
    }

    /// Number of samples from the template origin to the end of its last
    /// pulse; windows must extend at least this far past an alignment.
    pub fn span(&self) -> i64 {
        self.offsets.iter().copied().max().unwrap_or(0) + self.shape.len() as i64
    }
}

/// Correlates the received signal with a slot template.
///
/// Returns `count` statistics; entry `k` corresponds to the template origin
/// aligned at receiver sample index `start + k`.  Samples outside the signal
/// are treated as zero.
pub fn correlate(rx: &SampledSignal, tpl: &SlotTemplate, start: i64, count: usize) -> Vec<f64> {
    debug_assert!(
        (rx.fs() - tpl.fs).abs() <= 1e-6 * tpl.fs,
        "template rate {} differs from signal rate {}",
        tpl.fs,
        rx.fs()
    );
    let dt = 1.0 / rx.fs();
    let n = rx.len() as i64;
    let m = tpl.shape.len();
    let mut out = Vec::with_capacity(count);
    for k in 0..count as i64 {
        let base = start + k;
        let mut acc = 0.0;
        for &off in &tpl.offsets {
            let b = base + off;
            if b >= 0 && b + m as i64 <= n {
                let seg = &rx.samples()[b as usize..b as usize + m];
                acc += seg.iter().zip(&tpl.shape).map(|(r, h)| r * h).sum::<f64>();
            } else {
                for (j, &h) in tpl.shape.iter().enumerate() {
                    acc += rx.value_or_zero(b + j as i64) * h;
                }
            }
        }
        out.push(acc * dt);
    }
    out
}

// ---------------------------------------------------------------------------
// Thresholds and analytic characteristics
// ---------------------------------------------------------------------------

/// Standard deviation of the matched-filter statistic under white noise of
/// per-sample deviation `sigma_z`.
pub fn mf_noise_sigma(sigma_z: f64, fs: f64, template_energy: f64) -> f64 {
    (sigma_z * sigma_z / fs * template_energy).sqrt()
}

/// Detection threshold holding the per-test false-alarm probability at
/// `p_fa` for a statistic with total standard deviation `sigma_total`.
pub fn cfar_threshold(p_fa: f64, sigma_total: f64) -> Result<f64> {
    Ok(q_inv(p_fa)? * sigma_total)
}

/// Variance of the normalized pulse-collision gain for asynchronous
/// transmissions with one pulse per frame.
///
/// A foreign pulse uniformly placed in a frame of duration `t_f` overlaps a
/// template pulse with the squared normalized autocorrelation summed over
/// grid lags, giving `sum_k rho[k]^2 / (fs * t_f)`.
pub fn collision_gain_var(pulse: &Pulse, t_f: f64) -> f64 {
    let rho = pulse.autocorrelation();
    let two_sided: f64 =
        rho[0] * rho[0] + 2.0 * rho[1..].iter().map(|r| r * r).sum::<f64>();
    two_sided / (pulse.fs() * t_f)
}

/// Variance contributed to the matched-filter statistic by concurrent
/// transmitters.
///
/// Each entry of `interferers` is `(gain, e_tb)`: the channel amplitude gain
/// and per-pulse energy of one interfering transmitter.  Every template
/// frame collects one independent collision opportunity per interferer.
pub fn interference_var(
    cfg: &FrameConfig,
    pulse: &Pulse,
    interferers: &[(f64, f64)],
) -> f64 {
    let sigma_a_sq = collision_gain_var(pulse, cfg.t_f);
    let sum: f64 = interferers
        .iter()
        .map(|&(gain, e_tb)| gain * gain * cfg.e_tb * e_tb)
        .sum();
    cfg.n_r as f64 * sigma_a_sq * sum
}

/// Probability that a Gaussian statistic with mean `mean` and deviation
/// `sigma` exceeds the threshold set for false-alarm probability `p_fa`.
pub fn detection_probability(p_fa: f64, mean: f64, sigma: f64) -> Result<f64> {
    Ok(q(q_inv(p_fa)? - mean / sigma))
}

// ---------------------------------------------------------------------------
// Peak extraction
// ---------------------------------------------------------------------------

/// A correlation peak with sub-sample refinement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    /// Grid index of the maximum within the scanned window.
    pub index: usize,
    /// Statistic value at the grid maximum.
    pub value: f64,
    /// Sub-sample offset of the interpolated vertex, in (-0.5, 0.5].
    pub offset: f64,
}

/// Vertex offset of the parabola through three equally spaced samples,
/// clamped to half a sample; returns 0 for degenerate (collinear) triples.
pub fn refine_peak_offset(y_minus: f64, y_0: f64, y_plus: f64) -> f64 {
    let denom = y_minus - 2.0 * y_0 + y_plus;
    if denom.abs() < f64::EPSILON * (y_minus.abs() + y_0.abs() + y_plus.abs() + 1.0) {
        return 0.0;
    }
    (0.5 * (y_minus - y_plus) / denom).clamp(-0.5, 0.5)
}

/// Largest statistic in the window, refined by parabolic interpolation.
///
/// Peaks on the window boundary get no refinement.  Returns `None` for an
/// empty window.
pub fn strongest_peak(y: &[f64]) -> Option<Peak> {
    if y.is_empty() {
        return None;
    }
    let (index, &value) = y
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))?;
    let offset = if index > 0 && index + 1 < y.len() {
        refine_peak_offset(y[index - 1], value, y[index + 1])
    } else {
        0.0
    };
    Some(Peak { index, value, offset })
}

/// All strict-or-plateau local maxima at or above `floor`, each refined.
///
/// Interior points qualify when not smaller than both neighbors; window
/// endpoints qualify when not smaller than their single neighbor.
pub fn local_maxima(y: &[f64], floor: f64) -> Vec<Peak> {
    let n = y.len();
    let mut peaks = Vec::new();
    for i in 0..n {
        if y[i] < floor {
            continue;
        }
        let left_ok = i == 0 || y[i] >= y[i - 1];
        let right_ok = i + 1 == n || y[i] >= y[i + 1];
        // Suppress plateau duplicates: only the first index of a flat run
        // counts.
        let plateau_dup = i > 0 && y[i] == y[i - 1];
        if left_ok && right_ok && !plateau_dup {
            let offset = if i > 0 && i + 1 < n {
                refine_peak_offset(y[i - 1], y[i], y[i + 1])
            } else {
                0.0
            };
            peaks.push(Peak { index: i, value: y[i], offset });
        }
    }
    peaks
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{add_awgn, noise_sigma};
    use crate::waveform::{synth_template, PulseTrain};
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn setup() -> (FrameConfig, Pulse, ThCode) {
        let cfg = FrameConfig::default();
        let pulse = Pulse::gauss2(cfg.t_b, 10e9).unwrap();
        let code = ThCode::from_gold(7, 1, 5, &cfg, 256).unwrap();
        (cfg, pulse, code)
    }

    #[test]
    fn aligned_correlation_equals_template_energy() {
        let (cfg, pulse, code) = setup();
        let tpl = SlotTemplate::new(&cfg, &code, &pulse, 0);
        assert_relative_eq!(tpl.energy(), cfg.e_b(), max_relative = 1e-12);

        let mut train = PulseTrain::new();
        train.push_symbol(&cfg, &code, 0, 0, 1.0);
        let n = (cfg.slot() * pulse.fs()).round() as usize + 100;
        let rx = train.render(&pulse, 0.0, n);

        let y = correlate(&rx, &tpl, -20, 41);
        let peak = strongest_peak(&y).unwrap();
        assert_eq!(peak.index, 20, "peak should sit at zero alignment");
        assert_relative_eq!(peak.value, cfg.e_b(), max_relative = 1e-9);
        // Noise-free symmetric correlation: refined vertex on the grid point.
        assert_abs_diff_eq!(peak.offset, 0.0, epsilon = 1e-6);
    }

    #[test]
    fn correlate_agrees_with_dense_reference() {
        let (cfg, pulse, code) = setup();
        let tpl = SlotTemplate::new(&cfg, &code, &pulse, 3);
        let dense = synth_template(&cfg, &code, &pulse, 3);

        let n = dense.len() + 200;
        let mut rx = SampledSignal::zeros(pulse.fs(), 0.0, n).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for s in rx.samples_mut() {
            *s = rng.random_range(-1.0e4..1.0e4);
        }

        let y = correlate(&rx, &tpl, 0, 120);
        let dt = 1.0 / pulse.fs();
        for (k, &yk) in y.iter().enumerate() {
            let mut acc = 0.0;
            for (i, &h) in dense.samples().iter().enumerate() {
                if h != 0.0 {
                    acc += rx.value_or_zero(k as i64 + i as i64) * h;
                }
            }
            assert_relative_eq!(yk, acc * dt, max_relative = 1e-9, epsilon = 1e-12);
        }
    }

    #[test]
    fn shifted_bit_moves_the_peak_by_the_modulation_offset() {
        let (cfg, pulse, code) = setup();
        let tpl = SlotTemplate::new(&cfg, &code, &pulse, 0);
        let mut train = PulseTrain::new();
        train.push_symbol(&cfg, &code, 0, 1, 1.0);
        let n = (cfg.slot() * pulse.fs()).round() as usize + 600;
        let rx = train.render(&pulse, 0.0, n);

        let shift = (cfg.xi * pulse.fs()).round() as usize;
        let y = correlate(&rx, &tpl, 0, shift + 200);
        let peak = strongest_peak(&y).unwrap();
        assert_eq!(peak.index, shift);
        assert_relative_eq!(peak.value, cfg.e_b(), max_relative = 1e-9);
    }

    #[test]
    fn noise_statistic_matches_predicted_deviation_and_false_alarm_rate() {
        let (cfg, pulse, code) = setup();
        let tpl = SlotTemplate::new(&cfg, &code, &pulse, 0);
        let sigma_z = noise_sigma(cfg.e_b(), 6.0, pulse.fs());
        let sigma_mf = mf_noise_sigma(sigma_z, pulse.fs(), tpl.energy());
        let p_fa = 0.05;
        let gamma = cfar_threshold(p_fa, sigma_mf).unwrap();

        let trials = 3000;
        let window = tpl.span() as usize + 4;
        let mut rng = ChaCha8Rng::seed_from_u64(1234);
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        let mut alarms = 0u32;
        for _ in 0..trials {
            let mut rx = SampledSignal::zeros(pulse.fs(), 0.0, window).unwrap();
            add_awgn(&mut rx, sigma_z, &mut rng);
            let y = correlate(&rx, &tpl, 0, 1)[0];
            sum += y;
            sum_sq += y * y;
            if y > gamma {
                alarms += 1;
            }
        }
        let mean = sum / trials as f64;
        let var = sum_sq / trials as f64 - mean * mean;
        assert!(mean.abs() < 5.0 * sigma_mf / (trials as f64).sqrt(), "mean {mean}");
        assert_relative_eq!(var, sigma_mf * sigma_mf, max_relative = 0.08);
        let rate = alarms as f64 / trials as f64;
        // 4 binomial standard deviations around p_fa.
        assert!((rate - p_fa).abs() < 0.016, "false-alarm rate {rate}");
    }

    #[test]
    fn detection_rate_matches_analytic_probability() {
        let (cfg, pulse, code) = setup();
        let tpl = SlotTemplate::new(&cfg, &code, &pulse, 0);
        let ebn0_db = 6.0;
        let sigma_z = noise_sigma(cfg.e_b(), ebn0_db, pulse.fs());
        let sigma_mf = mf_noise_sigma(sigma_z, pulse.fs(), tpl.energy());
        let p_fa = 0.01;
        let gamma = cfar_threshold(p_fa, sigma_mf).unwrap();
        let predicted = detection_probability(p_fa, tpl.energy(), sigma_mf).unwrap();

        let trials = 3000;
        let window = tpl.span() as usize + 4;
        let mut train = PulseTrain::new();
        train.push_symbol(&cfg, &code, 0, 0, 1.0);
        let clean = train.render(&pulse, 0.0, window);
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let mut hits = 0u32;
        for _ in 0..trials {
            let mut rx = clean.clone();
            add_awgn(&mut rx, sigma_z, &mut rng);
            if correlate(&rx, &tpl, 0, 1)[0] > gamma {
                hits += 1;
            }
        }
        let rate = hits as f64 / trials as f64;
        let se = (predicted * (1.0 - predicted) / trials as f64).sqrt();
        assert!(
            (rate - predicted).abs() < 4.0 * se + 0.005,
            "detection rate {rate} vs predicted {predicted}"
        );
    }

    #[test]
    fn collision_variance_matches_monte_carlo() {
        let (cfg, pulse, code) = setup();
        let tpl = SlotTemplate::new(&cfg, &code, &pulse, 0);
        let predicted = interference_var(&cfg, &pulse, &[(1.0, cfg.e_tb)]);

        // One interfering pulse per template frame, placed uniformly over
        // the frame; the statistic's variance over placements should match
        // the analytic collision variance.
        let trials = 20000;
        let window = tpl.span() as usize + 40;
        let frame_samples = (cfg.t_f * pulse.fs()).round() as i64;
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for _ in 0..trials {
            let mut rx = SampledSignal::zeros(pulse.fs(), 0.0, window).unwrap();
            for r in 0..cfg.n_r as i64 {
                let at = r * frame_samples + rng.random_range(0..frame_samples);
                rx.add_scaled_at(at, pulse.samples(), cfg.e_tb.sqrt());
            }
            let y = correlate(&rx, &tpl, 0, 1)[0];
            sum += y;
            sum_sq += y * y;
        }
        let mean = sum / trials as f64;
        let var = sum_sq / trials as f64 - mean * mean;
        assert_relative_eq!(var, predicted, max_relative = 0.10);
    }

    #[test]
    fn collision_gain_variance_matches_reference_value() {
        let (cfg, pulse, _) = setup();
        // Frozen from an independent numerical evaluation of the two-sided
        // autocorrelation lag-energy sum divided by fs * t_f.
        assert_relative_eq!(
            collision_gain_var(&pulse, cfg.t_f),
            2.86085e-3,
            max_relative = 1e-3
        );
    }

    #[test]
    fn threshold_scales_linearly_with_deviation() {
        let g1 = cfar_threshold(1e-3, 1.0).unwrap();
        assert_relative_eq!(g1, 3.090232306, max_relative = 1e-6);
        let g2 = cfar_threshold(1e-3, 2.0).unwrap();
        assert_relative_eq!(g2, 2.0 * g1, max_relative = 1e-12);
        assert!(cfar_threshold(0.0, 1.0).is_err());
    }

    #[test]
    fn parabolic_refinement_recovers_vertex() {
        // Parabola y = 1 - (x - 0.3)^2 sampled at x = -1, 0, 1.
        let f = |x: f64| 1.0 - (x - 0.3) * (x - 0.3);
        let d = refine_peak_offset(f(-1.0), f(0.0), f(1.0));
        assert_abs_diff_eq!(d, 0.3, epsilon = 1e-12);
        // Monotone triple clamps to half a sample.
        assert_abs_diff_eq!(refine_peak_offset(1.0, 2.0, 2.9), 0.5, epsilon = 1e-12);
        // Collinear triple degenerates to zero.
        assert_abs_diff_eq!(refine_peak_offset(1.0, 2.0, 3.0), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn local_maxima_finds_interior_and_edge_peaks() {
        let y = [5.0, 1.0, 2.0, 7.0, 2.0, 3.0, 3.0, 1.0, 0.5];
        let peaks = local_maxima(&y, 1.5);
        let indices: Vec<usize> = peaks.iter().map(|p| p.index).collect();
        assert_eq!(indices, vec![0, 3, 5]);
        // Floor suppresses small peaks.
        let peaks_hi = local_maxima(&y, 6.0);
        assert_eq!(peaks_hi.len(), 1);
        assert_eq!(peaks_hi[0].index, 3);
        assert!(local_maxima(&[], 0.0).is_empty());
    }
}
