//! Experiment drivers: reproducible Monte-Carlo studies over the
//! waveform → detection → demodulation → synchronization → positioning
//! pipeline.
//!
//! Every driver derives its random streams from `(master seed, structural
//! path)` so results are byte-identical across runs and independent of
//! thread scheduling; trials parallelize over rayon with ordered collection.

use std::path::{Path, PathBuf};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::channel::{add_awgn, noise_sigma, ChannelProfile};
use crate::clocksync::{compensate_drift, drift_ls, drift_mwls};
use crate::confidence::IntervalModel;
use crate::detection::{
    cfar_threshold, correlate, detection_probability, mf_noise_sigma, SlotTemplate,
};
use crate::error::{Error, Result};
use crate::localization::{range_solve, select_anchors_by_confidence, tdoa_solve};
use crate::sfd::{sweep_energy_split, synth_packet};
use crate::signal::SampledSignal;
use crate::stats::{proportion_stderr, Accumulator};
use crate::waveform::{FrameConfig, Pulse};
use crate::SPEED_OF_LIGHT;

use super::config::ScenarioConfig;
use super::results::{write_results, write_trajectory, ResultRow, TrajectoryPoint};
use super::seeding::{rng_for, tag};
use super::sim::{
    anchor_codes, detection_draw, distance, random_payload, scenario_links, DemodSettings,
    LinkSetup, NetworkSim, ReceiverDesign,
};

/// Stored chips per time-hopping code; covers the longest packet used by
/// any study (208 symbols at up to 6 pulses each) without wrapping.
const CODE_CHIPS: usize = 2048;

/// Links whose fitted clock rate leaves the crystal-tolerance range are
/// dropped from positioning for that epoch.
const DRIFT_PLAUSIBLE: f64 = 1e-3;

/// Ranges outside this span (meters) are treated as gross failures and
/// dropped from positioning for that epoch.
const RANGE_PLAUSIBLE_M: f64 = 20.0;

// ---------------------------------------------------------------------------
// Runner
// ---------------------------------------------------------------------------

/// Runs the simulation studies described by a scenario.
#[derive(Debug, Clone)]
pub struct Runner {
    pub scenario: ScenarioConfig,
    /// Master seed; every random stream derives from it.
    pub seed: u64,
    /// Monte-Carlo trials per sweep cell (the tracking study uses its own
    /// trial count from the scenario).
    pub trials: u64,
}

impl Runner {
    /// A runner using the scenario's own seed and trial count.
    pub fn new(scenario: ScenarioConfig) -> Result<Self> {
        scenario.validate()?;
        let seed = scenario.run.seed;
        let trials = scenario.run.trials;
        Ok(Runner {
            scenario,
            seed,
            trials,
        })
    }

    /// Overrides the master seed.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Overrides the per-cell trial count (must be at least 1).
    pub fn with_trials(mut self, trials: u64) -> Result<Self> {
        if trials == 0 {
            return Err(Error::InvalidArgument(
                "trial count must be at least 1".into(),
            ));
        }
        self.trials = trials;
        Ok(self)
    }

    fn pulse_for(&self, cfg: &FrameConfig) -> Result<Pulse> {
        Pulse::gauss2(cfg.t_b, self.scenario.radio.fs)
    }

    /// A four-anchor scene over the scenario geometry with the given frame
    /// layout.
    fn network(&self, cfg: FrameConfig) -> Result<NetworkSim> {
        let pulse = self.pulse_for(&cfg)?;
        let codes = anchor_codes(&cfg, self.scenario.geometry.anchors.len(), CODE_CHIPS)?;
        let links = scenario_links(&self.scenario);
        Ok(NetworkSim {
            cfg,
            pulse,
            codes,
            links,
        })
    }

    /// Receiver constants and demodulation settings for a scene at the
    /// given raw noise level. The threshold budgets for the concurrent
    /// anchors; the spacing model uses the effective per-symbol energy
    /// ratio implied by `sigma_z`.
    fn demod_settings(
        &self,
        sim: &NetworkSim,
        sigma_z: f64,
        c_thres: f64,
    ) -> Result<(ReceiverDesign, DemodSettings)> {
        let others = vec![(1.0, sim.cfg.e_tb); sim.n_links().saturating_sub(1)];
        let design = ReceiverDesign::new(
            &sim.cfg,
            &sim.codes[0],
            &sim.pulse,
            self.scenario.radio.p_fa,
            sigma_z,
            &others,
        )?;
        let n0 = 2.0 * sigma_z * sigma_z / sim.pulse.fs();
        let eff_db = 10.0 * (sim.cfg.e_b() / n0).log10();
        let horizon = self.scenario.demod.resync_horizon;
        let model =
            IntervalModel::from_snr(&sim.cfg, sim.pulse.rms_bandwidth(), eff_db, horizon)?;
        Ok((
            design,
            DemodSettings {
                model,
                gamma: design.gamma,
                c_thres,
                horizon,
            },
        ))
    }

    // -----------------------------------------------------------------------
    // Detection characteristic
    // -----------------------------------------------------------------------

    /// Receiver operating characteristic of the per-slot energy test.
    ///
    /// The energy grid is normalized per pulse (noise is set against the
    /// single-pulse energy), so curves at different repetition counts show
    /// the combining gain rather than collapsing onto one curve. Analytic
    /// rows carry the Gaussian model; measured rows share one set of
    /// waveform draws across the whole false-alarm grid.
    pub fn run_roc(&self) -> Result<Vec<ResultRow>> {
        let base = self.scenario.frame_config();
        let grid = &self.scenario.sweep.p_fa_grid;
        let mut rows = Vec::new();
        for &x in &self.scenario.sweep.ebn0_db {
            for &nr in &self.scenario.sweep.n_r {
                let mut cfg = base.clone();
                cfg.n_r = nr;
                cfg.validate()?;
                let pulse = self.pulse_for(&cfg)?;
                let code = anchor_codes(&cfg, 1, CODE_CHIPS)?.remove(0);
                let tpl = SlotTemplate::new(&cfg, &code, &pulse, 0);
                let sigma_z = noise_sigma(cfg.e_tb, x, pulse.fs());
                let sigma_mf = mf_noise_sigma(sigma_z, pulse.fs(), tpl.energy());
                let mean = tpl.energy();
                let sweep = |p_fa: f64| {
                    [
                        ("ebn0_pulse_db", x),
                        ("n_r", f64::from(nr)),
                        ("p_fa", p_fa),
                    ]
                };
                for &p_fa in grid {
                    let pd = detection_probability(p_fa, mean, sigma_mf)?;
                    rows.push(ResultRow::analytic("roc", &sweep(p_fa), "pd_analytic", pd));
                }
                let draws: Vec<(f64, f64)> = (0..self.trials)
                    .into_par_iter()
                    .map(|t| {
                        let mut rng =
                            rng_for(self.seed, &[tag("roc"), x.to_bits(), u64::from(nr), t]);
                        detection_draw(&cfg, &code, &tpl, &pulse, sigma_z, &[], &mut rng)
                    })
                    .collect();
                for &p_fa in grid {
                    let gamma = cfar_threshold(p_fa, sigma_mf)?;
                    let hits = draws.iter().filter(|d| d.0 >= gamma).count();
                    let false_alarms = draws.iter().filter(|d| d.1 >= gamma).count();
                    let n = draws.len() as u64;
                    let pd_hat = hits as f64 / n as f64;
                    let fa_hat = false_alarms as f64 / n as f64;
                    rows.push(ResultRow::measured(
                        "roc",
                        &sweep(p_fa),
                        "pd",
                        pd_hat,
                        proportion_stderr(pd_hat, n),
                        n,
                    ));
                    rows.push(ResultRow::measured(
                        "roc",
                        &sweep(p_fa),
                        "pfa_hat",
                        fa_hat,
                        proportion_stderr(fa_hat, n),
                        n,
                    ));
                }
            }
        }
        Ok(rows)
    }

    // -----------------------------------------------------------------------
    // Delimiter energy split
    // -----------------------------------------------------------------------

    /// Packet-acceptance probability against the share of delimiter energy
    /// concentrated in its first (timing) symbol.
    ///
    /// Analytic rows use the closed-form acceptance model; measured rows
    /// gate rendered waveforms at the true symbol positions. Since the
    /// filter is linear, each trial draws one noise packet and reuses its
    /// gate outputs across the whole split grid (common random numbers);
    /// the noiseless gate means come from actually rendered packets.
    pub fn run_sfd_split(&self) -> Result<Vec<ResultRow>> {
        let base = self.scenario.frame_config();
        let pulse = self.pulse_for(&base)?;
        let code = anchor_codes(&base, 1, CODE_CHIPS)?.remove(0);
        let fractions = &self.scenario.sweep.sfd_fractions;
        let x = self.scenario.sfd.ebn0_db;
        let p_fa = self.scenario.radio.p_fa;
        let fs = pulse.fs();
        let sigma_z = noise_sigma(base.e_b(), x, fs);
        let tpl0 = SlotTemplate::new(&base, &code, &pulse, 0);
        let sigma_mf = mf_noise_sigma(sigma_z, fs, tpl0.energy());
        let gamma = cfar_threshold(p_fa, sigma_mf)?;

        let mut rows = Vec::new();
        for (f, p) in sweep_energy_split(&base, p_fa, sigma_mf, fractions)? {
            rows.push(ResultRow::analytic(
                "sfd_split",
                &[("ebn0_db", x), ("alpha1", f)],
                "p_accept_analytic",
                p,
            ));
        }

        // Per-slot templates and, per split, the noiseless gate means.
        let n_sfd = base.n_sfd as usize;
        let slot = base.slot();
        let window = (slot * fs * n_sfd as f64).round() as usize + pulse.len();
        let templates: Vec<SlotTemplate> = (0..n_sfd)
            .map(|k| SlotTemplate::new(&base, &code, &pulse, k as u64))
            .collect();
        let gate_at = |k: usize| (k as f64 * slot * fs).round() as i64;
        let mut means = Vec::with_capacity(fractions.len());
        for &f in fractions {
            let mut cfg = base.clone();
            cfg.first_symbol_fraction = f;
            cfg.validate()?;
            let clean = synth_packet(&cfg, &code, &[]).render(&pulse, 0.0, window);
            let m: Vec<f64> = (0..n_sfd)
                .map(|k| correlate(&clean, &templates[k], gate_at(k), 1)[0])
                .collect();
            means.push(m);
        }

        let n_suc = base.n_suc() as usize;
        let accepts: Vec<Vec<u64>> = (0..self.trials)
            .into_par_iter()
            .map(|t| {
                let mut rng = rng_for(self.seed, &[tag("sfd_split"), t]);
                let mut rx = SampledSignal::zeros(fs, 0.0, window)
                    .expect("sampling rate validated at construction");
                add_awgn(&mut rx, sigma_z, &mut rng);
                let noise: Vec<f64> = (0..n_sfd)
                    .map(|k| correlate(&rx, &templates[k], gate_at(k), 1)[0])
                    .collect();
                means
                    .iter()
                    .map(|m| {
                        let first = m[0] + noise[0] >= gamma;
                        let trailing = (1..n_sfd)
                            .filter(|&k| m[k] + noise[k] >= gamma)
                            .count();
                        u64::from(first && trailing >= n_suc)
                    })
                    .collect()
            })
            .collect();
        for (fi, &f) in fractions.iter().enumerate() {
            let hits: u64 = accepts.iter().map(|a| a[fi]).sum();
            let p = hits as f64 / self.trials as f64;
            rows.push(ResultRow::measured(
                "sfd_split",
                &[("ebn0_db", x), ("alpha1", f)],
                "p_accept",
                p,
                proportion_stderr(p, self.trials),
                self.trials,
            ));
        }
        Ok(rows)
    }

    // -----------------------------------------------------------------------
    // Clock-drift estimation
    // -----------------------------------------------------------------------

    /// Drift-estimation error against the confidence threshold, comparing
    /// the plain and the confidence-weighted least-squares estimators.
    ///
    /// All four anchors transmit concurrently; each trial renders one
    /// waveform per energy ratio and re-demodulates it at every threshold,
    /// so the comparison across thresholds and between estimators is
    /// paired. Links whose packet is lost or yields too short a series are
    /// excluded and reported separately.
    pub fn run_drift(&self) -> Result<Vec<ResultRow>> {
        let cfg = self.scenario.frame_config();
        let payload_len = self.scenario.drift.symbols as usize;
        let grid = &self.scenario.drift.c_thres;
        // A genuine acquisition demodulates nearly the whole payload; a
        // false sync lock yields a short, sparse series whose tiny index
        // span turns sub-ns timing noise into wild slopes.
        let min_series = (payload_len / 2).max(8);
        let sim = self.network(cfg)?;
        let slot = sim.cfg.slot();
        let mut rows = Vec::new();
        for &x in &self.scenario.drift.ebn0_db {
            let sigma_z = noise_sigma(sim.cfg.e_b(), x, sim.pulse.fs());
            let (_, proto) = self.demod_settings(&sim, sigma_z, grid[0])?;
            type Cell = Option<(f64, f64)>;
            let trials: Vec<Vec<Vec<Cell>>> = (0..self.trials)
                .into_par_iter()
                .map(|t| -> Result<Vec<Vec<Cell>>> {
                    let mut rng = rng_for(self.seed, &[tag("drift"), x.to_bits(), t]);
                    let scene = render_scene(&sim, sigma_z, payload_len, &mut rng)?;
                    // Acquisition ignores the confidence threshold, so each
                    // link is acquired once; the per-threshold passes then
                    // share the window correlations.
                    let mut per_c = vec![Vec::with_capacity(sim.n_links()); grid.len()];
                    for m in 0..sim.n_links() {
                        let Some(t_ref) = sim.acquire(&scene.rx, m, &proto, scene.search)
                        else {
                            for links in &mut per_c {
                                links.push(None);
                            }
                            continue;
                        };
                        let sweep = sim.observe_sweep(
                            &scene.rx,
                            m,
                            &proto,
                            grid,
                            t_ref,
                            &scene.payloads[m],
                        )?;
                        let truth_ppm = sim.links[m].drift * 1e6;
                        for (links, (obs, &c)) in
                            per_c.iter_mut().zip(sweep.iter().zip(grid.iter()))
                        {
                            let cell = if obs.series.len() >= min_series {
                                let ls = drift_ls(&obs.series, slot).ok();
                                let mw =
                                    drift_mwls(&obs.series, &obs.confidences, c, slot).ok();
                                match (ls, mw) {
                                    (Some(l), Some(w)) => Some((
                                        l.drift * 1e6 - truth_ppm,
                                        w.drift * 1e6 - truth_ppm,
                                    )),
                                    _ => None,
                                }
                            } else {
                                None
                            };
                            links.push(cell);
                        }
                    }
                    Ok(per_c)
                })
                .collect::<Result<_>>()?;
            for (ci, &c) in grid.iter().enumerate() {
                let mut ls_sq = Accumulator::new();
                let mut mw_sq = Accumulator::new();
                let mut skipped = 0u64;
                let mut total = 0u64;
                for t in &trials {
                    for cell in &t[ci] {
                        total += 1;
                        match cell {
                            Some((el, ew)) => {
                                ls_sq.push(el * el);
                                mw_sq.push(ew * ew);
                            }
                            None => skipped += 1,
                        }
                    }
                }
                let sweep = [("ebn0_db", x), ("c_thres", c)];
                let (ls_rmse, ls_se) = rmse_from_squares(&ls_sq);
                let (mw_rmse, mw_se) = rmse_from_squares(&mw_sq);
                rows.push(ResultRow::measured(
                    "drift",
                    &sweep,
                    "rmse_ls_ppm",
                    ls_rmse,
                    ls_se,
                    ls_sq.count() as u64,
                ));
                rows.push(ResultRow::measured(
                    "drift",
                    &sweep,
                    "rmse_mwls_ppm",
                    mw_rmse,
                    mw_se,
                    mw_sq.count() as u64,
                ));
                let share = skipped as f64 / total as f64;
                rows.push(ResultRow::measured(
                    "drift",
                    &sweep,
                    "skipped_share",
                    share,
                    proportion_stderr(share, total),
                    total,
                ));
            }
        }
        Ok(rows)
    }

    // -----------------------------------------------------------------------
    // Bit-error rate
    // -----------------------------------------------------------------------

    /// Payload bit-error rate against the confidence threshold.
    ///
    /// Four concurrent anchors; errors pool over all acquired links. Frames
    /// whose delimiter is never acquired contribute no bits and are
    /// reported as a miss rate instead — counting them as all-errors would
    /// floor the curve at the acquisition miss rate and hide the
    /// demodulation behavior the threshold sweep is about.
    pub fn run_ber(&self) -> Result<Vec<ResultRow>> {
        let cfg = self.scenario.frame_config();
        let payload_len = (cfg.n_f - cfg.n_sfd) as usize;
        let grid = &self.scenario.sweep.c_thres;
        let sim = self.network(cfg)?;
        let mut rows = Vec::new();
        for &x in &self.scenario.ber.ebn0_db {
            let sigma_z = noise_sigma(sim.cfg.e_b(), x, sim.pulse.fs());
            let (_, proto) = self.demod_settings(&sim, sigma_z, grid[0])?;
            // Per trial and threshold: payload errors/bits, misses, abandons.
            type Cell = (u64, u64, u64, u64);
            let trials: Vec<Vec<Cell>> = (0..self.trials)
                .into_par_iter()
                .map(|t| -> Result<Vec<Cell>> {
                    let mut rng = rng_for(self.seed, &[tag("ber"), x.to_bits(), t]);
                    let scene = render_scene(&sim, sigma_z, payload_len, &mut rng)?;
                    let mut per_c = vec![(0u64, 0u64, 0u64, 0u64); grid.len()];
                    for m in 0..sim.n_links() {
                        let Some(t_ref) = sim.acquire(&scene.rx, m, &proto, scene.search)
                        else {
                            for cell in &mut per_c {
                                cell.2 += 1;
                            }
                            continue;
                        };
                        let sweep = sim.observe_sweep(
                            &scene.rx,
                            m,
                            &proto,
                            grid,
                            t_ref,
                            &scene.payloads[m],
                        )?;
                        for (cell, obs) in per_c.iter_mut().zip(&sweep) {
                            cell.0 += obs.bit_errors;
                            cell.1 += obs.bits;
                            cell.3 += u64::from(obs.abandoned);
                        }
                    }
                    Ok(per_c)
                })
                .collect::<Result<_>>()?;
            let frames_per_trial = sim.n_links() as u64;
            for (ci, &c) in grid.iter().enumerate() {
                let cells: Vec<Cell> = trials.iter().map(|t| t[ci]).collect();
                let errors: u64 = cells.iter().map(|c| c.0).sum();
                let bits: u64 = cells.iter().map(|c| c.1).sum();
                let misses: u64 = cells.iter().map(|c| c.2).sum();
                let abandons: u64 = cells.iter().map(|c| c.3).sum();
                let frames = frames_per_trial * self.trials;
                let ber = if bits == 0 {
                    f64::NAN
                } else {
                    errors as f64 / bits as f64
                };
                // Cluster (per-trial) ratio-estimator error: bits within a
                // frame are correlated through the shared reference chain.
                let se = if bits == 0 {
                    0.0
                } else {
                    let num: f64 = cells
                        .iter()
                        .map(|c| {
                            let d = c.0 as f64 - ber * c.1 as f64;
                            d * d
                        })
                        .sum();
                    num.sqrt() / bits as f64
                };
                let sweep = [("ebn0_db", x), ("c_thres", c)];
                rows.push(ResultRow::measured("ber", &sweep, "ber", ber, se, bits));
                let miss = misses as f64 / frames as f64;
                rows.push(ResultRow::measured(
                    "ber",
                    &sweep,
                    "sfd_miss_rate",
                    miss,
                    proportion_stderr(miss, frames),
                    frames,
                ));
                let ab = abandons as f64 / frames as f64;
                rows.push(ResultRow::measured(
                    "ber",
                    &sweep,
                    "abandon_rate",
                    ab,
                    proportion_stderr(ab, frames),
                    frames,
                ));
            }
        }
        Ok(rows)
    }

    // -----------------------------------------------------------------------
    // Static positioning accuracy
    // -----------------------------------------------------------------------

    /// Position RMSE of the static agent from one packet burst per trial.
    ///
    /// Covers two cuts through the same pipeline: accuracy against the
    /// energy ratio at the reference threshold, and accuracy against the
    /// threshold at a fixed high ratio. Each trial demodulates all four
    /// links, removes each link's fitted clock ramp, averages the
    /// compensated pseudo-delays, and solves the time-difference system.
    pub fn run_rmse(&self) -> Result<Vec<ResultRow>> {
        let cfg = self.scenario.frame_config();
        let payload_len = (cfg.n_f - cfg.n_sfd) as usize;
        // Reject false sync locks: their short series average over too few
        // symbols and sit at the wrong grid position entirely.
        let min_series = (payload_len / 2).max(8);
        let sim = self.network(cfg)?;
        let slot = sim.cfg.slot();
        let anchors = &self.scenario.geometry.anchors;
        let agent = &self.scenario.geometry.agent;

        let mut cells: Vec<(f64, f64)> = Vec::new();
        for &x in &self.scenario.rmse.ebn0_db {
            cells.push((x, self.scenario.demod.c_thres));
        }
        for &c in &self.scenario.sweep.c_thres {
            let cell = (self.scenario.rmse.cthres_ebn0_db, c);
            if !cells
                .iter()
                .any(|e| e.0.to_bits() == cell.0.to_bits() && e.1.to_bits() == cell.1.to_bits())
            {
                cells.push(cell);
            }
        }

        let mut rows = Vec::new();
        for (x, c) in cells {
            let sigma_z = noise_sigma(sim.cfg.e_b(), x, sim.pulse.fs());
            let (_, settings) = self.demod_settings(&sim, sigma_z, c)?;
            let outcomes: Vec<Option<f64>> = (0..self.trials)
                .into_par_iter()
                .map(|t| -> Result<Option<f64>> {
                    let mut rng =
                        rng_for(self.seed, &[tag("rmse"), x.to_bits(), c.to_bits(), t]);
                    let scene = render_scene(&sim, sigma_z, payload_len, &mut rng)?;
                    let mut betas = Vec::with_capacity(sim.n_links());
                    for m in 0..sim.n_links() {
                        let obs = sim.observe(
                            &scene.rx,
                            m,
                            &settings,
                            scene.search,
                            &scene.payloads[m],
                        )?;
                        if obs.series.len() < min_series {
                            return Ok(None);
                        }
                        let Ok(est) = drift_mwls(&obs.series, &obs.confidences, c, slot)
                        else {
                            return Ok(None);
                        };
                        let comp = compensate_drift(&obs.series, est.drift, slot);
                        let mean =
                            comp.iter().map(|p| p.beta).sum::<f64>() / comp.len() as f64;
                        betas.push(mean);
                    }
                    match tdoa_solve(&betas, anchors, None) {
                        Ok(fix) => Ok(Some(distance(&fix.position, agent))),
                        Err(_) => Ok(None),
                    }
                })
                .collect::<Result<_>>()?;
            let mut sq = Accumulator::new();
            let mut failures = 0u64;
            for o in &outcomes {
                match o {
                    Some(err) => sq.push(err * err),
                    None => failures += 1,
                }
            }
            let sweep = [("ebn0_db", x), ("c_thres", c)];
            let (rmse, se) = rmse_from_squares(&sq);
            rows.push(ResultRow::measured(
                "rmse",
                &sweep,
                "rmse_m",
                rmse,
                se,
                sq.count() as u64,
            ));
            let fail = failures as f64 / self.trials as f64;
            rows.push(ResultRow::measured(
                "rmse",
                &sweep,
                "fail_share",
                fail,
                proportion_stderr(fail, self.trials),
                self.trials,
            ));
        }
        Ok(rows)
    }

    // -----------------------------------------------------------------------
    // Repetition count versus transmit power
    // -----------------------------------------------------------------------

    /// Compares two ways of spending a 3 dB energy increase across the
    /// whole network: doubling every anchor's repetition count versus
    /// doubling every anchor's pulse energy.
    ///
    /// The noise level is fixed by the base layout's symbol energy, so both
    /// variants enjoy the same thermal gain; they differ only in how the
    /// concurrent transmissions collide. More repetitions spread each
    /// symbol over more, weaker pulses, which lowers the variance of the
    /// inter-anchor collision term; more power raises it.
    pub fn run_rep(&self) -> Result<Vec<ResultRow>> {
        let base = self.scenario.frame_config();
        let payload_len = (base.n_f - base.n_sfd) as usize;
        let min_series = (payload_len / 2).max(8);
        let c_thres = self.scenario.demod.c_thres;
        let variants: [(u32, f64); 3] = [
            (base.n_r, base.e_tb),
            (base.n_r * 2, base.e_tb),
            (base.n_r, base.e_tb * 2.0),
        ];
        let anchors = &self.scenario.geometry.anchors;
        let agent = &self.scenario.geometry.agent;
        let mut rows = Vec::new();
        for &x in &self.scenario.rep.ebn0_db {
            let n0 = base.e_b() * 10f64.powf(-x / 10.0);
            for (vi, &(nr, etb)) in variants.iter().enumerate() {
                let mut cfg = base.clone();
                cfg.n_r = nr;
                cfg.e_tb = etb;
                cfg.validate()?;
                let sim = self.network(cfg)?;
                let slot = sim.cfg.slot();
                let sigma_z = (n0 * sim.pulse.fs() / 2.0).sqrt();
                let (_, settings) = self.demod_settings(&sim, sigma_z, c_thres)?;
                struct Out {
                    errors: u64,
                    bits: u64,
                    misses: u64,
                    err_m: Option<f64>,
                }
                let outcomes: Vec<Out> = (0..self.trials)
                    .into_par_iter()
                    .map(|t| -> Result<Out> {
                        // The variant index is deliberately left out of the
                        // payload/offset stream so variants share trial
                        // geometry draws; noise differs by window length.
                        let mut rng = rng_for(
                            self.seed,
                            &[tag("rep"), x.to_bits(), t, vi as u64],
                        );
                        let mut geom_rng = rng_for(self.seed, &[tag("rep"), x.to_bits(), t]);
                        let slot_d = sim.cfg.slot();
                        let agent_offset = geom_rng.random_range(0.0..slot_d);
                        let payloads: Vec<Vec<u8>> = (0..sim.n_links())
                            .map(|_| random_payload(payload_len, &mut geom_rng))
                            .collect();
                        let n = sim.window_len(payload_len, 4.0);
                        let rx = sim.render(
                            &payloads,
                            agent_offset,
                            0.0,
                            0.0,
                            n,
                            sigma_z,
                            &mut rng,
                        )?;
                        let far = sim
                            .links
                            .iter()
                            .map(|l| l.sync_offset + l.delay)
                            .fold(0.0, f64::max);
                        let search = (0.0, 2.0 * slot_d + far.max(0.0));
                        let mut out = Out {
                            errors: 0,
                            bits: 0,
                            misses: 0,
                            err_m: None,
                        };
                        let mut betas = Vec::with_capacity(sim.n_links());
                        for m in 0..sim.n_links() {
                            let obs =
                                sim.observe(&rx, m, &settings, search, &payloads[m])?;
                            if !obs.acquired {
                                out.misses += 1;
                                continue;
                            }
                            out.errors += obs.bit_errors;
                            out.bits += obs.bits;
                            if obs.series.len() >= min_series {
                                if let Ok(est) =
                                    drift_mwls(&obs.series, &obs.confidences, c_thres, slot)
                                {
                                    let comp = compensate_drift(&obs.series, est.drift, slot);
                                    let mean = comp.iter().map(|p| p.beta).sum::<f64>()
                                        / comp.len() as f64;
                                    betas.push(mean);
                                }
                            }
                        }
                        if betas.len() == sim.n_links() {
                            if let Ok(fix) = tdoa_solve(&betas, anchors, None) {
                                out.err_m = Some(distance(&fix.position, agent));
                            }
                        }
                        Ok(out)
                    })
                    .collect::<Result<_>>()?;
                let errors: u64 = outcomes.iter().map(|o| o.errors).sum();
                let bits: u64 = outcomes.iter().map(|o| o.bits).sum();
                let misses: u64 = outcomes.iter().map(|o| o.misses).sum();
                let frames = self.trials * sim.n_links() as u64;
                let ber = if bits == 0 {
                    f64::NAN
                } else {
                    errors as f64 / bits as f64
                };
                let se = if bits == 0 {
                    0.0
                } else {
                    let num: f64 = outcomes
                        .iter()
                        .map(|o| {
                            let d = o.errors as f64 - ber * o.bits as f64;
                            d * d
                        })
                        .sum();
                    num.sqrt() / bits as f64
                };
                let mut sq = Accumulator::new();
                let mut fails = 0u64;
                for o in &outcomes {
                    match o.err_m {
                        Some(e) => sq.push(e * e),
                        None => fails += 1,
                    }
                }
                let sweep = [("ebn0_base_db", x), ("n_r", f64::from(nr)), ("e_tb", etb)];
                rows.push(ResultRow::measured("repetition", &sweep, "ber", ber, se, bits));
                let miss = misses as f64 / frames as f64;
                rows.push(ResultRow::measured(
                    "repetition",
                    &sweep,
                    "sfd_miss_rate",
                    miss,
                    proportion_stderr(miss, frames),
                    frames,
                ));
                let (rmse, rse) = rmse_from_squares(&sq);
                rows.push(ResultRow::measured(
                    "repetition",
                    &sweep,
                    "rmse_m",
                    rmse,
                    rse,
                    sq.count() as u64,
                ));
                let fail = fails as f64 / self.trials as f64;
                rows.push(ResultRow::measured(
                    "repetition",
                    &sweep,
                    "fail_share",
                    fail,
                    proportion_stderr(fail, self.trials),
                    self.trials,
                ));
            }
        }
        Ok(rows)
    }

    // -----------------------------------------------------------------------
    // Moving-agent tracking
    // -----------------------------------------------------------------------

    /// Tracks a moving agent through per-epoch packets with on-line clock
    /// calibration and confidence-based link selection.
    ///
    /// Each trial starts with static epochs at a known position that
    /// calibrate every link's clock offset and rate; the agent then moves
    /// and every epoch produces per-link ranges from the calibrated
    /// pseudo-delays. Two solvers run on the same observations: one keeps
    /// the links with the highest per-packet mean confidence, one uses all
    /// acquired links. In the second case one anchor is obstructed for most
    /// of the run, which delays and attenuates its path — packets that
    /// still make it through carry a range bias, and selection is what
    /// keeps them out of the fix.
    pub fn run_tracking(&self) -> Result<(Vec<ResultRow>, Vec<(String, Vec<TrajectoryPoint>)>)> {
        let t = &self.scenario.tracking;
        if t.anchors.len() > self.scenario.clocks.drifts_ppm.len() {
            return Err(Error::InvalidArgument(
                "tracking needs a clock entry for every planar anchor".into(),
            ));
        }
        let cfg = self.scenario.frame_config();
        let pulse = self.pulse_for(&cfg)?;
        let codes = anchor_codes(&cfg, t.anchors.len(), CODE_CHIPS)?;
        let sigma_z = noise_sigma(cfg.e_b(), t.ebn0_db, pulse.fs());
        let sim_proto = NetworkSim {
            cfg,
            pulse,
            codes,
            links: Vec::new(),
        };
        let (_, settings) = self.demod_settings(
            &NetworkSim {
                links: vec![
                    LinkSetup::line_of_sight(0.0, 0.0, 0.0);
                    t.anchors.len()
                ],
                ..sim_proto.clone()
            },
            sigma_z,
            self.scenario.demod.c_thres,
        )?;

        let cases: [(u32, &Vec<usize>); 2] = [(1, &t.case1), (2, &t.case2)];
        let mut rows = Vec::new();
        let mut tracks = Vec::new();
        for (case_id, members) in cases {
            let outs: Vec<[CaseVariantOut; 2]> = (0..t.trials)
                .into_par_iter()
                .map(|trial| {
                    self.tracking_trial(&sim_proto, &settings, sigma_z, case_id, members, trial)
                })
                .collect::<Result<_>>()?;
            for (v, selection) in [(0usize, 1.0f64), (1, 0.0)] {
                let sweep = [("case", f64::from(case_id)), ("selection", selection)];
                let attempted: u64 = outs.iter().map(|o| o[v].attempted).sum();
                let solved: u64 = outs.iter().map(|o| o[v].solved).sum();
                let mut sq = Accumulator::new();
                for o in &outs {
                    for &e in &o[v].errors {
                        sq.push(e * e);
                    }
                }
                for thr in [0.1, 0.2] {
                    // Unsolved epochs count as exceeding every error level.
                    let inside: u64 = outs
                        .iter()
                        .map(|o| o[v].errors.iter().filter(|&&e| e < thr).count() as u64)
                        .sum();
                    let p = if attempted == 0 {
                        f64::NAN
                    } else {
                        inside as f64 / attempted as f64
                    };
                    let mut shares = Accumulator::new();
                    for o in &outs {
                        if o[v].attempted > 0 {
                            shares.push(
                                o[v].errors.iter().filter(|&&e| e < thr).count() as f64
                                    / o[v].attempted as f64,
                            );
                        }
                    }
                    rows.push(ResultRow::measured(
                        "tracking",
                        &sweep,
                        if thr == 0.1 {
                            "p_err_lt_0.1m"
                        } else {
                            "p_err_lt_0.2m"
                        },
                        p,
                        shares.stderr(),
                        attempted,
                    ));
                }
                let (rmse, se) = rmse_from_squares(&sq);
                rows.push(ResultRow::measured(
                    "tracking",
                    &sweep,
                    "rmse_m",
                    rmse,
                    se,
                    sq.count() as u64,
                ));
                let solved_share = if attempted == 0 {
                    f64::NAN
                } else {
                    solved as f64 / attempted as f64
                };
                rows.push(ResultRow::measured(
                    "tracking",
                    &sweep,
                    "solved_share",
                    solved_share,
                    0.0,
                    attempted,
                ));
            }
            let first = &outs[0];
            match case_id {
                1 => tracks.push(("track_case1".to_string(), first[0].trajectory.clone())),
                _ => {
                    tracks.push((
                        "track_case2_selected".to_string(),
                        first[0].trajectory.clone(),
                    ));
                    tracks.push(("track_case2_all".to_string(), first[1].trajectory.clone()));
                }
            }
        }
        Ok((rows, tracks))
    }

    /// One tracking repetition: calibration epochs, then scored epochs with
    /// per-epoch acquisition, calibration refits, and two positioning
    /// variants (confidence selection vs. all acquired links).
    fn tracking_trial(
        &self,
        sim_proto: &NetworkSim,
        settings: &DemodSettings,
        sigma_z: f64,
        case_id: u32,
        members: &[usize],
        trial: u64,
    ) -> Result<[CaseVariantOut; 2]> {
        let t = &self.scenario.tracking;
        let drifts = self.scenario.drifts();
        let offsets = &self.scenario.clocks.offsets_s;
        let mut sim = sim_proto.clone();
        let slot = sim.cfg.slot();
        let payload_len = (sim.cfg.n_f - sim.cfg.n_sfd) as usize;
        let dt = t.epoch_dt;
        let cal = t.cal_epochs;
        let total = cal + t.epochs;
        let jitter = Normal::new(0.0, t.range_sigma_m / SPEED_OF_LIGHT)
            .expect("validated nonnegative jitter");

        let mut rng = rng_for(self.seed, &[tag("track"), u64::from(case_id), trial]);
        let agent_offset = rng.random_range(0.0..slot);

        let mut predictors: Vec<Predictor> = members.iter().map(|_| Predictor::new()).collect();
        let mut variants = [
            CaseVariant::new(members.len(), t.start.clone()),
            CaseVariant::new(members.len(), t.start.clone()),
        ];

        for e in 0..total {
            let te = f64::from(e) * dt;
            let scored = e >= cal;
            let s = e.saturating_sub(cal);
            let truth = if scored {
                vec![
                    t.start[0] + t.velocity[0] * dt * f64::from(s),
                    t.start[1] + t.velocity[1] * dt * f64::from(s),
                ]
            } else {
                t.start.clone()
            };

            // The whole network transmits each epoch; links reflect the
            // agent's current position and the obstruction schedule.
            sim.links = (0..t.anchors.len())
                .map(|i| {
                    let obstructed = case_id == 2
                        && i == t.obstructed_anchor
                        && scored
                        && s >= t.obstruction_window[0]
                        && s < t.obstruction_window[1];
                    LinkSetup {
                        drift: drifts[i],
                        sync_offset: offsets[i],
                        delay: distance(&t.anchors[i], &truth) / SPEED_OF_LIGHT,
                        profile: if obstructed {
                            ChannelProfile::obstructed(t.obstruction_excess_s, t.obstruction_gain)
                        } else {
                            ChannelProfile::line_of_sight()
                        },
                    }
                })
                .collect();
            let payloads: Vec<Vec<u8>> = (0..t.anchors.len())
                .map(|_| random_payload(payload_len, &mut rng))
                .collect();

            // Acquire each observed link inside its own predicted window.
            let mut measured: Vec<Option<EpochMeas>> = vec![None; members.len()];
            for (j, &m) in members.iter().enumerate() {
                let (t_pred, margin_slots) = predictors[j].predict(te, slot);
                let margin = margin_slots * slot;
                let t0 = t_pred - margin - slot;
                let n = sim.window_len(payload_len, 2.0 * margin_slots + 4.0);
                let rx = sim.render(&payloads, agent_offset, te, t0, n, sigma_z, &mut rng)?;
                let obs = sim.observe(
                    &rx,
                    m,
                    settings,
                    (t_pred - margin, t_pred + margin),
                    &payloads[m],
                )?;
                if obs.acquired && obs.series.len() >= 4 {
                    predictors[j].push(te, obs.t_ref.expect("acquired implies reference"));
                    let k_mean = obs.series.iter().map(|p| p.index as f64).sum::<f64>()
                        / obs.series.len() as f64;
                    let beta_mean = obs.series.iter().map(|p| p.beta).sum::<f64>()
                        / obs.series.len() as f64;
                    measured[j] = Some(EpochMeas {
                        x: te + slot * k_mean,
                        y: beta_mean - te + jitter.sample(&mut rng),
                        conf: obs.mean_confidence,
                    });
                }
            }

            if !scored {
                // Known static position: calibration rows with exact path
                // delays, for both variants.
                for variant in &mut variants {
                    for (j, &m) in members.iter().enumerate() {
                        if let Some(meas) = &measured[j] {
                            let tau = distance(&t.anchors[m], &t.start) / SPEED_OF_LIGHT;
                            variant.cal[j].push(meas.x, meas.y - tau, meas.conf);
                        }
                    }
                }
                continue;
            }

            for (v, variant) in variants.iter_mut().enumerate() {
                variant.out.attempted += 1;
                // Calibrated range per acquired link.
                let mut ranges = Vec::new();
                let mut confs = Vec::new();
                let mut who = Vec::new();
                for (j, &m) in members.iter().enumerate() {
                    let Some(meas) = &measured[j] else { continue };
                    let Some((a, b)) = variant.cal[j].fit() else {
                        continue;
                    };
                    if b.abs() > DRIFT_PLAUSIBLE {
                        continue;
                    }
                    let r = SPEED_OF_LIGHT * (meas.y - a - b * meas.x);
                    if !(0.0..=RANGE_PLAUSIBLE_M).contains(&r) {
                        continue;
                    }
                    ranges.push(r);
                    confs.push(meas.conf);
                    who.push((j, m));
                }
                let chosen: Vec<usize> = if v == 0 {
                    if ranges.len() < t.selected {
                        (0..ranges.len()).collect()
                    } else {
                        select_anchors_by_confidence(&confs, t.selected)?
                    }
                } else {
                    (0..ranges.len()).collect()
                };
                if chosen.len() < 2 {
                    continue;
                }
                let sub_r: Vec<f64> = chosen.iter().map(|&i| ranges[i]).collect();
                let sub_a: Vec<Vec<f64>> =
                    chosen.iter().map(|&i| t.anchors[who[i].1].clone()).collect();
                let Ok(fix) = range_solve(&sub_r, &sub_a, Some(&variant.prev_fix)) else {
                    continue;
                };
                let err = distance(&fix.position, &truth);
                variant.out.solved += 1;
                variant.out.errors.push(err);
                variant.out.trajectory.push(TrajectoryPoint {
                    epoch: u64::from(e),
                    true_x: truth[0],
                    true_y: truth[1],
                    est_x: fix.position[0],
                    est_y: fix.position[1],
                });
                variant.prev_fix = fix.position.clone();
                // Fold this epoch into the calibration using path delays
                // from the fresh fix, so the rate estimate keeps improving
                // while the agent moves.
                for &(j, m) in &who {
                    if let Some(meas) = &measured[j] {
                        let tau = distance(&t.anchors[m], &fix.position) / SPEED_OF_LIGHT;
                        variant.cal[j].push(meas.x, meas.y - tau, meas.conf);
                    }
                }
            }
        }
        Ok(variants.map(|v| v.out))
    }

    // -----------------------------------------------------------------------
    // Everything
    // -----------------------------------------------------------------------

    /// Runs every study and writes one CSV per experiment (plus trajectory
    /// files) into `out`. Returns the written paths.
    pub fn run_all(&self, out: &Path) -> Result<Vec<PathBuf>> {
        let mut written = Vec::new();
        let mut save = |name: &str, rows: &[ResultRow]| -> Result<()> {
            let path = out.join(name);
            write_results(&path, rows)?;
            written.push(path);
            Ok(())
        };
        save("roc.csv", &self.run_roc()?)?;
        save("sfd_split.csv", &self.run_sfd_split()?)?;
        save("drift.csv", &self.run_drift()?)?;
        save("ber.csv", &self.run_ber()?)?;
        save("rmse.csv", &self.run_rmse()?)?;
        save("repetition.csv", &self.run_rep()?)?;
        let (rows, tracks) = self.run_tracking()?;
        save("tracking.csv", &rows)?;
        for (name, points) in tracks {
            let path = out.join(format!("{name}.csv"));
            write_trajectory(&path, &points)?;
            written.push(path);
        }
        Ok(written)
    }
}

// ---------------------------------------------------------------------------
// Shared trial helpers
// ---------------------------------------------------------------------------

struct TrialScene {
    rx: SampledSignal,
    payloads: Vec<Vec<u8>>,
    search: (f64, f64),
}

/// Renders one static-agent packet burst: random common clock offset in
/// `[0, slot)`, random payloads, all anchors concurrent, noise added.
fn render_scene(
    sim: &NetworkSim,
    sigma_z: f64,
    payload_len: usize,
    rng: &mut ChaCha8Rng,
) -> Result<TrialScene> {
    let slot = sim.cfg.slot();
    let agent_offset = rng.random_range(0.0..slot);
    let payloads: Vec<Vec<u8>> = (0..sim.n_links())
        .map(|_| random_payload(payload_len, rng))
        .collect();
    let n = sim.window_len(payload_len, 4.0);
    let rx = sim.render(&payloads, agent_offset, 0.0, 0.0, n, sigma_z, rng)?;
    let far = sim
        .links
        .iter()
        .map(|l| l.sync_offset + l.delay)
        .fold(0.0, f64::max);
    Ok(TrialScene {
        rx,
        payloads,
        search: (0.0, 2.0 * slot + far.max(0.0)),
    })
}

/// RMSE and its standard error from an accumulator of squared errors
/// (delta method).
fn rmse_from_squares(sq: &Accumulator) -> (f64, f64) {
    if sq.count() == 0 {
        return (f64::NAN, 0.0);
    }
    let rmse = sq.mean().sqrt();
    let se = if rmse > 0.0 {
        sq.stderr() / (2.0 * rmse)
    } else {
        0.0
    };
    (rmse, se)
}

/// One acquired epoch for a tracked link, reduced to the regression inputs.
#[derive(Clone)]
struct EpochMeas {
    /// Anchor-clock abscissa: transmit time plus the mean symbol position.
    x: f64,
    /// Packet mean pseudo-delay relative to the epoch transmit time (with
    /// the injected range jitter).
    y: f64,
    /// Mean per-symbol combined confidence of the packet.
    conf: f64,
}

/// Per-link clock calibration: confidence-weighted line through
/// `(x, pseudo-delay − path delay)`, giving the link's offset (intercept)
/// and rate error (slope).
struct LinkCal {
    x: Vec<f64>,
    y: Vec<f64>,
    w: Vec<f64>,
}

impl LinkCal {
    fn new() -> Self {
        LinkCal {
            x: Vec::new(),
            y: Vec::new(),
            w: Vec::new(),
        }
    }

    fn push(&mut self, x: f64, y: f64, w: f64) {
        self.x.push(x);
        self.y.push(y);
        self.w.push(w.max(0.0));
    }

    fn fit(&self) -> Option<(f64, f64)> {
        weighted_line(&self.x, &self.y, &self.w)
    }
}

/// Weighted least-squares line `y = a + b x`; `None` when the points
/// cannot pin down a slope.
fn weighted_line(x: &[f64], y: &[f64], w: &[f64]) -> Option<(f64, f64)> {
    let sw: f64 = w.iter().sum();
    if sw <= 0.0 || x.len() < 2 {
        return None;
    }
    let xm = x.iter().zip(w).map(|(x, w)| x * w).sum::<f64>() / sw;
    let ym = y.iter().zip(w).map(|(y, w)| y * w).sum::<f64>() / sw;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for ((x, y), w) in x.iter().zip(y).zip(w) {
        sxx += w * (x - xm) * (x - xm);
        sxy += w * (x - xm) * (y - ym);
    }
    if sxx <= f64::EPSILON * sw {
        return None;
    }
    let b = sxy / sxx;
    Some((ym - b * xm, b))
}

/// Packet-start predictor for one link: line through previous epochs'
/// `(transmit time, acquired reference)` pairs.
struct Predictor {
    t: Vec<f64>,
    y: Vec<f64>,
}

impl Predictor {
    fn new() -> Self {
        Predictor {
            t: Vec::new(),
            y: Vec::new(),
        }
    }

    fn push(&mut self, t: f64, y: f64) {
        self.t.push(t);
        self.y.push(y);
    }

    /// Predicted packet start and search half-width in slots. Before the
    /// clock rate is observable the window stays wide enough to absorb the
    /// worst-case rate error over one epoch.
    fn predict(&self, te: f64, slot: f64) -> (f64, f64) {
        match self.t.len() {
            0 => (te + slot, 1.01),
            1 => (self.y[0] + (te - self.t[0]), 8.0),
            _ => {
                let w = vec![1.0; self.t.len()];
                match weighted_line(&self.t, &self.y, &w) {
                    Some((a, b)) => (a + b * te, 1.0),
                    None => (self.y[self.y.len() - 1] + (te - self.t[self.t.len() - 1]), 8.0),
                }
            }
        }
    }
}

/// Scored-epoch outcomes of one tracking variant within one trial.
#[derive(Debug, Clone)]
struct CaseVariantOut {
    attempted: u64,
    solved: u64,
    errors: Vec<f64>,
    trajectory: Vec<TrajectoryPoint>,
}

struct CaseVariant {
    cal: Vec<LinkCal>,
    prev_fix: Vec<f64>,
    out: CaseVariantOut,
}

impl CaseVariant {
    fn new(n_links: usize, start: Vec<f64>) -> Self {
        CaseVariant {
            cal: (0..n_links).map(|_| LinkCal::new()).collect(),
            prev_fix: start,
            out: CaseVariantOut {
                attempted: 0,
                solved: 0,
                errors: Vec::new(),
                trajectory: Vec::new(),
            },
        }
    }
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::results::render_results;

    fn tiny_runner() -> Runner {
        let scenario = ScenarioConfig::default();
        Runner::new(scenario).unwrap().with_trials(32).unwrap()
    }

    #[test]
    fn roc_rows_are_reproducible_and_ordered() {
        let mut r = tiny_runner();
        r.scenario.sweep.ebn0_db = vec![9.0];
        r.scenario.sweep.n_r = vec![1, 3];
        r.scenario.sweep.p_fa_grid = vec![1e-3, 1e-1];
        let a = render_results(&r.run_roc().unwrap()).unwrap();
        let b = render_results(&r.run_roc().unwrap()).unwrap();
        assert_eq!(a, b, "same seed must reproduce byte-identical rows");
        let c = render_results(&r.clone().with_seed(99).run_roc().unwrap()).unwrap();
        assert_ne!(a, c, "different seed must change measured rows");
        // More repetitions at the same per-pulse energy must detect better.
        let rows = r.run_roc().unwrap();
        let pd = |nr: f64| {
            rows.iter()
                .find(|row| {
                    row.metric == "pd"
                        && row.sweep[1].1 == nr
                        && row.sweep[2].1 == 1e-3
                })
                .unwrap()
                .value
        };
        assert!(pd(3.0) > pd(1.0));
    }

    #[test]
    fn sfd_split_monte_carlo_tracks_the_analytic_curve() {
        let mut r = tiny_runner();
        r = r.with_trials(300).unwrap();
        r.scenario.sweep.sfd_fractions = vec![0.065, 0.125, 0.205, 0.305, 0.405];
        let rows = r.run_sfd_split().unwrap();
        for f in [0.065, 0.125, 0.205, 0.305, 0.405] {
            let get = |metric: &str| {
                rows.iter()
                    .find(|row| row.metric == metric && row.sweep[1].1 == f)
                    .unwrap()
                    .value
            };
            let (ana, mc) = (get("p_accept_analytic"), get("p_accept"));
            assert!(
                (ana - mc).abs() < 0.12,
                "split {f}: analytic {ana} vs measured {mc}"
            );
        }
    }

    #[test]
    fn drift_rows_report_both_estimators() {
        let mut r = tiny_runner();
        r = r.with_trials(6).unwrap();
        r.scenario.drift.ebn0_db = vec![16.0];
        r.scenario.drift.symbols = 64;
        r.scenario.sweep.c_thres = vec![0.92];
        let rows = r.run_drift().unwrap();
        let get = |metric: &str| rows.iter().find(|row| row.metric == metric).unwrap();
        // Short 64-symbol spans leave the consecutive-difference estimator
        // with parts-per-million noise; this is a shape check, not an
        // accuracy claim (the full-scale study uses much longer series).
        let ls = get("rmse_ls_ppm");
        let mw = get("rmse_mwls_ppm");
        assert!(ls.value.is_finite() && ls.value < 4.0, "ls rmse {}", ls.value);
        assert!(mw.value.is_finite() && mw.value < 4.0, "mwls rmse {}", mw.value);
        assert!(get("skipped_share").value < 0.5);
    }

    #[test]
    fn tracking_smoke_solves_epochs() {
        let mut r = tiny_runner();
        r.scenario.frame.n_f = 24; // short packets keep the smoke test fast
        r.scenario.tracking.trials = 1;
        r.scenario.tracking.cal_epochs = 6;
        r.scenario.tracking.epochs = 8;
        r.scenario.tracking.obstruction_window = vec![2, 6];
        r.scenario.validate().unwrap();
        let (rows, tracks) = r.run_tracking().unwrap();
        // Four variants (two cases × selection on/off), four metrics each.
        assert_eq!(rows.len(), 4 * 4);
        for sel in [1.0, 0.0] {
            let solved = rows
                .iter()
                .find(|row| {
                    row.metric == "solved_share"
                        && row.sweep[0].1 == 1.0
                        && row.sweep[1].1 == sel
                })
                .unwrap();
            assert!(
                solved.value > 0.5,
                "clean-geometry case solved too few epochs: {}",
                solved.value
            );
        }
        assert_eq!(tracks.len(), 3);
        for (name, points) in &tracks {
            assert!(!points.is_empty(), "{name} trajectory is empty");
        }
    }
}
