//! Position solving from per-anchor timing, drift-compensated tracking,
//! confidence-based anchor selection, and accuracy scoring.
//!
//! The primary solver works on arrival-time *differences* against the first
//! anchor, so the receiver's unknown clock offset cancels; a range-based
//! solver covers the two-anchor tracking case where calibrated distances
//! are available.  Both iterate Gauss–Newton steps with Levenberg damping.

use crate::clocksync::PseudoDelay;
use crate::error::{Error, Result};
use crate::SPEED_OF_LIGHT;
use nalgebra::{DMatrix, DVector};

// ---------------------------------------------------------------------------
// Position fix
// ---------------------------------------------------------------------------

/// A solved position with its fit quality.
#[derive(Debug, Clone, PartialEq)]
pub struct PositionFix {
    /// Estimated coordinates (m); 2 or 3 components.
    pub position: Vec<f64>,
    /// Euclidean norm (m) of the measurement residual at the estimate.
    pub residual: f64,
    /// Indices (into the caller's anchor list) that entered the solve.
    pub anchors: Vec<usize>,
    /// Gauss–Newton iterations taken.
    pub iterations: u32,
}

fn check_geometry(anchors: &[Vec<f64>], needed: usize, full_span: bool) -> Result<usize> {
    if anchors.is_empty() {
        return Err(Error::InsufficientData("no anchors".into()));
    }
    let dim = anchors[0].len();
    if dim != 2 && dim != 3 {
        return Err(Error::InvalidArgument(format!(
            "anchor positions must be 2- or 3-dimensional, got {dim}"
        )));
    }
    if anchors.iter().any(|a| a.len() != dim) {
        return Err(Error::InvalidArgument(
            "anchor positions have mixed dimensions".into(),
        ));
    }
    if anchors.len() < needed {
        return Err(Error::InsufficientData(format!(
            "need at least {needed} anchors in {dim}D, got {}",
            anchors.len()
        )));
    }
    for i in 0..anchors.len() {
        for j in i + 1..anchors.len() {
            let d2: f64 = anchors[i]
                .iter()
                .zip(&anchors[j])
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            if d2 == 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "anchors {i} and {j} coincide"
                )));
            }
        }
    }
    // Spread check.  Time differences need the anchors to span the full
    // space (collinear 2D or coplanar 3D layouts are unsolvable); absolute
    // ranges tolerate one missing direction, since that only leaves a
    // two-fold mirror ambiguity resolved by the warm start — but not two
    // missing directions, which leave a rotational continuum.
    let rows = anchors.len() - 1;
    let mut m = DMatrix::zeros(rows, dim);
    for (r, a) in anchors[1..].iter().enumerate() {
        for c in 0..dim {
            m[(r, c)] = a[c] - anchors[0][c];
        }
    }
    let scale = m.amax().max(1.0);
    let min_rank = if full_span { dim } else { dim - 1 };
    if m.rank(1e-9 * scale) < min_rank {
        return Err(Error::Solver(format!(
            "degenerate anchor geometry: rank below {min_rank} in {dim}D"
        )));
    }
    Ok(dim)
}

fn distance(a: &[f64], p: &DVector<f64>) -> f64 {
    a.iter()
        .zip(p.iter())
        .map(|(ai, pi)| (ai - pi) * (ai - pi))
        .sum::<f64>()
        .sqrt()
        .max(1e-12)
}

/// Gauss–Newton with Levenberg damping on a residual/Jacobian model.
///
/// `eval` fills the residual vector and Jacobian at a trial point.  Only
/// cost-decreasing steps are accepted, so the returned residual never
/// exceeds the initial one.
fn solve_damped(
    mut p: DVector<f64>,
    rows: usize,
    eval: &dyn Fn(&DVector<f64>, &mut DVector<f64>, &mut DMatrix<f64>),
) -> Result<(DVector<f64>, f64, u32)> {
    let dim = p.len();
    let mut e = DVector::zeros(rows);
    let mut j = DMatrix::zeros(rows, dim);
    let mut lambda = 0.0f64;
    let max_iter = 60;

    eval(&p, &mut e, &mut j);
    let mut cost = e.norm();
    for iter in 1..=max_iter {
        let jt = j.transpose();
        let mut normal = &jt * &j;
        // J holds ∂e/∂p, so the descent step solves JᵀJ·δ = −Jᵀe.
        let rhs = -(&jt * &e);
        if lambda > 0.0 {
            for d in 0..dim {
                normal[(d, d)] += lambda * normal[(d, d)].max(1e-12);
            }
        }
        // A singular system (e.g. at a fold of the hyperbolic geometry)
        // is handled like a failed step: damp harder and retry.
        let Some(step) = normal.clone().lu().solve(&rhs) else {
            lambda = if lambda == 0.0 { 1e-6 } else { lambda * 10.0 };
            if lambda > 1e12 {
                return Ok((p, cost, iter));
            }
            continue;
        };
        let trial = &p + &step;
        let mut e_t = DVector::zeros(rows);
        let mut j_t = DMatrix::zeros(rows, dim);
        eval(&trial, &mut e_t, &mut j_t);
        let cost_t = e_t.norm();
        if cost_t <= cost {
            let moved = step.norm();
            p = trial;
            e = e_t;
            j = j_t;
            cost = cost_t;
            lambda = (lambda / 10.0).max(0.0);
            if lambda < 1e-12 {
                lambda = 0.0;
            }
            if moved < 1e-10 {
                return Ok((p, cost, iter));
            }
        } else {
            lambda = if lambda == 0.0 { 1e-6 } else { lambda * 10.0 };
            if lambda > 1e12 {
                return Ok((p, cost, iter));
            }
        }
    }
    Ok((p, cost, max_iter))
}

// ---------------------------------------------------------------------------
// TDOA solve
// ---------------------------------------------------------------------------

/// Solves for the position from per-anchor pseudo-delays (s).
///
/// Pseudo-delays are differenced against anchor 0, removing any common
/// clock offset; the solver then minimizes the mismatch between measured
/// and geometric range differences.  Starts from `initial` or the anchor
/// centroid.
pub fn tdoa_solve(
    pseudo_delays: &[f64],
    anchors: &[Vec<f64>],
    initial: Option<&[f64]>,
) -> Result<PositionFix> {
    let dim = check_geometry(anchors, 3, true)?;
    if anchors.len() < dim + 1 {
        return Err(Error::InsufficientData(format!(
            "time-difference positioning needs {} anchors in {dim}D, got {}",
            dim + 1,
            anchors.len()
        )));
    }
    if pseudo_delays.len() != anchors.len() {
        return Err(Error::InvalidArgument(format!(
            "{} pseudo-delays but {} anchors",
            pseudo_delays.len(),
            anchors.len()
        )));
    }
    if pseudo_delays.iter().any(|b| !b.is_finite()) {
        return Err(Error::InvalidArgument("non-finite pseudo-delay".into()));
    }
    // Measured range differences in meters.
    let diffs: Vec<f64> = pseudo_delays[1..]
        .iter()
        .map(|b| SPEED_OF_LIGHT * (b - pseudo_delays[0]))
        .collect();
    let start = match initial {
        Some(p) if p.len() == dim => DVector::from_row_slice(p),
        Some(p) => {
            return Err(Error::InvalidArgument(format!(
                "initial guess has dimension {}, expected {dim}",
                p.len()
            )))
        }
        None => centroid(anchors),
    };
    let rows = anchors.len() - 1;
    let eval = |p: &DVector<f64>, e: &mut DVector<f64>, j: &mut DMatrix<f64>| {
        let d0 = distance(&anchors[0], p);
        for (r, a) in anchors[1..].iter().enumerate() {
            let dm = distance(a, p);
            e[r] = diffs[r] - (dm - d0);
            for c in 0..p.len() {
                let g_m = (p[c] - a[c]) / dm;
                let g_0 = (p[c] - anchors[0][c]) / d0;
                j[(r, c)] = g_0 - g_m;
            }
        }
    };
    let (p, residual, iterations) = solve_damped(start, rows, &eval)?;
    Ok(PositionFix {
        position: p.iter().copied().collect(),
        residual,
        anchors: (0..anchors.len()).collect(),
        iterations,
    })
}

/// Solves for the position from per-anchor absolute ranges (m).
///
/// Covers the calibrated two-anchor tracking case in 2D, where the circle
/// intersection is disambiguated by the warm start; with more anchors it is
/// plain least-squares trilateration.
pub fn range_solve(
    ranges: &[f64],
    anchors: &[Vec<f64>],
    initial: Option<&[f64]>,
) -> Result<PositionFix> {
    let dim = check_geometry(anchors, 2, false)?;
    if anchors.len() < dim {
        return Err(Error::InsufficientData(format!(
            "range positioning needs {} anchors in {dim}D, got {}",
            dim,
            anchors.len()
        )));
    }
    if ranges.len() != anchors.len() {
        return Err(Error::InvalidArgument(format!(
            "{} ranges but {} anchors",
            ranges.len(),
            anchors.len()
        )));
    }
    if ranges.iter().any(|r| !r.is_finite() || *r < 0.0) {
        return Err(Error::InvalidArgument("invalid range".into()));
    }
    let start = match initial {
        Some(p) if p.len() == dim => DVector::from_row_slice(p),
        Some(p) => {
            return Err(Error::InvalidArgument(format!(
                "initial guess has dimension {}, expected {dim}",
                p.len()
            )))
        }
        None => centroid(anchors),
    };
    let rows = anchors.len();
    let eval = |p: &DVector<f64>, e: &mut DVector<f64>, j: &mut DMatrix<f64>| {
        for (r, a) in anchors.iter().enumerate() {
            let dm = distance(a, p);
            e[r] = ranges[r] - dm;
            for c in 0..p.len() {
                j[(r, c)] = -(p[c] - a[c]) / dm;
            }
        }
    };
    let (p, residual, iterations) = solve_damped(start, rows, &eval)?;
    Ok(PositionFix {
        position: p.iter().copied().collect(),
        residual,
        anchors: (0..anchors.len()).collect(),
        iterations,
    })
}

fn centroid(anchors: &[Vec<f64>]) -> DVector<f64> {
    let dim = anchors[0].len();
    let mut c = DVector::zeros(dim);
    for a in anchors {
        for d in 0..dim {
            c[d] += a[d];
        }
    }
    c / anchors.len() as f64
}

// ---------------------------------------------------------------------------
// Tracking
// ---------------------------------------------------------------------------

/// Positions over time from drift-compensated pseudo-delay series.
///
/// `compensated[a]` is anchor `a`'s pseudo-delay series with the estimated
/// drift trend already removed.  Symbols are grouped into epochs of
/// `epoch_slots` slots; an epoch produces a fix only when every anchor
/// contributed at least one symbol to it, and each fix warm-starts the
/// next.  Returns `(epoch index, fix)` pairs.
pub fn track(
    compensated: &[Vec<PseudoDelay>],
    anchors: &[Vec<f64>],
    epoch_slots: u64,
    initial: Option<&[f64]>,
) -> Result<Vec<(u64, PositionFix)>> {
    if epoch_slots == 0 {
        return Err(Error::InvalidArgument("epoch length must be positive".into()));
    }
    if compensated.len() != anchors.len() {
        return Err(Error::InvalidArgument(format!(
            "{} pseudo-delay series but {} anchors",
            compensated.len(),
            anchors.len()
        )));
    }
    let last = compensated
        .iter()
        .flat_map(|s| s.iter().map(|p| p.index))
        .max();
    let Some(last) = last else {
        return Ok(Vec::new());
    };
    let mut fixes = Vec::new();
    let mut warm: Option<Vec<f64>> = initial.map(|p| p.to_vec());
    for epoch in 0..=last / epoch_slots {
        let lo = epoch * epoch_slots;
        let hi = lo + epoch_slots;
        let mut betas = Vec::with_capacity(anchors.len());
        for series in compensated {
            let in_epoch: Vec<f64> = series
                .iter()
                .filter(|p| p.index >= lo && p.index < hi)
                .map(|p| p.beta)
                .collect();
            if in_epoch.is_empty() {
                break;
            }
            betas.push(in_epoch.iter().sum::<f64>() / in_epoch.len() as f64);
        }
        if betas.len() != anchors.len() {
            continue; // epoch not observed by every anchor
        }
        let fix = tdoa_solve(&betas, anchors, warm.as_deref())?;
        warm = Some(fix.position.clone());
        fixes.push((epoch, fix));
    }
    Ok(fixes)
}

// ---------------------------------------------------------------------------
// Anchor selection and scoring
// ---------------------------------------------------------------------------

/// Indices of the `k` highest-confidence links, ascending; ties prefer the
/// lower index.
pub fn select_anchors_by_confidence(confidences: &[f64], k: usize) -> Result<Vec<usize>> {
    if k > confidences.len() {
        return Err(Error::InvalidArgument(format!(
            "cannot select {k} of {} links",
            confidences.len()
        )));
    }
    let mut order: Vec<usize> = (0..confidences.len()).collect();
    // Stable sort by descending confidence keeps lower indices first among
    // ties.
    order.sort_by(|&a, &b| confidences[b].total_cmp(&confidences[a]));
    let mut picked: Vec<usize> = order.into_iter().take(k).collect();
    picked.sort_unstable();
    Ok(picked)
}

/// Root-mean-square Euclidean position error (m).
pub fn rmse(estimates: &[Vec<f64>], truths: &[Vec<f64>]) -> Result<f64> {
    if estimates.len() != truths.len() {
        return Err(Error::InvalidArgument(format!(
            "{} estimates but {} truths",
            estimates.len(),
            truths.len()
        )));
    }
    if estimates.is_empty() {
        return Err(Error::InsufficientData("no positions to score".into()));
    }
    let mut sq = 0.0;
    for (e, t) in estimates.iter().zip(truths) {
        if e.len() != t.len() {
            return Err(Error::InvalidArgument(
                "estimate/truth dimension mismatch".into(),
            ));
        }
        sq += e
            .iter()
            .zip(t)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>();
    }
    Ok((sq / estimates.len() as f64).sqrt())
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    /// Simulation anchor layout (m).
    fn anchors3d() -> Vec<Vec<f64>> {
        vec![
            vec![2.0, 5.0, 2.0],
            vec![4.0, 8.0, 3.0],
            vec![5.0, 5.0, 3.0],
            vec![7.0, 3.0, 2.0],
        ]
    }

    fn anchors2d() -> Vec<Vec<f64>> {
        vec![vec![2.0, 5.0], vec![4.0, 8.0], vec![5.0, 5.0], vec![7.0, 3.0]]
    }

    fn dist(a: &[f64], b: &[f64]) -> f64 {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt()
    }

    /// Pseudo-delays for a given truth: common offset plus propagation.
    fn delays_for(p: &[f64], anchors: &[Vec<f64>], offset: f64) -> Vec<f64> {
        anchors
            .iter()
            .map(|a| offset + dist(a, p) / SPEED_OF_LIGHT)
            .collect()
    }

    #[test]
    fn exact_delays_recover_the_position() {
        let anchors = anchors3d();
        let truth = [4.0, 6.0, 2.4];
        let fix = tdoa_solve(&delays_for(&truth, &anchors, 50e-9), &anchors, None).unwrap();
        assert!(dist(&fix.position, &truth) < 1e-6, "{:?}", fix.position);
        assert!(fix.residual < 1e-6);
        assert_eq!(fix.anchors, vec![0, 1, 2, 3]);

        let a2 = anchors2d();
        let truth2 = [4.2, 5.5];
        let fix2 = tdoa_solve(&delays_for(&truth2, &a2, -20e-9), &a2, None).unwrap();
        assert!(dist(&fix2.position, &truth2) < 1e-6);
    }

    #[test]
    fn common_offset_leaves_the_fix_unchanged() {
        let anchors = anchors3d();
        let truth = [4.5, 5.5, 2.2];
        let base = delays_for(&truth, &anchors, 0.0);
        let shifted: Vec<f64> = base.iter().map(|b| b + 123.456e-9).collect();
        let f1 = tdoa_solve(&base, &anchors, None).unwrap();
        let f2 = tdoa_solve(&shifted, &anchors, None).unwrap();
        assert!(dist(&f1.position, &f2.position) < 1e-9);
    }

    #[test]
    fn noisy_fix_error_matches_the_linearized_prediction() {
        let anchors = anchors3d();
        let truth = [4.0, 5.5, 2.4];
        let sigma = 0.3e-9;
        // Linearized oracle: dilution factor from the Jacobian at truth,
        // times c·sigma·√2 for differenced two-measurement noise.
        let dim = 3;
        let mut j = DMatrix::zeros(anchors.len() - 1, dim);
        let d0 = dist(&anchors[0], &truth);
        for (r, a) in anchors[1..].iter().enumerate() {
            let dm = dist(a, &truth);
            for c in 0..dim {
                j[(r, c)] = (truth[c] - anchors[0][c]) / d0 - (truth[c] - a[c]) / dm;
            }
        }
        let jtj_inv = (j.transpose() * &j).try_inverse().unwrap();
        let gdop = jtj_inv.trace().sqrt();
        let predicted = gdop * SPEED_OF_LIGHT * sigma * std::f64::consts::SQRT_2;

        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let normal = Normal::new(0.0, sigma).unwrap();
        let mut sq = 0.0;
        let trials = 1000;
        for _ in 0..trials {
            let noisy: Vec<f64> = delays_for(&truth, &anchors, 10e-9)
                .iter()
                .map(|b| b + normal.sample(&mut rng))
                .collect();
            let fix = tdoa_solve(&noisy, &anchors, Some(&truth)).unwrap();
            sq += dist(&fix.position, &truth).powi(2);
        }
        let empirical = (sq / trials as f64).sqrt();
        assert!(
            empirical < 2.0 * predicted && empirical > predicted / 2.0,
            "empirical {empirical:.3} m vs predicted {predicted:.3} m"
        );
    }

    #[test]
    fn converges_quickly_across_the_anchor_hull() {
        // 0.5 m grid over the bounding box, keeping points inside the
        // anchor tetrahedron via barycentric coordinates.
        let anchors = anchors3d();
        let a0 = DVector::from_row_slice(&anchors[0]);
        let mut t = DMatrix::zeros(3, 3);
        for c in 0..3 {
            for r in 0..3 {
                t[(r, c)] = anchors[c + 1][r] - anchors[0][r];
            }
        }
        let t_inv = t.try_inverse().unwrap();
        let mut tested = 0;
        let mut x = 2.0;
        while x <= 7.0 {
            let mut y = 3.0;
            while y <= 8.0 {
                let mut z = 2.0;
                while z <= 3.0 {
                    let p = DVector::from_row_slice(&[x, y, z]);
                    let bary = &t_inv * (&p - &a0);
                    let inside = bary.iter().all(|&b| b >= 0.05)
                        && bary.iter().sum::<f64>() <= 0.95;
                    if inside {
                        let truth = [x, y, z];
                        let fix =
                            tdoa_solve(&delays_for(&truth, &anchors, 0.0), &anchors, None)
                                .unwrap();
                        assert!(
                            fix.iterations <= 20,
                            "{} iterations at {truth:?}",
                            fix.iterations
                        );
                        assert!(dist(&fix.position, &truth) < 1e-6);
                        tested += 1;
                    }
                    z += 0.5;
                }
                y += 0.5;
            }
            x += 0.5;
        }
        assert!(tested > 5, "grid covered only {tested} points");
    }

    #[test]
    fn degenerate_geometry_is_rejected() {
        // Collinear 2D anchors.
        let line: Vec<Vec<f64>> = (0..4).map(|i| vec![i as f64, i as f64]).collect();
        let delays = vec![0.0; 4];
        assert!(tdoa_solve(&delays, &line, None).is_err());
        // Coplanar 3D anchors.
        let plane: Vec<Vec<f64>> = vec![
            vec![0.0, 0.0, 1.0],
            vec![4.0, 0.0, 1.0],
            vec![0.0, 4.0, 1.0],
            vec![4.0, 4.0, 1.0],
        ];
        assert!(tdoa_solve(&delays, &plane, None).is_err());
        // Coincident anchors.
        let dup = vec![vec![1.0, 1.0], vec![1.0, 1.0], vec![2.0, 3.0]];
        assert!(tdoa_solve(&delays[..3], &dup, None).is_err());
        // Too few anchors for the dimension.
        assert!(tdoa_solve(&delays[..3], &anchors3d()[..3].to_vec(), None).is_err());
        assert!(tdoa_solve(&delays[..3], &anchors2d()[..3].to_vec(), None).is_ok());
    }

    #[test]
    fn two_anchor_ranges_solve_with_a_warm_start() {
        let anchors = vec![vec![0.0, 0.0], vec![4.0, 0.0]];
        let truth = [1.5, 2.0];
        let ranges: Vec<f64> = anchors.iter().map(|a| dist(a, &truth)).collect();
        let fix = range_solve(&ranges, &anchors, Some(&[1.0, 1.0])).unwrap();
        assert!(dist(&fix.position, &truth) < 1e-6);
        // The mirror-image start converges to the mirror intersection.
        let mirror = range_solve(&ranges, &anchors, Some(&[1.0, -1.0])).unwrap();
        assert!(dist(&mirror.position, &[1.5, -2.0]) < 1e-6);
        // Inconsistent input sizes.
        assert!(range_solve(&ranges[..1], &anchors, None).is_err());
        assert!(range_solve(&[f64::NAN, 1.0], &anchors, None).is_err());
    }

    #[test]
    fn residual_never_exceeds_the_initial_residual() {
        let anchors = anchors3d();
        let truth = [4.4, 5.2, 2.6];
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let normal = Normal::new(0.0, 1e-9).unwrap();
        for trial in 0..50 {
            let noisy: Vec<f64> = delays_for(&truth, &anchors, 0.0)
                .iter()
                .map(|b| b + normal.sample(&mut rng))
                .collect();
            let start = [
                3.0 + (trial % 5) as f64,
                3.0 + (trial % 7) as f64 * 0.7,
                2.0 + (trial % 3) as f64 * 0.4,
            ];
            // Residual at the start point.
            let d0 = dist(&anchors[0], &start);
            let initial_residual: f64 = anchors[1..]
                .iter()
                .zip(&noisy[1..])
                .map(|(a, b)| {
                    let meas = SPEED_OF_LIGHT * (b - noisy[0]);
                    let geo = dist(a, &start) - d0;
                    (meas - geo) * (meas - geo)
                })
                .sum::<f64>()
                .sqrt();
            let fix = tdoa_solve(&noisy, &anchors, Some(&start)).unwrap();
            assert!(fix.residual <= initial_residual + 1e-12);
        }
    }

    #[test]
    fn stationary_track_with_exact_drift_is_constant() {
        let anchors = anchors3d();
        let truth = [4.0, 5.0, 2.5];
        let delays = delays_for(&truth, &anchors, 30e-9);
        // 10 epochs of 100 slots, 20 symbols per epoch per anchor.
        let compensated: Vec<Vec<PseudoDelay>> = delays
            .iter()
            .map(|&b| {
                (0..1000)
                    .step_by(50)
                    .map(|k| PseudoDelay { index: k, beta: b })
                    .collect()
            })
            .collect();
        let fixes = track(&compensated, &anchors, 100, None).unwrap();
        assert_eq!(fixes.len(), 10);
        for (_, fix) in &fixes {
            assert!(dist(&fix.position, &truth) < 1e-6);
        }
    }

    /// Pseudo-delay series for a stationary agent with a residual
    /// (uncompensated) drift error on anchor 1 only.
    fn biased_series(
        anchors: &[Vec<f64>],
        truth: &[f64],
        eps_err: f64,
        slots: u64,
    ) -> Vec<Vec<PseudoDelay>> {
        let delays = delays_for(truth, anchors, 0.0);
        let slot = 480e-9;
        (0..anchors.len())
            .map(|a| {
                (0..slots)
                    .step_by(100)
                    .map(|k| {
                        let bias = if a == 1 { eps_err * k as f64 * slot } else { 0.0 };
                        PseudoDelay { index: k, beta: delays[a] + bias }
                    })
                    .collect()
            })
            .collect()
    }

    #[test]
    fn residual_drift_error_biases_the_track_as_predicted() {
        let anchors = anchors3d();
        let truth = [4.0, 5.5, 2.4];
        let slot = 480e-9;
        let eps_err = 1e-6; // 1 ppm residual drift error on anchor 1

        // Small-bias regime (2000 slots): the position bias follows the
        // linearized response −(JᵀJ)⁻¹Jᵀ·[bias, 0, 0].
        let fixes = track(
            &biased_series(&anchors, &truth, eps_err, 2000),
            &anchors,
            100,
            Some(&truth),
        )
        .unwrap();
        let (_, last) = fixes.last().unwrap();
        let bias_m = SPEED_OF_LIGHT * eps_err * 1900.0 * slot;
        let dim = 3;
        let mut j = DMatrix::zeros(3, dim);
        let d0 = dist(&anchors[0], &truth);
        for (r, a) in anchors[1..].iter().enumerate() {
            let dm = dist(a, &truth);
            for c in 0..dim {
                j[(r, c)] = (truth[c] - anchors[0][c]) / d0 - (truth[c] - a[c]) / dm;
            }
        }
        let rhs = DVector::from_row_slice(&[bias_m, 0.0, 0.0]);
        let shift = -((j.transpose() * &j).try_inverse().unwrap() * j.transpose() * rhs);
        let measured = DVector::from_row_slice(&last.position) - DVector::from_row_slice(&truth);
        assert_relative_eq!(measured.norm(), shift.norm(), max_relative = 0.15);
        // Direction agrees too.
        assert!(measured.dot(&shift) / (measured.norm() * shift.norm()) > 0.95);
        // Early epochs are nearly unbiased.
        let (_, first) = &fixes[0];
        assert!(dist(&first.position, &truth) < 0.1 * measured.norm());

        // Full horizon (10⁴ slots): accumulated timing bias ≈ 4.75 ns
        // (1.43 m) pushes the hyperbolic geometry toward a fold; the solve
        // must not fail, and the position bias stays near the linearized
        // extrapolation (≈ 1.27 m; measured 1.36 m for this layout).
        let fixes = track(
            &biased_series(&anchors, &truth, eps_err, 10_000),
            &anchors,
            100,
            Some(&truth),
        )
        .unwrap();
        assert_eq!(fixes.len(), 100);
        let (_, last) = fixes.last().unwrap();
        let sat = dist(&last.position, &truth);
        assert!(
            (1.0..1.7).contains(&sat),
            "saturated bias {sat:.3} m outside the locked band"
        );
    }

    #[test]
    fn moving_track_reports_a_finite_trajectory_error() {
        let anchors = anchors3d();
        let slot = 480e-9;
        let epoch = 100u64;
        // 1 m/s along x, one symbol per 10 slots.
        let pos_at = |k: u64| {
            let t = k as f64 * slot;
            [3.5 + 1.0 * t, 5.5, 2.4]
        };
        let compensated: Vec<Vec<PseudoDelay>> = (0..4)
            .map(|a| {
                (0..5000u64)
                    .step_by(10)
                    .map(|k| {
                        let p = pos_at(k);
                        PseudoDelay {
                            index: k,
                            beta: 10e-9 + dist(&anchors[a], &p) / SPEED_OF_LIGHT,
                        }
                    })
                    .collect()
            })
            .collect();
        let fixes = track(&compensated, &anchors, epoch, Some(&[3.5, 5.5, 2.4])).unwrap();
        assert_eq!(fixes.len(), 50);
        let est: Vec<Vec<f64>> = fixes.iter().map(|(_, f)| f.position.clone()).collect();
        let tru: Vec<Vec<f64>> = fixes
            .iter()
            .map(|(e, _)| pos_at(e * epoch + epoch / 2).to_vec())
            .collect();
        let err = rmse(&est, &tru).unwrap();
        assert!(err.is_finite());
        // Motion within one epoch is micrometres, so the fixes essentially
        // interpolate the trajectory.
        assert!(err < 1e-3, "trajectory RMSE {err} m");
    }

    #[test]
    fn anchor_selection_orders_by_confidence_with_index_ties() {
        assert_eq!(
            select_anchors_by_confidence(&[0.9, 0.2, 0.8], 2).unwrap(),
            vec![0, 2]
        );
        assert_eq!(
            select_anchors_by_confidence(&[0.5, 0.5, 0.5], 2).unwrap(),
            vec![0, 1]
        );
        assert_eq!(
            select_anchors_by_confidence(&[0.1, 0.9, 0.9, 0.2], 3).unwrap(),
            vec![1, 2, 3]
        );
        assert!(select_anchors_by_confidence(&[0.5], 2).is_err());
    }

    #[test]
    fn rmse_matches_closed_forms() {
        let truths = vec![vec![1.0, 2.0], vec![3.0, 4.0]];
        assert_abs_diff_eq!(rmse(&truths, &truths).unwrap(), 0.0);
        let off: Vec<Vec<f64>> = truths
            .iter()
            .map(|p| vec![p[0] + 0.1, p[1]])
            .collect();
        assert_relative_eq!(rmse(&off, &truths).unwrap(), 0.1, max_relative = 1e-12);
        assert!(rmse(&truths, &truths[..1]).is_err());

        // Isotropic 2D Gaussian: RMSE → σ√2.
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let sigma = 0.05;
        let normal = Normal::new(0.0, sigma).unwrap();
        let n = 10_000;
        let tru: Vec<Vec<f64>> = (0..n).map(|_| vec![0.0, 0.0]).collect();
        let est: Vec<Vec<f64>> = (0..n)
            .map(|_| vec![normal.sample(&mut rng), normal.sample(&mut rng)])
            .collect();
        assert_relative_eq!(
            rmse(&est, &tru).unwrap(),
            sigma * std::f64::consts::SQRT_2,
            max_relative = 0.03
        );
    }
}
