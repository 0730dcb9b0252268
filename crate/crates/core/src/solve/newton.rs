//! Newton iteration in two flavors: refinement of polynomial-system
//! endpoints, and direct iteration on the logarithmic derivative, which
//! doubles as the independent multistart oracle.

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;

use crate::linalg::{self, Lu};
use crate::master::{sample_unit_vector, streams, stream_rng, MasterFunction};
use crate::solve::tracker::{TargetSystem, TrackerConfig};
use crate::solve::{cluster_endpoints, lexicographic, CriticalPoint, Endpoint};

pub(crate) struct Refined {
    pub point: Vec<Complex64>,
    pub residual: f64,
    pub converged: bool,
}

/// Newton on a polynomial system, keeping the best iterate seen.
/// Returns `None` when the iteration leaves the divergence cutoff.
/// Convergence means the scaled residual dropped below `tol`.
pub(crate) fn refine_system(
    target: &TargetSystem<'_>,
    x0: &[Complex64],
    max_iters: usize,
    tol: f64,
    cutoff: f64,
) -> Option<Refined> {
    let mut x = x0.to_vec();
    let mut best = x.clone();
    let mut best_residual = f64::INFINITY;
    let mut best_scale = 1.0f64;
    let mut prev_residual = f64::INFINITY;
    let mut stalls = 0usize;
    for _ in 0..=max_iters {
        let (values, scales) = target.eval_scaled(&x);
        let residual = linalg::vec_norm(&values);
        let scale = scales.iter().map(|s| s * s).sum::<f64>().sqrt();
        if residual < best_residual {
            best = x.clone();
            best_residual = residual;
            best_scale = scale;
        }
        if residual <= 1e-2 * tol * scale.max(1.0) {
            break;
        }
        if residual >= 0.97 * prev_residual {
            stalls += 1;
            if stalls >= 4 {
                break;
            }
        } else {
            stalls = 0;
        }
        prev_residual = residual;
        let lu = Lu::new(&target.eval_jacobian(&x));
        let step = match lu.solve(&values) {
            Some(step) => step,
            None => break,
        };
        if linalg::vec_norm(&step) > 10.0 * (1.0 + linalg::vec_norm(&x)) {
            break;
        }
        for (xi, si) in x.iter_mut().zip(&step) {
            *xi -= si;
            if !xi.re.is_finite() || !xi.im.is_finite() {
                return None;
            }
        }
        if linalg::vec_inf_norm(&x) > cutoff {
            return None;
        }
    }
    let converged = best_residual <= tol * best_scale.max(1.0);
    Some(Refined { point: best, residual: best_residual, converged })
}

pub(crate) struct Polished {
    pub point: Vec<Complex64>,
    /// Euclidean norm of the logarithmic derivative at `point`.
    pub residual: f64,
    pub converged: bool,
    /// The iteration stopped by stepping into the divisor guard.
    pub hit_divisor: bool,
}

/// Newton directly on `d log φ = 0` from `x0`, keeping the best
/// iterate. Steps are damped by backtracking: the logarithmic
/// derivative has poles all along the divisor, so an undamped step
/// overshoots routinely and the basins of attraction collapse. For
/// nondegenerate roots the full step wins immediately and convergence
/// stays quadratic.
pub(crate) fn polish_log(mf: &MasterFunction, x0: &[Complex64], cfg: &TrackerConfig) -> Polished {
    polish_log_iters(mf, x0, cfg.refine_iters, cfg.refine_tol, cfg.divergence_cutoff)
}

pub(crate) fn polish_log_iters(
    mf: &MasterFunction,
    x0: &[Complex64],
    max_iters: usize,
    tol: f64,
    cutoff: f64,
) -> Polished {
    let mut x = x0.to_vec();
    let mut best = x.clone();
    let mut best_residual = f64::INFINITY;
    let mut best_scale = 1.0f64;
    let mut prev_residual = f64::INFINITY;
    let mut stalls = 0usize;
    let mut hit_divisor = false;
    for _ in 0..=max_iters {
        let (phi, scale) = match mf.log_derivative_scaled(&x) {
            Ok(v) => v,
            Err(_) => {
                hit_divisor = true;
                break;
            }
        };
        let residual = linalg::vec_norm(&phi);
        if residual < best_residual {
            best = x.clone();
            best_residual = residual;
            best_scale = scale;
        }
        if residual <= 1e-2 * tol * scale.max(1.0) {
            break;
        }
        // Damping makes the residual monotone, so a stall here means
        // real stagnation; still allow a long plateau, slow crossings
        // of saddle regions do recover.
        if residual >= 0.97 * prev_residual {
            stalls += 1;
            if stalls >= 12 {
                break;
            }
        } else {
            stalls = 0;
        }
        prev_residual = residual;
        let jac = match mf.log_jacobian(&x) {
            Ok(j) => j,
            Err(_) => {
                hit_divisor = true;
                break;
            }
        };
        let step = match Lu::new(&jac).solve(&phi) {
            Some(step) => step,
            None => break,
        };
        if linalg::vec_norm(&step) > 10.0 * (1.0 + linalg::vec_norm(&x)) {
            break;
        }
        // Accept the largest halving of the step that reduces the
        // residual; a trial inside the divisor guard just rejects that
        // halving.
        let mut next = None;
        let mut damping = 1.0f64;
        for _ in 0..8 {
            let trial: Vec<Complex64> =
                x.iter().zip(&step).map(|(xi, si)| xi - si * damping).collect();
            if trial.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
                if let Ok((trial_phi, _)) = mf.log_derivative_scaled(&trial) {
                    if linalg::vec_norm(&trial_phi) < residual {
                        next = Some(trial);
                        break;
                    }
                }
            }
            damping *= 0.5;
        }
        match next {
            Some(trial) => x = trial,
            None => break,
        }
        if linalg::vec_inf_norm(&x) > cutoff {
            break;
        }
    }
    let converged = best_residual <= tol * best_scale.max(1.0);
    Polished { point: best, residual: best_residual, converged, hit_divisor }
}

/// Outcome of the independent multistart check: Newton on the
/// logarithmic derivative from many random starts in a ball.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub starts: usize,
    pub converged_runs: usize,
    pub divisor_runs: usize,
    pub lost_runs: usize,
    pub points: Vec<CriticalPoint>,
}

impl OracleReport {
    pub fn count(&self) -> usize {
        self.points.len()
    }
}

/// Runs Newton on `d log φ` from `cfg.oracle_starts` random points with
/// magnitudes spread across every scale up to `cfg.oracle_ball_radius`,
/// clusters the converged endpoints, and reports every distinct
/// critical point found. Shares no code path with the homotopy tracker
/// beyond the master function itself. Iterates leaving three times the
/// sampling ball are cut immediately: the logarithmic derivative decays
/// toward infinity, so Newton doubles outward from the far field and
/// such runs never come back.
pub fn multistart_oracle(mf: &MasterFunction, cfg: &TrackerConfig) -> OracleReport {
    let n = mf.dimension();
    let mut rng = stream_rng(cfg.seed, streams::ORACLE);
    let starts: Vec<Vec<Complex64>> = (0..cfg.oracle_starts)
        .map(|_| sample_start(&mut rng, n, cfg.oracle_ball_radius))
        .collect();

    let escape_cutoff = 3.0 * cfg.oracle_ball_radius;
    let runs: Vec<Polished> = starts
        .par_iter()
        .map(|start| {
            polish_log_iters(
                mf,
                start,
                cfg.oracle_max_iters,
                cfg.refine_tol,
                escape_cutoff,
            )
        })
        .collect();

    let mut converged_runs = 0usize;
    let mut divisor_runs = 0usize;
    let mut lost_runs = 0usize;
    let mut kept: Vec<Endpoint> = Vec::new();
    for run in runs {
        if run.converged {
            converged_runs += 1;
            kept.push(Endpoint { point: run.point, residual: run.residual });
        } else if run.hit_divisor {
            divisor_runs += 1;
        } else {
            lost_runs += 1;
        }
    }

    let clusters = cluster_endpoints(kept, cfg.cluster_radius);
    let mut points: Vec<CriticalPoint> = clusters
        .into_iter()
        .map(|cluster| {
            let nondegenerate = mf
                .is_nondegenerate(&cluster.representative, cfg.nondegeneracy_tol)
                .unwrap_or(false);
            let condition = match mf.log_jacobian(&cluster.representative) {
                Ok(jac) => linalg::condition_number(&jac),
                Err(_) => f64::INFINITY,
            };
            CriticalPoint {
                location: cluster.representative,
                residual: cluster.residual,
                refined: true,
                nondegenerate,
                condition,
                cluster_size: cluster.members,
                local_degree: None,
            }
        })
        .collect();
    points.sort_by(|a, b| lexicographic(&a.location, &b.location));

    OracleReport {
        starts: cfg.oracle_starts,
        converged_runs,
        divisor_runs,
        lost_runs,
        points,
    }
}

/// One oracle start: a uniform direction with magnitude log-uniform
/// over the two decades below `radius`. Uniform volume sampling would
/// concentrate nearly all starts at the outer scale and starve the
/// basins around unit-sized configurations.
fn sample_start(rng: &mut rand_chacha::ChaCha8Rng, n: usize, radius: f64) -> Vec<Complex64> {
    let direction = sample_unit_vector(rng, n);
    let magnitude = rng.gen_range((radius * 1e-2).ln()..radius.ln()).exp();
    direction.iter().map(|z| z * magnitude).collect()
}

/// True when the two point lists describe the same set of locations,
/// pairwise within `tol`. Both lists must already be in lexicographic
/// order, as the solver and oracle produce them.
pub fn same_point_sets(a: &[CriticalPoint], b: &[CriticalPoint], tol: f64) -> bool {
    a.len() == b.len()
        && a.iter()
            .zip(b)
            .all(|(p, q)| linalg::vec_dist(&p.location, &q.location) <= tol)
}
