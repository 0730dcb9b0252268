//! Total-degree homotopy continuation.
//!
//! The homotopy is `H(x,t) = (1-t)·γ·G(x) + t·F(x)` with start system
//! `G_i = x_i^{d_i} - c_i`, random `γ` and `c_i`, tracked from `t = 0`
//! to `t = 1 - endgame_offset` by an RK4 predictor on the Davidenko
//! equation with a Newton corrector, then handed to plain Newton on `F`
//! for the endgame. The random constant γ keeps the path set away from
//! the discriminant for all but measure-zero choices.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::linalg::{self, Lu};
use crate::master::{sample_annulus, streams, stream_rng, MasterFunction};
use crate::poly::MPoly;
use crate::solve::{
    cluster_endpoints, lexicographic, newton, ClearedSystem, CriticalPoint, Endpoint,
    SolveError, SolveReport,
};

/// All numeric policy for the solver in one place. Serializable so run
/// configurations can override single fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrackerConfig {
    pub seed: u64,
    /// Refuse start systems larger than this.
    pub bezout_cap: usize,
    pub initial_step: f64,
    pub max_step: f64,
    pub min_step: f64,
    pub step_growth: f64,
    /// Consecutive accepted steps before the step size may grow.
    pub growth_streak: usize,
    pub corrector_iters: usize,
    /// Scaled residual bound for accepting a corrector result.
    pub track_tol: f64,
    /// Tracking stops at `t = 1 - endgame_offset`.
    pub endgame_offset: f64,
    pub refine_tol: f64,
    pub refine_iters: usize,
    /// Path is declared divergent beyond this coordinate magnitude.
    pub divergence_cutoff: f64,
    /// Relative drift between the tracked endpoint and its refined
    /// limit above which the path is treated as escaping.
    pub endgame_drift: f64,
    /// Norm growth over the last `escape_window · endgame_offset` of
    /// the `t` interval beyond which a path counts as escaping to
    /// infinity. Escaping paths grow like a power of `1/(1-t)` there;
    /// convergent ones flatten out.
    pub escape_window: f64,
    pub escape_growth: f64,
    /// Relative divisor distance below which evaluating the
    /// logarithmic derivative is refused.
    pub divisor_threshold: f64,
    /// Relative divisor distance below which a refined endpoint is
    /// classified as a divisor point rather than a critical point.
    /// Wider than `divisor_threshold`: multiple roots on the divisor
    /// stall Newton slightly short of it.
    pub divisor_radius: f64,
    pub cluster_radius: f64,
    pub nondegeneracy_tol: f64,
    /// Eigenvalue pairing tolerance for Morse summaries.
    pub pairing_tol: f64,
    pub oracle_starts: usize,
    pub oracle_ball_radius: f64,
    pub oracle_max_iters: usize,
    /// Perturbation size for local degrees, relative to the gradient
    /// scale on the isolating sphere.
    pub local_degree_epsilon: f64,
    pub local_degree_trials: usize,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        TrackerConfig {
            seed: 0,
            bezout_cap: 20_000,
            initial_step: 0.02,
            max_step: 0.1,
            min_step: 1e-14,
            step_growth: 2.0,
            growth_streak: 3,
            corrector_iters: 3,
            track_tol: 1e-10,
            endgame_offset: 1e-6,
            refine_tol: 1e-12,
            refine_iters: 60,
            divergence_cutoff: 1e8,
            endgame_drift: 0.1,
            escape_window: 100.0,
            escape_growth: 2.0,
            divisor_threshold: 1e-10,
            divisor_radius: 1e-6,
            cluster_radius: 1e-6,
            nondegeneracy_tol: 1e-8,
            pairing_tol: 1e-9,
            oracle_starts: 2000,
            oracle_ball_radius: 10.0,
            oracle_max_iters: 50,
            local_degree_epsilon: 1e-4,
            local_degree_trials: 3,
        }
    }
}

/// Start system `x_i^{d_i} = c_i` with its full root set enumerable by
/// index.
pub(crate) struct StartSystem {
    degrees: Vec<usize>,
    constants: Vec<Complex64>,
    roots: Vec<Complex64>,
}

impl StartSystem {
    fn new(degrees: &[usize], constants: Vec<Complex64>) -> Self {
        let roots = degrees
            .iter()
            .zip(&constants)
            .map(|(&d, c)| Complex64::from_polar(c.norm().powf(1.0 / d as f64), c.arg() / d as f64))
            .collect();
        StartSystem { degrees: degrees.to_vec(), constants, roots }
    }

    /// Root number `k` in mixed-radix order over the degree vector.
    fn root(&self, k: usize) -> Vec<Complex64> {
        let mut digits = k;
        self.degrees
            .iter()
            .zip(&self.roots)
            .map(|(&d, principal)| {
                let digit = digits % d;
                digits /= d;
                let angle = std::f64::consts::TAU * digit as f64 / d as f64;
                principal * Complex64::from_polar(1.0, angle)
            })
            .collect()
    }

    fn eval(&self, x: &[Complex64]) -> (Vec<Complex64>, Vec<f64>) {
        let mut values = Vec::with_capacity(x.len());
        let mut scales = Vec::with_capacity(x.len());
        for ((&d, c), xi) in self.degrees.iter().zip(&self.constants).zip(x) {
            let p = xi.powu(d as u32);
            values.push(p - c);
            scales.push(p.norm() + c.norm());
        }
        (values, scales)
    }

    fn diag_jacobian(&self, x: &[Complex64]) -> Vec<Complex64> {
        self.degrees
            .iter()
            .zip(x)
            .map(|(&d, xi)| xi.powu(d as u32 - 1) * d as f64)
            .collect()
    }
}

/// Polynomial system with precomputed Jacobian, the target of a
/// homotopy.
pub(crate) struct TargetSystem<'a> {
    pub equations: &'a [MPoly<Complex64>],
    pub jacobian: &'a [Vec<MPoly<Complex64>>],
}

impl TargetSystem<'_> {
    pub fn eval_scaled(&self, x: &[Complex64]) -> (Vec<Complex64>, Vec<f64>) {
        let mut values = Vec::with_capacity(self.equations.len());
        let mut scales = Vec::with_capacity(self.equations.len());
        for e in self.equations {
            let (v, s) = e.eval_with_scale(x);
            values.push(v);
            scales.push(s);
        }
        (values, scales)
    }

    pub fn eval_jacobian(&self, x: &[Complex64]) -> Vec<Vec<Complex64>> {
        self.jacobian
            .iter()
            .map(|row| row.iter().map(|p| p.eval(x)).collect())
            .collect()
    }
}

pub(crate) enum PathOutcome {
    Finished { point: Vec<Complex64>, residual: f64, converged: bool },
    Diverged,
    Failed,
}

struct Homotopy<'a> {
    target: &'a TargetSystem<'a>,
    start: &'a StartSystem,
    gamma: Complex64,
}

impl Homotopy<'_> {
    /// Residual and per-equation magnitude scale at `(x, t)`.
    fn residual(&self, x: &[Complex64], t: f64) -> (Vec<Complex64>, f64) {
        let (g, g_scale) = self.start.eval(x);
        let (f, f_scale) = self.target.eval_scaled(x);
        let s = 1.0 - t;
        let mut out = Vec::with_capacity(x.len());
        let mut scale_sq = 0.0;
        for i in 0..x.len() {
            out.push(self.gamma * s * g[i] + t * f[i]);
            let scale = s * g_scale[i] + t * f_scale[i];
            scale_sq += scale * scale;
        }
        (out, scale_sq.sqrt())
    }

    fn jacobian(&self, x: &[Complex64], t: f64) -> Vec<Vec<Complex64>> {
        let mut jac = self.target.eval_jacobian(x);
        for row in jac.iter_mut() {
            for entry in row.iter_mut() {
                *entry *= t;
            }
        }
        let diag = self.start.diag_jacobian(x);
        let s = self.gamma * (1.0 - t);
        for i in 0..x.len() {
            jac[i][i] += s * diag[i];
        }
        jac
    }

    /// Davidenko right-hand side `dx/dt = -H_x^{-1} ∂H/∂t`.
    fn flow(&self, x: &[Complex64], t: f64) -> Option<Vec<Complex64>> {
        let (g, _) = self.start.eval(x);
        let (f, _) = self.target.eval_scaled(x);
        let dt: Vec<Complex64> = (0..x.len()).map(|i| f[i] - self.gamma * g[i]).collect();
        let lu = Lu::new(&self.jacobian(x, t));
        let neg = lu.solve(&dt)?;
        Some(neg.iter().map(|v| -v).collect())
    }
}

fn add_scaled(x: &[Complex64], v: &[Complex64], h: f64) -> Vec<Complex64> {
    x.iter().zip(v).map(|(a, b)| a + b * h).collect()
}

/// Tracks one path from start root `k` to the endgame boundary and
/// refines the endpoint on the target system.
pub(crate) fn track_path(
    target: &TargetSystem<'_>,
    start: &StartSystem,
    gamma: Complex64,
    k: usize,
    cfg: &TrackerConfig,
) -> PathOutcome {
    let hom = Homotopy { target, start, gamma };
    let mut x = start.root(k);
    let mut t = 0.0f64;
    let t_final = 1.0 - cfg.endgame_offset;
    let t_check = 1.0 - (cfg.escape_window * cfg.endgame_offset).min(0.5);
    let mut check_norm: Option<f64> = None;
    let mut dt = cfg.initial_step;
    let mut streak = 0usize;

    while t < t_final - 1e-12 {
        if check_norm.is_none() && t < t_check {
            dt = dt.min(t_check - t);
        }
        dt = dt.min(t_final - t);
        let mut accepted = false;
        if let Some(x_pred) = rk4_predict(&hom, &x, t, dt) {
            if let Some(x_corr) = correct(&hom, x_pred, t + dt, cfg) {
                x = x_corr;
                t += dt;
                streak += 1;
                accepted = true;
                if linalg::vec_inf_norm(&x) > cfg.divergence_cutoff {
                    return PathOutcome::Diverged;
                }
                if check_norm.is_none() && t >= t_check - 1e-12 {
                    check_norm = Some(linalg::vec_norm(&x));
                }
                if streak >= cfg.growth_streak {
                    dt = (dt * cfg.step_growth).min(cfg.max_step);
                }
            }
        }
        if !accepted {
            streak = 0;
            dt *= 0.5;
            if dt < cfg.min_step {
                return PathOutcome::Failed;
            }
        }
    }

    // A path with a finite limit has flattened out by the endgame
    // window; an escaping one still grows like a power of 1/(1-t).
    if let Some(norm0) = check_norm {
        let growth = (1.0 + linalg::vec_norm(&x)) / (1.0 + norm0);
        if growth > cfg.escape_growth {
            return PathOutcome::Diverged;
        }
    }

    // Endgame: Newton on the target alone.
    let refined = newton::refine_system(target, &x, cfg.refine_iters, cfg.refine_tol, cfg.divergence_cutoff);
    let refined = match refined {
        Some(r) => r,
        None => return PathOutcome::Diverged,
    };
    let drift = linalg::vec_dist(&refined.point, &x);
    if drift > cfg.endgame_drift * (1.0 + linalg::vec_norm(&x)) {
        // The corrector left the tracked neighborhood entirely: the
        // path has no finite limit.
        return PathOutcome::Diverged;
    }
    PathOutcome::Finished {
        point: refined.point,
        residual: refined.residual,
        converged: refined.converged,
    }
}

fn rk4_predict(hom: &Homotopy<'_>, x: &[Complex64], t: f64, dt: f64) -> Option<Vec<Complex64>> {
    let k1 = hom.flow(x, t)?;
    let k2 = hom.flow(&add_scaled(x, &k1, dt / 2.0), t + dt / 2.0)?;
    let k3 = hom.flow(&add_scaled(x, &k2, dt / 2.0), t + dt / 2.0)?;
    let k4 = hom.flow(&add_scaled(x, &k3, dt), t + dt)?;
    let mut out = x.to_vec();
    for i in 0..x.len() {
        let slope = (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) / 6.0;
        out[i] += slope * dt;
        if !out[i].re.is_finite() || !out[i].im.is_finite() {
            return None;
        }
    }
    Some(out)
}

fn correct(
    hom: &Homotopy<'_>,
    mut x: Vec<Complex64>,
    t: f64,
    cfg: &TrackerConfig,
) -> Option<Vec<Complex64>> {
    for _ in 0..cfg.corrector_iters {
        let (residual, scale) = hom.residual(&x, t);
        if linalg::vec_norm(&residual) <= cfg.track_tol * scale.max(1.0) {
            return Some(x);
        }
        let lu = Lu::new(&hom.jacobian(&x, t));
        let step = lu.solve(&residual)?;
        for i in 0..x.len() {
            x[i] -= step[i];
            if !x[i].re.is_finite() || !x[i].im.is_finite() {
                return None;
            }
        }
    }
    let (residual, scale) = hom.residual(&x, t);
    if linalg::vec_norm(&residual) <= cfg.track_tol * scale.max(1.0) {
        Some(x)
    } else {
        None
    }
}

pub(crate) struct RawSolve {
    pub clusters: Vec<crate::solve::Cluster>,
    pub paths_tracked: usize,
    pub paths_diverged: usize,
    pub paths_on_divisor: usize,
    pub paths_failed: usize,
    pub endpoints_kept: usize,
    pub bezout: usize,
}

/// Tracks every total-degree path of `equations` and buckets the
/// outcomes. `on_divisor` decides whether a finished endpoint belongs
/// to the divisor rather than the solution set proper. Start data is
/// drawn from the given RNG stream of `cfg.seed` plus `salt`.
pub(crate) fn raw_solve(
    target: &TargetSystem<'_>,
    degrees: &[usize],
    on_divisor: &(dyn Fn(&[Complex64]) -> bool + Sync),
    cfg: &TrackerConfig,
    salt: u64,
) -> Result<RawSolve, SolveError> {
    for (index, equation) in target.equations.iter().enumerate() {
        if equation.is_zero() {
            return Err(SolveError::ZeroEquation { index });
        }
    }
    if degrees.iter().any(|&d| d == 0) {
        // Some equation is a nonzero constant: no solutions at all.
        return Ok(RawSolve {
            clusters: Vec::new(),
            paths_tracked: 0,
            paths_diverged: 0,
            paths_on_divisor: 0,
            paths_failed: 0,
            endpoints_kept: 0,
            bezout: 0,
        });
    }
    let bezout: usize = degrees.iter().product();
    if bezout > cfg.bezout_cap {
        return Err(SolveError::BezoutCapExceeded { bezout, cap: cfg.bezout_cap });
    }

    let mut rng = stream_rng(cfg.seed.wrapping_add(salt), streams::START_SYSTEM);
    let constants: Vec<Complex64> = degrees.iter().map(|_| sample_annulus(&mut rng)).collect();
    let gamma = Complex64::from_polar(1.0, rand::Rng::gen_range(&mut rng, 0.0..std::f64::consts::TAU));
    let start = StartSystem::new(degrees, constants);

    let outcomes: Vec<PathOutcome> = (0..bezout)
        .into_par_iter()
        .map(|k| track_path(target, &start, gamma, k, cfg))
        .collect();

    let mut diverged = 0usize;
    let mut on_div = 0usize;
    let mut failed = 0usize;
    let mut kept: Vec<Endpoint> = Vec::new();
    for outcome in outcomes {
        match outcome {
            PathOutcome::Diverged => diverged += 1,
            PathOutcome::Failed => failed += 1,
            PathOutcome::Finished { point, residual, converged } => {
                if on_divisor(&point) {
                    on_div += 1;
                } else if converged {
                    kept.push(Endpoint { point, residual });
                } else {
                    failed += 1;
                }
            }
        }
    }
    let endpoints_kept = kept.len();
    let clusters = cluster_endpoints(kept, cfg.cluster_radius);
    Ok(RawSolve {
        clusters,
        paths_tracked: bezout,
        paths_diverged: diverged,
        paths_on_divisor: on_div,
        paths_failed: failed,
        endpoints_kept,
        bezout,
    })
}

/// Full solve of the cleared critical-point system: track all paths,
/// discard divisor hits, cluster, and polish each representative on the
/// logarithmic derivative itself.
pub fn solve_total_degree(
    sys: &ClearedSystem,
    cfg: &TrackerConfig,
) -> Result<SolveReport, SolveError> {
    let mut master = sys.master().clone();
    master.set_divisor_threshold(cfg.divisor_threshold);
    let target = TargetSystem { equations: sys.equations(), jacobian: sys.jacobian() };
    let on_divisor =
        |x: &[Complex64]| master.divisor_proximity(x).1 < cfg.divisor_radius;
    let raw = raw_solve(&target, sys.degrees(), &on_divisor, cfg, 0)?;

    let mut points: Vec<CriticalPoint> = raw
        .clusters
        .iter()
        .map(|cluster| {
            let polished = newton::polish_log(&master, &cluster.representative, cfg);
            let nondegenerate = master
                .is_nondegenerate(&polished.point, cfg.nondegeneracy_tol)
                .unwrap_or(false);
            let condition = match master.log_jacobian(&polished.point) {
                Ok(jac) => linalg::condition_number(&jac),
                Err(_) => f64::INFINITY,
            };
            CriticalPoint {
                location: polished.point,
                residual: polished.residual,
                refined: polished.converged,
                nondegenerate,
                condition,
                cluster_size: cluster.members,
                local_degree: None,
            }
        })
        .collect();
    points.sort_by(|a, b| lexicographic(&a.location, &b.location));

    // Polishing can only merge clusters, never split them; merge any
    // representatives that converged together.
    let mut merged: Vec<CriticalPoint> = Vec::new();
    for point in points {
        match merged.last_mut() {
            Some(prev)
                if linalg::vec_dist(&prev.location, &point.location)
                    <= cfg.cluster_radius =>
            {
                prev.cluster_size += point.cluster_size;
                if point.residual < prev.residual {
                    let size = prev.cluster_size;
                    *prev = point;
                    prev.cluster_size = size;
                }
            }
            _ => merged.push(point),
        }
    }

    let report = SolveReport {
        seed: cfg.seed,
        bezout: raw.bezout,
        paths_tracked: raw.paths_tracked,
        paths_diverged: raw.paths_diverged,
        paths_on_divisor: raw.paths_on_divisor,
        paths_failed: raw.paths_failed,
        endpoints_kept: raw.endpoints_kept,
        points: merged,
        certified: raw.paths_failed == 0,
    };
    debug_assert!(report.conservation_holds());
    Ok(report)
}

/// Convenience entry: clear denominators and solve.
pub fn solve_master(
    mf: &MasterFunction,
    cfg: &TrackerConfig,
) -> Result<SolveReport, SolveError> {
    let sys = crate::solve::clear_denominators(mf);
    solve_total_degree(&sys, cfg)
}
