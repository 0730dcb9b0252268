//! Local topological degree of an isolated critical point, by counting
//! how many solutions a small generic perturbation splits it into.
//!
//! Around an isolated zero `p` of `d log φ`, the perturbed equations
//! `E_i = ε v_i ∏ f_J` (equivalently `d log φ = ε v`) have exactly
//! `deg_p` simple solutions inside a ball that isolates `p` from the
//! other critical points and from the divisor. Trials with independent
//! directions `v` must agree on the count.

use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;

use crate::linalg;
use crate::master::{sample_unit_vector, streams, stream_rng, MasterFunction};
use crate::poly::{univariate_roots, MPoly};
use crate::solve::tracker::{raw_solve, TargetSystem, TrackerConfig};
use crate::solve::{ClearedSystem, SolveError};

/// Directions probed per factor when estimating the distance to a
/// nonlinear divisor component.
const DIVISOR_PROBES: usize = 3;
/// Sphere samples used to set the perturbation scale.
const SCALE_SAMPLES: usize = 8;
/// The isolating radius never exceeds this, so the ball stays inside
/// the region where the perturbed solutions belong to `p` alone.
const MAX_RADIUS: f64 = 1.0;

/// Distance from `p` to the divisor: exact for linear factors, probed
/// along random lines for the rest (an upper bound that tightens with
/// more directions; adequate because only the order of magnitude
/// matters).
fn divisor_distance(mf: &MasterFunction, p: &[Complex64], rng: &mut ChaCha8Rng) -> f64 {
    let n = mf.dimension();
    let mut dist = f64::INFINITY;
    for factor in mf.factors() {
        if factor.degree() == 1 {
            let value = factor.complex().eval(p);
            let grad: Vec<Complex64> =
                factor.gradient().iter().map(|g| g.eval(p)).collect();
            let gnorm = linalg::vec_norm(&grad);
            if gnorm > 0.0 {
                dist = dist.min(value.norm() / gnorm);
            }
            continue;
        }
        for _ in 0..DIVISOR_PROBES {
            let u = sample_unit_vector(rng, n);
            let coeffs = factor.complex().restrict_to_line(p, &u);
            for root in univariate_roots(&coeffs) {
                dist = dist.min(root.norm());
            }
        }
    }
    dist
}

/// Local degree of the critical point `point`. `others` are the
/// remaining critical points, needed to size the isolating ball.
pub fn local_degree(
    sys: &ClearedSystem,
    point: &[Complex64],
    others: &[Vec<Complex64>],
    cfg: &TrackerConfig,
) -> Result<u32, SolveError> {
    let mut master = sys.master().clone();
    master.set_divisor_threshold(cfg.divisor_threshold);
    let n = master.dimension();
    let mut rng = stream_rng(cfg.seed, streams::LOCAL_DEGREE);

    let mut separation = f64::INFINITY;
    for other in others {
        let d = linalg::vec_dist(other, point);
        if d > 0.0 {
            separation = separation.min(d);
        }
    }
    let to_divisor = divisor_distance(&master, point, &mut rng);
    let radius = (0.5 * separation.min(to_divisor)).min(MAX_RADIUS);
    if !radius.is_finite() || radius <= 1e-8 {
        return Err(SolveError::IsolationFailure {
            detail: format!("isolating radius degenerated to {radius:.3e}"),
        });
    }

    // Perturbation size: a small fraction of the typical gradient
    // magnitude on the isolating sphere.
    let mut norms: Vec<f64> = Vec::with_capacity(SCALE_SAMPLES);
    for _ in 0..SCALE_SAMPLES {
        let u = sample_unit_vector(&mut rng, n);
        let x: Vec<Complex64> = point.iter().zip(&u).map(|(p, d)| p + d * radius).collect();
        if let Ok(phi) = master.log_derivative(&x) {
            norms.push(linalg::vec_norm(&phi));
        }
    }
    norms.sort_by(f64::total_cmp);
    let gradient_scale = norms.get(norms.len() / 2).copied().unwrap_or(0.0);
    if gradient_scale <= 0.0 || !gradient_scale.is_finite() {
        return Err(SolveError::IsolationFailure {
            detail: "gradient scale on the isolating sphere vanished".into(),
        });
    }
    let epsilon = cfg.local_degree_epsilon * gradient_scale;

    let on_divisor =
        |x: &[Complex64]| master.divisor_proximity(x).1 < cfg.divisor_radius;
    let mut counts = Vec::with_capacity(cfg.local_degree_trials);
    for trial in 0..cfg.local_degree_trials {
        let v = sample_unit_vector(&mut rng, n);
        let equations: Vec<MPoly<Complex64>> = sys
            .equations()
            .iter()
            .zip(&v)
            .map(|(e, vi)| e.sub(&sys.full_product().scale(&(vi * epsilon))))
            .collect();
        let jacobian: Vec<Vec<MPoly<Complex64>>> = equations
            .iter()
            .map(|e| (0..n).map(|j| e.partial_deriv(j)).collect())
            .collect();
        let degrees: Vec<usize> = equations.iter().map(MPoly::total_degree).collect();
        let target = TargetSystem { equations: &equations, jacobian: &jacobian };
        let raw = raw_solve(&target, &degrees, &on_divisor, cfg, 1000 + trial as u64)?;
        let inside = raw
            .clusters
            .iter()
            .filter(|c| linalg::vec_dist(&c.representative, point) < radius)
            .count();
        counts.push(inside);
    }

    let first = counts[0];
    if first > 0 && counts.iter().all(|&c| c == first) {
        Ok(first as u32)
    } else {
        Err(SolveError::DegreeAmbiguous { counts })
    }
}
