//! Critical-point solving: clearing denominators, total-degree homotopy
//! continuation, Newton refinement, a multistart oracle, and local
//! topological degrees.

pub mod degree;
pub mod newton;
pub mod tracker;

pub use degree::local_degree;
pub use newton::{multistart_oracle, same_point_sets, OracleReport};
pub use tracker::{solve_master, solve_total_degree, TrackerConfig};

use num_complex::Complex64;
use rand::Rng;
use std::fmt;

use crate::linalg;
use crate::master::{streams, stream_rng, MasterFunction};
use crate::poly::MPoly;
use crate::rational::Rat;

#[derive(Debug, Clone, PartialEq)]
pub enum SolveError {
    /// An equation of the cleared system is identically zero: the
    /// critical set cannot be isolated points.
    ZeroEquation { index: usize },
    BezoutCapExceeded { bezout: usize, cap: usize },
    /// Local degree trials disagreed or found nothing.
    DegreeAmbiguous { counts: Vec<usize> },
    /// No isolating ball could be built around the point.
    IsolationFailure { detail: String },
}

impl fmt::Display for SolveError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolveError::ZeroEquation { index } => {
                write!(f, "cleared equation {index} is identically zero")
            }
            SolveError::BezoutCapExceeded { bezout, cap } => {
                write!(f, "start-system size {bezout} exceeds cap {cap}")
            }
            SolveError::DegreeAmbiguous { counts } => {
                write!(f, "perturbation trials disagree on the local degree: {counts:?}")
            }
            SolveError::IsolationFailure { detail } => {
                write!(f, "cannot isolate the point: {detail}")
            }
        }
    }
}

impl std::error::Error for SolveError {}

/// The critical-point equations with denominators cleared:
/// `E_i = Σ_I λ_I (∂_i f_I) ∏_{J≠I} f_J`,
/// polynomial equations whose off-divisor zeros are exactly the
/// critical points of the master function.
#[derive(Debug, Clone)]
pub struct ClearedSystem {
    dimension: usize,
    equations: Vec<MPoly<Complex64>>,
    jacobian: Vec<Vec<MPoly<Complex64>>>,
    degrees: Vec<usize>,
    full_product: MPoly<Complex64>,
    master: MasterFunction,
}

impl ClearedSystem {
    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn equations(&self) -> &[MPoly<Complex64>] {
        &self.equations
    }

    pub fn jacobian(&self) -> &[Vec<MPoly<Complex64>>] {
        &self.jacobian
    }

    /// Total degree of each equation; zero for a constant equation.
    pub fn degrees(&self) -> &[usize] {
        &self.degrees
    }

    /// The product of all factors, the cleared denominator.
    pub fn full_product(&self) -> &MPoly<Complex64> {
        &self.full_product
    }

    pub fn master(&self) -> &MasterFunction {
        &self.master
    }

    pub fn eval(&self, x: &[Complex64]) -> Vec<Complex64> {
        self.equations.iter().map(|e| e.eval(x)).collect()
    }

    /// Spot-checks `E_i = (d log φ)_i · ∏ f_J` at random off-divisor
    /// points. Returns the worst relative defect seen.
    pub fn identity_defect(&self, seed: u64, samples: usize) -> f64 {
        let mut rng = stream_rng(seed, streams::IDENTITY_CHECK);
        let n = self.dimension;
        let mut worst = 0.0f64;
        let mut checked = 0usize;
        while checked < samples {
            let x: Vec<Complex64> = (0..n)
                .map(|_| Complex64::new(rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5)))
                .collect();
            if self.master.divisor_proximity(&x).1 < 1e-6 {
                continue;
            }
            checked += 1;
            let log_deriv = self
                .master
                .log_derivative(&x)
                .expect("point checked against divisor");
            let (product, product_scale) = self.full_product.eval_with_scale(&x);
            for (i, equation) in self.equations.iter().enumerate() {
                let (lhs, lhs_scale) = equation.eval_with_scale(&x);
                let rhs = log_deriv[i] * product;
                let scale = lhs_scale.max(log_deriv[i].norm() * product_scale).max(1.0);
                worst = worst.max((lhs - rhs).norm() / scale);
            }
        }
        worst
    }
}

/// Builds the cleared system. Products and derivatives are formed in
/// exact rational arithmetic; the exponents enter only in the final
/// complex combination.
pub fn clear_denominators(mf: &MasterFunction) -> ClearedSystem {
    let n = mf.dimension();
    let m = mf.factors().len();
    let polys: Vec<&MPoly<Rat>> = mf.factors().iter().map(|f| f.poly()).collect();

    // prefix[i] = f_0 ⋯ f_{i-1}, suffix[i] = f_{i+1} ⋯ f_{m-1}.
    let one = MPoly::constant(n, Rat::from_integer(1.into()));
    let mut prefix = vec![one.clone(); m + 1];
    for i in 0..m {
        prefix[i + 1] = prefix[i].mul(polys[i]);
    }
    let mut suffix = vec![one.clone(); m + 1];
    for i in (0..m).rev() {
        suffix[i] = suffix[i + 1].mul(polys[i]);
    }
    let full_product = prefix[m].to_complex();

    let mut equations = Vec::with_capacity(n);
    for i in 0..n {
        let mut equation = MPoly::zero(n);
        for (k, poly) in polys.iter().enumerate() {
            let term = poly.partial_deriv(i).mul(&prefix[k]).mul(&suffix[k + 1]);
            equation = equation.add(&term.to_complex().scale(&mf.exponents()[k]));
        }
        equations.push(equation);
    }

    let jacobian = equations
        .iter()
        .map(|e| (0..n).map(|j| e.partial_deriv(j)).collect())
        .collect();
    let degrees = equations.iter().map(MPoly::total_degree).collect();

    ClearedSystem {
        dimension: n,
        equations,
        jacobian,
        degrees,
        full_product,
        master: mf.clone(),
    }
}

/// One isolated critical point as certified by the solver.
#[derive(Debug, Clone, PartialEq)]
pub struct CriticalPoint {
    pub location: Vec<Complex64>,
    /// Euclidean norm of the logarithmic derivative at `location`.
    pub residual: f64,
    /// Whether the refinement loop reached its scaled tolerance.
    pub refined: bool,
    pub nondegenerate: bool,
    /// Condition number of the log Jacobian; infinite when singular.
    pub condition: f64,
    /// How many homotopy paths (or oracle runs) ended here.
    pub cluster_size: usize,
    /// Local topological degree, when computed. Nondegenerate points
    /// have degree 1 without further work.
    pub local_degree: Option<u32>,
}

/// Outcome of the homotopy solve, with exact path accounting:
/// `paths_tracked = endpoints_kept + diverged + on_divisor + failed`.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub seed: u64,
    pub bezout: usize,
    pub paths_tracked: usize,
    pub paths_diverged: usize,
    pub paths_on_divisor: usize,
    pub paths_failed: usize,
    /// Raw off-divisor converged endpoints, before clustering.
    pub endpoints_kept: usize,
    pub points: Vec<CriticalPoint>,
    /// True when no path failed outright.
    pub certified: bool,
}

impl SolveReport {
    pub fn count(&self) -> usize {
        self.points.len()
    }

    /// Sum of local degrees; `None` until every point carries one.
    pub fn degree_sum(&self) -> Option<i64> {
        self.points
            .iter()
            .map(|p| p.local_degree.map(i64::from))
            .sum()
    }

    pub fn conservation_holds(&self) -> bool {
        self.paths_tracked
            == self.endpoints_kept
                + self.paths_diverged
                + self.paths_on_divisor
                + self.paths_failed
    }
}

/// A raw endpoint with its residual on the cleared system.
#[derive(Debug, Clone)]
pub(crate) struct Endpoint {
    pub point: Vec<Complex64>,
    pub residual: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct Cluster {
    pub representative: Vec<Complex64>,
    pub residual: f64,
    pub members: usize,
}

/// Groups endpoints lying within `radius` of each other, keeping the
/// member with the smallest residual as representative. Endpoints are
/// sorted first so the grouping does not depend on arrival order.
pub(crate) fn cluster_endpoints(mut endpoints: Vec<Endpoint>, radius: f64) -> Vec<Cluster> {
    endpoints.sort_by(|a, b| lexicographic(&a.point, &b.point));
    let mut clusters: Vec<Cluster> = Vec::new();
    for endpoint in endpoints {
        let nearest = clusters
            .iter_mut()
            .map(|c| (linalg::vec_dist(&c.representative, &endpoint.point), c))
            .min_by(|a, b| a.0.total_cmp(&b.0));
        match nearest {
            Some((dist, cluster)) if dist <= radius => {
                cluster.members += 1;
                if endpoint.residual < cluster.residual {
                    cluster.representative = endpoint.point;
                    cluster.residual = endpoint.residual;
                }
            }
            _ => clusters.push(Cluster {
                representative: endpoint.point,
                residual: endpoint.residual,
                members: 1,
            }),
        }
    }
    clusters
}

pub(crate) fn lexicographic(a: &[Complex64], b: &[Complex64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        let ord = x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im));
        if ord != std::cmp::Ordering::Equal {
            return ord;
        }
    }
    std::cmp::Ordering::Equal
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::master::{sample_generic_exponents, Hypersurface};
    use crate::rational::rat_int;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn linear(coeffs: &[i64], offset: i64) -> MPoly<Rat> {
        let n = coeffs.len();
        let mut terms: Vec<(Vec<u16>, Rat)> = Vec::new();
        for (i, &a) in coeffs.iter().enumerate() {
            let mut e = vec![0u16; n];
            e[i] = 1;
            terms.push((e, rat_int(a)));
        }
        terms.push((vec![0u16; n], rat_int(offset)));
        MPoly::from_terms(n, terms)
    }

    fn three_lines() -> MasterFunction {
        let factors = vec![
            Hypersurface::new(linear(&[1, 0], 0)).unwrap(),
            Hypersurface::new(linear(&[0, 1], 0)).unwrap(),
            Hypersurface::new(linear(&[1, 1], -1)).unwrap(),
        ];
        let lambdas = sample_generic_exponents(&[1, 1, 1], 11);
        MasterFunction::new(2, factors, lambdas).unwrap()
    }

    #[test]
    fn cleared_system_degrees_and_identity() {
        let mf = three_lines();
        let sys = clear_denominators(&mf);
        // Three lines: each equation has degree m - 1 = 2.
        assert_eq!(sys.degrees(), &[2, 2]);
        assert_eq!(sys.full_product().total_degree(), 3);
        assert!(sys.identity_defect(5, 25) < 1e-10);
    }

    #[test]
    fn cleared_system_vanishes_on_deep_flats() {
        // Every point where two or more factors vanish solves the
        // cleared equations identically; here the pairwise intersection
        // points of the three lines.
        let mf = three_lines();
        let sys = clear_denominators(&mf);
        for point in [
            [c(0.0, 0.0), c(0.0, 0.0)],
            [c(0.0, 0.0), c(1.0, 0.0)],
            [c(1.0, 0.0), c(0.0, 0.0)],
        ] {
            let values = sys.eval(&point);
            assert!(values.iter().all(|v| v.norm() < 1e-14), "at {point:?}: {values:?}");
        }
    }

    #[test]
    fn single_factor_system_is_scaled_gradient() {
        // One factor: E_i = λ ∂_i f.
        let f = MPoly::from_terms(
            2,
            [
                (vec![3, 0], rat_int(1)),
                (vec![0, 3], rat_int(1)),
                (vec![0, 0], rat_int(1)),
            ],
        );
        let lambda = c(0.8, 0.4);
        let mf = MasterFunction::new(2, vec![Hypersurface::new(f).unwrap()], vec![lambda])
            .unwrap();
        let sys = clear_denominators(&mf);
        assert_eq!(sys.degrees(), &[2, 2]);
        let x = [c(1.2, -0.3), c(0.4, 0.9)];
        let expected = lambda * 3.0 * x[0] * x[0];
        assert!((sys.eval(&x)[0] - expected).norm() < 1e-12);
    }

    #[test]
    fn clustering_groups_and_keeps_best_residual() {
        let endpoints = vec![
            Endpoint { point: vec![c(1.0, 0.0)], residual: 1e-9 },
            Endpoint { point: vec![c(1.0 + 1e-8, 0.0)], residual: 1e-12 },
            Endpoint { point: vec![c(2.0, 0.0)], residual: 1e-10 },
        ];
        let clusters = cluster_endpoints(endpoints, 1e-6);
        assert_eq!(clusters.len(), 2);
        assert_eq!(clusters[0].members, 2);
        assert!((clusters[0].residual - 1e-12).abs() < 1e-20);
        assert_eq!(clusters[1].members, 1);
    }

    #[test]
    fn clustering_is_order_independent_on_chains() {
        // Three collinear points, adjacent pairs within radius: sorted
        // processing yields the same grouping regardless of input order.
        let mk = |x: f64, r: f64| Endpoint { point: vec![c(x, 0.0)], residual: r };
        let forward = cluster_endpoints(
            vec![mk(0.0, 1e-9), mk(5e-7, 1e-9), mk(2.0, 1e-9)],
            1e-6,
        );
        let backward = cluster_endpoints(
            vec![mk(2.0, 1e-9), mk(5e-7, 1e-9), mk(0.0, 1e-9)],
            1e-6,
        );
        assert_eq!(forward.len(), backward.len());
        assert_eq!(forward.len(), 2);
    }
}
