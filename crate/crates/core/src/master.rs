//! Master functions `φ = ∏_I f_I^{λ_I}` and their logarithmic
//! derivatives.
//!
//! The factors are polynomials with rational coefficients; gradients and
//! Hessians are differentiated exactly and only then converted to
//! floating complex polynomials for evaluation. Every evaluation guards
//! against points too close to the divisor `∏ f_I = 0`, where the
//! logarithmic derivative blows up.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::fmt;

use crate::arrangement::Hyperplane;
use crate::linalg;
use crate::poly::MPoly;
use crate::rational::Rat;

/// Default relative distance to a factor's zero set below which a point
/// counts as lying on the divisor.
pub const DEFAULT_DIVISOR_THRESHOLD: f64 = 1e-10;

/// RNG stream ids; every randomized routine in the crate draws from its
/// own stream of the run seed so subsystems stay independent.
pub mod streams {
    pub const EXPONENTS: u64 = 1;
    pub const START_SYSTEM: u64 = 2;
    pub const ORACLE: u64 = 3;
    pub const LOCAL_DEGREE: u64 = 4;
    pub const IDENTITY_CHECK: u64 = 5;
}

pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MasterError {
    EmptyProduct,
    ZeroFactor { index: usize },
    ConstantFactor { index: usize },
    VariableCount { index: usize, expected: usize, found: usize },
    ExponentCount { expected: usize, found: usize },
}

impl fmt::Display for MasterError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MasterError::EmptyProduct => write!(f, "master function needs at least one factor"),
            MasterError::ZeroFactor { index } => {
                write!(f, "factor {index} is the zero polynomial")
            }
            MasterError::ConstantFactor { index } => {
                write!(f, "factor {index} is constant")
            }
            MasterError::VariableCount { index, expected, found } => write!(
                f,
                "factor {index} uses {found} variables, expected {expected}"
            ),
            MasterError::ExponentCount { expected, found } => {
                write!(f, "{found} exponents for {expected} factors")
            }
        }
    }
}

impl std::error::Error for MasterError {}

/// Evaluation failed because the point sits on or too near the divisor.
#[derive(Debug, Clone, PartialEq)]
pub enum EvalError {
    DivisorContact { factor: usize, relative_distance: f64, threshold: f64 },
}

impl fmt::Display for EvalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvalError::DivisorContact { factor, relative_distance, threshold } => write!(
                f,
                "factor {factor} is at relative distance {relative_distance:.3e}, \
                 below divisor threshold {threshold:.3e}"
            ),
        }
    }
}

impl std::error::Error for EvalError {}

/// One factor of the product, with exactly differentiated gradient and
/// Hessian, cached in complex form for evaluation.
#[derive(Debug, Clone)]
pub struct Hypersurface {
    poly: MPoly<Rat>,
    complex: MPoly<Complex64>,
    gradient: Vec<MPoly<Complex64>>,
    hessian: Vec<Vec<MPoly<Complex64>>>,
    degree: usize,
}

impl Hypersurface {
    pub fn new(poly: MPoly<Rat>) -> Result<Self, MasterError> {
        if poly.is_zero() {
            return Err(MasterError::ZeroFactor { index: 0 });
        }
        if poly.total_degree() == 0 {
            return Err(MasterError::ConstantFactor { index: 0 });
        }
        let n = poly.n_vars();
        let gradient_exact: Vec<MPoly<Rat>> = (0..n).map(|i| poly.partial_deriv(i)).collect();
        let mut hessian = vec![vec![MPoly::zero(n); n]; n];
        for i in 0..n {
            for j in i..n {
                let second = gradient_exact[i].partial_deriv(j).to_complex();
                hessian[i][j] = second.clone();
                hessian[j][i] = second;
            }
        }
        let gradient = gradient_exact.iter().map(MPoly::to_complex).collect();
        let degree = poly.total_degree();
        let complex = poly.to_complex();
        Ok(Hypersurface { poly, complex, gradient, hessian, degree })
    }

    pub fn from_hyperplane(h: &Hyperplane) -> Self {
        Hypersurface::new(h.to_poly()).expect("hyperplane polynomial is nonconstant")
    }

    pub fn poly(&self) -> &MPoly<Rat> {
        &self.poly
    }

    pub fn complex(&self) -> &MPoly<Complex64> {
        &self.complex
    }

    pub fn gradient(&self) -> &[MPoly<Complex64>] {
        &self.gradient
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn n_vars(&self) -> usize {
        self.poly.n_vars()
    }
}

#[derive(Debug, Clone)]
pub struct MasterFunction {
    dimension: usize,
    factors: Vec<Hypersurface>,
    exponents: Vec<Complex64>,
    divisor_threshold: f64,
}

impl MasterFunction {
    pub fn new(
        dimension: usize,
        factors: Vec<Hypersurface>,
        exponents: Vec<Complex64>,
    ) -> Result<Self, MasterError> {
        if factors.is_empty() {
            return Err(MasterError::EmptyProduct);
        }
        for (index, f) in factors.iter().enumerate() {
            if f.n_vars() != dimension {
                return Err(MasterError::VariableCount {
                    index,
                    expected: dimension,
                    found: f.n_vars(),
                });
            }
        }
        if exponents.len() != factors.len() {
            return Err(MasterError::ExponentCount {
                expected: factors.len(),
                found: exponents.len(),
            });
        }
        Ok(MasterFunction {
            dimension,
            factors,
            exponents,
            divisor_threshold: DEFAULT_DIVISOR_THRESHOLD,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn factors(&self) -> &[Hypersurface] {
        &self.factors
    }

    pub fn exponents(&self) -> &[Complex64] {
        &self.exponents
    }

    pub fn divisor_threshold(&self) -> f64 {
        self.divisor_threshold
    }

    pub fn set_divisor_threshold(&mut self, threshold: f64) {
        assert!(threshold > 0.0 && threshold < 1.0);
        self.divisor_threshold = threshold;
    }

    /// The exponent forced on the hyperplane at infinity by the others:
    /// minus the degree-weighted sum. Generic exponent vectors keep it
    /// away from zero.
    pub fn infinity_exponent(&self) -> Complex64 {
        -self
            .factors
            .iter()
            .zip(&self.exponents)
            .map(|(f, lambda)| lambda * f.degree() as f64)
            .sum::<Complex64>()
    }

    /// Values of all factors at `x`, with their evaluation scales.
    pub fn factor_values(&self, x: &[Complex64]) -> Vec<(Complex64, f64)> {
        self.factors.iter().map(|f| f.complex.eval_with_scale(x)).collect()
    }

    /// First-order estimate of the distance from `x` to the zero set of
    /// factor `index`: `|f(x)| / ‖∇f(x)‖`, divided by `max(1, ‖x‖)` so
    /// the answer is scale-free. A vanishing gradient away from the zero
    /// set gives infinity; on the zero set itself, zero.
    fn factor_proximity(&self, index: usize, x: &[Complex64], point_scale: f64) -> f64 {
        let factor = &self.factors[index];
        let value = factor.complex.eval(x).norm();
        let grad_sq: f64 = factor.gradient.iter().map(|g| g.eval(x).norm_sqr()).sum();
        if grad_sq > 0.0 {
            value / (grad_sq.sqrt() * point_scale)
        } else if value == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    }

    /// Smallest relative divisor distance at `x` and which factor
    /// attains it. Zero means the point lies exactly on the divisor.
    pub fn divisor_proximity(&self, x: &[Complex64]) -> (usize, f64) {
        let point_scale = linalg::vec_norm(x).max(1.0);
        let mut best = (0usize, f64::INFINITY);
        for index in 0..self.factors.len() {
            let rel = self.factor_proximity(index, x, point_scale);
            if rel < best.1 {
                best = (index, rel);
            }
        }
        best
    }

    fn checked_factor_values(&self, x: &[Complex64]) -> Result<Vec<Complex64>, EvalError> {
        let point_scale = linalg::vec_norm(x).max(1.0);
        let mut values = Vec::with_capacity(self.factors.len());
        for (index, factor) in self.factors.iter().enumerate() {
            let rel = self.factor_proximity(index, x, point_scale);
            if rel < self.divisor_threshold {
                return Err(EvalError::DivisorContact {
                    factor: index,
                    relative_distance: rel,
                    threshold: self.divisor_threshold,
                });
            }
            values.push(factor.complex.eval(x));
        }
        Ok(values)
    }

    /// Components of `d log φ` at `x`: `Σ_I λ_I ∂_i f_I / f_I`.
    pub fn log_derivative(&self, x: &[Complex64]) -> Result<Vec<Complex64>, EvalError> {
        Ok(self.log_derivative_scaled(x)?.0)
    }

    /// Logarithmic derivative together with the Euclidean norm of the
    /// vector of per-component magnitude sums, the natural scale for
    /// judging how small a residual is.
    pub fn log_derivative_scaled(
        &self,
        x: &[Complex64],
    ) -> Result<(Vec<Complex64>, f64), EvalError> {
        let values = self.checked_factor_values(x)?;
        let mut deriv = vec![Complex64::new(0.0, 0.0); self.dimension];
        let mut scale_sq = 0.0f64;
        for i in 0..self.dimension {
            let mut component_scale = 0.0f64;
            for (k, (factor, value)) in self.factors.iter().zip(&values).enumerate() {
                let term = self.exponents[k] * factor.gradient[i].eval(x) / value;
                deriv[i] += term;
                component_scale += term.norm();
            }
            scale_sq += component_scale * component_scale;
        }
        Ok((deriv, scale_sq.sqrt()))
    }

    /// Jacobian of the logarithmic derivative (the Hessian of `log φ`):
    /// `Σ_I λ_I (∂_i∂_j f_I / f_I - ∂_i f_I ∂_j f_I / f_I²)`.
    /// Symmetric by construction; the upper triangle is mirrored.
    pub fn log_jacobian(&self, x: &[Complex64]) -> Result<Vec<Vec<Complex64>>, EvalError> {
        let values = self.checked_factor_values(x)?;
        let n = self.dimension;
        let mut jac = vec![vec![Complex64::new(0.0, 0.0); n]; n];
        for (k, factor) in self.factors.iter().enumerate() {
            let lambda = self.exponents[k];
            let value = values[k];
            let grad: Vec<Complex64> = (0..n).map(|i| factor.gradient[i].eval(x)).collect();
            for i in 0..n {
                for j in i..n {
                    let second = factor.hessian[i][j].eval(x);
                    let term = lambda * (second / value - grad[i] * grad[j] / (value * value));
                    jac[i][j] += term;
                }
            }
        }
        for i in 0..n {
            for j in 0..i {
                jac[i][j] = jac[j][i];
            }
        }
        Ok(jac)
    }

    /// True when the critical point at `x` is nondegenerate: the
    /// determinant of the log Jacobian is not negligible against the
    /// matrix magnitude.
    pub fn is_nondegenerate(&self, x: &[Complex64], tol: f64) -> Result<bool, EvalError> {
        let jac = self.log_jacobian(x)?;
        let norm = linalg::inf_norm(&jac).max(1.0);
        let det = linalg::det(&jac);
        Ok(det.norm() > tol * norm.powi(self.dimension as i32))
    }

    /// A single-valued branch of `φ` near the anchor values `base`: each
    /// factor contributes `λ_I (log f_I(anchor) + Log(f_I(x)/f_I(anchor)))`,
    /// so the branch follows `φ` continuously as long as no factor moves
    /// far around its anchor value.
    fn branch_at(
        &self,
        x: &[Complex64],
        base_values: &[Complex64],
        base_logs: &[Complex64],
    ) -> Result<Complex64, EvalError> {
        let values = self.checked_factor_values(x)?;
        let mut log_phi = Complex64::new(0.0, 0.0);
        for (k, value) in values.iter().enumerate() {
            log_phi += self.exponents[k] * (base_logs[k] + (value / base_values[k]).ln());
        }
        Ok(log_phi.exp())
    }

    /// Worst relative defect, over all index pairs, of the second
    /// derivative identity `∂_i ∂_j φ = φ (J_ij + ℓ_i ℓ_j)`, where `ℓ`
    /// is the logarithmic derivative and `J` its Jacobian. The left side
    /// is measured by central differences of a local branch of `φ`, so
    /// the whole finite-difference stencil must stay off the divisor.
    pub fn hessian_identity_defect(&self, x: &[Complex64], step: f64) -> Result<f64, EvalError> {
        assert!(step > 0.0);
        let n = self.dimension;
        let ell = self.log_derivative(x)?;
        let jac = self.log_jacobian(x)?;
        let base_values = self.checked_factor_values(x)?;
        let base_logs: Vec<Complex64> = base_values.iter().map(|v| v.ln()).collect();
        let branch = |z: &[Complex64]| self.branch_at(z, &base_values, &base_logs);
        let shifted = |i: usize, si: f64, j: usize, sj: f64| {
            let mut z = x.to_vec();
            z[i] += Complex64::new(si * step, 0.0);
            z[j] += Complex64::new(sj * step, 0.0);
            z
        };
        let phi0 = branch(x)?;
        let mut worst = 0.0f64;
        let mut scale = phi0.norm().max(1e-300);
        for i in 0..n {
            for j in i..n {
                let fd = if i == j {
                    let plus = branch(&shifted(i, 1.0, i, 0.0))?;
                    let minus = branch(&shifted(i, -1.0, i, 0.0))?;
                    (plus - 2.0 * phi0 + minus) / (step * step)
                } else {
                    let pp = branch(&shifted(i, 1.0, j, 1.0))?;
                    let pm = branch(&shifted(i, 1.0, j, -1.0))?;
                    let mp = branch(&shifted(i, -1.0, j, 1.0))?;
                    let mm = branch(&shifted(i, -1.0, j, -1.0))?;
                    (pp - pm - mp + mm) / (4.0 * step * step)
                };
                let rhs = phi0 * (jac[i][j] + ell[i] * ell[j]);
                worst = worst.max((fd - rhs).norm());
                scale = scale.max(rhs.norm());
            }
        }
        Ok(worst / scale)
    }
}

/// Draws one exponent per factor from the annulus `0.5 <= |λ| <= 2.0`
/// with uniform phase, retrying until the degree-weighted sum stays
/// away from zero so the exponent at infinity is itself generic.
pub fn sample_generic_exponents(degrees: &[usize], seed: u64) -> Vec<Complex64> {
    let mut rng = stream_rng(seed, streams::EXPONENTS);
    loop {
        let lambdas: Vec<Complex64> = degrees.iter().map(|_| sample_annulus(&mut rng)).collect();
        let weighted: Complex64 = degrees
            .iter()
            .zip(&lambdas)
            .map(|(&d, l)| l * d as f64)
            .sum();
        if weighted.norm() >= 0.25 {
            return lambdas;
        }
    }
}

pub fn sample_annulus(rng: &mut ChaCha8Rng) -> Complex64 {
    let radius = rng.gen_range(0.5..=2.0);
    let angle = rng.gen_range(0.0..std::f64::consts::TAU);
    Complex64::from_polar(radius, angle)
}

pub fn sample_unit_vector(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
    loop {
        let v: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let norm = linalg::vec_norm(&v);
        if norm > 1e-3 {
            return v.iter().map(|z| z / norm).collect();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::MPoly;
    use crate::rational::rat_int;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// x(x-1) with unit exponents: the two-point master function on the
    /// line, critical point at 1/2.
    fn two_points() -> MasterFunction {
        let f1 = Hypersurface::new(MPoly::from_terms(1, [(vec![1], rat_int(1))])).unwrap();
        let f2 = Hypersurface::new(MPoly::from_terms(
            1,
            [(vec![1], rat_int(1)), (vec![0], rat_int(-1))],
        ))
        .unwrap();
        MasterFunction::new(1, vec![f1, f2], vec![c(1.0, 0.0), c(1.0, 0.0)]).unwrap()
    }

    #[test]
    fn log_derivative_matches_partial_fractions() {
        let mf = two_points();
        let x = [c(0.25, 0.5)];
        let deriv = mf.log_derivative(&x).unwrap();
        // 1/x + 1/(x-1)
        let expected = 1.0 / x[0] + 1.0 / (x[0] - c(1.0, 0.0));
        assert!((deriv[0] - expected).norm() < 1e-13);
        // Critical point at 1/2.
        let at_half = mf.log_derivative(&[c(0.5, 0.0)]).unwrap();
        assert!(at_half[0].norm() < 1e-14);
    }

    #[test]
    fn log_jacobian_at_interior_critical_point() {
        let mf = two_points();
        let jac = mf.log_jacobian(&[c(0.5, 0.0)]).unwrap();
        // -1/x^2 - 1/(x-1)^2 = -8 at x = 1/2.
        assert!((jac[0][0] - c(-8.0, 0.0)).norm() < 1e-12);
        assert!(mf.is_nondegenerate(&[c(0.5, 0.0)], 1e-8).unwrap());
    }

    #[test]
    fn divisor_contact_is_an_error() {
        let mf = two_points();
        let err = mf.log_derivative(&[c(1.0, 1e-13)]).unwrap_err();
        match err {
            EvalError::DivisorContact { factor, relative_distance, .. } => {
                assert_eq!(factor, 1);
                assert!(relative_distance < 1e-10);
            }
        }
        let (factor, rel) = mf.divisor_proximity(&[c(0.0, 0.0)]);
        assert_eq!(factor, 0);
        assert_eq!(rel, 0.0);
    }

    #[test]
    fn quadric_master_function_is_isotropic_at_origin() {
        // f = x^2 + y^2 + 1, λ = 1: log Jacobian at 0 is 2·Id.
        let f = Hypersurface::new(MPoly::from_terms(
            2,
            [
                (vec![2, 0], rat_int(1)),
                (vec![0, 2], rat_int(1)),
                (vec![0, 0], rat_int(1)),
            ],
        ))
        .unwrap();
        let mf = MasterFunction::new(2, vec![f], vec![c(1.0, 0.0)]).unwrap();
        let origin = [c(0.0, 0.0), c(0.0, 0.0)];
        assert!(linalg::vec_norm(&mf.log_derivative(&origin).unwrap()) < 1e-15);
        let jac = mf.log_jacobian(&origin).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let expected = if i == j { c(2.0, 0.0) } else { c(0.0, 0.0) };
                assert!((jac[i][j] - expected).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn cubic_origin_is_degenerate() {
        // f = x^3 + y^3 + 1, λ = 1: the origin is critical but the log
        // Jacobian vanishes there.
        let f = Hypersurface::new(MPoly::from_terms(
            2,
            [
                (vec![3, 0], rat_int(1)),
                (vec![0, 3], rat_int(1)),
                (vec![0, 0], rat_int(1)),
            ],
        ))
        .unwrap();
        let mf = MasterFunction::new(2, vec![f], vec![c(1.0, 0.0)]).unwrap();
        let origin = [c(0.0, 0.0), c(0.0, 0.0)];
        assert!(!mf.is_nondegenerate(&origin, 1e-8).unwrap());
        assert_eq!(mf.infinity_exponent(), c(-3.0, 0.0));
    }

    #[test]
    fn validation_rejects_malformed_input() {
        let f = Hypersurface::new(MPoly::from_terms(1, [(vec![1], rat_int(1))])).unwrap();
        assert!(matches!(
            MasterFunction::new(1, vec![], vec![]),
            Err(MasterError::EmptyProduct)
        ));
        assert!(matches!(
            MasterFunction::new(1, vec![f.clone()], vec![]),
            Err(MasterError::ExponentCount { .. })
        ));
        assert!(matches!(
            MasterFunction::new(2, vec![f], vec![c(1.0, 0.0)]),
            Err(MasterError::VariableCount { .. })
        ));
        assert!(matches!(
            Hypersurface::new(MPoly::zero(2)),
            Err(MasterError::ZeroFactor { .. })
        ));
        assert!(matches!(
            Hypersurface::new(MPoly::constant(2, rat_int(5))),
            Err(MasterError::ConstantFactor { .. })
        ));
    }

    #[test]
    fn second_derivative_identity_survives_finite_differences() {
        let mf = two_points();
        for x in [c(0.3, 0.2), c(-1.4, 0.9), c(2.5, -0.6)] {
            let defect = mf.hessian_identity_defect(&[x], 1e-4).unwrap();
            assert!(defect < 1e-6, "defect {defect:.3e} at {x}");
        }
    }

    #[test]
    fn generic_exponents_live_in_annulus_and_are_reproducible() {
        let degrees = [1usize, 1, 2];
        let a = sample_generic_exponents(&degrees, 7);
        let b = sample_generic_exponents(&degrees, 7);
        let c = sample_generic_exponents(&degrees, 8);
        assert_eq!(a, b);
        assert_ne!(a, c);
        for lambda in &a {
            assert!(lambda.norm() >= 0.5 && lambda.norm() <= 2.0);
        }
        let weighted: Complex64 = degrees
            .iter()
            .zip(&a)
            .map(|(&d, l)| l * d as f64)
            .sum();
        assert!(weighted.norm() >= 0.25);
    }
}
