//! Sparse multivariate polynomials.
//!
//! Coefficients are generic so the same structure serves exact rational
//! work (symbolic differentiation, products of defining equations) and
//! floating complex evaluation. Exponent vectors are the map keys, so
//! term order is deterministic.

use num_complex::Complex64;
use num_traits::{FromPrimitive, Zero};
use std::collections::BTreeMap;

use crate::rational::{rat_to_f64, Rat};

/// Polynomial in `n_vars` variables; maps exponent vectors to nonzero
/// coefficients. Every stored key has length `n_vars`.
#[derive(Debug, Clone, PartialEq)]
pub struct MPoly<T> {
    n_vars: usize,
    terms: BTreeMap<Vec<u16>, T>,
}

impl<T> MPoly<T> {
    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn n_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u16], &T)> {
        self.terms.iter().map(|(e, c)| (e.as_slice(), c))
    }

    /// Largest total degree over the stored terms; 0 for the zero
    /// polynomial.
    pub fn total_degree(&self) -> usize {
        self.terms
            .keys()
            .map(|e| e.iter().map(|&x| x as usize).sum())
            .max()
            .unwrap_or(0)
    }

    pub fn max_exponent(&self, var: usize) -> u16 {
        self.terms.keys().map(|e| e[var]).max().unwrap_or(0)
    }

    pub fn map_coeffs<U, F: FnMut(&T) -> U>(&self, mut f: F) -> MPoly<U>
    where
        U: Zero,
    {
        let mut terms = BTreeMap::new();
        for (e, c) in &self.terms {
            let mapped = f(c);
            if !mapped.is_zero() {
                terms.insert(e.clone(), mapped);
            }
        }
        MPoly { n_vars: self.n_vars, terms }
    }
}

impl<T: Zero + Clone> MPoly<T> {
    pub fn zero(n_vars: usize) -> Self {
        MPoly { n_vars, terms: BTreeMap::new() }
    }

    pub fn constant(n_vars: usize, value: T) -> Self {
        let mut terms = BTreeMap::new();
        if !value.is_zero() {
            terms.insert(vec![0; n_vars], value);
        }
        MPoly { n_vars, terms }
    }

    pub fn from_terms(n_vars: usize, raw: impl IntoIterator<Item = (Vec<u16>, T)>) -> Self {
        let mut acc: BTreeMap<Vec<u16>, T> = BTreeMap::new();
        for (exps, coeff) in raw {
            assert_eq!(exps.len(), n_vars, "exponent vector length mismatch");
            match acc.remove(&exps) {
                Some(prev) => {
                    let sum = add_coeff(prev, coeff);
                    if !sum.is_zero() {
                        acc.insert(exps, sum);
                    }
                }
                None => {
                    if !coeff.is_zero() {
                        acc.insert(exps, coeff);
                    }
                }
            }
        }
        MPoly { n_vars, terms: acc }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.n_vars, other.n_vars);
        let mut terms = self.terms.clone();
        for (e, c) in &other.terms {
            match terms.remove(e) {
                Some(prev) => {
                    let sum = add_coeff(prev, c.clone());
                    if !sum.is_zero() {
                        terms.insert(e.clone(), sum);
                    }
                }
                None => {
                    terms.insert(e.clone(), c.clone());
                }
            }
        }
        MPoly { n_vars: self.n_vars, terms }
    }
}

fn add_coeff<T: Zero>(a: T, b: T) -> T {
    a + b
}

impl<T> MPoly<T>
where
    T: Zero + Clone + std::ops::Mul<Output = T>,
{
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.n_vars, other.n_vars);
        let mut raw = Vec::with_capacity(self.terms.len() * other.terms.len());
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let exps: Vec<u16> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                raw.push((exps, ca.clone() * cb.clone()));
            }
        }
        MPoly::from_terms(self.n_vars, raw)
    }

    pub fn scale(&self, factor: &T) -> Self {
        let mut terms = BTreeMap::new();
        for (e, c) in &self.terms {
            let scaled = c.clone() * factor.clone();
            if !scaled.is_zero() {
                terms.insert(e.clone(), scaled);
            }
        }
        MPoly { n_vars: self.n_vars, terms }
    }

}

impl<T> MPoly<T>
where
    T: Zero + Clone + std::ops::Mul<Output = T> + FromPrimitive,
{
    pub fn pow(&self, exp: u32) -> Self {
        let mut acc = MPoly::constant(self.n_vars, one_like::<T>());
        for _ in 0..exp {
            acc = acc.mul(self);
        }
        acc
    }
}

fn one_like<T: Zero + FromPrimitive>() -> T {
    T::from_u32(1).expect("coefficient type represents 1")
}

impl<T: Zero + Clone + FromPrimitive> MPoly<T> {
    pub fn variable(n_vars: usize, index: usize) -> Self {
        assert!(index < n_vars, "variable index out of range");
        let mut exps = vec![0u16; n_vars];
        exps[index] = 1;
        let mut terms = BTreeMap::new();
        terms.insert(exps, one_like::<T>());
        MPoly { n_vars, terms }
    }
}

impl<T> MPoly<T>
where
    T: Zero + Clone + std::ops::Mul<Output = T> + std::ops::Neg<Output = T>,
{
    pub fn neg(&self) -> Self {
        let terms = self.terms.iter().map(|(e, c)| (e.clone(), -c.clone())).collect();
        MPoly { n_vars: self.n_vars, terms }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }
}

impl<T> MPoly<T>
where
    T: Zero + Clone + std::ops::Mul<Output = T> + FromPrimitive,
{
    /// Exact partial derivative in variable `var`.
    pub fn partial_deriv(&self, var: usize) -> Self {
        assert!(var < self.n_vars);
        let mut raw = Vec::new();
        for (e, c) in &self.terms {
            if e[var] == 0 {
                continue;
            }
            let mut exps = e.clone();
            exps[var] -= 1;
            let factor = T::from_u16(e[var]).expect("exponent fits coefficient type");
            raw.push((exps, c.clone() * factor));
        }
        MPoly::from_terms(self.n_vars, raw)
    }
}

impl MPoly<Rat> {
    pub fn to_complex(&self) -> MPoly<Complex64> {
        self.map_coeffs(|c| Complex64::new(rat_to_f64(c), 0.0))
    }
}

impl MPoly<Complex64> {
    pub fn eval(&self, x: &[Complex64]) -> Complex64 {
        self.eval_with_scale(x).0
    }

    /// Evaluates the polynomial and, alongside, the sum of the absolute
    /// values of its terms. The second value bounds the roundoff in the
    /// first and serves as the scale for relative smallness tests.
    pub fn eval_with_scale(&self, x: &[Complex64]) -> (Complex64, f64) {
        assert_eq!(x.len(), self.n_vars);
        let powers = self.power_table(x);
        let mut value = Complex64::new(0.0, 0.0);
        let mut scale = 0.0;
        for (e, c) in &self.terms {
            let mut monomial = Complex64::new(1.0, 0.0);
            for (var, &exp) in e.iter().enumerate() {
                monomial *= powers[var][exp as usize];
            }
            let term = c * monomial;
            value += term;
            scale += term.norm();
        }
        (value, scale)
    }

    fn power_table(&self, x: &[Complex64]) -> Vec<Vec<Complex64>> {
        (0..self.n_vars)
            .map(|var| {
                let top = self.max_exponent(var) as usize;
                let mut row = Vec::with_capacity(top + 1);
                row.push(Complex64::new(1.0, 0.0));
                for k in 1..=top {
                    let prev = row[k - 1];
                    row.push(prev * x[var]);
                }
                row
            })
            .collect()
    }

    /// Coefficients of the univariate polynomial `t -> f(p + t·u)`, low
    /// degree first. The trailing coefficients may be zero; callers trim.
    pub fn restrict_to_line(&self, p: &[Complex64], u: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(p.len(), self.n_vars);
        assert_eq!(u.len(), self.n_vars);
        let deg = self.total_degree();
        let mut out = vec![Complex64::new(0.0, 0.0); deg + 1];
        for (e, c) in &self.terms {
            // Expand prod_i (p_i + t u_i)^{e_i} one variable at a time.
            let mut factor = vec![Complex64::new(0.0, 0.0); deg + 1];
            factor[0] = *c;
            let mut cur_deg = 0usize;
            for (var, &exp) in e.iter().enumerate() {
                for _ in 0..exp {
                    let mut next = vec![Complex64::new(0.0, 0.0); deg + 1];
                    for (k, item) in factor.iter().enumerate().take(cur_deg + 1) {
                        next[k] += item * p[var];
                        next[k + 1] += item * u[var];
                    }
                    factor = next;
                    cur_deg += 1;
                }
            }
            for (k, item) in factor.iter().enumerate() {
                out[k] += item;
            }
        }
        out
    }
}

/// All complex roots of `coeffs[0] + coeffs[1] t + ...` by the
/// Durand-Kerner iteration. Leading near-zero coefficients (relative to
/// the largest) are trimmed first. Returns roots with multiplicity.
pub fn univariate_roots(coeffs: &[Complex64]) -> Vec<Complex64> {
    let top_mag = coeffs.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if top_mag == 0.0 {
        return Vec::new();
    }
    let mut trimmed: Vec<Complex64> = coeffs.to_vec();
    while let Some(last) = trimmed.last() {
        if last.norm() <= 1e-14 * top_mag && trimmed.len() > 1 {
            trimmed.pop();
        } else {
            break;
        }
    }
    let deg = trimmed.len() - 1;
    if deg == 0 {
        return Vec::new();
    }
    let lead = trimmed[deg];
    let monic: Vec<Complex64> = trimmed.iter().map(|c| c / lead).collect();
    // Cauchy bound for the root radius.
    let radius = 1.0 + monic[..deg].iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut roots: Vec<Complex64> = (0..deg)
        .map(|k| {
            let angle = 2.0 * std::f64::consts::PI * (k as f64 + 0.25) / deg as f64;
            Complex64::from_polar(0.5 * radius.max(1.0), angle)
        })
        .collect();
    let eval = |z: Complex64| -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for &c in monic.iter().rev() {
            acc = acc * z + c;
        }
        acc
    };
    for _ in 0..200 {
        let mut shift = 0.0f64;
        for i in 0..deg {
            let mut denom = Complex64::new(1.0, 0.0);
            for j in 0..deg {
                if j != i {
                    denom *= roots[i] - roots[j];
                }
            }
            if denom.norm() == 0.0 {
                // Coincident iterates; nudge apart and retry next sweep.
                roots[i] += Complex64::new(1e-8, 1e-8);
                continue;
            }
            let delta = eval(roots[i]) / denom;
            roots[i] -= delta;
            shift = shift.max(delta.norm());
        }
        if shift < 1e-13 * radius {
            break;
        }
    }
    roots
}
