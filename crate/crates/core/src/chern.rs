//! Exact integer Chern-class arithmetic on projective space.
//!
//! Everything lives in the truncated polynomial ring Z[h]/(h^{n+1}),
//! h the hyperplane class. Two quantities are computed through
//! different routes and compared downstream:
//!
//! * the top coefficient of the Chern series of the bundle of 1-forms
//!   with logarithmic poles on a normal-crossing divisor, and
//! * the Euler characteristic of the divisor complement, assembled by
//!   inclusion-exclusion from smooth complete intersections.

use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ChernError {
    ZeroDimension,
    ZeroDegree { index: usize },
    NoComponents,
    CodimensionTooLarge { codim: usize, dimension: usize },
}

impl fmt::Display for ChernError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChernError::ZeroDimension => write!(f, "ambient dimension must be at least 1"),
            ChernError::ZeroDegree { index } => {
                write!(f, "divisor component {index} has degree 0")
            }
            ChernError::NoComponents => write!(f, "divisor needs at least one component"),
            ChernError::CodimensionTooLarge { codim, dimension } => write!(
                f,
                "complete intersection of codimension {codim} does not fit in dimension {dimension}"
            ),
        }
    }
}

impl std::error::Error for ChernError {}

/// Element of Z[h]/(h^{n+1}); `coeffs[j]` multiplies `h^j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChernSeries {
    coeffs: Vec<i64>,
}

impl ChernSeries {
    pub fn one(dimension: usize) -> Self {
        let mut coeffs = vec![0; dimension + 1];
        coeffs[0] = 1;
        ChernSeries { coeffs }
    }

    pub fn from_coeffs(dimension: usize, mut coeffs: Vec<i64>) -> Self {
        coeffs.resize(dimension + 1, 0);
        ChernSeries { coeffs }
    }

    pub fn dimension(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, power: usize) -> i64 {
        self.coeffs.get(power).copied().unwrap_or(0)
    }

    /// Coefficient of the top power `h^n`.
    pub fn top(&self) -> i64 {
        *self.coeffs.last().unwrap()
    }

    pub fn mul(&self, other: &ChernSeries) -> ChernSeries {
        assert_eq!(self.coeffs.len(), other.coeffs.len(), "mixed truncation orders");
        let top = self.coeffs.len();
        let mut coeffs = vec![0i64; top];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                if i + j < top {
                    coeffs[i + j] += a * b;
                }
            }
        }
        ChernSeries { coeffs }
    }

    pub fn pow(&self, exponent: u32) -> ChernSeries {
        let mut acc = ChernSeries::one(self.dimension());
        for _ in 0..exponent {
            acc = acc.mul(self);
        }
        acc
    }

    /// `(1 + c·h)^exponent`, truncated.
    pub fn binomial(dimension: usize, c: i64, exponent: u32) -> ChernSeries {
        ChernSeries::from_coeffs(dimension, vec![1, c]).pow(exponent)
    }

    /// `Σ_j (d·h)^j`, the multiplicative inverse of `1 - d·h`.
    pub fn geometric(dimension: usize, d: i64) -> ChernSeries {
        let mut coeffs = Vec::with_capacity(dimension + 1);
        let mut power = 1i64;
        for _ in 0..=dimension {
            coeffs.push(power);
            power *= d;
        }
        ChernSeries { coeffs }
    }
}

/// Normal-crossing divisor in projective n-space: one smooth component
/// per degree entry. For the affine picture, the hyperplane at infinity
/// is one of the components (degree 1).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DivisorConfig {
    dimension: usize,
    degrees: Vec<u32>,
}

impl DivisorConfig {
    pub fn new(dimension: usize, degrees: Vec<u32>) -> Result<Self, ChernError> {
        if dimension == 0 {
            return Err(ChernError::ZeroDimension);
        }
        if degrees.is_empty() {
            return Err(ChernError::NoComponents);
        }
        if let Some(index) = degrees.iter().position(|&d| d == 0) {
            return Err(ChernError::ZeroDegree { index });
        }
        Ok(DivisorConfig { dimension, degrees })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn degrees(&self) -> &[u32] {
        &self.degrees
    }
}

/// Top coefficient of
/// `(1 - h)^{n+1} · ∏_I (Σ_j (d_I h)^j)`,
/// the Chern series of 1-forms with log poles along the divisor.
pub fn chern_log_top(cfg: &DivisorConfig) -> i64 {
    let n = cfg.dimension;
    let mut series = ChernSeries::binomial(n, -1, (n + 1) as u32);
    for &d in &cfg.degrees {
        series = series.mul(&ChernSeries::geometric(n, d as i64));
    }
    series.top()
}

/// Euler characteristic of the smooth complete intersection of
/// hypersurfaces of the given degrees in projective n-space:
/// `(∏ d_i) · [h^{n-k}] (1+h)^{n+1} / ∏ (1 + d_i h)`.
/// An empty degree list gives projective space itself.
pub fn euler_complete_intersection(
    dimension: usize,
    degrees: &[u32],
) -> Result<i64, ChernError> {
    if dimension == 0 {
        return Err(ChernError::ZeroDimension);
    }
    let k = degrees.len();
    if k > dimension {
        return Err(ChernError::CodimensionTooLarge { codim: k, dimension });
    }
    if let Some(index) = degrees.iter().position(|&d| d == 0) {
        return Err(ChernError::ZeroDegree { index });
    }
    let mut series = ChernSeries::binomial(dimension, 1, (dimension + 1) as u32);
    let mut degree_product = 1i64;
    for &d in degrees {
        series = series.mul(&ChernSeries::geometric(dimension, -(d as i64)));
        degree_product *= d as i64;
    }
    Ok(degree_product * series.coeff(dimension - k))
}

/// Euler characteristic of the complement of the divisor, by
/// inclusion-exclusion over the component subsets. Subsets larger than
/// the dimension cut out nothing and contribute zero.
pub fn euler_complement(cfg: &DivisorConfig) -> i64 {
    let k = cfg.degrees.len();
    let mut chi = 0i64;
    for mask in 0u32..(1 << k) {
        let subset: Vec<u32> = (0..k)
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| cfg.degrees[i])
            .collect();
        if subset.len() > cfg.dimension {
            continue;
        }
        let sign = if subset.len() % 2 == 0 { 1 } else { -1 };
        let chi_stratum = euler_complete_intersection(cfg.dimension, &subset)
            .expect("subset codimension checked");
        chi += sign * chi_stratum;
    }
    chi
}

/// Both sides of the identity tying the log Chern number to the
/// topology of the divisor:
/// `(-1)^{n-1} χ(D) = chern_log_top - (-1)^n (n+1)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClaimCheck {
    pub lhs: i64,
    pub rhs: i64,
}

impl ClaimCheck {
    pub fn holds(&self) -> bool {
        self.lhs == self.rhs
    }
}

pub fn claim_check(cfg: &DivisorConfig) -> ClaimCheck {
    let n = cfg.dimension;
    let k = cfg.degrees.len();
    let mut chi_divisor = 0i64;
    for mask in 1u32..(1 << k) {
        let subset: Vec<u32> = (0..k)
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| cfg.degrees[i])
            .collect();
        if subset.len() > n {
            continue;
        }
        let sign = if subset.len() % 2 == 1 { 1 } else { -1 };
        chi_divisor += sign
            * euler_complete_intersection(n, &subset).expect("subset codimension checked");
    }
    let sign_n1 = if (n - 1) % 2 == 0 { 1 } else { -1 };
    let sign_n = if n % 2 == 0 { 1 } else { -1 };
    let lhs = sign_n1 * chi_divisor;
    let rhs = chern_log_top(cfg) - sign_n * (n as i64 + 1);
    ClaimCheck { lhs, rhs }
}
