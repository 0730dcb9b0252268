//! Exact rational scalars and small dense rational linear algebra.
//!
//! Flats of an arrangement are identified by the reduced row echelon form
//! of their defining affine system, so everything here must be exact and
//! canonical: equal subspaces produce byte-identical matrices.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::fmt;
use std::str::FromStr;

pub type Rat = BigRational;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RatParseError {
    Empty,
    BadInteger(String),
    ZeroDenominator(String),
}

impl fmt::Display for RatParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RatParseError::Empty => write!(f, "empty rational literal"),
            RatParseError::BadInteger(s) => write!(f, "invalid integer part {s:?}"),
            RatParseError::ZeroDenominator(s) => write!(f, "zero denominator in {s:?}"),
        }
    }
}

impl std::error::Error for RatParseError {}

pub fn rat(numer: i64, denom: i64) -> Rat {
    Rat::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn rat_int(value: i64) -> Rat {
    Rat::from_integer(BigInt::from(value))
}

/// Parses "p/q" or "p" with optional sign and surrounding whitespace.
pub fn parse_rat(text: &str) -> Result<Rat, RatParseError> {
    let trimmed = text.trim();
    if trimmed.is_empty() {
        return Err(RatParseError::Empty);
    }
    let (numer_str, denom_str) = match trimmed.split_once('/') {
        Some((n, d)) => (n.trim(), Some(d.trim())),
        None => (trimmed, None),
    };
    let numer = BigInt::from_str(numer_str)
        .map_err(|_| RatParseError::BadInteger(numer_str.to_owned()))?;
    let denom = match denom_str {
        Some(d) => BigInt::from_str(d).map_err(|_| RatParseError::BadInteger(d.to_owned()))?,
        None => BigInt::one(),
    };
    if denom.is_zero() {
        return Err(RatParseError::ZeroDenominator(trimmed.to_owned()));
    }
    Ok(Rat::new(numer, denom))
}

pub fn rat_to_f64(value: &Rat) -> f64 {
    value.to_f64().unwrap_or(f64::NAN)
}

/// Dense matrix over the rationals. Row-major.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct RatMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rat>,
}

impl RatMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RatMatrix { rows, cols, data: vec![Rat::zero(); rows * cols] }
    }

    pub fn from_rows(rows: Vec<Vec<Rat>>) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == cols), "ragged matrix rows");
        let n_rows = rows.len();
        RatMatrix { rows: n_rows, cols, data: rows.into_iter().flatten().collect() }
    }

    pub fn n_rows(&self) -> usize {
        self.rows
    }

    pub fn n_cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &Rat {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, value: Rat) {
        self.data[r * self.cols + c] = value;
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    /// Reduced row echelon form with unit pivots and zeros above and
    /// below each pivot. Returns the rank, the reduced matrix, and the
    /// pivot column of each of the first `rank` rows.
    pub fn rref(&self) -> (usize, RatMatrix, Vec<usize>) {
        let mut m = self.clone();
        let mut pivot_cols = Vec::new();
        let mut pivot_row = 0;
        for col in 0..m.cols {
            if pivot_row == m.rows {
                break;
            }
            let found = (pivot_row..m.rows).find(|&r| !m.get(r, col).is_zero());
            let src = match found {
                Some(r) => r,
                None => continue,
            };
            m.swap_rows(pivot_row, src);
            let inv = m.get(pivot_row, col).recip();
            for c in col..m.cols {
                let v = m.get(pivot_row, c).clone() * &inv;
                m.set(pivot_row, c, v);
            }
            for r in 0..m.rows {
                if r == pivot_row || m.get(r, col).is_zero() {
                    continue;
                }
                let factor = m.get(r, col).clone();
                for c in col..m.cols {
                    let v = m.get(r, c).clone() - m.get(pivot_row, c).clone() * &factor;
                    m.set(r, c, v);
                }
            }
            pivot_cols.push(col);
            pivot_row += 1;
        }
        (pivot_row, m, pivot_cols)
    }

    /// RREF with the all-zero rows removed: a canonical representative of
    /// the row space, usable as a map key.
    pub fn canonical_row_space(&self) -> RatMatrix {
        let (rank, reduced, _) = self.rref();
        let mut data = reduced.data;
        data.truncate(rank * reduced.cols);
        RatMatrix { rows: rank, cols: reduced.cols, data }
    }
}

/// Solution of a consistent affine system `a·x + b = 0` (one row per
/// equation): a particular point plus a basis of the direction space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffineSystem {
    pub rank: usize,
    /// Stripped RREF of the augmented matrix `[A | -b]`; canonical for
    /// the solution set.
    pub canonical: RatMatrix,
    pub basepoint: Vec<Rat>,
    pub basis: Vec<Vec<Rat>>,
}

/// Solves the stacked system `coeffs·x + offset = 0`. Returns `None` if
/// inconsistent. `n` is the ambient dimension; rows may be empty, in
/// which case the solution is all of space.
pub fn solve_affine_system(n: usize, rows: &[(&[Rat], &Rat)]) -> Option<AffineSystem> {
    let mut aug = Vec::with_capacity(rows.len());
    for (coeffs, offset) in rows {
        assert_eq!(coeffs.len(), n, "row length mismatch");
        let mut row: Vec<Rat> = coeffs.to_vec();
        row.push(-(*offset).clone());
        aug.push(row);
    }
    if aug.is_empty() {
        aug.push(vec![Rat::zero(); n + 1]);
    }
    let (rank, reduced, pivot_cols) = RatMatrix::from_rows(aug).rref();
    if pivot_cols.last() == Some(&n) {
        return None;
    }
    let mut basepoint = vec![Rat::zero(); n];
    for (row, &col) in pivot_cols.iter().enumerate() {
        basepoint[col] = reduced.get(row, n).clone();
    }
    let mut basis = Vec::with_capacity(n - rank);
    for free_col in (0..n).filter(|c| !pivot_cols.contains(c)) {
        let mut dir = vec![Rat::zero(); n];
        dir[free_col] = Rat::one();
        for (row, &col) in pivot_cols.iter().enumerate() {
            dir[col] = -reduced.get(row, free_col).clone();
        }
        basis.push(dir);
    }
    let mut canonical_data = Vec::with_capacity(rank * (n + 1));
    for r in 0..rank {
        for c in 0..=n {
            canonical_data.push(reduced.get(r, c).clone());
        }
    }
    let canonical = RatMatrix { rows: rank, cols: n + 1, data: canonical_data };
    Some(AffineSystem { rank, canonical, basepoint, basis })
}

pub fn dot(a: &[Rat], b: &[Rat]) -> Rat {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// True when the two vectors span the same line (both nonzero and one a
/// scalar multiple of the other), i.e. all 2x2 minors vanish.
pub fn proportional(a: &[Rat], b: &[Rat]) -> bool {
    assert_eq!(a.len(), b.len());
    if a.iter().all(Zero::is_zero) || b.iter().all(Zero::is_zero) {
        return false;
    }
    for i in 0..a.len() {
        for j in (i + 1)..a.len() {
            if &a[i] * &b[j] != &a[j] * &b[i] {
                return false;
            }
        }
    }
    true
}

pub fn rat_abs(value: &Rat) -> Rat {
    value.abs()
}
