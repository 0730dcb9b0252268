//! Real Morse data of `|φ|²` at nondegenerate critical points.
//!
//! At a critical point the real Hessian of `|φ|²`, in coordinates
//! `(Re x, Im x)` and up to the positive factor `2|φ|²`, is the doubled
//! matrix `[[Re H, -Im H], [-Im H, -Re H]]` built from the complex log
//! Hessian `H`. Conjugating by the rotation `(a, b) -> (-b, a)` sends
//! this matrix to its negative, so the spectrum is symmetric about zero
//! and the index is exactly the complex dimension. The factor 2 comes
//! from `|φ|² = exp(2 Re log φ)` and is pinned down by the
//! finite-difference check below; it scales the spectrum without moving
//! the index.

use num_complex::Complex64;
use std::fmt;

use crate::master::{EvalError, MasterFunction};

#[derive(Debug, Clone, PartialEq)]
pub enum MorseError {
    Divisor(EvalError),
    NearSingular { min_abs: f64, threshold: f64 },
    Unpaired { worst_defect: f64, tolerance: f64 },
}

impl fmt::Display for MorseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MorseError::Divisor(e) => write!(f, "Hessian evaluation failed: {e}"),
            MorseError::NearSingular { min_abs, threshold } => write!(
                f,
                "Hessian spectrum reaches {min_abs:.3e}, below the singularity \
                 threshold {threshold:.3e}"
            ),
            MorseError::Unpaired { worst_defect, tolerance } => write!(
                f,
                "eigenvalues fail to pair off: defect {worst_defect:.3e} \
                 exceeds {tolerance:.3e}"
            ),
        }
    }
}

impl std::error::Error for MorseError {}

impl From<EvalError> for MorseError {
    fn from(e: EvalError) -> Self {
        MorseError::Divisor(e)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MorseSummary {
    /// Number of negative eigenvalues.
    pub index: usize,
    /// Eigenvalues in ascending order.
    pub eigenvalues: Vec<f64>,
    /// Worst pairing defect `|e_i + e_{2n-1-i}|`, relative to the
    /// spectral radius.
    pub pairing_defect: f64,
}

/// The real Hessian of `|φ|²` at a critical point, divided by the
/// positive factor `|φ(p)|²`: twice the doubled matrix built from the
/// complex log Hessian.
pub fn real_hessian(mf: &MasterFunction, p: &[Complex64]) -> Result<Vec<Vec<f64>>, EvalError> {
    let h = mf.log_jacobian(p)?;
    let n = mf.dimension();
    let mut b = vec![vec![0.0f64; 2 * n]; 2 * n];
    for i in 0..n {
        for j in 0..n {
            b[i][j] = 2.0 * h[i][j].re;
            b[i][n + j] = -2.0 * h[i][j].im;
            b[n + i][j] = -2.0 * h[i][j].im;
            b[n + i][n + j] = -2.0 * h[i][j].re;
        }
    }
    Ok(b)
}

/// Eigenvalues of a real symmetric matrix by cyclic Jacobi rotations,
/// ascending. Sweeps until the off-diagonal Frobenius mass falls below
/// `1e-12` of the matrix norm.
pub fn symmetric_eigenvalues(matrix: &[Vec<f64>]) -> Vec<f64> {
    let n = matrix.len();
    let mut a: Vec<Vec<f64>> = matrix.to_vec();
    let frob = |m: &[Vec<f64>]| -> f64 {
        m.iter().flat_map(|r| r.iter()).map(|v| v * v).sum::<f64>().sqrt()
    };
    let target = 1e-12 * frob(&a).max(1.0);
    for _sweep in 0..60 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off += 2.0 * a[p][q] * a[p][q];
            }
        }
        if off.sqrt() <= target {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if a[p][q].abs() <= 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    -1.0 / (-theta + (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut eigs: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    eigs.sort_by(f64::total_cmp);
    eigs
}

/// Worst relative entry defect of the doubled-matrix formula for the
/// Hessian of `|φ|²` at a critical point `p`, measured against second
/// central differences of `∏ |f_I|^{2λ_I}` over the `2n` real
/// coordinates. Only meaningful for real exponent vectors, where that
/// product is single-valued, and only at points where the logarithmic
/// derivative vanishes.
pub fn real_hessian_fd_defect(
    mf: &MasterFunction,
    p: &[Complex64],
    step: f64,
) -> Result<f64, MorseError> {
    assert!(step > 0.0);
    assert!(
        mf.exponents().iter().all(|l| l.im.abs() < 1e-12),
        "|φ|² is single-valued only for real exponents"
    );
    let n = mf.dimension();
    let b = real_hessian(mf, p)?;
    let g = |u: &[f64]| -> f64 {
        let z: Vec<Complex64> =
            (0..n).map(|k| Complex64::new(u[k], u[n + k])).collect();
        mf.factors()
            .iter()
            .zip(mf.exponents())
            .map(|(f, lambda)| f.complex().eval(&z).norm().powf(2.0 * lambda.re))
            .product()
    };
    let mut u0 = vec![0.0f64; 2 * n];
    for k in 0..n {
        u0[k] = p[k].re;
        u0[n + k] = p[k].im;
    }
    let g0 = g(&u0);
    let shifted = |i: usize, si: f64, j: usize, sj: f64| {
        let mut u = u0.clone();
        u[i] += si * step;
        u[j] += sj * step;
        u
    };
    let mut worst = 0.0f64;
    let mut scale = 1.0f64;
    for a in 0..2 * n {
        for c in a..2 * n {
            let fd = if a == c {
                (g(&shifted(a, 1.0, a, 0.0)) - 2.0 * g0 + g(&shifted(a, -1.0, a, 0.0)))
                    / (step * step)
            } else {
                (g(&shifted(a, 1.0, c, 1.0)) - g(&shifted(a, 1.0, c, -1.0))
                    - g(&shifted(a, -1.0, c, 1.0))
                    + g(&shifted(a, -1.0, c, -1.0)))
                    / (4.0 * step * step)
            };
            worst = worst.max((fd / g0 - b[a][c]).abs());
            scale = scale.max(b[a][c].abs());
        }
    }
    Ok(worst / scale)
}

/// Morse data of `|φ|²` at the critical point `p`. Fails when the
/// spectrum comes too close to zero (degenerate point) or the symmetric
/// pairing about zero breaks down.
pub fn morse_summary(
    mf: &MasterFunction,
    p: &[Complex64],
    pairing_tol: f64,
) -> Result<MorseSummary, MorseError> {
    let b = real_hessian(mf, p)?;
    let eigenvalues = symmetric_eigenvalues(&b);
    let m = eigenvalues.len();
    let radius = eigenvalues
        .iter()
        .map(|e| e.abs())
        .fold(0.0f64, f64::max)
        .max(1e-300);
    let min_abs = eigenvalues.iter().map(|e| e.abs()).fold(f64::INFINITY, f64::min);
    if min_abs <= pairing_tol * radius {
        return Err(MorseError::NearSingular {
            min_abs: min_abs / radius,
            threshold: pairing_tol,
        });
    }
    let mut worst = 0.0f64;
    for i in 0..m / 2 {
        worst = worst.max((eigenvalues[i] + eigenvalues[m - 1 - i]).abs() / radius);
    }
    if worst > pairing_tol {
        return Err(MorseError::Unpaired { worst_defect: worst, tolerance: pairing_tol });
    }
    let index = eigenvalues.iter().filter(|&&e| e < 0.0).count();
    Ok(MorseSummary { index, eigenvalues, pairing_defect: worst })
}
