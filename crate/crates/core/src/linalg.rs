//! Dense complex linear algebra on the small systems this crate meets
//! (dimension <= 4, plus the doubled real Hessians). Partial-pivot LU
//! with explicit inverses; no blocking, no packing.

use num_complex::Complex64;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// LU factorization with partial pivoting, kept packed in `lu`.
pub struct Lu {
    n: usize,
    lu: Vec<Vec<Complex64>>,
    perm: Vec<usize>,
    sign: f64,
    singular: bool,
}

impl Lu {
    pub fn new(a: &[Vec<Complex64>]) -> Self {
        let n = a.len();
        assert!(a.iter().all(|row| row.len() == n), "matrix must be square");
        let mut lu: Vec<Vec<Complex64>> = a.to_vec();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        let mut singular = false;
        for col in 0..n {
            let (pivot_row, pivot_mag) = (col..n)
                .map(|r| (r, lu[r][col].norm()))
                .max_by(|a, b| a.1.total_cmp(&b.1))
                .unwrap_or((col, 0.0));
            if pivot_mag == 0.0 {
                singular = true;
                continue;
            }
            if pivot_row != col {
                lu.swap(pivot_row, col);
                perm.swap(pivot_row, col);
                sign = -sign;
            }
            let pivot = lu[col][col];
            for row in (col + 1)..n {
                let factor = lu[row][col] / pivot;
                lu[row][col] = factor;
                for k in (col + 1)..n {
                    let delta = factor * lu[col][k];
                    lu[row][k] -= delta;
                }
            }
        }
        Lu { n, lu, perm, sign, singular }
    }

    pub fn is_singular(&self) -> bool {
        self.singular
    }

    pub fn det(&self) -> Complex64 {
        if self.singular {
            return ZERO;
        }
        let mut det = Complex64::new(self.sign, 0.0);
        for i in 0..self.n {
            det *= self.lu[i][i];
        }
        det
    }

    pub fn solve(&self, b: &[Complex64]) -> Option<Vec<Complex64>> {
        if self.singular {
            return None;
        }
        assert_eq!(b.len(), self.n);
        let mut x: Vec<Complex64> = self.perm.iter().map(|&p| b[p]).collect();
        for col in 0..self.n {
            for row in (col + 1)..self.n {
                let delta = self.lu[row][col] * x[col];
                x[row] -= delta;
            }
        }
        for row in (0..self.n).rev() {
            for col in (row + 1)..self.n {
                let delta = self.lu[row][col] * x[col];
                x[row] -= delta;
            }
            x[row] /= self.lu[row][row];
        }
        Some(x)
    }

    pub fn inverse(&self) -> Option<Vec<Vec<Complex64>>> {
        if self.singular {
            return None;
        }
        let mut cols = Vec::with_capacity(self.n);
        for j in 0..self.n {
            let mut e = vec![ZERO; self.n];
            e[j] = Complex64::new(1.0, 0.0);
            cols.push(self.solve(&e)?);
        }
        let mut inv = vec![vec![ZERO; self.n]; self.n];
        for (j, col) in cols.iter().enumerate() {
            for (i, &v) in col.iter().enumerate() {
                inv[i][j] = v;
            }
        }
        Some(inv)
    }
}

pub fn solve(a: &[Vec<Complex64>], b: &[Complex64]) -> Option<Vec<Complex64>> {
    Lu::new(a).solve(b)
}

pub fn det(a: &[Vec<Complex64>]) -> Complex64 {
    Lu::new(a).det()
}

/// Max row sum norm.
pub fn inf_norm(a: &[Vec<Complex64>]) -> f64 {
    a.iter()
        .map(|row| row.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Infinity-norm condition number; `f64::INFINITY` for singular input.
pub fn condition_number(a: &[Vec<Complex64>]) -> f64 {
    let lu = Lu::new(a);
    match lu.inverse() {
        Some(inv) => inf_norm(a) * inf_norm(&inv),
        None => f64::INFINITY,
    }
}

pub fn mat_vec(a: &[Vec<Complex64>], x: &[Complex64]) -> Vec<Complex64> {
    a.iter()
        .map(|row| row.iter().zip(x).map(|(m, v)| m * v).sum())
        .collect()
}

pub fn vec_norm(x: &[Complex64]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

pub fn vec_inf_norm(x: &[Complex64]) -> f64 {
    x.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn vec_sub(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn vec_dist(a: &[Complex64], b: &[Complex64]) -> f64 {
    vec_norm(&vec_sub(a, b))
}
