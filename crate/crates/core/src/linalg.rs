//! Small dense complex matrix kernels used by the demixing updates.
//!
//! Matrices here are tiny (one row per source, N ≤ 8), so everything is a
//! straightforward row-major `Vec` with an in-place LU factorization using
//! partial pivoting. No BLAS, no allocation beyond the factor copy.

use num_complex::Complex64;
use thiserror::Error;

/// Relative pivot threshold below which a matrix is treated as singular.
pub const SINGULAR_PIVOT_RATIO: f64 = 1e-12;

/// Tolerance used when checking that a matrix is Hermitian.
pub const HERMITIAN_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("matrix is singular to working precision (pivot magnitude {pivot:e})")]
    Singular { pivot: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("matrix is not Hermitian (max asymmetry {asymmetry:e})")]
    NotHermitian { asymmetry: f64 },
}

/// Square complex matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![Complex64::new(0.0, 0.0); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for k in 0..n {
            m[(k, k)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_diagonal(diag: &[Complex64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (k, &d) in diag.iter().enumerate() {
            m[(k, k)] = d;
        }
        m
    }

    /// Builds a matrix from row-major entries. Panics if `data.len()` is not a square.
    pub fn from_row_major(n: usize, data: Vec<Complex64>) -> Self {
        assert_eq!(data.len(), n * n, "expected {} entries for a {n}x{n} matrix", n * n);
        Self { n, data }
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Self {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for row in rows {
            assert_eq!(row.len(), n, "rows must all have length {n}");
            data.extend_from_slice(row);
        }
        Self { n, data }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn row(&self, r: usize) -> &[Complex64] {
        &self.data[r * self.n..(r + 1) * self.n]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [Complex64] {
        let n = self.n;
        &mut self.data[r * n..(r + 1) * n]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Infinity norm (maximum absolute row sum).
    pub fn norm_inf(&self) -> f64 {
        (0..self.n)
            .map(|r| self.row(r).iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn conj_transpose(&self) -> Self {
        let mut out = Self::zeros(self.n);
        for r in 0..self.n {
            for c in 0..self.n {
                out[(c, r)] = self[(r, c)].conj();
            }
        }
        out
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.n, rhs.n);
        let n = self.n;
        let mut out = Self::zeros(n);
        for r in 0..n {
            for k in 0..n {
                let a = self[(r, k)];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for c in 0..n {
                    out.data[r * n + c] += a * rhs.data[k * n + c];
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.n);
        (0..self.n)
            .map(|r| self.row(r).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Largest deviation from Hermitian symmetry.
    pub fn hermitian_asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for r in 0..self.n {
            for c in r..self.n {
                worst = worst.max((self[(r, c)] - self[(c, r)].conj()).norm());
            }
        }
        worst
    }

    pub fn lu(&self) -> Result<Lu, LinalgError> {
        Lu::factor(self)
    }

    pub fn solve(&self, b: &[Complex64]) -> Result<Vec<Complex64>, LinalgError> {
        solve(self, b)
    }

    pub fn inverse(&self) -> Result<Self, LinalgError> {
        self.lu().map(|lu| lu.inverse())
    }

    pub fn log_abs_det(&self) -> Result<f64, LinalgError> {
        log_abs_det(self)
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        &self.data[r * self.n + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        &mut self.data[r * self.n + c]
    }
}

/// LU factorization `P·M = L·U` with unit lower triangle, packed in one matrix.
#[derive(Debug, Clone)]
pub struct Lu {
    factors: ComplexMatrix,
    perm: Vec<usize>,
}

impl Lu {
    fn factor(m: &ComplexMatrix) -> Result<Self, LinalgError> {
        let n = m.n;
        let threshold = SINGULAR_PIVOT_RATIO * m.max_abs();
        let mut a = m.clone();
        let mut perm: Vec<usize> = (0..n).collect();

        for k in 0..n {
            let (p, pivot_mag) = (k..n)
                .map(|r| (r, a[(r, k)].norm()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if !(pivot_mag >= threshold) || pivot_mag == 0.0 {
                return Err(LinalgError::Singular {
                    pivot: pivot_mag.max(0.0),
                });
            }
            if p != k {
                for c in 0..n {
                    a.data.swap(k * n + c, p * n + c);
                }
                perm.swap(k, p);
            }
            let pivot = a[(k, k)];
            for r in k + 1..n {
                let factor = a[(r, k)] / pivot;
                a[(r, k)] = factor;
                for c in k + 1..n {
                    let u = a[(k, c)];
                    a[(r, c)] -= factor * u;
                }
            }
        }
        Ok(Self { factors: a, perm })
    }

    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.factors.n;
        let mut x: Vec<Complex64> = self.perm.iter().map(|&p| b[p]).collect();
        for r in 0..n {
            let mut acc = x[r];
            for c in 0..r {
                acc -= self.factors[(r, c)] * x[c];
            }
            x[r] = acc;
        }
        for r in (0..n).rev() {
            let mut acc = x[r];
            for c in r + 1..n {
                acc -= self.factors[(r, c)] * x[c];
            }
            x[r] = acc / self.factors[(r, r)];
        }
        x
    }

    pub fn inverse(&self) -> ComplexMatrix {
        let n = self.factors.n;
        let mut inv = ComplexMatrix::zeros(n);
        let mut e = vec![Complex64::new(0.0, 0.0); n];
        for c in 0..n {
            e.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
            e[c] = Complex64::new(1.0, 0.0);
            for (r, v) in self.solve(&e).into_iter().enumerate() {
                inv[(r, c)] = v;
            }
        }
        inv
    }

    /// Sum of log pivot magnitudes, i.e. `log|det M|`.
    pub fn log_abs_det(&self) -> f64 {
        (0..self.factors.n)
            .map(|k| self.factors[(k, k)].norm().ln())
            .sum()
    }
}

/// Solves `M x = b` by pivoted LU.
pub fn solve(m: &ComplexMatrix, b: &[Complex64]) -> Result<Vec<Complex64>, LinalgError> {
    if b.len() != m.n {
        return Err(LinalgError::Dimension {
            expected: m.n,
            got: b.len(),
        });
    }
    Ok(m.lu()?.solve(b))
}

/// `log|det M|` from the LU pivots.
pub fn log_abs_det(m: &ComplexMatrix) -> Result<f64, LinalgError> {
    Ok(m.lu()?.log_abs_det())
}

/// Real value of `wᴴ U w` for Hermitian `U`.
///
/// Only the upper triangle is read; the strictly upper part contributes twice
/// its real part, so the result carries no imaginary residue.
pub fn hermitian_quadratic(w: &[Complex64], u: &ComplexMatrix) -> Result<f64, LinalgError> {
    if w.len() != u.n {
        return Err(LinalgError::Dimension {
            expected: u.n,
            got: w.len(),
        });
    }
    let asymmetry = u.hermitian_asymmetry();
    if asymmetry > HERMITIAN_TOLERANCE * u.max_abs().max(1.0) {
        return Err(LinalgError::NotHermitian { asymmetry });
    }
    Ok(hermitian_quadratic_unchecked(w, u))
}

#[inline]
pub(crate) fn hermitian_quadratic_unchecked(w: &[Complex64], u: &ComplexMatrix) -> f64 {
    let n = u.n;
    let mut acc = 0.0;
    for a in 0..n {
        acc += u[(a, a)].re * w[a].norm_sqr();
        let mut off = Complex64::new(0.0, 0.0);
        for b in a + 1..n {
            off += u[(a, b)] * w[b];
        }
        acc += 2.0 * (w[a].conj() * off).re;
    }
    acc
}
