//! Small dense complex matrices.
//!
//! Every system solved in this crate has exactly two unknown columns (the
//! 2×2 channel, or the two symbols of an Alamouti block), so the normal
//! equations reduce to a 2×2 Hermitian Gram matrix that is inverted in
//! closed form. Storage is row-major and every operation returns a fresh
//! matrix.

use std::fmt;
use std::ops::{Index, IndexMut};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Scalar type used throughout the crate.
pub type Complex = Complex64;

/// Relative singularity threshold on `|det(AᴴA)| / tr(AᴴA)²`.
pub const SINGULAR_TOL: f64 = 1e-12;

#[inline]
pub fn c(re: f64, im: f64) -> Complex {
    Complex64::new(re, im)
}

#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex::new(1.0, 0.0);
        }
        m
    }

    /// Builds a matrix from row-major entries.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<Complex>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                op: "from_vec",
                lhs: (rows, cols),
                rhs: (data.len(), 1),
            });
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from a list of equally long rows.
    ///
    /// # Panics
    ///
    /// Panics if the rows are ragged. Intended for literals in tests and
    /// examples.
    pub fn from_rows<R: AsRef<[Complex]>>(rows: &[R]) -> Self {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            assert_eq!(r.len(), cols, "ragged rows");
            data.extend_from_slice(r);
        }
        Self {
            rows: rows.len(),
            cols,
            data,
        }
    }

    /// Builds a matrix from real entries, row by row.
    pub fn from_real_rows<R: AsRef<[f64]>>(rows: &[R]) -> Self {
        let rows: Vec<Vec<Complex>> = rows
            .iter()
            .map(|r| r.as_ref().iter().map(|&x| c(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    /// Row-major view of the entries.
    pub fn as_slice(&self) -> &[Complex] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Complex] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<Complex> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn matmul(&self, rhs: &ComplexMatrix) -> Result<ComplexMatrix> {
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch {
                op: "matmul",
                lhs: self.shape(),
                rhs: rhs.shape(),
            });
        }
        let mut out = ComplexMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                let rhs_row = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                for (o, &b) in out_row.iter_mut().zip(rhs_row) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    /// Conjugate transpose.
    pub fn hermitian(&self) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    /// Elementwise complex conjugate.
    pub fn conj(&self) -> ComplexMatrix {
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    /// Sum of squared moduli of all entries.
    pub fn frobenius_sq(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn add(&self, rhs: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.zip_with(rhs, "add", |a, b| a + b)
    }

    pub fn sub(&self, rhs: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.zip_with(rhs, "sub", |a, b| a - b)
    }

    pub fn scale(&self, k: Complex) -> ComplexMatrix {
        self.map(|z| z * k)
    }

    pub fn scale_real(&self, k: f64) -> ComplexMatrix {
        self.map(|z| z * k)
    }

    pub fn map(&self, f: impl Fn(Complex) -> Complex) -> ComplexMatrix {
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| f(z)).collect(),
        }
    }

    fn zip_with(
        &self,
        rhs: &ComplexMatrix,
        op: &'static str,
        f: impl Fn(Complex, Complex) -> Complex,
    ) -> Result<ComplexMatrix> {
        if self.shape() != rhs.shape() {
            return Err(Error::DimensionMismatch {
                op,
                lhs: self.shape(),
                rhs: rhs.shape(),
            });
        }
        Ok(ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    /// Stacks `self` on top of `below`.
    pub fn vstack(&self, below: &ComplexMatrix) -> Result<ComplexMatrix> {
        if self.cols != below.cols {
            return Err(Error::DimensionMismatch {
                op: "vstack",
                lhs: self.shape(),
                rhs: below.shape(),
            });
        }
        let mut data = self.data.clone();
        data.extend_from_slice(&below.data);
        Ok(ComplexMatrix {
            rows: self.rows + below.rows,
            cols: self.cols,
            data,
        })
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for z in self.row(i) {
                write!(f, "{:>10.4}{:+.4}j ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

pub fn matmul(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    a.matmul(b)
}

pub fn hermitian(a: &ComplexMatrix) -> ComplexMatrix {
    a.hermitian()
}

pub fn frobenius_sq(a: &ComplexMatrix) -> f64 {
    a.frobenius_sq()
}

/// Least-squares solution `X = (AᴴA)⁻¹AᴴB` for a two-column `A`.
///
/// The 2×2 Gram matrix is inverted through its adjugate. It is rejected as
/// singular when `|det| / tr² < SINGULAR_TOL`.
pub fn solve_normal_eq(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    if a.cols != 2 {
        return Err(Error::UnsupportedShape {
            op: "solve_normal_eq",
            expected: 2,
            cols: a.cols,
        });
    }
    if a.rows != b.rows {
        return Err(Error::DimensionMismatch {
            op: "solve_normal_eq",
            lhs: a.shape(),
            rhs: b.shape(),
        });
    }

    // Gram = [[p, q], [q*, r]] and rhs = AᴴB, accumulated in one pass.
    let mut p = 0.0;
    let mut r = 0.0;
    let mut q = Complex::new(0.0, 0.0);
    let k = b.cols;
    let mut ahb = vec![Complex::new(0.0, 0.0); 2 * k];
    for i in 0..a.rows {
        let a0 = a.data[2 * i];
        let a1 = a.data[2 * i + 1];
        p += a0.norm_sqr();
        r += a1.norm_sqr();
        q += a0.conj() * a1;
        let (a0c, a1c) = (a0.conj(), a1.conj());
        for (j, &bij) in b.row(i).iter().enumerate() {
            ahb[j] += a0c * bij;
            ahb[k + j] += a1c * bij;
        }
    }

    let det = p * r - q.norm_sqr();
    let trace = p + r;
    let ratio = det.abs() / (trace * trace);
    if trace <= 0.0 || ratio.is_nan() || ratio < SINGULAR_TOL {
        let scaled = if trace > 0.0 {
            det / (trace * trace)
        } else {
            0.0
        };
        return Err(Error::Singular(scaled));
    }

    let inv_det = 1.0 / det;
    let mut x = ComplexMatrix::zeros(2, k);
    for j in 0..k {
        let u = ahb[j];
        let v = ahb[k + j];
        x.data[j] = (u * r - q * v) * inv_det;
        x.data[k + j] = (v * p - q.conj() * u) * inv_det;
    }
    Ok(x)
}

/// Inverse of a 2×2 matrix through its adjugate.
pub fn inverse_2x2(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    if m.shape() != (2, 2) {
        return Err(Error::DimensionMismatch {
            op: "inverse_2x2",
            lhs: m.shape(),
            rhs: (2, 2),
        });
    }
    let (a, b, cc, d) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
    let det = a * d - b * cc;
    let scale = m.frobenius_sq();
    let ratio = det.norm() / scale;
    if scale == 0.0 || ratio.is_nan() || ratio < SINGULAR_TOL {
        return Err(Error::Singular(if scale > 0.0 {
            det.norm() / scale
        } else {
            0.0
        }));
    }
    let inv = det.inv();
    Ok(ComplexMatrix::from_rows(&[
        [d * inv, -b * inv],
        [-cc * inv, a * inv],
    ]))
}
