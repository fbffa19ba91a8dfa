//! Dense row-major matrices over a [`Field`].

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use super::scalar::{is_finite, Cplx, Field};
use super::LinalgError;

#[derive(Clone, Debug, PartialEq)]
pub struct Mat<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

/// Complex matrix: houses group elements, chart coordinates and coordinate blocks.
pub type CMatrix = Mat<Cplx>;

impl<T: Field> Mat<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = T::one();
        }
        m
    }

    pub fn scalar(n: usize, value: T) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = value.clone();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Result<Self, LinalgError> {
        if data.len() != rows * cols {
            return Err(LinalgError::ShapeMismatch {
                expected: (rows, cols),
                found: (data.len(), 1),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn diag(values: &[T]) -> Self {
        let n = values.len();
        let mut m = Self::zeros(n, n);
        for (i, v) in values.iter().enumerate() {
            m.data[i * n + i] = v.clone();
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: T) {
        self.data[i * self.cols + j] = value;
    }

    pub fn map(&self, f: impl Fn(&T) -> T) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn scale(&self, s: &T) -> Self {
        self.map(|x| x.clone() * s.clone())
    }

    pub fn trace(&self) -> T {
        let n = self.rows.min(self.cols);
        (0..n).fold(T::zero(), |acc, i| acc + self.get(i, i).clone())
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    /// Copy of the `nr × nc` sub-block starting at `(r0, c0)`.
    pub fn block(&self, r0: usize, c0: usize, nr: usize, nc: usize) -> Self {
        assert!(r0 + nr <= self.rows && c0 + nc <= self.cols, "block out of range");
        Self::from_fn(nr, nc, |i, j| self.get(r0 + i, c0 + j).clone())
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, b: &Self) {
        assert!(r0 + b.rows <= self.rows && c0 + b.cols <= self.cols, "block out of range");
        for i in 0..b.rows {
            for j in 0..b.cols {
                self.set(r0 + i, c0 + j, b.get(i, j).clone());
            }
        }
    }

    /// Columns `cols` of `self`, in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> Self {
        Self::from_fn(self.rows, cols.len(), |i, j| self.get(i, cols[j]).clone())
    }

    pub fn hcat(parts: &[&Self]) -> Result<Self, LinalgError> {
        let rows = parts.first().map(|p| p.rows).unwrap_or(0);
        if parts.iter().any(|p| p.rows != rows) {
            return Err(LinalgError::ShapeMismatch {
                expected: (rows, 0),
                found: (parts.iter().find(|p| p.rows != rows).unwrap().rows, 0),
            });
        }
        let cols = parts.iter().map(|p| p.cols).sum();
        let mut out = Self::zeros(rows, cols);
        let mut c0 = 0;
        for p in parts {
            out.set_block(0, c0, p);
            c0 += p.cols;
        }
        Ok(out)
    }

    pub fn vcat(parts: &[&Self]) -> Result<Self, LinalgError> {
        let cols = parts.first().map(|p| p.cols).unwrap_or(0);
        if parts.iter().any(|p| p.cols != cols) {
            return Err(LinalgError::ShapeMismatch {
                expected: (0, cols),
                found: (0, parts.iter().find(|p| p.cols != cols).unwrap().cols),
            });
        }
        let rows = parts.iter().map(|p| p.rows).sum();
        let mut out = Self::zeros(rows, cols);
        let mut r0 = 0;
        for p in parts {
            out.set_block(r0, 0, p);
            r0 += p.rows;
        }
        Ok(out)
    }

    pub fn try_mul(&self, rhs: &Self) -> Result<Self, LinalgError> {
        if self.cols != rhs.rows {
            return Err(LinalgError::ShapeMismatch {
                expected: (self.cols, rhs.cols),
                found: rhs.shape(),
            });
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let idx = i * rhs.cols + j;
                    out.data[idx] = out.data[idx].clone() + a.clone() * rhs.get(k, j).clone();
                }
            }
        }
        Ok(out)
    }

    pub fn max_row_norm(&self) -> f64 {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j).magnitude()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|x| x.magnitude()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data
            .iter()
            .map(|x| {
                let m = x.magnitude();
                m * m
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Determinant by partially pivoted elimination. Singular input gives zero.
    pub fn det(&self) -> Result<T, LinalgError> {
        if !self.is_square() {
            return Err(LinalgError::NotSquare(self.shape()));
        }
        let n = self.rows;
        let mut a = self.data.clone();
        let mut det = T::one();
        for col in 0..n {
            let (pivot_row, pivot_mag) = (col..n)
                .map(|r| (r, a[r * n + col].magnitude()))
                .fold((col, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pivot_mag == 0.0 || a[pivot_row * n + col].is_zero() {
                return Ok(T::zero());
            }
            if pivot_row != col {
                for j in 0..n {
                    a.swap(col * n + j, pivot_row * n + j);
                }
                det = -det;
            }
            let pivot = a[col * n + col].clone();
            det = det * pivot.clone();
            for r in col + 1..n {
                let factor = a[r * n + col].clone() / pivot.clone();
                if factor.is_zero() {
                    continue;
                }
                for j in col..n {
                    let v = a[r * n + j].clone() - factor.clone() * a[col * n + j].clone();
                    a[r * n + j] = v;
                }
            }
        }
        Ok(det)
    }

    /// Inverse by Gauss–Jordan elimination with partial pivoting.
    ///
    /// Fails with [`LinalgError::SingularMatrix`] when a pivot falls below
    /// `T::singular_tolerance()` times the largest row norm.
    pub fn inverse(&self) -> Result<Self, LinalgError> {
        if !self.is_square() {
            return Err(LinalgError::NotSquare(self.shape()));
        }
        let n = self.rows;
        let scale = self.max_row_norm();
        if scale == 0.0 {
            return Err(LinalgError::SingularMatrix);
        }
        let threshold = T::singular_tolerance() * scale;
        let mut a = self.data.clone();
        let mut inv = Self::identity(n).data;
        for col in 0..n {
            let (pivot_row, pivot_mag) = (col..n)
                .map(|r| (r, a[r * n + col].magnitude()))
                .fold((col, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pivot_mag <= threshold || a[pivot_row * n + col].is_zero() {
                return Err(LinalgError::SingularMatrix);
            }
            if pivot_row != col {
                for j in 0..n {
                    a.swap(col * n + j, pivot_row * n + j);
                    inv.swap(col * n + j, pivot_row * n + j);
                }
            }
            let pivot = a[col * n + col].clone();
            for j in 0..n {
                a[col * n + j] = a[col * n + j].clone() / pivot.clone();
                inv[col * n + j] = inv[col * n + j].clone() / pivot.clone();
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let factor = a[r * n + col].clone();
                if factor.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let v = a[r * n + j].clone() - factor.clone() * a[col * n + j].clone();
                    a[r * n + j] = v;
                    let w = inv[r * n + j].clone() - factor.clone() * inv[col * n + j].clone();
                    inv[r * n + j] = w;
                }
            }
        }
        Ok(Self {
            rows: n,
            cols: n,
            data: inv,
        })
    }

    /// Integer matrix power for square matrices, `k >= 0`.
    pub fn pow(&self, k: u32) -> Self {
        assert!(self.is_square());
        let mut out = Self::identity(self.rows);
        for _ in 0..k {
            out = &out * self;
        }
        out
    }
}

impl CMatrix {
    /// Checked constructor: rejects entries that are NaN or infinite.
    pub fn new_checked(rows: usize, cols: usize, data: Vec<Cplx>) -> Result<Self, LinalgError> {
        if data.iter().any(|z| !is_finite(*z)) {
            return Err(LinalgError::NonFinite);
        }
        Self::from_vec(rows, cols, data)
    }

    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Self {
        assert_eq!(data.len(), rows * cols);
        Self::from_fn(rows, cols, |i, j| Cplx::new(data[i * cols + j], 0.0))
    }

    pub fn real_diag(values: &[f64]) -> Self {
        let v: Vec<Cplx> = values.iter().map(|&x| Cplx::new(x, 0.0)).collect();
        Self::diag(&v)
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).conj())
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|z| is_finite(*z))
    }

    /// `‖a − b‖_F / max(‖b‖_F, 1)`.
    pub fn relative_distance(&self, other: &Self) -> f64 {
        assert_eq!(self.shape(), other.shape());
        let diff = self - other;
        diff.frobenius_norm() / other.frobenius_norm().max(1.0)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.is_square() && (self - &self.adjoint()).frobenius_norm() <= tol * self.frobenius_norm().max(1.0)
    }
}

impl<T: Field> Add for &Mat<T> {
    type Output = Mat<T>;
    fn add(self, rhs: &Mat<T>) -> Mat<T> {
        assert_eq!(self.shape(), rhs.shape(), "matrix add shape mismatch");
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a.clone() + b.clone())
                .collect(),
        }
    }
}

impl<T: Field> Sub for &Mat<T> {
    type Output = Mat<T>;
    fn sub(self, rhs: &Mat<T>) -> Mat<T> {
        assert_eq!(self.shape(), rhs.shape(), "matrix sub shape mismatch");
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a.clone() - b.clone())
                .collect(),
        }
    }
}

impl<T: Field> Neg for &Mat<T> {
    type Output = Mat<T>;
    fn neg(self) -> Mat<T> {
        self.map(|x| -x.clone())
    }
}

impl<T: Field> Mul for &Mat<T> {
    type Output = Mat<T>;
    fn mul(self, rhs: &Mat<T>) -> Mat<T> {
        self.try_mul(rhs).expect("matrix product shape mismatch")
    }
}

/// Wire form of a complex matrix: `{"rows": m, "cols": n, "data": [[re, im], …]}`, row-major.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<[f64; 2]>,
}

impl From<&CMatrix> for MatrixJson {
    fn from(m: &CMatrix) -> Self {
        Self {
            rows: m.rows,
            cols: m.cols,
            data: m.data.iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

impl TryFrom<MatrixJson> for CMatrix {
    type Error = LinalgError;
    fn try_from(j: MatrixJson) -> Result<Self, Self::Error> {
        if j.rows == 0 || j.cols == 0 {
            return Err(LinalgError::ShapeMismatch {
                expected: (1, 1),
                found: (j.rows, j.cols),
            });
        }
        let data = j.data.iter().map(|p| Cplx::new(p[0], p[1])).collect();
        CMatrix::new_checked(j.rows, j.cols, data)
    }
}

impl Serialize for CMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        MatrixJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for CMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let j = MatrixJson::deserialize(d)?;
        CMatrix::try_from(j).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::RandomStream;
    use proptest::prelude::*;

    fn c(x: f64) -> Cplx {
        Cplx::new(x, 0.0)
    }

    #[test]
    fn det_examples() {
        assert_eq!(CMatrix::identity(3).det().unwrap(), c(1.0));
        assert!((CMatrix::real_diag(&[2.0, 3.0]).det().unwrap() - c(6.0)).norm() < 1e-15);
        // a row swap flips the sign
        let swap = CMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        assert!((swap.det().unwrap() + c(1.0)).norm() < 1e-15);
        let singular = CMatrix::from_real(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        assert_eq!(singular.det().unwrap(), c(0.0));
        assert!(matches!(CMatrix::zeros(2, 3).det(), Err(LinalgError::NotSquare(_))));
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(CMatrix::identity(3).inverse().unwrap(), CMatrix::identity(3));
        let inv = CMatrix::real_diag(&[2.0, 4.0]).inverse().unwrap();
        assert!(inv.relative_distance(&CMatrix::real_diag(&[0.5, 0.25])) < 1e-15);
        let mut s = RandomStream::new(11);
        for _ in 0..20 {
            let a = &s.complex_matrix(3, 3, -1.0, 1.0) + &CMatrix::identity(3).scale(&c(2.0));
            let prod = &a * &a.inverse().unwrap();
            assert!(prod.relative_distance(&CMatrix::identity(3)) < 1e-10);
        }
        let singular = CMatrix::from_real(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        assert!(matches!(singular.inverse(), Err(LinalgError::SingularMatrix)));
    }

    #[test]
    fn json_round_trip() {
        let mut s = RandomStream::new(12);
        let a = s.complex_matrix(2, 3, -1.0, 1.0);
        let j = MatrixJson::from(&a);
        assert_eq!((j.rows, j.cols, j.data.len()), (2, 3, 6));
        assert_eq!(j.data[1], [a.get(0, 1).re, a.get(0, 1).im]);
        assert_eq!(CMatrix::try_from(j).unwrap(), a);
        let bad = MatrixJson { rows: 2, cols: 2, data: vec![[0.0, 0.0]; 3] };
        assert!(CMatrix::try_from(bad).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn det_is_multiplicative(n in 1usize..=5, seed in any::<u64>()) {
            let mut s = RandomStream::new(seed);
            let a = s.complex_matrix(n, n, -1.0, 1.0);
            let b = s.complex_matrix(n, n, -1.0, 1.0);
            let lhs = (&a * &b).det().unwrap();
            let rhs = a.det().unwrap() * b.det().unwrap();
            prop_assert!((lhs - rhs).norm() <= 1e-11 * rhs.norm().max(1e-300) + 1e-14);
        }

        #[test]
        fn inverse_residual(n in 1usize..=5, seed in any::<u64>()) {
            let mut s = RandomStream::new(seed);
            let a = &s.complex_matrix(n, n, -1.0, 1.0) + &CMatrix::identity(n).scale(&c(n as f64));
            let prod = &a * &a.inverse().unwrap();
            prop_assert!(prod.relative_distance(&CMatrix::identity(n)) < 1e-10);
        }
    }
}
