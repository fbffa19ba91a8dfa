//! Truncated polynomials `h_0 + h_1 w + ... + h_{p-1} w^{p-1}` with square
//! matrix coefficients, multiplied modulo `w^p`.

use std::ops::{Add, Sub};

use super::JordanError;
use crate::numeric::scalar::{rational_to_cplx, Cplx, Field, Rational};
use crate::numeric::Mat;

#[derive(Clone, Debug, PartialEq)]
pub struct TruncPoly<T> {
    r: usize,
    coeffs: Vec<Mat<T>>,
}

pub type CTruncPoly = TruncPoly<Cplx>;

impl<T: Field> TruncPoly<T> {
    /// Builds `Σ coeffs[i] w^i`; `p` is `coeffs.len()`.
    pub fn new(coeffs: Vec<Mat<T>>) -> Result<Self, JordanError> {
        let first = coeffs.first().ok_or(JordanError::EmptyPolynomial)?;
        let r = first.rows();
        if r == 0 {
            return Err(JordanError::EmptyPolynomial);
        }
        for c in &coeffs {
            if c.shape() != (r, r) {
                return Err(JordanError::ShapeMismatch { expected: (r, coeffs.len()), found: (c.rows(), c.cols()) });
            }
        }
        Ok(TruncPoly { r, coeffs })
    }

    pub fn unit(r: usize, p: usize) -> Self {
        let mut coeffs = vec![Mat::zeros(r, r); p];
        coeffs[0] = Mat::identity(r);
        TruncPoly { r, coeffs }
    }

    pub fn zero(r: usize, p: usize) -> Self {
        TruncPoly { r, coeffs: vec![Mat::zeros(r, r); p] }
    }

    /// `1 + Σ_{i≥1} h_i w^i` from the higher coefficients alone.
    pub fn unipotent(r: usize, higher: &[Mat<T>]) -> Result<Self, JordanError> {
        let mut coeffs = Vec::with_capacity(higher.len() + 1);
        coeffs.push(Mat::identity(r));
        coeffs.extend(higher.iter().cloned());
        Self::new(coeffs)
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn p(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeff(&self, i: usize) -> &Mat<T> {
        &self.coeffs[i]
    }

    pub fn coeffs(&self) -> &[Mat<T>] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Mat<T>> {
        self.coeffs
    }

    fn check_same(&self, other: &Self) -> Result<(), JordanError> {
        if self.r != other.r || self.p() != other.p() {
            return Err(JordanError::ShapeMismatch { expected: (self.r, self.p()), found: (other.r, other.p()) });
        }
        Ok(())
    }

    /// `c_k = Σ_{i+j=k} a_i b_j`, order of the factors preserved.
    pub fn trunc_mul(&self, other: &Self) -> Result<Self, JordanError> {
        self.check_same(other)?;
        let p = self.p();
        let mut out = Self::zero(self.r, p);
        for i in 0..p {
            if self.coeffs[i].is_zero() {
                continue;
            }
            for j in 0..p - i {
                if other.coeffs[j].is_zero() {
                    continue;
                }
                let prod = &self.coeffs[i] * &other.coeffs[j];
                out.coeffs[i + j] = &out.coeffs[i + j] + &prod;
            }
        }
        Ok(out)
    }

    pub fn trunc_inverse(&self) -> Result<Self, JordanError> {
        let inv0 = self.coeffs[0].inverse().map_err(|_| JordanError::NotAUnit)?;
        let p = self.p();
        // b_0 = a_0^{-1}, b_k = -a_0^{-1} Σ_{i=1}^{k} a_i b_{k-i}
        let mut b: Vec<Mat<T>> = Vec::with_capacity(p);
        b.push(inv0.clone());
        for k in 1..p {
            let mut acc = Mat::zeros(self.r, self.r);
            for i in 1..=k {
                acc = &acc + &(&self.coeffs[i] * &b[k - i]);
            }
            b.push(-&(&inv0 * &acc));
        }
        Ok(TruncPoly { r: self.r, coeffs: b })
    }

    /// `h_0^{-1} h`, the unipotent factor with `h = h_0 · ĥ`.
    pub fn unipotent_part(&self) -> Result<Self, JordanError> {
        let inv0 = self.coeffs[0].inverse().map_err(|_| JordanError::NotAUnit)?;
        Ok(self.left_mul(&inv0))
    }

    pub fn left_mul(&self, g: &Mat<T>) -> Self {
        TruncPoly { r: self.r, coeffs: self.coeffs.iter().map(|c| g * c).collect() }
    }

    pub fn right_mul(&self, g: &Mat<T>) -> Self {
        TruncPoly { r: self.r, coeffs: self.coeffs.iter().map(|c| c * g).collect() }
    }

    /// Coefficient-wise `g h_i g^{-1}`.
    pub fn conjugate(&self, g: &Mat<T>) -> Result<Self, JordanError> {
        let gi = g.inverse().map_err(|_| JordanError::NotAUnit)?;
        Ok(TruncPoly { r: self.r, coeffs: self.coeffs.iter().map(|c| &(g * c) * &gi).collect() })
    }

    pub fn scale(&self, s: &T) -> Self {
        TruncPoly { r: self.r, coeffs: self.coeffs.iter().map(|c| c.scale(s)).collect() }
    }

    pub fn is_unipotent(&self) -> bool {
        self.coeffs[0] == Mat::identity(self.r)
    }

    /// Terminating logarithm `Σ_{k<p} (-1)^{k+1}/k (h - 1)^k` of a unipotent element.
    pub fn nilpotent_log(&self) -> Result<Self, JordanError> {
        if !self.is_unipotent() {
            return Err(JordanError::NotUnipotent);
        }
        let p = self.p();
        let mut x = self.clone();
        x.coeffs[0] = Mat::zeros(self.r, self.r);
        let mut out = Self::zero(self.r, p);
        let mut power = x.clone();
        for k in 1..p {
            let sign = if k % 2 == 1 { 1 } else { -1 };
            out = &out + &power.scale(&T::from_ratio(sign, k as i64));
            power = power.trunc_mul(&x)?;
        }
        Ok(out)
    }

    /// Terminating exponential `Σ_{k<p} X^k / k!` of an element with `X_0 = 0`.
    pub fn nilpotent_exp(&self) -> Result<Self, JordanError> {
        if !self.coeffs[0].is_zero() {
            return Err(JordanError::NotNilpotent);
        }
        let p = self.p();
        let mut out = Self::unit(self.r, p);
        let mut term = Self::unit(self.r, p);
        for k in 1..p {
            term = term.trunc_mul(self)?.scale(&T::from_ratio(1, k as i64));
            out = &out + &term;
        }
        Ok(out)
    }
}

impl<'a, T: Field> Add for &'a TruncPoly<T> {
    type Output = TruncPoly<T>;
    fn add(self, rhs: Self) -> TruncPoly<T> {
        assert_eq!((self.r, self.p()), (rhs.r, rhs.p()), "truncated polynomial shape mismatch");
        TruncPoly { r: self.r, coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a + b).collect() }
    }
}

impl<'a, T: Field> Sub for &'a TruncPoly<T> {
    type Output = TruncPoly<T>;
    fn sub(self, rhs: Self) -> TruncPoly<T> {
        assert_eq!((self.r, self.p()), (rhs.r, rhs.p()), "truncated polynomial shape mismatch");
        TruncPoly { r: self.r, coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a - b).collect() }
    }
}

impl TruncPoly<Rational> {
    pub fn to_cplx(&self) -> CTruncPoly {
        TruncPoly { r: self.r, coeffs: self.coeffs.iter().map(|c| mat_to_cplx(c)).collect() }
    }
}

pub fn mat_to_cplx(m: &Mat<Rational>) -> Mat<Cplx> {
    Mat::from_fn(m.rows(), m.cols(), |i, j| rational_to_cplx(m.get(i, j)))
}

impl CTruncPoly {
    /// Exponential of an arbitrary element by scaling and squaring.
    ///
    /// Needed for one-parameter subgroups whose degree-zero part is nonzero,
    /// where the series does not terminate.
    pub fn exp_general(&self) -> Self {
        let norm: f64 = self.coeffs.iter().map(|c| c.max_row_norm()).sum();
        let mut squarings = 0u32;
        let mut s = 1.0;
        while norm * s > 0.25 {
            s *= 0.5;
            squarings += 1;
        }
        let x = self.scale(&Cplx::new(s, 0.0));
        let p = self.p();
        let mut out = Self::unit(self.r, p);
        let mut term = Self::unit(self.r, p);
        for k in 1..=18 {
            term = term.trunc_mul(&x).expect("same shape").scale(&Cplx::new(1.0 / k as f64, 0.0));
            out = &out + &term;
        }
        for _ in 0..squarings {
            out = out.trunc_mul(&out).expect("same shape");
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.max_abs()).fold(0.0, f64::max)
    }

    pub fn distance(&self, other: &Self) -> f64 {
        (self - other).max_abs()
    }

    pub fn is_unit_within(&self, tol: f64) -> bool {
        self.distance(&Self::unit(self.r, self.p())) <= tol
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::RandomStream;
    use num_bigint::BigInt;

    pub(crate) fn random_rational(r: usize, stream: &mut RandomStream) -> Mat<Rational> {
        Mat::from_fn(r, r, |_, _| {
            let num = (stream.draw_u64() % 11) as i64 - 5;
            let den = (stream.draw_u64() % 4) as i64 + 1;
            Rational::new(BigInt::from(num), BigInt::from(den))
        })
    }

    fn random_cpoly(r: usize, p: usize, stream: &mut RandomStream, unit: bool) -> CTruncPoly {
        let mut coeffs: Vec<_> = (0..p).map(|_| stream.complex_matrix(r, r, -1.0, 1.0)).collect();
        if unit {
            coeffs[0] = &coeffs[0].scale(&Cplx::new(0.2, 0.0)) + &Mat::identity(r);
        }
        TruncPoly::new(coeffs).unwrap()
    }

    #[test]
    fn unit_is_neutral() {
        let mut s = RandomStream::new(1);
        let b = random_cpoly(2, 3, &mut s, false);
        assert_eq!(TruncPoly::unit(2, 3).trunc_mul(&b).unwrap(), b);
    }

    #[test]
    fn degree_one_truncation() {
        let mut s = RandomStream::new(2);
        let h1 = s.complex_matrix(2, 2, -1.0, 1.0);
        let g1 = s.complex_matrix(2, 2, -1.0, 1.0);
        let a = TruncPoly::unipotent(2, std::slice::from_ref(&h1)).unwrap();
        let b = TruncPoly::unipotent(2, std::slice::from_ref(&g1)).unwrap();
        let c = a.trunc_mul(&b).unwrap();
        assert_eq!(c.coeff(0), &Mat::identity(2));
        assert_eq!(c.coeff(1), &(&h1 + &g1));
    }

    #[test]
    fn associativity_is_exact_over_rationals() {
        let mut s = RandomStream::new(3);
        for r in 1..=3 {
            let mk = |s: &mut RandomStream| TruncPoly::new((0..3).map(|_| random_rational(r, s)).collect()).unwrap();
            let (a, b, c) = (mk(&mut s), mk(&mut s), mk(&mut s));
            let left = a.trunc_mul(&b).unwrap().trunc_mul(&c).unwrap();
            let right = a.trunc_mul(&b.trunc_mul(&c).unwrap()).unwrap();
            assert_eq!(left, right);
        }
    }

    #[test]
    fn shape_mismatch_is_reported() {
        let a = TruncPoly::<Cplx>::unit(2, 3);
        let b = TruncPoly::<Cplx>::unit(2, 4);
        assert!(matches!(a.trunc_mul(&b), Err(JordanError::ShapeMismatch { .. })));
    }

    #[test]
    fn inverse_of_unit_and_geometric_series() {
        assert_eq!(TruncPoly::<Cplx>::unit(2, 4).trunc_inverse().unwrap(), TruncPoly::unit(2, 4));
        let mut s = RandomStream::new(4);
        let n = random_rational(2, &mut s);
        let a = TruncPoly::unipotent(2, &[n.clone(), Mat::zeros(2, 2), Mat::zeros(2, 2)]).unwrap();
        let inv = a.trunc_inverse().unwrap();
        assert_eq!(inv.coeff(1), &(-&n));
        assert_eq!(inv.coeff(2), &n.pow(2));
        assert_eq!(inv.coeff(3), &(-&n.pow(3)));
    }

    #[test]
    fn random_inverse_residual() {
        let mut s = RandomStream::new(5);
        for _ in 0..20 {
            let a = random_cpoly(3, 4, &mut s, true);
            let prod = a.trunc_mul(&a.trunc_inverse().unwrap()).unwrap();
            assert!(prod.is_unit_within(1e-12));
        }
        let singular = TruncPoly::<Cplx>::zero(2, 2);
        assert!(matches!(singular.trunc_inverse(), Err(JordanError::NotAUnit)));
    }

    #[test]
    fn log_and_exp_trivial_cases() {
        assert_eq!(TruncPoly::<Cplx>::unit(2, 4).nilpotent_log().unwrap(), TruncPoly::zero(2, 4));
        assert_eq!(TruncPoly::<Cplx>::zero(2, 4).nilpotent_exp().unwrap(), TruncPoly::unit(2, 4));
        let mut s = RandomStream::new(6);
        let a = s.complex_matrix(2, 2, -1.0, 1.0);
        let x = TruncPoly::new(vec![Mat::zeros(2, 2), a.clone()]).unwrap();
        let e = x.nilpotent_exp().unwrap();
        assert_eq!(e.coeff(0), &Mat::identity(2));
        assert_eq!(e.coeff(1), &a);
        assert!(matches!(TruncPoly::<Cplx>::zero(2, 3).nilpotent_log(), Err(JordanError::NotUnipotent)));
        assert!(matches!(TruncPoly::<Cplx>::unit(2, 3).nilpotent_exp(), Err(JordanError::NotNilpotent)));
    }

    #[test]
    fn exp_log_round_trip_exact() {
        let mut s = RandomStream::new(7);
        for r in 1..=3 {
            for p in 2..=5 {
                let higher: Vec<_> = (1..p).map(|_| random_rational(r, &mut s)).collect();
                let mut coeffs = vec![Mat::zeros(r, r)];
                coeffs.extend(higher);
                let x = TruncPoly::new(coeffs).unwrap();
                let back = x.nilpotent_exp().unwrap().nilpotent_log().unwrap();
                assert_eq!(back, x);
            }
        }
    }

    #[test]
    fn exp_general_matches_nilpotent_exp_and_scalar_exp() {
        let mut s = RandomStream::new(8);
        let mut x = random_cpoly(2, 4, &mut s, false);
        let zero = Mat::zeros(2, 2);
        let mut coeffs = x.coeffs.clone();
        coeffs[0] = zero;
        x = TruncPoly::new(coeffs).unwrap();
        let a = x.exp_general();
        let b = x.nilpotent_exp().unwrap();
        assert!(a.distance(&b) < 1e-12);
        // p = 1, r = 1 reduces to the scalar exponential
        let c = TruncPoly::new(vec![Mat::scalar(1, Cplx::new(1.5, -0.5))]).unwrap().exp_general();
        assert!((c.coeff(0).get(0, 0) - Cplx::new(1.5, -0.5).exp()).norm() < 1e-13);
    }

    #[test]
    fn exp_general_is_a_one_parameter_group() {
        let mut s = RandomStream::new(9);
        let x = random_cpoly(2, 3, &mut s, false);
        let half = x.scale(&Cplx::new(0.5, 0.0)).exp_general();
        let full = x.exp_general();
        assert!(half.trunc_mul(&half).unwrap().distance(&full) < 1e-12);
    }
}
