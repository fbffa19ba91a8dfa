//! The coefficients `θ_k(h)` of `log h` for unipotent `h`.

use super::ncpoly::NCPolynomial;
use super::trunc::TruncPoly;
use super::JordanError;
use crate::numeric::scalar::{Field, Rational};
use crate::numeric::Mat;

/// `θ_1(h), ..., θ_{p-1}(h)` for a unipotent element.
pub fn theta<T: Field>(h: &TruncPoly<T>) -> Result<Vec<Mat<T>>, JordanError> {
    let log = h.nilpotent_log()?;
    Ok(log.into_coeffs().into_iter().skip(1).collect())
}

/// `Tr θ_k(h)` for `k = 1..p-1`.
pub fn theta_traces<T: Field>(h: &TruncPoly<T>) -> Result<Vec<T>, JordanError> {
    Ok(theta(h)?.iter().map(|m| m.trace()).collect())
}

/// `θ_1, ..., θ_{p-1}` as noncommutative polynomials in `h_1, ..., h_{p-1}`.
pub fn theta_symbolic(p: usize) -> Result<Vec<NCPolynomial>, JordanError> {
    if p < 2 {
        return Err(JordanError::InvalidDegree(p));
    }
    let q = p - 1;
    // x = Σ h_i w^i, stored by degree; index 0 is the (zero) constant term
    let x: Vec<NCPolynomial> =
        (0..p).map(|d| if d == 0 { NCPolynomial::zero(q) } else { NCPolynomial::generator(q, d) }).collect();
    let mul = |a: &[NCPolynomial], b: &[NCPolynomial]| -> Vec<NCPolynomial> {
        let mut out = vec![NCPolynomial::zero(q); p];
        for i in 0..p {
            for j in 0..p - i {
                if a[i].is_zero() || b[j].is_zero() {
                    continue;
                }
                out[i + j] = out[i + j].add(&a[i].mul(&b[j]));
            }
        }
        out
    };
    let mut log = vec![NCPolynomial::zero(q); p];
    let mut power = x.clone();
    for k in 1..p {
        let sign = if k % 2 == 1 { 1 } else { -1 };
        let c = Rational::from_ratio(sign, k as i64);
        for d in 0..p {
            log[d] = log[d].add(&power[d].scale(&c));
        }
        power = mul(&power, &x);
    }
    debug_assert!(log[0].is_zero());
    Ok(log.into_iter().skip(1).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{CMatrix, Cplx, RandomStream};

    fn q(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    fn expected_p5() -> Vec<NCPolynomial> {
        let g = 4;
        vec![
            NCPolynomial::from_terms(g, vec![(vec![1], q(1, 1))]),
            NCPolynomial::from_terms(g, vec![(vec![2], q(1, 1)), (vec![1, 1], q(-1, 2))]),
            NCPolynomial::from_terms(
                g,
                vec![(vec![3], q(1, 1)), (vec![1, 2], q(-1, 2)), (vec![2, 1], q(-1, 2)), (vec![1, 1, 1], q(1, 3))],
            ),
            NCPolynomial::from_terms(
                g,
                vec![
                    (vec![4], q(1, 1)),
                    (vec![1, 3], q(-1, 2)),
                    (vec![2, 2], q(-1, 2)),
                    (vec![3, 1], q(-1, 2)),
                    (vec![1, 1, 2], q(1, 3)),
                    (vec![1, 2, 1], q(1, 3)),
                    (vec![2, 1, 1], q(1, 3)),
                    (vec![1, 1, 1, 1], q(-1, 4)),
                ],
            ),
        ]
    }

    #[test]
    fn symbolic_theta_low_orders() {
        let got = theta_symbolic(5).unwrap();
        assert_eq!(got, expected_p5());
        assert_eq!(
            got[3].to_latex(),
            "h_{4}-\\frac{1}{2}(h_{1}h_{3}+h_{2}^{2}+h_{3}h_{1})+\\frac{1}{3}(h_{1}^{2}h_{2}+h_{1}h_{2}h_{1}+h_{2}h_{1}^{2})-\\frac{1}{4}h_{1}^{4}"
        );
        assert_eq!(got[2].to_text(), "h3 - 1/2 (h1 h2 + h2 h1) + 1/3 h1^3");
    }

    #[test]
    fn symbolic_terms_are_homogeneous() {
        for p in 2..=7 {
            for (k, t) in theta_symbolic(p).unwrap().iter().enumerate() {
                assert_eq!(t.homogeneous_weight(), Some(k + 1));
            }
        }
        assert!(matches!(theta_symbolic(1), Err(JordanError::InvalidDegree(1))));
    }

    #[test]
    fn numeric_matches_symbolic() {
        let mut s = RandomStream::new(11);
        for r in 1..=3 {
            for p in 2..=6 {
                let higher: Vec<CMatrix> = (1..p).map(|_| s.complex_matrix(r, r, -1.0, 1.0)).collect();
                let h = TruncPoly::unipotent(r, &higher).unwrap();
                let num = theta(&h).unwrap();
                let sym = theta_symbolic(p).unwrap();
                for (a, b) in num.iter().zip(&sym) {
                    assert!((a - &b.evaluate(&higher)).max_abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn trace_theta_is_conjugation_invariant() {
        let mut s = RandomStream::new(12);
        for _ in 0..10 {
            let higher: Vec<CMatrix> = (1..4).map(|_| s.complex_matrix(3, 3, -1.0, 1.0)).collect();
            let h = TruncPoly::unipotent(3, &higher).unwrap();
            let g = &s.complex_matrix(3, 3, -0.3, 0.3) + &CMatrix::identity(3);
            let a = theta_traces(&h).unwrap();
            let conj = h.conjugate(&g).unwrap();
            let conj = TruncPoly::unipotent(3, &conj.coeffs()[1..]).unwrap();
            let b = theta_traces(&conj).unwrap();
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn scalar_theta_is_additive() {
        let mut s = RandomStream::new(13);
        for p in 2..=5 {
            let ha: Vec<CMatrix> = (1..p).map(|_| s.complex_matrix(1, 1, -1.0, 1.0)).collect();
            let hb: Vec<CMatrix> = (1..p).map(|_| s.complex_matrix(1, 1, -1.0, 1.0)).collect();
            let a = TruncPoly::unipotent(1, &ha).unwrap();
            let b = TruncPoly::unipotent(1, &hb).unwrap();
            let ab = a.trunc_mul(&b).unwrap();
            let (ta, tb, tab) = (theta_traces(&a).unwrap(), theta_traces(&b).unwrap(), theta_traces(&ab).unwrap());
            for k in 0..p - 1 {
                assert!((ta[k] + tb[k] - tab[k]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn theta_one_is_h_one() {
        let h1 = CMatrix::from_real(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let h = TruncPoly::unipotent(2, &[h1.clone(), CMatrix::zeros(2, 2)]).unwrap();
        let t = theta(&h).unwrap();
        assert_eq!(t[0], h1);
        // θ_2 = h_2 - h_1²/2 with h_2 = 0
        assert!((&t[1] + &h1.pow(2).scale(&Cplx::new(0.5, 0.0))).max_abs() < 1e-15);
    }
}
