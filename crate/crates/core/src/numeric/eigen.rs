//! Cyclic Jacobi eigensolver for small Hermitian matrices.

use super::matrix::CMatrix;
use super::scalar::Cplx;
use super::LinalgError;

const MAX_SWEEPS: usize = 100;

#[derive(Clone, Debug)]
pub struct HermitianEigen {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Unitary; column `k` belongs to `eigenvalues[k]`.
    pub eigenvectors: CMatrix,
}

impl HermitianEigen {
    /// `V diag(λ) V†`.
    pub fn reconstruct(&self) -> CMatrix {
        let d = CMatrix::real_diag(&self.eigenvalues);
        &(&self.eigenvectors * &d) * &self.eigenvectors.adjoint()
    }
}

pub fn hermitian_eigen(a: &CMatrix) -> Result<HermitianEigen, LinalgError> {
    if !a.is_square() {
        return Err(LinalgError::NotSquare(a.shape()));
    }
    if !a.is_hermitian(1e-10) {
        return Err(LinalgError::NotHermitian);
    }
    let n = a.rows();
    // symmetrize so rounding in the input cannot leak an imaginary diagonal
    let mut m = CMatrix::from_fn(n, n, |i, j| 0.5 * (a.get(i, j) + a.get(j, i).conj()));
    let mut v = CMatrix::identity(n);
    let norm = m.frobenius_norm().max(f64::MIN_POSITIVE);

    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m.get(i, j).norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * norm {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let g = *m.get(p, q);
                let g_abs = g.norm();
                if g_abs <= 1e-300 {
                    continue;
                }
                let phase = g / g_abs;
                let app = m.get(p, p).re;
                let aqq = m.get(q, q).re;
                let theta = 0.5 * (2.0 * g_abs).atan2(app - aqq);
                let (s, c) = theta.sin_cos();
                let mut w = CMatrix::identity(n);
                w.set(p, p, Cplx::new(c, 0.0));
                w.set(q, q, Cplx::new(c, 0.0));
                w.set(p, q, -phase * s);
                w.set(q, p, phase.conj() * s);
                m = &(&w.adjoint() * &m) * &w;
                m.set(p, q, Cplx::new(0.0, 0.0));
                m.set(q, p, Cplx::new(0.0, 0.0));
                v = &v * &w;
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m.get(i, i).re.total_cmp(&m.get(j, j).re));
    let eigenvalues = order.iter().map(|&i| m.get(i, i).re).collect();
    let eigenvectors = v.select_columns(&order);
    Ok(HermitianEigen {
        eigenvalues,
        eigenvectors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::random::RandomStream;

    #[test]
    fn diagonal_input() {
        let e = hermitian_eigen(&CMatrix::real_diag(&[1.0, 2.0])).unwrap();
        assert_eq!(e.eigenvalues, vec![1.0, 2.0]);
        assert!(e.eigenvectors.relative_distance(&CMatrix::identity(2)) < 1e-15);
    }

    #[test]
    fn pauli_x() {
        let a = CMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let e = hermitian_eigen(&a).unwrap();
        assert!((e.eigenvalues[0] + 1.0).abs() < 1e-14);
        assert!((e.eigenvalues[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn random_reconstruction_and_trace() {
        let mut rng = RandomStream::new(11);
        for n in 1..=5 {
            for _ in 0..20 {
                let a = rng.hermitian(n);
                let e = hermitian_eigen(&a).unwrap();
                assert!(e.reconstruct().relative_distance(&a) < 1e-9);
                let vv = &e.eigenvectors.adjoint() * &e.eigenvectors;
                assert!(vv.relative_distance(&CMatrix::identity(n)) < 1e-10);
                let tr: f64 = e.eigenvalues.iter().sum();
                assert!((tr - a.trace().re).abs() < 1e-10 * (1.0 + a.frobenius_norm()));
                assert!(e.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
            }
        }
    }

    #[test]
    fn rejects_non_hermitian() {
        let a = CMatrix::from_real(2, 2, &[0.0, 1.0, 2.0, 0.0]);
        assert!(matches!(hermitian_eigen(&a), Err(LinalgError::NotHermitian)));
    }
}
