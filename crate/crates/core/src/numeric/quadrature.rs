//! Gaussian quadrature rules by the Golub–Welsch construction.
//!
//! Nodes are eigenvalues of the Jacobi matrix of the three-term recurrence,
//! polished by Newton steps on the orthonormal polynomial; weights come from
//! the Christoffel function, which keeps full relative accuracy in the
//! tails. Weights that underflow in `f64` are dropped from the rule.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use super::QuadratureError;

pub const MAX_NODES: usize = 512;

/// Weight function and interval of a rule.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum QuadratureKind {
    /// Weight 1 on (0, 1).
    Legendre,
    /// Weight `e^{-u}` on (0, ∞).
    Laguerre,
    /// Weight `e^{-u²}` on ℝ.
    Hermite,
    /// Weight `u^alpha (1-u)^beta` on (0, 1).
    Jacobi { alpha: f64, beta: f64 },
    /// Weight `u^alpha e^{-u}` on (0, ∞).
    GenLaguerre { alpha: f64 },
}

impl QuadratureKind {
    /// Integral of the weight function.
    pub fn total_mass(&self) -> f64 {
        match *self {
            QuadratureKind::Legendre => 1.0,
            QuadratureKind::Laguerre => 1.0,
            QuadratureKind::Hermite => std::f64::consts::PI.sqrt(),
            QuadratureKind::Jacobi { alpha, beta } => {
                (ln_gamma(alpha + 1.0) + ln_gamma(beta + 1.0) - ln_gamma(alpha + beta + 2.0)).exp()
            }
            QuadratureKind::GenLaguerre { alpha } => ln_gamma(alpha + 1.0).exp(),
        }
    }

    /// Recurrence coefficients `(a_k, b_k)` of the monic orthogonal polynomials,
    /// `p_{k+1} = (x - a_k) p_k - b_k p_{k-1}`, in the rule's own variable.
    fn recurrence(&self, n: usize) -> (Vec<f64>, Vec<f64>) {
        let mut a = vec![0.0; n];
        let mut b = vec![0.0; n + 1];
        match *self {
            QuadratureKind::Legendre => {
                return Self::Jacobi { alpha: 0.0, beta: 0.0 }.recurrence(n);
            }
            QuadratureKind::Laguerre => {
                return Self::GenLaguerre { alpha: 0.0 }.recurrence(n);
            }
            QuadratureKind::Hermite => {
                for (k, bk) in b.iter_mut().enumerate().skip(1) {
                    *bk = k as f64 / 2.0;
                }
            }
            QuadratureKind::GenLaguerre { alpha } => {
                for (k, ak) in a.iter_mut().enumerate() {
                    *ak = 2.0 * k as f64 + alpha + 1.0;
                }
                for (k, bk) in b.iter_mut().enumerate().skip(1) {
                    let k = k as f64;
                    *bk = k * (k + alpha);
                }
            }
            QuadratureKind::Jacobi { alpha, beta } => {
                // Jacobi on [-1, 1] has weight (1-x)^ja (1+x)^jb; t = (1+x)/2 maps it to ours
                let (ja, jb) = (beta, alpha);
                let s = ja + jb;
                for (k, ak) in a.iter_mut().enumerate() {
                    let x = if k == 0 {
                        (jb - ja) / (s + 2.0)
                    } else {
                        let kk = 2.0 * k as f64 + s;
                        (jb * jb - ja * ja) / (kk * (kk + 2.0))
                    };
                    *ak = 0.5 * (x + 1.0);
                }
                for (k, bk) in b.iter_mut().enumerate().skip(1) {
                    let kf = k as f64;
                    let x = if k == 1 {
                        4.0 * (1.0 + ja) * (1.0 + jb) / ((2.0 + s).powi(2) * (3.0 + s))
                    } else {
                        let kk = 2.0 * kf + s;
                        4.0 * kf * (kf + ja) * (kf + jb) * (kf + s) / (kk * kk * (kk + 1.0) * (kk - 1.0))
                    };
                    *bk = 0.25 * x;
                }
            }
        }
        (a, b)
    }

    fn validate(&self) -> Result<(), QuadratureError> {
        let ok = match *self {
            QuadratureKind::Jacobi { alpha, beta } => alpha > -1.0 && beta > -1.0,
            QuadratureKind::GenLaguerre { alpha } => alpha > -1.0,
            _ => true,
        };
        if ok {
            Ok(())
        } else {
            Err(QuadratureError::InvalidWeight(*self))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureRule {
    pub kind: QuadratureKind,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `Σ w_i f(x_i)`, approximating `∫ weight(x) f(x) dx`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

/// Implicit symmetric QL on a tridiagonal matrix; returns its eigenvalues.
fn tridiagonal_eigenvalues(diag: &[f64], off: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut d = diag.to_vec();
    let mut e = vec![0.0; n];
    e[..n.saturating_sub(1)].copy_from_slice(&off[..n.saturating_sub(1)]);
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                break;
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut underflow = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    d.sort_by(f64::total_cmp);
    d
}

const RESCALE_EXP: i32 = 300;

/// Orthonormal (probability-measure) polynomials at `x`: returns
/// `(p_n, p_n', Σ_{k<n} p_k², log2 scale)` with every value divided by `2^scale`
/// (`2^{2 scale}` for the sum).
fn orthonormal_at(x: f64, a: &[f64], sqrt_b: &[f64], n: usize) -> (f64, f64, f64, i32) {
    let mut p_prev = 0.0;
    let mut p = 1.0;
    let mut dp_prev = 0.0;
    let mut dp = 0.0;
    let mut sum = 0.0;
    let mut scale = 0;
    let big = 2f64.powi(RESCALE_EXP);
    for k in 0..n {
        sum += p * p;
        let p_next = ((x - a[k]) * p - sqrt_b[k] * p_prev) / sqrt_b[k + 1];
        let dp_next = (p + (x - a[k]) * dp - sqrt_b[k] * dp_prev) / sqrt_b[k + 1];
        p_prev = p;
        p = p_next;
        dp_prev = dp;
        dp = dp_next;
        if p.abs() > big || dp.abs() > big {
            let inv = 2f64.powi(-RESCALE_EXP);
            p *= inv;
            p_prev *= inv;
            dp *= inv;
            dp_prev *= inv;
            sum *= inv * inv;
            scale += RESCALE_EXP;
        }
    }
    (p, dp, sum, scale)
}

pub fn quadrature_nodes(kind: QuadratureKind, count: usize) -> Result<QuadratureRule, QuadratureError> {
    if count == 0 || count > MAX_NODES {
        return Err(QuadratureError::UnsupportedCount(count));
    }
    kind.validate()?;
    let (a, b) = kind.recurrence(count);
    let sqrt_b: Vec<f64> = b.iter().map(|x| x.sqrt()).collect();
    let mut nodes = tridiagonal_eigenvalues(&a, &sqrt_b[1..]);
    let mass = kind.total_mass();
    let mut weights = Vec::with_capacity(count);
    for x in nodes.iter_mut() {
        for _ in 0..3 {
            let (p, dp, _, _) = orthonormal_at(*x, &a, &sqrt_b, count);
            if dp == 0.0 || !dp.is_finite() {
                break;
            }
            let step = p / dp;
            if !step.is_finite() {
                break;
            }
            *x -= step;
            if step.abs() <= 1e-16 * x.abs().max(1e-300) {
                break;
            }
        }
        let (_, _, sum, scale) = orthonormal_at(*x, &a, &sqrt_b, count);
        let w = mass / sum * 2f64.powi(-2 * scale);
        weights.push(w);
    }
    let (nodes, weights): (Vec<f64>, Vec<f64>) = nodes
        .into_iter()
        .zip(weights)
        .filter(|(_, w)| *w > 0.0 && w.is_finite())
        .unzip();
    Ok(QuadratureRule { kind, nodes, weights })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn beta_fn(a: f64, b: f64) -> f64 {
        (ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)).exp()
    }

    #[test]
    fn legendre_two_nodes_integrate_square() {
        let rule = quadrature_nodes(QuadratureKind::Legendre, 2).unwrap();
        assert!((rule.integrate(|u| u * u) - 1.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn laguerre_gamma_four() {
        let rule = quadrature_nodes(QuadratureKind::Laguerre, 64).unwrap();
        assert!((rule.integrate(|u| u.powi(3)) - 6.0).abs() < 1e-10);
    }

    #[test]
    fn hermite_gaussian_after_scaling() {
        // u = √2 x turns ∫ e^{-u²/2} du into √2 ∫ e^{-x²} dx
        let rule = quadrature_nodes(QuadratureKind::Hermite, 64).unwrap();
        let g = 2f64.sqrt() * rule.integrate(|_| 1.0);
        assert!((g - (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-10);
    }

    #[test]
    fn polynomial_exactness_to_degree_2n_minus_1() {
        for n in [1usize, 3, 8, 16] {
            let leg = quadrature_nodes(QuadratureKind::Legendre, n).unwrap();
            for k in 0..2 * n {
                let exact = 1.0 / (k as f64 + 1.0);
                assert!((leg.integrate(|u| u.powi(k as i32)) - exact).abs() < 1e-12 * exact.max(1.0), "legendre n={n} k={k}");
            }
            let lag = quadrature_nodes(QuadratureKind::Laguerre, n).unwrap();
            for k in 0..2 * n {
                let exact = ln_gamma(k as f64 + 1.0).exp();
                let got = lag.integrate(|u| u.powi(k as i32));
                assert!((got - exact).abs() < 1e-12 * exact, "laguerre n={n} k={k}: {got} vs {exact}");
            }
            let her = quadrature_nodes(QuadratureKind::Hermite, n).unwrap();
            for k in (0..2 * n).step_by(2) {
                // ∫ x^{2j} e^{-x²} = Γ(j + 1/2)
                let exact = ln_gamma(k as f64 / 2.0 + 0.5).exp();
                let got = her.integrate(|u| u.powi(k as i32));
                assert!((got - exact).abs() < 1e-12 * exact, "hermite n={n} k={k}");
            }
            let jac = quadrature_nodes(QuadratureKind::Jacobi { alpha: 0.5, beta: 1.5 }, n).unwrap();
            for k in 0..2 * n {
                let exact = beta_fn(1.5 + k as f64, 2.5);
                let got = jac.integrate(|u| u.powi(k as i32));
                assert!((got - exact).abs() < 1e-12 * exact.max(1e-3), "jacobi n={n} k={k}");
            }
        }
    }

    #[test]
    fn masses_and_positivity() {
        let kinds = [
            QuadratureKind::Legendre,
            QuadratureKind::Laguerre,
            QuadratureKind::Hermite,
            QuadratureKind::Jacobi { alpha: -0.5, beta: 2.0 },
            QuadratureKind::GenLaguerre { alpha: 0.5 },
        ];
        for kind in kinds {
            for n in [1usize, 5, 64, 200, 512] {
                let rule = quadrature_nodes(kind, n).unwrap();
                assert!(rule.weights.iter().all(|&w| w > 0.0));
                let total: f64 = rule.weights.iter().sum();
                let mass = kind.total_mass();
                assert!((total - mass).abs() < 1e-13 * mass.max(1.0), "{kind:?} n={n}: {total} vs {mass}");
                assert!(rule.nodes.windows(2).all(|w| w[0] < w[1]));
            }
        }
    }

    #[test]
    fn rejects_bad_counts_and_weights() {
        assert!(matches!(quadrature_nodes(QuadratureKind::Legendre, 0), Err(QuadratureError::UnsupportedCount(0))));
        assert!(quadrature_nodes(QuadratureKind::Legendre, 513).is_err());
        assert!(quadrature_nodes(QuadratureKind::GenLaguerre { alpha: -1.0 }, 4).is_err());
    }
}
