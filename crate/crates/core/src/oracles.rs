//! Reference values computed without any of the integration machinery:
//! a complex Lanczos Γ, the multivariate Γ_r and B_r closed forms, and the
//! ₂F₁ and Lauricella F_D power series.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numeric::Cplx;

#[derive(Clone, Debug, PartialEq, Error)]
pub enum OracleError {
    #[error("Γ has a pole at {0}")]
    PoleHit(Cplx),
    #[error("c = {0} is a non-positive integer")]
    PoleInC(Cplx),
    #[error("argument {0} outside the series region |x| <= {1}")]
    OutOfRange(Cplx, f64),
    #[error("series did not reach the tail tolerance within {0} terms")]
    SlowConvergence(usize),
    #[error("parameter vectors have different lengths")]
    LengthMismatch,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesConfig {
    pub max_terms: usize,
    pub tail_tolerance: f64,
}

impl Default for SeriesConfig {
    fn default() -> Self {
        SeriesConfig { max_terms: 10_000, tail_tolerance: 1e-14 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesValue {
    pub value: Cplx,
    pub tail_bound: f64,
    pub terms: usize,
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

fn is_nonpositive_integer(z: Cplx) -> bool {
    z.im == 0.0 && z.re <= 0.0 && z.re == z.re.round()
}

/// `ln Γ(z)` on the principal branch of the Lanczos form, `Re z >= 1/2`.
fn ln_gamma_right(z: Cplx) -> Cplx {
    let z = z - 1.0;
    let mut x = Cplx::new(LANCZOS[0], 0.0);
    for (i, &p) in LANCZOS.iter().enumerate().skip(1) {
        x += p / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + x.ln()
}

/// Complex Γ by the Lanczos approximation with reflection.
pub fn gamma(z: Cplx) -> Result<Cplx, OracleError> {
    if is_nonpositive_integer(z) {
        return Err(OracleError::PoleHit(z));
    }
    if z.re < 0.5 {
        let s = (PI * z).sin();
        Ok(PI / (s * gamma(1.0 - z)?))
    } else {
        Ok(ln_gamma_right(z).exp())
    }
}

pub fn beta(a: Cplx, b: Cplx) -> Result<Cplx, OracleError> {
    Ok(gamma(a)? * gamma(b)? / gamma(a + b)?)
}

/// `Γ_r(a) = π^{r(r-1)/2} ∏_{i=1}^r Γ(a - i + 1)`.
pub fn gamma_r_closed(r: usize, a: Cplx) -> Result<Cplx, OracleError> {
    let mut out = Cplx::new(PI.powf((r * (r.saturating_sub(1))) as f64 / 2.0), 0.0);
    for i in 1..=r {
        out *= gamma(a - (i as f64 - 1.0))?;
    }
    Ok(out)
}

/// `B_r(a, b) = Γ_r(a) Γ_r(b) / Γ_r(a + b)`.
pub fn beta_r_closed(r: usize, a: Cplx, b: Cplx) -> Result<Cplx, OracleError> {
    Ok(gamma_r_closed(r, a)? * gamma_r_closed(r, b)? / gamma_r_closed(r, a + b)?)
}

pub const GAUSS_SERIES_RADIUS: f64 = 0.9;
pub const LAURICELLA_RADIUS: f64 = 0.7;

/// `₂F₁(a, b; c; x) = Σ (a)_m (b)_m / ((c)_m m!) x^m` with a rigorous tail bound
/// once the term ratio has settled.
pub fn gauss_2f1_series(a: Cplx, b: Cplx, c: Cplx, x: Cplx, cfg: &SeriesConfig) -> Result<SeriesValue, OracleError> {
    if is_nonpositive_integer(c) {
        return Err(OracleError::PoleInC(c));
    }
    if x.norm() > GAUSS_SERIES_RADIUS {
        return Err(OracleError::OutOfRange(x, GAUSS_SERIES_RADIUS));
    }
    let settle = (a.norm() + b.norm() + c.norm()).ceil() as usize + 2;
    let mut term = Cplx::new(1.0, 0.0);
    let mut sum = term;
    for m in 0..cfg.max_terms {
        let mf = m as f64;
        let ratio = (a + mf) * (b + mf) / ((c + mf) * (mf + 1.0)) * x;
        term *= ratio;
        sum += term;
        if term == Cplx::new(0.0, 0.0) {
            return Ok(SeriesValue { value: sum, tail_bound: 0.0, terms: m + 2 });
        }
        if m >= settle {
            let next = (m + 1) as f64;
            let rho = ((a + next) * (b + next) / ((c + next) * (next + 1.0)) * x).norm().max(x.norm());
            if rho < 1.0 {
                let tail = term.norm() * rho / (1.0 - rho);
                if tail <= cfg.tail_tolerance * sum.norm().max(f64::MIN_POSITIVE) {
                    return Ok(SeriesValue { value: sum, tail_bound: tail, terms: m + 2 });
                }
            }
        }
    }
    Err(OracleError::SlowConvergence(cfg.max_terms))
}

pub fn gauss_2f1(a: Cplx, b: Cplx, c: Cplx, x: Cplx) -> Result<Cplx, OracleError> {
    Ok(gauss_2f1_series(a, b, c, x, &SeriesConfig::default())?.value)
}

/// One rectangular truncation `m_i < k` of the F_D series, summed by total degree.
fn lauricella_rect(a: Cplx, b: &[Cplx], c: Cplx, x: &[Cplx], k: usize) -> Cplx {
    // q[t] = Σ_{|m| = t} ∏ (b_i)_{m_i} x_i^{m_i} / m_i!
    let mut q = vec![Cplx::new(1.0, 0.0)];
    for (&bi, &xi) in b.iter().zip(x) {
        let mut p = Vec::with_capacity(k);
        let mut t = Cplx::new(1.0, 0.0);
        for m in 0..k {
            p.push(t);
            t *= (bi + m as f64) * xi / (m as f64 + 1.0);
        }
        let mut next = vec![Cplx::new(0.0, 0.0); q.len() + k - 1];
        for (i, qi) in q.iter().enumerate() {
            for (j, pj) in p.iter().enumerate() {
                next[i + j] += qi * pj;
            }
        }
        q = next;
    }
    let mut ratio = Cplx::new(1.0, 0.0);
    let mut sum = Cplx::new(0.0, 0.0);
    for (t, qt) in q.iter().enumerate() {
        sum += ratio * qt;
        ratio *= (a + t as f64) / (c + t as f64);
    }
    sum
}

/// Lauricella `F_D(a; b_1..b_p; c; x_1..x_p)`: rectangular truncations are
/// doubled until two successive ones agree to the tail tolerance.
pub fn lauricella_fd(
    a: Cplx,
    b: &[Cplx],
    c: Cplx,
    x: &[Cplx],
    cfg: &SeriesConfig,
) -> Result<SeriesValue, OracleError> {
    if b.len() != x.len() {
        return Err(OracleError::LengthMismatch);
    }
    if is_nonpositive_integer(c) {
        return Err(OracleError::PoleInC(c));
    }
    if let Some(&bad) = x.iter().find(|xi| xi.norm() > LAURICELLA_RADIUS) {
        return Err(OracleError::OutOfRange(bad, LAURICELLA_RADIUS));
    }
    let mut k = 32;
    let mut prev = lauricella_rect(a, b, c, x, k);
    while k <= cfg.max_terms {
        k *= 2;
        let cur = lauricella_rect(a, b, c, x, k);
        let diff = (cur - prev).norm();
        if diff <= cfg.tail_tolerance * cur.norm().max(f64::MIN_POSITIVE) {
            return Ok(SeriesValue { value: cur, tail_bound: diff, terms: k });
        }
        prev = cur;
    }
    Err(OracleError::SlowConvergence(k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{quadrature_nodes, QuadratureKind, RandomStream};

    fn c(x: f64) -> Cplx {
        Cplx::new(x, 0.0)
    }

    fn rel(a: Cplx, b: Cplx) -> f64 {
        (a - b).norm() / b.norm()
    }

    #[test]
    fn gamma_known_values() {
        assert!(rel(gamma(c(5.0)).unwrap(), c(24.0)) < 1e-14);
        assert!(rel(gamma(c(0.5)).unwrap(), c(PI.sqrt())) < 1e-14);
        assert!(rel(gamma(c(-0.5)).unwrap(), c(-2.0 * PI.sqrt())) < 1e-14);
        assert!(matches!(gamma(c(-2.0)), Err(OracleError::PoleHit(_))));
        // |Γ(i)|² = π / sinh π
        let g = gamma(Cplx::new(0.0, 1.0)).unwrap();
        assert!((g.norm_sqr() - PI / PI.sinh()).abs() < 1e-14);
    }

    #[test]
    fn gamma_reflection() {
        let mut s = RandomStream::new(51);
        for _ in 0..10 {
            let z = Cplx::new(s.uniform_in(-3.0, 3.0), s.uniform_in(-1.0, 1.0));
            let lhs = gamma(z).unwrap() * gamma(1.0 - z).unwrap();
            let rhs = PI / (PI * z).sin();
            assert!(rel(lhs, rhs) < 1e-12);
        }
    }

    #[test]
    fn multivariate_closed_forms() {
        assert!(rel(gamma_r_closed(1, c(3.5)).unwrap(), gamma(c(3.5)).unwrap()) < 1e-15);
        assert!(rel(beta_r_closed(1, c(2.0), c(3.0)).unwrap(), c(1.0 / 12.0)) < 1e-14);
        assert!(rel(gamma_r_closed(2, c(3.0)).unwrap(), c(2.0 * PI)) < 1e-14);
        let g2 = gamma_r_closed(2, c(2.0)).unwrap();
        let g4 = gamma_r_closed(2, c(4.0)).unwrap();
        assert!(rel(beta_r_closed(2, c(2.0), c(2.0)).unwrap(), g2 * g2 / g4) < 1e-14);
        // Γ_2(2) = π Γ(2) Γ(1) = π, Γ_2(4) = π Γ(4) Γ(3) = 12π
        assert!(rel(g2, c(PI)) < 1e-14);
        assert!(rel(g4, c(12.0 * PI)) < 1e-14);
    }

    #[test]
    fn gauss_series_identities() {
        assert_eq!(gauss_2f1(c(0.3), c(1.2), c(2.5), c(0.0)).unwrap(), c(1.0));
        let v = gauss_2f1(c(1.0), c(1.0), c(2.0), c(0.5)).unwrap();
        assert!(rel(v, c(2.0 * 2f64.ln())) < 1e-14);
        let x: f64 = 0.3;
        let v = gauss_2f1(c(0.5), c(0.5), c(1.5), c(x)).unwrap();
        assert!(rel(v, c(x.sqrt().asin() / x.sqrt())) < 1e-14);
        assert!(matches!(gauss_2f1(c(1.0), c(1.0), c(-2.0), c(0.1)), Err(OracleError::PoleInC(_))));
        assert!(matches!(gauss_2f1(c(1.0), c(1.0), c(2.0), c(0.95)), Err(OracleError::OutOfRange(..))));
        // terminating series: ₂F₁(-2, b; c; x) is a quadratic
        let (b, cc, x) = (1.5, 2.5, 0.4);
        let poly = 1.0 - 2.0 * b / cc * x + b * (b + 1.0) / (cc * (cc + 1.0)) * x * x;
        assert!(rel(gauss_2f1(c(-2.0), c(b), c(cc), c(x)).unwrap(), c(poly)) < 1e-15);
    }

    #[test]
    fn series_tails_are_honoured() {
        let cfg = SeriesConfig::default();
        let big = SeriesConfig { max_terms: 2 * cfg.max_terms, tail_tolerance: cfg.tail_tolerance * 1e-2 };
        let a = gauss_2f1_series(c(0.7), c(1.3), c(2.1), c(0.85), &cfg).unwrap();
        let b = gauss_2f1_series(c(0.7), c(1.3), c(2.1), c(0.85), &big).unwrap();
        assert!((a.value - b.value).norm() <= cfg.tail_tolerance * b.value.norm() * 2.0);
        let fa = lauricella_fd(c(0.7), &[c(1.1), c(-0.4)], c(2.3), &[c(0.6), c(-0.5)], &cfg).unwrap();
        let fb = lauricella_fd(c(0.7), &[c(1.1), c(-0.4)], c(2.3), &[c(0.6), c(-0.5)], &big).unwrap();
        assert!((fa.value - fb.value).norm() <= cfg.tail_tolerance * fb.value.norm() * 2.0);
    }

    #[test]
    fn lauricella_reductions() {
        let cfg = SeriesConfig::default();
        let v = lauricella_fd(c(0.3), &[c(1.0), c(2.0)], c(1.7), &[c(0.0), c(0.0)], &cfg).unwrap();
        assert_eq!(v.value, c(1.0));
        let one = lauricella_fd(c(0.7), &[c(1.4)], c(2.2), &[c(0.45)], &cfg).unwrap();
        let g = gauss_2f1(c(0.7), c(1.4), c(2.2), c(0.45)).unwrap();
        assert!(rel(one.value, g) < 1e-12);
    }

    #[test]
    fn lauricella_matches_euler_integral() {
        let (a, b1, b2, cc) = (1.3, 0.8, 1.6, 3.1);
        let (x1, x2) = (0.2, 0.1);
        let rule = quadrature_nodes(QuadratureKind::Jacobi { alpha: a - 1.0, beta: cc - a - 1.0 }, 64).unwrap();
        let integral = rule.integrate(|u| (1.0 - u * x1).powf(-b1) * (1.0 - u * x2).powf(-b2));
        let pref = gamma(c(cc)).unwrap() / (gamma(c(a)).unwrap() * gamma(c(cc - a)).unwrap());
        let series = lauricella_fd(c(a), &[c(b1), c(b2)], c(cc), &[c(x1), c(x2)], &SeriesConfig::default()).unwrap();
        assert!(rel(series.value, pref * integral) < 1e-8);
    }
}
