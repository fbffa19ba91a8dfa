//! Numerical evaluation of `F_λ(z, α; C)` and the named Hermitian matrix
//! integrals: adaptive quadrature along a one-dimensional chain (`r = 1`),
//! eigenvalue tensor quadrature for invariant integrands, and Haar Monte Carlo.

use std::cell::RefCell;
use std::f64::consts::PI;

use rand_distr::Distribution;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::Continuous;
use thiserror::Error;

use crate::characters::{chi_lambda, CharacterError, PartitionWeight};
use crate::grassmann::{z_lambda_member, CoordMatrix, GrassmannError, SubdiagramMu};
use crate::integrands::{
    eigen_factor, family_of_normal_form, named_integrand, named_value, Domain, FamilyTag, IntegrandError,
    IntegrandSpec, NamedFamily,
};
use crate::normal_form::{reduce, table_form, FormId, NormalFormError};
use crate::numeric::scalar::cpow;
use crate::numeric::{
    haar_unitary, integrate_adaptive, quadrature_nodes, CMatrix, Cplx, KronrodOptions, QuadratureError,
    QuadratureKind, RandomStream,
};

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_NODES: usize = 64;
pub const DEFAULT_SAMPLES: u64 = 1_000_000;
/// Number of independent sample blocks in Haar Monte Carlo; fixed so that
/// results do not depend on the worker count.
pub const MC_PARTITIONS: u64 = 64;
pub const MAX_INVARIANT_RANK: usize = 4;
const INVARIANCE_PROBE_TOL: f64 = 1e-9;
const MAX_INTERVALS: usize = 4000;
const ENDPOINT_SLACK: f64 = 1e-14;

#[derive(Clone, Debug, PartialEq, Error)]
pub enum IntegratorError {
    #[error("adaptive quadrature did not converge: value {value}, error estimate {error:e}")]
    NonConvergent { value: Cplx, error: f64 },
    #[error("endpoint exponent {0} makes the integral diverge")]
    DivergentEndpoint(f64),
    #[error("integrand is not unitarily invariant: {0}")]
    NotInvariant(String),
    #[error("z is not in Z_λ; failing subdiagrams: {0:?}")]
    NotInZLambda(Vec<SubdiagramMu>),
    #[error("chain incompatible with the integrand: {0}")]
    IncompatibleChain(String),
    #[error("rank {0} is outside the supported range")]
    UnsupportedRank(usize),
    #[error(transparent)]
    Integrand(#[from] IntegrandError),
    #[error(transparent)]
    NormalForm(NormalFormError),
    #[error(transparent)]
    Character(#[from] CharacterError),
    #[error(transparent)]
    Grassmann(#[from] GrassmannError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}

impl From<NormalFormError> for IntegratorError {
    fn from(e: NormalFormError) -> Self {
        match e {
            NormalFormError::NotInZLambda(mu) => IntegratorError::NotInZLambda(mu),
            other => IntegratorError::NormalForm(other),
        }
    }
}

/// A concrete chain: each eigenvalue (or the single coordinate when `r = 1`)
/// runs over the given set.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ChainKind {
    /// `(0, 1)`.
    Interval,
    /// `(0, ∞)`.
    HalfLine,
    /// `ℝ`.
    Line,
    /// From `∞·e^{-iθ}` through 0 to `∞·e^{iθ}`; `r = 1` only.
    RotatedRays { angle: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainSpec {
    pub kind: ChainKind,
    pub r: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    #[serde(rename = "adaptive-1d")]
    Adaptive1d,
    /// Fixed composite Gauss–Legendre along the chain: `F` is then a smooth
    /// function of its arguments, as finite differences require.
    #[serde(rename = "gauss-1d")]
    Gauss1d,
    EigenTensor,
    HaarMc,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegralEstimate {
    pub value: Cplx,
    pub abs_error_est: f64,
    pub method: Method,
    pub nodes_or_samples: u64,
    pub seed: Option<u64>,
    /// Sample blocks used by Haar Monte Carlo.
    pub partitions: Option<u64>,
}

impl IntegralEstimate {
    /// The estimate multiplied by a constant.
    pub fn scaled(&self, s: Cplx) -> Self {
        IntegralEstimate { value: self.value * s, abs_error_est: self.abs_error_est * s.norm(), ..*self }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Budget {
    pub tol: f64,
    pub nodes: usize,
    pub samples: u64,
    pub seed: u64,
    /// Forces a method when `r ≥ 2`; otherwise eigen-tensor is used for
    /// invariant integrands and Haar Monte Carlo for the rest.
    pub method: Option<Method>,
    /// Table variant of the normal form used for `|λ| = 4`.
    pub variant: usize,
    /// For `r = 1`: `Some((panels, nodes))` replaces adaptive quadrature by a
    /// fixed composite rule on each half of the chain parameter.
    pub fixed_rule: Option<(usize, usize)>,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            tol: DEFAULT_TOL,
            nodes: DEFAULT_NODES,
            samples: DEFAULT_SAMPLES,
            seed: 0,
            method: None,
            variant: 1,
            fixed_rule: None,
        }
    }
}

/// `c_r = π^{r(r-1)/2} / ∏_{j=1}^r j!`, the constant of the eigenvalue reduction
/// `∫ f(U) dU = c_r ∫ f(λ) Δ(λ)² dλ`.
pub fn weyl_constant(r: usize) -> f64 {
    let fact: f64 = (1..=r).map(|j| (1..=j).product::<usize>() as f64).product();
    PI.powf((r * r.saturating_sub(1)) as f64 / 2.0) / fact
}

fn vandermonde_sq<T: Copy + Into<Cplx>>(l: &[T]) -> Cplx {
    let mut v = Cplx::new(1.0, 0.0);
    for i in 0..l.len() {
        for j in i + 1..l.len() {
            let d = l[i].into() - l[j].into();
            v *= d * d;
        }
    }
    v
}

/// Exponents of the power singularities at the two ends of a chain.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct EndpointExponents {
    pub lower: f64,
    pub upper: f64,
}

/// `κ` for the substitution `u = s^κ` at an endpoint with exponent `e`.
fn kappa(e: f64) -> Result<f64, IntegratorError> {
    if !(e > -1.0) {
        return Err(IntegratorError::DivergentEndpoint(e));
    }
    Ok((3.0 / (e + 1.0)).ceil().clamp(1.0, 30.0))
}

/// A chain realized as `s ∈ (0, 2) ↦ (u(s), du/ds)`.
struct Param {
    kind: ChainKind,
    k0: f64,
    k1: f64,
}

impl Param {
    fn new(kind: ChainKind, ex: EndpointExponents) -> Result<Self, IntegratorError> {
        let k0 = kappa(ex.lower)?;
        let k1 = match kind {
            ChainKind::Interval => kappa(ex.upper)?,
            _ => 1.0,
        };
        Ok(Param { kind, k0, k1 })
    }

    /// Points and Jacobians on `(0, 2)`; for rays there are two points.
    /// A point that rounds onto a finite endpoint gets Jacobian 0: the
    /// substituted integrand vanishes there.
    fn points(&self, s: f64) -> [(Cplx, Cplx); 2] {
        let mut pts = self.raw_points(s);
        for p in pts.iter_mut() {
            let at_end = match self.kind {
                ChainKind::Interval => p.0.re == 0.0 || p.0.re == 1.0,
                ChainKind::HalfLine | ChainKind::RotatedRays { .. } => p.0 == Cplx::new(0.0, 0.0),
                ChainKind::Line => false,
            };
            if at_end {
                p.1 = Cplx::new(0.0, 0.0);
            }
        }
        pts
    }

    /// Distance in the chain parameter to the nearest finite endpoint.
    fn end_distance(&self, s: f64) -> f64 {
        match self.kind {
            ChainKind::Interval if s <= 1.0 => 0.5 * s.powf(self.k0),
            ChainKind::Interval => 0.5 * (2.0 - s).powf(self.k1),
            ChainKind::HalfLine | ChainKind::RotatedRays { .. } if s <= 1.0 => s.powf(self.k0),
            _ => f64::INFINITY,
        }
    }

    fn raw_points(&self, s: f64) -> [(Cplx, Cplx); 2] {
        let zero = (Cplx::new(0.0, 0.0), Cplx::new(0.0, 0.0));
        let real = |u: f64, j: f64| (Cplx::new(u, 0.0), Cplx::new(j, 0.0));
        // (ρ, dρ/ds) over the half-line
        let half = |s: f64, k: f64| {
            if s <= 1.0 {
                (s.powf(k), k * s.powf(k - 1.0))
            } else {
                let t = 2.0 - s;
                (1.0 / t, 1.0 / (t * t))
            }
        };
        match self.kind {
            ChainKind::Interval => {
                if s <= 1.0 {
                    [real(0.5 * s.powf(self.k0), 0.5 * self.k0 * s.powf(self.k0 - 1.0)), zero]
                } else {
                    let t = 2.0 - s;
                    [real(1.0 - 0.5 * t.powf(self.k1), 0.5 * self.k1 * t.powf(self.k1 - 1.0)), zero]
                }
            }
            ChainKind::HalfLine => {
                let (u, j) = half(s, self.k0);
                [real(u, j), zero]
            }
            ChainKind::Line => {
                let (u, j) = half(s, 1.0);
                [real(u, j), real(-u, j)]
            }
            ChainKind::RotatedRays { angle } => {
                let (rho, j) = half(s, self.k0);
                let out = Cplx::from_polar(1.0, angle);
                let inc = Cplx::from_polar(1.0, -angle);
                [(out * rho, out * j), (inc * rho, -inc * j)]
            }
        }
    }
}

/// Adaptive Gauss–Kronrod along a chain of the scalar integrand `f`.
pub fn integrate_chain<F>(f: F, kind: ChainKind, ex: EndpointExponents, tol: f64) -> Result<IntegralEstimate, IntegratorError>
where
    F: Fn(Cplx) -> Result<Cplx, IntegrandError>,
{
    let param = Param::new(kind, ex)?;
    let failure: RefCell<Option<IntegrandError>> = RefCell::new(None);
    let g = |s: f64| {
        let mut acc = Cplx::new(0.0, 0.0);
        for (u, j) in param.points(s) {
            if j == Cplx::new(0.0, 0.0) {
                continue;
            }
            match f(u) {
                Ok(v) => acc += v * j,
                // rounding put the point onto the endpoint itself
                Err(IntegrandError::OnBranchLocus { .. }) if param.end_distance(s) < ENDPOINT_SLACK => {}
                Err(e) => {
                    failure.borrow_mut().get_or_insert(e);
                }
            }
        }
        acc
    };
    let opts = KronrodOptions { abs_tol: 1e-300, rel_tol: tol, max_intervals: MAX_INTERVALS };
    let res = integrate_adaptive(g, 0.0, 2.0, &opts);
    if let Some(e) = failure.into_inner() {
        return Err(e.into());
    }
    if !res.converged || !res.value.re.is_finite() || !res.value.im.is_finite() {
        return Err(IntegratorError::NonConvergent { value: res.value, error: res.error });
    }
    Ok(IntegralEstimate {
        value: res.value,
        abs_error_est: res.error,
        method: Method::Adaptive1d,
        nodes_or_samples: res.evaluations as u64,
        seed: None,
        partitions: None,
    })
}

/// Fixed composite Gauss–Legendre along a chain: `panels` equal panels of
/// `nodes` points on each half of the parameter range. The error estimate
/// is the change from half as many nodes per panel.
pub fn integrate_chain_fixed<F>(
    f: F,
    kind: ChainKind,
    ex: EndpointExponents,
    panels: usize,
    nodes: usize,
) -> Result<IntegralEstimate, IntegratorError>
where
    F: Fn(Cplx) -> Result<Cplx, IntegrandError>,
{
    let param = Param::new(kind, ex)?;
    let run = |nodes: usize| -> Result<Cplx, IntegratorError> {
        let rule = quadrature_nodes(QuadratureKind::Legendre, nodes)?;
        let mut acc = Cplx::new(0.0, 0.0);
        let width = 1.0 / panels as f64;
        for p in 0..2 * panels {
            let a = p as f64 * width;
            for (&t, &w) in rule.nodes.iter().zip(&rule.weights) {
                let s = a + width * t;
                for (u, j) in param.points(s) {
                    if j == Cplx::new(0.0, 0.0) {
                        continue;
                    }
                    match f(u) {
                        Ok(v) => acc += v * j * (w * width),
                        Err(IntegrandError::OnBranchLocus { .. }) if param.end_distance(s) < ENDPOINT_SLACK => {}
                        Err(e) => return Err(e.into()),
                    }
                }
            }
        }
        Ok(acc)
    };
    let full = run(nodes)?;
    let half = run((nodes / 2).max(1))?;
    if !full.re.is_finite() || !full.im.is_finite() {
        return Err(IntegratorError::NonConvergent { value: full, error: f64::INFINITY });
    }
    Ok(IntegralEstimate {
        value: full,
        abs_error_est: (full - half).norm(),
        method: Method::Gauss1d,
        nodes_or_samples: (2 * panels * nodes) as u64,
        seed: None,
        partitions: None,
    })
}

/// The chain a family is integrated over by default.
pub fn default_chain(f: &NamedFamily) -> ChainSpec {
    let kind = match (f.tag.domain(), f.tag) {
        (_, FamilyTag::Airy) if f.r == 1 => ChainKind::RotatedRays { angle: 2.0 * PI / 3.0 },
        (Domain::UnitInterval, _) => ChainKind::Interval,
        (Domain::HalfLine, _) => ChainKind::HalfLine,
        (Domain::Line, _) => ChainKind::Line,
    };
    ChainSpec { kind, r: f.r }
}

fn family_exponents(f: &NamedFamily) -> EndpointExponents {
    let r = f.r as f64;
    let (lower, upper) = match f.tag {
        FamilyTag::BetaR => (f.a.re - r, f.b[0].re - r),
        FamilyTag::Gauss | FamilyTag::Kummer | FamilyTag::LauricellaFd => (f.a.re - r, (f.c - f.a).re - r),
        FamilyTag::GammaR => (f.a.re - r, 0.0),
        FamilyTag::HermiteWeber => (-f.c.re - r, 0.0),
        _ => (0.0, 0.0),
    };
    EndpointExponents { lower, upper }
}

fn check_chain(expected: ChainSpec, given: Option<ChainSpec>) -> Result<ChainSpec, IntegratorError> {
    match given {
        None => Ok(expected),
        Some(c) if c == expected => Ok(c),
        Some(c) => Err(IntegratorError::IncompatibleChain(format!("{c:?} given, {expected:?} required"))),
    }
}

/// One-dimensional integral of an `r = 1` family over its chain.
pub fn integrate_r1_family(f: &NamedFamily, chain: Option<ChainSpec>, tol: f64) -> Result<IntegralEstimate, IntegratorError> {
    if f.r != 1 {
        return Err(IntegratorError::UnsupportedRank(f.r));
    }
    let chain = check_chain(default_chain(f), chain)?;
    integrate_chain(|u| eigen_factor(f, u), chain.kind, family_exponents(f), tol)
}

/// Standard chain of the `r = 1` table form of `λ`, and its endpoint exponents.
fn chart_chain(form: &FormId, pw: &PartitionWeight) -> Result<(ChainKind, EndpointExponents), IntegratorError> {
    let a = pw.flat_alpha();
    let re = |i: usize| a[i - 1].re;
    let ex = |lower, upper| EndpointExponents { lower, upper };
    Ok(match (form.partition.as_slice(), form.variant) {
        (p, _) if p.len() >= 3 && p.iter().all(|&k| k == 1) => (ChainKind::Interval, ex(re(2), re(3))),
        ([2, 1], 0) => (ChainKind::HalfLine, ex(re(3), 0.0)),
        ([3], 0) => (ChainKind::Line, ex(0.0, 0.0)),
        ([2, 1, 1], 1) => (ChainKind::Interval, ex(re(3), re(4))),
        ([2, 2], 1) => (ChainKind::HalfLine, ex(0.0, 0.0)),
        ([3, 1], 1) => (ChainKind::HalfLine, ex(re(4), 0.0)),
        ([4], 1) => (ChainKind::RotatedRays { angle: PI / 3.0 }, ex(0.0, 0.0)),
        _ => return Err(IntegratorError::IncompatibleChain(format!("no chain for the form {form}"))),
    })
}

fn r1_integrate<F>(f: F, kind: ChainKind, ex: EndpointExponents, budget: &Budget) -> Result<IntegralEstimate, IntegratorError>
where
    F: Fn(Cplx) -> Result<Cplx, IntegrandError>,
{
    match budget.fixed_rule {
        Some((panels, nodes)) => integrate_chain_fixed(f, kind, ex, panels, nodes),
        None => integrate_chain(f, kind, ex, budget.tol),
    }
}

/// `F_λ(z, α)` for `r = 1` evaluated directly: the chart integrand of `z`
/// itself, integrated over the image of the table form's standard chain
/// under the Möbius map `v ↦ u` induced by the reduction `x = g z h`.
///
/// Rounding in the map shifts the chain ends off the singular points by a
/// few ulps, which a power singularity `(u - u_0)^e` turns into a relative
/// perturbation of order `ε^{e+1}`; [`radon_hgf`] avoids this.
pub fn integrate_r1_moving_chain(
    spec: &IntegrandSpec,
    chain: Option<ChainSpec>,
    budget: &Budget,
) -> Result<IntegralEstimate, IntegratorError> {
    if spec.r() != 1 {
        return Err(IntegratorError::UnsupportedRank(spec.r()));
    }
    let red = reduce(spec.coords(), budget.variant)?;
    let (kind, ex) = chart_chain(&red.form_id, spec.weight())?;
    check_chain(ChainSpec { kind, r: 1 }, chain)?;
    let g = &red.g;
    let (g11, g12, g21, g22) = (*g.get(0, 0), *g.get(0, 1), *g.get(1, 0), *g.get(1, 1));
    let det = g11 * g22 - g12 * g21;
    let f = |v: Cplx| {
        let den = g11 + v * g21;
        let u = (g12 + v * g22) / den;
        Ok(spec.evaluate_scalar(u)? * det / (den * den))
    };
    r1_integrate(f, kind, ex, budget)
}

fn domain_sample(f: &NamedFamily, s: &mut RandomStream) -> CMatrix {
    let (lo, hi) = match f.tag.domain() {
        Domain::UnitInterval => (0.05, 0.95),
        Domain::HalfLine => (0.2, 3.0),
        Domain::Line => (-1.5, 1.5),
    };
    let v = haar_unitary(f.r, s);
    let d: Vec<f64> = (0..f.r).map(|_| s.uniform_in(lo, hi)).collect();
    &(&v * &CMatrix::real_diag(&d)) * &v.adjoint()
}

/// Randomized check that `f(V U V†) = f(U)`.
pub fn probe_invariance(f: &NamedFamily, probes: usize, seed: u64) -> Result<(), IntegratorError> {
    let mut s = RandomStream::new(seed);
    for _ in 0..probes {
        let u = domain_sample(f, &mut s);
        let v = haar_unitary(f.r, &mut s);
        let w = &(&v * &u) * &v.adjoint();
        let w = CMatrix::from_fn(f.r, f.r, |i, j| 0.5 * (*w.get(i, j) + w.get(j, i).conj()));
        let a = named_integrand(f, &u)?;
        let b = named_integrand(f, &w)?;
        if (a - b).norm() > INVARIANCE_PROBE_TOL * a.norm().max(b.norm()).max(f64::MIN_POSITIVE) {
            return Err(IntegratorError::NotInvariant(format!("f(U) = {a} but f(VUV†) = {b}")));
        }
    }
    Ok(())
}

/// A one-dimensional rule for eigenvalues: weights absorb `w(λ)`, and
/// `factor[i] = φ(λ_i) / w(λ_i)`.
struct EigenRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    factor: Vec<Cplx>,
}

fn eigen_rule(f: &NamedFamily, count: usize) -> Result<EigenRule, IntegratorError> {
    let ex = family_exponents(f);
    let xi = f.x.first().map(|m| *m.get(0, 0)).unwrap_or(Cplx::new(0.0, 0.0));
    // λ = scale · t with the rule in t
    let (kind, scale) = match f.tag {
        FamilyTag::BetaR | FamilyTag::Gauss | FamilyTag::Kummer | FamilyTag::LauricellaFd => {
            kappa(ex.lower)?;
            kappa(ex.upper)?;
            (QuadratureKind::Jacobi { alpha: ex.lower, beta: ex.upper }, 1.0)
        }
        FamilyTag::GammaR | FamilyTag::HermiteWeber => {
            kappa(ex.lower)?;
            (QuadratureKind::GenLaguerre { alpha: ex.lower }, 1.0)
        }
        FamilyTag::Bessel => {
            if !(xi.re < 0.0) {
                return Err(IntegratorError::IncompatibleChain("bessel on the half-line needs Re X < 0".into()));
            }
            (QuadratureKind::Laguerre, -1.0 / xi.re)
        }
        FamilyTag::GaussianR => (QuadratureKind::Hermite, 2f64.sqrt()),
        FamilyTag::Airy => {
            return Err(IntegratorError::IncompatibleChain("airy has no real eigenvalue chain".into()));
        }
    };
    let rule = quadrature_nodes(kind, count)?;
    let mut out = EigenRule { nodes: vec![], weights: vec![], factor: vec![] };
    for (&t, &w) in rule.nodes.iter().zip(&rule.weights) {
        let l = scale * t;
        let base = match kind {
            QuadratureKind::Jacobi { alpha, beta } => t.powf(alpha) * (1.0 - t).powf(beta),
            QuadratureKind::GenLaguerre { alpha } => t.powf(alpha) * (-t).exp(),
            QuadratureKind::Laguerre => (-t).exp(),
            QuadratureKind::Hermite => (-t * t).exp(),
            QuadratureKind::Legendre => 1.0,
        };
        out.nodes.push(l);
        out.weights.push(w * scale);
        out.factor.push(eigen_factor(f, Cplx::new(l, 0.0))? / base);
    }
    Ok(out)
}

fn tensor_sum(rule: &EigenRule, r: usize) -> Cplx {
    let n = rule.nodes.len();
    let total = n.pow(r as u32);
    (0..total)
        .into_par_iter()
        .with_min_len(4096)
        .map(|mut idx| {
            let mut l = [0.0; MAX_INVARIANT_RANK];
            let mut term = Cplx::new(1.0, 0.0);
            for slot in l.iter_mut().take(r) {
                let i = idx % n;
                idx /= n;
                *slot = rule.nodes[i];
                term *= rule.factor[i] * rule.weights[i];
            }
            term * vandermonde_sq(&l[..r])
        })
        .collect::<Vec<_>>()
        .into_iter()
        .sum()
}

/// `c_r ∫ f(λ) Δ(λ)² dλ` by tensor Gauss quadrature; the error estimate is
/// the change from a rule of half the size.
pub fn integrate_invariant(f: &NamedFamily, nodes: usize) -> Result<IntegralEstimate, IntegratorError> {
    if f.r == 0 || f.r > MAX_INVARIANT_RANK {
        return Err(IntegratorError::UnsupportedRank(f.r));
    }
    if !f.is_invariant() {
        return Err(IntegratorError::NotInvariant("X is not a scalar matrix".into()));
    }
    if f.r > 1 {
        probe_invariance(f, 4, 0x5eed)?;
    }
    let cr = weyl_constant(f.r);
    let full = tensor_sum(&eigen_rule(f, nodes)?, f.r) * cr;
    let half = tensor_sum(&eigen_rule(f, (nodes / 2).max(1))?, f.r) * cr;
    Ok(IntegralEstimate {
        value: full,
        abs_error_est: (full - half).norm(),
        method: Method::EigenTensor,
        nodes_or_samples: (nodes as u64).pow(f.r as u32),
        seed: None,
        partitions: None,
    })
}

/// Sampling density of single eigenvalues.
#[derive(Clone, Copy, Debug)]
enum Base {
    Beta(f64, f64),
    Gamma(f64),
    Normal,
}

impl Base {
    fn for_family(f: &NamedFamily) -> Result<Self, IntegratorError> {
        let ex = family_exponents(f);
        Ok(match f.tag.domain() {
            Domain::UnitInterval => {
                kappa(ex.lower)?;
                kappa(ex.upper)?;
                Base::Beta(ex.lower + 1.0, ex.upper + 1.0)
            }
            Domain::HalfLine => Base::Gamma(if ex.lower > -1.0 { ex.lower + 1.0 } else { 1.0 }),
            Domain::Line if f.tag == FamilyTag::Airy && f.r > 1 => {
                return Err(IntegratorError::IncompatibleChain("airy diverges on Hermitian matrices".into()));
            }
            Domain::Line => Base::Normal,
        })
    }

    fn sample_and_density(&self, s: &mut RandomStream) -> (f64, f64) {
        match *self {
            Base::Beta(a, b) => {
                let x = rand_distr::Beta::new(a, b).expect("positive shapes").sample(s);
                (x, statrs::distribution::Beta::new(a, b).expect("positive shapes").ln_pdf(x))
            }
            Base::Gamma(k) => {
                let x = rand_distr::Gamma::new(k, 1.0).expect("positive shape").sample(s);
                (x, statrs::distribution::Gamma::new(k, 1.0).expect("positive shape").ln_pdf(x))
            }
            Base::Normal => {
                let x = s.normal();
                (x, -0.5 * x * x - 0.5 * (2.0 * PI).ln())
            }
        }
    }
}

/// Haar Monte Carlo: `U = V diag(λ) V†` with `V` Haar and `λ_i` drawn from the
/// chain's base density. `samples` are split into [`MC_PARTITIONS`] blocks,
/// block `k` drawing from `stream.substream(k)`.
pub fn integrate_haar_mc(f: &NamedFamily, samples: u64, stream: &RandomStream) -> Result<IntegralEstimate, IntegratorError> {
    if samples < 2 {
        return Err(IntegratorError::IncompatibleChain("need at least two samples".into()));
    }
    let base = Base::for_family(f)?;
    let r = f.r;
    let cr = weyl_constant(r);
    let blocks: Vec<Result<(Cplx, f64), IntegrandError>> = (0..MC_PARTITIONS)
        .into_par_iter()
        .map(|k| {
            let lo = samples * k / MC_PARTITIONS;
            let hi = samples * (k + 1) / MC_PARTITIONS;
            let mut s = stream.substream(k);
            let mut sum = Cplx::new(0.0, 0.0);
            let mut sum_sq = 0.0;
            let mut l = vec![0.0; r];
            for _ in lo..hi {
                let mut log_density = 0.0;
                for slot in l.iter_mut() {
                    let (x, lp) = base.sample_and_density(&mut s);
                    *slot = x;
                    log_density += lp;
                }
                let v = haar_unitary(r, &mut s);
                let u = &(&v * &CMatrix::real_diag(&l)) * &v.adjoint();
                let val = named_value(f, &u)? * vandermonde_sq(&l) * cr * (-log_density).exp();
                sum += val;
                sum_sq += val.norm_sqr();
            }
            Ok((sum, sum_sq))
        })
        .collect();
    let mut sum = Cplx::new(0.0, 0.0);
    let mut sum_sq = 0.0;
    for b in blocks {
        let (s1, s2) = b?;
        sum += s1;
        sum_sq += s2;
    }
    let n = samples as f64;
    let mean = sum / n;
    let var = ((sum_sq / n - mean.norm_sqr()) * n / (n - 1.0)).max(0.0);
    Ok(IntegralEstimate {
        value: mean,
        abs_error_est: (var / n).sqrt(),
        method: Method::HaarMc,
        nodes_or_samples: samples,
        seed: Some(stream.seed()),
        partitions: Some(MC_PARTITIONS),
    })
}

/// `F_λ(z, α; C)`.
///
/// `z` is reduced to `x = g z h` and the result is carried back by
/// `F(z) = det(g)^r F(x) / χ_λ(h)`. For `r = 1`, `F(x)` is the chart integral
/// over the table form's standard chain; for `r ≥ 2` it is the named family
/// of the normal form, by eigen-tensor quadrature when invariant and Haar
/// Monte Carlo otherwise.
pub fn radon_hgf(
    z: &CoordMatrix,
    pw: &PartitionWeight,
    chain: Option<ChainSpec>,
    budget: &Budget,
) -> Result<IntegralEstimate, IntegratorError> {
    if z.m() == 2 * z.r() {
        let member = z_lambda_member(z)?;
        if !member.member {
            return Err(IntegratorError::NotInZLambda(member.failing));
        }
    }
    let spec = IntegrandSpec::new(pw.clone(), z.clone())?;
    let r = z.r();
    let red = reduce(z, budget.variant)?;
    let det_g = red.g.det().map_err(|e| IntegratorError::NormalForm(NormalFormError::Grassmann(GrassmannError::ShapeMismatch(e.to_string()))))?;
    let chi_h = chi_lambda(&red.h, pw)?;
    let transfer = cpow(det_g, Cplx::new(r as f64, 0.0)) / chi_h;
    if r == 1 {
        let (kind, ex) = chart_chain(&red.form_id, pw)?;
        check_chain(ChainSpec { kind, r: 1 }, chain)?;
        let x = CoordMatrix::new(table_form(&red.form_id, &red.x, 1)?, 1, pw.partition().to_vec())?;
        let at_x = spec.with_coords(x)?;
        return Ok(r1_integrate(|v| at_x.evaluate_scalar(v), kind, ex, budget)?.scaled(transfer));
    }
    let corr = family_of_normal_form(&red.form_id.partition, &red.x, pw)?;
    let fam = &corr.family;
    let expected = default_chain(fam);
    check_chain(expected, chain)?;
    let method = budget.method.unwrap_or(if fam.is_invariant() { Method::EigenTensor } else { Method::HaarMc });
    let fx = match method {
        Method::EigenTensor => integrate_invariant(fam, budget.nodes)?,
        Method::HaarMc => integrate_haar_mc(fam, budget.samples, &RandomStream::new(budget.seed))?,
        Method::Adaptive1d | Method::Gauss1d => return Err(IntegratorError::UnsupportedRank(r)),
    };
    Ok(fx.scaled(transfer))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::characters::Validation;
    use crate::oracles::{beta_r_closed, gamma, gamma_r_closed, gauss_2f1};

    fn c(x: f64) -> Cplx {
        Cplx::new(x, 0.0)
    }

    fn rel(a: Cplx, b: Cplx) -> f64 {
        (a - b).norm() / b.norm()
    }

    fn table_spec(partition: &[usize], x: &[CMatrix], tail: &[f64], r: usize) -> (CoordMatrix, PartitionWeight) {
        let variant = if partition.iter().sum::<usize>() == 3 { 0 } else { 1 };
        let form = FormId { partition: partition.to_vec(), variant };
        let z = table_form(&form, x, r).unwrap();
        let tail: Vec<Cplx> = tail.iter().map(|&v| c(v)).collect();
        let pw = PartitionWeight::with_leading_fixed(partition.to_vec(), &tail, 2 * r, r, Validation::Relaxed).unwrap();
        (CoordMatrix::new(z, r, partition.to_vec()).unwrap(), pw)
    }

    #[test]
    fn weyl_constant_values() {
        assert_eq!(weyl_constant(1), 1.0);
        assert!((weyl_constant(2) - PI / 2.0).abs() < 1e-15);
        assert!((weyl_constant(3) - PI.powi(3) / 12.0).abs() < 1e-14);
    }

    #[test]
    fn r1_classical_integrals() {
        let beta = NamedFamily::beta_r(1, c(2.0), c(3.0)).unwrap();
        let v = integrate_r1_family(&beta, None, 1e-12).unwrap();
        assert!(rel(v.value, c(1.0 / 12.0)) < 1e-12);
        let gauss = NamedFamily::gaussian_r(1).unwrap();
        let v = integrate_r1_family(&gauss, None, 1e-12).unwrap();
        assert!(rel(v.value, c((2.0 * PI).sqrt())) < 1e-10);
        let g = NamedFamily::gamma_r(1, c(0.3)).unwrap();
        let v = integrate_r1_family(&g, None, 1e-12).unwrap();
        assert!(rel(v.value, gamma(c(0.3)).unwrap()) < 1e-10);
        let f = NamedFamily::gauss(1, c(1.0), c(2.0), c(3.0), CMatrix::scalar(1, c(0.5))).unwrap();
        let v = integrate_r1_family(&f, None, 1e-12).unwrap();
        let pref = f.euler_prefactor().unwrap().unwrap();
        assert!(rel(v.value * pref, gauss_2f1(c(1.0), c(2.0), c(3.0), c(0.5)).unwrap()) < 1e-8);
        let bad = integrate_r1_family(&beta, Some(ChainSpec { kind: ChainKind::Line, r: 1 }), 1e-10);
        assert!(matches!(bad, Err(IntegratorError::IncompatibleChain(_))));
    }

    #[test]
    fn airy_rays() {
        // ∫ exp(UX - U³/3) dU over the ray pair is 2πi Ai(X)
        let ai0 = 1.0 / (3f64.powf(2.0 / 3.0) * gamma(c(2.0 / 3.0)).unwrap().re);
        let f = NamedFamily::airy(1, CMatrix::zeros(1, 1)).unwrap();
        let v = integrate_r1_family(&f, None, 1e-12).unwrap();
        assert!(rel(v.value, Cplx::new(0.0, 2.0 * PI * ai0)) < 1e-10);
        let (z, pw) = table_spec(&[4], &[CMatrix::zeros(1, 1)], &[0.0, 0.0, 1.0], 1);
        let chart = radon_hgf(&z, &pw, None, &Budget::default()).unwrap();
        assert!(rel(chart.value, v.value) < 1e-9);
    }

    #[test]
    fn endpoint_divergence_is_reported() {
        let f = |u: Cplx| Ok(u.powf(-1.2));
        let err = integrate_chain(f, ChainKind::Interval, EndpointExponents { lower: -1.2, upper: 0.0 }, 1e-10);
        assert!(matches!(err, Err(IntegratorError::DivergentEndpoint(_))));
    }

    #[test]
    fn invariant_gamma_and_beta() {
        for r in 1..=3 {
            let rf = r as f64;
            for a in [rf, rf + 0.5, rf + 2.0] {
                let g = integrate_invariant(&NamedFamily::gamma_r(r, c(a)).unwrap(), 32).unwrap();
                assert!(rel(g.value, gamma_r_closed(r, c(a)).unwrap()) < 1e-8, "Γ_{r}({a})");
                let b = integrate_invariant(&NamedFamily::beta_r(r, c(a), c(a + 0.25)).unwrap(), 32).unwrap();
                assert!(rel(b.value, beta_r_closed(r, c(a), c(a + 0.25)).unwrap()) < 1e-8, "B_{r}({a})");
            }
        }
        let g2 = integrate_invariant(&NamedFamily::gamma_r(2, c(3.0)).unwrap(), 16).unwrap();
        assert!(rel(g2.value, c(2.0 * PI)) < 1e-12);
    }

    #[test]
    fn non_invariant_rejected() {
        let f = NamedFamily::kummer(2, c(2.5), c(5.0), CMatrix::real_diag(&[-0.5, 0.3])).unwrap();
        assert!(matches!(integrate_invariant(&f, 16), Err(IntegratorError::NotInvariant(_))));
        let err = probe_invariance(&f, 4, 1);
        assert!(matches!(err, Err(IntegratorError::NotInvariant(_))));
    }

    #[test]
    fn haar_mc_is_deterministic_and_unbiased() {
        let f = NamedFamily::gamma_r(2, c(3.0)).unwrap();
        let s = RandomStream::new(42);
        let a = integrate_haar_mc(&f, 20_000, &s).unwrap();
        let b = integrate_haar_mc(&f, 20_000, &s).unwrap();
        assert_eq!(a, b);
        assert!((a.value - c(2.0 * PI)).norm() < 4.0 * a.abs_error_est);
        let g = NamedFamily::gaussian_r(2).unwrap();
        let mc = integrate_haar_mc(&g, 20_000, &s).unwrap();
        let det = integrate_invariant(&g, 32).unwrap();
        assert!((mc.value - det.value).norm() < 4.0 * mc.abs_error_est);
    }

    #[test]
    fn radon_two_one_gives_gamma() {
        let a = 2.5;
        let (z, pw) = table_spec(&[2, 1], &[], &[-1.0, a - 1.0], 1);
        let v = radon_hgf(&z, &pw, None, &Budget::default()).unwrap();
        assert!(rel(v.value, gamma(c(a)).unwrap()) < 1e-8);
    }

    #[test]
    fn radon_gauss_series_r1() {
        let (a, b, cc) = (0.7, 1.3, 2.4);
        for x in [-0.5, 0.4] {
            let (z, pw) = table_spec(&[1, 1, 1, 1], &[CMatrix::scalar(1, c(x))], &[a - 1.0, cc - a - 1.0, -b], 1);
            let v = radon_hgf(&z, &pw, None, &Budget::default()).unwrap();
            let pref = gamma(c(cc)).unwrap() / (gamma(c(a)).unwrap() * gamma(c(cc - a)).unwrap());
            assert!(rel(v.value * pref, gauss_2f1(c(a), c(b), c(cc), c(x)).unwrap()) < 1e-7);
        }
    }

    #[test]
    fn moving_chain_matches_transfer() {
        let (z, pw) = table_spec(&[1, 1, 1, 1], &[CMatrix::scalar(1, c(0.3))], &[0.4, 0.6, -0.8], 1);
        let base = radon_hgf(&z, &pw, None, &Budget::default()).unwrap();
        let g = CMatrix::from_real(2, 2, &[1.1, 0.2, 0.0, 0.9]);
        let gz = z.left_act(&g).unwrap();
        let spec = IntegrandSpec::new(pw.clone(), gz.clone()).unwrap();
        let direct = integrate_r1_moving_chain(&spec, None, &Budget::default()).unwrap();
        let transfer = radon_hgf(&gz, &pw, None, &Budget::default()).unwrap();
        let expect = base.value / g.det().unwrap();
        assert!(rel(direct.value, expect) < 1e-8);
        assert!(rel(transfer.value, expect) < 1e-10);
    }

    #[test]
    fn fixed_rule_agrees_with_adaptive() {
        let (z, pw) = table_spec(&[1, 1, 1, 1], &[CMatrix::scalar(1, c(0.3))], &[-0.45, -0.3, -0.7], 1);
        let a = radon_hgf(&z, &pw, None, &Budget::default()).unwrap();
        let f = radon_hgf(&z, &pw, None, &Budget { fixed_rule: Some((8, 48)), ..Budget::default() }).unwrap();
        assert_eq!(f.method, Method::Gauss1d);
        assert!(rel(f.value, a.value) < 1e-10, "{} vs {}", f.value, a.value);
        let (z, pw) = table_spec(&[2, 2], &[CMatrix::scalar(1, c(-0.8))], &[1.0, 0.4, -1.0], 1);
        let a = radon_hgf(&z, &pw, None, &Budget::default()).unwrap();
        let f = radon_hgf(&z, &pw, None, &Budget { fixed_rule: Some((8, 48)), ..Budget::default() }).unwrap();
        assert!(rel(f.value, a.value) < 1e-10, "{} vs {}", f.value, a.value);
    }

    #[test]
    fn radon_r2_beta_identity() {
        let (a, b) = (2.4, 2.7);
        let (z, pw) = table_spec(&[1, 1, 1], &[], &[a - 2.0, b - 2.0], 2);
        let v = radon_hgf(&z, &pw, None, &Budget { nodes: 32, ..Budget::default() }).unwrap();
        assert_eq!(v.method, Method::EigenTensor);
        assert!(rel(v.value, beta_r_closed(2, c(a), c(b)).unwrap()) < 1e-6);
    }

    #[test]
    fn radon_rejects_points_outside_z_lambda() {
        let z = CMatrix::from_real(2, 3, &[1.0, 0.0, 1.0, 0.0, 1.0, 0.0]);
        let z = CoordMatrix::new(z, 1, vec![1, 1, 1]).unwrap();
        let tail = [c(-0.3), c(-0.4)];
        let pw = PartitionWeight::with_leading_fixed(vec![1, 1, 1], &tail, 2, 1, Validation::Relaxed).unwrap();
        assert!(matches!(radon_hgf(&z, &pw, None, &Budget::default()), Err(IntegratorError::NotInZLambda(_))));
    }
}
