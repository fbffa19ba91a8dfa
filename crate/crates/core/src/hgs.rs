//! Finite-difference checks of the hypergeometric system satisfied by
//! `F_λ`: the determinant operators `D_{I,J}` and the infinitesimal forms of
//! the two covariance laws.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::characters::{chi_differential, CharacterError, GroupElement, PartitionWeight};
use crate::grassmann::{right_act_matrix, CoordMatrix, GrassmannError};
use crate::integrands::IntegrandError;
use crate::integrator::{radon_hgf, Budget, IntegratorError};
use crate::jordan::TruncPoly;
use crate::numeric::{CMatrix, Cplx};

pub const DEFAULT_STEP: f64 = 1e-3;
pub const PDE_TOL: f64 = 1e-4;
pub const INFINITESIMAL_TOL: f64 = 1e-5;

#[derive(Clone, Debug, PartialEq, Error)]
pub enum HgsError {
    #[error("a stencil point lies on the branch locus: {0}")]
    StencilCrossesBranchLocus(String),
    #[error("invalid index sets I = {i:?}, J = {j:?}")]
    BadIndices { i: Vec<usize>, j: Vec<usize> },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error(transparent)]
    Evaluation(IntegratorError),
    #[error(transparent)]
    Character(#[from] CharacterError),
    #[error(transparent)]
    Grassmann(#[from] GrassmannError),
}

impl From<IntegratorError> for HgsError {
    fn from(e: IntegratorError) -> Self {
        match e {
            IntegratorError::Integrand(IntegrandError::OnBranchLocus { block, det }) => {
                HgsError::StencilCrossesBranchLocus(format!("block {block}, det {det}"))
            }
            other => HgsError::Evaluation(other),
        }
    }
}

/// A black-box function of the coordinate matrix.
pub trait CoordFunction: Sync {
    fn eval(&self, z: &CMatrix) -> Result<Cplx, IntegratorError>;
}

impl<F: Fn(&CMatrix) -> Result<Cplx, IntegratorError> + Sync> CoordFunction for F {
    fn eval(&self, z: &CMatrix) -> Result<Cplx, IntegratorError> {
        self(z)
    }
}

/// `F_λ(z, α)` as a function of the raw matrix `z`.
pub struct RadonFunction {
    pub pw: PartitionWeight,
    pub budget: Budget,
}

impl CoordFunction for RadonFunction {
    fn eval(&self, z: &CMatrix) -> Result<Cplx, IntegratorError> {
        let z = CoordMatrix::new(z.clone(), self.pw.r(), self.pw.partition().to_vec())?;
        Ok(radon_hgf(&z, &self.pw, None, &self.budget)?.value)
    }
}

/// 1-based row set `I` and column set `J` of size `r + 1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MultiIndexPair {
    pub i: Vec<usize>,
    pub j: Vec<usize>,
}

fn increasing_within(s: &[usize], max: usize) -> bool {
    s.iter().all(|&x| x >= 1 && x <= max) && s.windows(2).all(|w| w[0] < w[1])
}

impl MultiIndexPair {
    pub fn new(i: Vec<usize>, j: Vec<usize>, m: usize, big_n: usize, r: usize) -> Result<Self, HgsError> {
        if i.len() != r + 1 || j.len() != r + 1 || !increasing_within(&i, m) || !increasing_within(&j, big_n) {
            return Err(HgsError::BadIndices { i, j });
        }
        Ok(MultiIndexPair { i, j })
    }
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for x in start..=n {
            cur.push(x);
            go(x + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(1, n, k, &mut Vec::new(), &mut out);
    out
}

/// Every `(I, J)` with `|I| = |J| = r + 1`.
pub fn all_pairs(m: usize, big_n: usize, r: usize) -> Vec<MultiIndexPair> {
    let mut out = Vec::new();
    for i in subsets(m, r + 1) {
        for j in subsets(big_n, r + 1) {
            out.push(MultiIndexPair { i: i.clone(), j });
        }
    }
    out
}

/// Central differences with step `base · (1 + |z_ij|)` per entry, optionally
/// Richardson-extrapolated from `h` and `h/2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StencilPlan {
    pub base: f64,
    pub richardson: bool,
}

impl Default for StencilPlan {
    fn default() -> Self {
        StencilPlan { base: DEFAULT_STEP, richardson: true }
    }
}

fn permutations(n: usize) -> Vec<(Vec<usize>, f64)> {
    fn go(rest: Vec<usize>, cur: &mut Vec<usize>, out: &mut Vec<(Vec<usize>, f64)>) {
        if rest.is_empty() {
            let mut sign = 1.0;
            for a in 0..cur.len() {
                for b in a + 1..cur.len() {
                    if cur[a] > cur[b] {
                        sign = -sign;
                    }
                }
            }
            out.push((cur.clone(), sign));
            return;
        }
        for (k, &x) in rest.iter().enumerate() {
            let mut next = rest.clone();
            next.remove(k);
            cur.push(x);
            go(next, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go((0..n).collect(), &mut Vec::new(), &mut out);
    out
}

/// `∂^k F / ∂z_{e_1} ... ∂z_{e_k}` for distinct entries by tensor central differences.
fn mixed_partial<F: CoordFunction + ?Sized>(
    f: &F,
    z0: &CMatrix,
    entries: &[(usize, usize)],
    steps: &[f64],
) -> Result<Cplx, HgsError> {
    let k = entries.len();
    let values: Vec<Result<Cplx, IntegratorError>> = (0..1usize << k)
        .into_par_iter()
        .map(|mask| {
            let mut z = z0.clone();
            let mut sign = 1.0;
            for (b, (&(row, col), &h)) in entries.iter().zip(steps).enumerate() {
                let s = if mask >> b & 1 == 1 { 1.0 } else { -1.0 };
                sign *= s;
                let v = *z.get(row, col) + s * h;
                z.set(row, col, v);
            }
            f.eval(&z).map(|v| v * sign)
        })
        .collect();
    let mut sum = Cplx::new(0.0, 0.0);
    for v in values {
        sum += v?;
    }
    let denom: f64 = steps.iter().map(|h| 2.0 * h).product();
    Ok(sum / denom)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DijResult {
    pub pair: MultiIndexPair,
    pub residual: Cplx,
    /// Largest absolute value among the `(r+1)!` signed terms.
    pub scale: f64,
}

impl DijResult {
    pub fn relative(&self) -> f64 {
        if self.scale > 0.0 {
            self.residual.norm() / self.scale
        } else {
            self.residual.norm()
        }
    }
}

fn dij_terms<F: CoordFunction + ?Sized>(
    f: &F,
    z0: &CMatrix,
    pair: &MultiIndexPair,
    base: f64,
) -> Result<Vec<Cplx>, HgsError> {
    let n = pair.i.len();
    let mut terms = Vec::new();
    for (sigma, sign) in permutations(n) {
        let entries: Vec<(usize, usize)> = (0..n).map(|mu| (pair.i[mu] - 1, pair.j[sigma[mu]] - 1)).collect();
        let steps: Vec<f64> = entries.iter().map(|&(a, b)| base * (1.0 + z0.get(a, b).norm())).collect();
        terms.push(mixed_partial(f, z0, &entries, &steps)? * sign);
    }
    Ok(terms)
}

/// `D_{I,J} F (z_0)` with `D_{I,J} = det(∂/∂z_{i_μ j_ν})`, expanded into its
/// `(r+1)!` signed mixed partials.
pub fn apply_dij<F: CoordFunction + ?Sized>(
    f: &F,
    z0: &CMatrix,
    pair: &MultiIndexPair,
    plan: &StencilPlan,
) -> Result<DijResult, HgsError> {
    if pair.i.iter().any(|&i| i > z0.rows()) || pair.j.iter().any(|&j| j > z0.cols()) {
        return Err(HgsError::BadIndices { i: pair.i.clone(), j: pair.j.clone() });
    }
    let coarse = dij_terms(f, z0, pair, plan.base)?;
    let terms = if plan.richardson {
        let fine = dij_terms(f, z0, pair, plan.base / 2.0)?;
        coarse.iter().zip(&fine).map(|(c, f)| (4.0 * f - c) / 3.0).collect()
    } else {
        coarse
    };
    let residual = terms.iter().sum();
    let scale = terms.iter().map(|t| t.norm()).fold(0.0, f64::max);
    Ok(DijResult { pair: pair.clone(), residual, scale })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PdeReport {
    pub pairs: Vec<DijResult>,
    pub max_relative: f64,
    pub pass: bool,
}

/// `D_{I,J} F` for every pair, in parallel.
pub fn check_all_pairs<F: CoordFunction + ?Sized>(
    f: &F,
    z0: &CMatrix,
    r: usize,
    plan: &StencilPlan,
    tol: f64,
) -> Result<PdeReport, HgsError> {
    let pairs = all_pairs(z0.rows(), z0.cols(), r);
    let results: Vec<Result<DijResult, HgsError>> = pairs.par_iter().map(|p| apply_dij(f, z0, p, plan)).collect();
    let pairs = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    let max_relative = pairs.iter().map(DijResult::relative).fold(0.0, f64::max);
    Ok(PdeReport { pass: max_relative < tol, max_relative, pairs })
}

/// Ratio `|residual(h)| / |residual(h/2)|` of plain (non-extrapolated)
/// central differences; about 4 when the error is truncation-dominated.
pub fn halving_ratio<F: CoordFunction + ?Sized>(f: &F, z0: &CMatrix, pair: &MultiIndexPair, h: f64) -> Result<f64, HgsError> {
    let plan = |base| StencilPlan { base, richardson: false };
    let a = apply_dij(f, z0, pair, &plan(h))?;
    let b = apply_dij(f, z0, pair, &plan(h / 2.0))?;
    Ok(a.residual.norm() / b.residual.norm())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InfinitesimalResult {
    pub derivative: Cplx,
    pub expected: Cplx,
    pub residual: Cplx,
    pub value: Cplx,
}

impl InfinitesimalResult {
    pub fn relative(&self) -> f64 {
        self.residual.norm() / self.value.norm().max(f64::MIN_POSITIVE)
    }
}

/// `d/dε φ(ε)` at 0 by Richardson-extrapolated central differences.
fn derivative(phi: &(dyn Fn(f64) -> Result<Cplx, HgsError> + Sync), h: f64) -> Result<Cplx, HgsError> {
    let pts = [h, -h, h / 2.0, -h / 2.0];
    let v: Vec<Result<Cplx, HgsError>> = pts.par_iter().map(|&e| phi(e)).collect();
    let v = v.into_iter().collect::<Result<Vec<_>, _>>()?;
    let d1 = (v[0] - v[1]) / (2.0 * h);
    let d2 = (v[2] - v[3]) / h;
    Ok((4.0 * d2 - d1) / 3.0)
}

fn scaled_direction(e: &GroupElement, t: f64) -> Result<GroupElement, HgsError> {
    let blocks = e.blocks().iter().map(|b| b.scale(&Cplx::new(t, 0.0))).collect();
    Ok(GroupElement::new(blocks)?)
}

/// Residual of `d/dε F(z exp(εE))|_0 = dχ_λ(E) F(z)`.
pub fn check_h_infinitesimal<F: CoordFunction + ?Sized>(
    f: &F,
    z0: &CoordMatrix,
    e: &GroupElement,
    pw: &PartitionWeight,
    h: f64,
) -> Result<InfinitesimalResult, HgsError> {
    let value = f.eval(z0.matrix())?;
    let phi = |eps: f64| -> Result<Cplx, HgsError> {
        let g = GroupElement::exp(&scaled_direction(e, eps)?);
        let z = right_act_matrix(z0.matrix(), z0.r(), z0.partition(), &g)?;
        Ok(f.eval(&z)?)
    };
    let d = derivative(&phi, h)?;
    let expected = chi_differential(e, pw)? * value;
    Ok(InfinitesimalResult { derivative: d, expected, residual: d - expected, value })
}

/// `exp(E)` for a square matrix.
pub fn matrix_exp(e: &CMatrix) -> Result<CMatrix, HgsError> {
    let p = TruncPoly::new(vec![e.clone()]).map_err(|err| HgsError::ShapeMismatch(err.to_string()))?;
    Ok(p.exp_general().coeff(0).clone())
}

/// Residual of `d/dε F(exp(εE) z)|_0 = -r Tr(E) F(z)`.
pub fn check_gl_infinitesimal<F: CoordFunction + ?Sized>(
    f: &F,
    z0: &CoordMatrix,
    e: &CMatrix,
    h: f64,
) -> Result<InfinitesimalResult, HgsError> {
    if e.shape() != (z0.m(), z0.m()) {
        return Err(HgsError::ShapeMismatch(format!("E must be {0}×{0}", z0.m())));
    }
    let value = f.eval(z0.matrix())?;
    let phi = |eps: f64| -> Result<Cplx, HgsError> {
        let g = matrix_exp(&e.scale(&Cplx::new(eps, 0.0)))?;
        Ok(f.eval(&(&g * z0.matrix()))?)
    };
    let d = derivative(&phi, h)?;
    let expected = -(z0.r() as f64) * e.trace() * value;
    Ok(InfinitesimalResult { derivative: d, expected, residual: d - expected, value })
}
