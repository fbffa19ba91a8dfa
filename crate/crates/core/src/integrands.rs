//! The affine-chart integrand `u ↦ χ_λ(ū z; α)` and the named Hermitian
//! matrix integrands it specializes to.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::characters::{CharacterError, GroupElement, PartitionWeight};
use crate::grassmann::{ChartPoint, CoordMatrix};
use crate::jordan::{theta_traces, TruncPoly};
use crate::numeric::scalar::cpow;
use crate::numeric::{hermitian_eigen, CMatrix, Cplx, LinalgError};

/// Relative size below which `det(ū z_0^{(j)})` counts as zero. Far below
/// rounding level, so that points a few ulps from an integrable endpoint
/// still evaluate.
pub const BRANCH_TOL: f64 = 1e-30;
/// Tolerance for matching the pinned weights of a normal-form family.
pub const PIN_TOL: f64 = 1e-12;
const HERMITIAN_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Error)]
pub enum IntegrandError {
    #[error("det(ū z_0) of block {block} vanishes ({det})")]
    OnBranchLocus { block: usize, det: Cplx },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("argument outside the domain of {family}: {reason}")]
    OutOfDomain { family: FamilyTag, reason: String },
    #[error("invalid parameters for {family}: {reason}")]
    InvalidParameters { family: FamilyTag, reason: String },
    #[error("no named family for partition {0:?}")]
    UnsupportedPartition(Vec<usize>),
    #[error("α_{index} = {found} but the family needs {expected}")]
    UnpinnedAlpha { index: usize, expected: Cplx, found: Cplx },
    #[error(transparent)]
    Character(#[from] CharacterError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// `χ_λ(t z; α) = f · exp(g)`: `f` collects the determinant powers and `g`
/// the trace terms.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegrandSplit {
    pub f: Cplx,
    pub g: Cplx,
}

impl IntegrandSplit {
    pub fn value(&self) -> Cplx {
        self.f * self.g.exp()
    }
}

/// The integrand of `F_λ(z, α)` on the chart `t = ū`.
#[derive(Clone, Debug, PartialEq)]
pub struct IntegrandSpec {
    pw: PartitionWeight,
    z: CoordMatrix,
}

impl IntegrandSpec {
    pub fn new(pw: PartitionWeight, z: CoordMatrix) -> Result<Self, IntegrandError> {
        if z.r() != pw.r() || z.partition() != pw.partition() {
            return Err(IntegrandError::ShapeMismatch("z and the weight disagree on r or λ".into()));
        }
        if z.m() != 2 * z.r() || pw.m() != z.m() {
            return Err(IntegrandError::ShapeMismatch(format!("need m = 2r, got m = {} with r = {}", z.m(), z.r())));
        }
        Ok(IntegrandSpec { pw, z })
    }

    pub fn weight(&self) -> &PartitionWeight {
        &self.pw
    }

    pub fn coords(&self) -> &CoordMatrix {
        &self.z
    }

    pub fn r(&self) -> usize {
        self.z.r()
    }

    /// Same weight, new coordinates.
    pub fn with_coords(&self, z: CoordMatrix) -> Result<Self, IntegrandError> {
        Self::new(self.pw.clone(), z)
    }

    /// `f` and `g` for an arbitrary `r × m` frame `t`.
    pub fn split_frame(&self, t: &CMatrix) -> Result<IntegrandSplit, IntegrandError> {
        let tz = t.try_mul(self.z.matrix())?;
        let h = GroupElement::from_matrix(&tz, self.pw.partition())?;
        let r = self.r();
        let mut f = Cplx::new(1.0, 0.0);
        let mut g = Cplx::new(0.0, 0.0);
        for (j, block) in h.blocks().iter().enumerate() {
            let alpha = self.pw.alpha(j);
            let h0 = block.coeff(0);
            let det = h0.det()?;
            let scale = h0.max_row_norm().powi(r as i32);
            if !(det.norm() > BRANCH_TOL * scale.max(f64::MIN_POSITIVE)) {
                return Err(IntegrandError::OnBranchLocus { block: j, det });
            }
            f *= cpow(det, alpha[0]);
            if block.p() > 1 {
                let hat = block.unipotent_part().map_err(CharacterError::from)?;
                let hat = TruncPoly::unipotent(r, &hat.coeffs()[1..]).map_err(CharacterError::from)?;
                let traces = theta_traces(&hat).map_err(CharacterError::from)?;
                g += traces.iter().zip(&alpha[1..]).map(|(t, a)| t * a).sum::<Cplx>();
            }
        }
        Ok(IntegrandSplit { f, g })
    }

    pub fn split(&self, u: &ChartPoint) -> Result<IntegrandSplit, IntegrandError> {
        if u.r() != self.r() || u.m() != self.z.m() {
            return Err(IntegrandError::ShapeMismatch("chart point of the wrong size".into()));
        }
        self.split_frame(&u.ubar())
    }

    pub fn evaluate(&self, u: &ChartPoint) -> Result<Cplx, IntegrandError> {
        Ok(self.split(u)?.value())
    }

    pub fn evaluate_frame(&self, t: &CMatrix) -> Result<Cplx, IntegrandError> {
        Ok(self.split_frame(t)?.value())
    }

    /// The `r = 1` integrand as a function of the scalar chart coordinate.
    pub fn evaluate_scalar(&self, u: Cplx) -> Result<Cplx, IntegrandError> {
        self.evaluate(&ChartPoint::new(CMatrix::scalar(1, u)))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyTag {
    BetaR,
    GammaR,
    GaussianR,
    Gauss,
    Kummer,
    Bessel,
    HermiteWeber,
    Airy,
    LauricellaFd,
}

impl fmt::Display for FamilyTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            FamilyTag::BetaR => "beta_r",
            FamilyTag::GammaR => "gamma_r",
            FamilyTag::GaussianR => "gaussian_r",
            FamilyTag::Gauss => "gauss",
            FamilyTag::Kummer => "kummer",
            FamilyTag::Bessel => "bessel",
            FamilyTag::HermiteWeber => "hermite_weber",
            FamilyTag::Airy => "airy",
            FamilyTag::LauricellaFd => "lauricella_fd",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for FamilyTag {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.replace('-', "_").as_str() {
            "beta_r" | "beta" => FamilyTag::BetaR,
            "gamma_r" | "gamma" => FamilyTag::GammaR,
            "gaussian_r" | "gaussian" => FamilyTag::GaussianR,
            "gauss" => FamilyTag::Gauss,
            "kummer" => FamilyTag::Kummer,
            "bessel" => FamilyTag::Bessel,
            "hermite_weber" => FamilyTag::HermiteWeber,
            "airy" => FamilyTag::Airy,
            "lauricella_fd" | "lauricella" => FamilyTag::LauricellaFd,
            other => return Err(format!("unknown family {other}")),
        })
    }
}

/// Where the eigenvalues of `U` live for a family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Domain {
    UnitInterval,
    HalfLine,
    Line,
}

impl FamilyTag {
    pub fn domain(&self) -> Domain {
        match self {
            FamilyTag::BetaR | FamilyTag::Gauss | FamilyTag::Kummer | FamilyTag::LauricellaFd => Domain::UnitInterval,
            FamilyTag::GammaR | FamilyTag::Bessel | FamilyTag::HermiteWeber => Domain::HalfLine,
            FamilyTag::GaussianR | FamilyTag::Airy => Domain::Line,
        }
    }
}

/// A named Hermitian matrix integral.
///
/// `b` holds `b` for beta_r and gauss, and `b_4, ..., b_n` for lauricella_fd;
/// `x` holds `X` (or `x_4, ..., x_n`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NamedFamily {
    pub tag: FamilyTag,
    pub r: usize,
    pub a: Cplx,
    pub b: Vec<Cplx>,
    pub c: Cplx,
    pub x: Vec<CMatrix>,
}

fn zero() -> Cplx {
    Cplx::new(0.0, 0.0)
}

impl NamedFamily {
    fn build(tag: FamilyTag, r: usize, a: Cplx, b: Vec<Cplx>, c: Cplx, x: Vec<CMatrix>) -> Result<Self, IntegrandError> {
        let bad = |reason: String| IntegrandError::InvalidParameters { family: tag, reason };
        if r == 0 {
            return Err(bad("r must be positive".into()));
        }
        if x.iter().any(|m| m.shape() != (r, r) || !m.all_finite()) {
            return Err(bad(format!("arguments must be finite {r}×{r} matrices")));
        }
        let rm1 = r as f64 - 1.0;
        match tag {
            FamilyTag::GammaR if a.re <= rm1 => return Err(bad(format!("needs Re a > {rm1}"))),
            FamilyTag::BetaR if a.re <= rm1 || b[0].re <= rm1 => return Err(bad(format!("needs Re a, Re b > {rm1}"))),
            FamilyTag::Gauss | FamilyTag::Kummer | FamilyTag::LauricellaFd if a.re <= rm1 || (c - a).re <= rm1 => {
                return Err(bad(format!("needs Re a, Re(c - a) > {rm1}")))
            }
            _ => {}
        }
        Ok(NamedFamily { tag, r, a, b, c, x })
    }

    pub fn beta_r(r: usize, a: Cplx, b: Cplx) -> Result<Self, IntegrandError> {
        Self::build(FamilyTag::BetaR, r, a, vec![b], zero(), vec![])
    }

    pub fn gamma_r(r: usize, a: Cplx) -> Result<Self, IntegrandError> {
        Self::build(FamilyTag::GammaR, r, a, vec![], zero(), vec![])
    }

    pub fn gaussian_r(r: usize) -> Result<Self, IntegrandError> {
        Self::build(FamilyTag::GaussianR, r, zero(), vec![], zero(), vec![])
    }

    pub fn gauss(r: usize, a: Cplx, b: Cplx, c: Cplx, x: CMatrix) -> Result<Self, IntegrandError> {
        Self::build(FamilyTag::Gauss, r, a, vec![b], c, vec![x])
    }

    pub fn kummer(r: usize, a: Cplx, c: Cplx, x: CMatrix) -> Result<Self, IntegrandError> {
        Self::build(FamilyTag::Kummer, r, a, vec![], c, vec![x])
    }

    pub fn bessel(r: usize, c: Cplx, x: CMatrix) -> Result<Self, IntegrandError> {
        Self::build(FamilyTag::Bessel, r, zero(), vec![], c, vec![x])
    }

    pub fn hermite_weber(r: usize, c: Cplx, x: CMatrix) -> Result<Self, IntegrandError> {
        Self::build(FamilyTag::HermiteWeber, r, zero(), vec![], c, vec![x])
    }

    pub fn airy(r: usize, x: CMatrix) -> Result<Self, IntegrandError> {
        Self::build(FamilyTag::Airy, r, zero(), vec![], zero(), vec![x])
    }

    pub fn lauricella_fd(r: usize, a: Cplx, b: Vec<Cplx>, c: Cplx, x: Vec<CMatrix>) -> Result<Self, IntegrandError> {
        if b.len() != x.len() || b.is_empty() {
            return Err(IntegrandError::InvalidParameters {
                family: FamilyTag::LauricellaFd,
                reason: "need as many b_j as x_j, at least one".into(),
            });
        }
        Self::build(FamilyTag::LauricellaFd, r, a, b, c, x)
    }

    /// `X`, or the zero matrix for families without one.
    pub fn x_matrix(&self) -> CMatrix {
        self.x.first().cloned().unwrap_or_else(|| CMatrix::zeros(self.r, self.r))
    }

    /// Whether the integrand depends on `U` only through its eigenvalues.
    pub fn is_invariant(&self) -> bool {
        let scalar = |m: &CMatrix| {
            let d = *m.get(0, 0);
            (m - &CMatrix::scalar(self.r, d)).max_abs() <= 1e-15 * (1.0 + d.norm())
        };
        self.x.iter().all(scalar)
    }

    /// The normalizing constant that makes the integral equal 1 at `X = 0`,
    /// where one exists: `1/B_r(a, c - a)` for gauss, kummer and lauricella_fd.
    pub fn euler_prefactor(&self) -> Result<Option<Cplx>, crate::oracles::OracleError> {
        Ok(match self.tag {
            FamilyTag::Gauss | FamilyTag::Kummer | FamilyTag::LauricellaFd => {
                Some(Cplx::new(1.0, 0.0) / crate::oracles::beta_r_closed(self.r, self.a, self.c - self.a)?)
            }
            _ => None,
        })
    }
}

fn etr(m: &CMatrix) -> Cplx {
    m.trace().exp()
}

fn detpow(m: &CMatrix, e: Cplx) -> Result<Cplx, IntegrandError> {
    Ok(cpow(m.det()?, e))
}

fn check_domain(f: &NamedFamily, u: &CMatrix) -> Result<(), IntegrandError> {
    let out = |reason: String| IntegrandError::OutOfDomain { family: f.tag, reason };
    if u.shape() != (f.r, f.r) {
        return Err(IntegrandError::ShapeMismatch(format!("U must be {0}×{0}", f.r)));
    }
    if !u.all_finite() || !u.is_hermitian(HERMITIAN_TOL) {
        return Err(out("U is not Hermitian".into()));
    }
    let eig = hermitian_eigen(u)?;
    let ok = |lo: f64, hi: f64| eig.eigenvalues.iter().all(|&l| l > lo && l < hi);
    match f.tag.domain() {
        Domain::UnitInterval if !ok(0.0, 1.0) => Err(out("needs 0 < U < 1".into())),
        Domain::HalfLine if !ok(0.0, f64::INFINITY) => Err(out("needs U > 0".into())),
        _ => Ok(()),
    }
}

/// The displayed integrand of the named family at a Hermitian `U`.
pub fn named_integrand(f: &NamedFamily, u: &CMatrix) -> Result<Cplx, IntegrandError> {
    check_domain(f, u)?;
    named_value(f, u)
}

/// [`named_integrand`] without the domain check, for samplers that
/// construct `U` inside the domain.
pub fn named_value(f: &NamedFamily, u: &CMatrix) -> Result<Cplx, IntegrandError> {
    if u.shape() != (f.r, f.r) {
        return Err(IntegrandError::ShapeMismatch(format!("U must be {0}×{0}", f.r)));
    }
    let r = f.r;
    let rf = Cplx::new(r as f64, 0.0);
    let one = CMatrix::identity(r);
    let ux = || u * &f.x_matrix();
    let u2 = u * u;
    Ok(match f.tag {
        FamilyTag::BetaR => detpow(u, f.a - rf)? * detpow(&(&one - u), f.b[0] - rf)?,
        FamilyTag::GammaR => etr(&-u) * detpow(u, f.a - rf)?,
        FamilyTag::GaussianR => etr(&u2.scale(&Cplx::new(-0.5, 0.0))),
        FamilyTag::Gauss => {
            detpow(u, f.a - rf)? * detpow(&(&one - u), f.c - f.a - rf)? * detpow(&(&one - &ux()), -f.b[0])?
        }
        FamilyTag::Kummer => etr(&ux()) * detpow(u, f.a - rf)? * detpow(&(&one - u), f.c - f.a - rf)?,
        FamilyTag::Bessel => etr(&(&ux() - &u.inverse()?)) * detpow(u, f.c - rf)?,
        FamilyTag::HermiteWeber => etr(&(&ux() - &u2.scale(&Cplx::new(0.5, 0.0)))) * detpow(u, -f.c - rf)?,
        FamilyTag::Airy => etr(&(&ux() - &(&u2 * u).scale(&Cplx::new(1.0 / 3.0, 0.0)))),
        FamilyTag::LauricellaFd => {
            let mut v = detpow(u, f.a - rf)? * detpow(&(&one - u), f.c - f.a - rf)?;
            for (b, x) in f.b.iter().zip(&f.x) {
                v *= detpow(&(&one - &(u * x)), -b)?;
            }
            v
        }
    })
}

/// `φ` with `f(U) = ∏ φ(λ_i)` over the eigenvalues of `U`, for families
/// whose arguments are scalar matrices. Defined for complex `λ` as well.
pub fn eigen_factor(f: &NamedFamily, l: Cplx) -> Result<Cplx, IntegrandError> {
    if !f.is_invariant() {
        return Err(IntegrandError::InvalidParameters { family: f.tag, reason: "X is not a scalar matrix".into() });
    }
    let rf = Cplx::new(f.r as f64, 0.0);
    let one = Cplx::new(1.0, 0.0);
    let xi = |j: usize| f.x.get(j).map(|m| *m.get(0, 0)).unwrap_or_else(zero);
    Ok(match f.tag {
        FamilyTag::BetaR => cpow(l, f.a - rf) * cpow(one - l, f.b[0] - rf),
        FamilyTag::GammaR => (-l).exp() * cpow(l, f.a - rf),
        FamilyTag::GaussianR => (-0.5 * l * l).exp(),
        FamilyTag::Gauss => cpow(l, f.a - rf) * cpow(one - l, f.c - f.a - rf) * cpow(one - l * xi(0), -f.b[0]),
        FamilyTag::Kummer => (l * xi(0)).exp() * cpow(l, f.a - rf) * cpow(one - l, f.c - f.a - rf),
        FamilyTag::Bessel => (l * xi(0) - one / l).exp() * cpow(l, f.c - rf),
        FamilyTag::HermiteWeber => (l * xi(0) - 0.5 * l * l).exp() * cpow(l, -f.c - rf),
        FamilyTag::Airy => (l * xi(0) - l * l * l / 3.0).exp(),
        FamilyTag::LauricellaFd => {
            let mut v = cpow(l, f.a - rf) * cpow(one - l, f.c - f.a - rf);
            for (j, b) in f.b.iter().enumerate() {
                v *= cpow(one - l * xi(j), -b);
            }
            v
        }
    })
}

/// `∏ φ(λ_i)`; see [`eigen_factor`].
pub fn eigen_integrand(f: &NamedFamily, eigenvalues: &[Cplx]) -> Result<Cplx, IntegrandError> {
    let mut v = Cplx::new(1.0, 0.0);
    for &l in eigenvalues {
        v *= eigen_factor(f, l)?;
    }
    Ok(v)
}

/// How the chart coordinate `u` of a normal form relates to the family's `U`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChartMap {
    /// `U = u`, `X = x`.
    Identity,
    /// `U = -u`, `X = -x`.
    Negate,
}

impl ChartMap {
    pub fn apply(&self, u: &CMatrix) -> CMatrix {
        match self {
            ChartMap::Identity => u.clone(),
            ChartMap::Negate => -u,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DictionaryEntry {
    /// 1-based flat index of the weight.
    pub alpha: usize,
    pub expression: String,
    pub value: Cplx,
}

/// A named family together with the weight dictionary that produced it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyCorrespondence {
    pub family: NamedFamily,
    pub dictionary: Vec<DictionaryEntry>,
    pub chart_map: ChartMap,
}

impl FamilyCorrespondence {
    /// The named integrand at the `U` corresponding to chart coordinate `u`.
    pub fn integrand_at_chart(&self, u: &CMatrix) -> Result<Cplx, IntegrandError> {
        named_integrand(&self.family, &self.chart_map.apply(u))
    }
}

fn pin(flat: &[Cplx], index: usize, expected: f64) -> Result<(), IntegrandError> {
    let found = flat[index - 1];
    let expected = Cplx::new(expected, 0.0);
    if (found - expected).norm() > PIN_TOL {
        return Err(IntegrandError::UnpinnedAlpha { index, expected, found });
    }
    Ok(())
}

fn entry(alpha: usize, expression: &str, value: Cplx) -> DictionaryEntry {
    DictionaryEntry { alpha, expression: expression.into(), value }
}

/// The named family whose integrand equals the chart integrand of the `x_1`
/// normal form of `λ ⊢ 4`. Also covers `λ ⊢ 3` (beta_r, gamma_r with
/// `α_2 = -1`, gaussian_r with `α_2 = 0, α_3 = 1`) and `(1, ..., 1)` with
/// `n ≥ 5` (lauricella_fd).
pub fn family_of_normal_form(
    partition: &[usize],
    x: &[CMatrix],
    pw: &PartitionWeight,
) -> Result<FamilyCorrespondence, IntegrandError> {
    if pw.partition() != partition {
        return Err(IntegrandError::ShapeMismatch("weight is for a different partition".into()));
    }
    let r = pw.r();
    let rf = r as f64;
    let flat = pw.flat_alpha();
    let need = |k: usize| {
        if x.len() == k {
            Ok(())
        } else {
            Err(IntegrandError::ShapeMismatch(format!("expected {k} normal-form parameters, got {}", x.len())))
        }
    };
    let a = |i: usize| flat[i - 1];
    let (family, dictionary, chart_map) = match partition {
        [1, 1, 1] => {
            need(0)?;
            let fam = NamedFamily::beta_r(r, a(2) + rf, a(3) + rf)?;
            (fam, vec![entry(2, "a - r", a(2)), entry(3, "b - r", a(3))], ChartMap::Identity)
        }
        [2, 1] => {
            need(0)?;
            pin(&flat, 2, -1.0)?;
            let fam = NamedFamily::gamma_r(r, a(3) + rf)?;
            (fam, vec![entry(2, "-1", a(2)), entry(3, "a - r", a(3))], ChartMap::Identity)
        }
        [3] => {
            need(0)?;
            pin(&flat, 2, 0.0)?;
            pin(&flat, 3, 1.0)?;
            let fam = NamedFamily::gaussian_r(r)?;
            (fam, vec![entry(2, "0", a(2)), entry(3, "1", a(3))], ChartMap::Identity)
        }
        [1, 1, 1, 1] => {
            need(1)?;
            let av = a(2) + rf;
            let cv = a(3) + av + rf;
            let bv = -a(4);
            let fam = NamedFamily::gauss(r, av, bv, cv, x[0].clone())?;
            let dict = vec![entry(2, "a - r", a(2)), entry(3, "c - a - r", a(3)), entry(4, "-b", a(4))];
            (fam, dict, ChartMap::Identity)
        }
        [2, 1, 1] => {
            need(1)?;
            pin(&flat, 2, 1.0)?;
            let av = a(3) + rf;
            let cv = a(4) + av + rf;
            let fam = NamedFamily::kummer(r, av, cv, x[0].clone())?;
            let dict = vec![entry(2, "1", a(2)), entry(3, "a - r", a(3)), entry(4, "c - a - r", a(4))];
            (fam, dict, ChartMap::Identity)
        }
        [2, 2] => {
            need(1)?;
            pin(&flat, 2, 1.0)?;
            pin(&flat, 4, -1.0)?;
            let fam = NamedFamily::bessel(r, a(3) + rf, x[0].clone())?;
            let dict = vec![entry(2, "1", a(2)), entry(3, "c - r", a(3)), entry(4, "-1", a(4))];
            (fam, dict, ChartMap::Identity)
        }
        [3, 1] => {
            need(1)?;
            pin(&flat, 2, 0.0)?;
            pin(&flat, 3, 1.0)?;
            let fam = NamedFamily::hermite_weber(r, -a(4) - rf, x[0].clone())?;
            let dict = vec![entry(2, "0", a(2)), entry(3, "1", a(3)), entry(4, "-c - r", a(4))];
            (fam, dict, ChartMap::Identity)
        }
        [4] => {
            need(1)?;
            pin(&flat, 2, 0.0)?;
            pin(&flat, 3, 0.0)?;
            pin(&flat, 4, 1.0)?;
            let fam = NamedFamily::airy(r, -&x[0])?;
            let dict = vec![entry(2, "0", a(2)), entry(3, "0", a(3)), entry(4, "1", a(4))];
            (fam, dict, ChartMap::Negate)
        }
        p if p.len() >= 5 && p.iter().all(|&k| k == 1) => {
            need(p.len() - 3)?;
            let av = a(2) + rf;
            let cv = a(3) + av + rf;
            let bs: Vec<Cplx> = (4..=p.len()).map(|j| -a(j)).collect();
            let fam = NamedFamily::lauricella_fd(r, av, bs, cv, x.to_vec())?;
            let mut dict = vec![entry(2, "a - r", a(2)), entry(3, "c - a - r", a(3))];
            for j in 4..=p.len() {
                dict.push(DictionaryEntry { alpha: j, expression: format!("-b_{j}"), value: a(j) });
            }
            (fam, dict, ChartMap::Identity)
        }
        other => return Err(IntegrandError::UnsupportedPartition(other.to_vec())),
    };
    Ok(FamilyCorrespondence { family, dictionary, chart_map })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::characters::{chi_lambda, Validation};
    use crate::normal_form::{table_form, FormId};
    use crate::numeric::{haar_unitary, RandomStream};

    fn c(x: f64) -> Cplx {
        Cplx::new(x, 0.0)
    }

    /// `tail` is `(α_2, ..., α_n)`.
    fn spec(partition: &[usize], variant: usize, x: &[CMatrix], tail: &[f64], r: usize) -> IntegrandSpec {
        let form = FormId { partition: partition.to_vec(), variant };
        let z = table_form(&form, x, r).unwrap();
        let tail: Vec<Cplx> = tail.iter().map(|&v| c(v)).collect();
        let pw = PartitionWeight::with_leading_fixed(partition.to_vec(), &tail, 2 * r, r, Validation::Relaxed).unwrap();
        IntegrandSpec::new(pw, CoordMatrix::new(z, r, partition.to_vec()).unwrap()).unwrap()
    }

    fn scalar(x: f64) -> CMatrix {
        CMatrix::scalar(1, c(x))
    }

    /// Hermitian matrix with eigenvalues drawn from `(lo, hi)`.
    fn random_in(r: usize, lo: f64, hi: f64, s: &mut RandomStream) -> CMatrix {
        let v = haar_unitary(r, s);
        let d: Vec<f64> = (0..r).map(|_| s.uniform_in(lo, hi)).collect();
        &(&v * &CMatrix::real_diag(&d)) * &v.adjoint()
    }

    #[test]
    fn two_one_table_form() {
        let a3 = 1.5;
        let sp = spec(&[2, 1], 0, &[], &[-1.0, a3], 1);
        for u in [0.3, 1.7, 4.0] {
            let v = sp.evaluate_scalar(c(u)).unwrap();
            assert!((v - c((-u).exp() * u.powf(a3))).norm() < 1e-14);
        }
    }

    #[test]
    fn three_table_form() {
        let sp = spec(&[3], 0, &[], &[0.0, 1.0], 1);
        for u in [-1.2, 0.4, 2.5] {
            let v = sp.evaluate_scalar(c(u)).unwrap();
            assert!((v - c((-0.5 * u * u).exp())).norm() < 1e-14);
        }
        let mut s = RandomStream::new(3);
        let sp = spec(&[3], 0, &[], &[0.0, 1.0], 2);
        for _ in 0..5 {
            let u = s.hermitian(2);
            let v = sp.evaluate(&ChartPoint::new(u.clone())).unwrap();
            assert!((v - etr(&(&u * &u).scale(&c(-0.5)))).norm() < 1e-12);
        }
    }

    #[test]
    fn gauss_scalar_form() {
        let (a, b, cc, x, u) = (1.7, 0.6, 3.2, 0.3, 0.2);
        let sp = spec(&[1, 1, 1, 1], 1, &[scalar(x)], &[a - 1.0, cc - a - 1.0, -b], 1);
        let v = sp.evaluate_scalar(c(u)).unwrap();
        let direct = u.powf(a - 1.0) * (1.0 - u).powf(cc - a - 1.0) * (1.0 - u * x).powf(-b);
        assert!((v - c(direct)).norm() < 1e-14);
    }

    #[test]
    fn split_recombines_to_character() {
        let mut s = RandomStream::new(8);
        let cases: [(&[usize], usize, [f64; 3]); 4] = [
            (&[2, 1, 1], 1, [0.8, 0.4, -0.7]),
            (&[2, 2], 2, [0.5, -1.7, 0.9]),
            (&[3, 1], 1, [0.2, 0.7, -1.4]),
            (&[4], 1, [0.3, -0.2, 0.6]),
        ];
        for r in 1..=2 {
            for (p, v, tail) in cases.iter() {
                let x = vec![s.complex_matrix(r, r, -0.5, 0.5)];
                let sp = spec(p, *v, &x, tail, r);
                let u = CMatrix::identity(r).scale(&c(0.5));
                let u = &u + &s.complex_matrix(r, r, -0.2, 0.2);
                let split = sp.split(&ChartPoint::new(u.clone())).unwrap();
                let tz = &ChartPoint::new(u).ubar() * sp.coords().matrix();
                let h = GroupElement::from_matrix(&tz, p).unwrap();
                let chi = chi_lambda(&h, sp.weight()).unwrap();
                assert!((split.value() - chi).norm() <= 1e-13 * chi.norm().max(1.0));
            }
        }
    }

    #[test]
    fn branch_locus_is_an_error() {
        let sp = spec(&[1, 1, 1], 0, &[], &[-0.2, -0.3], 1);
        assert!(matches!(sp.evaluate_scalar(c(0.0)), Err(IntegrandError::OnBranchLocus { block: 1, .. })));
        assert!(matches!(sp.evaluate_scalar(c(1.0)), Err(IntegrandError::OnBranchLocus { block: 2, .. })));
    }

    #[test]
    fn homogeneity_in_the_frame() {
        let mut s = RandomStream::new(12);
        for r in 1..=2 {
            let x = vec![s.complex_matrix(r, r, -0.4, 0.4)];
            let sp = spec(&[1, 1, 1, 1], 1, &x, &[0.35, -0.45, -0.6], r);
            for _ in 0..5 {
                let u = random_in(r, 0.1, 0.9, &mut s);
                let t = ChartPoint::new(u).ubar();
                let g = s.positive_definite(r, 0.5);
                let det = g.det().unwrap();
                let base = sp.evaluate_frame(&t).unwrap();
                let moved = sp.evaluate_frame(&(&g * &t)).unwrap();
                let expect = base * cpow(det, c(-(2.0 * r as f64)));
                assert!((moved - expect).norm() <= 1e-10 * expect.norm());
            }
        }
    }

    #[test]
    fn named_integrand_examples() {
        let mut s = RandomStream::new(4);
        let u = random_in(2, 0.1, 0.9, &mut s);
        let g = NamedFamily::gauss(2, c(2.5), c(0.7), c(5.1), CMatrix::zeros(2, 2)).unwrap();
        let b = NamedFamily::beta_r(2, c(2.5), c(2.6)).unwrap();
        assert!((named_integrand(&g, &u).unwrap() - named_integrand(&b, &u).unwrap()).norm() < 1e-14);
        let gam = NamedFamily::gamma_r(1, c(2.5)).unwrap();
        let v = named_integrand(&gam, &scalar(1.3)).unwrap();
        assert!((v - c((-1.3f64).exp() * 1.3f64.powf(1.5))).norm() < 1e-15);
        let airy = NamedFamily::airy(1, scalar(0.7)).unwrap();
        let v = named_integrand(&airy, &scalar(-1.1)).unwrap();
        assert!((v - c((0.7 * -1.1 + 1.1f64.powi(3) / 3.0).exp())).norm() < 1e-14);
        assert!(matches!(named_integrand(&g, &scalar(0.5)), Err(IntegrandError::ShapeMismatch(_))));
        let outside = CMatrix::real_diag(&[0.5, 1.5]);
        assert!(matches!(named_integrand(&g, &outside), Err(IntegrandError::OutOfDomain { .. })));
        assert!(NamedFamily::gamma_r(2, c(0.9)).is_err());
    }

    #[test]
    fn eigen_factor_matches_matrix_form() {
        let mut s = RandomStream::new(77);
        let fams = [
            NamedFamily::gauss(2, c(2.3), c(0.8), c(4.9), CMatrix::scalar(2, c(0.4))).unwrap(),
            NamedFamily::kummer(2, c(2.3), c(4.9), CMatrix::scalar(2, c(-0.7))).unwrap(),
            NamedFamily::bessel(2, c(2.6), CMatrix::scalar(2, c(-0.3))).unwrap(),
            NamedFamily::gamma_r(2, c(2.2)).unwrap(),
            NamedFamily::gaussian_r(2).unwrap(),
        ];
        for f in &fams {
            let (lo, hi) = match f.tag.domain() {
                Domain::UnitInterval => (0.05, 0.95),
                Domain::HalfLine => (0.2, 3.0),
                Domain::Line => (-2.0, 2.0),
            };
            let v = haar_unitary(2, &mut s);
            let l = [s.uniform_in(lo, hi), s.uniform_in(lo, hi)];
            let u = &(&v * &CMatrix::real_diag(&l)) * &v.adjoint();
            let m = named_integrand(f, &u).unwrap();
            let e = eigen_integrand(f, &[c(l[0]), c(l[1])]).unwrap();
            assert!((m - e).norm() <= 1e-12 * e.norm(), "{}", f.tag);
        }
        let g = NamedFamily::gauss(2, c(2.3), c(0.8), c(4.9), CMatrix::real_diag(&[0.1, 0.2])).unwrap();
        assert!(eigen_factor(&g, c(0.5)).is_err());
    }

    #[test]
    fn dictionary_tags() {
        let x = vec![scalar(0.3)];
        let pw = |p: Vec<usize>, f: &[f64]| {
            let f: Vec<Cplx> = f.iter().map(|&v| c(v)).collect();
            PartitionWeight::from_flat(p, &f, 2, 1, Validation::Relaxed).unwrap()
        };
        let gauss = family_of_normal_form(&[1, 1, 1, 1], &x, &pw(vec![1, 1, 1, 1], &[-1.6, 0.3, 0.1, -0.8])).unwrap();
        assert_eq!(gauss.family.tag, FamilyTag::Gauss);
        assert!((gauss.family.a - c(1.3)).norm() < 1e-15 && (gauss.family.c - c(2.4)).norm() < 1e-15);
        let airy = family_of_normal_form(&[4], &x, &pw(vec![4], &[-2.0, 0.0, 0.0, 1.0])).unwrap();
        assert_eq!((airy.family.tag, airy.chart_map), (FamilyTag::Airy, ChartMap::Negate));
        let err = family_of_normal_form(&[4], &x, &pw(vec![4], &[-2.0, 0.5, 0.0, 1.0])).unwrap_err();
        assert!(matches!(err, IntegrandError::UnpinnedAlpha { index: 2, .. }));
        let gamma = family_of_normal_form(&[2, 1], &[], &pw(vec![2, 1], &[-3.5, -1.0, 1.5])).unwrap();
        assert_eq!(gamma.family.tag, FamilyTag::GammaR);
        assert!((gamma.family.a - c(2.5)).norm() < 1e-15);
        let err = family_of_normal_form(&[2, 1], &[], &pw(vec![2, 1], &[-1.5, 1.0, -0.5])).unwrap_err();
        assert!(matches!(err, IntegrandError::UnpinnedAlpha { index: 2, .. }));
        let err = family_of_normal_form(&[1, 1], &[], &pw(vec![1, 1], &[-1.5, -0.5])).unwrap_err();
        assert!(matches!(err, IntegrandError::UnsupportedPartition(_)));
    }

    #[test]
    fn family_correspondence_pointwise() {
        let mut s = RandomStream::new(2024);
        for r in 1..=2 {
            let cases: [(&[usize], [f64; 3]); 5] = [
                (&[1, 1, 1, 1], [0.4, 0.2, -0.7]),
                (&[2, 1, 1], [1.0, 0.35, 0.3]),
                (&[2, 2], [1.0, 0.6, -1.0]),
                (&[3, 1], [0.0, 1.0, -1.2]),
                (&[4], [0.0, 0.0, 1.0]),
            ];
            for (p, tail) in cases {
                let x = vec![s.complex_matrix(r, r, -0.4, 0.4)];
                let sp = spec(p, 1, &x, &tail, r);
                let corr = family_of_normal_form(p, &x, sp.weight()).unwrap();
                for _ in 0..20 {
                    let u = match corr.family.tag.domain() {
                        Domain::UnitInterval => random_in(r, 0.05, 0.95, &mut s),
                        Domain::HalfLine => random_in(r, 0.1, 3.0, &mut s),
                        Domain::Line => random_in(r, -2.0, 2.0, &mut s),
                    };
                    let chart = sp.evaluate(&ChartPoint::new(u.clone())).unwrap();
                    let named = corr.integrand_at_chart(&u).unwrap();
                    assert!((chart - named).norm() <= 1e-12 * named.norm().max(1.0), "{p:?} r={r}: {chart} vs {named}");
                }
            }
        }
    }
}
