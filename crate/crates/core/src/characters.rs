//! Characters of `GL(r)^n`, the Jordan group `J_r(p)` and `H_λ`, and the
//! weight data that parametrizes them.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::jordan::{theta_traces, CTruncPoly, JordanError, TruncPoly};
use crate::numeric::scalar::{cpow, on_negative_real_axis};
use crate::numeric::{CMatrix, Cplx};

#[derive(Clone, Debug, PartialEq, Error)]
pub enum CharacterError {
    #[error("invalid partition {0:?}: parts must be positive and nonincreasing")]
    InvalidPartition(Vec<usize>),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("weight violates the sum condition: Σ α_0 = {sum}, expected -{m}")]
    AlphaSum { sum: Cplx, m: usize },
    #[error("α_0 of block {block} is an integer ({value})")]
    IntegerAlphaZero { block: usize, value: Cplx },
    #[error("top weight of block {block} vanishes")]
    VanishingTopWeight { block: usize },
    #[error("block {block} has a singular leading coefficient")]
    SingularBlock { block: usize },
    #[error(transparent)]
    Jordan(#[from] JordanError),
}

/// Whether all three weight conditions are enforced, or only the sum rule.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Validation {
    #[default]
    Strict,
    Relaxed,
}

pub const ALPHA_SUM_TOL: f64 = 1e-12;
pub const INTEGER_DISTANCE_TOL: f64 = 1e-9;

/// Checks that `parts` is a partition (positive, nonincreasing).
pub fn check_partition(parts: &[usize]) -> Result<(), CharacterError> {
    if parts.is_empty() || parts.contains(&0) || parts.windows(2).any(|w| w[0] < w[1]) {
        return Err(CharacterError::InvalidPartition(parts.to_vec()));
    }
    Ok(())
}

/// All partitions of `n`, largest parts first, in reverse lexicographic order.
pub fn partitions(n: usize) -> Vec<Vec<usize>> {
    fn go(n: usize, max: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if n == 0 {
            out.push(prefix.clone());
            return;
        }
        for k in (1..=max.min(n)).rev() {
            prefix.push(k);
            go(n - k, k, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    go(n, n, &mut Vec::new(), &mut out);
    out
}

/// A partition `λ = (n_1, ..., n_ℓ)` of `n` together with a weight
/// `α^{(k)} = (α_0^{(k)}, ..., α_{n_k-1}^{(k)})` for each block.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionWeight {
    partition: Vec<usize>,
    alpha: Vec<Vec<Cplx>>,
    m: usize,
    r: usize,
    validation: Validation,
}

impl PartitionWeight {
    pub fn new(
        partition: Vec<usize>,
        alpha: Vec<Vec<Cplx>>,
        m: usize,
        r: usize,
        validation: Validation,
    ) -> Result<Self, CharacterError> {
        check_partition(&partition)?;
        if alpha.len() != partition.len() || alpha.iter().zip(&partition).any(|(a, &n)| a.len() != n) {
            return Err(CharacterError::ShapeMismatch(format!(
                "weight blocks {:?} do not fit partition {:?}",
                alpha.iter().map(Vec::len).collect::<Vec<_>>(),
                partition
            )));
        }
        if r == 0 || m == 0 {
            return Err(CharacterError::ShapeMismatch("r and m must be positive".into()));
        }
        let pw = PartitionWeight { partition, alpha, m, r, validation };
        pw.validate()?;
        Ok(pw)
    }

    /// Splits a flat weight `(α_1, ..., α_n)` into blocks along the partition.
    pub fn from_flat(
        partition: Vec<usize>,
        flat: &[Cplx],
        m: usize,
        r: usize,
        validation: Validation,
    ) -> Result<Self, CharacterError> {
        check_partition(&partition)?;
        let n: usize = partition.iter().sum();
        if flat.len() != n {
            return Err(CharacterError::ShapeMismatch(format!("expected {n} weights, got {}", flat.len())));
        }
        let mut blocks = Vec::with_capacity(partition.len());
        let mut at = 0;
        for &nk in &partition {
            blocks.push(flat[at..at + nk].to_vec());
            at += nk;
        }
        Self::new(partition, blocks, m, r, validation)
    }

    /// Flat weight from `(α_2, ..., α_n)`, with `α_1` fixed by `Σ α_0 = -m`.
    pub fn with_leading_fixed(
        partition: Vec<usize>,
        tail: &[Cplx],
        m: usize,
        r: usize,
        validation: Validation,
    ) -> Result<Self, CharacterError> {
        check_partition(&partition)?;
        let n: usize = partition.iter().sum();
        if tail.len() + 1 != n {
            return Err(CharacterError::ShapeMismatch(format!("expected {} weights, got {}", n - 1, tail.len())));
        }
        let mut flat = Vec::with_capacity(n);
        flat.push(Cplx::new(0.0, 0.0));
        flat.extend_from_slice(tail);
        let mut others = Cplx::new(0.0, 0.0);
        let mut at = partition[0];
        for &nk in &partition[1..] {
            others += flat[at];
            at += nk;
        }
        flat[0] = Cplx::new(-(m as f64), 0.0) - others;
        Self::from_flat(partition, &flat, m, r, validation)
    }

    fn validate(&self) -> Result<(), CharacterError> {
        let sum = self.alpha0_sum();
        let target = -(self.m as f64);
        if (sum - Cplx::new(target, 0.0)).norm() > ALPHA_SUM_TOL * (self.m as f64).max(1.0) {
            return Err(CharacterError::AlphaSum { sum, m: self.m });
        }
        if self.validation == Validation::Relaxed {
            return Ok(());
        }
        for (k, a) in self.alpha.iter().enumerate() {
            let a0 = a[0];
            if a0.im.abs() <= INTEGER_DISTANCE_TOL && (a0.re - a0.re.round()).abs() <= INTEGER_DISTANCE_TOL {
                return Err(CharacterError::IntegerAlphaZero { block: k, value: a0 });
            }
            if a.len() >= 2 && a[a.len() - 1].norm() == 0.0 {
                return Err(CharacterError::VanishingTopWeight { block: k });
            }
        }
        Ok(())
    }

    pub fn partition(&self) -> &[usize] {
        &self.partition
    }

    pub fn n(&self) -> usize {
        self.partition.iter().sum()
    }

    pub fn ell(&self) -> usize {
        self.partition.len()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn validation(&self) -> Validation {
        self.validation
    }

    pub fn alpha(&self, block: usize) -> &[Cplx] {
        &self.alpha[block]
    }

    pub fn alpha_blocks(&self) -> &[Vec<Cplx>] {
        &self.alpha
    }

    pub fn flat_alpha(&self) -> Vec<Cplx> {
        self.alpha.iter().flatten().copied().collect()
    }

    pub fn alpha0_sum(&self) -> Cplx {
        self.alpha.iter().map(|a| a[0]).sum()
    }

    /// Column offset (in units of `r`) of the first column of each block.
    pub fn block_offsets(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.ell());
        let mut at = 0;
        for &nk in &self.partition {
            out.push(at);
            at += nk;
        }
        out
    }
}

/// An element of `H_λ = J_r(n_1) × ... × J_r(n_ℓ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupElement {
    blocks: Vec<CTruncPoly>,
}

impl GroupElement {
    pub fn new(blocks: Vec<CTruncPoly>) -> Result<Self, CharacterError> {
        let r = blocks.first().map(|b| b.r()).ok_or_else(|| CharacterError::ShapeMismatch("no blocks".into()))?;
        if blocks.iter().any(|b| b.r() != r) {
            return Err(CharacterError::ShapeMismatch("blocks of different size r".into()));
        }
        Ok(GroupElement { blocks })
    }

    pub fn identity(r: usize, partition: &[usize]) -> Self {
        GroupElement { blocks: partition.iter().map(|&p| TruncPoly::unit(r, p)).collect() }
    }

    /// Splits an `r × nr` matrix `(h_0^{(1)}, ..., h_{n_1-1}^{(1)}, h_0^{(2)}, ...)` into blocks.
    pub fn from_matrix(mat: &CMatrix, partition: &[usize]) -> Result<Self, CharacterError> {
        check_partition(partition)?;
        let r = mat.rows();
        let n: usize = partition.iter().sum();
        if mat.cols() != n * r {
            return Err(CharacterError::ShapeMismatch(format!("expected {} columns, got {}", n * r, mat.cols())));
        }
        let mut blocks = Vec::with_capacity(partition.len());
        let mut col = 0;
        for &nk in partition {
            let coeffs = (0..nk).map(|i| mat.block(0, (col + i) * r, r, r)).collect();
            blocks.push(TruncPoly::new(coeffs)?);
            col += nk;
        }
        Ok(GroupElement { blocks })
    }

    pub fn to_matrix(&self) -> CMatrix {
        let parts: Vec<&CMatrix> = self.blocks.iter().flat_map(|b| b.coeffs().iter()).collect();
        CMatrix::hcat(&parts).expect("blocks share r")
    }

    pub fn blocks(&self) -> &[CTruncPoly] {
        &self.blocks
    }

    pub fn r(&self) -> usize {
        self.blocks[0].r()
    }

    pub fn partition(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.p()).collect()
    }

    pub fn mul(&self, other: &Self) -> Result<Self, CharacterError> {
        if self.partition() != other.partition() {
            return Err(CharacterError::ShapeMismatch("elements of different H_λ".into()));
        }
        let blocks = self.blocks.iter().zip(&other.blocks).map(|(a, b)| a.trunc_mul(b)).collect::<Result<_, _>>()?;
        Ok(GroupElement { blocks })
    }

    pub fn inverse(&self) -> Result<Self, CharacterError> {
        let blocks = self.blocks.iter().map(|b| b.trunc_inverse()).collect::<Result<_, _>>()?;
        Ok(GroupElement { blocks })
    }

    /// Left multiplication of every coefficient by `g ∈ GL(r)`.
    pub fn left_mul(&self, g: &CMatrix) -> Self {
        GroupElement { blocks: self.blocks.iter().map(|b| b.left_mul(g)).collect() }
    }

    /// `exp` of a Lie-algebra element given in the same block layout.
    pub fn exp(direction: &GroupElement) -> Self {
        GroupElement { blocks: direction.blocks.iter().map(|b| b.exp_general()).collect() }
    }
}

fn det_checked(m: &CMatrix, block: usize) -> Result<Cplx, CharacterError> {
    let d = m.det().map_err(|_| CharacterError::ShapeMismatch("non-square block".into()))?;
    let scale = m.max_row_norm().powi(m.rows() as i32);
    if !(d.norm() > 1e-12 * scale) {
        return Err(CharacterError::SingularBlock { block });
    }
    Ok(d)
}

/// `∏ (det h_i)^{α_i}`, principal branch.
///
/// A determinant on the negative real axis is evaluated on the principal
/// branch anyway; [`branch_cut_blocks`] reports such blocks.
pub fn chi_nonconfluent(h: &[CMatrix], alpha: &[Cplx]) -> Result<Cplx, CharacterError> {
    if h.len() != alpha.len() {
        return Err(CharacterError::ShapeMismatch(format!("{} blocks but {} weights", h.len(), alpha.len())));
    }
    let mut out = Cplx::new(1.0, 0.0);
    for (i, (hi, &ai)) in h.iter().zip(alpha).enumerate() {
        out *= cpow(det_checked(hi, i)?, ai);
    }
    Ok(out)
}

/// Indices of blocks whose determinant lies on the principal branch cut.
pub fn branch_cut_blocks(h: &[CMatrix]) -> Vec<usize> {
    h.iter()
        .enumerate()
        .filter(|(_, m)| m.det().map(on_negative_real_axis).unwrap_or(false))
        .map(|(i, _)| i)
        .collect()
}

fn chi_jordan_block(h: &CTruncPoly, alpha: &[Cplx], block: usize) -> Result<Cplx, CharacterError> {
    if alpha.len() != h.p() {
        return Err(CharacterError::ShapeMismatch(format!("p = {} but {} weights", h.p(), alpha.len())));
    }
    let h0 = h.coeff(0);
    let d = det_checked(h0, block)?;
    let mut value = cpow(d, alpha[0]);
    if h.p() > 1 {
        let hat = h.unipotent_part().map_err(|_| CharacterError::SingularBlock { block })?;
        let hat = TruncPoly::unipotent(h.r(), &hat.coeffs()[1..])?;
        let traces = theta_traces(&hat)?;
        let exponent: Cplx = traces.iter().zip(&alpha[1..]).map(|(t, a)| t * a).sum();
        value *= exponent.exp();
    }
    Ok(value)
}

/// `(det h_0)^{α_0} exp(Σ_{i≥1} α_i Tr θ_i(h_0^{-1} h))`.
pub fn chi_jordan(h: &CTruncPoly, alpha: &[Cplx]) -> Result<Cplx, CharacterError> {
    chi_jordan_block(h, alpha, 0)
}

/// Product of [`chi_jordan`] over the blocks of `h`.
pub fn chi_lambda(h: &GroupElement, pw: &PartitionWeight) -> Result<Cplx, CharacterError> {
    if h.partition() != pw.partition() || h.r() != pw.r() {
        return Err(CharacterError::ShapeMismatch(format!(
            "element of type {:?} (r = {}) for weight of type {:?} (r = {})",
            h.partition(),
            h.r(),
            pw.partition(),
            pw.r()
        )));
    }
    let mut out = Cplx::new(1.0, 0.0);
    for (k, b) in h.blocks().iter().enumerate() {
        out *= chi_jordan_block(b, pw.alpha(k), k)?;
    }
    Ok(out)
}

/// Differential of `χ_λ` at the identity in the direction `e` of the Lie algebra:
/// `Σ_j (α_0^{(j)} Tr e_0^{(j)} + Σ_{k≥1} α_k^{(j)} Tr e_k^{(j)})`.
pub fn chi_differential(e: &GroupElement, pw: &PartitionWeight) -> Result<Cplx, CharacterError> {
    if e.partition() != pw.partition() {
        return Err(CharacterError::ShapeMismatch("direction and weight have different types".into()));
    }
    let mut out = Cplx::new(0.0, 0.0);
    for (j, b) in e.blocks().iter().enumerate() {
        for (k, c) in b.coeffs().iter().enumerate() {
            out += pw.alpha(j)[k] * c.trace();
        }
    }
    Ok(out)
}
