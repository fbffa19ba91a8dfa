//! Homogeneous coordinates on Grassmannians: coordinate matrices with a
//! block structure, Plücker coordinates, the chart `ū = (1_r, u)`, the
//! density factor `τ`, and the open sets `Z` and `Z_λ`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::characters::{check_partition, CharacterError, GroupElement};
use crate::numeric::scalar::cpow;
use crate::numeric::{CMatrix, Cplx};

pub const RANK_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Error)]
pub enum GrassmannError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("coordinate matrix does not have full rank {0}")]
    RankDeficient(usize),
    #[error("bad index set {0:?}")]
    BadIndexSet(Vec<usize>),
    #[error("frame t' is singular")]
    SingularFrame,
    #[error(transparent)]
    Character(#[from] CharacterError),
}

/// Rank by Gaussian elimination with complete pivoting; pivots at or below
/// `rel_tol · max|a_ij|` count as zero.
pub fn numerical_rank(a: &CMatrix, rel_tol: f64) -> usize {
    let (m, n) = a.shape();
    let scale = a.max_abs();
    if scale == 0.0 {
        return 0;
    }
    let mut w: Vec<Cplx> = a.data().to_vec();
    let mut rank = 0;
    let mut row = 0;
    let mut cols: Vec<usize> = (0..n).collect();
    while row < m && rank < n {
        let mut best = (row, rank, 0.0);
        for i in row..m {
            for (jj, &j) in cols.iter().enumerate().skip(rank) {
                let v = w[i * n + j].norm();
                if v > best.2 {
                    best = (i, jj, v);
                }
            }
        }
        if best.2 <= rel_tol * scale {
            break;
        }
        let (pi, pj) = (best.0, best.1);
        for j in 0..n {
            w.swap(row * n + j, pi * n + j);
        }
        cols.swap(rank, pj);
        let pc = cols[rank];
        let pivot = w[row * n + pc];
        for i in row + 1..m {
            let f = w[i * n + pc] / pivot;
            for j in 0..n {
                let v = w[row * n + j];
                w[i * n + j] -= f * v;
            }
        }
        row += 1;
        rank += 1;
    }
    rank
}

/// A full-rank `m × N` matrix `z = (z^{(1)}, ..., z^{(ℓ)})`, `N = r·|λ|`, whose
/// `j`-th block is `z^{(j)} = (z_0^{(j)}, ..., z_{n_j-1}^{(j)})` with `m × r` pieces.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoordMatrix {
    z: CMatrix,
    r: usize,
    partition: Vec<usize>,
}

impl CoordMatrix {
    pub fn new(z: CMatrix, r: usize, partition: Vec<usize>) -> Result<Self, GrassmannError> {
        check_partition(&partition)?;
        let n: usize = partition.iter().sum();
        if r == 0 || z.cols() != n * r {
            return Err(GrassmannError::ShapeMismatch(format!(
                "z has {} columns, expected r·n = {}·{}",
                z.cols(),
                r,
                n
            )));
        }
        if !z.all_finite() {
            return Err(GrassmannError::ShapeMismatch("non-finite entries".into()));
        }
        if z.rows() > z.cols() || numerical_rank(&z, RANK_TOL) < z.rows() {
            return Err(GrassmannError::RankDeficient(z.rows()));
        }
        Ok(CoordMatrix { z, r, partition })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.z
    }

    pub fn m(&self) -> usize {
        self.z.rows()
    }

    pub fn big_n(&self) -> usize {
        self.z.cols()
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn partition(&self) -> &[usize] {
        &self.partition
    }

    /// Block-column index of `z_q^{(j)}` (both 0-based).
    pub fn block_index(&self, j: usize, q: usize) -> usize {
        self.partition[..j].iter().sum::<usize>() + q
    }

    /// The `m × r` piece `z_q^{(j)}`.
    pub fn block(&self, j: usize, q: usize) -> CMatrix {
        assert!(q < self.partition[j], "block depth out of range");
        self.z.block(0, self.block_index(j, q) * self.r, self.m(), self.r)
    }

    pub fn with_matrix(&self, z: CMatrix) -> Result<Self, GrassmannError> {
        Self::new(z, self.r, self.partition.clone())
    }

    /// `g · z` for `g ∈ GL(m)`.
    pub fn left_act(&self, g: &CMatrix) -> Result<Self, GrassmannError> {
        let z = g.try_mul(&self.z).map_err(|e| GrassmannError::ShapeMismatch(e.to_string()))?;
        self.with_matrix(z)
    }

    /// `z · h` for `h ∈ H_λ`: `(z h)_q^{(j)} = Σ_{i+k=q} z_i^{(j)} h_k^{(j)}`.
    pub fn right_act(&self, h: &GroupElement) -> Result<Self, GrassmannError> {
        self.with_matrix(right_act_matrix(&self.z, self.r, &self.partition, h)?)
    }
}

/// The right `H_λ` action on any matrix with `r·|λ|` columns.
pub fn right_act_matrix(
    z: &CMatrix,
    r: usize,
    partition: &[usize],
    h: &GroupElement,
) -> Result<CMatrix, GrassmannError> {
    if h.partition() != partition || h.r() != r {
        return Err(GrassmannError::ShapeMismatch("group element does not match the block structure".into()));
    }
    let rows = z.rows();
    let mut out = CMatrix::zeros(rows, z.cols());
    let mut offset = 0;
    for (j, &nj) in partition.iter().enumerate() {
        let hb = &h.blocks()[j];
        for q in 0..nj {
            let mut acc = CMatrix::zeros(rows, r);
            for i in 0..=q {
                let zi = z.block(0, (offset + i) * r, rows, r);
                acc = &acc + &(&zi * hb.coeff(q - i));
            }
            out.set_block(0, (offset + q) * r, &acc);
        }
        offset += nj;
    }
    Ok(out)
}

/// Affine coordinates `u` on the chart `det t' ≠ 0` of `Gr(r, m)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChartPoint {
    pub u: CMatrix,
}

impl ChartPoint {
    pub fn new(u: CMatrix) -> Self {
        ChartPoint { u }
    }

    /// Chart point of the frame `t = (t', t'')`: `u = (t')^{-1} t''`.
    pub fn from_frame(t: &CMatrix) -> Result<Self, GrassmannError> {
        let r = t.rows();
        if t.cols() < r {
            return Err(GrassmannError::ShapeMismatch("frame has fewer columns than rows".into()));
        }
        let tp = t.block(0, 0, r, r);
        let tpp = t.block(0, r, r, t.cols() - r);
        let inv = tp.inverse().map_err(|_| GrassmannError::SingularFrame)?;
        Ok(ChartPoint { u: &inv * &tpp })
    }

    pub fn r(&self) -> usize {
        self.u.rows()
    }

    pub fn m(&self) -> usize {
        self.u.rows() + self.u.cols()
    }

    /// `ū = (1_r, u)`.
    pub fn ubar(&self) -> CMatrix {
        CMatrix::hcat(&[&CMatrix::identity(self.r()), &self.u]).expect("same row count")
    }
}

/// `p_J(t) = det(t_{j_1}, ..., t_{j_r})`, with 1-based strictly increasing `J`.
pub fn plucker(t: &CMatrix, j: &[usize]) -> Result<Cplx, GrassmannError> {
    let r = t.rows();
    let ok = j.len() == r && j.iter().all(|&x| x >= 1 && x <= t.cols()) && j.windows(2).all(|w| w[0] < w[1]);
    if !ok {
        return Err(GrassmannError::BadIndexSet(j.to_vec()));
    }
    let cols: Vec<usize> = j.iter().map(|&x| x - 1).collect();
    Ok(t.select_columns(&cols).det().expect("square selection"))
}

/// `(det t')^m`.
pub fn tau_factor(t_prime: &CMatrix, m: usize) -> Result<Cplx, GrassmannError> {
    let d = t_prime.det().map_err(|e| GrassmannError::ShapeMismatch(e.to_string()))?;
    let scale = t_prime.max_row_norm().powi(t_prime.rows() as i32);
    if !(d.norm() > 1e-12 * scale) {
        return Err(GrassmannError::SingularFrame);
    }
    Ok(cpow(d, Cplx::new(m as f64, 0.0)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "kebab-case")]
pub enum MuShape {
    /// `m_i = m_j = 1` for two blocks `i < j`.
    TwoDistinctBlocks { i: usize, j: usize },
    /// `m_k = 2` for a block with `n_k ≥ 2`.
    OneBlockDepthTwo { k: usize },
}

/// A weight-2 subdiagram `μ ⊂ λ`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubdiagramMu {
    pub mu: Vec<usize>,
    pub shape: MuShape,
}

pub fn subdiagrams(partition: &[usize]) -> Vec<SubdiagramMu> {
    let ell = partition.len();
    let mut out = Vec::new();
    for i in 0..ell {
        for j in i + 1..ell {
            let mut mu = vec![0; ell];
            mu[i] = 1;
            mu[j] = 1;
            out.push(SubdiagramMu { mu, shape: MuShape::TwoDistinctBlocks { i, j } });
        }
    }
    for (k, &nk) in partition.iter().enumerate() {
        if nk >= 2 {
            let mut mu = vec![0; ell];
            mu[k] = 2;
            out.push(SubdiagramMu { mu, shape: MuShape::OneBlockDepthTwo { k } });
        }
    }
    out
}

/// `z_μ`: `(z_0^{(i)}, z_0^{(j)})` or `(z_0^{(k)}, z_1^{(k)})`.
pub fn z_mu(z: &CoordMatrix, mu: &SubdiagramMu) -> CMatrix {
    let (a, b) = match mu.shape {
        MuShape::TwoDistinctBlocks { i, j } => (z.block(i, 0), z.block(j, 0)),
        MuShape::OneBlockDepthTwo { k } => (z.block(k, 0), z.block(k, 1)),
    };
    CMatrix::hcat(&[&a, &b]).expect("same row count")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZMembership {
    pub member: bool,
    pub failing: Vec<SubdiagramMu>,
}

/// Whether `det z_μ ≠ 0` for every weight-2 subdiagram; lists the failures.
pub fn z_lambda_member(z: &CoordMatrix) -> Result<ZMembership, GrassmannError> {
    if z.m() != 2 * z.r() {
        return Err(GrassmannError::ShapeMismatch(format!("Z_λ needs m = 2r, got m = {}, r = {}", z.m(), z.r())));
    }
    let mut failing = Vec::new();
    for mu in subdiagrams(z.partition()) {
        let zm = z_mu(z, &mu);
        let d = zm.det().expect("square");
        let scale = zm.max_abs().powi(zm.rows() as i32);
        if !(d.norm() > RANK_TOL * scale) {
            failing.push(mu);
        }
    }
    Ok(ZMembership { member: failing.is_empty(), failing })
}

/// Whether every leading block `z_0^{(k)}` has rank `r`.
pub fn general_z_member(z: &CoordMatrix) -> bool {
    (0..z.partition().len()).all(|k| numerical_rank(&z.block(k, 0), RANK_TOL) == z.r())
}
