//! Reduction of `z ∈ Z_λ` (`m = 2r`) to the tabulated orbit representatives
//! under `GL(2r) × H_λ`.
//!
//! Every reduction first inverts a designated pair of `z_0`-blocks, then
//! solves for the remaining group coefficients block by block. No other
//! pivots are tried, so a degenerate input fails with the offending
//! subdiagram instead of being silently re-pivoted.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::characters::GroupElement;
use crate::grassmann::{z_lambda_member, CoordMatrix, GrassmannError, SubdiagramMu};
use crate::jordan::TruncPoly;
use crate::numeric::{CMatrix, Cplx};

pub const RESIDUAL_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Error)]
pub enum NormalFormError {
    #[error("z is not in Z_λ; failing subdiagrams: {0:?}")]
    NotInZLambda(Vec<SubdiagramMu>),
    #[error("unsupported partition {0:?} for this reduction")]
    UnsupportedPartition(Vec<usize>),
    #[error("no table form {variant} for partition {partition:?}")]
    UnknownVariant { partition: Vec<usize>, variant: usize },
    #[error("recovered parameters violate the nondegeneracy conditions: {0}")]
    DegenerateOrbit(String),
    #[error("reduction failed: a designated pivot block is singular")]
    SingularPivot,
    #[error("wrong number of x parameters: expected {expected}, got {found}")]
    ParameterCount { expected: usize, found: usize },
    #[error(transparent)]
    Grassmann(#[from] GrassmannError),
}

/// Which table entry a normal form is: the partition, and for `|λ| ≥ 4`
/// the column `x_1`, `x_2` or `x_3` (variant 0 for forms without parameters).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormId {
    pub partition: Vec<usize>,
    pub variant: usize,
}

impl fmt::Display for FormId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.partition.iter().map(|p| p.to_string()).collect();
        write!(f, "({})", parts.join(","))?;
        if self.variant > 0 {
            write!(f, "/x{}", self.variant)?;
        }
        Ok(())
    }
}

impl FormId {
    /// Number of `r × r` parameters the form carries.
    pub fn parameter_count(&self) -> usize {
        let n: usize = self.partition.iter().sum();
        if self.partition.iter().all(|&p| p == 1) {
            n.saturating_sub(3)
        } else if n == 4 {
            1
        } else {
            0
        }
    }

    /// Table variants available for a partition.
    pub fn variants(partition: &[usize]) -> Vec<usize> {
        match partition {
            [2, 1, 1] | [3, 1] => vec![1, 2, 3],
            [2, 2] => vec![1, 2],
            [4] => vec![1],
            p if p.len() >= 4 && p.iter().all(|&k| k == 1) => vec![1],
            _ => vec![0],
        }
    }
}

#[derive(Clone, Debug)]
pub struct NormalFormResult {
    pub g: CMatrix,
    pub h: GroupElement,
    pub x: Vec<CMatrix>,
    pub form_id: FormId,
    pub residual: f64,
}

impl NormalFormResult {
    /// The reduced coordinate matrix `g z h`.
    pub fn apply(&self, z: &CoordMatrix) -> Result<CoordMatrix, NormalFormError> {
        Ok(z.left_act(&self.g)?.right_act(&self.h)?)
    }
}

/// Entry `(row, col)` of a table, in units of `r × r` blocks.
enum Cell {
    Zero,
    One,
    MinusOne,
    X(usize),
    MinusX(usize),
}

fn table_cells(form: &FormId) -> Result<Vec<[Cell; 2]>, NormalFormError> {
    use Cell::*;
    let unknown = || NormalFormError::UnknownVariant { partition: form.partition.clone(), variant: form.variant };
    let cols = match (form.partition.as_slice(), form.variant) {
        ([1, 1, 1], 0) => vec![[One, Zero], [Zero, One], [One, MinusOne]],
        ([2, 1], 0) => vec![[One, Zero], [Zero, One], [Zero, One]],
        ([3], 0) => vec![[One, Zero], [Zero, One], [Zero, Zero]],
        ([2, 1, 1], 1) => vec![[One, Zero], [Zero, X(0)], [Zero, One], [One, MinusOne]],
        ([2, 1, 1], 2) => vec![[One, Zero], [Zero, One], [Zero, One], [One, MinusX(0)]],
        ([2, 1, 1], 3) => vec![[One, Zero], [Zero, One], [Zero, One], [X(0), MinusOne]],
        ([2, 2], 1) => vec![[One, Zero], [Zero, X(0)], [Zero, One], [One, Zero]],
        ([2, 2], 2) => vec![[One, Zero], [Zero, One], [Zero, One], [X(0), Zero]],
        ([3, 1], 1) => vec![[One, Zero], [Zero, One], [Zero, X(0)], [Zero, One]],
        ([3, 1], 2) => vec![[One, Zero], [X(0), MinusOne], [Zero, Zero], [Zero, One]],
        ([3, 1], 3) => vec![[One, Zero], [Zero, One], [Zero, Zero], [X(0), MinusOne]],
        ([4], 1) => vec![[One, Zero], [Zero, One], [Zero, Zero], [Zero, X(0)]],
        (p, v) if p.len() >= 3 && p.iter().all(|&k| k == 1) && (v == 1 || (v == 0 && p.len() == 3)) => {
            let mut cols = vec![[One, Zero], [Zero, One], [One, MinusOne]];
            for j in 0..p.len() - 3 {
                cols.push([One, MinusX(j)]);
            }
            cols
        }
        _ => return Err(unknown()),
    };
    Ok(cols)
}

/// The tabulated `2r × nr` matrix for `form` with parameters `x`.
pub fn table_form(form: &FormId, x: &[CMatrix], r: usize) -> Result<CMatrix, NormalFormError> {
    let cells = table_cells(form)?;
    let expected = form.parameter_count();
    if x.len() != expected {
        return Err(NormalFormError::ParameterCount { expected, found: x.len() });
    }
    let mut out = CMatrix::zeros(2 * r, cells.len() * r);
    let one = CMatrix::identity(r);
    for (c, col) in cells.iter().enumerate() {
        for (row, cell) in col.iter().enumerate() {
            let b = match cell {
                Cell::Zero => continue,
                Cell::One => one.clone(),
                Cell::MinusOne => -&one,
                Cell::X(i) => x[*i].clone(),
                Cell::MinusX(i) => -&x[*i],
            };
            out.set_block(row * r, c * r, &b);
        }
    }
    Ok(out)
}

fn inv(a: &CMatrix) -> Result<CMatrix, NormalFormError> {
    a.inverse().map_err(|_| NormalFormError::SingularPivot)
}

fn top(v: &CMatrix, r: usize) -> CMatrix {
    v.block(0, 0, r, r)
}

fn bottom(v: &CMatrix, r: usize) -> CMatrix {
    v.block(r, 0, r, r)
}

/// `[[a, b], [c, d]]` from `r × r` blocks.
fn blocks2(a: &CMatrix, b: &CMatrix, c: &CMatrix, d: &CMatrix) -> CMatrix {
    let r = a.rows();
    let mut out = CMatrix::zeros(2 * r, 2 * r);
    out.set_block(0, 0, a);
    out.set_block(0, r, b);
    out.set_block(r, 0, c);
    out.set_block(r, r, d);
    out
}

fn diag2(a: &CMatrix, d: &CMatrix) -> CMatrix {
    let z = CMatrix::zeros(a.rows(), a.rows());
    blocks2(a, &z, &z, d)
}

fn column(z: &CoordMatrix, c: usize) -> CMatrix {
    let r = z.r();
    z.matrix().block(0, c * r, z.m(), r)
}

/// `g_1 = (z_a, z_b)^{-1}` for block columns `a`, `b`.
fn pivot(z: &CoordMatrix, a: usize, b: usize) -> Result<CMatrix, NormalFormError> {
    inv(&CMatrix::hcat(&[&column(z, a), &column(z, b)]).expect("same rows"))
}

fn element(blocks: Vec<Vec<CMatrix>>) -> GroupElement {
    GroupElement::new(blocks.into_iter().map(|c| TruncPoly::new(c).expect("square blocks")).collect())
        .expect("same r")
}

fn require_member(z: &CoordMatrix) -> Result<(), NormalFormError> {
    let m = z_lambda_member(z)?;
    if m.member {
        Ok(())
    } else {
        Err(NormalFormError::NotInZLambda(m.failing))
    }
}

fn finish(
    z: &CoordMatrix,
    g: CMatrix,
    h: GroupElement,
    x: Vec<CMatrix>,
    form_id: FormId,
) -> Result<NormalFormResult, NormalFormError> {
    let reduced = z.left_act(&g)?.right_act(&h)?;
    let target = table_form(&form_id, &x, z.r())?;
    let residual = reduced.matrix().relative_distance(&target);
    Ok(NormalFormResult { g, h, x, form_id, residual })
}

/// Normal forms for `|λ| = 3`.
pub fn reduce3(z: &CoordMatrix) -> Result<NormalFormResult, NormalFormError> {
    let lam = z.partition().to_vec();
    if lam.iter().sum::<usize>() != 3 {
        return Err(NormalFormError::UnsupportedPartition(lam));
    }
    require_member(z)?;
    let r = z.r();
    let one = CMatrix::identity(r);
    let form_id = FormId { partition: lam.clone(), variant: 0 };
    match lam.as_slice() {
        [1, 1, 1] => {
            let (g, h, _) = ones_prefix(z)?;
            finish(z, g, h, vec![], form_id)
        }
        [2, 1] => {
            let g1 = pivot(z, 0, 2)?;
            let v = &g1 * &column(z, 1);
            let (v0, v1) = (top(&v, r), bottom(&v, r));
            let h1 = -&v0;
            let h2 = v1;
            let g2 = diag2(&one, &inv(&h2)?);
            let h = element(vec![vec![one.clone(), h1], vec![h2]]);
            finish(z, &g2 * &g1, h, vec![], form_id)
        }
        [3] => {
            let g1 = pivot(z, 0, 1)?;
            let v = &g1 * &column(z, 2);
            let (v0, v1) = (top(&v, r), bottom(&v, r));
            let h1 = -&v1;
            let h2 = -&v0;
            let g2 = blocks2(&one, &(-&h1), &CMatrix::zeros(r, r), &one);
            let h = element(vec![vec![one.clone(), h1, h2]]);
            finish(z, &g2 * &g1, h, vec![], form_id)
        }
        _ => Err(NormalFormError::UnsupportedPartition(lam)),
    }
}

/// The `(1,1,1)` reduction applied to the first three columns of a
/// `(1,...,1)` matrix; also returns `g z h` for reading off the rest.
fn ones_prefix(z: &CoordMatrix) -> Result<(CMatrix, GroupElement, Vec<CMatrix>), NormalFormError> {
    let r = z.r();
    let one = CMatrix::identity(r);
    let g1 = pivot(z, 0, 1)?;
    let v = &g1 * &column(z, 2);
    let (v0, v1) = (top(&v, r), bottom(&v, r));
    let h3 = inv(&v0)?;
    let h2 = -&(&v1 * &h3);
    let g2 = diag2(&one, &inv(&h2)?);
    let g = &g2 * &g1;
    let n = z.partition().len();
    let mut blocks = vec![vec![one.clone()], vec![h2], vec![h3]];
    let mut rest = Vec::with_capacity(n.saturating_sub(3));
    for j in 3..n {
        let w = &g * &column(z, j);
        let (w0, w1) = (top(&w, r), bottom(&w, r));
        let w0i = inv(&w0)?;
        rest.push(-&(&w1 * &w0i));
        blocks.push(vec![w0i]);
    }
    Ok((g, element(blocks), rest))
}

/// Normal forms for `|λ| = 4`; `variant` selects the table column `x_1`, `x_2`, `x_3`.
pub fn reduce4(z: &CoordMatrix, variant: usize) -> Result<NormalFormResult, NormalFormError> {
    let lam = z.partition().to_vec();
    if lam.iter().sum::<usize>() != 4 {
        return Err(NormalFormError::UnsupportedPartition(lam));
    }
    if !FormId::variants(&lam).contains(&variant) {
        return Err(NormalFormError::UnknownVariant { partition: lam, variant });
    }
    require_member(z)?;
    let r = z.r();
    let one = CMatrix::identity(r);
    let zero = CMatrix::zeros(r, r);
    let form_id = FormId { partition: lam.clone(), variant };
    match lam.as_slice() {
        [1, 1, 1, 1] => {
            let (g, h, x) = ones_prefix(z)?;
            finish(z, g, h, x, form_id)
        }
        [2, 1, 1] => {
            let g1 = pivot(z, 0, 2)?;
            let a = &g1 * &column(z, 1);
            let b = &g1 * &column(z, 3);
            let (a0, a1, b0, b1) = (top(&a, r), bottom(&a, r), top(&b, r), bottom(&b, r));
            let k1 = -&a0;
            let (d2, c2, c3, x) = match variant {
                1 => {
                    let d2 = -&(&b0 * &inv(&b1)?);
                    let c2 = inv(&d2)?;
                    let x = &d2 * &a1;
                    (d2, c2, inv(&b0)?, x)
                }
                2 => {
                    let a1i = inv(&a1)?;
                    let b0i = inv(&b0)?;
                    let x = -&(&(&a1i * &b1) * &b0i);
                    (a1i, a1.clone(), b0i, x)
                }
                _ => {
                    let a1i = inv(&a1)?;
                    let c3 = -&(&inv(&b1)? * &a1);
                    let x = &b0 * &c3;
                    (a1i, a1.clone(), c3, x)
                }
            };
            let g = &diag2(&one, &d2) * &g1;
            let h = element(vec![vec![one.clone(), k1], vec![c2], vec![c3]]);
            finish(z, g, h, vec![x], form_id)
        }
        [2, 2] => {
            let g1 = pivot(z, 0, 2)?;
            let a = &g1 * &column(z, 1);
            let b = &g1 * &column(z, 3);
            let (a0, a1, b0, b1) = (top(&a, r), bottom(&a, r), top(&b, r), bottom(&b, r));
            let k1 = -&a0;
            let (d2, c2, k2, x) = if variant == 1 {
                let c2 = inv(&b0)?;
                let k2 = -&(&b1 * &c2);
                (b0.clone(), c2, k2, &b0 * &a1)
            } else {
                let k2 = -&(&b1 * &a1);
                (inv(&a1)?, a1.clone(), k2, &b0 * &a1)
            };
            let g = &diag2(&one, &d2) * &g1;
            let h = element(vec![vec![one.clone(), k1], vec![c2, k2]]);
            finish(z, g, h, vec![x], form_id)
        }
        [3, 1] => {
            let g1 = pivot(z, 0, 3)?;
            let a = &g1 * &column(z, 1);
            let b = &g1 * &column(z, 2);
            let (a0, a1, b0, b1) = (top(&a, r), bottom(&a, r), top(&b, r), bottom(&b, r));
            let a1i = inv(&a1)?;
            let (g2, k1, k2, c2, x) = match variant {
                1 => {
                    let k1 = -&a0;
                    let k2 = &(&a0 * &a0) - &b0;
                    let x = &k1 + &(&a1i * &b1);
                    (diag2(&one, &a1i), k1, k2, a1.clone(), x)
                }
                2 => {
                    let k1 = -&(&a1i * &b1);
                    let k2 = -&(&(&a0 * &k1) + &b0);
                    let x = &k1 + &a0;
                    (diag2(&one, &(-&a1i)), k1, k2, -&a1, x)
                }
                _ => {
                    let k1 = -&(&a1i * &b1);
                    let k2 = -&(&(&a0 * &k1) + &b0);
                    let f = -&(&(&k1 + &a0) * &a1i);
                    let x = &k1 + &a0;
                    (blocks2(&one, &f, &zero, &a1i), k1, k2, -&a1, x)
                }
            };
            let g = &g2 * &g1;
            let h = element(vec![vec![one.clone(), k1, k2], vec![c2]]);
            finish(z, g, h, vec![x], form_id)
        }
        [4] => {
            let g1 = pivot(z, 0, 1)?;
            let a = &g1 * &column(z, 2);
            let b = &g1 * &column(z, 3);
            let (a0, a1, b0, b1) = (top(&a, r), bottom(&a, r), top(&b, r), bottom(&b, r));
            let k1 = -&a1;
            let k2 = -&a0;
            let x = &(&k2 + &(&a1 * &k1)) + &b1;
            let k3 = &(&(&k1 * &x) - &(&a0 * &k1)) - &b0;
            let g2 = blocks2(&one, &(-&k1), &zero, &one);
            let h = element(vec![vec![one.clone(), k1, k2, k3]]);
            finish(z, &g2 * &g1, h, vec![x], form_id)
        }
        _ => Err(NormalFormError::UnsupportedPartition(lam)),
    }
}

/// Normal form for `λ = (1, ..., 1)`, `n ≥ 3`.
pub fn reduce_ones(z: &CoordMatrix) -> Result<NormalFormResult, NormalFormError> {
    let lam = z.partition().to_vec();
    if lam.len() < 3 || lam.iter().any(|&k| k != 1) {
        return Err(NormalFormError::UnsupportedPartition(lam));
    }
    require_member(z)?;
    let (g, h, x) = ones_prefix(z)?;
    let r = z.r();
    let one = CMatrix::identity(r);
    let tol = 1e-10;
    let singular = |m: &CMatrix| {
        let d = m.det().expect("square");
        !(d.norm() > tol * m.max_abs().max(1.0).powi(r as i32))
    };
    for (i, xi) in x.iter().enumerate() {
        if singular(xi) || singular(&(&one - xi)) {
            return Err(NormalFormError::DegenerateOrbit(format!("x_{} or 1 - x_{} is singular", i + 4, i + 4)));
        }
        for (j, xj) in x.iter().enumerate().skip(i + 1) {
            if singular(&(xi - xj)) {
                return Err(NormalFormError::DegenerateOrbit(format!("x_{} - x_{} is singular", i + 4, j + 4)));
            }
        }
    }
    let variant = if lam.len() == 3 { 0 } else { 1 };
    finish(z, g, h, x, FormId { partition: lam, variant })
}

/// Dispatches on `|λ|` and shape; `variant` matters only for `|λ| = 4`.
pub fn reduce(z: &CoordMatrix, variant: usize) -> Result<NormalFormResult, NormalFormError> {
    let lam = z.partition();
    let n: usize = lam.iter().sum();
    if lam.iter().all(|&k| k == 1) && n != 4 {
        reduce_ones(z)
    } else if n == 3 {
        reduce3(z)
    } else if n == 4 {
        reduce4(z, variant.max(1))
    } else {
        Err(NormalFormError::UnsupportedPartition(lam.to_vec()))
    }
}

/// Scalar (r = 1) cross-ratio `p_14 p_23 / (p_13 p_24)` of four points of `P^1`
/// given as the columns of a `2 × 4` matrix.
pub fn cross_ratio(z: &CMatrix) -> Cplx {
    let p = |a: usize, b: usize| z.get(0, a) * z.get(1, b) - z.get(0, b) * z.get(1, a);
    p(0, 3) * p(1, 2) / (p(0, 2) * p(1, 3))
}
