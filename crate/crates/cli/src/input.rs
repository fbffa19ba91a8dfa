//! Parsing of files and flag values into library types.

use std::fs;
use std::path::Path;

use radon_hgf::characters::{GroupElement, PartitionWeight, Validation};
use radon_hgf::grassmann::CoordMatrix;
use radon_hgf::integrator::{Budget, ChainKind, ChainSpec, Method};
use radon_hgf::jordan::TruncPoly;
use radon_hgf::numeric::{CMatrix, Cplx};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::args::{BudgetArgs, WeightArgs};
use crate::CliError;

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

/// A number or `[re, im]`.
#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(untagged)]
pub enum JsonScalar {
    Real(f64),
    Pair([f64; 2]),
}

impl From<JsonScalar> for Cplx {
    fn from(s: JsonScalar) -> Cplx {
        match s {
            JsonScalar::Real(x) => Cplx::new(x, 0.0),
            JsonScalar::Pair([re, im]) => Cplx::new(re, im),
        }
    }
}

/// One matrix, or an array of them.
#[derive(Deserialize)]
#[serde(untagged)]
pub enum MatrixList {
    One(CMatrix),
    Many(Vec<CMatrix>),
}

impl MatrixList {
    pub fn into_vec(self) -> Vec<CMatrix> {
        match self {
            MatrixList::One(m) => vec![m],
            MatrixList::Many(v) => v,
        }
    }
}

/// `{"blocks": [[h_0, h_1, ...], ...]}`, one list of coefficients per Jordan block.
#[derive(Deserialize, Serialize)]
pub struct ElementJson {
    pub blocks: Vec<Vec<CMatrix>>,
}

impl ElementJson {
    pub fn from_element(h: &GroupElement) -> Self {
        ElementJson { blocks: h.blocks().iter().map(|b| b.coeffs().to_vec()).collect() }
    }

    pub fn into_element(self) -> Result<GroupElement, CliError> {
        let blocks = self
            .blocks
            .into_iter()
            .map(TruncPoly::new)
            .collect::<Result<Vec<_>, _>>()
            .map_err(CliError::from_error)?;
        GroupElement::new(blocks).map_err(CliError::from_error)
    }
}

pub fn validation(s: &str) -> Result<Validation, CliError> {
    match s {
        "strict" => Ok(Validation::Strict),
        "relaxed" => Ok(Validation::Relaxed),
        other => Err(CliError::input(format!("unknown validation '{other}' (expected strict or relaxed)"))),
    }
}

pub fn weight(partition: &[usize], w: &WeightArgs, r: usize) -> Result<PartitionWeight, CliError> {
    let values: Vec<Cplx> = match (&w.alpha, &w.alpha_json) {
        (Some(v), None) => v.iter().map(|&x| Cplx::new(x, 0.0)).collect(),
        (None, Some(p)) => read_json::<Vec<JsonScalar>>(p)?.into_iter().map(Cplx::from).collect(),
        _ => return Err(CliError::input("give exactly one of --alpha and --alpha-json")),
    };
    let m = w.m.unwrap_or(2 * r);
    let mode = validation(&w.validation)?;
    let pw = if w.fix_leading {
        PartitionWeight::with_leading_fixed(partition.to_vec(), &values, m, r, mode)
    } else {
        PartitionWeight::from_flat(partition.to_vec(), &values, m, r, mode)
    };
    pw.map_err(CliError::from_error)
}

pub fn coord_matrix(partition: &[usize], path: &Path, r: Option<usize>) -> Result<CoordMatrix, CliError> {
    let z: CMatrix = read_json(path)?;
    let r = match r {
        Some(r) => r,
        None if z.rows() % 2 == 0 => z.rows() / 2,
        None => return Err(CliError::input("z has an odd number of rows; pass --r")),
    };
    CoordMatrix::new(z, r, partition.to_vec()).map_err(CliError::from_error)
}

pub fn chain(s: Option<&str>, r: usize) -> Result<Option<ChainSpec>, CliError> {
    let Some(s) = s else { return Ok(None) };
    let kind = match s {
        "interval" => ChainKind::Interval,
        "half-line" => ChainKind::HalfLine,
        "line" => ChainKind::Line,
        other => match other.strip_prefix("rays:").map(str::parse::<f64>) {
            Some(Ok(angle)) => ChainKind::RotatedRays { angle },
            _ => return Err(CliError::input(format!("unknown chain '{other}' (interval, half-line, line, rays:<angle>)"))),
        },
    };
    Ok(Some(ChainSpec { kind, r }))
}

pub fn method(s: &str) -> Result<Method, CliError> {
    serde_json::from_value(serde_json::Value::String(s.to_string()))
        .map_err(|_| CliError::input(format!("unknown method '{s}' (adaptive-1d, gauss-1d, eigen-tensor, haar-mc)")))
}

pub fn pair(s: &str) -> Result<(usize, usize), CliError> {
    let parts: Vec<&str> = s.split(',').collect();
    match parts.as_slice() {
        [a, b] => match (a.trim().parse(), b.trim().parse()) {
            (Ok(a), Ok(b)) if a > 0 && b > 0 => Ok((a, b)),
            _ => Err(CliError::input(format!("expected 'panels,nodes', got '{s}'"))),
        },
        _ => Err(CliError::input(format!("expected 'panels,nodes', got '{s}'"))),
    }
}

pub fn budget(b: &BudgetArgs, seed: u64) -> Result<Budget, CliError> {
    let mut out = Budget { seed, ..Budget::default() };
    if let Some(m) = &b.method {
        out.method = Some(method(m)?);
    }
    if let Some(s) = b.samples {
        if !(s >= 1.0 && s.fract() == 0.0 && s < 1e15) {
            return Err(CliError::input(format!("--samples must be a positive integer, got {s}")));
        }
        out.samples = s as u64;
    }
    if let Some(n) = b.nodes {
        out.nodes = n;
    }
    if let Some(t) = b.tol {
        out.tol = t;
    }
    Ok(out)
}
