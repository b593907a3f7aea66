//! Dense symmetric matrices, matrix norms and eigenvector distances.
//!
//! Storage is always a full row-major `d x d` buffer, but the public mutators
//! only ever write through [`SymMatrix::set`], which updates both triangles, so
//! symmetry holds bit-exactly by construction.

mod eigen;
mod subsets;

pub(crate) use eigen::canonical_sign;
pub use eigen::{eig_sym, EigenDecomp, JACOBI_MAX_DIM};
pub(crate) use subsets::{argmax_subsets, check_guard};
pub use subsets::{
    binomial, for_each_subset, sparse_spectral_norm, sparse_spectral_norm_with_limit,
    SparseNorm, SubsetIter, DEFAULT_ENUMERATION_LIMIT,
};

use crate::error::{Error, Result};

/// A symmetric `d x d` matrix of finite reals.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(dim: usize) -> Self {
        SymMatrix {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for j in 0..dim {
            m.data[j * dim + j] = 1.0;
        }
        m
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (j, &v) in diag.iter().enumerate() {
            m.set(j, j, v);
        }
        m
    }

    /// Builds a matrix by evaluating `f(j, k)` on the upper triangle (`j <= k`)
    /// and mirroring.
    pub fn from_upper_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(dim);
        for j in 0..dim {
            for k in j..dim {
                m.set(j, k, f(j, k));
            }
        }
        m
    }

    /// Builds a matrix from rows, rejecting asymmetric or non-finite input.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: row.len(),
                });
            }
        }
        for j in 0..dim {
            for k in 0..dim {
                if !rows[j][k].is_finite() {
                    return Err(Error::NonFinite { row: j, col: k });
                }
                if rows[j][k] != rows[k][j] {
                    return Err(Error::InvalidArgument(format!(
                        "matrix is not symmetric at ({j}, {k})"
                    )));
                }
            }
        }
        Ok(Self::from_upper_fn(dim, |j, k| rows[j][k]))
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, j: usize, k: usize) -> f64 {
        self.data[j * self.dim + k]
    }

    /// Sets entry `(j, k)` and its mirror `(k, j)`.
    #[inline]
    pub fn set(&mut self, j: usize, k: usize, v: f64) {
        self.data[j * self.dim + k] = v;
        self.data[k * self.dim + j] = v;
    }

    /// Row-major view of the full matrix.
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, j: usize) -> &[f64] {
        &self.data[j * self.dim..(j + 1) * self.dim]
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.dim).map(|j| self.get(j, j)).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim).map(|j| self.row(j).to_vec()).collect()
    }

    /// Principal submatrix indexed by `idx` (in the given order).
    pub fn principal(&self, idx: &[usize]) -> SymMatrix {
        let s = idx.len();
        let mut data = Vec::with_capacity(s * s);
        for &a in idx {
            for &b in idx {
                data.push(self.get(a, b));
            }
        }
        SymMatrix { dim: s, data }
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0.0)
    }

    pub fn check_finite(&self) -> Result<()> {
        match self.data.iter().position(|v| !v.is_finite()) {
            Some(p) => Err(Error::NonFinite {
                row: p / self.dim,
                col: p % self.dim,
            }),
            None => Ok(()),
        }
    }

    /// Elementwise map applied to the upper triangle and mirrored.
    pub fn map(&self, mut f: impl FnMut(usize, usize, f64) -> f64) -> SymMatrix {
        Self::from_upper_fn(self.dim, |j, k| f(j, k, self.get(j, k)))
    }

    pub fn sub(&self, other: &SymMatrix) -> Result<SymMatrix> {
        self.zip(other, |a, b| a - b)
    }

    pub fn add(&self, other: &SymMatrix) -> Result<SymMatrix> {
        self.zip(other, |a, b| a + b)
    }

    pub fn scale(&self, c: f64) -> SymMatrix {
        self.map(|_, _, v| c * v)
    }

    pub fn hadamard(&self, other: &SymMatrix) -> Result<SymMatrix> {
        self.zip(other, |a, b| a * b)
    }

    fn zip(&self, other: &SymMatrix, f: impl Fn(f64, f64) -> f64) -> Result<SymMatrix> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: other.dim,
            });
        }
        Ok(Self::from_upper_fn(self.dim, |j, k| {
            f(self.get(j, k), other.get(j, k))
        }))
    }

    /// `P A P^T` for the permutation sending index `i` to `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> SymMatrix {
        let mut out = SymMatrix::zeros(self.dim);
        for j in 0..self.dim {
            for k in j..self.dim {
                out.set(perm[j], perm[k], self.get(j, k));
            }
        }
        out
    }

    /// `A v`.
    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        (0..self.dim)
            .map(|j| self.row(j).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }
}

/// Symmetric matrix with unit diagonal and off-diagonal entries in `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrMatrix(SymMatrix);

/// Eigenvalue floor for population correlation matrices.
pub const PSD_FLOOR: f64 = -1e-8;

impl CorrMatrix {
    pub fn new(m: SymMatrix) -> Result<Self> {
        m.check_finite()?;
        for j in 0..m.dim() {
            if m.get(j, j) != 1.0 {
                return Err(Error::InvalidArgument(format!(
                    "diagonal entry {j} is {} instead of 1",
                    m.get(j, j)
                )));
            }
            for k in (j + 1)..m.dim() {
                if m.get(j, k).abs() > 1.0 {
                    return Err(Error::InvalidArgument(format!(
                        "entry ({j}, {k}) = {} lies outside [-1, 1]",
                        m.get(j, k)
                    )));
                }
            }
        }
        Ok(CorrMatrix(m))
    }

    /// As [`CorrMatrix::new`], additionally requiring the smallest eigenvalue
    /// to be at least [`PSD_FLOOR`].
    pub fn new_population(m: SymMatrix) -> Result<Self> {
        let c = Self::new(m)?;
        let min = c.min_eigenvalue()?;
        if min < PSD_FLOOR {
            return Err(Error::NotPsd {
                min_eigenvalue: min,
            });
        }
        Ok(c)
    }

    pub fn identity(dim: usize) -> Self {
        CorrMatrix(SymMatrix::identity(dim))
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        let e = eig_sym(&self.0)?;
        Ok(*e.values.last().unwrap_or(&0.0))
    }

    pub fn as_sym(&self) -> &SymMatrix {
        &self.0
    }

    pub fn into_sym(self) -> SymMatrix {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn get(&self, j: usize, k: usize) -> f64 {
        self.0.get(j, k)
    }
}

impl AsRef<SymMatrix> for CorrMatrix {
    fn as_ref(&self) -> &SymMatrix {
        &self.0
    }
}

/// Largest absolute eigenvalue.
pub fn spectral_norm(a: &SymMatrix) -> Result<f64> {
    if a.is_zero() {
        return Ok(0.0);
    }
    match a.dim() {
        1 => Ok(a.get(0, 0).abs()),
        _ => {
            let e = eig_sym(a)?;
            Ok(e.values[0].abs().max(e.values[e.values.len() - 1].abs()))
        }
    }
}

/// Maximum row Euclidean norm, the `l2 -> l_inf` operator norm.
pub fn norm_2_inf(a: &SymMatrix) -> f64 {
    (0..a.dim())
        .map(|j| a.row(j).iter().map(|v| v * v).sum::<f64>().sqrt())
        .fold(0.0, f64::max)
}

pub fn norm_frobenius(a: &SymMatrix) -> f64 {
    a.as_slice().iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn norm_max(a: &SymMatrix) -> f64 {
    a.as_slice().iter().fold(0.0, |m, v| m.max(v.abs()))
}

const UNIT_TOL: f64 = 1e-10;

fn check_unit(v: &[f64]) -> Result<()> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > UNIT_TOL {
        return Err(Error::NotUnit { norm });
    }
    Ok(())
}

/// Sine of the angle between two unit vectors; sign-invariant.
pub fn sin_angle(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch {
            expected: u.len(),
            got: v.len(),
        });
    }
    check_unit(u)?;
    check_unit(v)?;
    let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    Ok((1.0 - dot * dot).max(0.0).sqrt().min(1.0))
}

/// Minimum eigengap accepted by [`projection_distance`].
pub const MIN_EIGENGAP: f64 = 1e-10;

/// Projector onto the span of the `k` algebraically largest eigenvectors.
pub fn top_projector(a: &SymMatrix, k: usize, min_gap: f64) -> Result<SymMatrix> {
    let d = a.dim();
    if k == 0 || k >= d {
        return Err(Error::InvalidArgument(format!(
            "projection rank k = {k} must satisfy 1 <= k < d = {d}"
        )));
    }
    let e = eig_sym(a)?;
    let gap = e.values[k - 1] - e.values[k];
    if gap <= min_gap {
        return Err(Error::DegenerateEigengap {
            k,
            next: k + 1,
            gap,
            threshold: min_gap,
        });
    }
    Ok(SymMatrix::from_upper_fn(d, |r, c| {
        (0..k).map(|j| e.vector(j)[r] * e.vector(j)[c]).sum()
    }))
}

/// `||P_k(A) - P_k(B)||_S` for the rank-`k` leading eigenprojectors.
pub fn projection_distance(a: &SymMatrix, b: &SymMatrix, k: usize) -> Result<f64> {
    projection_distance_with_gap(a, b, k, MIN_EIGENGAP)
}

pub fn projection_distance_with_gap(
    a: &SymMatrix,
    b: &SymMatrix,
    k: usize,
    min_gap: f64,
) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    let pa = top_projector(a, k, min_gap)?;
    let pb = top_projector(b, k, min_gap)?;
    spectral_norm(&pa.sub(&pb)?)
}
