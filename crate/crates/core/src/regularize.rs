//! Banded tapering and exhaustive sparse principal components.

use crate::copula::bandable_m0;
use crate::error::{Error, Result};
use crate::linalg::{
    argmax_subsets, canonical_sign, eig_sym, projection_distance, spectral_norm, CorrMatrix,
    SymMatrix, DEFAULT_ENUMERATION_LIMIT,
};

/// Taper bandwidth `k >= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TaperSpec {
    k: usize,
}

impl TaperSpec {
    pub fn new(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidArgument("taper bandwidth must be >= 1".into()));
        }
        Ok(TaperSpec { k })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Weight at lag `m = |i - j|`: 1 up to `k/2`, linear down to 0 at `k`.
    pub fn weight(&self, m: usize) -> f64 {
        let (m, k) = (m as f64, self.k as f64);
        if m <= k / 2.0 {
            1.0
        } else if m < k {
            2.0 - 2.0 * m / k
        } else {
            0.0
        }
    }
}

pub fn taper_weights(spec: TaperSpec, d: usize) -> SymMatrix {
    SymMatrix::from_upper_fn(d, |i, j| spec.weight(i.abs_diff(j)))
}

/// Elementwise product of the estimate with the taper weights.
pub fn taper_estimate(sigma_hat: &SymMatrix, spec: TaperSpec) -> SymMatrix {
    sigma_hat.map(|i, j, v| spec.weight(i.abs_diff(j)) * v)
}

/// Bandwidth `min(n^(1/(2 alpha + 1)), d)` rounded to the nearest even
/// integer, kept within `[1, d]`.
pub fn optimal_bandwidth(n: usize, d: usize, alpha: f64) -> Result<usize> {
    if n == 0 || d == 0 || !(alpha > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "bandwidth needs n, d >= 1 and alpha > 0 (n = {n}, d = {d}, alpha = {alpha})"
        )));
    }
    let target = (n as f64).powf(1.0 / (2.0 * alpha + 1.0)).min(d as f64);
    let mut k = 2 * (target / 2.0).round() as usize;
    if k > d {
        k = d - d % 2;
    }
    Ok(k.max(1))
}

/// Constant `B` with `||(1 - w) Sigma||_S <= B k^-alpha` for every bandable
/// member: the weights only start shrinking past lag `k/2`, so the tail
/// bound applies at `k/2`, giving `2^alpha M0`.
pub fn taper_bias_constant(alpha: f64, c: f64) -> f64 {
    2f64.powf(alpha) * bandable_m0(alpha, c)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SparsePcaResult {
    /// Ascending support of size `s`.
    pub support: Vec<usize>,
    /// Unit vector in `R^d`, zero off the support.
    pub leading_vector: Vec<f64>,
    /// Eigenvalue of largest magnitude on the support (signed).
    pub leading_value: f64,
}

/// Maximises `|v^T A v|` over unit vectors with at most `s` nonzeros by
/// scanning every support of size exactly `s`.
pub fn sparse_pca(sigma_hat: &SymMatrix, s: usize) -> Result<SparsePcaResult> {
    sparse_pca_with_limit(sigma_hat, s, DEFAULT_ENUMERATION_LIMIT)
}

pub fn sparse_pca_with_limit(sigma_hat: &SymMatrix, s: usize, limit: u128) -> Result<SparsePcaResult> {
    sigma_hat.check_finite()?;
    let d = sigma_hat.dim();
    let (_, support) = argmax_subsets(d, s, limit, |idx| spectral_norm(&sigma_hat.principal(idx)))?;
    let e = eig_sym(&sigma_hat.principal(&support))?;
    let (top, bottom) = (e.values[0], e.values[s - 1]);
    let pick = if bottom.abs() > top.abs() { s - 1 } else { 0 };
    let mut v = vec![0.0; d];
    for (&i, &x) in support.iter().zip(e.vector(pick)) {
        v[i] = x;
    }
    canonical_sign(&mut v);
    Ok(SparsePcaResult {
        support,
        leading_vector: v,
        leading_value: e.values[pick],
    })
}

/// Distance between the rank-`k` leading eigenprojectors of the population
/// and estimated matrices.
pub fn pca_projections_compare(sigma_true: &CorrMatrix, sigma_hat: &CorrMatrix, k: usize) -> Result<f64> {
    projection_distance(sigma_true.as_sym(), sigma_hat.as_sym(), k)
}
