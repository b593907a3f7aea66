//! Kendall's tau and Spearman's rho matrices, their sine-transform
//! correlation estimates, and the population maps between them.

use rayon::prelude::*;
use std::f64::consts::{FRAC_PI_2, PI};

use crate::copula::DataMatrix;
use crate::error::{Error, Result};
use crate::linalg::{CorrMatrix, SymMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RankKind {
    Tau,
    Rho,
}

/// A matrix of pairwise rank statistics with unit diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct RankStatMatrix {
    pub kind: RankKind,
    pub values: SymMatrix,
    pub n: usize,
}

/// 1-based ranks of a tie-free column. Returns `None` if the column has ties.
pub fn ranks(col: &[f64]) -> Option<Vec<u32>> {
    let order = argsort(col)?;
    let mut r = vec![0u32; col.len()];
    for (pos, &i) in order.iter().enumerate() {
        r[i as usize] = pos as u32 + 1;
    }
    Some(r)
}

/// Indices sorting `col` ascending; `None` if two entries compare equal.
fn argsort(col: &[f64]) -> Option<Vec<u32>> {
    let mut order: Vec<u32> = (0..col.len() as u32).collect();
    order.sort_unstable_by(|&a, &b| col[a as usize].total_cmp(&col[b as usize]));
    if order
        .windows(2)
        .any(|w| col[w[0] as usize] == col[w[1] as usize])
    {
        return None;
    }
    Some(order)
}

/// Number of inversions in `v`; sorts `v` as a side effect.
pub fn count_inversions(v: &mut [u32]) -> u64 {
    let mut buf = vec![0u32; v.len()];
    merge_count(v, &mut buf)
}

fn merge_count(v: &mut [u32], buf: &mut [u32]) -> u64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut inv = {
        let (lo, hi) = v.split_at_mut(mid);
        let (blo, bhi) = buf.split_at_mut(mid);
        merge_count(lo, blo) + merge_count(hi, bhi)
    };
    let (mut i, mut j, mut k) = (0, mid, 0);
    while i < mid && j < n {
        if v[i] <= v[j] {
            buf[k] = v[i];
            i += 1;
        } else {
            buf[k] = v[j];
            // every remaining left element exceeds v[j]
            inv += (mid - i) as u64;
            j += 1;
        }
        k += 1;
    }
    buf[k..k + mid - i].copy_from_slice(&v[i..mid]);
    k += mid - i;
    buf[k..k + n - j].copy_from_slice(&v[j..n]);
    v.copy_from_slice(&buf[..n]);
    inv
}

struct ColumnRanks {
    ranks: Vec<Vec<u32>>,
    orders: Vec<Vec<u32>>,
}

fn column_ranks(y: &DataMatrix) -> Result<ColumnRanks> {
    if y.n() < 2 {
        return Err(Error::TooFewObservations {
            required: 2,
            got: y.n(),
        });
    }
    let per_col: Vec<Result<(Vec<u32>, Vec<u32>)>> = (0..y.d())
        .into_par_iter()
        .map(|j| {
            let order = argsort(y.column(j)).ok_or(Error::Ties { column: j })?;
            let mut r = vec![0u32; y.n()];
            for (pos, &i) in order.iter().enumerate() {
                r[i as usize] = pos as u32 + 1;
            }
            Ok((r, order))
        })
        .collect();
    let mut ranks = Vec::with_capacity(y.d());
    let mut orders = Vec::with_capacity(y.d());
    for c in per_col {
        let (r, o) = c?;
        ranks.push(r);
        orders.push(o);
    }
    Ok(ColumnRanks { ranks, orders })
}

fn pair_list(d: usize) -> Vec<(usize, usize)> {
    (0..d)
        .flat_map(|j| ((j + 1)..d).map(move |k| (j, k)))
        .collect()
}

fn assemble(d: usize, pairs: &[(usize, usize)], vals: &[f64]) -> SymMatrix {
    let mut m = SymMatrix::identity(d);
    for (&(j, k), &v) in pairs.iter().zip(vals) {
        m.set(j, k, v);
    }
    m
}

/// Kendall's tau from the concordant-minus-discordant count `s` over `n`
/// observations: `(2 / (n (n - 1))) * s`.
#[inline]
pub fn tau_from_score(s: i64, n: usize) -> f64 {
    let nf = n as f64;
    2.0 / (nf * (nf - 1.0)) * s as f64
}

/// Matrix of pairwise Kendall's tau in `O(d^2 n log n)`.
///
/// For each pair the rows are ordered by column `j` and the discordant pairs
/// are counted as inversions of column `k`'s ranks in that order.
pub fn kendall_tau_matrix(y: &DataMatrix) -> Result<RankStatMatrix> {
    let cr = column_ranks(y)?;
    let n = y.n();
    let total_pairs = (n as i64) * (n as i64 - 1) / 2;
    let pairs = pair_list(y.d());
    let vals: Vec<f64> = pairs
        .par_iter()
        .map(|&(j, k)| {
            let mut seq: Vec<u32> = cr.orders[j]
                .iter()
                .map(|&i| cr.ranks[k][i as usize])
                .collect();
            let discordant = count_inversions(&mut seq) as i64;
            tau_from_score(total_pairs - 2 * discordant, n)
        })
        .collect();
    Ok(RankStatMatrix {
        kind: RankKind::Tau,
        values: assemble(y.d(), &pairs, &vals),
        n,
    })
}

/// Matrix of pairwise Spearman's rho.
///
/// With tie-free columns every centred rank vector has squared norm
/// `n (n^2 - 1) / 12`, so the statistic is computed in doubled integer units
/// as `sum a_j a_k / (n (n^2 - 1) / 3)` with `a = 2 r - n - 1`.
pub fn spearman_rho_matrix(y: &DataMatrix) -> Result<RankStatMatrix> {
    let cr = column_ranks(y)?;
    let n = y.n();
    let centred: Vec<Vec<i64>> = cr
        .ranks
        .iter()
        .map(|r| r.iter().map(|&v| 2 * v as i64 - n as i64 - 1).collect())
        .collect();
    let n128 = n as i128;
    let denom = (n128 * (n128 * n128 - 1) / 3) as f64;
    let pairs = pair_list(y.d());
    let vals: Vec<f64> = pairs
        .par_iter()
        .map(|&(j, k)| {
            let num: i128 = centred[j]
                .iter()
                .zip(&centred[k])
                .map(|(&a, &b)| (a * b) as i128)
                .sum();
            num as f64 / denom
        })
        .collect();
    Ok(RankStatMatrix {
        kind: RankKind::Rho,
        values: assemble(y.d(), &pairs, &vals),
        n,
    })
}

fn require_kind(m: &RankStatMatrix, kind: RankKind) -> Result<()> {
    if m.kind != kind {
        return Err(Error::InvalidArgument(format!(
            "expected a {kind:?} matrix, got {:?}",
            m.kind
        )));
    }
    Ok(())
}

fn sine_map(m: &SymMatrix, f: impl Fn(f64) -> f64) -> CorrMatrix {
    let out = m.map(|j, k, v| if j == k { 1.0 } else { f(v).clamp(-1.0, 1.0) });
    CorrMatrix::new(out).expect("sine map yields a correlation matrix")
}

/// `sin((pi/2) tau_jk)` off the diagonal, 1 on it.
pub fn sigma_hat_tau(t: &RankStatMatrix) -> Result<CorrMatrix> {
    require_kind(t, RankKind::Tau)?;
    Ok(sine_map(&t.values, |v| (FRAC_PI_2 * v).sin()))
}

/// `2 sin((pi/6) rho_jk)` off the diagonal, 1 on it.
pub fn sigma_hat_rho(r: &RankStatMatrix) -> Result<CorrMatrix> {
    require_kind(r, RankKind::Rho)?;
    Ok(sine_map(&r.values, |v| 2.0 * (PI / 6.0 * v).sin()))
}

/// Estimate `Sigma` from observations with the chosen rank statistic.
pub fn estimate_sigma(y: &DataMatrix, kind: RankKind) -> Result<CorrMatrix> {
    match kind {
        RankKind::Tau => sigma_hat_tau(&kendall_tau_matrix(y)?),
        RankKind::Rho => sigma_hat_rho(&spearman_rho_matrix(y)?),
    }
}

/// Population Kendall's tau: `(2/pi) asin(Sigma_jk)`.
pub fn tau_pop(sigma: &CorrMatrix) -> SymMatrix {
    sigma
        .as_sym()
        .map(|j, k, v| if j == k { 1.0 } else { 2.0 / PI * v.asin() })
}

/// Population Spearman's rho: `(6/pi) asin(Sigma_jk / 2)`.
pub fn rho_pop(sigma: &CorrMatrix) -> SymMatrix {
    sigma
        .as_sym()
        .map(|j, k, v| if j == k { 1.0 } else { 6.0 / PI * (0.5 * v).asin() })
}

/// Latent sample second-moment matrix `X^T X / n` (no rescaling).
pub fn oracle_sample_corr(x: &DataMatrix) -> SymMatrix {
    let n = x.n() as f64;
    SymMatrix::from_upper_fn(x.d(), |j, k| {
        x.column(j)
            .iter()
            .zip(x.column(k))
            .map(|(a, b)| a * b)
            .sum::<f64>()
            / n
    })
}
