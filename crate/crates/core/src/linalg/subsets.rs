//! Exhaustive enumeration of fixed-size index subsets and the sparse spectral
//! norm built on it.

use rayon::prelude::*;

use super::{spectral_norm, SymMatrix};
use crate::error::{Error, Result};

/// Default cap on the number of subsets an exhaustive search may visit.
pub const DEFAULT_ENUMERATION_LIMIT: u128 = 10_000_000;

const CHUNK: u128 = 2048;

/// `C(n, k)`, saturating at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Lexicographic iterator over the `s`-subsets of `0..d`.
#[derive(Debug, Clone)]
pub struct SubsetIter {
    d: usize,
    current: Option<Vec<usize>>,
}

impl SubsetIter {
    pub fn new(d: usize, s: usize) -> Self {
        let current = (s <= d).then(|| (0..s).collect());
        SubsetIter { d, current }
    }

    /// Starts at the subset of lexicographic rank `rank`.
    pub fn starting_at(d: usize, s: usize, rank: u128) -> Self {
        SubsetIter {
            d,
            current: unrank(d, s, rank),
        }
    }
}

impl Iterator for SubsetIter {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.current.clone()?;
        let s = out.len();
        let mut next = out.clone();
        let mut i = s;
        loop {
            if i == 0 {
                self.current = None;
                break;
            }
            i -= 1;
            if next[i] < self.d - s + i {
                next[i] += 1;
                for j in (i + 1)..s {
                    next[j] = next[j - 1] + 1;
                }
                self.current = Some(next);
                break;
            }
        }
        Some(out)
    }
}

fn unrank(d: usize, s: usize, mut rank: u128) -> Option<Vec<usize>> {
    if s > d || rank >= binomial(d, s) {
        return None;
    }
    let mut out = Vec::with_capacity(s);
    let mut c = 0;
    for i in 0..s {
        loop {
            let count = binomial(d - c - 1, s - i - 1);
            if rank < count {
                out.push(c);
                c += 1;
                break;
            }
            rank -= count;
            c += 1;
        }
    }
    Some(out)
}

/// Visits every `s`-subset of `0..d` in lexicographic order.
pub fn for_each_subset(d: usize, s: usize, mut f: impl FnMut(&[usize])) {
    for subset in SubsetIter::new(d, s) {
        f(&subset);
    }
}

pub(crate) fn check_guard(d: usize, s: usize, limit: u128) -> Result<u128> {
    if s == 0 || s > d {
        return Err(Error::InvalidArgument(format!(
            "subset size s = {s} must satisfy 1 <= s <= d = {d}"
        )));
    }
    let count = binomial(d, s);
    if count > limit {
        return Err(Error::EnumerationGuard { d, s, count, limit });
    }
    Ok(count)
}

/// Maximises `score` over all `s`-subsets of `0..d`.
///
/// Subsets are scored in parallel chunks; the reduction keeps the largest score
/// and, on exact ties, the lexicographically smallest subset, so the result is
/// independent of the thread schedule.
pub(crate) fn argmax_subsets<F>(d: usize, s: usize, limit: u128, score: F) -> Result<(f64, Vec<usize>)>
where
    F: Fn(&[usize]) -> Result<f64> + Sync,
{
    let count = check_guard(d, s, limit)?;
    let chunks = count.div_ceil(CHUNK);
    let best = (0..chunks as u64)
        .into_par_iter()
        .map(|c| -> Result<(f64, u128)> {
            let start = c as u128 * CHUNK;
            let len = CHUNK.min(count - start);
            let mut best = (f64::NEG_INFINITY, start);
            for (off, subset) in SubsetIter::starting_at(d, s, start).take(len as usize).enumerate() {
                let v = score(&subset)?;
                if v.is_nan() {
                    return Err(Error::InvalidArgument(format!("NaN score on subset {subset:?}")));
                }
                if v > best.0 {
                    best = (v, start + off as u128);
                }
            }
            Ok(best)
        })
        .try_reduce(
            || (f64::NEG_INFINITY, u128::MAX),
            |a, b| {
                Ok(if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a })
            },
        )?;
    let support = unrank(d, s, best.1).expect("rank within range");
    Ok((best.0, support))
}

/// Result of a sparse spectral norm search.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseNorm {
    pub value: f64,
    /// Lexicographically smallest attaining subset, ascending.
    pub support: Vec<usize>,
}

/// `max_{|A| = s} ||M_{A x A}||_S` by exhaustive enumeration.
///
/// Both extreme eigenvalues of principal submatrices are monotone under set
/// inclusion, so this also equals the maximum over `|A| <= s`.
pub fn sparse_spectral_norm(a: &SymMatrix, s: usize) -> Result<SparseNorm> {
    sparse_spectral_norm_with_limit(a, s, DEFAULT_ENUMERATION_LIMIT)
}

pub fn sparse_spectral_norm_with_limit(a: &SymMatrix, s: usize, limit: u128) -> Result<SparseNorm> {
    a.check_finite()?;
    let (value, support) = argmax_subsets(a.dim(), s, limit, |idx| spectral_norm(&a.principal(idx)))?;
    Ok(SparseNorm { value, support })
}
