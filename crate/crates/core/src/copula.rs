//! Synthetic data from the Gaussian copula model: population correlation
//! families, latent multivariate normal sampling and monotone marginal
//! transforms.

use rand_distr::{Distribution, StandardNormal};
use std::fmt;

use crate::error::{Error, Result};
use crate::linalg::{eig_sym, CorrMatrix, SymMatrix};
use crate::rng::{column_stream, derive_seed};

/// An `n x d` matrix of finite observations, stored column by column.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    n: usize,
    d: usize,
    cols: Vec<f64>,
}

impl DataMatrix {
    /// Builds from row-major data.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let d = rows.first().map_or(0, Vec::len);
        if n == 0 || d == 0 {
            return Err(Error::TooFewObservations { required: 1, got: n });
        }
        let mut cols = vec![0.0; n * d];
        for (i, row) in rows.iter().enumerate() {
            if row.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: row.len(),
                });
            }
            for (j, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::NonFinite { row: i, col: j });
                }
                cols[j * n + i] = v;
            }
        }
        Ok(DataMatrix { n, d, cols })
    }

    /// Builds from columns of equal length.
    pub fn from_columns(columns: Vec<Vec<f64>>) -> Result<Self> {
        let d = columns.len();
        let n = columns.first().map_or(0, Vec::len);
        if n == 0 || d == 0 {
            return Err(Error::TooFewObservations { required: 1, got: n });
        }
        let mut cols = Vec::with_capacity(n * d);
        for (j, c) in columns.into_iter().enumerate() {
            if c.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: c.len(),
                });
            }
            if let Some(i) = c.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite { row: i, col: j });
            }
            cols.extend(c);
        }
        Ok(DataMatrix { n, d, cols })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.cols[j * self.n + i]
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.cols[j * self.n..(j + 1) * self.n]
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        (0..self.d).map(|j| self.get(i, j)).collect()
    }

    pub fn columns(&self) -> impl Iterator<Item = &[f64]> {
        self.cols.chunks_exact(self.n)
    }

    /// First column containing a repeated value, if any.
    pub fn first_tied_column(&self) -> Option<usize> {
        self.columns().position(|c| {
            let mut v = c.to_vec();
            v.sort_by(f64::total_cmp);
            v.windows(2).any(|w| w[0] == w[1])
        })
    }

    pub fn map_columns(&self, mut f: impl FnMut(usize, f64) -> f64) -> DataMatrix {
        let n = self.n;
        DataMatrix {
            n,
            d: self.d,
            cols: self
                .cols
                .iter()
                .enumerate()
                .map(|(p, &v)| f(p / n, v))
                .collect(),
        }
    }
}

/// Riemann zeta for real `s > 1` (direct sum plus Euler-Maclaurin tail).
pub fn zeta(s: f64) -> f64 {
    assert!(s > 1.0, "zeta needs s > 1");
    const N: usize = 64;
    let head: f64 = (1..N).map(|k| (k as f64).powf(-s)).sum();
    let n = N as f64;
    let tail = n.powf(1.0 - s) / (s - 1.0)
        + 0.5 * n.powf(-s)
        + s * n.powf(-s - 1.0) / 12.0
        - s * (s + 1.0) * (s + 2.0) * n.powf(-s - 3.0) / 720.0;
    head + tail
}

/// Largest admissible bandable amplitude: `0.45 / zeta(alpha + 1)`.
pub fn bandable_c_max(alpha: f64) -> f64 {
    0.45 / zeta(alpha + 1.0)
}

/// Largest bandable amplitude that keeps a `d`-dimensional realization
/// diagonally dominant with margin: `0.45 / sum_{m=1}^{d-1} m^-(alpha+1)`.
/// Never smaller than [`bandable_c_max`].
pub fn bandable_c_max_at(alpha: f64, d: usize) -> f64 {
    let partial: f64 = (1..d).map(|m| (m as f64).powf(-alpha - 1.0)).sum();
    if partial == 0.0 {
        f64::INFINITY
    } else {
        0.45 / partial
    }
}

/// Tail-sum constant `M0 = 2c/alpha`: every bandable member satisfies
/// `max_j sum_{|i-j|>k} |Sigma_ij| <= M0 k^-alpha`.
pub fn bandable_m0(alpha: f64, c: f64) -> f64 {
    2.0 * c / alpha
}

/// Spectral-norm constant `M1 = 1 + 2c zeta(alpha + 1)` (Gershgorin).
pub fn bandable_m1(alpha: f64, c: f64) -> f64 {
    1.0 + 2.0 * c * zeta(alpha + 1.0)
}

/// Parametric correlation family, independent of dimension.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SigmaFamily {
    /// `Sigma_jk = r^|j-k|`.
    Ar1 { r: f64 },
    /// `Sigma_jk = r` off the diagonal.
    Compound { r: f64 },
    /// `Sigma_jk = c |j-k|^(-alpha-1)` off the diagonal.
    Bandable { alpha: f64, c: f64 },
    /// `I + lambda theta theta^T` rescaled to unit diagonal, `theta` uniform on
    /// the first `s` coordinates.
    Spiked { lambda: f64, s: usize },
}

impl fmt::Display for SigmaFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SigmaFamily::Ar1 { r } => write!(f, "ar1({r})"),
            SigmaFamily::Compound { r } => write!(f, "compound({r})"),
            SigmaFamily::Bandable { alpha, c } => write!(f, "bandable({alpha},{c})"),
            SigmaFamily::Spiked { lambda, s } => write!(f, "spiked({lambda},{s})"),
        }
    }
}

/// A correlation family at a fixed dimension.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SigmaModel {
    pub family: SigmaFamily,
    pub dim: usize,
}

impl SigmaModel {
    pub fn new(family: SigmaFamily, dim: usize) -> Result<Self> {
        let m = SigmaModel { family, dim };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.dim;
        if d == 0 {
            return Err(Error::InvalidModel("dimension must be positive".into()));
        }
        let bad = |msg: String| Err(Error::InvalidModel(msg));
        match self.family {
            SigmaFamily::Ar1 { r } if !(r.abs() < 1.0) => bad(format!("ar1 needs |r| < 1, got {r}")),
            SigmaFamily::Compound { r } => {
                let lower = if d > 1 { -1.0 / (d as f64 - 1.0) } else { -1.0 };
                if !(r > lower && r < 1.0) {
                    return bad(format!("compound needs {lower} < r < 1, got {r}"));
                }
                Ok(())
            }
            SigmaFamily::Bandable { alpha, c } => {
                if !(alpha > 0.0) {
                    return bad(format!("bandable needs alpha > 0, got {alpha}"));
                }
                let cmax = bandable_c_max_at(alpha, d);
                if !(c > 0.0 && c <= cmax) {
                    return bad(format!("bandable needs 0 < c <= {cmax}, got {c}"));
                }
                Ok(())
            }
            SigmaFamily::Spiked { lambda, s } => {
                if !(lambda > 0.0) {
                    return bad(format!("spiked needs lambda > 0, got {lambda}"));
                }
                if s == 0 || s > d {
                    return bad(format!("spiked needs 1 <= s <= d = {d}, got {s}"));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Population leading eigenvector for the spiked family.
    pub fn leading_vector(&self) -> Option<Vec<f64>> {
        match self.family {
            SigmaFamily::Spiked { s, .. } => {
                let w = 1.0 / (s as f64).sqrt();
                Some((0..self.dim).map(|i| if i < s { w } else { 0.0 }).collect())
            }
            _ => None,
        }
    }

    /// True support of the spiked leading eigenvector.
    pub fn spiked_support(&self) -> Option<Vec<usize>> {
        match self.family {
            SigmaFamily::Spiked { s, .. } => Some((0..s).collect()),
            _ => None,
        }
    }
}

/// Population correlation matrix of `model`.
pub fn realize_sigma(model: &SigmaModel) -> Result<CorrMatrix> {
    model.validate()?;
    let d = model.dim;
    let m = match model.family {
        SigmaFamily::Ar1 { r } => SymMatrix::from_upper_fn(d, |j, k| {
            if j == k {
                1.0
            } else {
                r.powi((k - j) as i32)
            }
        }),
        SigmaFamily::Compound { r } => {
            SymMatrix::from_upper_fn(d, |j, k| if j == k { 1.0 } else { r })
        }
        SigmaFamily::Bandable { alpha, c } => SymMatrix::from_upper_fn(d, |j, k| {
            if j == k {
                1.0
            } else {
                c * ((k - j) as f64).powf(-alpha - 1.0)
            }
        }),
        SigmaFamily::Spiked { lambda, s } => {
            let off = lambda / (s as f64 + lambda);
            SymMatrix::from_upper_fn(d, |j, k| {
                if j == k {
                    1.0
                } else if k < s {
                    off
                } else {
                    0.0
                }
            })
        }
    };
    CorrMatrix::new_population(m)
}

/// Difference between the two largest population eigenvalues.
pub fn eigengap(sigma: &CorrMatrix) -> Result<f64> {
    let e = eig_sym(sigma.as_sym())?;
    Ok(if e.values.len() > 1 {
        e.values[0] - e.values[1]
    } else {
        0.0
    })
}

/// Symmetric square root with negative eigenvalues clamped to zero.
pub fn psd_sqrt(sigma: &SymMatrix) -> Result<SymMatrix> {
    let e = eig_sym(sigma)?;
    let min = *e.values.last().unwrap_or(&0.0);
    if min < crate::linalg::PSD_FLOOR {
        return Err(Error::NotPsd {
            min_eigenvalue: min,
        });
    }
    Ok(e.reconstruct_with(|l| l.max(0.0).sqrt()))
}

const TIE_RETRY_TAG: u64 = 0x7469_6573; // "ties"

/// `n` iid rows from `N(0, Sigma)`, computed as `Z Sigma^{1/2}` where column
/// `j` of `Z` is drawn from stream `j` of the key `seed`.
///
/// If any column contains a repeated value the draw is repeated once with a
/// derived key; a second tie is an error.
pub fn sample_latent(sigma: &CorrMatrix, n: usize, seed: u64) -> Result<DataMatrix> {
    if n == 0 {
        return Err(Error::TooFewObservations { required: 1, got: 0 });
    }
    let root = psd_sqrt(sigma.as_sym())?;
    let x = sample_with_root(&root, n, seed);
    match x.first_tied_column() {
        None => Ok(x),
        Some(_) => {
            let x = sample_with_root(&root, n, derive_seed(seed, &[TIE_RETRY_TAG]));
            match x.first_tied_column() {
                None => Ok(x),
                Some(column) => Err(Error::Ties { column }),
            }
        }
    }
}

fn sample_with_root(root: &SymMatrix, n: usize, seed: u64) -> DataMatrix {
    let d = root.dim();
    let z: Vec<Vec<f64>> = (0..d)
        .map(|j| {
            let mut rng = column_stream(seed, j as u64);
            (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
        })
        .collect();
    let mut cols = vec![0.0; n * d];
    for k in 0..d {
        let out = &mut cols[k * n..(k + 1) * n];
        for (j, zj) in z.iter().enumerate() {
            let w = root.get(j, k);
            if w == 0.0 {
                continue;
            }
            for (o, &zv) in out.iter_mut().zip(zj) {
                *o += zv * w;
            }
        }
    }
    DataMatrix { n, d, cols }
}

/// A strictly increasing marginal transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Transform {
    Identity,
    /// `x -> x^3`
    Cube,
    /// `x -> e^x`
    ExpShift,
    /// `x -> x / (1 + |x|)`
    LogitIsh,
}

impl Transform {
    #[inline]
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Transform::Identity => x,
            Transform::Cube => x * x * x,
            Transform::ExpShift => x.exp(),
            Transform::LogitIsh => x / (1.0 + x.abs()),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Transform::Identity => "identity",
            Transform::Cube => "cube",
            Transform::ExpShift => "expshift",
            Transform::LogitIsh => "logitish",
        }
    }

    pub fn parse(s: &str) -> Option<Transform> {
        match s {
            "identity" => Some(Transform::Identity),
            "cube" => Some(Transform::Cube),
            "expshift" | "exp" => Some(Transform::ExpShift),
            "logitish" | "logit-ish" => Some(Transform::LogitIsh),
            _ => None,
        }
    }
}

/// One transform per column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransformSet(pub Vec<Transform>);

impl TransformSet {
    pub fn identity(d: usize) -> Self {
        TransformSet(vec![Transform::Identity; d])
    }

    /// Repeats `pattern` cyclically over `d` columns.
    pub fn cycled(pattern: &[Transform], d: usize) -> Self {
        if pattern.is_empty() {
            return Self::identity(d);
        }
        TransformSet((0..d).map(|j| pattern[j % pattern.len()]).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// `Y_ij = f_j(X_ij)`.
pub fn apply_transforms(x: &DataMatrix, t: &TransformSet) -> Result<DataMatrix> {
    if t.len() != x.d() {
        return Err(Error::DimensionMismatch {
            expected: x.d(),
            got: t.len(),
        });
    }
    Ok(x.map_columns(|j, v| t.0[j].apply(v)))
}
