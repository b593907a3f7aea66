//! Seeded Monte Carlo experiments: grids of `(n, d)` cells, replicated
//! estimation, error functionals, summaries and log-log rate fits.

use rayon::prelude::*;
use std::collections::HashMap;
use std::f64::consts::{E, PI, SQRT_2};
use std::fmt;
use std::io::{Read, Write};

use crate::copula::{apply_transforms, realize_sigma, sample_latent, SigmaFamily, SigmaModel, Transform, TransformSet};
use crate::error::{Error, Result};
use crate::kernel::hoeffding_report;
use crate::linalg::{
    check_guard, eig_sym, norm_2_inf, norm_max, projection_distance, sin_angle, sparse_spectral_norm_with_limit, spectral_norm, CorrMatrix,
    SymMatrix, DEFAULT_ENUMERATION_LIMIT,
};
use crate::rank::{estimate_sigma, oracle_sample_corr, RankKind};
use crate::regularize::{optimal_bandwidth, sparse_pca_with_limit, taper_estimate, SparsePcaResult, TaperSpec};
use crate::rng::derive_seed;

pub mod presets;

/// Largest dimension an experiment may request.
pub const MAX_DIM: usize = 4096;
/// Largest `n * d` a single replicate may allocate.
pub const MAX_CELL_ENTRIES: usize = 100_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Estimator {
    Tau,
    Rho,
    /// Latent sample second-moment matrix `X^T X / n`.
    Oracle,
}

impl Estimator {
    pub fn name(self) -> &'static str {
        match self {
            Estimator::Tau => "tau",
            Estimator::Rho => "rho",
            Estimator::Oracle => "oracle",
        }
    }

    pub fn parse(s: &str) -> Option<Estimator> {
        match s {
            "tau" => Some(Estimator::Tau),
            "rho" => Some(Estimator::Rho),
            "oracle" => Some(Estimator::Oracle),
            _ => None,
        }
    }
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bandwidth {
    Fixed(usize),
    /// `optimal_bandwidth(n, d, alpha)` per cell.
    Auto { alpha: f64 },
}

/// Error functional evaluated per replicate against the realized `Sigma`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Functional {
    /// `||Sigma_hat - Sigma||_S`
    SpecErr,
    /// `max_jk |Sigma_hat - Sigma|`
    MaxErr,
    /// `max_{|A| = s} ||(Sigma_hat - Sigma)_{AxA}||_S`
    SparseSpecErr { s: usize },
    /// `||taper(Sigma_hat) - Sigma||_S^2`
    TaperErr(Bandwidth),
    /// `sin angle` between the sparse PCA vector and the leading eigenvector.
    SinAngleSparse { s: usize },
    /// 1 if the sparse PCA support equals the true support, else 0.
    SupportRecovery { s: usize },
    /// `||P_k(Sigma_hat) - P_k(Sigma)||_S`
    ProjDist { k: usize },
    /// `||T_hat - T - 2 Delta1||_F^2` on the latent data.
    HoeffdingResidual,
    /// `||Delta0||_S`
    Delta0Spec,
    /// `||Delta1 - Delta0||_S`
    Delta1MinusDelta0Spec,
}

impl Functional {
    pub fn name(&self) -> String {
        match *self {
            Functional::SpecErr => "spec_err".into(),
            Functional::MaxErr => "max_err".into(),
            Functional::SparseSpecErr { s } => format!("sparse_spec_err({s})"),
            Functional::TaperErr(Bandwidth::Fixed(k)) => format!("taper_err(k={k})"),
            Functional::TaperErr(Bandwidth::Auto { alpha }) => format!("taper_err(alpha={alpha})"),
            Functional::SinAngleSparse { s } => format!("sin_angle_sparse({s})"),
            Functional::SupportRecovery { s } => format!("support_recovery({s})"),
            Functional::ProjDist { k } => format!("proj_dist({k})"),
            Functional::HoeffdingResidual => "hoeffding_residual".into(),
            Functional::Delta0Spec => "delta0_spec".into(),
            Functional::Delta1MinusDelta0Spec => "delta1_minus_delta0_spec".into(),
        }
    }

    pub fn parse(s: &str) -> Option<Functional> {
        let s = s.trim();
        let simple = match s {
            "spec_err" => Some(Functional::SpecErr),
            "max_err" => Some(Functional::MaxErr),
            "hoeffding_residual" => Some(Functional::HoeffdingResidual),
            "delta0_spec" => Some(Functional::Delta0Spec),
            "delta1_minus_delta0_spec" => Some(Functional::Delta1MinusDelta0Spec),
            _ => None,
        };
        if simple.is_some() {
            return simple;
        }
        let (head, rest) = s.split_once('(')?;
        let arg = rest.strip_suffix(')')?;
        let int = || arg.parse::<usize>().ok();
        match head {
            "sparse_spec_err" => Some(Functional::SparseSpecErr { s: int()? }),
            "sin_angle_sparse" => Some(Functional::SinAngleSparse { s: int()? }),
            "support_recovery" => Some(Functional::SupportRecovery { s: int()? }),
            "proj_dist" => Some(Functional::ProjDist { k: int()? }),
            "taper_err" => {
                if let Some(k) = arg.strip_prefix("k=") {
                    Some(Functional::TaperErr(Bandwidth::Fixed(k.parse().ok()?)))
                } else {
                    let alpha: f64 = arg.strip_prefix("alpha=")?.parse().ok()?;
                    (alpha > 0.0).then_some(Functional::TaperErr(Bandwidth::Auto { alpha }))
                }
            }
            _ => None,
        }
    }

    fn is_latent_only(&self) -> bool {
        matches!(
            self,
            Functional::HoeffdingResidual | Functional::Delta0Spec | Functional::Delta1MinusDelta0Spec
        )
    }

    fn sparse_size(&self) -> Option<usize> {
        match *self {
            Functional::SparseSpecErr { s } | Functional::SinAngleSparse { s } | Functional::SupportRecovery { s } => {
                Some(s)
            }
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub family: SigmaFamily,
    /// Marginal transforms, repeated cyclically across columns.
    pub transforms: Vec<Transform>,
    pub estimators: Vec<Estimator>,
    pub n_grid: Vec<usize>,
    pub d_grid: Vec<usize>,
    pub reps: usize,
    pub seed: u64,
    pub functionals: Vec<Functional>,
    pub enumeration_limit: u128,
}

impl ExperimentConfig {
    pub fn new(family: SigmaFamily, n_grid: Vec<usize>, d_grid: Vec<usize>) -> Self {
        ExperimentConfig {
            family,
            transforms: vec![Transform::Identity],
            estimators: vec![Estimator::Tau],
            n_grid,
            d_grid,
            reps: 1,
            seed: 0,
            functionals: vec![Functional::SpecErr],
            enumeration_limit: DEFAULT_ENUMERATION_LIMIT,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.reps == 0 {
            return bad("reps must be >= 1".into());
        }
        if self.n_grid.is_empty() || self.d_grid.is_empty() {
            return bad("n and d grids must be nonempty".into());
        }
        if self.estimators.is_empty() || self.functionals.is_empty() {
            return bad("need at least one estimator and one functional".into());
        }
        if self.n_grid.iter().any(|&n| n < 2) {
            return bad("every n must be >= 2".into());
        }
        let latent = self.functionals.iter().any(Functional::is_latent_only);
        if latent && self.estimators != [Estimator::Tau] {
            return bad("Hoeffding functionals are defined for the tau estimator alone".into());
        }
        for &d in &self.d_grid {
            if d > MAX_DIM {
                return Err(Error::ResourceGuard(format!("d = {d} exceeds {MAX_DIM}")));
            }
            SigmaModel::new(self.family, d)?;
            for &n in &self.n_grid {
                if n.saturating_mul(d) > MAX_CELL_ENTRIES {
                    return Err(Error::ResourceGuard(format!(
                        "n * d = {} exceeds {MAX_CELL_ENTRIES}",
                        n.saturating_mul(d)
                    )));
                }
            }
            for f in &self.functionals {
                if let Some(s) = f.sparse_size() {
                    check_guard(d, s, self.enumeration_limit)?;
                }
                match *f {
                    Functional::ProjDist { k } if k == 0 || k >= d => {
                        return bad(format!("proj_dist needs 1 <= k < d = {d}, got {k}"));
                    }
                    Functional::TaperErr(Bandwidth::Fixed(0)) => return bad("taper bandwidth must be >= 1".into()),
                    _ => {}
                }
            }
        }
        Ok(())
    }

    /// Number of records a run produces.
    pub fn record_count(&self) -> usize {
        self.n_grid.len() * self.d_grid.len() * self.reps * self.estimators.len() * self.functionals.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub n: usize,
    pub d: usize,
    pub estimator: Estimator,
    pub functional: String,
    pub replicate: usize,
    /// NaN when the replicate failed.
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellFailure {
    pub n: usize,
    pub d: usize,
    pub replicate: usize,
    pub reason: String,
}

/// Population quantities of one cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellInfo {
    pub n: usize,
    pub d: usize,
    pub sigma_spec: f64,
    pub sigma_2inf: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExperimentResult {
    pub records: Vec<Record>,
    pub failures: Vec<CellFailure>,
    pub cells: Vec<CellInfo>,
}

struct Population {
    sigma: CorrMatrix,
    leading: Vec<f64>,
    support: Vec<usize>,
    transforms: TransformSet,
}

fn population(family: SigmaFamily, d: usize, transforms: &[Transform]) -> Result<Population> {
    let model = SigmaModel::new(family, d)?;
    let sigma = realize_sigma(&model)?;
    let leading = match model.leading_vector() {
        Some(v) => v,
        None => eig_sym(sigma.as_sym())?.vector(0).to_vec(),
    };
    let support = model.spiked_support().unwrap_or_default();
    Ok(Population {
        sigma,
        leading,
        support,
        transforms: TransformSet::cycled(transforms, d),
    })
}

/// Indices of the `s` largest-magnitude entries, ascending; ties go to the
/// lower index.
fn top_support(v: &[f64], s: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[b].abs().total_cmp(&v[a].abs()).then(a.cmp(&b)));
    let mut top: Vec<usize> = idx.into_iter().take(s).collect();
    top.sort_unstable();
    top
}

fn replicate(cfg: &ExperimentConfig, pop: &Population, n: usize, seed: u64) -> Result<Vec<f64>> {
    let x = sample_latent(&pop.sigma, n, seed)?;
    let y = apply_transforms(&x, &pop.transforms)?;
    let sigma = pop.sigma.as_sym();
    let d = sigma.dim();
    let hoeffding = if cfg.functionals.iter().any(Functional::is_latent_only) {
        Some(hoeffding_report(&x, &pop.sigma)?)
    } else {
        None
    };
    let mut out = Vec::with_capacity(cfg.estimators.len() * cfg.functionals.len());
    for &est in &cfg.estimators {
        let hat: SymMatrix = match est {
            Estimator::Tau => estimate_sigma(&y, RankKind::Tau)?.into_sym(),
            Estimator::Rho => estimate_sigma(&y, RankKind::Rho)?.into_sym(),
            Estimator::Oracle => oracle_sample_corr(&x),
        };
        let err = hat.sub(sigma)?;
        let mut pca_cache: HashMap<usize, SparsePcaResult> = HashMap::new();
        let mut sparse_pca_for = |s: usize| -> Result<SparsePcaResult> {
            if let Some(r) = pca_cache.get(&s) {
                return Ok(r.clone());
            }
            let r = sparse_pca_with_limit(&hat, s, cfg.enumeration_limit)?;
            pca_cache.insert(s, r.clone());
            Ok(r)
        };
        for f in &cfg.functionals {
            let v = match *f {
                Functional::SpecErr => spectral_norm(&err)?,
                Functional::MaxErr => norm_max(&err),
                Functional::SparseSpecErr { s } => sparse_spectral_norm_with_limit(&err, s, cfg.enumeration_limit)?.value,
                Functional::TaperErr(bw) => {
                    let k = match bw {
                        Bandwidth::Fixed(k) => k,
                        Bandwidth::Auto { alpha } => optimal_bandwidth(n, d, alpha)?,
                    };
                    let tapered = taper_estimate(&hat, TaperSpec::new(k)?);
                    spectral_norm(&tapered.sub(sigma)?)?.powi(2)
                }
                Functional::SinAngleSparse { s } => sin_angle(&sparse_pca_for(s)?.leading_vector, &pop.leading)?,
                Functional::SupportRecovery { s } => {
                    let truth = if pop.support.len() == s {
                        pop.support.clone()
                    } else {
                        top_support(&pop.leading, s)
                    };
                    f64::from(u8::from(sparse_pca_for(s)?.support == truth))
                }
                // the oracle's moment matrix has no unit diagonal, so no CorrMatrix here
                Functional::ProjDist { k } => projection_distance(sigma, &hat, k)?,
                Functional::HoeffdingResidual => hoeffding.expect("computed above").residual_frobenius_sq,
                Functional::Delta0Spec => hoeffding.expect("computed above").delta0_spectral,
                Functional::Delta1MinusDelta0Spec => hoeffding.expect("computed above").delta1_minus_delta0_spectral,
            };
            out.push(v);
        }
    }
    Ok(out)
}

/// Runs every `(d, n)` cell for `reps` replicates.
///
/// Replicate `r` of cell `c` (cells ordered `d`-major, then `n`) draws its
/// data from key `derive_seed(seed, [c, r])`, and all estimators in a
/// replicate share one sample. Records come out in the order
/// `d, n, replicate, estimator, functional` whatever the thread schedule.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    let pops: Vec<Population> = cfg
        .d_grid
        .iter()
        .map(|&d| population(cfg.family, d, &cfg.transforms))
        .collect::<Result<_>>()?;
    let mut jobs = Vec::new();
    for (di, &d) in cfg.d_grid.iter().enumerate() {
        for &n in &cfg.n_grid {
            let cell = jobs.len() / cfg.reps;
            for r in 0..cfg.reps {
                jobs.push((di, d, n, r, derive_seed(cfg.seed, &[cell as u64, r as u64])));
            }
        }
    }
    let outputs: Vec<Result<Vec<f64>>> = jobs
        .par_iter()
        .map(|&(di, _, n, _, seed)| replicate(cfg, &pops[di], n, seed))
        .collect();

    let per = cfg.estimators.len() * cfg.functionals.len();
    let names: Vec<String> = cfg.functionals.iter().map(Functional::name).collect();
    let mut result = ExperimentResult::default();
    result.records.reserve(cfg.record_count());
    for (&(_, d, n, r, _), out) in jobs.iter().zip(outputs) {
        let values = match out {
            Ok(v) => v,
            Err(e) => {
                result.failures.push(CellFailure {
                    n,
                    d,
                    replicate: r,
                    reason: e.to_string(),
                });
                vec![f64::NAN; per]
            }
        };
        let mut it = values.into_iter();
        for &est in &cfg.estimators {
            for name in &names {
                result.records.push(Record {
                    n,
                    d,
                    estimator: est,
                    functional: name.clone(),
                    replicate: r,
                    value: it.next().expect("one value per functional"),
                });
            }
        }
    }
    for (di, &d) in cfg.d_grid.iter().enumerate() {
        let sigma = pops[di].sigma.as_sym();
        let (spec, two_inf) = (spectral_norm(sigma)?, norm_2_inf(sigma));
        for &n in &cfg.n_grid {
            result.cells.push(CellInfo {
                n,
                d,
                sigma_spec: spec,
                sigma_2inf: two_inf,
            });
        }
    }
    Ok(result)
}

/// Pairwise (cascade) summation.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 8 {
        return v.iter().sum();
    }
    let mid = v.len() / 2;
    pairwise_sum(&v[..mid]) + pairwise_sum(&v[mid..])
}

/// Quantile of ascending `sorted` with linear interpolation between order
/// statistics (`h = (m - 1) p`).
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    let m = sorted.len();
    if m == 0 {
        return f64::NAN;
    }
    let h = (m - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(m - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub n: usize,
    pub d: usize,
    pub estimator: Estimator,
    pub functional: String,
    /// Replicates with a finite value.
    pub count: usize,
    pub mean: f64,
    pub sd: f64,
    pub se: f64,
    pub q05: f64,
    pub q50: f64,
    pub q95: f64,
}

impl SummaryRow {
    fn from_values(n: usize, d: usize, estimator: Estimator, functional: String, values: &[f64]) -> Self {
        let mut v: Vec<f64> = values.iter().copied().filter(|x| x.is_finite()).collect();
        let m = v.len();
        let mean = if m == 0 { f64::NAN } else { pairwise_sum(&v) / m as f64 };
        let sd = if m < 2 {
            0.0
        } else {
            let dev: Vec<f64> = v.iter().map(|x| (x - mean).powi(2)).collect();
            (pairwise_sum(&dev) / (m - 1) as f64).sqrt()
        };
        v.sort_by(f64::total_cmp);
        SummaryRow {
            n,
            d,
            estimator,
            functional,
            count: m,
            mean,
            sd,
            se: if m == 0 { f64::NAN } else { sd / (m as f64).sqrt() },
            q05: quantile(&v, 0.05),
            q50: quantile(&v, 0.5),
            q95: quantile(&v, 0.95),
        }
    }
}

/// Which axis a rate fit varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    N,
    D,
}

impl Axis {
    pub fn parse(s: &str) -> Option<Axis> {
        match s {
            "n" => Some(Axis::N),
            "d" => Some(Axis::D),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    pub slope: f64,
    pub stderr: f64,
    pub points: usize,
}

/// Least-squares slope of `ln y` on `ln x`, with its standard error.
pub fn fit_loglog(xs: &[f64], ys: &[f64]) -> Result<RateFit> {
    let m = xs.len();
    if m != ys.len() {
        return Err(Error::DimensionMismatch { expected: m, got: ys.len() });
    }
    if m < 3 {
        return Err(Error::InvalidArgument(format!("rate fit needs at least 3 points, got {m}")));
    }
    if xs.iter().chain(ys).any(|&v| !(v > 0.0) || !v.is_finite()) {
        return Err(Error::InvalidArgument("rate fit needs positive finite values".into()));
    }
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / m as f64;
    let my = ly.iter().sum::<f64>() / m as f64;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument("rate fit needs distinct x values".into()));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let sse: f64 = lx.iter().zip(&ly).map(|(x, y)| (y - my - slope * (x - mx)).powi(2)).sum();
    Ok(RateFit {
        slope,
        stderr: (sse / (m - 2) as f64 / sxx).sqrt(),
        points: m,
    })
}

/// Bound shapes compared against observed errors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bound {
    /// `||Sigma||_S (sqrt(d/n) + d/n)`, against the mean.
    Thm1,
    /// `||Sigma||_S (2 sqrt 2 sqrt(d/n) + sqrt 2 d/n + 6 (d/n^3)^(1/4))`,
    /// against the mean.
    ExplicitOracle,
    /// `sqrt((s log(e d / s) + t) / n)`, against the 0.95 quantile.
    Thm2 { s: usize, t: f64 },
    /// `5 ||Sigma||_S (sqrt((d + t^2/pi) / (3n)) + (d + (t^2 + 1)/pi) / n)`,
    /// against the 0.95 quantile.
    Lm4 { t2: f64 },
}

impl Bound {
    pub fn rhs(&self, cell: &CellInfo) -> f64 {
        let (n, d) = (cell.n as f64, cell.d as f64);
        match *self {
            Bound::Thm1 => cell.sigma_spec * ((d / n).sqrt() + d / n),
            Bound::ExplicitOracle => {
                cell.sigma_spec * (2.0 * SQRT_2 * (d / n).sqrt() + SQRT_2 * d / n + 6.0 * (d / n.powi(3)).powf(0.25))
            }
            Bound::Thm2 { s, t } => {
                let s = s as f64;
                ((s * (E * d / s).ln() + t) / n).sqrt()
            }
            Bound::Lm4 { t2 } => {
                5.0 * cell.sigma_spec * (((d + t2 / PI) / (3.0 * n)).sqrt() + (d + (t2 + 1.0) / PI) / n)
            }
        }
    }

    fn uses_q95(&self) -> bool {
        matches!(self, Bound::Thm2 { .. } | Bound::Lm4 { .. })
    }

    pub fn name(&self) -> String {
        match *self {
            Bound::Thm1 => "thm1".into(),
            Bound::ExplicitOracle => "explicit_oracle".into(),
            Bound::Thm2 { s, t } => format!("thm2(s={s};t={t})"),
            Bound::Lm4 { t2 } => format!("lm4(t2={t2})"),
        }
    }
}

/// `t + log d <= beta sqrt((n/s)(t + log(e d / s)))`, the sample-size regime
/// assumed by the sparse PCA rate.
pub fn sparse_pca_regime(n: usize, d: usize, s: usize, t: f64, beta: f64) -> bool {
    let (n, d, s) = (n as f64, d as f64, s as f64);
    t + d.ln() <= beta * ((n / s) * (t + (E * d / s).ln())).sqrt()
}

impl ExperimentResult {
    /// Per `(n, d, estimator, functional)` summaries in first-seen order.
    pub fn summary(&self) -> Vec<SummaryRow> {
        let mut order: Vec<(usize, usize, Estimator, &str)> = Vec::new();
        let mut groups: HashMap<(usize, usize, Estimator, &str), Vec<f64>> = HashMap::new();
        for r in &self.records {
            let key = (r.n, r.d, r.estimator, r.functional.as_str());
            groups
                .entry(key)
                .or_insert_with(|| {
                    order.push(key);
                    Vec::new()
                })
                .push(r.value);
        }
        order
            .into_iter()
            .map(|k| SummaryRow::from_values(k.0, k.1, k.2, k.3.to_string(), &groups[&k]))
            .collect()
    }

    fn cell(&self, n: usize, d: usize) -> Option<&CellInfo> {
        self.cells.iter().find(|c| c.n == n && c.d == d)
    }

    /// Slope of log mean `functional` against log `vary`; the other axis must
    /// take a single value among the matching rows unless `fixed` selects one.
    pub fn rate_fit(&self, functional: &str, estimator: Estimator, vary: Axis, fixed: Option<usize>) -> Result<RateFit> {
        let rows: Vec<SummaryRow> = self
            .summary()
            .into_iter()
            .filter(|r| r.functional == functional && r.estimator == estimator)
            .filter(|r| {
                fixed.is_none_or(|f| match vary {
                    Axis::N => r.d == f,
                    Axis::D => r.n == f,
                })
            })
            .collect();
        let other = |r: &SummaryRow| if vary == Axis::N { r.d } else { r.n };
        if let Some(first) = rows.first() {
            if rows.iter().any(|r| other(r) != other(first)) {
                return Err(Error::InvalidArgument(
                    "the fixed axis takes several values; choose one".into(),
                ));
            }
        }
        let xs: Vec<f64> = rows.iter().map(|r| if vary == Axis::N { r.n } else { r.d } as f64).collect();
        let ys: Vec<f64> = rows.iter().map(|r| r.mean).collect();
        fit_loglog(&xs, &ys)
    }

    /// Largest observed/bound ratio over the cells of `functional`.
    pub fn bound_ratio(&self, functional: &str, estimator: Estimator, bound: Bound) -> Result<f64> {
        let mut worst: Option<f64> = None;
        for r in self.summary() {
            if r.functional != functional || r.estimator != estimator {
                continue;
            }
            let cell = self
                .cell(r.n, r.d)
                .ok_or_else(|| Error::InvalidArgument(format!("no population data for n = {}, d = {}", r.n, r.d)))?;
            let observed = if bound.uses_q95() { r.q95 } else { r.mean };
            let ratio = observed / bound.rhs(cell);
            worst = Some(worst.map_or(ratio, |w: f64| w.max(ratio)));
        }
        worst.ok_or_else(|| Error::InvalidArgument(format!("no rows for {functional} / {estimator}")))
    }

    pub fn write_records_csv(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "n,d,estimator,functional,replicate,value")?;
        for r in &self.records {
            writeln!(w, "{},{},{},{},{},{}", r.n, r.d, r.estimator, r.functional, r.replicate, fmt_f64(r.value))?;
        }
        Ok(())
    }

    pub fn write_summary_csv(&self, mut w: impl Write) -> Result<()> {
        writeln!(
            w,
            "n,d,estimator,functional,count,mean,sd,se,q05,q50,q95,sigma_spec,sigma_2inf,sparse_pca_regime"
        )?;
        for r in self.summary() {
            let cell = self.cell(r.n, r.d);
            let (spec, two_inf) = cell.map_or((f64::NAN, f64::NAN), |c| (c.sigma_spec, c.sigma_2inf));
            let regime = match Functional::parse(&r.functional).and_then(|f| f.sparse_size()) {
                Some(s) => sparse_pca_regime(r.n, r.d, s, 20f64.ln(), 1.0).to_string(),
                None => String::new(),
            };
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                r.n,
                r.d,
                r.estimator,
                r.functional,
                r.count,
                fmt_f64(r.mean),
                fmt_f64(r.sd),
                fmt_f64(r.se),
                fmt_f64(r.q05),
                fmt_f64(r.q50),
                fmt_f64(r.q95),
                fmt_f64(spec),
                fmt_f64(two_inf),
                regime
            )?;
        }
        Ok(())
    }

    pub fn write_failures_csv(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "n,d,replicate,reason")?;
        for f in &self.failures {
            writeln!(w, "{},{},{},\"{}\"", f.n, f.d, f.replicate, f.reason.replace('"', "'"))?;
        }
        Ok(())
    }

    /// Reads records written by [`ExperimentResult::write_records_csv`].
    /// Population data is not stored there, so `cells` comes back empty.
    pub fn read_records_csv(r: impl Read) -> Result<ExperimentResult> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(r);
        let headers = rdr.headers().map_err(|e| parse_err(1, e))?.clone();
        let want = ["n", "d", "estimator", "functional", "replicate", "value"];
        if headers.iter().ne(want.iter().copied()) {
            return Err(Error::Parse {
                line: 1,
                message: format!("expected header {}", want.join(",")),
            });
        }
        let mut out = ExperimentResult::default();
        for (i, rec) in rdr.records().enumerate() {
            let line = i + 2;
            let rec = rec.map_err(|e| parse_err(line, e))?;
            if rec.len() != want.len() {
                return Err(Error::Parse {
                    line,
                    message: format!("expected {} fields, got {}", want.len(), rec.len()),
                });
            }
            let int = |j: usize| {
                rec[j].trim().parse::<usize>().map_err(|_| Error::Parse {
                    line,
                    message: format!("bad integer in column {}: {:?}", want[j], &rec[j]),
                })
            };
            let estimator = Estimator::parse(rec[2].trim()).ok_or_else(|| Error::Parse {
                line,
                message: format!("unknown estimator {:?}", &rec[2]),
            })?;
            let functional = Functional::parse(rec[3].trim()).ok_or_else(|| Error::Parse {
                line,
                message: format!("unknown functional {:?}", &rec[3]),
            })?;
            let value: f64 = rec[5].trim().parse().map_err(|_| Error::Parse {
                line,
                message: format!("bad value {:?}", &rec[5]),
            })?;
            out.records.push(Record {
                n: int(0)?,
                d: int(1)?,
                estimator,
                functional: functional.name(),
                replicate: int(4)?,
                value,
            });
        }
        Ok(out)
    }
}

fn parse_err(line: usize, e: csv::Error) -> Error {
    Error::Parse {
        line: e.position().map_or(line, |p| p.line() as usize),
        message: e.to_string(),
    }
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{v:.16e}")
    }
}
