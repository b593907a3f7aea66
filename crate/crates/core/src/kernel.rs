//! Normal and bivariate normal CDFs, the first-order Kendall kernel and its
//! pieces, the leading Hoeffding terms, and numerical sweeps of the kernel
//! inequalities.

use rayon::prelude::*;
use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};
use std::fmt::Write as _;

use crate::copula::DataMatrix;
use crate::error::{Error, Result};
use crate::linalg::{norm_frobenius, spectral_norm, CorrMatrix, SymMatrix};
use crate::quad;
use crate::rank::{kendall_tau_matrix, rho_pop, tau_pop};

/// Correlations with `|rho|` at or above this are rejected by [`binorm_cdf`].
pub const RHO_LIMIT: f64 = 1.0 - 1e-12;

/// Truncation point standing in for infinity in one-dimensional integrals.
pub const INTEGRATION_HALF_WIDTH: f64 = 8.5;

/// Standard normal CDF, `0.5 erfc(-x / sqrt 2)`.
#[inline]
pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// Standard normal density.
#[inline]
pub fn std_normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

// Gauss-Legendre half-rules on [-1, 1] (positive nodes) with 6, 12, 20 points.
const GL6_W: [f64; 3] = [0.171_324_492_379_170_5, 0.360_761_573_048_138_4, 0.467_913_934_572_691_0];
const GL6_X: [f64; 3] = [-0.932_469_514_203_152_0, -0.661_209_386_466_264_5, -0.238_619_186_083_197_0];
const GL12_W: [f64; 6] = [
    0.047_175_336_386_511_77,
    0.106_939_325_995_318_4,
    0.160_078_328_543_346_4,
    0.203_167_426_723_065_9,
    0.233_492_536_538_354_7,
    0.249_147_045_813_402_9,
];
const GL12_X: [f64; 6] = [
    -0.981_560_634_246_719_1,
    -0.904_117_256_370_475_0,
    -0.769_902_674_194_305_0,
    -0.587_317_954_286_617_1,
    -0.367_831_498_998_180_2,
    -0.125_233_408_511_469_2,
];
const GL20_W: [f64; 10] = [
    0.017_614_007_139_152_12,
    0.040_601_429_800_386_94,
    0.062_672_048_334_109_06,
    0.083_276_741_576_704_75,
    0.101_930_119_817_240_4,
    0.118_194_531_961_518_4,
    0.131_688_638_449_176_6,
    0.142_096_109_318_382_1,
    0.149_172_986_472_603_7,
    0.152_753_387_130_725_9,
];
const GL20_X: [f64; 10] = [
    -0.993_128_599_185_094_9,
    -0.963_971_927_277_913_8,
    -0.912_234_428_251_325_9,
    -0.839_116_971_822_218_8,
    -0.746_331_906_460_150_8,
    -0.636_053_680_726_515_0,
    -0.510_867_001_950_827_1,
    -0.373_706_088_715_419_6,
    -0.227_785_851_141_645_1,
    -0.076_526_521_133_497_33,
];

/// Upper orthant probability `P(X > dh, Y > dk)` for a standard bivariate
/// normal with correlation `r` (Drezner-Wesolowsky reduction as refined by
/// Genz, with the asymptotic expansion for `|r| > 0.925`).
fn bvnu(dh: f64, dk: f64, r: f64) -> f64 {
    let (w, x): (&[f64], &[f64]) = if r.abs() < 0.3 {
        (&GL6_W, &GL6_X)
    } else if r.abs() < 0.75 {
        (&GL12_W, &GL12_X)
    } else {
        (&GL20_W, &GL20_X)
    };
    let two_pi = 2.0 * PI;
    let h = dh;
    let mut k = dk;
    let mut hk = h * k;
    let mut bvn = 0.0;
    if r.abs() < 0.925 {
        let hs = (h * h + k * k) / 2.0;
        let asr = r.asin();
        for (&wi, &xi) in w.iter().zip(x) {
            for sgn in [1.0, -1.0] {
                let sn = (asr * (sgn * xi + 1.0) / 2.0).sin();
                bvn += wi * ((sn * hk - hs) / (1.0 - sn * sn)).exp();
            }
        }
        return bvn * asr / (2.0 * two_pi) + std_normal_cdf(-h) * std_normal_cdf(-k);
    }
    if r < 0.0 {
        k = -k;
        hk = -hk;
    }
    if r.abs() < 1.0 {
        let as_ = (1.0 - r) * (1.0 + r);
        let mut a = as_.sqrt();
        let bs = (h - k) * (h - k);
        let c = (4.0 - hk) / 8.0;
        let d = (12.0 - hk) / 16.0;
        let asr = -(bs / as_ + hk) / 2.0;
        if asr > -100.0 {
            bvn = a * asr.exp() * (1.0 - c * (bs - as_) * (1.0 - d * bs / 5.0) / 3.0 + c * d * as_ * as_ / 5.0);
        }
        if hk > -100.0 {
            let b = bs.sqrt();
            bvn -= (-hk / 2.0).exp()
                * two_pi.sqrt()
                * std_normal_cdf(-b / a)
                * b
                * (1.0 - c * bs * (1.0 - d * bs / 5.0) / 3.0);
        }
        a /= 2.0;
        for (&wi, &xi) in w.iter().zip(x) {
            for sgn in [1.0, -1.0] {
                let xs = (a * (sgn * xi + 1.0)).powi(2);
                let rs = (1.0 - xs).sqrt();
                let asr = -(bs / xs + hk) / 2.0;
                if asr > -100.0 {
                    let sp = 1.0 + c * xs * (1.0 + d * xs);
                    let ep = (-hk * (1.0 - rs) / (2.0 * (1.0 + rs))).exp() / rs;
                    bvn += a * wi * asr.exp() * (ep - sp);
                }
            }
        }
        bvn = -bvn / two_pi;
    }
    if r > 0.0 {
        bvn + std_normal_cdf(-h.max(k))
    } else {
        -bvn + (std_normal_cdf(-h) - std_normal_cdf(-k)).max(0.0)
    }
}

/// `P(Z1 <= x, Z2 <= y)` for a standard bivariate normal with correlation
/// `rho`.
pub fn binorm_cdf(x: f64, y: f64, rho: f64) -> Result<f64> {
    if !(x.is_finite() || x.is_infinite()) || y.is_nan() || x.is_nan() || !rho.is_finite() {
        return Err(Error::InvalidArgument("binorm_cdf needs non-NaN arguments".into()));
    }
    if rho.abs() >= RHO_LIMIT {
        return Err(Error::DegenerateCorrelation { rho });
    }
    if x == f64::NEG_INFINITY || y == f64::NEG_INFINITY {
        return Ok(0.0);
    }
    if x == f64::INFINITY {
        return Ok(std_normal_cdf(y));
    }
    if y == f64::INFINITY {
        return Ok(std_normal_cdf(x));
    }
    if rho == 0.0 {
        return Ok(std_normal_cdf(x) * std_normal_cdf(y));
    }
    Ok(bvnu(-x, -y, rho).clamp(0.0, 1.0))
}

/// `2 Phi(x) - 1`.
#[inline]
pub fn hbar0(x: f64) -> f64 {
    2.0 * std_normal_cdf(x) - 1.0
}

/// First-order Kendall kernel `E sgn(x - X) sgn(y - Y)` for `(X, Y)`
/// standard bivariate normal with correlation `rho`:
/// `4 Phi2(x, y; rho) - 2 Phi(x) - 2 Phi(y) + 1`.
pub fn hbar(x: f64, y: f64, rho: f64) -> Result<f64> {
    let p = binorm_cdf(x, y, rho)?;
    Ok(4.0 * p - 2.0 * std_normal_cdf(x) - 2.0 * std_normal_cdf(y) + 1.0)
}

/// `hbar(x, y, rho) - hbar(x, y, 0)`.
pub fn g_fn(x: f64, y: f64, rho: f64) -> Result<f64> {
    Ok(hbar(x, y, rho)? - hbar(x, y, 0.0)?)
}

/// Largest `|rho|` accepted by [`gbar`].
pub const GBAR_RHO_MAX: f64 = 0.99;

const GBAR_TOL: f64 = 1e-11;

/// `int hbar(x, y, rho) phi(y) dy` over `[-8.5, 8.5]`.
pub fn gbar(x: f64, rho: f64) -> Result<f64> {
    if rho.abs() > GBAR_RHO_MAX {
        return Err(Error::InvalidArgument(format!(
            "gbar needs |rho| <= {GBAR_RHO_MAX}, got {rho}"
        )));
    }
    let mut failure = None;
    let v = quad::integrate_split(
        |y| match hbar(x, y, rho) {
            Ok(h) => h * std_normal_pdf(y),
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        },
        -INTEGRATION_HALF_WIDTH,
        INTEGRATION_HALF_WIDTH,
        &[0.0],
        GBAR_TOL,
    )?;
    match failure {
        Some(e) => Err(e),
        None => Ok(v),
    }
}

/// All kernel quantities at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelEval {
    pub x: f64,
    pub y: f64,
    pub rho: f64,
    pub phi2: f64,
    pub hbar: f64,
    pub hbar0_x: f64,
    pub hbar0_y: f64,
    pub g: f64,
    pub gbar_x: f64,
}

impl KernelEval {
    pub fn at(x: f64, y: f64, rho: f64) -> Result<Self> {
        let phi2 = binorm_cdf(x, y, rho)?;
        let hb = hbar(x, y, rho)?;
        Ok(KernelEval {
            x,
            y,
            rho,
            phi2,
            hbar: hb,
            hbar0_x: hbar0(x),
            hbar0_y: hbar0(y),
            g: hb - hbar(x, y, 0.0)?,
            gbar_x: gbar(x, rho)?,
        })
    }
}

/// `n^-1 hbar0(X)^T hbar0(X) - R / 3` with `R` the population Spearman matrix.
pub fn delta0_matrix(x: &DataMatrix, sigma: &CorrMatrix) -> Result<SymMatrix> {
    check_dims(x, sigma)?;
    let h: Vec<Vec<f64>> = x.columns().map(|c| c.iter().map(|&v| hbar0(v)).collect()).collect();
    let r = rho_pop(sigma);
    let n = x.n() as f64;
    Ok(SymMatrix::from_upper_fn(x.d(), |j, k| {
        let s: f64 = h[j].iter().zip(&h[k]).map(|(a, b)| a * b).sum();
        s / n - r.get(j, k) / 3.0
    }))
}

/// Linear Hoeffding term of the Kendall matrix:
/// `(1/n) sum_i [hbar(X_ij, X_ik, Sigma_jk) - tau_jk]`, zero diagonal.
pub fn delta1_matrix(x: &DataMatrix, sigma: &CorrMatrix) -> Result<SymMatrix> {
    check_dims(x, sigma)?;
    let t = tau_pop(sigma);
    let d = x.d();
    let pairs: Vec<(usize, usize)> = (0..d).flat_map(|j| ((j + 1)..d).map(move |k| (j, k))).collect();
    let vals: Vec<f64> = pairs
        .par_iter()
        .map(|&(j, k)| -> Result<f64> {
            let rho = sigma.get(j, k);
            let mut s = 0.0;
            for (&a, &b) in x.column(j).iter().zip(x.column(k)) {
                s += hbar(a, b, rho)?;
            }
            Ok(s / x.n() as f64 - t.get(j, k))
        })
        .collect::<Result<_>>()?;
    let mut m = SymMatrix::zeros(d);
    for (&(j, k), &v) in pairs.iter().zip(&vals) {
        m.set(j, k, v);
    }
    Ok(m)
}

fn check_dims(x: &DataMatrix, sigma: &CorrMatrix) -> Result<()> {
    if x.d() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            expected: sigma.dim(),
            got: x.d(),
        });
    }
    Ok(())
}

/// Hoeffding decomposition diagnostics of the Kendall matrix on latent data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HoeffdingReport {
    /// `||T_hat - T - 2 Delta1||_F^2`.
    pub residual_frobenius_sq: f64,
    /// `||Delta1 - Delta0||_S`.
    pub delta1_minus_delta0_spectral: f64,
    /// `||Delta0||_S`.
    pub delta0_spectral: f64,
    /// Expected-value bound on the residual, `2 d (d - 1) / (n (n - 1))`.
    pub residual_bound: f64,
}

pub fn hoeffding_report(x: &DataMatrix, sigma: &CorrMatrix) -> Result<HoeffdingReport> {
    let (n, d) = (x.n() as f64, x.d() as f64);
    let t_hat = kendall_tau_matrix(x)?.values;
    let t = tau_pop(sigma);
    let d1 = delta1_matrix(x, sigma)?;
    let d0 = delta0_matrix(x, sigma)?;
    let resid = t_hat.sub(&t)?.sub(&d1.scale(2.0))?;
    Ok(HoeffdingReport {
        residual_frobenius_sq: norm_frobenius(&resid).powi(2),
        delta1_minus_delta0_spectral: spectral_norm(&d1.sub(&d0)?)?,
        delta0_spectral: spectral_norm(&d0)?,
        residual_bound: 2.0 * d * (d - 1.0) / (n * (n - 1.0)),
    })
}

/// Central-difference step used for kernel derivatives.
pub const FD_STEP: f64 = 1e-5;

/// Outcome of sweeping one inequality `lhs <= bound` over a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub id: &'static str,
    /// Smallest `bound - lhs` seen.
    pub worst_slack: f64,
    /// Largest `lhs / bound` over points with positive bound.
    pub max_ratio: f64,
    pub x: f64,
    pub y: f64,
    pub rho: f64,
    pub points: usize,
}

impl SweepRow {
    pub fn holds(&self, allowance: f64) -> bool {
        self.worst_slack >= -allowance
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
}

impl SweepReport {
    pub fn all_hold(&self, allowance: f64) -> bool {
        self.rows.iter().all(|r| r.holds(allowance))
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("id,worst_slack,max_ratio,x,y,rho,points\n");
        for r in &self.rows {
            writeln!(
                s,
                "{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{}",
                r.id, r.worst_slack, r.max_ratio, r.x, r.y, r.rho, r.points
            )
            .expect("write to string");
        }
        s
    }
}

/// Grid resolution of [`inequality_sweep`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SweepGrid {
    /// Points per spatial axis on `[-4, 4]`.
    pub xy: usize,
    /// Points on the correlation axis.
    pub rho: usize,
}

impl Default for SweepGrid {
    fn default() -> Self {
        SweepGrid { xy: 51, rho: 21 }
    }
}

fn linspace(a: f64, b: f64, m: usize) -> Vec<f64> {
    if m == 1 {
        return vec![0.5 * (a + b)];
    }
    (0..m).map(|i| a + (b - a) * i as f64 / (m - 1) as f64).collect()
}

#[derive(Clone, Copy)]
struct Worst {
    slack: f64,
    ratio: f64,
    at: (f64, f64, f64),
    points: usize,
}

impl Worst {
    fn empty() -> Self {
        Worst {
            slack: f64::INFINITY,
            ratio: 0.0,
            at: (f64::NAN, f64::NAN, f64::NAN),
            points: 0,
        }
    }

    fn point(lhs: f64, bound: f64, at: (f64, f64, f64)) -> Self {
        Worst {
            slack: bound - lhs,
            ratio: if bound > 0.0 { lhs / bound } else { 0.0 },
            at,
            points: 1,
        }
    }

    // Keeps the first point on exact ties so the report is order-independent
    // when combined in index order.
    fn merge(self, other: Self) -> Self {
        let (mut out, rest) = if other.slack < self.slack { (other, self) } else { (self, other) };
        out.ratio = out.ratio.max(rest.ratio);
        out.points = self.points + other.points;
        out
    }

    fn into_row(self, id: &'static str) -> SweepRow {
        SweepRow {
            id,
            worst_slack: self.slack,
            max_ratio: self.ratio,
            x: self.at.0,
            y: self.at.1,
            rho: self.at.2,
            points: self.points,
        }
    }
}

fn sweep<F>(items: Vec<(f64, f64, f64)>, f: F) -> Result<Worst>
where
    F: Fn(f64, f64, f64) -> Result<(f64, f64)> + Sync,
{
    let evals: Vec<Worst> = items
        .par_iter()
        .map(|&(x, y, r)| f(x, y, r).map(|(lhs, bound)| Worst::point(lhs, bound, (x, y, r))))
        .collect::<Result<_>>()?;
    Ok(evals.into_iter().fold(Worst::empty(), Worst::merge))
}

/// `max_y |Phi(y) - Phi(y sqrt(1 - rho^2))|` over a symmetric grid on
/// `[-10, 10]`, refined with the analytic maximiser.
pub fn phi_shift_gap(rho: f64, grid: usize) -> f64 {
    let a = ((1.0 - rho) * (1.0 + rho)).max(0.0).sqrt();
    let mut ys = linspace(-10.0, 10.0, grid.max(2));
    if rho != 0.0 && rho.abs() < 1.0 {
        let ystar = (-(a * a).ln()).sqrt() / rho.abs();
        ys.extend([ystar, -ystar]);
    }
    ys.iter()
        .map(|&y| (std_normal_cdf(y) - std_normal_cdf(y * a)).abs())
        .fold(0.0, f64::max)
}

/// Sweeps the kernel inequalities over grids on `[-4, 4]^2 x [-0.99, 0.99]`
/// (the `phi_shift` inequality uses `rho` in `[-1, 1]`).
pub fn inequality_sweep(grid: SweepGrid) -> Result<SweepReport> {
    if grid.xy < 2 || grid.rho < 2 {
        return Err(Error::InvalidArgument("sweep grids need at least 2 points".into()));
    }
    let xs = linspace(-4.0, 4.0, grid.xy);
    let rhos = linspace(-GBAR_RHO_MAX, GBAR_RHO_MAX, grid.rho);
    let mut cube = Vec::with_capacity(rhos.len() * xs.len() * xs.len());
    for &r in &rhos {
        for &x in &xs {
            for &y in &xs {
                cube.push((x, y, r));
            }
        }
    }
    let line: Vec<(f64, f64, f64)> = rhos
        .iter()
        .flat_map(|&r| xs.iter().map(move |&x| (x, 0.0, r)))
        .collect();

    let full_rho = linspace(-1.0, 1.0, 2 * grid.rho + 1);
    let ygrid = 40 * grid.xy + 1;
    let phi_shift = sweep(
        full_rho.iter().map(|&r| (0.0, 0.0, r)).collect(),
        |_, _, r| Ok((phi_shift_gap(r, ygrid), r.abs() / 2.0)),
    )?;

    let c1 = 2.0 / PI + 1.0;
    let g_bound = sweep(cube.clone(), |x, y, r| Ok((g_fn(x, y, r)?.abs(), c1 * r.abs())))?;
    let dg_bound = sweep(cube, |x, y, r| {
        let d = (g_fn(x + FD_STEP, y, r)? - g_fn(x - FD_STEP, y, r)?) / (2.0 * FD_STEP);
        Ok((d.abs(), r.abs()))
    })?;
    let c2 = SQRT_2 / PI + 0.5;
    let gbar_bound = sweep(line, |x, _, r| Ok((gbar(x, r)?.abs(), c2 * r.abs())))?;

    Ok(SweepReport {
        rows: vec![
            phi_shift.into_row("phi_shift_half_rho"),
            g_bound.into_row("g_abs_c1_rho"),
            dg_bound.into_row("dg_dx_abs_rho"),
            gbar_bound.into_row("gbar_abs_c2_rho"),
        ],
    })
}
