//! Independent reference implementations for the integration tests.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rankspec::copula::DataMatrix;
use rankspec::linalg::SymMatrix;
use rankspec::quad;

fn sgn(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Kendall's tau by the O(n^2) double loop.
pub fn naive_kendall(y: &DataMatrix) -> SymMatrix {
    let n = y.n();
    SymMatrix::from_upper_fn(y.d(), |j, k| {
        if j == k {
            return 1.0;
        }
        let (a, b) = (y.column(j), y.column(k));
        let mut s = 0.0;
        for i1 in 0..n {
            for i2 in (i1 + 1)..n {
                s += sgn(a[i1] - a[i2]) * sgn(b[i1] - b[i2]);
            }
        }
        let nf = n as f64;
        2.0 / (nf * (nf - 1.0)) * s
    })
}

/// Ranks by counting smaller entries.
pub fn counting_ranks(col: &[f64]) -> Vec<f64> {
    col.iter()
        .map(|&v| 1.0 + col.iter().filter(|&&w| w < v).count() as f64)
        .collect()
}

/// Spearman's rho as the Pearson correlation of the ranks.
pub fn naive_spearman(y: &DataMatrix) -> SymMatrix {
    let n = y.n() as f64;
    let centred: Vec<Vec<f64>> = y
        .columns()
        .map(|c| counting_ranks(c).into_iter().map(|r| r - (n + 1.0) / 2.0).collect())
        .collect();
    SymMatrix::from_upper_fn(y.d(), |j, k| {
        if j == k {
            return 1.0;
        }
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        let num = dot(&centred[j], &centred[k]);
        num / (dot(&centred[j], &centred[j]) * dot(&centred[k], &centred[k])).sqrt()
    })
}

/// Order-3 U-statistic with kernel `3 sgn(x1j - x2j) sgn(x1k - x3k)` over
/// distinct ordered triples.
pub fn spearman_u3(y: &DataMatrix, j: usize, k: usize) -> f64 {
    let n = y.n();
    let (a, b) = (y.column(j), y.column(k));
    let mut s = 0.0;
    for i1 in 0..n {
        for i2 in 0..n {
            if i2 == i1 {
                continue;
            }
            let left = sgn(a[i1] - a[i2]);
            for i3 in 0..n {
                if i3 == i1 || i3 == i2 {
                    continue;
                }
                s += 3.0 * left * sgn(b[i1] - b[i3]);
            }
        }
    }
    let nf = n as f64;
    s / (nf * (nf - 1.0) * (nf - 2.0))
}

/// Random tie-free matrix with the given shape.
pub fn random_data(rng: &mut ChaCha8Rng, n: usize, d: usize) -> DataMatrix {
    loop {
        let cols: Vec<Vec<f64>> = (0..d)
            .map(|_| (0..n).map(|_| rng.random_range(-3.0..3.0)).collect())
            .collect();
        let m = DataMatrix::from_columns(cols).unwrap();
        if m.first_tied_column().is_none() {
            return m;
        }
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn bvn_density(u: f64, v: f64, rho: f64) -> f64 {
    let q = 1.0 - rho * rho;
    (-(u * u - 2.0 * rho * u * v + v * v) / (2.0 * q)).exp() / (2.0 * std::f64::consts::PI * q.sqrt())
}

const L: f64 = 8.5;

/// `int int sgn(x - u) sgn(y - v) phi_rho(u, v) du dv` by nested adaptive
/// quadrature, split at the sign changes.
pub fn hbar_by_quadrature(x: f64, y: f64, rho: f64) -> f64 {
    let inner = |u: f64| {
        quad::integrate_split(|v| sgn(y - v) * bvn_density(u, v, rho), -L, L, &[y, rho * u], 1e-13).unwrap()
    };
    quad::integrate_split(|u| sgn(x - u) * inner(u), -L, L, &[x, y / rho.abs().max(1e-3)], 1e-11).unwrap()
}

/// `int int sgn(x - u) (1 - 2 Phi(v)) phi_rho(u, v) du dv`: the kernel
/// averaged over an independent standard normal second argument.
pub fn gbar_by_quadrature(x: f64, rho: f64) -> f64 {
    let phi = |t: f64| 0.5 * libm_erfc(-t / std::f64::consts::SQRT_2);
    let inner = |u: f64| {
        quad::integrate_split(|v| (1.0 - 2.0 * phi(v)) * bvn_density(u, v, rho), -L, L, &[rho * u], 1e-13).unwrap()
    };
    quad::integrate_split(|u| sgn(x - u) * inner(u), -L, L, &[x], 1e-11).unwrap()
}

/// Complementary error function by continued fraction / series (independent
/// of the library's normal CDF).
pub fn libm_erfc(x: f64) -> f64 {
    if x < 0.0 {
        return 2.0 - libm_erfc(-x);
    }
    if x < 2.0 {
        // erf series
        let mut term = x;
        let mut sum = x;
        let x2 = x * x;
        for k in 1..200 {
            term *= -x2 / k as f64;
            let add = term / (2 * k + 1) as f64;
            sum += add;
            if add.abs() < 1e-18 * sum.abs() {
                break;
            }
        }
        1.0 - 2.0 / std::f64::consts::PI.sqrt() * sum
    } else {
        // Lentz continued fraction
        let tiny = 1e-300;
        let mut f = x;
        let mut c = x;
        let mut d = 0.0;
        for k in 1..500 {
            let a = k as f64 / 2.0;
            d = x + a * d;
            d = if d.abs() < tiny { tiny } else { d };
            c = x + a / c;
            c = if c.abs() < tiny { tiny } else { c };
            d = 1.0 / d;
            let delta = c * d;
            f *= delta;
            if (delta - 1.0).abs() < 1e-16 {
                break;
            }
        }
        (-x * x).exp() / (f * std::f64::consts::PI.sqrt())
    }
}
