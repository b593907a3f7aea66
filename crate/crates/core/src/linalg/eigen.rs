//! Symmetric eigensolvers.
//!
//! Cyclic Jacobi for `d <= JACOBI_MAX_DIM`, Householder tridiagonalisation
//! followed by implicit QL above that. Both paths are sequential and
//! deterministic.

use super::SymMatrix;
use crate::error::{Error, Result};

/// Largest dimension handled by the Jacobi path.
pub const JACOBI_MAX_DIM: usize = 64;

const JACOBI_REL_TOL: f64 = 1e-12;

/// Eigenvalues sorted in descending order with matching orthonormal
/// eigenvectors.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenDecomp {
    pub values: Vec<f64>,
    /// Column-major: eigenvector `j` occupies `vectors[j*d .. (j+1)*d]`.
    vectors: Vec<f64>,
}

impl EigenDecomp {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn vector(&self, j: usize) -> &[f64] {
        let d = self.dim();
        &self.vectors[j * d..(j + 1) * d]
    }

    /// `V diag(f(lambda)) V^T`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> SymMatrix {
        let d = self.dim();
        let w: Vec<f64> = self.values.iter().map(|&l| f(l)).collect();
        SymMatrix::from_upper_fn(d, |r, c| {
            (0..d).map(|j| w[j] * self.vector(j)[r] * self.vector(j)[c]).sum()
        })
    }

    pub fn reconstruct(&self) -> SymMatrix {
        self.reconstruct_with(|l| l)
    }
}

/// Full symmetric eigendecomposition.
///
/// Eigenvalues are sorted descending; equal eigenvalues keep the order of the
/// solver's basis columns. Each eigenvector is normalised so that its entry of
/// largest magnitude (lowest index on ties) is positive.
pub fn eig_sym(a: &SymMatrix) -> Result<EigenDecomp> {
    a.check_finite()?;
    let d = a.dim();
    let (values, vectors_rowmajor) = if a.is_zero() {
        (vec![0.0; d], SymMatrix::identity(d).as_slice().to_vec())
    } else if d <= JACOBI_MAX_DIM {
        jacobi(a)?
    } else {
        tridiagonal_ql(a)?
    };

    let mut order: Vec<usize> = (0..d).collect();
    // stable: ties keep ascending column index
    order.sort_by(|&i, &j| values[j].total_cmp(&values[i]));

    let mut sorted_values = Vec::with_capacity(d);
    let mut vectors = Vec::with_capacity(d * d);
    for &col in &order {
        sorted_values.push(values[col]);
        let start = vectors.len();
        vectors.extend((0..d).map(|r| vectors_rowmajor[r * d + col]));
        canonical_sign(&mut vectors[start..]);
    }
    Ok(EigenDecomp {
        values: sorted_values,
        vectors,
    })
}

/// Flip `v` so that its largest-magnitude entry is positive.
pub(crate) fn canonical_sign(v: &mut [f64]) {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v.get(best).is_some_and(|&x| x < 0.0) {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Returns (unsorted eigenvalues, row-major eigenvector matrix with vectors in
/// columns).
fn jacobi(input: &SymMatrix) -> Result<(Vec<f64>, Vec<f64>)> {
    let d = input.dim();
    let mut a = input.as_slice().to_vec();
    let mut v = SymMatrix::identity(d).as_slice().to_vec();
    let frob = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let threshold = JACOBI_REL_TOL * frob;
    let max_sweeps = 100 * d.max(1);

    let off = |a: &[f64]| -> f64 {
        let mut s = 0.0;
        for p in 0..d {
            for q in 0..d {
                if p != q {
                    s += a[p * d + q] * a[p * d + q];
                }
            }
        }
        s.sqrt()
    };

    for _ in 0..max_sweeps {
        if off(&a) <= threshold {
            return Ok(((0..d).map(|j| a[j * d + j]).collect(), v));
        }
        for p in 0..d {
            for q in (p + 1)..d {
                let apq = a[p * d + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * d + p];
                let aqq = a[q * d + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let tau = s / (1.0 + c);

                a[p * d + p] = app - t * apq;
                a[q * d + q] = aqq + t * apq;
                a[p * d + q] = 0.0;
                a[q * d + p] = 0.0;
                for r in 0..d {
                    if r == p || r == q {
                        continue;
                    }
                    let arp = a[r * d + p];
                    let arq = a[r * d + q];
                    let new_rp = arp - s * (arq + tau * arp);
                    let new_rq = arq + s * (arp - tau * arq);
                    a[r * d + p] = new_rp;
                    a[p * d + r] = new_rp;
                    a[r * d + q] = new_rq;
                    a[q * d + r] = new_rq;
                }
                for r in 0..d {
                    let vrp = v[r * d + p];
                    let vrq = v[r * d + q];
                    v[r * d + p] = vrp - s * (vrq + tau * vrp);
                    v[r * d + q] = vrq + s * (vrp - tau * vrq);
                }
            }
        }
    }
    if off(&a) <= threshold {
        return Ok(((0..d).map(|j| a[j * d + j]).collect(), v));
    }
    Err(Error::EigenNoConvergence {
        dim: d,
        sweeps: max_sweeps,
    })
}

/// Householder reduction to tridiagonal form followed by implicit QL with
/// Wilkinson-style shifts (EISPACK tred2/tql2 lineage).
fn tridiagonal_ql(input: &SymMatrix) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = input.dim();
    let mut v = input.as_slice().to_vec();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    let idx = |i: usize, j: usize| i * n + j;

    // tred2
    for j in 0..n {
        d[j] = v[idx(n - 1, j)];
    }
    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for k in 0..i {
            scale += d[k].abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[idx(i - 1, j)];
                v[idx(i, j)] = 0.0;
                v[idx(j, i)] = 0.0;
            }
        } else {
            for k in 0..i {
                d[k] /= scale;
                h += d[k] * d[k];
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = 0.0;
            }
            for j in 0..i {
                f = d[j];
                v[idx(j, i)] = f;
                g = e[j] + v[idx(j, j)] * f;
                for k in (j + 1)..i {
                    g += v[idx(k, j)] * d[k];
                    e[k] += v[idx(k, j)] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[idx(k, j)] -= f * e[k] + g * d[k];
                }
                d[j] = v[idx(i - 1, j)];
                v[idx(i, j)] = 0.0;
            }
        }
        d[i] = h;
    }
    for i in 0..n.saturating_sub(1) {
        v[idx(n - 1, i)] = v[idx(i, i)];
        v[idx(i, i)] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[idx(k, i + 1)] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v[idx(k, i + 1)] * v[idx(k, j)];
                }
                for k in 0..=i {
                    v[idx(k, j)] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[idx(k, i + 1)] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[idx(n - 1, j)];
        v[idx(n - 1, j)] = 0.0;
    }
    v[idx(n - 1, n - 1)] = 1.0;
    e[0] = 0.0;

    // tql2
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    let eps = f64::EPSILON;
    let max_iter = 30 * n;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > max_iter {
                    return Err(Error::EigenNoConvergence {
                        dim: n,
                        sweeps: max_iter,
                    });
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    for k in 0..n {
                        h = v[idx(k, i + 1)];
                        v[idx(k, i + 1)] = s * v[idx(k, i)] + c * h;
                        v[idx(k, i)] = c * v[idx(k, i)] - s * h;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok((d, v))
}
