//! Adaptive Gauss-Kronrod (7/15) quadrature on finite intervals.

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss weights for the odd-indexed Kronrod nodes (1, 3, 5) and the centre.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Maximum number of interval bisections before giving up.
pub const MAX_INTERVALS: usize = 4000;

fn gk15(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for i in 0..7 {
        let dx = h * XGK[i];
        let s = f(c - dx) + f(c + dx);
        kron += WGK[i] * s;
        if i % 2 == 1 {
            gauss += WG[i / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

/// Integrates `f` over `[a, b]` to absolute tolerance `tol` by repeatedly
/// bisecting the interval with the largest error estimate.
pub fn integrate(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    let (v, e) = gk15(&mut f, a, b);
    let mut parts = vec![(a, b, v, e)];
    let mut total_err = e;
    while total_err > tol {
        if parts.len() >= MAX_INTERVALS {
            return Err(Error::QuadratureNoConvergence {
                tol,
                estimate: total_err,
            });
        }
        let (worst, _) = parts
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("nonempty");
        let (lo, hi, _, _) = parts.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        let l = gk15(&mut f, lo, mid);
        let r = gk15(&mut f, mid, hi);
        parts.push((lo, mid, l.0, l.1));
        parts.push((mid, hi, r.0, r.1));
        total_err = parts.iter().map(|p| p.3).sum();
    }
    let mut vals: Vec<(f64, f64)> = parts.iter().map(|p| (p.0, p.2)).collect();
    vals.sort_by(|x, y| x.0.total_cmp(&y.0));
    Ok(vals.iter().map(|p| p.1).sum())
}

/// [`integrate`] over consecutive pieces split at `breaks` (which must lie in
/// `[a, b]`), each piece getting an equal share of the tolerance.
pub fn integrate_split(
    mut f: impl FnMut(f64) -> f64,
    a: f64,
    b: f64,
    breaks: &[f64],
    tol: f64,
) -> Result<f64> {
    let mut pts = vec![a];
    let mut inner: Vec<f64> = breaks.iter().copied().filter(|&p| p > a && p < b).collect();
    inner.sort_by(f64::total_cmp);
    pts.extend(inner);
    pts.push(b);
    let share = tol / (pts.len() - 1) as f64;
    let mut sum = 0.0;
    for w in pts.windows(2) {
        sum += integrate(&mut f, w[0], w[1], share)?;
    }
    Ok(sum)
}
