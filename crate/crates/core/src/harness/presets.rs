//! Canned experiment grids with the analyses each one is judged by.

use super::{run_experiment, Axis, Bandwidth, Bound, Estimator, ExperimentConfig, ExperimentResult, Functional};
use crate::copula::{SigmaFamily, Transform};
use crate::error::{Error, Result};

/// A committed Monte Carlo baseline: value and its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Golden {
    pub value: f64,
    pub se: f64,
}

impl Golden {
    /// `max(20%, 4 se)` band half-width.
    pub fn tolerance(&self) -> f64 {
        (0.2 * self.value.abs()).max(4.0 * self.se)
    }

    pub fn ceiling(&self) -> f64 {
        self.value + self.tolerance()
    }

    pub fn floor(&self) -> f64 {
        self.value - self.tolerance()
    }
}

// Pilot baselines at triple replicate counts; regenerate with
// `cargo test -p rankspec --test acceptance -- --ignored pilot --nocapture`.
pub const GOLDEN_THM1_TAU_RATIO: Golden = Golden { value: 0.650705, se: 0.008098 };
pub const GOLDEN_THM1_RHO_RATIO: Golden = Golden { value: 0.652181, se: 0.008090 };
pub const GOLDEN_THM2_Q95_RATIO: Golden = Golden { value: 1.619953, se: 0.017278 };
pub const GOLDEN_THM5_SUPPORT_RECOVERY: Golden = Golden { value: 1.0, se: 0.0 };

/// Bandable amplitude used by the taper study (just under `c_max(1)`).
pub const THM3_C: f64 = 0.27;
/// Fixed sample size for the taper bias-variance curve.
pub const THM3_CURVE_N: usize = 1200;
pub const THM3_CURVE_K: [usize; 7] = [1, 2, 4, 8, 16, 32, 64];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stat {
    Mean,
    Median,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Analysis {
    /// Log-log slope of the mean along `vary`, gated to `range`.
    Rate {
        functional: String,
        estimator: Estimator,
        vary: Axis,
        target: f64,
        range: Option<(f64, f64)>,
    },
    /// Largest observed/bound ratio, gated by `ceiling`.
    Ratio {
        functional: String,
        estimator: Estimator,
        bound: Bound,
        ceiling: Option<f64>,
    },
    /// The statistic should move monotonically in `n`, allowing a few
    /// inversions.
    Monotone {
        functional: String,
        estimator: Estimator,
        stat: Stat,
        decreasing: bool,
        inversions: usize,
    },
    /// Mean of `taper_err(k)` over `ks` at sample size `n` should be minimal
    /// at an interior `k`.
    InteriorMinimum {
        ks: Vec<usize>,
        estimator: Estimator,
        n: usize,
    },
    /// Mean at sample size `n` should be at least `floor`.
    AtLeast {
        functional: String,
        estimator: Estimator,
        n: usize,
        floor: Option<f64>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub label: String,
    pub value: f64,
    pub stderr: f64,
    pub detail: String,
    /// `None` when the analysis has no gate.
    pub pass: Option<bool>,
}

impl Analysis {
    fn label(&self) -> String {
        match self {
            Analysis::Rate { functional, estimator, .. } => format!("slope {functional}/{estimator}"),
            Analysis::Ratio { functional, estimator, bound, .. } => {
                format!("ratio {functional}/{estimator} to {}", bound.name())
            }
            Analysis::Monotone { functional, estimator, stat, .. } => format!("{stat:?} {functional}/{estimator} in n"),
            Analysis::InteriorMinimum { n, .. } => format!("taper error minimiser over k at n = {n}"),
            Analysis::AtLeast { functional, estimator, n, .. } => format!("mean {functional}/{estimator} at n = {n}"),
        }
    }

    pub fn evaluate(&self, res: &ExperimentResult) -> Result<Outcome> {
        match self {
            Analysis::Rate {
                functional,
                estimator,
                vary,
                target,
                range,
            } => {
                let fit = res.rate_fit(functional, *estimator, *vary, None)?;
                let axis = if *vary == Axis::N { "n" } else { "d" };
                Ok(Outcome {
                    label: format!("slope {functional}/{estimator} vs {axis}"),
                    value: fit.slope,
                    stderr: fit.stderr,
                    detail: match range {
                        Some((lo, hi)) => format!("target {target}; gate [{lo}, {hi}]"),
                        None => format!("target {target}"),
                    },
                    pass: range.map(|(lo, hi)| fit.slope >= lo && fit.slope <= hi),
                })
            }
            Analysis::Ratio {
                functional,
                estimator,
                bound,
                ceiling,
            } => {
                let r = res.bound_ratio(functional, *estimator, *bound)?;
                Ok(Outcome {
                    label: format!("ratio {functional}/{estimator} to {}", bound.name()),
                    value: r,
                    stderr: f64::NAN,
                    detail: ceiling.map_or("no gate".into(), |c| format!("ceiling {c}")),
                    pass: ceiling.map(|c| r <= c),
                })
            }
            Analysis::Monotone {
                functional,
                estimator,
                stat,
                decreasing,
                inversions,
            } => {
                let vals: Vec<f64> = rows_by_n(res, functional, *estimator)
                    .iter()
                    .map(|r| if *stat == Stat::Mean { r.mean } else { r.q50 })
                    .collect();
                let bad = vals
                    .windows(2)
                    .filter(|w| if *decreasing { w[1] >= w[0] } else { w[1] <= w[0] })
                    .count();
                Ok(Outcome {
                    label: format!(
                        "{:?} {functional}/{estimator} {} in n",
                        stat,
                        if *decreasing { "decreasing" } else { "increasing" }
                    ),
                    value: bad as f64,
                    stderr: f64::NAN,
                    detail: format!("inversions allowed {inversions}; values {vals:?}"),
                    pass: Some(bad <= *inversions),
                })
            }
            Analysis::InteriorMinimum { ks, estimator, n } => {
                let summary = res.summary();
                let means: Vec<f64> = ks
                    .iter()
                    .map(|&k| {
                        let name = Functional::TaperErr(Bandwidth::Fixed(k)).name();
                        summary
                            .iter()
                            .find(|r| r.n == *n && r.estimator == *estimator && r.functional == name)
                            .map(|r| r.mean)
                            .ok_or_else(|| Error::InvalidArgument(format!("no rows for {name} at n = {n}")))
                    })
                    .collect::<Result<_>>()?;
                let (argmin, _) = means
                    .iter()
                    .enumerate()
                    .min_by(|a, b| a.1.total_cmp(b.1))
                    .expect("nonempty k grid");
                Ok(Outcome {
                    label: format!("taper error minimiser over k at n = {n}"),
                    value: ks[argmin] as f64,
                    stderr: f64::NAN,
                    detail: format!("k grid {ks:?}; means {means:?}"),
                    pass: Some(argmin > 0 && argmin + 1 < ks.len()),
                })
            }
            Analysis::AtLeast {
                functional,
                estimator,
                n,
                floor,
            } => {
                let row = rows_by_n(res, functional, *estimator)
                    .into_iter()
                    .find(|r| r.n == *n)
                    .ok_or_else(|| Error::InvalidArgument(format!("no rows for {functional} at n = {n}")))?;
                Ok(Outcome {
                    label: format!("mean {functional}/{estimator} at n = {n}"),
                    value: row.mean,
                    stderr: row.se,
                    detail: floor.map_or("no gate".into(), |f| format!("floor {f}")),
                    pass: floor.map(|f| row.mean >= f),
                })
            }
        }
    }
}

fn rows_by_n(res: &ExperimentResult, functional: &str, estimator: Estimator) -> Vec<super::SummaryRow> {
    let mut rows: Vec<_> = res
        .summary()
        .into_iter()
        .filter(|r| r.functional == functional && r.estimator == estimator)
        .collect();
    rows.sort_by_key(|r| r.n);
    rows
}

#[derive(Debug, Clone, PartialEq)]
pub struct Preset {
    pub name: &'static str,
    pub config: ExperimentConfig,
    pub analyses: Vec<Analysis>,
}

pub const PRESET_NAMES: [&str; 5] = ["thm1", "thm2", "thm3", "thm4", "thm5"];

fn ceiling_of(g: Golden) -> Option<f64> {
    (g.value > 0.0).then(|| g.ceiling())
}

fn floor_of(g: Golden) -> Option<f64> {
    (g.value > 0.0).then(|| g.floor())
}

const MIXED: [Transform; 4] = [Transform::Cube, Transform::ExpShift, Transform::LogitIsh, Transform::Identity];

pub fn preset(name: &str) -> Result<Preset> {
    let p = match name {
        "thm1" => {
            let mut c = ExperimentConfig::new(SigmaFamily::Ar1 { r: 0.5 }, vec![250, 500, 1000, 2000, 4000], vec![10]);
            c.reps = 100;
            c.seed = 1;
            c.transforms = MIXED.to_vec();
            c.estimators = vec![Estimator::Tau, Estimator::Rho, Estimator::Oracle];
            c.functionals = vec![Functional::SpecErr, Functional::MaxErr];
            let rate = |e| Analysis::Rate {
                functional: "spec_err".into(),
                estimator: e,
                vary: Axis::N,
                target: -0.5,
                range: Some((-0.65, -0.35)),
            };
            Preset {
                name: "thm1",
                config: c,
                analyses: vec![
                    rate(Estimator::Tau),
                    rate(Estimator::Rho),
                    Analysis::Ratio {
                        functional: "spec_err".into(),
                        estimator: Estimator::Tau,
                        bound: Bound::Thm1,
                        ceiling: ceiling_of(GOLDEN_THM1_TAU_RATIO),
                    },
                    Analysis::Ratio {
                        functional: "spec_err".into(),
                        estimator: Estimator::Rho,
                        bound: Bound::Thm1,
                        ceiling: ceiling_of(GOLDEN_THM1_RHO_RATIO),
                    },
                    Analysis::Ratio {
                        functional: "spec_err".into(),
                        estimator: Estimator::Oracle,
                        bound: Bound::ExplicitOracle,
                        ceiling: Some(1.05),
                    },
                    Analysis::Monotone {
                        functional: "spec_err".into(),
                        estimator: Estimator::Tau,
                        stat: Stat::Mean,
                        decreasing: true,
                        inversions: 1,
                    },
                ],
            }
        }
        "thm2" => {
            let mut c = ExperimentConfig::new(SigmaFamily::Ar1 { r: 0.5 }, vec![2000], vec![30]);
            c.reps = 200;
            c.seed = 2;
            c.transforms = MIXED.to_vec();
            c.functionals = vec![Functional::SparseSpecErr { s: 3 }];
            Preset {
                name: "thm2",
                config: c,
                analyses: vec![Analysis::Ratio {
                    functional: "sparse_spec_err(3)".into(),
                    estimator: Estimator::Tau,
                    bound: Bound::Thm2 { s: 3, t: 20f64.ln() },
                    ceiling: ceiling_of(GOLDEN_THM2_Q95_RATIO),
                }],
            }
        }
        "thm3" => {
            let family = SigmaFamily::Bandable { alpha: 1.0, c: THM3_C };
            let mut c = ExperimentConfig::new(family, vec![300, 600, 1200, 2400, 4800, 9600], vec![64]);
            c.reps = 50;
            c.seed = 3;
            c.transforms = MIXED.to_vec();
            c.functionals = vec![Functional::TaperErr(Bandwidth::Auto { alpha: 1.0 })];
            c.functionals
                .extend(THM3_CURVE_K.iter().map(|&k| Functional::TaperErr(Bandwidth::Fixed(k))));
            Preset {
                name: "thm3",
                config: c,
                analyses: vec![
                    Analysis::Rate {
                        functional: "taper_err(alpha=1)".into(),
                        estimator: Estimator::Tau,
                        vary: Axis::N,
                        target: -2.0 / 3.0,
                        range: Some((-0.87, -0.47)),
                    },
                    Analysis::InteriorMinimum {
                        ks: THM3_CURVE_K.to_vec(),
                        estimator: Estimator::Tau,
                        n: THM3_CURVE_N,
                    },
                ],
            }
        }
        "thm4" => {
            let family = SigmaFamily::Spiked { lambda: 2.0, s: 3 };
            let mut c = ExperimentConfig::new(family, vec![200, 400, 800, 1600, 3200], vec![30]);
            c.reps = 50;
            c.seed = 4;
            c.transforms = MIXED.to_vec();
            c.estimators = vec![Estimator::Tau, Estimator::Rho];
            c.functionals = vec![Functional::ProjDist { k: 1 }];
            let rate = |e| Analysis::Rate {
                functional: "proj_dist(1)".into(),
                estimator: e,
                vary: Axis::N,
                target: -0.5,
                range: None,
            };
            Preset {
                name: "thm4",
                config: c,
                analyses: vec![rate(Estimator::Tau), rate(Estimator::Rho)],
            }
        }
        "thm5" => {
            let family = SigmaFamily::Spiked { lambda: 2.0, s: 3 };
            let mut c = ExperimentConfig::new(family, vec![200, 400, 800, 1600, 3200], vec![30]);
            c.reps = 50;
            c.seed = 5;
            c.transforms = MIXED.to_vec();
            c.functionals = vec![Functional::SinAngleSparse { s: 3 }, Functional::SupportRecovery { s: 3 }];
            Preset {
                name: "thm5",
                config: c,
                analyses: vec![
                    Analysis::Monotone {
                        functional: "sin_angle_sparse(3)".into(),
                        estimator: Estimator::Tau,
                        stat: Stat::Median,
                        decreasing: true,
                        inversions: 1,
                    },
                    Analysis::Rate {
                        functional: "sin_angle_sparse(3)".into(),
                        estimator: Estimator::Tau,
                        vary: Axis::N,
                        target: -0.5,
                        range: Some((-0.7, -0.3)),
                    },
                    Analysis::AtLeast {
                        functional: "support_recovery(3)".into(),
                        estimator: Estimator::Tau,
                        n: 3200,
                        floor: floor_of(GOLDEN_THM5_SUPPORT_RECOVERY),
                    },
                ],
            }
        }
        other => {
            return Err(Error::InvalidConfig(format!(
                "unknown preset {other:?}; expected one of {}",
                PRESET_NAMES.join(", ")
            )))
        }
    };
    Ok(p)
}

/// Runs a preset and evaluates its analyses. An analysis the (possibly
/// overridden) grid cannot support is reported ungated with a NaN value.
pub fn run_preset(p: &Preset) -> Result<(ExperimentResult, Vec<Outcome>)> {
    let res = run_experiment(&p.config)?;
    let outcomes = p
        .analyses
        .iter()
        .map(|a| {
            a.evaluate(&res).unwrap_or_else(|e| Outcome {
                label: a.label(),
                value: f64::NAN,
                stderr: f64::NAN,
                detail: format!("not evaluated: {e}"),
                pass: None,
            })
        })
        .collect();
    Ok((res, outcomes))
}

pub fn write_outcomes_csv(outcomes: &[Outcome], mut w: impl std::io::Write) -> Result<()> {
    writeln!(w, "analysis,value,stderr,pass,detail")?;
    for o in outcomes {
        let pass = o.pass.map_or(String::new(), |p| p.to_string());
        writeln!(
            w,
            "{},{},{},{},\"{}\"",
            o.label,
            super::fmt_f64(o.value),
            super::fmt_f64(o.stderr),
            pass,
            o.detail.replace('"', "'")
        )?;
    }
    Ok(())
}
