use rankspec::copula::{realize_sigma, sample_latent, SigmaFamily, SigmaModel, Transform};
use rankspec::harness::{run_experiment, Estimator, ExperimentConfig, Functional};
use rankspec::kernel::delta1_matrix;

fn inversions(v: &[f64], increasing: bool) -> usize {
    v.windows(2).filter(|w| if increasing { w[1] <= w[0] } else { w[1] >= w[0] }).count()
}

#[test]
fn spectral_error_falls_in_n_and_grows_in_d() {
    let mut c = ExperimentConfig::new(SigmaFamily::Ar1 { r: 0.5 }, vec![100, 200, 400, 800], vec![5, 10, 20, 40]);
    c.reps = 12;
    c.seed = 31;
    c.transforms = vec![Transform::Cube, Transform::ExpShift];
    c.estimators = vec![Estimator::Tau, Estimator::Rho];
    let res = run_experiment(&c).unwrap();
    let summary = res.summary();
    let mean = |n: usize, d: usize, e: Estimator| summary.iter().find(|r| r.n == n && r.d == d && r.estimator == e).unwrap().mean;
    for e in [Estimator::Tau, Estimator::Rho] {
        for &d in &c.d_grid {
            let v: Vec<f64> = c.n_grid.iter().map(|&n| mean(n, d, e)).collect();
            assert!(inversions(&v, false) <= 1, "{e} d = {d}: {v:?}");
        }
        for &n in &c.n_grid {
            let v: Vec<f64> = c.d_grid.iter().map(|&d| mean(n, d, e)).collect();
            assert!(inversions(&v, true) <= 1, "{e} n = {n}: {v:?}");
        }
    }
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let mut c = ExperimentConfig::new(SigmaFamily::Spiked { lambda: 2.0, s: 3 }, vec![60, 120], vec![9]);
    c.reps = 6;
    c.seed = 4;
    c.estimators = vec![Estimator::Tau, Estimator::Rho, Estimator::Oracle];
    c.functionals = vec![Functional::SpecErr, Functional::SinAngleSparse { s: 3 }, Functional::ProjDist { k: 1 }];
    let run = |t: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .unwrap()
            .install(|| run_experiment(&c).unwrap())
    };
    let csv = |r: &rankspec::harness::ExperimentResult| {
        let mut buf = Vec::new();
        r.write_records_csv(&mut buf).unwrap();
        r.write_failures_csv(&mut buf).unwrap();
        buf
    };
    let one = run(1);
    assert!(one.failures.is_empty(), "{:?}", one.failures);
    assert_eq!(csv(&one), csv(&run(4)));
    assert_eq!(csv(&one), csv(&run_experiment(&c).unwrap()));
}

#[test]
fn first_order_projection_is_centred() {
    // E Delta1 = 0: the replicate average shrinks like 1/sqrt(reps * n)
    let sigma = realize_sigma(&SigmaModel::new(SigmaFamily::Compound { r: 0.5 }, 3).unwrap()).unwrap();
    let reps = 200;
    let mut acc = [0.0f64; 3];
    for r in 0..reps {
        let x = sample_latent(&sigma, 200, 1000 + r).unwrap();
        let d1 = delta1_matrix(&x, &sigma).unwrap();
        acc[0] += d1.get(0, 1);
        acc[1] += d1.get(0, 2);
        acc[2] += d1.get(1, 2);
    }
    for a in acc {
        // per-entry sd of Delta1 is at most 1/sqrt(n); 5 sd of the grand mean
        assert!((a / reps as f64).abs() < 5.0 / (200.0 * reps as f64).sqrt(), "{acc:?}");
    }
}
