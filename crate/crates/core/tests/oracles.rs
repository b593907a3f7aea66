mod common;

use common::*;
use proptest::prelude::*;
use rankspec::copula::{apply_transforms, realize_sigma, sample_latent, SigmaFamily, SigmaModel, Transform, TransformSet};
use rankspec::kernel::{binorm_cdf, gbar, hbar, std_normal_cdf};
use rankspec::linalg::{eig_sym, spectral_norm, SymMatrix};
use rankspec::rank::{kendall_tau_matrix, oracle_sample_corr, rho_pop, spearman_rho_matrix, tau_pop};
use std::f64::consts::PI;

#[test]
fn oracle_sample_corr_matches_direct_sums() {
    let mut r = rng(11);
    let x = random_data(&mut r, 5, 3);
    let m = oracle_sample_corr(&x);
    for j in 0..3 {
        for k in 0..3 {
            let mut s = 0.0;
            for i in 0..5 {
                s += x.get(i, j) * x.get(i, k);
            }
            assert!((m.get(j, k) - s / 5.0).abs() < 1e-15);
        }
    }
}

#[test]
fn reference_erfc_agrees_with_library_cdf() {
    for i in -80..=80 {
        let x = i as f64 / 10.0;
        let reference = 0.5 * libm_erfc(-x / std::f64::consts::SQRT_2);
        assert!((reference - std_normal_cdf(x)).abs() < 1e-15, "{x}");
    }
    assert!((0.5 * libm_erfc(-1.0 / std::f64::consts::SQRT_2) - 0.841_344_746_068_542_9).abs() < 1e-15);
}

#[test]
fn hbar_examples_against_quadrature() {
    assert!((hbar(0.7, -0.3, 0.6).unwrap() - hbar_by_quadrature(0.7, -0.3, 0.6)).abs() < 1e-8);
    assert!((binorm_cdf(0.0, 0.0, 0.5).unwrap() - 1.0 / 3.0).abs() < 1e-15);
}

#[test]
fn gbar_against_two_dimensional_quadrature() {
    let got = gbar(1.0, 0.5).unwrap();
    assert!((got - gbar_by_quadrature(1.0, 0.5)).abs() < 1e-7, "{got}");
}

#[test]
fn hbar_identity_mean_matches_rho_over_three() {
    // E hbar(X_j, X_k, 0) = rho_jk / 3
    for &r in &[0.0, 0.3, 0.8] {
        let model = SigmaModel::new(SigmaFamily::Compound { r }, 2).unwrap();
        let sigma = realize_sigma(&model).unwrap();
        let x = sample_latent(&sigma, 1_000_000, 99).unwrap();
        let mean = x
            .column(0)
            .iter()
            .zip(x.column(1))
            .map(|(&a, &b)| hbar(a, b, 0.0).unwrap())
            .sum::<f64>()
            / x.n() as f64;
        let target = rho_pop(&sigma).get(0, 1) / 3.0;
        assert!((mean - target).abs() < 0.005, "{r}: {mean} vs {target}");
    }
}

#[test]
fn sine_ordering_on_grid() {
    for i in 0..=10_000 {
        let x = PI / 2.0 * i as f64 / 10_000.0;
        let (a, b, c) = ((2.0 * x / 3.0).sin(), 2.0 * (x / 3.0).sin(), x.sin());
        assert!(a <= b + 1e-15 && b <= c + 1e-15, "{x}");
    }
}

fn families() -> Vec<SigmaFamily> {
    vec![
        SigmaFamily::Ar1 { r: 0.6 },
        SigmaFamily::Compound { r: 0.4 },
        SigmaFamily::Bandable { alpha: 1.0, c: 0.25 },
        SigmaFamily::Spiked { lambda: 2.0, s: 3 },
    ]
}

#[test]
fn population_rank_matrices_dominate_scaled_sigma() {
    for fam in families() {
        for d in [5, 20, 50] {
            let sigma = realize_sigma(&SigmaModel::new(fam, d).unwrap()).unwrap();
            let s = sigma.as_sym();
            let t = tau_pop(&sigma);
            let r = rho_pop(&sigma);
            let min_eig = |m: &SymMatrix| *eig_sym(m).unwrap().values.last().unwrap();
            assert!(min_eig(&t.sub(&s.scale(2.0 / PI)).unwrap()) >= -1e-9, "{fam} {d}");
            assert!(min_eig(&r.sub(&s.scale(3.0 / PI)).unwrap()) >= -1e-9, "{fam} {d}");
            let ns = spectral_norm(s).unwrap();
            assert!(spectral_norm(&t).unwrap() <= ns + 1e-9);
            assert!(spectral_norm(&r).unwrap() <= ns + 1e-9);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fast_rank_matrices_equal_definitions(seed in any::<u64>(), n in 2usize..60, d in 1usize..8) {
        let y = random_data(&mut rng(seed), n, d);
        prop_assert_eq!(kendall_tau_matrix(&y).unwrap().values, naive_kendall(&y));
        prop_assert_eq!(spearman_rho_matrix(&y).unwrap().values, naive_spearman(&y));
    }

    #[test]
    fn spearman_splits_into_u_statistic_and_tau(seed in any::<u64>(), n in 3usize..20) {
        let y = random_data(&mut rng(seed), n, 2);
        let rho = spearman_rho_matrix(&y).unwrap().values.get(0, 1);
        let tau = kendall_tau_matrix(&y).unwrap().values.get(0, 1);
        let nf = n as f64;
        let rhs = (nf - 2.0) / (nf + 1.0) * spearman_u3(&y, 0, 1) + 3.0 / (nf + 1.0) * tau;
        prop_assert!((rho - rhs).abs() <= 1e-12);
    }

    #[test]
    fn monotone_transforms_leave_rank_matrices_unchanged(seed in any::<u64>(), n in 2usize..200, d in 1usize..6) {
        let sigma = realize_sigma(&SigmaModel::new(SigmaFamily::Ar1 { r: 0.5 }, d).unwrap()).unwrap();
        let x = sample_latent(&sigma, n, seed).unwrap();
        let t = TransformSet::cycled(&[Transform::Cube, Transform::ExpShift, Transform::LogitIsh], d);
        let y = apply_transforms(&x, &t).unwrap();
        prop_assert_eq!(kendall_tau_matrix(&x).unwrap(), kendall_tau_matrix(&y).unwrap());
        prop_assert_eq!(spearman_rho_matrix(&x).unwrap(), spearman_rho_matrix(&y).unwrap());
    }
}
