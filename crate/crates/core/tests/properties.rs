use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use twinsqueeze::dispersion::{refractive_index, Polarization, Sellmeier};
use twinsqueeze::linalg::{
    c, diag_real, max_abs, random_complex, random_hermitian, random_symmetric, random_unitary, unitarity_deviation,
    CMat,
};
use twinsqueeze::mehler::{evaluate_kernel_lhs, evaluate_kernel_sum, mehler_factors, GaussianModelParams};
use twinsqueeze::pdc::{build_squeezing_matrix, CrystalConfig, FrequencyGrid, PumpConfig};
use twinsqueeze::symplectic::{compose, exponentiate_generator, GeneratorMatrix};
use twinsqueeze::takagi::{takagi, takagi_general, takagi_residual};
use twinsqueeze::twinbeam::{
    associated_spectral, eigenmodes_from_schmidt, orthonormality_deviation, rotate_pair, schmidt_from_jsa,
    JointSpectralAmplitude,
};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_jsa(m: usize, seed: u64) -> JointSpectralAmplitude {
    let mut r = rng(seed);
    JointSpectralAmplitude {
        j_matrix: random_complex(m, m, &mut r),
        signal_grid: (0..m).map(|k| 1.0 + k as f64).collect(),
        idler_grid: (0..m).map(|k| -(m as f64) + k as f64).collect(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn generators_exponentiate_to_symplectic(n in 1usize..10, seed in any::<u64>(), scale in 0.05f64..1.0) {
        let mut r = rng(seed);
        let s = c(scale, 0.0);
        let g = GeneratorMatrix::new(random_hermitian(n, &mut r) * s, random_symmetric(n, &mut r) * s).unwrap();
        let m = exponentiate_generator(&g).unwrap();
        prop_assert!(m.residual() < 1e-10);
        let id = compose(&m, &m.inverse()).unwrap();
        prop_assert!(max_abs(&(id.s0() - CMat::identity(n, n))) < 1e-10);
        prop_assert!(max_abs(id.s_i()) < 1e-10);
    }

    #[test]
    fn takagi_reconstructs(n in 1usize..24, seed in any::<u64>()) {
        let a = random_symmetric(n, &mut rng(seed));
        let f = takagi_general(&a).unwrap();
        prop_assert!(takagi_residual(&a, &f) < 1e-10);
        prop_assert!(unitarity_deviation(&f.v) < 1e-12);
        prop_assert!(f.r.windows(2).all(|w| w[0] >= w[1]) && f.r.iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn takagi_values_are_singular_values(n in 1usize..16, seed in any::<u64>()) {
        let a = random_symmetric(n, &mut rng(seed));
        let f = takagi(&a, 1e-10).unwrap();
        let mut sv: Vec<f64> = a.clone().singular_values().iter().copied().collect();
        sv.sort_by(|x, y| y.partial_cmp(x).unwrap());
        for (x, y) in f.r.iter().zip(&sv) {
            prop_assert!((x - y).abs() < 1e-10 * sv[0].max(1.0));
        }
    }

    #[test]
    fn takagi_recovers_constructed_degenerate(n in 2usize..20, seed in any::<u64>(), levels in 1usize..4) {
        let mut r = rng(seed);
        let w = random_unitary(n, &mut r);
        let d: Vec<f64> = (0..n).map(|k| (levels - k % levels) as f64).collect();
        let a = &w * diag_real(&d) * w.transpose();
        let f = takagi_general(&a).unwrap();
        prop_assert!(takagi_residual(&a, &f) < 1e-10);
        let mut sorted = d.clone();
        sorted.sort_by(|x, y| y.partial_cmp(x).unwrap());
        for (x, y) in f.r.iter().zip(&sorted) {
            prop_assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn twin_beam_values_come_in_exact_pairs(m in 1usize..12, seed in any::<u64>()) {
        let jsa = random_jsa(m, seed);
        let f = takagi_general(&jsa.block_matrix()).unwrap();
        let r1 = f.r[0];
        for k in 0..m {
            prop_assert!((f.r[2 * k] - f.r[2 * k + 1]).abs() <= 1e-12 * r1.max(1.0) * 10.0);
        }
    }

    #[test]
    fn schmidt_and_associated_paths_agree(m in 1usize..10, seed in any::<u64>()) {
        let jsa = random_jsa(m, seed);
        let gamma = jsa.block_matrix();
        let a = eigenmodes_from_schmidt(&schmidt_from_jsa(&jsa).unwrap());
        let b = associated_spectral(&gamma).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            prop_assert!((x - y).abs() < 1e-10);
        }
        prop_assert!(takagi_residual(&gamma, &a.factors()) < 1e-10);
        prop_assert!(takagi_residual(&gamma, &b.factors()) < 1e-10);
        prop_assert!(orthonormality_deviation(&a.modes) < 1e-12);
    }

    #[test]
    fn pair_rotation_is_a_gauge(m in 1usize..8, seed in any::<u64>(), phi in -3.2f64..3.2) {
        let jsa = random_jsa(m, seed);
        let gamma = jsa.block_matrix();
        let s = eigenmodes_from_schmidt(&schmidt_from_jsa(&jsa).unwrap());
        let rotated = rotate_pair(&s, 0, phi).unwrap();
        prop_assert!(takagi_residual(&gamma, &rotated.factors()) < 1e-10);
    }

    #[test]
    fn mehler_factors_invariants(mu in 0.1f64..5.0, nu in 0.1f64..5.0, t in -0.95f64..0.95, xi in -4.0f64..4.0) {
        let g = GaussianModelParams { mu, nu, eta: t * (mu * nu).sqrt(), xi };
        let f = mehler_factors(&g).unwrap();
        prop_assert!((f.p * f.p + f.q * f.q - 1.0).abs() < 1e-12);
        prop_assert!(((f.p_c() * f.p_c() + f.q_c() * f.q_c()).norm() - 1.0).abs() < 1e-12);
        prop_assert!(f.q >= 0.0 && f.q < 1.0 && f.tau1 > 0.0 && f.tau2 > 0.0);
        prop_assert!(f.theta0 > -std::f64::consts::PI && f.theta0 <= std::f64::consts::PI);
    }

    #[test]
    fn mehler_series_converges_for_moderate_q(mu in 0.5f64..2.0, nu in 0.5f64..2.0, t in -0.6f64..0.6, xi in -0.6f64..0.6, x in -3.0f64..3.0, y in -3.0f64..3.0) {
        let g = GaussianModelParams { mu, nu, eta: t * (mu * nu).sqrt(), xi };
        let f = mehler_factors(&g).unwrap();
        prop_assume!(f.q < 0.5);
        let (s, bound) = evaluate_kernel_sum(&f, x, y, 80);
        prop_assert!((s - evaluate_kernel_lhs(&g, x, y)).norm() <= bound + 1e-13);
    }

    #[test]
    fn squeezing_matrix_is_linear_in_gain(g in 0.01f64..5.0) {
        let cr = CrystalConfig::bbo(2.0, 28.81);
        let mut p = PumpConfig::new(397.5, 129.0);
        let grid = FrequencyGrid::with_half_width(16, 0.7).unwrap();
        let base = build_squeezing_matrix(&cr, &p, &grid).unwrap().gamma;
        p.gain = g;
        let scaled = build_squeezing_matrix(&cr, &p, &grid).unwrap().gamma;
        prop_assert!(max_abs(&(scaled - base * Complex64::new(g, 0.0))) <= 1e-14 * g * 16.0);
    }

    #[test]
    fn extraordinary_index_between_principal_values(lambda in 0.3f64..2.0, theta in 0.0f64..90.0) {
        let (o, e) = (Sellmeier::BBO_O, Sellmeier::BBO_E);
        let no = refractive_index(lambda, Polarization::Ordinary, theta, &o, &e).unwrap();
        let ne = refractive_index(lambda, Polarization::Extraordinary, theta, &o, &e).unwrap();
        let ne90 = refractive_index(lambda, Polarization::Extraordinary, 90.0, &o, &e).unwrap();
        prop_assert!(ne <= no + 1e-15 && ne >= ne90 - 1e-15);
    }
}

#[test]
fn squeezing_matrix_is_symmetric_and_real_when_compensated() {
    let cr = CrystalConfig::bbo(2.0, 28.81);
    let p = PumpConfig::new(397.5, 129.0);
    let grid = FrequencyGrid::with_half_width(32, 0.7).unwrap();
    let g = build_squeezing_matrix(&cr, &p, &grid).unwrap().gamma;
    assert_eq!(max_abs(&(&g - g.transpose())), 0.0);
    assert!(twinsqueeze::linalg::imaginary_fraction(&g) < 1e-12);
}
