//! Randomized property tests for the algebraic building blocks.

use num_complex::Complex64;
use proptest::prelude::*;

use melnikov_cert::galois::monodromy_pair;
use melnikov_cert::melnikov::MelnikovResult;
use melnikov_cert::model::{DecayData, DecaySource};
use melnikov_cert::quad::integrate_real;

fn decay(l1p: f64, l1m: f64) -> DecayData {
    DecayData::new(l1p, l1m, 1.0, 1.0, DecaySource::UserSupplied).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig {
        failure_persistence: None,
        ..ProptestConfig::default()
    })]

    /// The commutator magnitude depends on the coefficient only through its
    /// modulus: rotating the phase changes nothing, scaling acts linearly.
    #[test]
    fn commutator_norm_scales_with_coefficient_modulus(
        l1p in 0.2f64..3.0,
        l1m in 0.2f64..3.0,
        nu in 0.2f64..3.0,
        ell in 1i32..=3,
        re in -1.0f64..1.0,
        im in -1.0f64..1.0,
        phase in 0.0f64..std::f64::consts::TAU,
        scale in 0.1f64..10.0,
    ) {
        let m = Complex64::new(re, im);
        prop_assume!(m.norm() > 1e-6);
        let d = decay(l1p, l1m);
        let base = monodromy_pair(&d, nu, ell, m).unwrap().commutator_norm;
        let rotated = monodromy_pair(&d, nu, ell, m * Complex64::from_polar(1.0, phase))
            .unwrap()
            .commutator_norm;
        let scaled = monodromy_pair(&d, nu, ell, m * scale).unwrap().commutator_norm;
        prop_assert!((rotated - base).abs() <= 1e-12 * base.max(1.0));
        prop_assert!((scaled - scale * base).abs() <= 1e-12 * (scale * base).max(1.0));
    }

    /// Adaptive quadrature is linear and its reported error bound is honest
    /// on smooth oscillatory-decaying integrands with known antiderivatives.
    #[test]
    fn quadrature_linearity_and_error_bound(
        a in -5.0f64..-0.5,
        len in 1.0f64..8.0,
        alpha in 0.2f64..2.0,
        beta in -3.0f64..3.0,
        omega in 0.2f64..4.0,
    ) {
        let b = a + len;
        let f = |t: f64| (-alpha * t * t).exp();
        let g = |t: f64| (omega * t).cos();
        let (vf, ef) = integrate_real(f, a, b, 1e-12, 0.5).unwrap();
        let (vg, eg) = integrate_real(g, a, b, 1e-12, 0.5).unwrap();
        let (vfg, _) = integrate_real(|t| 2.0 * f(t) + beta * g(t), a, b, 1e-12, 0.5).unwrap();
        prop_assert!((vfg - (2.0 * vf + beta * vg)).abs() <= 1e-9 * (1.0 + vfg.abs()));
        let exact_g = ((omega * b).sin() - (omega * a).sin()) / omega;
        prop_assert!((vg - exact_g).abs() <= (1e-12f64).max(10.0 * eg));
        prop_assert!(ef >= 0.0 && eg >= 0.0);
    }

    /// A coefficient list with Hermitian symmetry gives a real, 2 pi periodic
    /// series whose derivative matches finite differences.
    #[test]
    fn coefficient_series_is_periodic_and_consistent(
        c0 in -1.0f64..1.0,
        re1 in -1.0f64..1.0,
        im1 in -1.0f64..1.0,
        theta in 0.0f64..std::f64::consts::TAU,
    ) {
        let mr = MelnikovResult {
            c: vec![1.0],
            nu: 1.0,
            order: 1,
            coeffs: vec![(re1, -im1), (c0, 0.0), (re1, im1)],
            quad_errors: vec![0.0; 3],
            theta_grid: vec![],
            grid_series_max_diff: 0.0,
            scale_note: String::new(),
        };
        let v = mr.series_eval(theta);
        prop_assert!((mr.series_eval(theta + std::f64::consts::TAU) - v).abs() <= 1e-12);
        let h = 1e-6;
        let fd = (mr.series_eval(theta + h) - mr.series_eval(theta - h)) / (2.0 * h);
        prop_assert!((mr.series_derivative(theta) - fd).abs() <= 1e-7);
    }
}
