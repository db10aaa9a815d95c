use leakywire::bound::{beta_for_level, gamma_breve};
use leakywire::model::{d_matrix, d_matrix_below_threshold, ModelParams};
use leakywire::quadrature::{integrate, integrate_halfline, QuadSpec};
use leakywire::scattering::amplitudes;
use leakywire::specfun::{k0_prime, macdonald_k0, s_beta, sqrt_cut};
use num_complex::Complex64;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Points off the cut `[0, inf)`.
fn off_cut() -> impl Strategy<Value = Complex64> {
    (-10.0..10.0f64, 1e-3..10.0f64, any::<bool>()).prop_map(|(re, im, up)| c(re, if up { im } else { -im }))
}

fn right_half_plane() -> impl Strategy<Value = Complex64> {
    (0.2..8.0f64, -6.0..6.0f64).prop_map(|(re, im)| c(re, im))
}

fn config() -> ProptestConfig {
    ProptestConfig::with_cases(64)
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn sqrt_cut_reflects_across_the_real_axis(z in off_cut()) {
        let lhs = sqrt_cut(z.conj()).unwrap();
        let rhs = -sqrt_cut(z).unwrap().conj();
        prop_assert!((lhs - rhs).norm() <= 1e-15 * z.norm().sqrt().max(1.0));
        prop_assert!(sqrt_cut(z).unwrap().im > 0.0);
    }

    #[test]
    fn k0_prime_matches_central_difference(w in right_half_plane()) {
        let exact = k0_prime(w).unwrap();
        let diff = |h: f64| (macdonald_k0(w + h).unwrap() - macdonald_k0(w - h).unwrap()) / (2.0 * h);
        let scale = macdonald_k0(w).unwrap().norm().max(1e-300);
        // second order: quartering the error when the step halves
        let e1 = (diff(2e-3) - exact).norm();
        let e2 = (diff(1e-3) - exact).norm();
        prop_assert!(e1 < 1e-5 * scale.max(exact.norm()));
        prop_assert!(e2 < 0.3 * e1 + 1e-12 * scale.max(exact.norm()));
    }

    #[test]
    fn s_beta_satisfies_cauchy_riemann(z in off_cut(), beta in -1.0..1.0f64) {
        prop_assume!(z.im.abs() > 1e-2);
        let h = 1e-5;
        let dx = (s_beta(z + h, beta).unwrap() - s_beta(z - h, beta).unwrap()) / (2.0 * h);
        let dy = (s_beta(z + c(0.0, h), beta).unwrap() - s_beta(z - c(0.0, h), beta).unwrap()) / (2.0 * h);
        // analytic: d/dy = i d/dx
        prop_assert!((dy - Complex64::i() * dx).norm() < 1e-6);
    }

    #[test]
    fn integration_is_linear(p in 0.0..3.0f64, q in 0.1..4.0f64, a in -2.0..2.0f64, b in -2.0..2.0f64) {
        let spec = QuadSpec::default();
        let f = move |t: f64| (p * t).cos() * (-t).exp();
        let g = move |t: f64| 1.0 / (1.0 + q * t * t);
        let combined = integrate(|t: f64| a * f(t) + b * g(t), 0.0, 5.0, &spec).unwrap();
        let lf = integrate(f, 0.0, 5.0, &spec).unwrap();
        let lg = integrate(g, 0.0, 5.0, &spec).unwrap();
        let expected = a * lf.value + b * lg.value;
        let budget = 10.0 * (spec.abs_tol + spec.rel_tol * expected.abs() + combined.error + a.abs() * lf.error + b.abs() * lg.error);
        prop_assert!((combined.value - expected).abs() <= budget);
    }

    #[test]
    fn endpoint_substitution_is_invisible_for_regular_integrands(rate in 0.3..3.0f64, shift in 0.0..2.0f64) {
        let f = move |t: f64| (-rate * t).exp() / (1.0 + shift * t);
        let plain = integrate_halfline(f, &QuadSpec::default()).unwrap();
        let mapped = integrate_halfline(f, &QuadSpec::default().with_endpoint_transform(true)).unwrap();
        prop_assert!((plain.value - mapped.value).abs() <= 10.0 * (plain.error + mapped.error) + 1e-12);
    }

    #[test]
    fn reduced_determinant_is_real_below_threshold(
        alpha in 0.5..2.0f64,
        y in (-2.0..2.0f64, 0.3..3.0f64, -2.0..2.0f64, -3.0..-0.3f64),
        betas in (-1.0..1.0f64, -1.0..1.0f64),
        gap in 1e-3..5.0f64,
    ) {
        let model = ModelParams::new(alpha, vec![[y.0, y.1], [y.2, y.3]], vec![betas.0, betas.1]).unwrap();
        let kappa = 0.5 * alpha + gap;
        let d = d_matrix(c(-kappa * kappa, 0.0), &model).unwrap();
        let real = d_matrix_below_threshold(gap, &model).unwrap();
        for (entry, r) in d.entries.iter().zip(real.iter()) {
            prop_assert!(entry.im.abs() < 1e-12);
            prop_assert!((entry.re - r).abs() < 1e-12 * r.abs().max(1.0));
        }
    }

    #[test]
    fn reduced_determinant_reflects(
        alpha in 0.5..2.0f64,
        y in (-2.0..2.0f64, 0.3..3.0f64, -2.0..2.0f64, -3.0..-0.3f64),
        z in (-3.0..-0.3f64, 0.05..2.0f64),
    ) {
        let model = ModelParams::new(alpha, vec![[y.0, y.1], [y.2, y.3]], vec![0.1, -0.3]).unwrap();
        let z = c(z.0, z.1);
        let up = d_matrix(z, &model).unwrap();
        let down = d_matrix(z.conj(), &model).unwrap();
        for (u, d) in up.entries.iter().zip(down.entries.iter()) {
            prop_assert!((u.conj() - d).norm() < 1e-11 * u.norm().max(1.0));
        }
    }

    #[test]
    fn scalar_function_increases_in_kappa(
        alpha in 0.5..2.0f64,
        a in 0.2..5.0f64,
        beta in -1.0..1.0f64,
        gap in 1e-4..10.0f64,
        factor in 1.01..3.0f64,
    ) {
        let model = ModelParams::single_dot(alpha, a, beta).unwrap();
        let lower = gamma_breve(gap, &model).unwrap();
        let upper = gamma_breve(gap * factor, &model).unwrap();
        prop_assert!(upper > lower);
    }

    #[test]
    fn amplitudes_stay_on_the_unitarity_circle(
        a in 0.5..8.0f64,
        level in -0.9..-0.01f64,
        fraction in 1e-4..0.9999f64,
    ) {
        let model = ModelParams::single_dot(1.0, a, beta_for_level(level).unwrap()).unwrap();
        let p = amplitudes(-0.25 * (1.0 - fraction), &model).unwrap();
        prop_assert!(((p.r + 0.5).norm() - 0.5).abs() < 1e-10);
        prop_assert_eq!(p.t, p.r + 1.0);
    }
}
