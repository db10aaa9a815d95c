//! Branch-consistent elementary functions.
//!
//! The square root carries its cut on the nonnegative real axis and is
//! normalised to `Im sqrt_cut(z) > 0`. Green's functions decay with the rate
//! `kappa(z) = -i sqrt_cut(z)`, which has `Re kappa(z) >= 0`; on the negative
//! axis `kappa(-k^2) = k`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Digamma at one, `psi(1) = -gamma`.
pub const PSI_ONE: f64 = -0.577_215_664_901_532_86;

/// Largest modulus handled by the ascending series for `K0`/`K1`.
const SERIES_RADIUS: f64 = 2.0;

/// Square root with the cut on `[0, inf)` and positive imaginary part.
pub fn sqrt_cut(z: Complex64) -> Result<Complex64> {
    if z.im == 0.0 && z.re >= 0.0 {
        return Err(Error::CutContact(z));
    }
    Ok(Complex64::i() * (-z).sqrt())
}

/// Decay rate `kappa(z) = -i sqrt_cut(z)`, i.e. the principal `sqrt(-z)`.
pub fn decay_rate(z: Complex64) -> Result<Complex64> {
    if z.im == 0.0 && z.re >= 0.0 {
        return Err(Error::CutContact(z));
    }
    Ok((-z).sqrt())
}

/// `s(z) = (1/2pi) (ln(sqrt z / 2i) - psi(1))`.
pub fn s_free(z: Complex64) -> Result<Complex64> {
    let kappa = decay_rate(z)?;
    Ok(((kappa / 2.0).ln() - PSI_ONE) / (2.0 * PI))
}

/// `s_beta(z) = beta + s(z)`.
pub fn s_beta(z: Complex64, beta: f64) -> Result<Complex64> {
    Ok(s_free(z)? + beta)
}

/// Real-axis form of `s_beta`, parametrised by `kappa = sqrt(-z) > 0`.
pub fn s_breve(kappa: f64, beta: f64) -> f64 {
    beta + ((kappa / 2.0).ln() - PSI_ONE) / (2.0 * PI)
}

/// `d/dkappa s_breve(kappa, beta) = 1/(2 pi kappa)`.
pub fn s_breve_prime(kappa: f64) -> f64 {
    1.0 / (2.0 * PI * kappa)
}

/// Macdonald function `K0(w)` for `Re w > 0`.
pub fn macdonald_k0(w: Complex64) -> Result<Complex64> {
    check_domain(w)?;
    if w.norm() <= SERIES_RADIUS {
        Ok(k0_series(w))
    } else {
        Ok(k_integral(w, false))
    }
}

/// `K1(w)` for `Re w > 0`.
pub fn macdonald_k1(w: Complex64) -> Result<Complex64> {
    check_domain(w)?;
    if w.norm() <= SERIES_RADIUS {
        Ok(k1_series(w))
    } else {
        Ok(k_integral(w, true))
    }
}

/// `K0'(w) = -K1(w)`.
pub fn k0_prime(w: Complex64) -> Result<Complex64> {
    Ok(-macdonald_k1(w)?)
}

/// Real-argument convenience wrapper around [`macdonald_k0`].
pub fn k0_real(x: f64) -> Result<f64> {
    Ok(macdonald_k0(Complex64::new(x, 0.0))?.re)
}

/// Real-argument `K0'(x) = -K1(x)`.
pub fn k0_prime_real(x: f64) -> Result<f64> {
    Ok(-macdonald_k1(Complex64::new(x, 0.0))?.re)
}

fn check_domain(w: Complex64) -> Result<()> {
    if !(w.re > 0.0) || !w.im.is_finite() {
        return Err(Error::Domain(w));
    }
    Ok(())
}

// K0(w) = -(ln(w/2) + gamma) I0(w) + sum_{k>=1} H_k (w^2/4)^k / (k!)^2
fn k0_series(w: Complex64) -> Complex64 {
    let q = w * w / 4.0;
    let mut term = Complex64::new(1.0, 0.0);
    let mut i0 = term;
    let mut harmonic_sum = Complex64::new(0.0, 0.0);
    let mut harmonic = 0.0;
    for k in 1..200 {
        let kf = k as f64;
        term *= q / (kf * kf);
        harmonic += 1.0 / kf;
        i0 += term;
        let contribution = term * harmonic;
        harmonic_sum += contribution;
        if term.norm() < 1e-18 * i0.norm() && contribution.norm() < 1e-18 * harmonic_sum.norm() {
            break;
        }
    }
    -((w / 2.0).ln() - PSI_ONE) * i0 + harmonic_sum
}

// K1(w) = 1/w + ln(w/2) I1(w) - (w/4) sum_{k>=0} (psi(k+1) + psi(k+2)) (w^2/4)^k / (k! (k+1)!)
fn k1_series(w: Complex64) -> Complex64 {
    let q = w * w / 4.0;
    let mut term = Complex64::new(1.0, 0.0);
    let mut i1_sum = term;
    let mut psi_k1 = PSI_ONE;
    let mut psi_k2 = PSI_ONE + 1.0;
    let mut psi_sum = term * (psi_k1 + psi_k2);
    for k in 1..200 {
        let kf = k as f64;
        term *= q / (kf * (kf + 1.0));
        psi_k1 += 1.0 / kf;
        psi_k2 += 1.0 / (kf + 1.0);
        i1_sum += term;
        let contribution = term * (psi_k1 + psi_k2);
        psi_sum += contribution;
        if term.norm() < 1e-18 * i1_sum.norm() && contribution.norm() < 1e-18 * psi_sum.norm() {
            break;
        }
    }
    let i1 = w / 2.0 * i1_sum;
    w.inv() + (w / 2.0).ln() * i1 - w / 4.0 * psi_sum
}

// K_nu(w) = int_0^inf exp(-w cosh t) cosh(nu t) dt, trapezoidal rule in t.
// The integrand is analytic in the strip |Im t| < pi/2 - |arg w|, so the
// rule converges geometrically in 1/h; for large |w| the integrand narrows to
// width ~ |w|^{-1/2} and the step follows it.
fn k_integral(w: Complex64, order_one: bool) -> Complex64 {
    let strip = (std::f64::consts::FRAC_PI_2 - w.arg().abs()).max(1e-3);
    let h = (strip / 8.0).min(0.2).min(0.5 / w.norm().sqrt());
    let t_max = (1.0 + 42.0 / w.re).acosh();
    let steps = (t_max / h).ceil() as usize + 1;
    let mut sum = Complex64::new(0.5, 0.0);
    for j in 1..=steps {
        let t = j as f64 * h;
        let ch = t.cosh();
        let weight = if order_one { ch } else { 1.0 };
        // cosh t - 1 = 2 sinh^2(t/2), exact for small t
        let shifted = 2.0 * (0.5 * t).sinh().powi(2);
        sum += (-w * shifted).exp() * weight;
    }
    sum * h * (-w).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn sqrt_cut_examples() {
        assert!((sqrt_cut(c(-1.0, 0.0)).unwrap() - c(0.0, 1.0)).norm() < 1e-15);
        assert!((sqrt_cut(c(-4.0, 0.0)).unwrap() - c(0.0, 2.0)).norm() < 1e-15);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((sqrt_cut(c(0.0, 1.0)).unwrap() - c(h, h)).norm() < 1e-15);
        assert_eq!(sqrt_cut(c(2.0, 0.0)), Err(Error::CutContact(c(2.0, 0.0))));
        assert!(sqrt_cut(c(0.0, 0.0)).is_err());
    }

    #[test]
    fn sqrt_cut_just_below_positive_axis_is_negative_root() {
        let r = sqrt_cut(c(4.0, -1e-14)).unwrap();
        assert!((r.re + 2.0).abs() < 1e-12 && r.im > 0.0);
    }

    #[test]
    fn s_breve_examples() {
        assert!(s_breve(2.0 * PSI_ONE.exp(), 0.0).abs() < 1e-16);
        let diff = s_beta(c(-1.0, 0.0), 0.3).unwrap() - s_breve(1.0, 0.3);
        assert!(diff.norm() < 1e-16);
        assert!((s_breve(2.0, 0.0) - 0.091_866_726_299_153_99).abs() < 1e-15);
    }

    #[test]
    fn k0_known_values() {
        // Abramowitz & Stegun table 9.8
        assert!((k0_real(1.0).unwrap() - 0.421_024_438_240_708_3).abs() < 1e-15);
        assert!((k0_real(0.1).unwrap() - 2.427_069_024_702_016_6).abs() < 1e-14);
        assert!((k0_real(5.0).unwrap() - 3.691_098_334_042_594e-3).abs() < 1e-17);
        let k1 = macdonald_k1(c(1.0, 0.0)).unwrap().re;
        assert!((k1 - 0.601_907_230_197_234_6).abs() < 1e-15);
    }

    #[test]
    fn k0_small_argument_log_behaviour() {
        for rho in [1e-3, 1e-5, 1e-8] {
            let v = k0_real(rho).unwrap() + (rho / 2.0).ln() - PSI_ONE;
            assert!(v.abs() < rho, "rho = {rho}: {v}");
        }
    }

    #[test]
    fn k0_large_argument_asymptote() {
        for x in [20.0, 60.0, 200.0] {
            let ratio = k0_real(x).unwrap() * (2.0 * x / PI).sqrt() * x.exp();
            assert!((ratio - 1.0 + 1.0 / (8.0 * x)).abs() < 0.1 / (x * x), "x = {x}");
        }
    }

    #[test]
    fn regimes_agree_at_crossover() {
        for arg in [0.0, 0.5, 1.0, -1.2] {
            let w = Complex64::from_polar(SERIES_RADIUS, arg);
            let a = k0_series(w);
            let b = k_integral(w, false);
            assert!((a - b).norm() < 1e-14 * a.norm(), "arg {arg}");
            let a = k1_series(w);
            let b = k_integral(w, true);
            assert!((a - b).norm() < 1e-14 * a.norm(), "arg {arg}");
        }
    }

    #[test]
    fn k0_rejects_left_half_plane() {
        assert!(macdonald_k0(c(0.0, 1.0)).is_err());
        assert!(macdonald_k0(c(-1.0, 0.0)).is_err());
    }
}
