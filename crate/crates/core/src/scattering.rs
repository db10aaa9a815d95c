//! Guided-channel scattering off a single dot for energies in `(-alpha^2/4, 0)`.
//!
//! Only the transverse mode `e^{-alpha |x2| / 2}` is open there, so the
//! on-shell S-matrix is a pair of numbers: the reflection amplitude
//! `R = g / eta` and the transmission amplitude `T = 1 + R`. Because the
//! principal-value part of `eta` is real and `Im eta = -g~`, the amplitude
//! lies on the circle `|R + 1/2| = 1/2`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::resonance::{eta, g_coupling, g_tilde, phi_sheet, Sheet, SheetPoint};
use crate::specfun::s_breve;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScatteringPoint {
    pub lambda: f64,
    /// Longitudinal wavenumber `sqrt(lambda + alpha^2/4)`.
    pub momentum: f64,
    pub r: Complex64,
    pub t: Complex64,
}

fn check_channel(lambda: f64, alpha: f64) -> Result<f64> {
    let momentum2 = lambda + 0.25 * alpha * alpha;
    if !(momentum2 > 0.0 && lambda < 0.0) {
        return Err(Error::Threshold {
            p: momentum2.max(0.0).sqrt(),
            z: Complex64::new(lambda, 0.0),
        });
    }
    Ok(momentum2.sqrt())
}

/// Reflection and transmission amplitudes at `lambda`.
pub fn amplitudes(lambda: f64, model: &ModelParams) -> Result<ScatteringPoint> {
    let a = model.single_distance()?;
    let alpha = model.alpha;
    let momentum = check_channel(lambda, alpha)?;
    let kappa = (-lambda).sqrt();
    let point = SheetPoint::boundary(lambda, alpha)?;
    let phi = phi_sheet(point, alpha, a, &model.tolerances)?;
    let g = g_tilde(lambda, alpha, a);
    // eta^0 = (s - I) - i g~, assembled from its exact real and imaginary parts
    let eta0 = Complex64::new(s_breve(kappa, model.betas[0]) - phi.re, -g);
    let r = Complex64::new(0.0, g) / eta0;
    Ok(ScatteringPoint {
        lambda,
        momentum,
        r,
        t: r + 1.0,
    })
}

/// `R(z) = g(z) / eta(z)` continued through the channel interval.
pub fn continued_reflection(point: SheetPoint, model: &ModelParams) -> Result<Complex64> {
    if point.sheet == Sheet::Boundary {
        return Ok(amplitudes(point.z.re, model)?.r);
    }
    let a = model.single_distance()?;
    Ok(g_coupling(point.z, model.alpha, a) / eta(point, model)?)
}

/// Pole of the continued amplitude inside a circle in `Omega_-`, as the
/// ratio of the first two contour moments `oint z R dz / oint R dz`.
pub fn locate_pole_contour(center: Complex64, radius: f64, nodes: usize, model: &ModelParams) -> Result<Complex64> {
    let mut m0 = Complex64::new(0.0, 0.0);
    let mut m1 = Complex64::new(0.0, 0.0);
    for j in 0..nodes {
        let theta = 2.0 * PI * (j as f64 + 0.5) / nodes as f64;
        let w = Complex64::from_polar(radius, theta);
        let z = center + w;
        let r = continued_reflection(SheetPoint::new(z, Sheet::Lower, model.alpha)?, model)?;
        // dz = i w dtheta
        m0 += r * w;
        m1 += r * w * z;
    }
    if m0.norm() == 0.0 {
        return Err(Error::ContourThroughZero(0.0));
    }
    Ok(m1 / m0)
}

/// Far-field form of the scattering solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GuidedWave {
    pub value: Complex64,
    /// Inside the near zone the evanescent corrections are not negligible
    /// and the two-term form is only indicative.
    pub near_zone: bool,
}

/// Distance along the line beyond which the two-term asymptotic form holds:
/// the evanescent part decays like `e^{-sqrt(-lambda) |x1|}`, so twenty decay
/// lengths past the dot.
pub fn near_zone_extent(lambda: f64, model: &ModelParams) -> Result<f64> {
    let y1 = model.dots.first().map_or(0.0, |y| y[0]);
    Ok(y1.abs() + 20.0 / (-lambda).sqrt())
}

/// `e^{i k x1} e^{-alpha|x2|/2} + R e^{i k |x1|} e^{-alpha|x2|/2}`.
pub fn guided_wave(x: [f64; 2], lambda: f64, model: &ModelParams) -> Result<GuidedWave> {
    let amp = amplitudes(lambda, model)?;
    let k = amp.momentum;
    let profile = (-0.5 * model.alpha * x[1].abs()).exp();
    let incident = Complex64::from_polar(1.0, k * x[0]);
    let scattered = amp.r * Complex64::from_polar(1.0, k * x[0].abs());
    Ok(GuidedWave {
        value: (incident + scattered) * profile,
        near_zone: x[0].abs() < near_zone_extent(lambda, model)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bound::beta_for_level;
    use crate::resonance::{find_pole, SolverOptions};

    fn model(a: f64) -> ModelParams {
        ModelParams::single_dot(1.0, a, beta_for_level(-0.1).unwrap()).unwrap()
    }

    #[test]
    fn amplitudes_on_unitarity_circle() {
        let m = model(2.0);
        for lambda in [-0.249, -0.2, -0.1, -0.01] {
            let p = amplitudes(lambda, &m).unwrap();
            assert!(((p.r + 0.5).norm() - 0.5).abs() < 1e-14);
            assert_eq!(p.t, p.r + 1.0);
            assert!((p.r.norm_sqr() + p.t.norm_sqr() - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn total_reflection_at_threshold() {
        let p = amplitudes(-0.25 + 1e-10, &model(2.0)).unwrap();
        assert!((p.r + 1.0).norm() < 1e-3);
    }

    #[test]
    fn channel_edges_rejected() {
        let m = model(2.0);
        assert!(amplitudes(-0.25, &m).is_err());
        assert!(amplitudes(0.0, &m).is_err());
    }

    #[test]
    fn guided_wave_asymptotics() {
        let m = model(2.0);
        let lambda = -0.1;
        let amp = amplitudes(lambda, &m).unwrap();
        let x1 = 200.0;
        let right = guided_wave([x1, 0.0], lambda, &m).unwrap();
        assert!(!right.near_zone);
        assert!((right.value - amp.t * Complex64::from_polar(1.0, amp.momentum * x1)).norm() < 1e-12);
        let left = guided_wave([-x1, 0.0], lambda, &m).unwrap();
        let expected = Complex64::from_polar(1.0, -amp.momentum * x1) + amp.r * Complex64::from_polar(1.0, amp.momentum * x1);
        assert!((left.value - expected).norm() < 1e-12);
        let off = guided_wave([x1, 3.0], lambda, &m).unwrap();
        assert!((off.value / right.value - (-1.5f64).exp()).norm() < 1e-12);
        assert!(guided_wave([1.0, 0.0], lambda, &m).unwrap().near_zone);
    }

    #[test]
    fn contour_pole_matches_solver() {
        let m = model(5.0);
        let pole = find_pole(&m, Complex64::new(-0.1, 0.0), SolverOptions::default()).unwrap();
        let radius = 0.5 * pole.z.im.abs();
        let center = pole.z + Complex64::new(0.1 * radius, 0.05 * radius);
        let located = locate_pole_contour(center, radius, 128, &m).unwrap();
        assert!((located - pole.z).norm() < 1e-10, "{located} {}", pole.z);
    }

    #[test]
    fn reflection_peaks_near_resonance() {
        let m = model(6.0);
        let pole = find_pole(&m, Complex64::new(-0.1, 0.0), SolverOptions::default()).unwrap();
        let width = 2.0 * pole.z.im.abs();
        let grid: Vec<f64> = (0..400).map(|i| -0.2 + 0.19 * i as f64 / 399.0).collect();
        let peak = grid
            .iter()
            .map(|&l| (l, amplitudes(l, &m).unwrap().r.norm_sqr()))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        assert!((peak.0 - pole.z.re).abs() < 3.0 * width, "{peak:?} {}", pole.z);
    }
}
