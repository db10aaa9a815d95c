//! Oracle comparisons run by the `selftest` subcommand.

use num_complex::Complex64;

use super::output::{Cell, Report};
use super::CliError;
use crate::bound::{beta_for_level, find_bound_states, gamma_breve, kappa_max};
use crate::model::{d_matrix_at_gap, ModelParams, Tolerances};
use crate::oracle::{
    circle_contour, gap_contour, k0_asymptotic, k0_reference, phi_breve_alternate, pv_excision_reference,
    transverse_fd_check, winding_zero_count,
};
use crate::quadrature::integrate_pv;
use crate::resonance::{eta, find_pole, mu0, phi_sheet, Sheet, SheetPoint, SolverOptions};
use crate::scattering::{amplitudes, locate_pole_contour};
use crate::specfun::{macdonald_k0, s_breve};
use crate::Result;

struct Check {
    name: &'static str,
    tolerance: f64,
    run: fn() -> Result<f64>,
}

fn k0_relative(radii: &[f64], reference: impl Fn(Complex64) -> Result<Complex64>) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for &r in radii {
        for theta in [-1.4, -0.7, 0.0, 0.7, 1.4] {
            let w = Complex64::from_polar(r, theta);
            let exact = reference(w)?;
            worst = worst.max(((macdonald_k0(w)? - exact) / exact).norm());
        }
    }
    Ok(worst)
}

fn k0_series() -> Result<f64> {
    k0_relative(&[0.05, 0.3, 1.0, 2.5, 5.0, 9.0], k0_reference)
}

fn k0_large_argument() -> Result<f64> {
    k0_relative(&[15.0, 25.0, 40.0], |w| Ok(k0_asymptotic(w)))
}

fn coupling_alternate() -> Result<f64> {
    let (alpha, a, beta) = (1.0, 1.5, 0.1);
    let model = ModelParams::single_dot(alpha, a, beta)?;
    let mut worst: f64 = 0.0;
    for kappa in [0.6, 1.0, 2.0, 5.0] {
        let production = s_breve(kappa, beta) - gamma_breve(kappa - 0.5 * alpha, &model)?;
        worst = worst.max((production - phi_breve_alternate(kappa, a, alpha)?).abs());
    }
    Ok(worst)
}

fn principal_value() -> Result<f64> {
    let (alpha, a, lambda) = (1.0, 2.0, -0.1);
    let t0 = lambda + 0.25 * alpha * alpha;
    let f = |t: f64| mu0(lambda, t, alpha, a).unwrap_or(f64::NAN);
    let production = integrate_pv(f, t0, 0.0, 200.0, &Tolerances::default().quad_spec())?.value;
    let reference = pv_excision_reference(f, t0, 0.0, 200.0, &[0.04, 0.02, 0.01, 0.005])?;
    Ok((production - reference.value).abs())
}

fn transverse_level() -> Result<f64> {
    let widths = [0.2, 0.1, 0.05, 0.025];
    Ok((transverse_fd_check(1.0, &widths, 10)?.level + 0.25).abs())
}

fn count_by_winding() -> Result<f64> {
    let model = ModelParams::new(1.0, vec![[0.0, 1.0], [1.5, -0.8], [-2.0, 2.5]], vec![-0.4, 0.1, -1.0])?;
    let spectrum = find_bound_states(&model)?;
    let smallest = spectrum.states.iter().map(|s| s.gap).fold(1e-6, f64::min);
    let contour = gap_contour(1.0, 0.1 * smallest, 2.0 * (kappa_max(&model) - 0.5), 48);
    let winding = winding_zero_count(|g| Ok(d_matrix_at_gap(g, &model)?.det), &contour, 1e-300)?;
    Ok((winding - spectrum.count() as i64).abs() as f64)
}

fn shallow_dot(a: f64) -> Result<ModelParams> {
    ModelParams::single_dot(1.0, a, beta_for_level(-0.1)?)
}

fn unitarity() -> Result<f64> {
    let model = shallow_dot(2.0)?;
    let mut worst: f64 = 0.0;
    for i in 0..50 {
        let p = amplitudes(-0.25 + 0.25 * (i as f64 + 0.5) / 50.0, &model)?;
        worst = worst.max(((p.r + 0.5).norm() - 0.5).abs());
    }
    Ok(worst)
}

/// Both one-sided limits against the boundary value, extrapolated through a
/// parabola in the distance to the axis.
fn edge_matching() -> Result<f64> {
    let tol = Tolerances::default();
    let eps = [1e-3, 1e-4, 1e-5];
    let mut worst: f64 = 0.0;
    for lambda in [-0.2, -0.15, -0.1, -0.05] {
        let zero = phi_sheet(SheetPoint::boundary(lambda, 1.0)?, 1.0, 2.0, &tol)?;
        for (sheet, sign) in [(Sheet::Upper, 1.0), (Sheet::Lower, -1.0)] {
            let mut intercept = Complex64::new(0.0, 0.0);
            for i in 0..3 {
                let point = SheetPoint::new(Complex64::new(lambda, sign * eps[i]), sheet, 1.0)?;
                let d = phi_sheet(point, 1.0, 2.0, &tol)? - zero;
                let weight: f64 = (0..3).filter(|&j| j != i).map(|j| eps[j] / (eps[j] - eps[i])).product();
                intercept += d * weight;
            }
            worst = worst.max(intercept.norm());
        }
    }
    Ok(worst)
}

fn pole_coincidence() -> Result<f64> {
    let model = shallow_dot(5.0)?;
    let pole = find_pole(&model, Complex64::new(-0.1, 0.0), SolverOptions::default())?;
    let radius = 0.5 * pole.z.im.abs();
    let located = locate_pole_contour(pole.z + Complex64::new(0.1 * radius, 0.05 * radius), radius, 128, &model)?;
    Ok((located - pole.z).norm())
}

fn pole_winding() -> Result<f64> {
    let model = shallow_dot(5.0)?;
    let pole = find_pole(&model, Complex64::new(-0.1, 0.0), SolverOptions::default())?;
    let contour = circle_contour(pole.z, 2.0 * pole.z.im.abs(), 64);
    let winding = winding_zero_count(|z| eta(SheetPoint::infer(z, 1.0)?, &model), &contour, 1e-14)?;
    Ok((winding - 1).abs() as f64)
}

const CHECKS: [Check; 10] = [
    Check { name: "k0_series_reference", tolerance: 1e-11, run: k0_series },
    Check { name: "k0_large_argument", tolerance: 1e-10, run: k0_large_argument },
    Check { name: "coupling_alternate_quadrature", tolerance: 1e-10, run: coupling_alternate },
    Check { name: "principal_value_excision", tolerance: 1e-7, run: principal_value },
    Check { name: "transverse_level", tolerance: 1e-4, run: transverse_level },
    Check { name: "bound_count_winding", tolerance: 0.5, run: count_by_winding },
    Check { name: "unitarity_circle", tolerance: 1e-10, run: unitarity },
    Check { name: "edge_matching", tolerance: 1e-8, run: edge_matching },
    Check { name: "pole_coincidence", tolerance: 1e-8, run: pole_coincidence },
    Check { name: "pole_winding", tolerance: 0.5, run: pole_winding },
];

pub fn selftest() -> Report {
    let mut report = Report::new(&["check", "measure[1]", "tolerance[1]", "status"]);
    let mut failed = Vec::new();
    for check in &CHECKS {
        let (measure, status) = match (check.run)() {
            Ok(m) if m < check.tolerance => (m, "pass".to_string()),
            Ok(m) => (m, "fail".to_string()),
            Err(e) => (f64::NAN, format!("error: {e}")),
        };
        if status != "pass" {
            failed.push(check.name);
        }
        report.push(vec![check.name.into(), measure.into(), check.tolerance.into(), Cell::from(status)]);
    }
    report.note("checks", CHECKS.len());
    report.note("failed", failed.len());
    if !failed.is_empty() {
        report.fail(CliError::Selftest(failed.join(", ")));
    }
    report
}
