//! Subcommand bodies. Sweeps evaluate their points on the worker pool and
//! collect them in input order.

use num_complex::Complex64;
use rayon::prelude::*;

use super::config::RunConfig;
use super::output::{number, Cell, Report};
use super::CliError;
use crate::bound::{eigenfunction_value, epsilon_beta, find_bound_states, kappa_single};
use crate::model::ModelParams;
use crate::resonance::{find_pole, find_pole2, reparam_b, two_point_expansion, two_point_levels, SolverOptions, TwoDotParams};
use crate::scattering::amplitudes;

fn status(result: &Result<(), CliError>) -> Cell {
    match result {
        Ok(()) => "ok".into(),
        Err(e) => e.to_string().into(),
    }
}

pub fn spectrum(config: &RunConfig) -> Result<Report, CliError> {
    let model = config.model()?;
    let spectrum = find_bound_states(&model)?;
    let mut columns = vec!["index[1]", "energy[1]", "kappa[1]", "kappa_gap[1]"];
    let names: Vec<String> = (1..=model.len()).map(|i| format!("null_{i}[1]")).collect();
    columns.extend(names.iter().map(String::as_str));
    columns.push("det_residual[1]");
    let mut report = Report::new(&columns);
    for (i, state) in spectrum.states.iter().enumerate() {
        let mut row: Vec<Cell> = vec![i.into(), state.energy.into(), state.kappa.into(), state.gap.into()];
        row.extend(state.null_vector.iter().map(|&v| Cell::from(v)));
        row.push(state.solver_residual.into());
        report.push(row);
    }
    report.note("count", spectrum.count());
    report.note("threshold", number(model.threshold()));
    report.note("kappa_max", number(spectrum.kappa_max));
    report.note("degenerate", spectrum.degenerate);
    report.note("warnings", spectrum.warnings.join("; "));
    Ok(report)
}

pub fn eigenfunction(config: &RunConfig) -> Result<Report, CliError> {
    let model = config.single_model()?;
    let state = kappa_single(&model)?;
    let points = config.plane_points()?;
    let values: Vec<_> = points
        .par_iter()
        .map(|&x| eigenfunction_value(x, &state, &model))
        .collect();
    let mut report = Report::new(&["x1[1]", "x2[1]", "psi[1]", "status"]);
    for (x, value) in points.iter().zip(values) {
        let (psi, outcome) = match value {
            Ok(v) => (v, Ok(())),
            Err(e) => (f64::NAN, Err(CliError::from(e))),
        };
        report.push(vec![x[0].into(), x[1].into(), psi.into(), status(&outcome)]);
        if let Err(e) = outcome {
            report.fail(e);
        }
    }
    report.note("energy", number(state.energy));
    report.note("kappa", number(state.kappa));
    report.note("normalisation_point", format!("({}, {})", model.dots[0][0], 0.5 * model.dots[0][1]));
    Ok(report)
}

/// Least-squares slope of `ys` against `xs`.
fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

fn channel_start(level: f64, config: &RunConfig) -> Result<Complex64, CliError> {
    if level > config.threshold() && level < 0.0 {
        Ok(Complex64::new(level, 0.0))
    } else {
        Err(CliError::Config(format!(
            "the decoupled level {level} must lie in the channel ({}, 0)",
            config.threshold()
        )))
    }
}

pub fn resonance(config: &RunConfig) -> Result<Report, CliError> {
    let beta = config.single_beta()?;
    let level = epsilon_beta(beta);
    let start = channel_start(level, config)?;
    let distances = config.a_values()?;
    let solves: Vec<_> = distances
        .par_iter()
        .map(|&a| {
            let model = ModelParams::single_dot(config.alpha, a, beta)?.with_tolerances(config.tolerances);
            find_pole(&model, start, SolverOptions::default())
        })
        .collect();
    let mut report = Report::new(&[
        "a[1]", "b[1]", "z_re[1]", "z_im[1]", "width[1]", "residual[1]", "iterations[1]", "status",
    ]);
    let mut fit = Vec::new();
    for (&a, solve) in distances.iter().zip(solves) {
        let b = reparam_b(a, beta);
        match solve {
            Ok(pole) => {
                report.push(vec![
                    a.into(),
                    b.into(),
                    pole.z.re.into(),
                    pole.z.im.into(),
                    (2.0 * pole.z.im.abs()).into(),
                    pole.residual.into(),
                    pole.iterations.into(),
                    "ok".into(),
                ]);
                fit.push((b, pole.z));
            }
            Err(e) => {
                let e = CliError::from(e);
                let nan = Cell::from(f64::NAN);
                report.push(vec![
                    a.into(), b.into(), nan.clone(), nan.clone(), nan.clone(), nan.clone(), 0usize.into(), e.to_string().into(),
                ]);
                report.fail(e);
            }
        }
    }
    report.note("epsilon_beta", number(level));
    report.note("varsigma", number((-level).sqrt()));
    if fit.len() >= 2 {
        let log_b: Vec<f64> = fit.iter().map(|(b, _)| b.ln()).collect();
        let log_nu: Vec<f64> = fit.iter().map(|(_, z)| z.im.abs().ln()).collect();
        let constant = fit.iter().map(|(b, z)| (z.re - level).abs() / b).fold(0.0, f64::max);
        report.note("nu_loglog_slope", number(slope(&log_b, &log_nu)));
        report.note("alpha_over_varsigma", number(config.alpha / (-level).sqrt()));
        report.note("mu_offset_constant", number(constant));
    }
    Ok(report)
}

pub fn scatter(config: &RunConfig) -> Result<Report, CliError> {
    let model = config.single_model()?;
    let lambdas = config.lambda_values()?;
    let values: Vec<_> = lambdas.par_iter().map(|&l| amplitudes(l, &model)).collect();
    let mut report = Report::new(&[
        "lambda[1]", "momentum[1]", "R_re[1]", "R_im[1]", "T_re[1]", "T_im[1]", "R_abs2[1]", "T_abs2[1]", "status",
    ]);
    for (&lambda, value) in lambdas.iter().zip(values) {
        match value {
            Ok(p) => report.push(vec![
                lambda.into(),
                p.momentum.into(),
                p.r.re.into(),
                p.r.im.into(),
                p.t.re.into(),
                p.t.im.into(),
                p.r.norm_sqr().into(),
                p.t.norm_sqr().into(),
                "ok".into(),
            ]),
            Err(e) => {
                let e = CliError::from(e);
                let mut row = vec![Cell::from(lambda)];
                row.extend(std::iter::repeat(Cell::from(f64::NAN)).take(7));
                row.push(e.to_string().into());
                report.push(row);
                report.fail(e);
            }
        }
    }
    report.note("threshold", number(model.threshold()));
    Ok(report)
}

pub fn twopoint(config: &RunConfig) -> Result<Report, CliError> {
    let beta = config.single_beta()?;
    let a = config.pair_distance()?;
    let mut params = TwoDotParams::new(config.alpha, a, beta)?.with_normalization(config.normalization);
    params.tolerances = config.tolerances;
    let levels = two_point_levels(a, beta, config.normalization)?;
    let eps2 = levels
        .eps2
        .ok_or_else(|| CliError::Config("the antisymmetric pair level does not exist for these parameters".into()))?;
    let start = channel_start(eps2, config)?;
    let expansion = two_point_expansion(&params)?;
    let bs = config.b_values()?;
    let solves: Vec<_> = bs
        .par_iter()
        .map(|&b| find_pole2(b, &params, start, SolverOptions::default()))
        .collect();
    let mut report = Report::new(&[
        "b[1]", "z_re[1]", "z_im[1]", "z_im_over_b2[1]", "residual[1]", "iterations[1]", "status",
    ]);
    for (&b, solve) in bs.iter().zip(solves) {
        match solve {
            Ok(pole) => {
                let ratio = if b == 0.0 { f64::NAN } else { pole.z.im / (b * b) };
                report.push(vec![
                    b.into(),
                    pole.z.re.into(),
                    pole.z.im.into(),
                    ratio.into(),
                    pole.residual.into(),
                    pole.iterations.into(),
                    "ok".into(),
                ]);
            }
            Err(e) => {
                let e = CliError::from(e);
                let nan = Cell::from(f64::NAN);
                report.push(vec![b.into(), nan.clone(), nan.clone(), nan.clone(), nan, 0usize.into(), e.to_string().into()]);
                report.fail(e);
            }
        }
    }
    report.note("eps1", number(levels.eps1));
    report.note("eps2", number(eps2));
    report.note("kappa2", number(expansion.kappa2));
    report.note("mu2_slope", number(expansion.mu2_slope));
    report.note("nu2_coefficient", number(expansion.nu2_coefficient));
    report.note("nu2_coefficient_second_order", number(expansion.nu2_coefficient_second_order));
    Ok(report)
}
