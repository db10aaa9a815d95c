//! Discrete spectrum below the guided threshold `-alpha^2/4`.
//!
//! For `kappa > alpha/2` the reduced matrix `D(-kappa^2)` is real symmetric
//! and its eigenvalues increase with `kappa`. Bound states are therefore the
//! crossings of the sorted eigenvalue branches through zero: the count equals
//! the number of negative eigenvalues just above threshold.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{d_matrix_below_threshold, line_kernel, ModelParams};
use crate::roots::brent;
use crate::specfun::{k0_real, s_breve, PSI_ONE};

const SCAN_POINTS: usize = 400;
const BRENT_ITERATIONS: usize = 200;

/// Eigenvalue of the lone point interaction, `-4 e^{2(-2 pi beta + psi(1))}`.
pub fn epsilon_beta(beta: f64) -> f64 {
    -4.0 * (2.0 * (-2.0 * PI * beta + PSI_ONE)).exp()
}

/// `sqrt(-epsilon_beta)`, the root of `s_breve(., beta)`.
pub fn kappa_beta(beta: f64) -> f64 {
    2.0 * (PSI_ONE - 2.0 * PI * beta).exp()
}

/// Inverse of [`epsilon_beta`] for a negative level.
pub fn beta_for_level(epsilon: f64) -> Result<f64> {
    if !(epsilon < 0.0) {
        return Err(Error::InvalidModel(format!("level {epsilon} must be negative")));
    }
    Ok((PSI_ONE - ((-epsilon).sqrt() / 2.0).ln()) / (2.0 * PI))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundState {
    pub energy: f64,
    pub kappa: f64,
    /// `kappa - alpha/2`, kept separately because it can be far below the
    /// resolution of `kappa` itself.
    pub gap: f64,
    pub null_vector: Vec<f64>,
    /// `|det D|` at the accepted root.
    pub solver_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundSpectrum {
    /// Sorted by increasing energy.
    pub states: Vec<BoundState>,
    pub kappa_max: f64,
    /// Set when two roots lie too close to be separated reliably.
    pub degenerate: bool,
    pub warnings: Vec<String>,
}

impl BoundSpectrum {
    pub fn count(&self) -> usize {
        self.states.len()
    }
}

/// `gamma_breve_a(kappa) = s_breve_beta(kappa) - phi_breve_a(kappa)` for a
/// single dot, at `kappa = alpha/2 + gap`.
pub fn gamma_breve(gap: f64, model: &ModelParams) -> Result<f64> {
    let a = model.single_distance()?;
    let alpha = model.alpha;
    let kappa = 0.5 * alpha + gap;
    let shift = Complex64::new(-gap * (alpha + gap), 0.0);
    let phi = line_kernel(
        Complex64::new(-kappa * kappa, 0.0),
        shift,
        0.0,
        2.0 * a,
        alpha,
        &model.tolerances,
    )?;
    Ok(s_breve(kappa, model.betas[0]) - phi.re)
}

/// Upper end of the `kappa` scan: twice the largest decoupled-dot `kappa`
/// plus the threshold value `alpha`.
pub fn kappa_max(model: &ModelParams) -> f64 {
    let largest = model.betas.iter().map(|&b| kappa_beta(b)).fold(0.0, f64::max);
    2.0 * largest + model.alpha
}

/// Largest gap below which `f` is negative, found by decimation from `start`.
fn lower_bracket<F: Fn(f64) -> Result<f64>>(f: F, start: f64) -> Result<f64> {
    let mut gap = start;
    while gap > 1e-250 {
        if f(gap)? < 0.0 {
            return Ok(gap);
        }
        gap *= 1e-3;
    }
    Err(Error::BracketFailure("no sign change above threshold".into()))
}

fn upper_bracket<F: Fn(f64) -> Result<f64>>(f: F, start: f64) -> Result<f64> {
    let mut gap = start;
    for _ in 0..60 {
        if f(gap)? > 0.0 {
            return Ok(gap);
        }
        gap *= 2.0;
    }
    Err(Error::BracketFailure(format!("function still negative at gap {gap:e}")))
}

/// The unique bound state of a single dot at distance `a` from the line.
pub fn kappa_single(model: &ModelParams) -> Result<BoundState> {
    model.single_distance()?;
    let alpha = model.alpha;
    let f = |gap: f64| gamma_breve(gap, model);
    let hi = upper_bracket(f, kappa_max(model) - 0.5 * alpha)?;
    let lo = lower_bracket(f, (1e-3 * alpha).min(0.5 * hi))?;
    let root = brent(f, lo, hi, BRENT_ITERATIONS)?;
    let kappa = 0.5 * alpha + root.x;
    Ok(BoundState {
        energy: -kappa * kappa,
        kappa,
        gap: root.x,
        null_vector: vec![1.0],
        solver_residual: root.fx.abs(),
    })
}

fn sorted_eigenvalues(m: DMatrix<f64>) -> Vec<f64> {
    let mut values: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
    values.sort_by(f64::total_cmp);
    values
}

fn negative_count(gap: f64, model: &ModelParams) -> Result<usize> {
    let m = d_matrix_below_threshold(gap, model)?;
    Ok(sorted_eigenvalues(m).iter().filter(|v| **v < 0.0).count())
}

/// Every isolated eigenvalue below `-alpha^2/4`.
pub fn find_bound_states(model: &ModelParams) -> Result<BoundSpectrum> {
    model.validate()?;
    let n = model.len();
    if n == 0 {
        return Err(Error::InvalidModel("no point interactions".into()));
    }
    let alpha = model.alpha;
    let mut warnings = Vec::new();

    let mut gap_max = kappa_max(model) - 0.5 * alpha;
    while negative_count(gap_max, model)? > 0 {
        warnings.push(format!("scan extended beyond kappa = {}", gap_max + 0.5 * alpha));
        gap_max *= 2.0;
        if gap_max > 1e6 * alpha {
            return Err(Error::BracketFailure("D(-kappa^2) not positive for large kappa".into()));
        }
    }
    // push the lower end toward threshold until the negative count settles
    let mut gap_min = 1e-8 * alpha;
    let mut count = negative_count(gap_min, model)?;
    loop {
        let deeper = negative_count(gap_min * 1e-4, model)?;
        if deeper == count && count > 0 {
            break;
        }
        gap_min *= 1e-4;
        count = deeper;
        if gap_min < 1e-200 {
            warnings.push("negative eigenvalue count did not settle near threshold".into());
            break;
        }
    }

    let ratio = (gap_max / gap_min).ln();
    let grid: Vec<f64> = (0..SCAN_POINTS)
        .map(|i| gap_min * (ratio * i as f64 / (SCAN_POINTS - 1) as f64).exp())
        .collect();
    let spectra: Vec<Vec<f64>> = grid
        .par_iter()
        .map(|&g| d_matrix_below_threshold(g, model).map(sorted_eigenvalues))
        .collect::<Result<_>>()?;

    let mut states = Vec::new();
    for branch in 0..n {
        for w in 0..SCAN_POINTS - 1 {
            let (left, right) = (spectra[w][branch], spectra[w + 1][branch]);
            if left < 0.0 && right >= 0.0 {
                let f = |g: f64| Ok(sorted_eigenvalues(d_matrix_below_threshold(g, model)?)[branch]);
                let root = brent(f, grid[w], grid[w + 1], BRENT_ITERATIONS)?;
                states.push(polish_state(root.x, branch, model)?);
            } else if left >= 0.0 && right < 0.0 {
                warnings.push(format!("eigenvalue branch {branch} decreases near gap {:e}", grid[w]));
            }
        }
    }
    if states.len() != count {
        warnings.push(format!(
            "found {} roots but {} negative eigenvalues at threshold",
            states.len(),
            count
        ));
    }
    states.sort_by(|a, b| a.energy.total_cmp(&b.energy));
    let degenerate = states
        .windows(2)
        .any(|w| (w[1].gap - w[0].gap).abs() <= 1e-8 * w[0].kappa);
    if degenerate {
        warnings.push("near-degenerate roots; null vectors may mix".into());
    }
    Ok(BoundSpectrum {
        states,
        kappa_max: gap_max + 0.5 * alpha,
        degenerate,
        warnings,
    })
}

fn polish_state(gap: f64, branch: usize, model: &ModelParams) -> Result<BoundState> {
    let m = d_matrix_below_threshold(gap, model)?;
    let det = m.determinant();
    let eigen = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..eigen.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eigen.eigenvalues[i].total_cmp(&eigen.eigenvalues[j]));
    let column = eigen.eigenvectors.column(order[branch]);
    // fix the overall sign by the largest component
    let pivot = column.iter().copied().fold(0.0, |acc: f64, v| if v.abs() > acc.abs() { v } else { acc });
    let null_vector = column.iter().map(|v| v * pivot.signum()).collect();
    let kappa = 0.5 * model.alpha + gap;
    Ok(BoundState {
        energy: -kappa * kappa,
        kappa,
        gap,
        null_vector,
        solver_residual: det.abs(),
    })
}

/// Single-dot eigenfunction at `x`, normalised to one at the midpoint
/// between the dot and the line.
///
/// Up to normalisation this is `2 pi` times the Green's function of the line
/// Hamiltonian with one argument at the dot:
/// `K0(kappa |x - y|) + alpha int_0^inf cos(p (x1 - y1)) e^{-k(|x2| + a)} / (k (2k - alpha)) dp`
/// with `k = sqrt(p^2 + kappa^2)`.
pub fn eigenfunction_value(x: [f64; 2], state: &BoundState, model: &ModelParams) -> Result<f64> {
    let a = model.single_distance()?;
    let y = model.dots[0];
    let mid = [y[0], 0.5 * y[1]];
    let norm = unnormalised_eigenfunction(mid, state, model, a)?;
    Ok(unnormalised_eigenfunction(x, state, model, a)? / norm)
}

fn unnormalised_eigenfunction(x: [f64; 2], state: &BoundState, model: &ModelParams, a: f64) -> Result<f64> {
    let y = model.dots[0];
    let r = (x[0] - y[0]).hypot(x[1] - y[1]);
    if r == 0.0 {
        return Err(Error::SingularPoint(x));
    }
    let alpha = model.alpha;
    let kappa = state.kappa;
    let shift = Complex64::new(-state.gap * (alpha + state.gap), 0.0);
    let line = line_kernel(
        Complex64::new(-kappa * kappa, 0.0),
        shift,
        x[0] - y[0],
        x[1].abs() + a,
        alpha,
        &model.tolerances,
    )?;
    Ok(k0_real(kappa * r)? + 2.0 * PI * line.re)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single(alpha: f64, a: f64, beta: f64) -> ModelParams {
        ModelParams::single_dot(alpha, a, beta).unwrap()
    }

    #[test]
    fn epsilon_beta_examples() {
        assert!((epsilon_beta(0.0) + 1.260_947_006_748_773_6).abs() < 1e-12);
        for beta in [-1.0, 0.0, 1.0] {
            let kappa = (-epsilon_beta(beta)).sqrt();
            assert!(s_breve(kappa, beta).abs() < 1e-14);
            assert!((beta_for_level(epsilon_beta(beta)).unwrap() - beta).abs() < 1e-13);
        }
        let mut last = f64::NEG_INFINITY;
        for beta in [-1.0, 0.0, 0.5, 1.0, 3.0] {
            let e = epsilon_beta(beta);
            assert!(e > last && e < 0.0);
            last = e;
        }
    }

    #[test]
    fn single_dot_root_is_below_threshold() {
        let model = single(1.0, 1.0, 0.2);
        let state = kappa_single(&model).unwrap();
        assert!(state.energy < -0.25);
        assert!(state.solver_residual < 1e-12);
        assert!(gamma_breve(state.gap, &model).unwrap().abs() < 1e-12);
    }

    #[test]
    fn energy_increases_with_distance() {
        let mut last = f64::NEG_INFINITY;
        for a in [0.1, 0.5, 1.0, 2.0, 4.0, 8.0] {
            let e = kappa_single(&single(1.0, a, 0.0)).unwrap().energy;
            assert!(e > last, "a = {a}");
            last = e;
        }
    }

    #[test]
    fn large_distance_limits() {
        // deep dot: level tends to the decoupled one
        let beta = beta_for_level(-0.5).unwrap();
        let e = kappa_single(&single(1.0, 12.0, beta)).unwrap().energy;
        assert!((e + 0.5).abs() < 1e-3, "{e}");
        // shallow dot: level is pushed against the threshold
        let beta = beta_for_level(-0.1).unwrap();
        let e = kappa_single(&single(1.0, 12.0, beta)).unwrap().energy;
        assert!(e < -0.25 && e + 0.25 > -1e-6, "{e}");
    }

    #[test]
    fn scan_agrees_with_scalar_root() {
        let model = single(1.3, 0.7, -0.2);
        let scalar = kappa_single(&model).unwrap();
        let spectrum = find_bound_states(&model).unwrap();
        assert_eq!(spectrum.count(), 1);
        assert!((spectrum.states[0].gap - scalar.gap).abs() < 1e-10 * scalar.kappa);
    }

    #[test]
    fn strong_mirror_pair_binds_twice() {
        let model = ModelParams::new(1.0, vec![[0.0, 1.0], [0.0, -1.0]], vec![-2.0, -2.0]).unwrap();
        assert_eq!(find_bound_states(&model).unwrap().count(), 2);
        let model = ModelParams::new(1.0, vec![[0.0, 1.0], [0.0, -1.0]], vec![-0.2, -0.2]).unwrap();
        let spectrum = find_bound_states(&model).unwrap();
        assert_eq!(spectrum.count(), 2, "{:?}", spectrum.warnings);
        assert!(!spectrum.degenerate);
        // symmetric and antisymmetric null vectors
        let v0 = &spectrum.states[0].null_vector;
        let v1 = &spectrum.states[1].null_vector;
        assert!((v0[0] - v0[1]).abs() < 1e-8);
        assert!((v1[0] + v1[1]).abs() < 1e-8);
    }

    #[test]
    fn embedded_antisymmetric_level_is_not_reported() {
        // antisymmetric level of the pair lies in (-1/4, 0)
        let model = ModelParams::new(1.0, vec![[0.0, 1.0], [0.0, -1.0]], vec![0.08, 0.08]).unwrap();
        let spectrum = find_bound_states(&model).unwrap();
        assert_eq!(spectrum.count(), 1);
    }

    #[test]
    fn eigenfunction_is_even_and_normalised() {
        let model = single(1.0, 1.0, 0.0);
        let state = kappa_single(&model).unwrap();
        let at_mid = eigenfunction_value([0.0, 0.5], &state, &model).unwrap();
        assert!((at_mid - 1.0).abs() < 1e-14);
        for x in [[0.7, 0.3], [1.5, -2.0], [3.0, 1.0]] {
            let left = eigenfunction_value([-x[0], x[1]], &state, &model).unwrap();
            let right = eigenfunction_value(x, &state, &model).unwrap();
            assert!((left - right).abs() < 1e-12);
            assert!(right > 0.0);
        }
        assert!(matches!(
            eigenfunction_value([0.0, 1.0], &state, &model),
            Err(Error::SingularPoint(_))
        ));
    }
}
