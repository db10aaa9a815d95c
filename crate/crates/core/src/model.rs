//! Birman-Schwinger reduction of the line-plus-points operator.
//!
//! The line block `Gamma_00` is diagonal in the longitudinal momentum `p`,
//! with multiplier `1/alpha - 1/(2 sqrt(p^2 - z))`. Eliminating it leaves the
//! `n x n` reduced matrix
//!
//! ```text
//! D_kl(z) = s_{beta_k}(z) delta_kl - G_z(y_k, y_l) (1 - delta_kl) - phi_kl(z)
//! ```
//!
//! with `G_z = K0(sqrt(-z) |x - x'|) / 2pi` and the line-dressed coupling
//!
//! ```text
//! phi_kl(z) = alpha/(4 pi) int_R e^{i p (y1_k - y1_l)} e^{-k (|y2_k| + |y2_l|)} / (k (2k - alpha)) dp,
//! k = sqrt(p^2 - z).
//! ```

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{integrate_halfline, QuadSpec};
use crate::specfun::{decay_rate, k0_real, macdonald_k0, s_beta, s_breve, PSI_ONE};

/// Quadrature tolerances used for every kernel integral of a model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub abs_tol: f64,
    pub rel_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            abs_tol: 1e-14,
            rel_tol: 1e-12,
        }
    }
}

impl Tolerances {
    pub fn quad_spec(&self) -> QuadSpec {
        QuadSpec::default().with_tolerances(self.abs_tol, self.rel_tol)
    }
}

/// Operator data: line strength, point positions and point parameters.
///
/// `betas` are the boundary-condition parameters of the point interactions;
/// `beta = +inf` would mean no interaction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub alpha: f64,
    pub dots: Vec<[f64; 2]>,
    pub betas: Vec<f64>,
    #[serde(default)]
    pub tolerances: Tolerances,
}

impl ModelParams {
    pub fn new(alpha: f64, dots: Vec<[f64; 2]>, betas: Vec<f64>) -> Result<Self> {
        let model = Self {
            alpha,
            dots,
            betas,
            tolerances: Tolerances::default(),
        };
        model.validate()?;
        Ok(model)
    }

    /// One point interaction at `(0, a)`.
    pub fn single_dot(alpha: f64, a: f64, beta: f64) -> Result<Self> {
        Self::new(alpha, vec![[0.0, a]], vec![beta])
    }

    pub fn with_tolerances(mut self, tolerances: Tolerances) -> Self {
        self.tolerances = tolerances;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::InvalidModel(format!("alpha must be positive, got {}", self.alpha)));
        }
        if self.dots.len() != self.betas.len() {
            return Err(Error::InvalidModel(format!(
                "{} dots but {} betas",
                self.dots.len(),
                self.betas.len()
            )));
        }
        for (i, y) in self.dots.iter().enumerate() {
            if !(y[0].is_finite() && y[1].is_finite()) || y[1] == 0.0 {
                return Err(Error::InvalidModel(format!("dot {i} at {y:?} must lie off the line")));
            }
            for (j, other) in self.dots.iter().enumerate().skip(i + 1) {
                if y == other {
                    return Err(Error::InvalidModel(format!("dots {i} and {j} coincide")));
                }
            }
        }
        if let Some(b) = self.betas.iter().find(|b| !b.is_finite()) {
            return Err(Error::InvalidModel(format!("beta must be finite, got {b}")));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.dots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dots.is_empty()
    }

    /// Bottom of the guided continuum, `-alpha^2/4`.
    pub fn threshold(&self) -> f64 {
        -0.25 * self.alpha * self.alpha
    }

    /// Distance of the single dot from the line; errors unless `n = 1`.
    pub fn single_distance(&self) -> Result<f64> {
        match self.dots.as_slice() {
            [y] => Ok(y[1].abs()),
            _ => Err(Error::InvalidModel(format!("expected one dot, got {}", self.len()))),
        }
    }

    fn separation(&self, k: usize, l: usize) -> f64 {
        let (a, b) = (self.dots[k], self.dots[l]);
        (a[0] - b[0]).hypot(a[1] - b[1])
    }

    fn pair_geometry(&self, k: usize, l: usize) -> (f64, f64) {
        let (a, b) = (self.dots[k], self.dots[l]);
        (a[0] - b[0], a[1].abs() + b[1].abs())
    }
}

/// Fourier multiplier of `Gamma_00(z)`: `1/alpha - 1/(2 sqrt(p^2 - z))`.
pub fn gamma00_multiplier(p: f64, z: Complex64, alpha: f64) -> Result<Complex64> {
    let root = (Complex64::new(p * p, 0.0) - z).sqrt();
    let value = 1.0 / alpha - 0.5 / root;
    if value.norm() < 1e-14 {
        return Err(Error::Threshold { p, z });
    }
    Ok(value)
}

/// Integral `alpha/(2 pi) int_0^inf cos(p dx) e^{-k depth} / (k (2k - alpha)) dp`.
///
/// `shift = z + alpha^2/4` is passed separately so callers on the real axis
/// can supply it without cancellation; `2k - alpha` is formed as
/// `4 (p^2 - shift) / (2k + alpha)`.
pub fn line_kernel(
    z: Complex64,
    shift: Complex64,
    dx: f64,
    depth: f64,
    alpha: f64,
    tolerances: &Tolerances,
) -> Result<Complex64> {
    let near_cut = shift.re >= 0.0 && shift.im.abs() <= 1e-12 * alpha * alpha;
    if near_cut {
        return Err(Error::PoleOnPath(z));
    }
    let integrand = |p: f64| {
        let p2 = Complex64::new(p * p, 0.0);
        let k = (p2 - z).sqrt();
        let gap = (p2 - shift) * 4.0 / (k * 2.0 + alpha);
        (p * dx).cos() * (-k * depth).exp() / (k * gap)
    };
    // the integrand peaks on the scale sqrt|shift| near threshold and decays on 1/depth
    let scale = shift.norm().sqrt().max(1e-9).min(1.0 / depth).min(1.0);
    let spec = tolerances.quad_spec().with_first_panel(scale);
    let r = integrate_halfline(integrand, &spec)?;
    Ok(r.value * (alpha / (2.0 * PI)))
}

/// Line-dressed coupling `phi_kl(z)` between dots `k` and `l`.
pub fn phi_kl(z: Complex64, k: usize, l: usize, model: &ModelParams) -> Result<Complex64> {
    let alpha = model.alpha;
    let (dx, depth) = model.pair_geometry(k, l);
    line_kernel(z, z + 0.25 * alpha * alpha, dx, depth, alpha, &model.tolerances)
}

/// `phi_kl(-kappa^2)` for `kappa = alpha/2 + gap`, accurate for tiny `gap`.
///
/// `gap` may be complex with `Re kappa > alpha/2`.
pub fn phi_kl_at_gap(gap: Complex64, k: usize, l: usize, model: &ModelParams) -> Result<Complex64> {
    let alpha = model.alpha;
    let kappa = gap + 0.5 * alpha;
    let (dx, depth) = model.pair_geometry(k, l);
    let shift = -gap * (gap + alpha);
    line_kernel(-kappa * kappa, shift, dx, depth, alpha, &model.tolerances)
}

/// Off-diagonal free Green's function `K0(sqrt(-z) r) / 2pi`.
pub fn free_green(z: Complex64, r: f64) -> Result<Complex64> {
    Ok(macdonald_k0(decay_rate(z)? * r)? / (2.0 * PI))
}

/// The reduced determinant matrix at one energy.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedDeterminant {
    pub z: Complex64,
    pub entries: DMatrix<Complex64>,
    pub det: Complex64,
    /// 1-norm condition number; infinite when `D` is numerically singular.
    pub cond_estimate: f64,
}

impl ReducedDeterminant {
    fn from_entries(z: Complex64, entries: DMatrix<Complex64>) -> Self {
        let det = if entries.is_empty() {
            Complex64::new(1.0, 0.0)
        } else {
            entries.determinant()
        };
        let cond_estimate = if entries.is_empty() {
            1.0
        } else {
            match entries.clone().try_inverse() {
                Some(inv) => one_norm(&entries) * one_norm(&inv),
                None => f64::INFINITY,
            }
        };
        Self {
            z,
            entries,
            det,
            cond_estimate,
        }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    /// Unit vector spanning the numerical kernel: the right singular vector of
    /// the smallest singular value, with its singular value.
    pub fn null_vector(&self) -> Option<(Vec<Complex64>, f64)> {
        if self.entries.is_empty() {
            return None;
        }
        let svd = self.entries.clone().svd(false, true);
        let v_t = svd.v_t?;
        let (idx, sigma) = svd
            .singular_values
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))?;
        let row = v_t.row(idx);
        Some((row.iter().map(|c| c.conj()).collect(), *sigma))
    }
}

fn one_norm(m: &DMatrix<Complex64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|v| v.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `D(z)` for `z` off `[-alpha^2/4, inf)`.
pub fn d_matrix(z: Complex64, model: &ModelParams) -> Result<ReducedDeterminant> {
    let n = model.len();
    let mut entries = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
    for k in 0..n {
        for l in k..n {
            let phi = phi_kl(z, k, l, model)?;
            let value = if k == l {
                s_beta(z, model.betas[k])? - phi
            } else {
                -free_green(z, model.separation(k, l))? - phi
            };
            entries[(k, l)] = value;
            entries[(l, k)] = value;
        }
    }
    Ok(ReducedDeterminant::from_entries(z, entries))
}

/// `D(-kappa^2)` parametrised by the excess `gap = kappa - alpha/2`.
///
/// Valid for complex `gap` with `Re gap > 0` as long as
/// `alpha^2/4 - kappa^2` stays off `[0, inf)`; this is the form used for
/// zero counting in the `kappa` plane.
pub fn d_matrix_at_gap(gap: Complex64, model: &ModelParams) -> Result<ReducedDeterminant> {
    let n = model.len();
    let kappa = gap + 0.5 * model.alpha;
    let mut entries = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
    for k in 0..n {
        for l in k..n {
            let phi = phi_kl_at_gap(gap, k, l, model)?;
            let value = if k == l {
                (kappa / 2.0).ln() / (2.0 * PI) - PSI_ONE / (2.0 * PI) + model.betas[k] - phi
            } else {
                -macdonald_k0(kappa * model.separation(k, l))? / (2.0 * PI) - phi
            };
            entries[(k, l)] = value;
            entries[(l, k)] = value;
        }
    }
    Ok(ReducedDeterminant::from_entries(-kappa * kappa, entries))
}

/// Real symmetric `D(-kappa^2)` for `kappa = alpha/2 + gap`, `gap > 0`.
pub fn d_matrix_below_threshold(gap: f64, model: &ModelParams) -> Result<DMatrix<f64>> {
    let n = model.len();
    let kappa = 0.5 * model.alpha + gap;
    let mut entries = DMatrix::zeros(n, n);
    for k in 0..n {
        for l in k..n {
            let phi = phi_kl_at_gap(Complex64::new(gap, 0.0), k, l, model)?.re;
            let value = if k == l {
                s_breve(kappa, model.betas[k]) - phi
            } else {
                -k0_real(kappa * model.separation(k, l))? / (2.0 * PI) - phi
            };
            entries[(k, l)] = value;
            entries[(l, k)] = value;
        }
    }
    Ok(entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// phi_a(kappa) in the `t = p^2` variable, integrated on a finite
    /// truncated range with the `t = u^2` map undone: an alternate path.
    fn phi_breve_alternate(kappa: f64, a: f64, alpha: f64) -> f64 {
        let g = |t: f64| {
            let k = (t + kappa * kappa).sqrt();
            (-2.0 * k * a).exp() / ((2.0 * k - alpha) * k * t.sqrt())
        };
        // substitute t = v^4 on [0, 1] to tame t^{-1/2}, then plain on [1, T]
        let spec = QuadSpec::default().with_tolerances(1e-15, 1e-13);
        let head = integrate(|v: f64| g(v.powi(4)) * 4.0 * v.powi(3), 0.0, 1.0, &spec).unwrap();
        let cutoff = (40.0 / (2.0 * a)).powi(2).max(4.0);
        let tail = integrate(g, 1.0, cutoff, &spec).unwrap();
        alpha / (4.0 * PI) * (head.value + tail.value)
    }

    #[test]
    fn multiplier_examples() {
        let (alpha, kappa) = (1.0, 0.8);
        let m = gamma00_multiplier(0.0, c(-kappa * kappa, 0.0), alpha).unwrap();
        assert!((m - c(1.0 / alpha - 0.5 / kappa, 0.0)).norm() < 1e-15);
        // zero locus p^2 + kappa^2 = alpha^2/4
        let p = (0.25f64 - 0.09).sqrt();
        assert!(matches!(
            gamma00_multiplier(p, c(-0.09, 0.0), 1.0),
            Err(Error::Threshold { .. })
        ));
        for p in [0.0, 0.3, 2.0, 50.0] {
            let m = gamma00_multiplier(p, c(-0.36, 0.0), 1.0).unwrap();
            assert!(m.re > 0.0 && m.im == 0.0);
        }
    }

    #[test]
    fn diagonal_phi_matches_alternate_path() {
        let model = ModelParams::single_dot(1.0, 1.0, 0.0).unwrap();
        let direct = phi_kl(c(-1.0, 0.0), 0, 0, &model).unwrap();
        let alternate = phi_breve_alternate(1.0, 1.0, 1.0);
        assert!(direct.im.abs() < 1e-15);
        assert!((direct.re - alternate).abs() < 1e-9 * alternate.abs(), "{direct} {alternate}");
        let gap = phi_kl_at_gap(c(0.5, 0.0), 0, 0, &model).unwrap();
        assert!((gap - direct).norm() < 1e-14);
    }

    #[test]
    fn phi_decreases_with_distance_and_vanishes() {
        let kappa = 0.7;
        let mut last = f64::INFINITY;
        for a in [0.1, 0.5, 1.0, 2.0, 5.0, 40.0] {
            let model = ModelParams::single_dot(1.0, a, 0.0).unwrap();
            let v = phi_kl(c(-kappa * kappa, 0.0), 0, 0, &model).unwrap().re;
            assert!(v < last && v > 0.0);
            last = v;
        }
        assert!(last < 1e-20, "{last}");
    }

    #[test]
    fn single_dot_matrix_is_gamma_breve() {
        let model = ModelParams::single_dot(1.0, 1.5, 0.2).unwrap();
        let kappa = 0.9;
        let d = d_matrix(c(-kappa * kappa, 0.0), &model).unwrap();
        let phi = phi_kl(c(-kappa * kappa, 0.0), 0, 0, &model).unwrap().re;
        assert_eq!(d.dim(), 1);
        assert!((d.det.re - (s_breve(kappa, 0.2) - phi)).abs() < 1e-14);
    }

    #[test]
    fn empty_model_has_unit_determinant() {
        let model = ModelParams::new(1.0, vec![], vec![]).unwrap();
        let d = d_matrix(c(-1.0, 0.0), &model).unwrap();
        assert_eq!(d.dim(), 0);
        assert_eq!(d.det, c(1.0, 0.0));
    }

    #[test]
    fn mirror_configuration_commutes_with_swap() {
        let model = ModelParams::new(1.0, vec![[0.3, 1.0], [-0.3, 1.0]], vec![0.1, 0.1]).unwrap();
        let d = d_matrix(c(-0.5, 0.2), &model).unwrap();
        let e = &d.entries;
        assert!((e[(0, 0)] - e[(1, 1)]).norm() < 1e-13);
        assert!((e[(0, 1)] - e[(1, 0)]).norm() < 1e-13);
    }

    #[test]
    fn real_and_symmetric_below_threshold() {
        let model = ModelParams::new(
            1.2,
            vec![[0.0, 0.7], [1.1, -0.4], [-0.5, 1.9]],
            vec![0.1, -0.3, 0.4],
        )
        .unwrap();
        for kappa in [0.61, 0.9, 2.5] {
            let d = d_matrix(c(-kappa * kappa, 0.0), &model).unwrap();
            let real = d_matrix_below_threshold(kappa - 0.6, &model).unwrap();
            for k in 0..3 {
                for l in 0..3 {
                    assert!(d.entries[(k, l)].im.abs() < 1e-12);
                    assert!((d.entries[(k, l)].re - real[(k, l)]).abs() < 1e-12);
                    assert_eq!(d.entries[(k, l)], d.entries[(l, k)]);
                }
            }
        }
    }

    #[test]
    fn conjugation_symmetry_off_axis() {
        let model = ModelParams::new(1.0, vec![[0.0, 1.0], [0.8, -0.5]], vec![0.0, 0.2]).unwrap();
        for z in [c(-0.7, 0.3), c(-2.0, 1.5), c(0.5, 0.8)] {
            let up = d_matrix(z, &model).unwrap();
            let down = d_matrix(z.conj(), &model).unwrap();
            for (a, b) in up.entries.iter().zip(down.entries.iter()) {
                assert!((a - b.conj()).norm() < 1e-12 * (1.0 + a.norm()));
            }
        }
    }

    #[test]
    fn complex_gap_form_matches_energy_form() {
        let model = ModelParams::new(1.0, vec![[0.0, 1.0], [0.8, -0.5]], vec![0.0, 0.2]).unwrap();
        let gap = c(0.3, 0.1);
        let kappa = gap + 0.5;
        let a = d_matrix_at_gap(gap, &model).unwrap();
        let b = d_matrix(-kappa * kappa, &model).unwrap();
        assert!((a.det - b.det).norm() < 1e-12);
    }

    #[test]
    fn pole_on_path_is_rejected() {
        let model = ModelParams::single_dot(1.0, 1.0, 0.0).unwrap();
        assert!(matches!(
            phi_kl(c(-0.1, 0.0), 0, 0, &model),
            Err(Error::PoleOnPath(_))
        ));
    }

    #[test]
    fn null_vector_of_singular_matrix() {
        let entries = DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(2.0, 0.0), c(2.0, 0.0), c(4.0, 0.0)]);
        let d = ReducedDeterminant::from_entries(c(-1.0, 0.0), entries.clone());
        let (v, sigma) = d.null_vector().unwrap();
        assert!(sigma < 1e-14);
        let image = &entries * nalgebra::DVector::from_vec(v);
        assert!(image.norm() < 1e-14);
        assert!(d.cond_estimate > 1e14);
    }

    #[test]
    fn invalid_models_rejected() {
        assert!(ModelParams::new(0.0, vec![[0.0, 1.0]], vec![0.0]).is_err());
        assert!(ModelParams::new(1.0, vec![[0.0, 0.0]], vec![0.0]).is_err());
        assert!(ModelParams::new(1.0, vec![[0.0, 1.0]], vec![]).is_err());
        assert!(ModelParams::new(1.0, vec![[0.0, 1.0], [0.0, 1.0]], vec![0.0, 0.0]).is_err());
    }
}
