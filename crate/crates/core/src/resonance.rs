//! Continuation of the single-dot determinant across `(-alpha^2/4, 0)` and
//! second-sheet pole search.
//!
//! With `t0 = z + alpha^2/4` the line coupling of a dot at distance `a` is
//!
//! ```text
//! phi(z) = int_0^inf mu(z, t) / (t - t0) dt,
//! mu(z, t) = alpha/(16 pi) (alpha + 2k) e^{-2ak} / (sqrt(t) k),  k = sqrt(t - z),
//! ```
//!
//! where `mu` is analytic in `z` for `Re z < 0`. All of the branching comes
//! from the pole `t0` crossing the integration path. Pushing it through the
//! positive axis from above picks up `2 pi i mu(z, t0) = 2 g(z)`, so
//!
//! ```text
//! phi^0(lambda) = PV int + g(lambda),     phi^-(z) = int + 2 g(z),
//! g(z) = (i alpha / 4) e^{-alpha a} / sqrt(z + alpha^2/4).
//! ```
//!
//! These determinations match `phi^+` on the interval from both sides.
//! Substituting `t = u^2` removes the `t^{-1/2}` endpoint and moves the pole
//! to `q = sqrt(t0)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bound::{beta_for_level, epsilon_beta};
use crate::error::{Error, Result};
use crate::model::{ModelParams, Tolerances};
use crate::quadrature::{integrate_cauchy_halfline, integrate_pv_halfline, QuadSpec};
use crate::roots::brent;
use crate::specfun::{decay_rate, k0_prime_real, k0_real, macdonald_k0, s_beta, s_breve, s_breve_prime};

/// Determination of the continued coupling: `l(z)` in `{+, 0, -}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sheet {
    /// Physical sheet: `Im z > 0`, and the real axis below the threshold.
    Upper,
    /// Boundary values on `(-alpha^2/4, 0)`.
    Boundary,
    /// Second sheet below the interval.
    Lower,
}

impl Sheet {
    pub fn label(self) -> &'static str {
        match self {
            Sheet::Upper => "+",
            Sheet::Boundary => "0",
            Sheet::Lower => "-",
        }
    }

    /// The label the continued function uses at `z`.
    pub fn of(z: Complex64) -> Self {
        if z.im > 0.0 {
            Sheet::Upper
        } else if z.im < 0.0 {
            Sheet::Lower
        } else {
            Sheet::Boundary
        }
    }
}

/// Region margins: `delta` keeps away from the interval ends, `depth` is the
/// largest `|Im z|` of the implemented second-sheet region.
fn region_margins(alpha: f64) -> (f64, f64) {
    (1e-3 * alpha * alpha, alpha * alpha / 8.0)
}

/// Whether `z` lies in the implemented `Omega_-`.
pub fn in_lower_region(z: Complex64, alpha: f64) -> bool {
    let (delta, depth) = region_margins(alpha);
    z.re > -0.25 * alpha * alpha + delta && z.re < -delta && z.im < 0.0 && z.im > -depth
}

/// An energy tagged with the determination used to evaluate it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SheetPoint {
    pub z: Complex64,
    pub sheet: Sheet,
}

impl SheetPoint {
    pub fn new(z: Complex64, sheet: Sheet, alpha: f64) -> Result<Self> {
        let out = Error::OutOfRegion { z, label: sheet.label() };
        let ok = match sheet {
            Sheet::Upper => z.im > 0.0 || (z.im == 0.0 && z.re < -0.25 * alpha * alpha),
            Sheet::Boundary => z.im == 0.0 && z.re > -0.25 * alpha * alpha && z.re < 0.0,
            Sheet::Lower => in_lower_region(z, alpha),
        };
        if ok {
            Ok(Self { z, sheet })
        } else {
            Err(out)
        }
    }

    /// Tags `z` with the label implied by the sign of `Im z`; real points
    /// below the threshold belong to the physical sheet.
    pub fn infer(z: Complex64, alpha: f64) -> Result<Self> {
        let sheet = if z.im == 0.0 && z.re <= -0.25 * alpha * alpha {
            Sheet::Upper
        } else {
            Sheet::of(z)
        };
        Self::new(z, sheet, alpha)
    }

    pub fn boundary(lambda: f64, alpha: f64) -> Result<Self> {
        Self::new(Complex64::new(lambda, 0.0), Sheet::Boundary, alpha)
    }
}

/// `mu(z, t)` with `k = sqrt(t - z)` principal, i.e. the determination
/// continuous from `Im z > 0`.
pub fn mu_kernel(z: Complex64, t: f64, alpha: f64, a: f64) -> Result<Complex64> {
    if !(t > 0.0) {
        return Err(Error::PoleAtEndpoint(t));
    }
    let k = (Complex64::new(t, 0.0) - z).sqrt();
    Ok(alpha / (16.0 * PI) * (k * 2.0 + alpha) * (-k * 2.0 * a).exp() / (k * t.sqrt()))
}

/// Boundary value `mu^0(lambda, t)`, real and positive for `t > 0 > lambda`.
pub fn mu0(lambda: f64, t: f64, alpha: f64, a: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::PoleAtEndpoint(t));
    }
    let k = (t - lambda).sqrt();
    Ok(alpha / (16.0 * PI) * (alpha + 2.0 * k) * (-2.0 * a * k).exp() / (k * t.sqrt()))
}

/// `mu^0` written through `b = e^{-a varsigma}`; only used for asymptotic fits.
pub fn mu0_reparametrised(lambda: f64, t: f64, alpha: f64, b: f64, varsigma: f64) -> f64 {
    let k = (t - lambda).sqrt();
    alpha / (16.0 * PI) * (alpha + 2.0 * k) * b.powf(2.0 * k / varsigma) / (k * t.sqrt())
}

/// `g(z) = (i alpha/4) e^{-alpha a} / sqrt(z + alpha^2/4)`, principal root.
pub fn g_coupling(z: Complex64, alpha: f64, a: f64) -> Complex64 {
    Complex64::i() * (0.25 * alpha * (-alpha * a).exp()) / (z + 0.25 * alpha * alpha).sqrt()
}

/// `g~(lambda) = -i g(lambda)`, positive on the interval.
pub fn g_tilde(lambda: f64, alpha: f64, a: f64) -> f64 {
    0.25 * alpha * (-alpha * a).exp() / (lambda + 0.25 * alpha * alpha).sqrt()
}

/// `2u mu(z, u^2)` continued to complex `u`.
fn mu_u(z: Complex64, u: Complex64, alpha: f64, a: f64) -> Complex64 {
    let k = (u * u - z).sqrt();
    alpha / (8.0 * PI) * (k * 2.0 + alpha) * (-k * 2.0 * a).exp() / k
}

fn coupling_spec(a: f64, tolerances: &Tolerances) -> QuadSpec {
    tolerances.quad_spec().with_first_panel((0.5 / a).min(1.0))
}

/// Continued coupling `phi^{l}(z)` for a dot at distance `a`.
pub fn phi_sheet(point: SheetPoint, alpha: f64, a: f64, tolerances: &Tolerances) -> Result<Complex64> {
    let z = point.z;
    let t0 = z + 0.25 * alpha * alpha;
    let spec = coupling_spec(a, tolerances);
    match point.sheet {
        Sheet::Boundary => {
            let lambda = z.re;
            let q = t0.re.sqrt();
            let f = |u: f64| {
                let k = (u * u - lambda).sqrt();
                alpha / (8.0 * PI) * (alpha + 2.0 * k) * (-2.0 * a * k).exp() / (k * (u + q))
            };
            let pv = integrate_pv_halfline(f, q, &spec.with_endpoint_transform(false))?;
            Ok(Complex64::new(pv.value, g_tilde(lambda, alpha, a)))
        }
        Sheet::Upper | Sheet::Lower => {
            let q = t0.sqrt();
            let f = |u: Complex64| mu_u(z, u, alpha, a) / (u + q);
            let direct = integrate_cauchy_halfline(f, q, &spec.with_endpoint_transform(false))?.value;
            if point.sheet == Sheet::Lower {
                Ok(direct + g_coupling(z, alpha, a) * 2.0)
            } else {
                Ok(direct)
            }
        }
    }
}

/// Continued single-dot determinant `eta(z) = s_beta(z) - phi^{l(z)}(z)`.
pub fn eta(point: SheetPoint, model: &ModelParams) -> Result<Complex64> {
    let a = model.single_distance()?;
    Ok(s_beta(point.z, model.betas[0])? - phi_sheet(point, model.alpha, a, &model.tolerances)?)
}

/// Small-parameter `b = e^{-a varsigma_beta}`, `varsigma_beta = sqrt(-epsilon_beta)`.
pub fn reparam_b(a: f64, beta: f64) -> f64 {
    (-a * (-epsilon_beta(beta)).sqrt()).exp()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResonancePole {
    pub z: Complex64,
    pub sheet: Sheet,
    /// `e^{-a varsigma}` for one dot, the coupling offset for the pair.
    pub b: f64,
    pub residual: f64,
    pub iterations: usize,
    /// Successive iterates, for convergence diagnostics.
    pub history: Vec<Complex64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub max_iterations: usize,
    /// Accept once `|eta| <= residual_tol * max(1, |s_beta|)`.
    pub residual_tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            max_iterations: 80,
            residual_tol: 1e-12,
        }
    }
}

/// Whether the continued function may be evaluated at `z` during iteration:
/// the band above the interval on the physical sheet, the interval itself,
/// or `Omega_-`.
fn admissible(z: Complex64, alpha: f64) -> bool {
    let (delta, depth) = region_margins(alpha);
    z.re > -0.25 * alpha * alpha + delta && z.re < -delta && z.im.abs() < depth
}

/// Damped secant iteration on a function of the continued energy.
fn damped_secant<F>(f: F, start: Complex64, alpha: f64, options: SolverOptions) -> Result<(Complex64, f64, Vec<Complex64>)>
where
    F: Fn(SheetPoint) -> Result<(Complex64, f64)>,
{
    if !admissible(start, alpha) {
        return Err(Error::OutOfRegion { z: start, label: Sheet::of(start).label() });
    }
    let eval = |z: Complex64| f(SheetPoint::infer(z, alpha)?);
    let mut history = vec![start];
    let mut z_prev = start;
    let (mut f_prev, _) = eval(z_prev)?;
    let mut z_cur = start - Complex64::new(0.0, 1e-4 * alpha * alpha);
    let (mut f_cur, _) = eval(z_cur)?;
    history.push(z_cur);
    for _ in 0..options.max_iterations {
        let residual = f_cur.norm();
        let slope = (f_cur - f_prev) / (z_cur - z_prev);
        if slope.norm() == 0.0 || !slope.is_finite() {
            return Err(Error::NoConvergence { iterations: history.len(), residual });
        }
        let mut step = -f_cur / slope;
        let mut halvings = 0;
        while !admissible(z_cur + step, alpha) {
            step *= 0.5;
            halvings += 1;
            if halvings > 60 {
                return Err(Error::OutOfRegion { z: z_cur + step, label: "-" });
            }
        }
        let z_next = z_cur + step;
        let (f_next, next_scale) = eval(z_next)?;
        history.push(z_next);
        z_prev = z_cur;
        f_prev = f_cur;
        z_cur = z_next;
        f_cur = f_next;
        let scale = next_scale.max(1.0);
        if f_cur.norm() <= options.residual_tol * scale {
            return Ok((z_cur, f_cur.norm(), history));
        }
        if step.norm() <= 4.0 * f64::EPSILON * z_cur.norm() {
            // stalled: accept only a root limited by rounding, not by the region wall
            if halvings == 0 && f_cur.norm() <= 1e3 * options.residual_tol * scale {
                return Ok((z_cur, f_cur.norm(), history));
            }
            return Err(if halvings > 0 {
                Error::OutOfRegion { z: z_cur, label: Sheet::of(z_cur).label() }
            } else {
                Error::NoConvergence { iterations: history.len(), residual: f_cur.norm() }
            });
        }
    }
    Err(Error::NoConvergence { iterations: history.len(), residual: f_cur.norm() })
}

/// Second-sheet zero of `eta` for one dot, started from `initial`
/// (customarily `epsilon_beta`).
pub fn find_pole(model: &ModelParams, initial: Complex64, options: SolverOptions) -> Result<ResonancePole> {
    let a = model.single_distance()?;
    let beta = model.betas[0];
    let f = |p: SheetPoint| {
        let s = s_beta(p.z, beta)?;
        Ok((s - phi_sheet(p, model.alpha, a, &model.tolerances)?, s.norm()))
    };
    let (z, residual, history) = damped_secant(f, initial, model.alpha, options)?;
    Ok(ResonancePole {
        z,
        sheet: Sheet::of(z),
        b: reparam_b(a, beta),
        residual,
        iterations: history.len() - 1,
        history,
    })
}

/// Normalisation of the free Green's factor in the two-dot equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GreenNormalization {
    /// `G = K0 / 2pi`, matching the diagonal `s_beta` normalisation.
    #[default]
    Consistent,
    /// Bare `K0`, as the two-dot equation is sometimes written.
    Bare,
}

impl GreenNormalization {
    pub fn factor(self) -> f64 {
        match self {
            Self::Consistent => 1.0 / (2.0 * PI),
            Self::Bare => 1.0,
        }
    }
}

/// Mirror pair at `(0, a)`, `(0, -a)` with parameters `(beta, beta + b)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoDotParams {
    pub alpha: f64,
    pub a: f64,
    pub beta: f64,
    #[serde(default)]
    pub normalization: GreenNormalization,
    #[serde(default)]
    pub tolerances: Tolerances,
}

impl TwoDotParams {
    pub fn new(alpha: f64, a: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0 && a > 0.0 && beta.is_finite()) {
            return Err(Error::InvalidModel(format!("alpha = {alpha}, a = {a}, beta = {beta}")));
        }
        Ok(Self {
            alpha,
            a,
            beta,
            normalization: GreenNormalization::Consistent,
            tolerances: Tolerances::default(),
        })
    }

    pub fn with_normalization(mut self, normalization: GreenNormalization) -> Self {
        self.normalization = normalization;
        self
    }

    pub fn model(&self, b: f64) -> Result<ModelParams> {
        ModelParams::new(self.alpha, vec![[0.0, self.a], [0.0, -self.a]], vec![self.beta, self.beta + b])
            .map(|m| m.with_tolerances(self.tolerances))
    }

    fn green(&self, z: Complex64) -> Result<Complex64> {
        Ok(macdonald_k0(decay_rate(z)? * (2.0 * self.a))? * self.normalization.factor())
    }
}

/// Left side of the two-dot equation,
/// `s (s + b) - G^2 - (2s + b) phi - 2 G phi`.
pub fn eta_hat2(b: f64, point: SheetPoint, params: &TwoDotParams) -> Result<Complex64> {
    Ok(eta_hat2_parts(b, point, params)?.0)
}

fn eta_hat2_parts(b: f64, point: SheetPoint, params: &TwoDotParams) -> Result<(Complex64, f64)> {
    let s = s_beta(point.z, params.beta)?;
    let g = params.green(point.z)?;
    let phi = phi_sheet(point, params.alpha, params.a, &params.tolerances)?;
    let value = s * (s + b) - g * g - (s * 2.0 + b) * phi - g * phi * 2.0;
    Ok((value, s.norm_sqr()))
}

/// Second-sheet (or, at `b = 0`, embedded) zero of the two-dot equation.
pub fn find_pole2(b: f64, params: &TwoDotParams, initial: Complex64, options: SolverOptions) -> Result<ResonancePole> {
    let f = |p: SheetPoint| eta_hat2_parts(b, p, params);
    let (z, residual, history) = damped_secant(f, initial, params.alpha, options)?;
    Ok(ResonancePole {
        z,
        sheet: Sheet::of(z),
        b,
        residual,
        iterations: history.len() - 1,
        history,
    })
}

/// Levels of the decoupled mirror pair: `s_breve = c K0(2 a kappa)` gives the
/// lower `eps1`, `s_breve = -c K0(2 a kappa)` the upper `eps2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TwoPointLevels {
    pub eps1: f64,
    /// `None` when the antisymmetric equation has no root.
    pub eps2: Option<f64>,
}

fn smallest_root<F: Fn(f64) -> Result<f64>>(f: F, hi: f64) -> Result<Option<f64>> {
    let points = 600;
    let lo: f64 = 1e-12;
    let ratio = (hi / lo).ln();
    let mut prev_k = lo;
    let mut prev = f(lo)?;
    for i in 1..=points {
        let k = lo * (ratio * i as f64 / points as f64).exp();
        let v = f(k)?;
        if prev < 0.0 && v >= 0.0 {
            return Ok(Some(brent(&f, prev_k, k, 200)?.x));
        }
        prev_k = k;
        prev = v;
    }
    Ok(None)
}

pub fn two_point_levels(a: f64, beta: f64, normalization: GreenNormalization) -> Result<TwoPointLevels> {
    let c = normalization.factor();
    let green = |kappa: f64| Ok(c * k0_real(2.0 * a * kappa)?);
    let mut hi = 4.0 * (-epsilon_beta(beta)).sqrt() + 4.0 / a;
    while s_breve(hi, beta) - green(hi)? <= 0.0 || s_breve(hi, beta) + green(hi)? <= 0.0 {
        hi *= 2.0;
    }
    let symmetric = smallest_root(|k| Ok(s_breve(k, beta) - green(k)?), hi)?
        .ok_or_else(|| Error::BracketFailure("symmetric pair level not found".into()))?;
    let antisymmetric = smallest_root(|k| Ok(s_breve(k, beta) + green(k)?), hi)?;
    Ok(TwoPointLevels {
        eps1: -symmetric * symmetric,
        eps2: antisymmetric.map(|k| -k * k),
    })
}

/// Parameter `beta` that puts the antisymmetric pair level at `eps2`.
pub fn beta_for_pair_level(a: f64, eps2: f64, normalization: GreenNormalization) -> Result<f64> {
    let kappa = (-eps2).sqrt();
    Ok(beta_for_level(eps2)? - normalization.factor() * k0_real(2.0 * a * kappa)?)
}

/// Small-`b` expansion coefficients of `z2(b) = mu2(b) + i nu2(b)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TwoPointExpansion {
    pub eps2: f64,
    pub kappa2: f64,
    /// `s_breve'(kappa2) + c 2a K0'(2a kappa2)`.
    pub slope_denominator: f64,
    /// `d mu2 / db` at zero.
    pub mu2_slope: f64,
    /// `nu2 / b^2` with the factor 2 in the denominator.
    pub nu2_coefficient: f64,
    /// `nu2 / b^2` from a second-order expansion of the determinant, which
    /// carries a 4 in place of the 2.
    pub nu2_coefficient_second_order: f64,
}

pub fn two_point_expansion(params: &TwoDotParams) -> Result<TwoPointExpansion> {
    let levels = two_point_levels(params.a, params.beta, params.normalization)?;
    let eps2 = levels
        .eps2
        .ok_or_else(|| Error::InvalidModel("pair has no antisymmetric level".into()))?;
    let (alpha, a) = (params.alpha, params.a);
    let kappa2 = (-eps2).sqrt();
    let c = params.normalization.factor();
    let slope_denominator = s_breve_prime(kappa2) + c * 2.0 * a * k0_prime_real(2.0 * a * kappa2)?;
    let point = SheetPoint::boundary(eps2, alpha)?;
    let phi0 = phi_sheet(point, alpha, a, &params.tolerances)?;
    let gap = (s_breve(kappa2, params.beta) - phi0).norm_sqr();
    let numerator = -kappa2 * g_tilde(eps2, alpha, a);
    Ok(TwoPointExpansion {
        eps2,
        kappa2,
        slope_denominator,
        mu2_slope: kappa2 / slope_denominator,
        nu2_coefficient: numerator / (2.0 * slope_denominator * gap),
        nu2_coefficient_second_order: numerator / (4.0 * slope_denominator * gap),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::phi_kl;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn upper_sheet_matches_momentum_form() {
        let model = ModelParams::single_dot(1.0, 2.0, 0.0).unwrap();
        for z in [c(-0.1, 0.05), c(-0.2, 0.01), c(-0.5, 0.3)] {
            let via_t = phi_sheet(SheetPoint::infer(z, 1.0).unwrap(), 1.0, 2.0, &tol()).unwrap();
            let via_p = phi_kl(z, 0, 0, &model).unwrap();
            assert!((via_t - via_p).norm() < 1e-11, "{z}: {via_t} {via_p}");
        }
    }

    #[test]
    fn physical_sheet_reaches_the_bound_state_axis() {
        let model = ModelParams::single_dot(1.0, 1.5, 0.1).unwrap();
        for kappa in [0.6, 1.0, 3.0] {
            let point = SheetPoint::infer(c(-kappa * kappa, 0.0), 1.0).unwrap();
            assert_eq!(point.sheet, Sheet::Upper);
            let via_t = eta(point, &model).unwrap();
            let via_p = crate::bound::gamma_breve(kappa - 0.5, &model).unwrap();
            assert!((via_t.re - via_p).abs() < 1e-12 && via_t.im.abs() < 1e-14, "{via_t} {via_p}");
        }
    }

    #[test]
    fn boundary_value_imaginary_part_is_g_tilde() {
        for lambda in [-0.2, -0.125, -0.03] {
            let phi = phi_sheet(SheetPoint::boundary(lambda, 1.0).unwrap(), 1.0, 2.0, &tol()).unwrap();
            assert_eq!(phi.im, g_tilde(lambda, 1.0, 2.0));
        }
    }

    #[test]
    fn determinations_match_across_the_interval() {
        let lambda = -0.125;
        let zero = phi_sheet(SheetPoint::boundary(lambda, 1.0).unwrap(), 1.0, 2.0, &tol()).unwrap();
        for eps in [1e-4, 1e-5] {
            let up = phi_sheet(SheetPoint::new(c(lambda, eps), Sheet::Upper, 1.0).unwrap(), 1.0, 2.0, &tol()).unwrap();
            let down = phi_sheet(SheetPoint::new(c(lambda, -eps), Sheet::Lower, 1.0).unwrap(), 1.0, 2.0, &tol()).unwrap();
            assert!((up - zero).norm() < 10.0 * eps, "{eps}: {}", (up - zero).norm());
            assert!((down - zero).norm() < 10.0 * eps, "{eps}: {}", (down - zero).norm());
        }
    }

    #[test]
    fn mu_boundary_limit_and_positivity() {
        for lambda in [-0.2, -0.1] {
            for t in [0.01, 0.5, 3.0] {
                let m0 = mu0(lambda, t, 1.0, 2.0).unwrap();
                assert!(m0 > 0.0);
                let m = mu_kernel(c(lambda, 1e-9), t, 1.0, 2.0).unwrap();
                assert!((m - m0).norm() < 1e-8 * m0.max(1.0));
            }
        }
        let b = reparam_b(2.0, 0.0);
        let varsigma = (-epsilon_beta(0.0)).sqrt();
        let r = mu0_reparametrised(-0.1, 0.7, 1.0, b, varsigma);
        assert!((r - mu0(-0.1, 0.7, 1.0, 2.0).unwrap()).abs() < 1e-14 * r);
    }

    #[test]
    fn region_membership() {
        assert!(SheetPoint::new(c(-0.1, -0.01), Sheet::Lower, 1.0).is_ok());
        assert!(SheetPoint::new(c(-0.1, -0.2), Sheet::Lower, 1.0).is_err());
        assert!(SheetPoint::new(c(-0.3, -0.01), Sheet::Lower, 1.0).is_err());
        assert!(SheetPoint::new(c(-0.1, 0.0), Sheet::Upper, 1.0).is_err());
        assert!(SheetPoint::boundary(0.1, 1.0).is_err());
    }

    #[test]
    fn single_dot_pole_is_below_the_axis() {
        let beta = beta_for_level(-0.1).unwrap();
        let model = ModelParams::single_dot(1.0, 6.0, beta).unwrap();
        let pole = find_pole(&model, c(-0.1, 0.0), SolverOptions::default()).unwrap();
        assert!(pole.z.im < 0.0);
        assert!((pole.z.re + 0.1).abs() < 0.02);
        let eta_at = eta(SheetPoint::infer(pole.z, 1.0).unwrap(), &model).unwrap();
        assert!(eta_at.norm() < 1e-10);
    }

    #[test]
    fn pole_leaving_the_region_is_reported() {
        // for a = 1 the zero sits beyond Re z = 0
        let beta = beta_for_level(-0.1).unwrap();
        let model = ModelParams::single_dot(1.0, 1.0, beta).unwrap();
        assert!(find_pole(&model, c(-0.1, 0.0), SolverOptions::default()).is_err());
    }

    #[test]
    fn pair_levels_order_and_decoupling() {
        let levels = two_point_levels(1.0, 0.08, GreenNormalization::Consistent).unwrap();
        let eps2 = levels.eps2.unwrap();
        assert!(levels.eps1 < eps2 && eps2 < 0.0);
        assert!((eps2 + 0.353_405_070_710_855f64.powi(2)).abs() < 1e-12);
        let far = two_point_levels(40.0, 0.08, GreenNormalization::Consistent).unwrap();
        assert!((far.eps1 - epsilon_beta(0.08)).abs() < 1e-12);
        assert!((far.eps2.unwrap() - epsilon_beta(0.08)).abs() < 1e-12);
        // antisymmetric level disappears once beta exceeds ln(2a)/2pi
        let none = two_point_levels(1.0, 0.2, GreenNormalization::Consistent).unwrap();
        assert!(none.eps2.is_none());
    }

    #[test]
    fn embedded_level_solves_pair_equation() {
        let params = TwoDotParams::new(1.0, 1.0, 0.08).unwrap();
        let eps2 = two_point_levels(1.0, 0.08, params.normalization).unwrap().eps2.unwrap();
        let point = SheetPoint::boundary(eps2, 1.0).unwrap();
        assert!(eta_hat2(0.0, point, &params).unwrap().norm() < 1e-14);
        let beta = beta_for_pair_level(1.0, eps2, params.normalization).unwrap();
        assert!((beta - 0.08).abs() < 1e-13);
    }
}
