//! Slow reference implementations used by the test suite and `selftest`.
//!
//! Each routine takes a different route from the production code it checks:
//! multiprecision series instead of double-precision series plus quadrature,
//! a double-exponential rule with symmetric excision instead of adaptive
//! Gauss-Kronrod with subtraction, a finite-difference transverse operator
//! instead of the closed-form line multiplier, and argument-principle zero
//! counting instead of sign-change scanning.

use std::f64::consts::PI;

use astro_float::{BigFloat, Consts, Radix, RoundingMode};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

const PRECISION: usize = 256;
const RM: RoundingMode = RoundingMode::ToEven;
const EULER_GAMMA: &str =
    "0.5772156649015328606065120900824024310421593359399235988057672348848677267776646709369470632917467495";

#[derive(Clone)]
struct BigComplex {
    re: BigFloat,
    im: BigFloat,
}

impl BigComplex {
    fn new(re: BigFloat, im: BigFloat) -> Self {
        Self { re, im }
    }

    fn from_c64(w: Complex64) -> Self {
        Self::new(BigFloat::from_f64(w.re, PRECISION), BigFloat::from_f64(w.im, PRECISION))
    }

    fn zero() -> Self {
        Self::from_c64(Complex64::new(0.0, 0.0))
    }

    fn add(&self, o: &Self) -> Self {
        Self::new(self.re.add(&o.re, PRECISION, RM), self.im.add(&o.im, PRECISION, RM))
    }

    fn sub(&self, o: &Self) -> Self {
        Self::new(self.re.sub(&o.re, PRECISION, RM), self.im.sub(&o.im, PRECISION, RM))
    }

    fn mul(&self, o: &Self) -> Self {
        let re = self.re.mul(&o.re, PRECISION, RM).sub(&self.im.mul(&o.im, PRECISION, RM), PRECISION, RM);
        let im = self.re.mul(&o.im, PRECISION, RM).add(&self.im.mul(&o.re, PRECISION, RM), PRECISION, RM);
        Self::new(re, im)
    }

    fn scale(&self, s: &BigFloat) -> Self {
        Self::new(self.re.mul(s, PRECISION, RM), self.im.mul(s, PRECISION, RM))
    }

    fn to_c64(&self, cc: &mut Consts) -> Result<Complex64> {
        Ok(Complex64::new(big_to_f64(&self.re, cc)?, big_to_f64(&self.im, cc)?))
    }

    fn norm_f64(&self, cc: &mut Consts) -> Result<f64> {
        Ok(self.to_c64(cc)?.norm())
    }
}

fn big_to_f64(x: &BigFloat, cc: &mut Consts) -> Result<f64> {
    if x.is_zero() {
        return Ok(0.0);
    }
    let text = x
        .format(Radix::Dec, RM, cc)
        .map_err(|e| Error::PrecisionExhausted(format!("format: {e:?}")))?;
    text.parse::<f64>()
        .map_err(|e| Error::PrecisionExhausted(format!("parse {text}: {e}")))
}

fn consts() -> Result<Consts> {
    Consts::new().map_err(|e| Error::PrecisionExhausted(format!("constants cache: {e:?}")))
}

/// `K0(w)` from the ascending series in 256-bit arithmetic, `|w| <= 10`,
/// `Re w > 0`.
///
/// Terms are summed until the tail bound `|t_k| H_k / (1 - r)` with
/// `r = |w^2/4| / (k+1)^2` drops below `2^-200` of the partial sums. The
/// result is rejected if cancellation has consumed more than 150 bits.
pub fn k0_reference(w: Complex64) -> Result<Complex64> {
    if !(w.re > 0.0) {
        return Err(Error::Domain(w));
    }
    if w.norm() > 10.0 {
        return Err(Error::PrecisionExhausted(format!("|w| = {} exceeds the series range", w.norm())));
    }
    let mut cc = consts()?;
    let z = BigComplex::from_c64(w);
    let quarter = BigFloat::from_f64(0.25, PRECISION);
    let q = z.mul(&z).scale(&quarter);
    let q_abs = (w * w / 4.0).norm();
    let one = BigFloat::from_f64(1.0, PRECISION);

    let mut term = BigComplex::new(one.clone(), BigFloat::from_f64(0.0, PRECISION));
    let mut i0 = term.clone();
    let mut harmonic_sum = BigComplex::zero();
    let mut harmonic = BigFloat::from_f64(0.0, PRECISION);
    let mut largest: f64 = 1.0;
    let mut converged = false;
    for k in 1..400u32 {
        let kf = BigFloat::from_u32(k, PRECISION);
        let k2 = kf.mul(&kf, PRECISION, RM);
        term = term.mul(&q).scale(&one.div(&k2, PRECISION, RM));
        harmonic = harmonic.add(&one.div(&kf, PRECISION, RM), PRECISION, RM);
        i0 = i0.add(&term);
        harmonic_sum = harmonic_sum.add(&term.scale(&harmonic));
        let t = term.norm_f64(&mut cc)?;
        largest = largest.max(t * big_to_f64(&harmonic, &mut cc)?);
        let ratio = q_abs / ((k as f64 + 1.0) * (k as f64 + 1.0));
        if ratio < 0.5 {
            let h = big_to_f64(&harmonic, &mut cc)? + 1.0;
            let bound = t * h / (1.0 - ratio);
            if bound < 2f64.powi(-200) * largest {
                converged = true;
                break;
            }
        }
    }
    if !converged {
        return Err(Error::PrecisionExhausted("series did not reach its tail bound".into()));
    }
    // ln(w/2) = ln|w/2| + i arg w
    let half = BigComplex::from_c64(w / 2.0);
    let modulus2 = half.re.mul(&half.re, PRECISION, RM).add(&half.im.mul(&half.im, PRECISION, RM), PRECISION, RM);
    let log_mod = modulus2.ln(PRECISION, RM, &mut cc).mul(&BigFloat::from_f64(0.5, PRECISION), PRECISION, RM);
    let arg = half.im.div(&half.re, PRECISION, RM).atan(PRECISION, RM, &mut cc);
    let gamma = BigFloat::parse(EULER_GAMMA, Radix::Dec, PRECISION, RM, &mut cc);
    let log_term = BigComplex::new(log_mod.add(&gamma, PRECISION, RM), arg);
    let value = harmonic_sum.sub(&log_term.mul(&i0));
    let result = value.to_c64(&mut cc)?;
    let lost_bits = (largest.max(i0.norm_f64(&mut cc)?) / result.norm()).log2();
    if !(lost_bits < 150.0) {
        return Err(Error::PrecisionExhausted(format!("cancellation lost {lost_bits:.0} bits")));
    }
    Ok(result)
}

/// `K0(w)` from its asymptotic expansion, truncated at the smallest term.
pub fn k0_asymptotic(w: Complex64) -> Complex64 {
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    let mut previous = f64::INFINITY;
    for k in 1..200 {
        let kf = k as f64;
        let next = term * (-(2.0 * kf - 1.0).powi(2) / (8.0 * kf)) / w;
        if next.norm() >= previous.min(term.norm()) {
            break;
        }
        previous = term.norm();
        term = next;
        sum += term;
    }
    (PI / (2.0 * w)).sqrt() * (-w).exp() * sum
}

/// Integral of `f` over `[a, b]` with the tanh-sinh rule, halving the step
/// until successive levels agree to `tol` relative. Endpoint singularities
/// of integrable type are handled by the double-exponential clustering.
pub fn tanh_sinh<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    let half = 0.5 * (b - a);
    let eval = |t: f64| -> f64 {
        let u = 0.5 * PI * t.sinh();
        let e = (2.0 * u.abs()).exp();
        // distance to the nearest endpoint in units of `half`
        let gap = 2.0 / (e + 1.0);
        if gap == 0.0 {
            return 0.0;
        }
        let weight = 0.5 * PI * t.cosh() * 4.0 * e / ((e + 1.0) * (e + 1.0));
        let x = if u >= 0.0 { b - half * gap } else { a + half * gap };
        if x <= a || x >= b {
            return 0.0;
        }
        let v = f(x) * weight;
        if v.is_finite() { v } else { 0.0 }
    };
    let t_max = 6.5;
    let mut h: f64 = 1.0;
    let mut sum = eval(0.0);
    let mut j = 1;
    while j as f64 * h <= t_max {
        sum += eval(j as f64 * h) + eval(-(j as f64) * h);
        j += 1;
    }
    let mut estimate = sum * h * half;
    for _level in 0..12 {
        h *= 0.5;
        let mut odd = 0.0;
        let mut j = 1;
        while j as f64 * h <= t_max {
            odd += eval(j as f64 * h) + eval(-(j as f64) * h);
            j += 2;
        }
        sum += odd;
        let next = sum * h * half;
        if (next - estimate).abs() <= tol * next.abs().max(1e-300) {
            return Ok(next);
        }
        estimate = next;
    }
    Err(Error::PrecisionExhausted("tanh-sinh levels did not settle".into()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PvReference {
    pub value: f64,
    /// Convergence order of the once-extrapolated excision sequence.
    pub observed_order: f64,
    /// Set when successive differences fail to shrink.
    pub nonmonotone: bool,
}

/// Principal value of `f(t)/(t - t0)` over `[a, b]` by symmetric excision of
/// `(t0 - eps, t0 + eps)` for each `eps`, extrapolated to zero in the odd
/// powers of `eps` that the excision error contains.
pub fn pv_excision_reference<F: Fn(f64) -> f64>(f: F, t0: f64, a: f64, b: f64, eps_list: &[f64]) -> Result<PvReference> {
    if !(t0 > a && t0 < b) || !b.is_finite() {
        return Err(Error::PoleAtEndpoint(t0));
    }
    if eps_list.len() < 2 || eps_list.iter().any(|&e| !(e > 0.0 && e < (t0 - a).min(b - t0))) {
        return Err(Error::GridResolution("excision radii must be positive and inside the range".into()));
    }
    let g = |t: f64| f(t) / (t - t0);
    let values: Vec<f64> = eps_list
        .iter()
        .map(|&e| Ok(tanh_sinh(g, a, t0 - e, 1e-14)? + tanh_sinh(g, t0 + e, b, 1e-14)?))
        .collect::<Result<_>>()?;

    let m = eps_list.len();
    let mut vander = DMatrix::zeros(m, m);
    for (i, &e) in eps_list.iter().enumerate() {
        vander[(i, 0)] = 1.0;
        for j in 1..m {
            vander[(i, j)] = e.powi(2 * j as i32 - 1);
        }
    }
    let coeffs = vander
        .lu()
        .solve(&DVector::from_vec(values.clone()))
        .ok_or_else(|| Error::GridResolution("excision radii not distinct".into()))?;

    let once: Vec<f64> = (0..m - 1)
        .map(|i| {
            let (e0, e1) = (eps_list[i], eps_list[i + 1]);
            (e0 * values[i + 1] - e1 * values[i]) / (e0 - e1)
        })
        .collect();
    let mut observed_order = f64::NAN;
    let mut nonmonotone = false;
    if once.len() >= 3 {
        let d0 = (once[0] - once[1]).abs();
        let d1 = (once[1] - once[2]).abs();
        observed_order = (d0 / d1).ln() / (eps_list[1] / eps_list[2]).ln();
        nonmonotone = d1 > d0;
    }
    Ok(PvReference {
        value: coeffs[0],
        observed_order,
        nonmonotone,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransverseCheck {
    /// Extrapolated ground level.
    pub level: f64,
    /// `(h, level)` at each mollifier width.
    pub levels: Vec<(f64, f64)>,
    /// Normalised overlap of the finest-grid ground state with `e^{-alpha|x|/2}`.
    pub overlap: f64,
}

struct Tridiagonal {
    diag: Vec<f64>,
    off: f64,
}

impl Tridiagonal {
    // eigenvalues below `x`, via the Sturm sequence of leading minors
    fn count_below(&self, x: f64) -> usize {
        let mut count = 0;
        let mut q = 1.0;
        for (i, &d) in self.diag.iter().enumerate() {
            let coupling = if i == 0 { 0.0 } else { self.off * self.off / q };
            q = d - x - coupling;
            if q == 0.0 {
                q = 1e-300;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    fn lowest(&self, lo: f64, hi: f64) -> f64 {
        let (mut lo, mut hi) = (lo, hi);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.count_below(mid) >= 1 {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo <= 4.0 * f64::EPSILON * hi.abs() {
                break;
            }
        }
        0.5 * (lo + hi)
    }

    // inverse iteration with a shift just below the eigenvalue
    fn eigenvector(&self, shift: f64) -> Vec<f64> {
        let n = self.diag.len();
        let mut v = vec![1.0; n];
        for _ in 0..4 {
            let mut c = vec![0.0; n];
            let mut d = vec![0.0; n];
            let mut denom = self.diag[0] - shift;
            c[0] = self.off / denom;
            d[0] = v[0] / denom;
            for i in 1..n {
                denom = self.diag[i] - shift - self.off * c[i - 1];
                c[i] = self.off / denom;
                d[i] = (v[i] - self.off * d[i - 1]) / denom;
            }
            let mut x = vec![0.0; n];
            x[n - 1] = d[n - 1];
            for i in (0..n - 1).rev() {
                x[i] = d[i] - c[i] * x[i + 1];
            }
            let norm = x.iter().map(|t| t * t).sum::<f64>().sqrt();
            v = x.into_iter().map(|t| t / norm).collect();
        }
        v
    }
}

/// Ground level of `-d^2/dx^2 - alpha delta_h(x)` on `[-L, L]`, `L = 30/alpha`,
/// Dirichlet, with a box mollifier of width `h` and grid step
/// `h / cells_per_width`, extrapolated to `h -> 0` by a polynomial in `h`
/// through all computed widths.
pub fn transverse_fd_check(alpha: f64, widths: &[f64], cells_per_width: usize) -> Result<TransverseCheck> {
    if widths.len() < 3 || cells_per_width < 2 {
        return Err(Error::GridResolution("need three widths and at least two cells per width".into()));
    }
    let half_length = 30.0 / alpha;
    let mut levels = Vec::new();
    let mut finest = None;
    for &h in widths {
        let dx = h / cells_per_width as f64;
        let n = (2.0 * half_length / dx).round() as usize - 1;
        if n > 5_000_000 {
            return Err(Error::GridResolution(format!("{n} grid points")));
        }
        let x = |i: usize| -half_length + (i + 1) as f64 * dx;
        let diag: Vec<f64> = (0..n)
            .map(|i| {
                // exact mass of the box over the cell around the node
                let overlap = ((x(i) + 0.5 * dx).min(0.5 * h) - (x(i) - 0.5 * dx).max(-0.5 * h)).max(0.0);
                let well = alpha * overlap / (h * dx);
                2.0 / (dx * dx) - well
            })
            .collect();
        let matrix = Tridiagonal { diag, off: -1.0 / (dx * dx) };
        let level = matrix.lowest(-alpha * alpha - 1.0, 0.0);
        levels.push((h, level));
        if finest.as_ref().is_none_or(|(fh, _, _, _)| h < *fh) {
            finest = Some((h, matrix, level, dx));
        }
    }
    let m = levels.len();
    let system = DMatrix::from_fn(m, m, |i, j| levels[i].0.powi(j as i32));
    let rhs = DVector::from_iterator(m, levels.iter().map(|l| l.1));
    let coeffs = system
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::GridResolution("mollifier widths not distinct".into()))?;

    let (_, matrix, level, dx) = finest.expect("at least three widths");
    let v = matrix.eigenvector(level - 1e-9 * level.abs());
    let n = v.len();
    let profile: Vec<f64> = (0..n)
        .map(|i| (-0.5 * alpha * (-half_length + (i + 1) as f64 * dx).abs()).exp())
        .collect();
    let dot: f64 = v.iter().zip(&profile).map(|(a, b)| a * b).sum();
    let norm_p = profile.iter().map(|p| p * p).sum::<f64>().sqrt();
    Ok(TransverseCheck {
        level: coeffs[0],
        levels,
        overlap: dot.abs() / norm_p,
    })
}

/// Winding number of `f` along the closed polygon through `vertices`.
///
/// Each edge is bisected until the argument of `f` changes by less than
/// `pi/8` between neighbouring samples; the floor guards against passing
/// through a zero.
pub fn winding_zero_count<F>(f: F, vertices: &[Complex64], floor: f64) -> Result<i64>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    if vertices.len() < 3 {
        return Err(Error::GridResolution("contour needs at least three vertices".into()));
    }
    let checked = |z: Complex64| -> Result<Complex64> {
        let v = f(z)?;
        if v.norm() < floor || !v.is_finite() {
            return Err(Error::ContourThroughZero(v.norm()));
        }
        Ok(v)
    };
    let mut total = 0.0;
    for (i, &start) in vertices.iter().enumerate() {
        let end = vertices[(i + 1) % vertices.len()];
        total += edge_phase(&checked, start, end, checked(start)?, checked(end)?, 0)?;
    }
    let turns = total / (2.0 * PI);
    let rounded = turns.round();
    if (turns - rounded).abs() > 1e-6 {
        return Err(Error::GridResolution(format!("winding {turns} is not an integer")));
    }
    Ok(rounded as i64)
}

fn edge_phase<F>(f: &F, a: Complex64, b: Complex64, fa: Complex64, fb: Complex64, depth: usize) -> Result<f64>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    let step = (fb / fa).arg();
    if step.abs() < PI / 8.0 && depth >= 3 {
        return Ok(step);
    }
    if depth > 48 {
        return Err(Error::GridResolution("argument varies too fast along the contour".into()));
    }
    let mid = 0.5 * (a + b);
    let fm = f(mid)?;
    Ok(edge_phase(f, a, mid, fa, fm, depth + 1)? + edge_phase(f, mid, b, fm, fb, depth + 1)?)
}

/// `n` equally spaced points on a circle.
pub fn circle_contour(center: Complex64, radius: f64, n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|j| center + Complex64::from_polar(radius, 2.0 * PI * j as f64 / n as f64))
        .collect()
}

/// Closed contour in the `kappa - alpha/2` plane around `[gap_lo, gap_hi]`.
///
/// The admissible strip is `y^2 < alpha x + x^2` (there `alpha^2/4 - kappa^2`
/// keeps a negative real part and the line kernel has no real-axis poles).
/// The contour runs at half that height through log-spaced vertices; the
/// boundary is concave, so the chords stay inside, and far from threshold
/// the distance to the real axis grows like `x`, which keeps the argument
/// from wrapping unseen along an edge.
pub fn gap_contour(alpha: f64, gap_lo: f64, gap_hi: f64, vertices_per_side: usize) -> Vec<Complex64> {
    let ratio = (gap_hi / gap_lo).ln();
    let xs: Vec<f64> = (0..vertices_per_side)
        .map(|i| gap_lo * (ratio * i as f64 / (vertices_per_side - 1) as f64).exp())
        .collect();
    let height = |x: f64| 0.5 * (alpha * x + x * x).sqrt();
    let mut contour: Vec<Complex64> = xs.iter().map(|&x| Complex64::new(x, -height(x))).collect();
    contour.extend(xs.iter().rev().map(|&x| Complex64::new(x, height(x))));
    contour
}

/// `phi_a(kappa)` for an on-axis dot written in the variable `t = p^2` and
/// integrated with the double-exponential rule, independently of the
/// momentum-space production path.
pub fn phi_breve_alternate(kappa: f64, a: f64, alpha: f64) -> Result<f64> {
    let g = |t: f64| {
        let k = (t + kappa * kappa).sqrt();
        (-2.0 * k * a).exp() / ((2.0 * k - alpha) * k * t.sqrt())
    };
    let cutoff = (40.0 / a + kappa).powi(2);
    Ok(alpha / (4.0 * PI) * tanh_sinh(g, 0.0, cutoff, 1e-13)?)
}
