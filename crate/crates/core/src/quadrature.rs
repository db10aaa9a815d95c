//! Adaptive Gauss-Kronrod integration on intervals and on the half-line,
//! with support for `t^{-1/2}` endpoint singularities, Cauchy principal
//! values and near-real complex poles.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Values an integrand may return.
pub trait QuadValue:
    Copy + Default + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self>
{
    fn magnitude(self) -> f64;
}

impl QuadValue for f64 {
    fn magnitude(self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn magnitude(self) -> f64 {
        self.norm()
    }
}

/// Where the half-line integral is truncated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TailRule {
    /// Geometrically growing panels until two consecutive panels contribute
    /// less than a tenth of the tolerance.
    Doubling,
    /// Integrand bounded by `exp(-rate sqrt(t)) / sqrt(t)`: truncate where the
    /// envelope drops below `abs_tol / 10`, then check one extra panel.
    SqrtExponential { rate: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    /// Substitute `t = u^2` on half-line integrals (removes `t^{-1/2}` at 0).
    pub endpoint_transform: bool,
    pub tail: TailRule,
    /// Width of the first half-line panel; later panels double.
    pub first_panel: f64,
    /// The doubling tail test is not applied before the panels reach this point.
    pub min_extent: f64,
}

impl Default for QuadSpec {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-10,
            max_subdivisions: 2000,
            endpoint_transform: false,
            tail: TailRule::Doubling,
            first_panel: 1.0,
            min_extent: 1.0,
        }
    }
}

impl QuadSpec {
    pub fn with_tolerances(mut self, abs_tol: f64, rel_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self.rel_tol = rel_tol;
        self
    }

    pub fn with_endpoint_transform(mut self, on: bool) -> Self {
        self.endpoint_transform = on;
        self
    }

    pub fn with_first_panel(mut self, width: f64) -> Self {
        self.first_panel = width;
        self
    }

    pub fn with_tail(mut self, tail: TailRule) -> Self {
        self.tail = tail;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.abs_tol > 0.0
            && self.rel_tol > 0.0
            && self.max_subdivisions >= 1
            && self.first_panel > 0.0
            && self.min_extent >= 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidModel(format!("invalid quadrature spec {self:?}")))
        }
    }

    fn target(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value)
    }
}

/// Integral value with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult<T> {
    pub value: T,
    pub error: f64,
    pub evaluations: usize,
}

impl<T: QuadValue> QuadResult<T> {
    fn zero() -> Self {
        Self {
            value: T::default(),
            error: 0.0,
            evaluations: 0,
        }
    }

    fn combine(self, other: Self) -> Self {
        Self {
            value: self.value + other.value,
            error: self.error + other.error,
            evaluations: self.evaluations + other.evaluations,
        }
    }
}

impl QuadResult<f64> {
    pub fn into_complex(self) -> QuadResult<Complex64> {
        QuadResult {
            value: Complex64::new(self.value, 0.0),
            error: self.error,
            evaluations: self.evaluations,
        }
    }
}

// 10-point Gauss / 21-point Kronrod (QUADPACK qk21).
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

struct Panel<T> {
    a: f64,
    b: f64,
    value: T,
    error: f64,
    abs_value: f64,
}

impl<T> PartialEq for Panel<T> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl<T> Eq for Panel<T> {}
impl<T> PartialOrd for Panel<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T> Ord for Panel<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gauss_kronrod<T, F>(f: &F, a: f64, b: f64) -> Panel<T>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[10];
    let mut gauss = T::default();
    let mut abs_sum = fc.magnitude() * WGK[10];
    let mut values = [(T::default(), T::default()); 10];
    for (j, pair) in values.iter_mut().enumerate() {
        let dx = half * XGK[j];
        let lo = f(center - dx);
        let hi = f(center + dx);
        *pair = (lo, hi);
        kronrod = kronrod + (lo + hi) * WGK[j];
        abs_sum += WGK[j] * (lo.magnitude() + hi.magnitude());
        if j % 2 == 1 {
            gauss = gauss + (lo + hi) * WG[j / 2];
        }
    }
    let mean = kronrod * 0.5;
    let mut asc = WGK[10] * (fc - mean).magnitude();
    for (j, (lo, hi)) in values.iter().enumerate() {
        asc += WGK[j] * ((*lo - mean).magnitude() + (*hi - mean).magnitude());
    }
    let width = half.abs();
    let value = kronrod * half;
    let abs_value = abs_sum * width;
    asc *= width;
    let mut error = ((kronrod - gauss) * half).magnitude();
    if asc != 0.0 && error != 0.0 {
        error = asc * (200.0 * error / asc).powf(1.5).min(1.0);
    }
    if abs_value > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * abs_value);
    }
    Panel {
        a,
        b,
        value,
        error,
        abs_value,
    }
}

/// Globally adaptive integration over the union of the given panels.
fn adapt<T, F>(f: &F, edges: &[f64], spec: &QuadSpec) -> Result<QuadResult<T>>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    let mut heap = BinaryHeap::new();
    let mut evaluations = 0;
    for w in edges.windows(2) {
        if w[1] > w[0] {
            heap.push(gauss_kronrod(f, w[0], w[1]));
            evaluations += 21;
        }
    }
    let totals = |heap: &BinaryHeap<Panel<T>>| {
        heap.iter().fold((T::default(), 0.0, 0.0), |(v, e, s), p| {
            (v + p.value, e + p.error, s + p.abs_value)
        })
    };
    let mut subdivisions = heap.len();
    loop {
        let (value, error, abs_value) = totals(&heap);
        let floor = 100.0 * f64::EPSILON * abs_value;
        let tolerance = spec.target(value.magnitude()).max(floor);
        if error <= tolerance {
            return Ok(QuadResult {
                value,
                error,
                evaluations,
            });
        }
        if subdivisions >= spec.max_subdivisions {
            return Err(Error::Nonconvergence {
                estimate: error,
                tolerance,
                subdivisions,
            });
        }
        let Some(worst) = heap.pop() else {
            return Ok(QuadResult::zero());
        };
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Interval exhausted at machine resolution; keep it and stop refining it.
            let (value, error, _) = totals(&heap);
            let value = value + worst.value;
            let error = error + worst.error;
            if error <= 10.0 * tolerance {
                return Ok(QuadResult {
                    value,
                    error,
                    evaluations,
                });
            }
            return Err(Error::Nonconvergence {
                estimate: error,
                tolerance,
                subdivisions,
            });
        }
        heap.push(gauss_kronrod(f, worst.a, mid));
        heap.push(gauss_kronrod(f, mid, worst.b));
        evaluations += 42;
        subdivisions += 1;
    }
}

/// Adaptive integral of `f` over `[a, b]`.
pub fn integrate<T, F>(f: F, a: f64, b: f64, spec: &QuadSpec) -> Result<QuadResult<T>>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    spec.validate()?;
    if a == b {
        return Ok(QuadResult::zero());
    }
    if b < a {
        let r = adapt(&f, &[b, a], spec)?;
        return Ok(QuadResult {
            value: r.value * -1.0,
            ..r
        });
    }
    adapt(&f, &[a, b], spec)
}

/// Panel edges covering `[start, cutoff]` for a half-line integral in the
/// variable the integrand is expressed in.
fn halfline_edges<T, F>(f: &F, start: f64, spec: &QuadSpec, transformed: bool) -> Vec<f64>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    let mut edges = vec![start];
    let mut width = spec.first_panel;
    match spec.tail {
        TailRule::SqrtExponential { rate } => {
            // envelope exp(-rate sqrt(t))/sqrt(t) < abs_tol/10, in t
            let goal = spec.abs_tol / 10.0;
            let mut cutoff = 1.0_f64;
            while (-rate * cutoff.sqrt()).exp() / cutoff.sqrt() >= goal && cutoff < 1e12 {
                cutoff *= 2.0;
            }
            let cutoff = if transformed { cutoff.sqrt() } else { cutoff };
            let cutoff = cutoff.max(start + width);
            let mut edge = start;
            while edge < cutoff {
                edge = (edge + width).min(cutoff);
                edges.push(edge);
                width *= 2.0;
            }
            // one verification panel beyond the cutoff
            let extra = gauss_kronrod(f, cutoff, 2.0 * cutoff);
            if extra.abs_value > spec.abs_tol {
                let mut edge = cutoff;
                while edges.len() < 200 {
                    edge *= 2.0;
                    edges.push(edge);
                    let p = gauss_kronrod(f, edge, 2.0 * edge);
                    if p.abs_value < spec.abs_tol / 10.0 {
                        break;
                    }
                }
            } else {
                edges.push(2.0 * cutoff);
            }
        }
        TailRule::Doubling => {
            let mut quiet = 0;
            let mut total = 0.0;
            let mut edge = start;
            while edges.len() < 400 {
                let next = edge + width;
                let p = gauss_kronrod(f, edge, next);
                total += p.abs_value;
                edges.push(next);
                edge = next;
                width *= 2.0;
                let small = p.abs_value + p.error
                    < (spec.abs_tol / 10.0).max(spec.rel_tol * total / 10.0);
                if small && edge >= spec.min_extent {
                    quiet += 1;
                    if quiet >= 2 {
                        break;
                    }
                } else {
                    quiet = 0;
                }
            }
        }
    }
    edges
}

/// Integral of `f` over `(0, inf)`.
///
/// With `endpoint_transform` the substitution `t = u^2` is applied, so `f` may
/// behave like `t^{-1/2}` at the origin. The tail must decay exponentially.
pub fn integrate_halfline<T, F>(f: F, spec: &QuadSpec) -> Result<QuadResult<T>>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    spec.validate()?;
    if spec.endpoint_transform {
        let g = |u: f64| f(u * u) * (2.0 * u);
        let edges = halfline_edges(&g, 0.0, spec, true);
        adapt(&g, &edges, spec)
    } else {
        let edges = halfline_edges(&f, 0.0, spec, false);
        adapt(&f, &edges, spec)
    }
}

/// Integral over `(start, inf)` in the given variable, no transform.
fn integrate_tail<T, F>(f: &F, start: f64, spec: &QuadSpec) -> Result<QuadResult<T>>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    let edges = halfline_edges(f, start, spec, false);
    adapt(f, &edges, spec)
}

/// Symmetric-window half-width around a pole at `t0` in `[a, b]`.
fn pv_window(t0: f64, a: f64, b: f64) -> f64 {
    ((t0 - a) / 2.0).min((b - t0) / 2.0).min(1.0)
}

// PV of g(t)/(t - t0) over [a, b] (b may be infinite) with the subtraction
// window [t0 - w, t0 + w] folded onto (0, w): the log term of the subtracted
// constant vanishes for a symmetric window.
fn pv_core<T, G>(g: &G, t0: f64, a: f64, b: f64, spec: &QuadSpec) -> Result<QuadResult<T>>
where
    T: QuadValue,
    G: Fn(f64) -> T,
{
    let w = pv_window(t0, a, b);
    let folded = |s: f64| (g(t0 + s) - g(t0 - s)) * (1.0 / s);
    let window = integrate(folded, 0.0, w, spec)?;
    let plain = |t: f64| g(t) * (1.0 / (t - t0));
    let left = integrate(plain, a, t0 - w, spec)?;
    let right = if b.is_finite() {
        integrate(plain, t0 + w, b, spec)?
    } else {
        integrate_tail(&plain, t0 + w, spec)?
    };
    Ok(window.combine(left).combine(right))
}

/// Principal value of `f(t)/(t - t0)` over `[a, b]`, `a < t0 < b`.
pub fn integrate_pv<T, F>(f: F, t0: f64, a: f64, b: f64, spec: &QuadSpec) -> Result<QuadResult<T>>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    spec.validate()?;
    if !(t0 > a && t0 < b) {
        return Err(Error::PoleAtEndpoint(t0));
    }
    pv_core(&f, t0, a, b, spec)
}

/// Principal value of `f(t)/(t - t0)` over `(0, inf)`, `t0 > 0`.
///
/// With `endpoint_transform` the pole moves to `u0 = sqrt(t0)` and the
/// integrand becomes `2u f(u^2) / (u + u0)` over `(u - u0)`; the principal
/// value is invariant under this change of variable.
pub fn integrate_pv_halfline<T, F>(f: F, t0: f64, spec: &QuadSpec) -> Result<QuadResult<T>>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    spec.validate()?;
    if !(t0 > 0.0) || !t0.is_finite() {
        return Err(Error::PoleAtEndpoint(t0));
    }
    if spec.endpoint_transform {
        let u0 = t0.sqrt();
        let g = |u: f64| f(u * u) * (2.0 * u / (u + u0));
        pv_core(&g, u0, 0.0, f64::INFINITY, spec)
    } else {
        pv_core(&f, t0, 0.0, f64::INFINITY, spec)
    }
}

/// `int_0^inf f(t) / (t - pole) dt` for a non-real `pole`.
///
/// `f` must be analytic near the pole; it is evaluated once at the pole
/// itself. Poles close to the positive axis are handled by subtracting
/// `f(pole)` on a symmetric window and adding the exact logarithm, so the
/// result stays accurate as `Im pole -> 0` from either side.
pub fn integrate_cauchy_halfline<F>(
    f: F,
    pole: Complex64,
    spec: &QuadSpec,
) -> Result<QuadResult<Complex64>>
where
    F: Fn(Complex64) -> Complex64,
{
    spec.validate()?;
    if pole.im == 0.0 && pole.re >= 0.0 {
        return Err(Error::PoleAtEndpoint(pole.re));
    }
    if spec.endpoint_transform {
        let q = pole.sqrt();
        let g = |u: Complex64| f(u * u) * (u * 2.0) / (u + q);
        cauchy_core(&g, q, spec)
    } else {
        cauchy_core(&f, pole, spec)
    }
}

fn cauchy_core<G>(g: &G, pole: Complex64, spec: &QuadSpec) -> Result<QuadResult<Complex64>>
where
    G: Fn(Complex64) -> Complex64,
{
    let real = |t: f64| g(Complex64::new(t, 0.0));
    let plain = |t: f64| real(t) / (t - pole);
    let c = pole.re;
    if c <= 0.0 || pole.im.abs() >= c {
        let edges = halfline_edges(&plain, 0.0, spec, false);
        return adapt(&plain, &edges, spec);
    }
    let w = (c / 2.0).min(1.0);
    let at_pole = g(pole);
    let folded = |s: f64| {
        let up = Complex64::new(c + s, 0.0);
        let down = Complex64::new(c - s, 0.0);
        (g(up) - at_pole) / (up - pole) + (g(down) - at_pole) / (down - pole)
    };
    let window = integrate(folded, 0.0, w, spec)?;
    let log_term = at_pole * ((c + w - pole).ln() - (c - w - pole).ln());
    let left = integrate(plain, 0.0, c - w, spec)?;
    let right = integrate_tail(&plain, c + w, spec)?;
    let mut total = window.combine(left).combine(right);
    total.value += log_term;
    Ok(total)
}
