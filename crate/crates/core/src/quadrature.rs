//! Globally adaptive 10-point Gauss / 21-point Kronrod quadrature.
//!
//! Panels live in a max-heap keyed by their error estimate; the worst panel
//! is bisected until the summed error meets `max(abs_tol, rel_tol·|I|)`.
//! Error estimates use the QUADPACK rescaling of `|K21 − G10|`.

use crate::error::{CavityError, Result};
use num_complex::Complex64;
use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::ops::{Add, Mul, Sub};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077208624970586,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
];

// Gauss weights for the odd-indexed Kronrod nodes.
#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
];

/// Values the integrator can accumulate.
pub trait QuadValue:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> + Send + Sync
{
    fn zero() -> Self;
    fn magnitude(&self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_panels: usize,
    /// Panels narrower than this are accepted as they are.
    pub min_width: f64,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            abs_tol: 1e-10,
            rel_tol: 1e-8,
            max_panels: 400_000,
            min_width: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate<T> {
    pub value: T,
    pub error: f64,
    pub evals: usize,
    pub panels: usize,
}

/// One Gauss–Kronrod 21-point panel: `(integral, error estimate)`.
pub fn gk21<T: QuadValue, F: Fn(f64) -> T>(f: &F, a: f64, b: f64) -> (T, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kron = fc * WGK[10];
    let mut gauss = T::zero();
    let mut fv = [T::zero(); 20];
    for (j, x) in XGK.iter().take(10).enumerate() {
        let dx = half * x;
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv[2 * j] = f1;
        fv[2 * j + 1] = f2;
        kron = kron + (f1 + f2) * WGK[j];
        if j % 2 == 1 {
            gauss = gauss + (f1 + f2) * WG[j / 2];
        }
    }
    let mean = kron * 0.5;
    let mut res_abs = fc.magnitude() * WGK[10];
    let mut res_asc = (fc - mean).magnitude() * WGK[10];
    for j in 0..10 {
        let (f1, f2) = (fv[2 * j], fv[2 * j + 1]);
        res_abs += WGK[j] * (f1.magnitude() + f2.magnitude());
        res_asc += WGK[j] * ((f1 - mean).magnitude() + (f2 - mean).magnitude());
    }
    let scale = half.abs();
    res_abs *= scale;
    res_asc *= scale;
    let mut err = ((kron - gauss) * half).magnitude();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    (kron * half, err)
}

struct Panel<T> {
    a: f64,
    b: f64,
    value: T,
    error: f64,
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

/// Integrates `f` over `[p_0, p_last]`, starting from the panels between
/// consecutive `breakpoints` (which must be increasing).
pub fn integrate<T, F>(f: F, breakpoints: &[f64], opts: &QuadOptions) -> Result<Estimate<T>>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    assert!(breakpoints.len() >= 2, "need at least one panel");
    let mut heap = BinaryHeap::with_capacity(breakpoints.len() * 2);
    let mut done_value = T::zero();
    let mut done_error = 0.0;
    let mut evals = 0usize;
    for w in breakpoints.windows(2) {
        if w[1] <= w[0] {
            continue;
        }
        let (value, error) = gk21(&f, w[0], w[1]);
        evals += 21;
        heap.push(Panel {
            a: w[0],
            b: w[1],
            value,
            error,
        });
    }
    let mut panels = heap.len();
    loop {
        let (mut total, mut err) = (done_value, done_error);
        for p in heap.iter() {
            total = total + p.value;
            err += p.error;
        }
        let target = opts.abs_tol.max(opts.rel_tol * total.magnitude());
        if err <= target || heap.is_empty() {
            return Ok(Estimate {
                value: total,
                error: err,
                evals,
                panels,
            });
        }
        if panels >= opts.max_panels {
            return Err(CavityError::Quadrature {
                value: total.magnitude(),
                error: err,
            });
        }
        // Bisect the worst panels in a batch; re-summing after every split
        // would be quadratic in the panel count.
        let batch = (heap.len() / 8).max(1);
        for _ in 0..batch {
            let Some(p) = heap.pop() else { break };
            let mid = 0.5 * (p.a + p.b);
            if p.b - p.a <= opts.min_width || mid <= p.a || mid >= p.b {
                done_value = done_value + p.value;
                done_error += p.error;
                continue;
            }
            let (v1, e1) = gk21(&f, p.a, mid);
            let (v2, e2) = gk21(&f, mid, p.b);
            evals += 42;
            panels += 1;
            heap.push(Panel {
                a: p.a,
                b: mid,
                value: v1,
                error: e1,
            });
            heap.push(Panel {
                a: mid,
                b: p.b,
                value: v2,
                error: e2,
            });
        }
    }
}

/// Integral over the whole real line of a function decaying at least like
/// `1/ω²`, through `ω = center + width·tan θ`.
pub fn integrate_real_line<T, F>(
    f: F,
    center: f64,
    width: f64,
    opts: &QuadOptions,
) -> Result<Estimate<T>>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    let half_pi = std::f64::consts::FRAC_PI_2;
    let g = |theta: f64| {
        let (s, c) = theta.sin_cos();
        let jac = width / (c * c);
        f(center + width * s / c) * jac
    };
    let breaks: Vec<f64> = (0..=8)
        .map(|i| -half_pi + i as f64 * half_pi / 4.0)
        .collect();
    integrate(g, &breaks, opts)
}
