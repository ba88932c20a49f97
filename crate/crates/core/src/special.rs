//! Small numerical helpers shared by several modules.

use num_complex::Complex64;

/// `e^z - 1` without cancellation for small `|z|`.
pub fn exp_m1(z: Complex64) -> Complex64 {
    let (a, b) = (z.re, z.im);
    let half = (0.5 * b).sin();
    let re = a.exp_m1() * b.cos() - 2.0 * half * half;
    let im = a.exp() * b.sin();
    Complex64::new(re, im)
}

/// `(e^{-i x tau} - 1) / x`, continuous through `x = 0` where it equals `-i tau`.
///
/// Below `|x tau| < 1e-8` a six-term Taylor series is used.
pub fn window_ratio(x: Complex64, tau: f64) -> Complex64 {
    let z = Complex64::new(0.0, -tau) * x;
    if z.norm() < 1e-8 {
        // (e^z - 1)/x = (z/x) * (1 + z/2 + z^2/6 + ...)
        let mut term = Complex64::new(1.0, 0.0);
        let mut sum = term;
        for n in 2..=6 {
            term *= z / n as f64;
            sum += term;
        }
        Complex64::new(0.0, -tau) * sum
    } else {
        exp_m1(z) / x
    }
}

/// Laguerre polynomial `L_n(x)` by the three-term recurrence.
pub fn laguerre(n: u32, x: f64) -> f64 {
    let mut prev = 1.0;
    if n == 0 {
        return prev;
    }
    let mut cur = 1.0 - x;
    for k in 1..n {
        let k = k as f64;
        let next = ((2.0 * k + 1.0 - x) * cur - k * prev) / (k + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}
