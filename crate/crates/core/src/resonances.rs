//! Complex cavity resonances and their loss budget.
//!
//! A resonance solves `D_1(Ω) = 1 + r_13(Ω) e^{2i n_1(Ω) Ω l} = 0`. Writing
//! `r_13 = |r_13| e^{iθ}` the zero satisfies the fixed point
//!
//! ```text
//! Ω = [2πk + π − θ(Ω) + i ln|r_13(Ω)|] / (2 l n_1(Ω))
//! ```
//!
//! which is iterated from the lossless guess and then polished with a few
//! Newton steps on `D_1`. `θ` starts in `[0, 2π)` and is unwrapped along the
//! iteration.

use crate::error::{CavityError, Result};
use crate::optical_stack::{branch_index, LayerStack, Permittivity};
use crate::par::Exec;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// What the resonance condition needs from a cavity: the cavity medium and
/// the reflection of everything to its right, both at complex frequency.
pub trait CavityResponse: Sync {
    fn length(&self) -> f64;
    /// Cavity index, analytically continued.
    fn cavity_index(&self, omega: Complex64) -> Complex64;
    /// `r_13(Ω)`, analytically continued.
    fn cavity_reflection(&self, omega: Complex64) -> Result<Complex64>;
    /// Cavity index on the real axis (`n', n'' ≥ 0` branch).
    fn real_cavity_index(&self, omega: f64) -> Complex64 {
        branch_index(self.cavity_index(Complex64::new(omega, 0.0)).powi(2))
    }
}

impl CavityResponse for LayerStack {
    fn length(&self) -> f64 {
        self.l
    }
    fn cavity_index(&self, omega: Complex64) -> Complex64 {
        self.eps1.eval(omega).sqrt()
    }
    fn cavity_reflection(&self, omega: Complex64) -> Result<Complex64> {
        Ok(self.at_complex(omega).composite(1, 3)?.r)
    }
    fn real_cavity_index(&self, omega: f64) -> Complex64 {
        branch_index(self.eps1.eval(Complex64::new(omega, 0.0)))
    }
}

/// Cavity closed by two perfect mirrors (`r_13 = −1`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedCavity {
    pub l: f64,
    pub medium: Permittivity,
}

impl CavityResponse for ClosedCavity {
    fn length(&self) -> f64 {
        self.l
    }
    fn cavity_index(&self, omega: Complex64) -> Complex64 {
        self.medium.eval(omega).sqrt()
    }
    fn cavity_reflection(&self, _omega: Complex64) -> Result<Complex64> {
        Ok(Complex64::new(-1.0, 0.0))
    }
}

/// Coupling mirror given as a table of `r_13(ω)` on the real axis, for
/// multilayer mirrors that the 4-layer stack cannot describe.
///
/// Between samples `r_13` is linear in `ω`, and the same linear piece is used
/// at complex `Ω` (chosen by `Re Ω`), which keeps the continuation analytic.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedMirror {
    pub l: f64,
    pub medium: Permittivity,
    /// `(ω, r_13)` with strictly increasing `ω`.
    pub table: Vec<(f64, Complex64)>,
}

impl TabulatedMirror {
    pub fn new(l: f64, medium: Permittivity, table: Vec<(f64, Complex64)>) -> Result<Self> {
        if table.len() < 2 || table.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(CavityError::InvalidArgument(
                "reflection table needs at least two strictly increasing frequencies".into(),
            ));
        }
        if table.iter().any(|(_, r)| r.norm() > 1.0) {
            return Err(CavityError::InvalidArgument(
                "tabulated |r_13| must not exceed 1".into(),
            ));
        }
        Ok(TabulatedMirror { l, medium, table })
    }
}

impl CavityResponse for TabulatedMirror {
    fn length(&self) -> f64 {
        self.l
    }
    fn cavity_index(&self, omega: Complex64) -> Complex64 {
        self.medium.eval(omega).sqrt()
    }
    fn cavity_reflection(&self, omega: Complex64) -> Result<Complex64> {
        let t = &self.table;
        let (lo, hi) = (t[0].0, t[t.len() - 1].0);
        if omega.re < lo || omega.re > hi {
            return Err(CavityError::InvalidArgument(format!(
                "frequency {} outside the reflection table [{lo}, {hi}]",
                omega.re
            )));
        }
        let i = t
            .partition_point(|(w, _)| *w <= omega.re)
            .clamp(1, t.len() - 1);
        let (w0, r0) = t[i - 1];
        let (w1, r1) = t[i];
        let slope = (r1 - r0) / (w1 - w0);
        Ok(r0 + slope * (omega - w0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub newton_steps: usize,
    pub target_residual: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-12,
            max_iter: 200,
            newton_steps: 5,
            target_residual: 1e-10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Resonance {
    pub k: u32,
    pub omega_k: f64,
    /// Full width `Γ_k = −2 Im Ω_k`.
    pub gamma_k: f64,
    pub omega: Complex64,
    pub iterations: usize,
    /// Fixed point converged; `false` means the Newton fallback produced the root.
    pub converged: bool,
    /// `|D_1(Ω_k)|`.
    pub residual: f64,
}

/// `D_1(Ω) = 1 + r_13(Ω) e^{2i n_1 Ω l}`.
pub fn cavity_denominator<C: CavityResponse + ?Sized>(
    cavity: &C,
    omega: Complex64,
) -> Result<Complex64> {
    let r = cavity.cavity_reflection(omega)?;
    let n1 = cavity.cavity_index(omega);
    Ok(1.0 + r * (2.0 * I * n1 * omega * cavity.length()).exp())
}

/// Real `ω` with `n_1'(ω) ω l = kπ`.
pub fn lossless_guess<C: CavityResponse + ?Sized>(cavity: &C, k: u32) -> f64 {
    let target = k as f64 * PI / cavity.length();
    let mut w = target / cavity.real_cavity_index(target).re.max(1e-12);
    for _ in 0..200 {
        let next = target / cavity.real_cavity_index(w).re.max(1e-12);
        // Averaging keeps the map contractive for moderate dispersion.
        let next = 0.5 * (w + next);
        if (next - w).abs() <= 1e-15 * w {
            return next;
        }
        w = next;
    }
    w
}

fn unwrap_near(theta: f64, reference: f64) -> f64 {
    let mut t = theta;
    while t - reference > PI {
        t -= 2.0 * PI;
    }
    while t - reference < -PI {
        t += 2.0 * PI;
    }
    t
}

/// Damped Newton on `D_1` with a central-difference derivative; returns the
/// final point and `D_1` there.
fn newton<C: CavityResponse + ?Sized>(
    cavity: &C,
    mut omega: Complex64,
    steps: usize,
) -> Result<(Complex64, Complex64)> {
    let mut res = cavity_denominator(cavity, omega)?;
    for _ in 0..steps {
        if res.norm() < 1e-14 {
            break;
        }
        let h = 1e-5 * omega.norm();
        let deriv = (cavity_denominator(cavity, omega + h)?
            - cavity_denominator(cavity, omega - h)?)
            / (2.0 * h);
        if deriv.norm() == 0.0 {
            break;
        }
        let mut step = res / deriv;
        let mut accepted = false;
        for _ in 0..10 {
            let trial = omega - step;
            if let Ok(r_trial) = cavity_denominator(cavity, trial) {
                if r_trial.norm() < res.norm() {
                    omega = trial;
                    res = r_trial;
                    accepted = true;
                    break;
                }
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    Ok((omega, res))
}

/// Mode number of a root from `Re(2 n_1 Ω l) = 2πk + π − θ`, `θ ∈ [0, 2π)`.
fn mode_number<C: CavityResponse + ?Sized>(cavity: &C, omega: Complex64) -> Result<i64> {
    let theta = cavity.cavity_reflection(omega)?.arg().rem_euclid(2.0 * PI);
    let phase = (2.0 * cavity.cavity_index(omega) * omega * cavity.length()).re;
    Ok(((phase + theta - PI) / (2.0 * PI)).round() as i64)
}

/// Complex resonance `Ω_k`: fixed-point iteration from the lossless guess,
/// then a few damped Newton steps. When the fixed point does not contract
/// (strongly dispersive mirrors) damped Newton takes over from the best
/// iterate.
pub fn find_resonance<C: CavityResponse + ?Sized>(
    cavity: &C,
    k: u32,
    opts: &SolverOptions,
) -> Result<Resonance> {
    if k == 0 {
        return Err(CavityError::InvalidArgument(
            "mode index k must be >= 1".into(),
        ));
    }
    let l = cavity.length();
    let mut omega = Complex64::new(lossless_guess(cavity, k), 0.0);
    let mut best = (cavity_denominator(cavity, omega)?.norm(), omega);
    let mut theta_prev: Option<f64> = None;
    let mut converged = false;
    let mut iterations = 0;
    for it in 1..=opts.max_iter {
        iterations = it;
        let Ok(r) = cavity.cavity_reflection(omega) else {
            break;
        };
        let n1 = cavity.cavity_index(omega);
        let wrapped = r.arg().rem_euclid(2.0 * PI);
        let theta = match theta_prev {
            Some(p) => unwrap_near(wrapped, p),
            None => wrapped,
        };
        theta_prev = Some(theta);
        let x = 2.0 * PI * k as f64 + PI - theta;
        let next = (x + I * r.norm().ln()) / (2.0 * l * n1);
        let step = (next - omega).norm();
        if !next.re.is_finite() || !next.im.is_finite() {
            break;
        }
        omega = next;
        if let Ok(d) = cavity_denominator(cavity, omega) {
            if d.norm() < best.0 {
                best = (d.norm(), omega);
            }
        }
        if step <= opts.tol * omega.norm() {
            converged = true;
            break;
        }
    }

    let (omega, res) = if converged {
        newton(cavity, omega, opts.newton_steps)?
    } else {
        newton(cavity, best.1, opts.max_iter)?
    };
    if res.norm() >= opts.target_residual || !(omega.re > 0.0) {
        return Err(CavityError::NoConvergence {
            k,
            iterations,
            last: omega,
        });
    }

    let found = if converged {
        let theta_final = cavity.cavity_reflection(omega)?.arg().rem_euclid(2.0 * PI);
        let p = theta_prev.unwrap_or(theta_final);
        k as i64 + ((theta_final - p) / (2.0 * PI)).round() as i64
    } else {
        mode_number(cavity, omega)?
    };
    if found != k as i64 {
        return Err(CavityError::BranchJump { k, found });
    }
    Ok(Resonance {
        k,
        omega_k: omega.re,
        gamma_k: -2.0 * omega.im,
        omega,
        iterations,
        converged,
        residual: res.norm(),
    })
}

/// Resonances for several mode indices; a mode whose `ω_k` does not exceed
/// its predecessor's is reported as a branch jump.
pub fn find_resonances<C: CavityResponse + ?Sized>(
    cavity: &C,
    ks: &[u32],
    opts: &SolverOptions,
    exec: Exec,
) -> Vec<Result<Resonance>> {
    let mut out = exec.map(ks, |&k| find_resonance(cavity, k, opts));
    for i in 1..out.len() {
        if let (Ok(prev), Ok(cur)) = (&out[i - 1], &out[i]) {
            if ks[i] > ks[i - 1] && cur.omega_k <= prev.omega_k {
                let found = prev.k as i64;
                out[i] = Err(CavityError::BranchJump { k: cur.k, found });
            }
        }
    }
    out
}

/// Input-output coefficients of the stack at one real frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IoCoefficients {
    pub omega: f64,
    pub n1: Complex64,
    pub n2: Complex64,
    pub n3: Complex64,
    /// Cavity → outside transmission weight `T`.
    pub t: Complex64,
    pub a_cav: Complex64,
    pub a_plus: Complex64,
    pub a_minus: Complex64,
    /// `None` when the channel's absorption vanishes and `α` diverges.
    pub alpha_cav: Option<f64>,
    pub alpha_plus: Option<f64>,
    pub alpha_minus: Option<f64>,
    pub t_out: Complex64,
    pub r_out: Complex64,
    pub a_out_plus: Complex64,
    pub a_out_minus: Complex64,
}

/// Below this `ε''` an absorption channel counts as closed.
pub const CLOSED_CHANNEL: f64 = 1e-30;

pub fn io_coefficients(stack: &LayerStack, omega: f64) -> Result<IoCoefficients> {
    let s = stack.at(omega)?;
    let (n1, n2, n3) = (s.n[1], s.n[2], s.n[3]);
    let (b1, b2) = (s.beta[1], s.beta[2]);
    let (l, d) = (stack.l, stack.d);
    let p21 = s.interface(2, 1)?;
    let p23 = s.interface(2, 3)?;
    let p13 = s.composite(1, 3)?;
    let p31 = s.composite(3, 1)?;
    let den = s.denominators()?;
    let e1 = s.phase(1);
    let e2 = s.phase(2);
    let sqrt_n1 = n1.sqrt();

    let eps1_im = (n1 * n1).im;
    let (inv_alpha_cav, alpha_cav) = if eps1_im < CLOSED_CHANNEL {
        (0.0, None)
    } else {
        let bracket = n1.re * (2.0 * b1.im * l).sinh() - n1.im * (2.0 * b1.re * l).sin();
        let inv = bracket.max(0.0).sqrt() / (2.0 * 2f64.sqrt() * n1.norm());
        (inv, if inv > 0.0 { Some(1.0 / inv) } else { None })
    };
    let eps2_im = (n2 * n2).im;
    let mirror_inv_alpha = |sign: f64| -> (f64, Option<f64>) {
        if eps2_im < CLOSED_CHANNEL || d == 0.0 {
            return (0.0, None);
        }
        let bracket = n2.re * (b2.im * d).sinh() + sign * n2.im * (b2.re * d).sin();
        let inv = bracket.max(0.0).sqrt() * (-0.5 * b2.im * d).exp() / n2.norm();
        (inv, if inv > 0.0 { Some(1.0 / inv) } else { None })
    };
    let (inv_plus, alpha_plus) = mirror_inv_alpha(1.0);
    let (inv_minus, alpha_minus) = mirror_inv_alpha(-1.0);

    let a_cav = -4.0 * I * sqrt_n1 * inv_alpha_cav;
    let mirror_a =
        |sign: f64, inv: f64| -(p21.t * sqrt_n1 * inv / den.d2_prime) * (p23.r * e2 + sign) * e1;
    let mirror_out = |sign: f64, inv: f64| (p23.t / den.d2_prime) * (1.0 + sign * p21.r * e2) * inv;
    let t = -p31.t * (n1 * n3.re).sqrt() / n3.norm() * e1;
    Ok(IoCoefficients {
        omega,
        n1,
        n2,
        n3,
        t,
        a_cav,
        a_plus: mirror_a(1.0, inv_plus),
        a_minus: mirror_a(-1.0, inv_minus),
        alpha_cav,
        alpha_plus,
        alpha_minus,
        t_out: p13.t * e1 / sqrt_n1,
        r_out: p31.r,
        a_out_plus: mirror_out(1.0, inv_plus),
        a_out_minus: mirror_out(-1.0, inv_minus),
    })
}

/// Radiative and absorptive decay rates of one mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossBudget {
    pub gamma_rad: f64,
    pub gamma_cav: f64,
    pub gamma_plus: f64,
    pub gamma_minus: f64,
    pub gamma_abs: f64,
    /// `γ_rad + γ_abs`.
    pub gamma_sum: f64,
    /// Outgoing-side radiative rate `|T_out|²/(2|n_1|l)`.
    pub gamma_rad_out: f64,
    /// Width of the complex root.
    pub gamma_root: f64,
    /// `|Γ_k − γ_rad − γ_abs| / Γ_k`.
    pub identity_residual: f64,
}

pub fn rate_prefactor(n1: Complex64, l: f64) -> f64 {
    1.0 / (2.0 * n1.norm() * l)
}

pub fn budget_from(coeffs: &IoCoefficients, l: f64, gamma_root: f64) -> LossBudget {
    let f = rate_prefactor(coeffs.n1, l);
    let gamma_rad = f * coeffs.t.norm_sqr();
    let gamma_cav = f * coeffs.a_cav.norm_sqr();
    let gamma_plus = f * coeffs.a_plus.norm_sqr();
    let gamma_minus = f * coeffs.a_minus.norm_sqr();
    let gamma_abs = gamma_cav + gamma_plus + gamma_minus;
    let gamma_sum = gamma_rad + gamma_abs;
    LossBudget {
        gamma_rad,
        gamma_cav,
        gamma_plus,
        gamma_minus,
        gamma_abs,
        gamma_sum,
        gamma_rad_out: f * coeffs.t_out.norm_sqr(),
        gamma_root,
        identity_residual: (gamma_root - gamma_sum).abs() / gamma_root,
    }
}

pub fn loss_budget(stack: &LayerStack, res: &Resonance) -> Result<LossBudget> {
    let coeffs = io_coefficients(stack, res.omega_k)?;
    Ok(budget_from(&coeffs, stack.l, res.gamma_k))
}

/// Leading-order width `(1 − |r_13|²)/(2 n_1 l)` at real `ω`.
pub fn leading_order_width(stack: &LayerStack, omega: f64) -> Result<f64> {
    let s = stack.at(omega)?;
    let r = s.composite(1, 3)?.r;
    Ok((1.0 - r.norm_sqr()) / (2.0 * s.n[1].re * stack.l))
}

/// Closed form of `|T|²` through the mirror interfaces (real `n_1`).
pub fn transmission_closed_form(stack: &LayerStack, omega: f64) -> Result<f64> {
    let s = stack.at(omega)?;
    let (n1, n2, n3) = (s.n[1], s.n[2], s.n[3]);
    let den = s.denominators()?;
    Ok(
        16.0 * n1.re * n2.norm_sqr() * n3.re * (-2.0 * s.beta[2].im * stack.d).exp()
            / (den.d2_prime.norm_sqr() * (n1 + n2).norm_sqr() * (n2 + n3).norm_sqr()),
    )
}

/// Closed form of `|A_+|² + |A_−|²` through the mirror interfaces (real `n_1`).
pub fn mirror_absorption_closed_form(stack: &LayerStack, omega: f64) -> Result<f64> {
    let s = stack.at(omega)?;
    let (n1, n2) = (s.n[1], s.n[2]);
    let b2 = s.beta[2];
    let d = stack.d;
    let den = s.denominators()?;
    let r23 = s.interface(2, 3)?.r;
    let decay = (-b2.im * d).exp();
    let grow = (b2.im * d).exp();
    let pref = 4.0 * n1.re / (den.d2_prime.norm_sqr() * (n1 + n2).norm_sqr()) * decay;
    let first = n2.re * (grow - decay) * (1.0 + r23.norm_sqr() * decay * decay);
    let phase = (I * b2.re * d).exp();
    let rr = r23 * (I * b2 * d).exp();
    let second = -I * n2.im * (phase - phase.conj()) * (rr + rr.conj());
    Ok(pref * (first + second.re))
}

/// Default bound on `Γ_k/Δω_k`.
pub const HIGH_Q_THRESHOLD: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HighQReport {
    /// `Δω_k` per resonance.
    pub spacing: Vec<f64>,
    /// `Γ_k / Δω_k` per resonance.
    pub ratios: Vec<f64>,
    pub threshold: f64,
    pub pass: bool,
}

/// Ratios `Γ_k/Δω_k` with `Δω_k = (ω_{k+1} − ω_{k−1})/2` (one-sided at the ends).
pub fn validate_high_q(resonances: &[Resonance], threshold: f64) -> Result<HighQReport> {
    let n = resonances.len();
    if n < 2 {
        return Err(CavityError::InvalidArgument(
            "need at least two consecutive resonances".into(),
        ));
    }
    let w: Vec<f64> = resonances.iter().map(|r| r.omega_k).collect();
    let spacing: Vec<f64> = (0..n)
        .map(|i| {
            if i == 0 {
                w[1] - w[0]
            } else if i == n - 1 {
                w[n - 1] - w[n - 2]
            } else {
                0.5 * (w[i + 1] - w[i - 1])
            }
        })
        .collect();
    let ratios: Vec<f64> = resonances
        .iter()
        .zip(&spacing)
        .map(|(r, s)| r.gamma_k / s)
        .collect();
    let pass = ratios.iter().all(|r| *r < threshold);
    Ok(HighQReport {
        spacing,
        ratios,
        threshold,
        pass,
    })
}
