//! Mode filter, channel kernels and the weights `η`, `ζ_σ` of the relevant
//! outgoing mode.
//!
//! The outgoing field of mode `k` observed over `[t0, t + Δt]` is
//! `b_out(ω) = F*(ω) a(t0) + B(ω)`, where `B` collects the incoming field and
//! the three absorption channels through the kernels `G_σ`. With the
//! normalized filter `φ₁ = F/√η` the extraction efficiency is `η = ∫|F|²`
//! and the channel weights are `ζ_σ = ∫|χ_σ|²`, `χ_σ(ω) = ∫φ₁(ω')G_σ*(ω',ω)dω'`.
//!
//! All frequency integrals run over the whole real line: in the high-Q
//! regime the band `(Δ_k)` is many linewidths wide and the mode is
//! treated as isolated. The inner `ω'` integral of `χ_σ` is done by
//! residues; the outer integrals by adaptive quadrature with analytic tails.
//!
//! The mode itself is modelled by the pole `ω_k − iΓ/2` with
//! `Γ = γ_rad + γ_abs` built from the coefficients at `ω_k`, which keeps the
//! sum rule `η + Σζ_σ = 1` exact in the isolated-mode picture. The width of
//! the complex root differs from it by the mirror-phase dispersion.

use crate::error::{CavityError, Result};
use crate::optical_stack::{LayerStack, Permittivity};
use crate::par::Exec;
use crate::quadrature::{integrate, integrate_real_line, Estimate, QuadOptions};
use crate::resonances::{budget_from, io_coefficients, IoCoefficients, LossBudget, Resonance};
use crate::special::window_ratio;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Coarse-graining factor `Δt·|Δ_k|` used when none is given.
pub const COARSE_GRAIN_FACTOR: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    In,
    Cav,
    Plus,
    Minus,
}

impl Channel {
    pub const ALL: [Channel; 4] = [Channel::In, Channel::Cav, Channel::Plus, Channel::Minus];

    pub fn name(self) -> &'static str {
        match self {
            Channel::In => "in",
            Channel::Cav => "cav",
            Channel::Plus => "plus",
            Channel::Minus => "minus",
        }
    }
}

/// Single-mode model of resonance `k`: coefficients at `ω_k` plus the
/// rates built from them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeModel {
    pub k: u32,
    pub omega_k: f64,
    /// `γ_rad + γ_abs`.
    pub gamma: f64,
    /// Width of the complex root, for reference.
    pub gamma_root: f64,
    pub coeffs: IoCoefficients,
    pub budget: LossBudget,
    /// `1/(2 n_1 l)`.
    pub kappa: Complex64,
    /// Outgoing radiative rate `|T_out|²/(2|n_1| l)`.
    pub gamma_out: f64,
}

impl ModeModel {
    pub fn new(stack: &LayerStack, res: &Resonance) -> Result<Self> {
        if stack.eps3 != Permittivity::vacuum() {
            return Err(CavityError::InvalidArgument(
                "mode weights assume vacuum outside the coupling mirror".into(),
            ));
        }
        let coeffs = io_coefficients(stack, res.omega_k)?;
        Ok(Self::from_coefficients(res.k, coeffs, stack.l, res.gamma_k))
    }

    pub fn from_coefficients(k: u32, coeffs: IoCoefficients, l: f64, gamma_root: f64) -> Self {
        let budget = budget_from(&coeffs, l, gamma_root);
        ModeModel {
            k,
            omega_k: coeffs.omega,
            gamma: budget.gamma_sum,
            gamma_root,
            coeffs,
            budget,
            kappa: 1.0 / (2.0 * coeffs.n1 * l),
            gamma_out: budget.gamma_rad_out,
        }
    }

    /// `ω_k − iΓ/2`.
    pub fn pole(&self) -> Complex64 {
        Complex64::new(self.omega_k, -0.5 * self.gamma)
    }

    /// Coupling of channel `σ` to the cavity mode.
    pub fn coupling(&self, ch: Channel) -> Complex64 {
        match ch {
            Channel::In => self.coeffs.t,
            Channel::Cav => self.coeffs.a_cav,
            Channel::Plus => self.coeffs.a_plus,
            Channel::Minus => self.coeffs.a_minus,
        }
    }

    /// Direct (non-resonant) transfer of channel `σ` into the outgoing field.
    pub fn direct(&self, ch: Channel) -> Complex64 {
        match ch {
            Channel::In => self.coeffs.r_out,
            Channel::Cav => Complex64::new(0.0, 0.0),
            Channel::Plus => self.coeffs.a_out_plus,
            Channel::Minus => self.coeffs.a_out_minus,
        }
    }

    pub fn channel_rate(&self, ch: Channel) -> f64 {
        match ch {
            Channel::In => self.budget.gamma_rad,
            Channel::Cav => self.budget.gamma_cav,
            Channel::Plus => self.budget.gamma_plus,
            Channel::Minus => self.budget.gamma_minus,
        }
    }
}

/// Frequency band and observation window of one mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeBand {
    pub k: u32,
    pub lo: f64,
    pub hi: f64,
    pub pole: Complex64,
    /// Coarse-graining horizon `Δt`.
    pub dt: f64,
    /// Preparation instant.
    pub t0: f64,
    /// Observation instant; `f64::INFINITY` for the long-time limit.
    pub t: f64,
}

impl ModeBand {
    pub fn new(
        k: u32,
        lo: f64,
        hi: f64,
        pole: Complex64,
        dt: f64,
        t0: f64,
        t: f64,
    ) -> Result<Self> {
        if !(lo < pole.re && pole.re < hi) {
            return Err(CavityError::InvalidArgument(format!(
                "band [{lo}, {hi}] does not contain the resonance {}",
                pole.re
            )));
        }
        if pole.im > 0.0 {
            return Err(CavityError::InvalidArgument(
                "resonance pole must lie in the lower half-plane".into(),
            ));
        }
        if !(dt >= 0.0) || !(t >= t0) || !t0.is_finite() || t.is_nan() {
            return Err(CavityError::InvalidArgument(format!(
                "need dt >= 0 and t >= t0, got dt = {dt}, t0 = {t0}, t = {t}"
            )));
        }
        Ok(ModeBand {
            k,
            lo,
            hi,
            pole,
            dt,
            t0,
            t,
        })
    }

    /// Band of width `spacing` centred on the mode, `Δt = 50/spacing`,
    /// `t0 = 0` and observation at `elapsed`.
    pub fn around(model: &ModeModel, spacing: f64, elapsed: f64) -> Result<Self> {
        let w = model.omega_k;
        Self::new(
            model.k,
            w - 0.5 * spacing,
            w + 0.5 * spacing,
            model.pole(),
            COARSE_GRAIN_FACTOR / spacing,
            0.0,
            elapsed,
        )
    }

    pub fn with_time(&self, t: f64) -> Result<Self> {
        Self::new(self.k, self.lo, self.hi, self.pole, self.dt, self.t0, t)
    }

    pub fn gamma(&self) -> f64 {
        -2.0 * self.pole.im
    }

    /// `t + Δt − t0`.
    pub fn tau(&self) -> f64 {
        self.t + self.dt - self.t0
    }

    pub fn is_asymptotic(&self) -> bool {
        self.t.is_infinite()
    }

    /// `Δt·(ω_hi − ω_lo) ≥ factor` and `Γ` well inside the band.
    pub fn is_coarse_grained(&self, factor: f64) -> bool {
        self.dt * (self.hi - self.lo) >= factor && self.gamma() < 1e-2 * (self.hi - self.lo)
    }
}

fn filter_prefactor(model: &ModeModel) -> Complex64 {
    I / (2.0 * PI).sqrt() * model.kappa.conj().sqrt() * model.coeffs.t_out.conj()
}

/// Mode filter `F_k(ω, t)`. In the long-time limit the unimodular factor
/// `e^{iω(t−t0)}` is dropped.
pub fn filter_f(band: &ModeBand, model: &ModeModel, omega: f64) -> Complex64 {
    let c = filter_prefactor(model);
    let x = omega - band.pole.conj();
    if band.is_asymptotic() {
        return -c / x;
    }
    let phase = (I * omega * (band.t - band.t0)).exp();
    c * phase * window_ratio(x, band.tau())
}

/// Closed-form `η(t) = γ_out (1 − e^{−Γτ})/Γ` of the line integral of `|F|²`.
pub fn eta_closed_form(band: &ModeBand, model: &ModeModel) -> f64 {
    let g = band.gamma();
    let decay = if band.is_asymptotic() {
        1.0
    } else {
        -(-g * band.tau()).exp_m1()
    };
    model.gamma_out * decay / g
}

/// Smooth kernel `υ_k(ω, ω', t)`.
pub fn kernel_upsilon(band: &ModeBand, model: &ModeModel, omega: f64, omega_p: f64) -> Complex64 {
    let tau = band.tau();
    if tau == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let pc = band.pole.conj();
    let pref = model.kappa.conj() / (2.0 * PI) * (-I * omega * band.dt).exp() / (omega - pc);
    let first = -(I * pc * tau).exp() * window_ratio(pc - omega_p, tau);
    let second =
        -(I * omega_p * tau).exp() * window_ratio(Complex64::new(omega_p - omega, 0.0), tau);
    pref * (first - second)
}

/// `G_σ(ω, ω') = smooth + delta·δ(ω − ω')`, with the delta part kept as its
/// coefficient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelKernel {
    pub smooth: Complex64,
    pub delta: Complex64,
}

pub fn channel_kernel_g(
    band: &ModeBand,
    model: &ModeModel,
    ch: Channel,
    omega: f64,
    omega_p: f64,
) -> ChannelKernel {
    let smooth = model.coeffs.t_out.conj()
        * model.coupling(ch).conj()
        * kernel_upsilon(band, model, omega, omega_p);
    let delta = model.direct(ch).conj() * (I * omega_p * (band.t - band.t0)).exp();
    ChannelKernel { smooth, delta }
}

/// Precomputed pieces of `χ_σ` for one observation time.
struct ChiEvaluator {
    pole: Complex64,
    gamma: f64,
    tau: f64,
    elapsed: f64,
    scale: Complex64,
    c_f: Complex64,
    inv_sqrt_eta: f64,
}

impl ChiEvaluator {
    fn new(band: &ModeBand, model: &ModeModel) -> Result<Self> {
        if band.is_asymptotic() {
            return Err(CavityError::InvalidArgument(
                "channel weights by quadrature need a finite observation time".into(),
            ));
        }
        let eta = eta_closed_form(band, model);
        if !(eta > 0.0) {
            return Err(CavityError::InvalidArgument(
                "extraction efficiency vanishes; channel weights are undefined".into(),
            ));
        }
        let c_f = filter_prefactor(model);
        Ok(ChiEvaluator {
            pole: band.pole,
            gamma: band.gamma(),
            tau: band.tau(),
            elapsed: band.t - band.t0,
            scale: c_f * model.kappa / (2.0 * PI),
            c_f,
            inv_sqrt_eta: 1.0 / eta.sqrt(),
        })
    }

    /// `∫ dω' e^{iω'a} / ((ω'−Ω*)(ω'−Ω)(ω'−ω))` as a principal value.
    fn h(&self, a: f64, omega: f64) -> Complex64 {
        let p = self.pole;
        let pc = p.conj();
        let r_omega = (I * omega * a).exp() / ((omega - pc) * (omega - p));
        if a >= 0.0 {
            let r_upper = (I * pc * a).exp() / ((pc - p) * (pc - omega));
            2.0 * PI * I * r_upper + PI * I * r_omega
        } else {
            let r_lower = (I * p * a).exp() / ((p - pc) * (p - omega));
            -2.0 * PI * I * r_lower - PI * I * r_omega
        }
    }

    /// `∫ dω' F(ω') υ*(ω', ω)` by residues.
    fn mode_part(&self, omega: f64) -> Complex64 {
        let (p, tau) = (self.pole, self.tau);
        let pc = p.conj();
        let g = self.gamma;
        let a = ((-I * omega * tau).exp() - (-I * p * tau).exp()) / (omega - p);
        let j0 = 2.0 * PI / g;
        let j1 = 2.0 * PI / g * (I * pc * tau).exp();
        let e_pc = (I * pc * tau).exp();
        let e_w = (-I * omega * tau).exp();
        self.scale
            * (a * e_pc * j0 - a * j1 - e_pc * self.h(-tau, omega)
                + (e_pc * e_w + 1.0) * self.h(0.0, omega)
                - e_w * self.h(tau, omega))
    }

    fn filter(&self, omega: f64) -> Complex64 {
        let phase = (I * omega * self.elapsed).exp();
        self.c_f * phase * window_ratio(omega - self.pole.conj(), self.tau)
    }

    fn chi(&self, model: &ModeModel, ch: Channel, omega: f64) -> Complex64 {
        let smooth = model.coeffs.t_out * model.coupling(ch) * self.mode_part(omega);
        let direct = model.direct(ch) * (-I * omega * self.elapsed).exp() * self.filter(omega);
        (smooth + direct) * self.inv_sqrt_eta
    }
}

/// Channel amplitude `χ_σ(ω, t)` of the relevant outgoing mode.
pub fn chi(band: &ModeBand, model: &ModeModel, ch: Channel, omega: f64) -> Result<Complex64> {
    Ok(ChiEvaluator::new(band, model)?.chi(model, ch, omega))
}

/// Integral over the real line of `f(center + u)`, which decays like `1/u²`
/// and, for finite `tau`, oscillates with period `2π/τ`.
///
/// The oscillating case integrates `|u| ≤ L` on panels one period wide
/// (finer near the peak) and adds the tails `c/L`, with `c` the
/// period-averaged `u² f(u)` at the window edge.
pub fn integrate_line<F>(
    f: F,
    center: f64,
    gamma: f64,
    tau: Option<f64>,
    opts: &QuadOptions,
) -> Result<Estimate<f64>>
where
    F: Fn(f64) -> f64,
{
    let tau = match tau {
        Some(t) if t.is_finite() && t > 0.0 => t,
        _ => return integrate_real_line(f, center, 0.5 * gamma, opts),
    };
    let period = 2.0 * PI / tau;
    let window = (1e4 * gamma).max(1e4 / tau);
    let mut right = Vec::new();
    let mut u = gamma / 16.0;
    while u < period && u < window {
        right.push(u);
        u *= 2.0;
    }
    let mut u = right.last().copied().unwrap_or(0.0) + period;
    while u < window {
        right.push(u);
        u += period;
    }
    right.push(window);
    let mut breaks: Vec<f64> = right.iter().rev().map(|u| -u).collect();
    breaks.push(0.0);
    breaks.extend_from_slice(&right);
    let est = integrate(|u: f64| f(center + u), &breaks, opts)?;
    let edge = |u: f64| u * u * f(center + u);
    let shifted = window + 0.5 * period;
    let tail_right = 0.5 * (edge(window) + edge(shifted)) / window;
    let tail_left = 0.5 * (edge(-window) + edge(-shifted)) / window;
    Ok(Estimate {
        value: est.value + tail_right + tail_left,
        error: est.error,
        evals: est.evals + 4,
        panels: est.panels,
    })
}

fn oscillation(band: &ModeBand) -> Option<f64> {
    if band.is_asymptotic() {
        None
    } else {
        Some(band.tau())
    }
}

/// `η_k(t) = ∫|F_k|²` by quadrature.
pub fn eta_of_t(band: &ModeBand, model: &ModeModel, opts: &QuadOptions) -> Result<Estimate<f64>> {
    if !band.is_asymptotic() && band.tau() == 0.0 {
        return Ok(Estimate {
            value: 0.0,
            error: 0.0,
            evals: 0,
            panels: 0,
        });
    }
    integrate_line(
        |w| filter_f(band, model, w).norm_sqr(),
        model.omega_k,
        band.gamma(),
        oscillation(band),
        opts,
    )
}

/// `ζ_σ(t) = ∫|χ_σ|²` by quadrature.
pub fn zeta_of_t(
    band: &ModeBand,
    model: &ModeModel,
    ch: Channel,
    opts: &QuadOptions,
) -> Result<Estimate<f64>> {
    let ev = ChiEvaluator::new(band, model)?;
    if model.coupling(ch).norm() == 0.0 && model.direct(ch).norm() == 0.0 {
        return Ok(Estimate {
            value: 0.0,
            error: 0.0,
            evals: 0,
            panels: 0,
        });
    }
    integrate_line(
        |w| ev.chi(model, ch, w).norm_sqr(),
        model.omega_k,
        band.gamma(),
        oscillation(band),
        opts,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeWeights {
    pub eta: f64,
    pub zeta_in: f64,
    pub zeta_cav: f64,
    pub zeta_plus: f64,
    pub zeta_minus: f64,
    /// Elapsed time `t − t0`; `None` for the long-time closed forms.
    pub at: Option<f64>,
}

impl ModeWeights {
    pub fn zeta(&self, ch: Channel) -> f64 {
        match ch {
            Channel::In => self.zeta_in,
            Channel::Cav => self.zeta_cav,
            Channel::Plus => self.zeta_plus,
            Channel::Minus => self.zeta_minus,
        }
    }

    /// `η + Σ ζ_σ`.
    pub fn sum(&self) -> f64 {
        self.eta + self.zeta_in + self.zeta_cav + self.zeta_plus + self.zeta_minus
    }

    /// Lossless identity channel.
    pub fn identity() -> Self {
        ModeWeights {
            eta: 1.0,
            zeta_in: 0.0,
            zeta_cav: 0.0,
            zeta_plus: 0.0,
            zeta_minus: 0.0,
            at: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [
            self.eta,
            self.zeta_in,
            self.zeta_cav,
            self.zeta_plus,
            self.zeta_minus,
        ];
        if all.iter().any(|w| !w.is_finite() || *w < 0.0) || self.eta > 1.0 {
            return Err(CavityError::InvalidArgument(format!(
                "weights must be finite, non-negative and eta <= 1: {all:?}"
            )));
        }
        Ok(())
    }
}

/// `η(t)` and every `ζ_σ(t)` by quadrature; the five integrals run under `exec`.
pub fn weights_at(
    band: &ModeBand,
    model: &ModeModel,
    opts: &QuadOptions,
    exec: Exec,
) -> Result<ModeWeights> {
    let jobs: [Option<Channel>; 5] = [
        None,
        Some(Channel::In),
        Some(Channel::Cav),
        Some(Channel::Plus),
        Some(Channel::Minus),
    ];
    let out = exec.map(&jobs, |job| match job {
        None => eta_of_t(band, model, opts).map(|e| e.value),
        Some(ch) => zeta_of_t(band, model, *ch, opts).map(|e| e.value),
    });
    let mut v = [0.0; 5];
    for (slot, r) in v.iter_mut().zip(out) {
        *slot = r?;
    }
    Ok(ModeWeights {
        eta: v[0],
        zeta_in: v[1],
        zeta_cav: v[2],
        zeta_plus: v[3],
        zeta_minus: v[4],
        at: Some(band.t - band.t0),
    })
}

/// Weights for several elapsed times `t − t0`, in order.
pub fn weights_sweep(
    band: &ModeBand,
    model: &ModeModel,
    elapsed: &[f64],
    opts: &QuadOptions,
    exec: Exec,
) -> Vec<Result<ModeWeights>> {
    exec.map(elapsed, |&e| {
        let b = band.with_time(band.t0 + e)?;
        weights_at(&b, model, opts, Exec::Sequential)
    })
}

/// Pieces of one long-time channel weight: direct transfer `|D|²`, resonant
/// path `γ_σ γ_out/Γ²` and their interference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZetaTerms {
    pub direct: f64,
    pub resonant: f64,
    pub interference: f64,
}

impl ZetaTerms {
    pub fn total(&self) -> f64 {
        self.direct + self.resonant + self.interference
    }
}

pub fn asymptotic_terms(model: &ModeModel, ch: Channel) -> ZetaTerms {
    let g = model.gamma;
    let d = model.direct(ch);
    let x = model.coupling(ch);
    ZetaTerms {
        direct: d.norm_sqr(),
        resonant: model.channel_rate(ch) * model.gamma_out / (g * g),
        interference: 2.0 * (model.kappa.conj() * d * x.conj() * model.coeffs.t_out.conj()).re / g,
    }
}

/// Long-time weights from the closed forms at `ω_k`.
pub fn asymptotic_weights(model: &ModeModel) -> ModeWeights {
    let z = |ch| asymptotic_terms(model, ch).total();
    ModeWeights {
        eta: model.gamma_out / model.gamma,
        zeta_in: z(Channel::In),
        zeta_cav: z(Channel::Cav),
        zeta_plus: z(Channel::Plus),
        zeta_minus: z(Channel::Minus),
        at: None,
    }
}
