//! Planar 4-layer cavity geometry and its Fresnel coefficients.
//!
//! Layer 0 is a perfect mirror, layer 1 the cavity medium (thickness `l`),
//! layer 2 the coupling mirror (thickness `d`) and layer 3 the outside
//! half-space. Every layer uses its own frame: `0 < z < l` in layer 1,
//! `0 < z < d` in layer 2 and `0 < z` in layer 3.
//!
//! Single interfaces follow
//!
//! ```text
//! r_ij = (β_i − β_j)/(β_i + β_j),   t_ij = 1 + r_ij
//! ```
//!
//! and composites are built by the pivot recursion
//!
//! ```text
//! r_ik = [r_ij + (t_ij t_ji − r_ij r_ji) r_jk e^{2iβ_j d_j}] / (1 − r_ji r_jk e^{2iβ_j d_j})
//! t_ik = t_ij t_jk e^{iβ_j d_j} / (1 − r_ji r_jk e^{2iβ_j d_j})
//! ```
//!
//! The perfect mirror enters as the limit `β_0 → ∞`: `r_10 = −1`, `t_10 = 0`,
//! `r_01 = 1`, `t_01 = 2`.

use crate::error::{CavityError, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Relative size of a recursion denominator below which it counts as a pole.
pub const POLE_THRESHOLD: f64 = 1e-14;

/// Frequency-dependent relative permittivity of one layer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Permittivity {
    /// Frequency-independent value. Violates Kramers–Kronig globally, so it
    /// is only a narrowband stand-in near the resonance of interest.
    Constant { re: f64, im: f64 },
    /// `ε(ω) = 1 + strength·ω0² / (ω0² − ω² − iγω)`.
    Lorentz {
        strength: f64,
        resonance: f64,
        damping: f64,
    },
}

impl Permittivity {
    pub fn constant(re: f64, im: f64) -> Self {
        Permittivity::Constant { re, im }
    }

    pub fn vacuum() -> Self {
        Permittivity::Constant { re: 1.0, im: 0.0 }
    }

    /// Evaluates the model, analytically continued to complex frequency.
    pub fn eval(&self, omega: Complex64) -> Complex64 {
        match *self {
            Permittivity::Constant { re, im } => Complex64::new(re, im),
            Permittivity::Lorentz {
                strength,
                resonance,
                damping,
            } => {
                let w0sq = resonance * resonance;
                1.0 + strength * w0sq / (w0sq - omega * omega - I * damping * omega)
            }
        }
    }

    /// True for the `constant` model, which reports carry as a flag.
    pub fn is_narrowband(&self) -> bool {
        matches!(self, Permittivity::Constant { .. })
    }

    pub fn is_lossless(&self) -> bool {
        match *self {
            Permittivity::Constant { im, .. } => im == 0.0,
            Permittivity::Lorentz {
                strength, damping, ..
            } => strength == 0.0 || damping == 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Permittivity::Constant { re, im } => {
                if !re.is_finite() || !im.is_finite() {
                    return Err(CavityError::Geometry(format!(
                        "non-finite permittivity {re} + {im}i"
                    )));
                }
                if im < 0.0 {
                    return Err(CavityError::Passivity(im));
                }
            }
            Permittivity::Lorentz {
                strength,
                resonance,
                damping,
            } => {
                if !(strength >= 0.0 && resonance > 0.0 && damping >= 0.0) {
                    return Err(CavityError::Geometry(format!(
                        "Lorentz model needs strength >= 0, resonance > 0, damping >= 0 \
                         (got {strength}, {resonance}, {damping})"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Square root of `ε` on the branch with `n' ≥ 0` and `n'' ≥ 0`.
pub fn branch_index(eps: Complex64) -> Complex64 {
    let mut n = eps.sqrt();
    if n.re < 0.0 {
        n = -n;
    }
    if n.im < 0.0 {
        n.im = -n.im;
    }
    n
}

/// Complex index `n` and propagation constant `β = nω` at real `ω > 0`.
pub fn refractive_index(model: &Permittivity, omega: f64) -> Result<(Complex64, Complex64)> {
    if !(omega > 0.0) {
        return Err(CavityError::NonPositiveFrequency(omega));
    }
    let eps = model.eval(Complex64::new(omega, 0.0));
    if eps.im < 0.0 {
        return Err(CavityError::Passivity(eps.im));
    }
    let n = branch_index(eps);
    Ok((n, n * omega))
}

/// Principal-branch index at complex frequency (analytic continuation).
pub fn continued_index(model: &Permittivity, omega: Complex64) -> Complex64 {
    model.eval(omega).sqrt()
}

/// Reflection and transmission between two named layers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FresnelPair {
    pub r: Complex64,
    pub t: Complex64,
}

/// Single interface between media with propagation constants `β_i`, `β_j`.
pub fn fresnel_interface(beta_i: Complex64, beta_j: Complex64) -> Result<FresnelPair> {
    let sum = beta_i + beta_j;
    if sum.norm() <= f64::EPSILON * (beta_i.norm() + beta_j.norm()) || sum.norm() == 0.0 {
        return Err(CavityError::SingularInterface(0, 0));
    }
    let r = (beta_i - beta_j) / sum;
    Ok(FresnelPair { r, t: 1.0 + r })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerStack {
    /// Cavity length (layer 1).
    pub l: f64,
    /// Coupling-mirror thickness (layer 2).
    pub d: f64,
    pub eps1: Permittivity,
    pub eps2: Permittivity,
    pub eps3: Permittivity,
}

impl LayerStack {
    pub fn new(
        l: f64,
        d: f64,
        eps1: Permittivity,
        eps2: Permittivity,
        eps3: Permittivity,
    ) -> Result<Self> {
        let s = LayerStack {
            l,
            d,
            eps1,
            eps2,
            eps3,
        };
        s.validate()?;
        Ok(s)
    }

    /// Stack of constant permittivities.
    pub fn constant(
        l: f64,
        d: f64,
        eps1: Complex64,
        eps2: Complex64,
        eps3: Complex64,
    ) -> Result<Self> {
        Self::new(
            l,
            d,
            Permittivity::constant(eps1.re, eps1.im),
            Permittivity::constant(eps2.re, eps2.im),
            Permittivity::constant(eps3.re, eps3.im),
        )
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.l > 0.0 && self.l.is_finite()) {
            return Err(CavityError::Geometry(format!(
                "l must be > 0, got {}",
                self.l
            )));
        }
        if !(self.d >= 0.0 && self.d.is_finite()) {
            return Err(CavityError::Geometry(format!(
                "d must be >= 0, got {}",
                self.d
            )));
        }
        self.eps1.validate()?;
        self.eps2.validate()?;
        self.eps3.validate()
    }

    /// Permittivity model of layer `j ∈ {1, 2, 3}`.
    pub fn layer(&self, j: usize) -> &Permittivity {
        match j {
            1 => &self.eps1,
            2 => &self.eps2,
            3 => &self.eps3,
            _ => panic!("layer index {j} has no permittivity model"),
        }
    }

    /// Thickness `d_j` used in the phase factors (`d_3 = 0`).
    pub fn thickness(&self, j: usize) -> f64 {
        match j {
            1 => self.l,
            2 => self.d,
            _ => 0.0,
        }
    }

    pub fn is_lossless(&self) -> bool {
        self.eps1.is_lossless() && self.eps2.is_lossless() && self.eps3.is_lossless()
    }

    pub fn has_narrowband_layers(&self) -> bool {
        self.eps1.is_narrowband() || self.eps2.is_narrowband() || self.eps3.is_narrowband()
    }

    /// Optical response at real frequency, branch `n', n'' ≥ 0`.
    pub fn at(&self, omega: f64) -> Result<Spectrum> {
        let mut n = [Complex64::new(f64::INFINITY, 0.0); 4];
        for j in 1..=3 {
            n[j] = refractive_index(self.layer(j), omega)?.0;
        }
        Ok(Spectrum::from_indices(self, Complex64::new(omega, 0.0), n))
    }

    /// Optical response at complex frequency (principal-root continuation).
    pub fn at_complex(&self, omega: Complex64) -> Spectrum {
        let mut n = [Complex64::new(f64::INFINITY, 0.0); 4];
        for j in 1..=3 {
            n[j] = continued_index(self.layer(j), omega);
        }
        Spectrum::from_indices(self, omega, n)
    }

    pub fn cavity_denominators(&self, omega: f64) -> Result<Denominators> {
        self.at(omega)?.denominators()
    }

    pub fn fresnel_composite(&self, i: usize, k: usize, omega: f64) -> Result<FresnelPair> {
        self.at(omega)?.composite(i, k)
    }
}

/// Cavity denominators `D_1`, `D_2` and `D_2'`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Denominators {
    pub d1: Complex64,
    pub d2: Complex64,
    pub d2_prime: Complex64,
}

/// Indices and propagation constants of all layers at one frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub omega: Complex64,
    /// `n[0]` is a placeholder for the perfect mirror.
    pub n: [Complex64; 4],
    pub beta: [Complex64; 4],
    pub thickness: [f64; 4],
}

impl Spectrum {
    fn from_indices(stack: &LayerStack, omega: Complex64, n: [Complex64; 4]) -> Self {
        let mut beta = [Complex64::new(f64::INFINITY, 0.0); 4];
        for j in 1..=3 {
            beta[j] = n[j] * omega;
        }
        Spectrum {
            omega,
            n,
            beta,
            thickness: [0.0, stack.l, stack.d, 0.0],
        }
    }

    /// `e^{iβ_j d_j}`.
    pub fn phase(&self, j: usize) -> Complex64 {
        (I * self.beta[j] * self.thickness[j]).exp()
    }

    /// Adjacent-layer pair `(i, j)`, `|i − j| = 1`, including the mirror.
    pub fn interface(&self, i: usize, j: usize) -> Result<FresnelPair> {
        debug_assert!(i.abs_diff(j) == 1);
        match (i, j) {
            (1, 0) => Ok(FresnelPair {
                r: Complex64::new(-1.0, 0.0),
                t: Complex64::new(0.0, 0.0),
            }),
            (0, 1) => Ok(FresnelPair {
                r: Complex64::new(1.0, 0.0),
                t: Complex64::new(2.0, 0.0),
            }),
            _ => fresnel_interface(self.beta[i], self.beta[j])
                .map_err(|_| CavityError::SingularInterface(i, j)),
        }
    }

    /// Composite `(r_{i/k}, t_{i/k})` using the pivot next to `i`.
    pub fn composite(&self, i: usize, k: usize) -> Result<FresnelPair> {
        assert!(
            i != k && i <= 3 && k <= 3,
            "composite needs distinct layers in 0..=3"
        );
        if i.abs_diff(k) == 1 {
            return self.interface(i, k);
        }
        let pivot = if k > i { i + 1 } else { i - 1 };
        self.composite_via(i, k, pivot)
    }

    /// Composite through an explicit intermediate layer `pivot`.
    pub fn composite_via(&self, i: usize, k: usize, pivot: usize) -> Result<FresnelPair> {
        let (lo, hi) = (i.min(k), i.max(k));
        assert!(
            pivot > lo && pivot < hi,
            "pivot {pivot} not strictly between {i} and {k}"
        );
        let ij = self.composite(i, pivot)?;
        let ji = self.composite(pivot, i)?;
        let jk = self.composite(pivot, k)?;
        let e = self.phase(pivot);
        let e2 = e * e;
        let loop_gain = ji.r * jk.r * e2;
        let den = 1.0 - loop_gain;
        if den.norm() < POLE_THRESHOLD * (1.0 + loop_gain.norm()) {
            return Err(CavityError::PoleProximity {
                layer: pivot,
                denominator: den.norm(),
            });
        }
        let r = (ij.r + (ij.t * ji.t - ij.r * ji.r) * jk.r * e2) / den;
        let t = ij.t * jk.t * e / den;
        Ok(FresnelPair { r, t })
    }

    /// `r_{j/3}`, zero for `j = 3` (nothing reflects from the open side).
    pub fn r_right(&self, j: usize) -> Result<Complex64> {
        if j == 3 {
            Ok(Complex64::new(0.0, 0.0))
        } else {
            Ok(self.composite(j, 3)?.r)
        }
    }

    /// `r_{j/0}`.
    pub fn r_left(&self, j: usize) -> Result<Complex64> {
        Ok(self.composite(j, 0)?.r)
    }

    /// `t_{j/3}`, one for `j = 3`.
    pub fn t_right(&self, j: usize) -> Result<Complex64> {
        if j == 3 {
            Ok(Complex64::new(1.0, 0.0))
        } else {
            Ok(self.composite(j, 3)?.t)
        }
    }

    /// `D_j = 1 − r_{j/0} r_{j/3} e^{2iβ_j d_j}` (`D_3 = 1`).
    pub fn layer_denominator(&self, j: usize) -> Result<Complex64> {
        let e = self.phase(j);
        Ok(1.0 - self.r_left(j)? * self.r_right(j)? * e * e)
    }

    pub fn denominators(&self) -> Result<Denominators> {
        let r13 = self.composite(1, 3)?.r;
        let e1 = self.phase(1);
        let e2 = self.phase(2);
        let d1 = 1.0 + r13 * e1 * e1;
        let d2 = self.layer_denominator(2)?;
        let r21 = self.interface(2, 1)?.r;
        let r23 = self.interface(2, 3)?.r;
        let d2_prime = 1.0 - r21 * r23 * e2 * e2;
        Ok(Denominators { d1, d2, d2_prime })
    }
}

/// Residuals of the layer identities relating the composite coefficients.
///
/// Each residual is `|LHS − RHS| / (1 + largest term magnitude)`: near a
/// resonance the `1/D_1` terms grow like the inverse loss and an absolute
/// residual would only measure their roundoff.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LayerIdentityReport {
    /// `|LHS − RHS|` of the `D_2`/`D_2'` identity with the upper sign.
    pub mirror_plus: f64,
    /// Same identity with the lower sign.
    pub mirror_minus: f64,
    /// `|(r_30 − r_31) + t_13 t_31 e^{2iβ_1 l}/D_1|`.
    pub outer_reflection: f64,
    /// `r_13` against its closed form through the mirror interfaces.
    pub cavity_reflection: f64,
    pub max: f64,
}

pub fn verify_layer_identities(stack: &LayerStack, omega: f64) -> Result<LayerIdentityReport> {
    let s = stack.at(omega)?;
    let den = s.denominators()?;
    let e1 = s.phase(1);
    let e2 = s.phase(2);
    let r20 = s.composite(2, 0)?.r;
    let p21 = s.interface(2, 1)?;
    let p23 = s.interface(2, 3)?;
    let p13 = s.composite(1, 3)?;
    let p31 = s.composite(3, 1)?;
    let r30 = s.composite(3, 0)?.r;

    let rel = |res: Complex64, terms: &[Complex64]| {
        res.norm() / (1.0 + terms.iter().map(|t| t.norm()).fold(0.0, f64::max))
    };
    let mirror = |sign: f64| {
        let a = (1.0 + sign * r20 * e2) / den.d2;
        let b = (1.0 + sign * p21.r * e2) / den.d2_prime;
        let rhs = -sign * p13.t / (den.d1 * den.d2_prime)
            * (p21.t / p23.t)
            * (1.0 + sign * p23.r * e2)
            * e1
            * e1;
        rel(a - b - rhs, &[a, b, rhs])
    };
    let mirror_plus = mirror(1.0);
    let mirror_minus = mirror(-1.0);
    let resonant = p13.t * p31.t * e1 * e1 / den.d1;
    let outer_reflection = rel(r30 - p31.r + resonant, &[r30, p31.r, resonant]);
    let closed = (-p21.r + p23.r * e2 * e2) / (1.0 - p23.r * p21.r * e2 * e2);
    let cavity_reflection = rel(p13.r - closed, &[p13.r, closed]);
    let max = mirror_plus
        .max(mirror_minus)
        .max(outer_reflection)
        .max(cavity_reflection);
    Ok(LayerIdentityReport {
        mirror_plus,
        mirror_minus,
        outer_reflection,
        cavity_reflection,
        max,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn vacuum_index() {
        let (n, beta) = refractive_index(&Permittivity::vacuum(), 2.5).unwrap();
        assert_eq!(n, c(1.0, 0.0));
        assert_eq!(beta, c(2.5, 0.0));
    }

    #[test]
    fn negative_permittivity_branch() {
        let n = branch_index(c(-1.0, 0.0));
        assert!((n - c(0.0, 1.0)).norm() < 1e-15);
        let n = branch_index(c(-1.0, -0.0));
        assert!((n - c(0.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn index_branch_against_both_roots() {
        let eps = c(2.25, 0.01);
        let root = eps.sqrt();
        let chosen = [root, -root]
            .into_iter()
            .find(|n| n.re >= 0.0 && n.im >= 0.0)
            .unwrap();
        let (n, _) = refractive_index(&Permittivity::constant(2.25, 0.01), 1.0).unwrap();
        assert!((n - chosen).norm() < 1e-15);
        assert!((n * n - eps).norm() < 1e-14);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(
            refractive_index(&Permittivity::vacuum(), 0.0),
            Err(CavityError::NonPositiveFrequency(_))
        ));
        assert!(matches!(
            refractive_index(&Permittivity::constant(2.0, -0.1), 1.0),
            Err(CavityError::Passivity(_))
        ));
        assert!(LayerStack::constant(0.0, 0.1, c(1.0, 0.0), c(2.0, 0.0), c(1.0, 0.0)).is_err());
        assert!(LayerStack::constant(1.0, -0.1, c(1.0, 0.0), c(2.0, 0.0), c(1.0, 0.0)).is_err());
    }

    #[test]
    fn lorentz_is_passive_on_real_axis() {
        let m = Permittivity::Lorentz {
            strength: 0.8,
            resonance: 2.0,
            damping: 0.1,
        };
        for i in 1..200 {
            let w = i as f64 * 0.05;
            assert!(m.eval(c(w, 0.0)).im >= 0.0);
        }
    }

    #[test]
    fn interface_examples() {
        let p = fresnel_interface(c(1.0, 0.0), c(1.0, 0.0)).unwrap();
        assert_eq!(p.r, c(0.0, 0.0));
        assert_eq!(p.t, c(1.0, 0.0));

        let ij = fresnel_interface(c(1.0, 0.0), c(2.0, 0.0)).unwrap();
        let ji = fresnel_interface(c(2.0, 0.0), c(1.0, 0.0)).unwrap();
        assert_relative_eq!(ij.r.re, -1.0 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(ij.t.re, 2.0 / 3.0, epsilon = 1e-15);
        assert!((ij.t * ji.t - ij.r * ji.r - 1.0).norm() < 1e-15);

        let far = fresnel_interface(c(1.0, 0.0), c(1e6, 0.0)).unwrap();
        assert!((far.r + 1.0).norm() < 1e-5);
        assert!(far.t.norm() < 1e-5);

        assert!(fresnel_interface(c(1.0, 0.5), c(-1.0, -0.5)).is_err());
    }

    #[test]
    fn zero_thickness_mirror_collapses() {
        let s = LayerStack::constant(1.0, 0.0, c(1.0, 0.0), c(4.0, 0.3), c(2.0, 0.0)).unwrap();
        let sp = s.at(1.7).unwrap();
        let direct = fresnel_interface(sp.beta[1], sp.beta[3]).unwrap();
        let comp = sp.composite(1, 3).unwrap();
        assert!((comp.r - direct.r).norm() < 1e-15);
        assert!((comp.t - direct.t).norm() < 1e-15);
        let den = sp.denominators().unwrap();
        let r21 = sp.interface(2, 1).unwrap().r;
        let r23 = sp.interface(2, 3).unwrap().r;
        assert!((den.d2_prime - (1.0 - r21 * r23)).norm() < 1e-15);
    }

    #[test]
    fn mirror_pivots_agree() {
        let s = LayerStack::constant(1.0, 0.13, c(1.2, 0.01), c(3.0, 0.2), c(1.0, 0.0)).unwrap();
        let sp = s.at(2.3).unwrap();
        for (i, k) in [(0, 3), (3, 0)] {
            let a = sp.composite_via(i, k, 1).unwrap();
            let b = sp.composite_via(i, k, 2).unwrap();
            assert!((a.r - b.r).norm() < 1e-12 * a.r.norm().max(1.0));
            assert!((a.t - b.t).norm() < 1e-12 * a.t.norm().max(1.0));
        }
    }

    #[test]
    fn closed_cavity_denominator_vanishes() {
        // ε_2 = ε_3 → no mirror contrast; use a huge mirror instead.
        let s = LayerStack::constant(1.0, 0.0, c(1.0, 0.0), c(1.0, 0.0), c(1e20, 0.0)).unwrap();
        let sp = s.at(std::f64::consts::PI).unwrap();
        let d = sp.denominators().unwrap();
        assert!(d.d1.norm() < 1e-9);
    }

    #[test]
    fn identities_hold_for_absorbing_mirror() {
        let s = LayerStack::constant(1.0, 0.2, c(1.0, 0.0), c(2.25, 0.1), c(1.0, 0.0)).unwrap();
        let rep = verify_layer_identities(&s, 2.0).unwrap();
        assert!(rep.max < 1e-12, "{rep:?}");
        let s0 = LayerStack::constant(1.0, 0.0, c(1.0, 0.0), c(2.25, 0.1), c(1.0, 0.0)).unwrap();
        assert!(verify_layer_identities(&s0, 2.0).unwrap().max < 1e-12);
    }
}
