//! One-dimensional scalar Green function of the layered cavity.
//!
//! For `j > j'`, or `j = j'` with `z > z'`,
//!
//! ```text
//! G(j,z; j',z') = (i/2) E_j^>(z) Ξ^{jj'} E_{j'}^<(z')
//! E_j^>(z) = e^{iβ_j(z−d_j)} + r_{j/3} e^{−iβ_j(z−d_j)}
//! E_j^<(z) = e^{−iβ_j z} + r_{j/0} e^{iβ_j z}
//! Ξ^{jj'}  = (t_{j'/3}/t_{j/3}) e^{iβ_{j'} d_{j'}} / (β_{j'} D_{j'})
//! ```
//!
//! and the mirrored expression otherwise. `G` solves
//! `∂²G + ω²ε G = −δ(z − z')`, so `∂_z G` drops by one across the source.

use crate::error::{CavityError, Result};
use crate::optical_stack::{LayerStack, Spectrum};
use crate::quadrature::{integrate, QuadOptions};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Rightward- and leftward-normalised solutions in one layer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveAmplitudes {
    pub right: Complex64,
    pub left: Complex64,
}

/// Green function of one stack at one real frequency, with the layer
/// coefficients cached.
#[derive(Debug, Clone)]
pub struct LayeredGreen {
    pub spectrum: Spectrum,
    l: f64,
    d: f64,
    r_left: [Complex64; 4],
    r_right: [Complex64; 4],
    t_right: [Complex64; 4],
    xi_diag: [Complex64; 4],
}

impl LayeredGreen {
    pub fn new(stack: &LayerStack, omega: f64) -> Result<Self> {
        let spectrum = stack.at(omega)?;
        let zero = Complex64::new(0.0, 0.0);
        let mut r_left = [zero; 4];
        let mut r_right = [zero; 4];
        let mut t_right = [zero; 4];
        let mut xi_diag = [zero; 4];
        for j in 1..=3 {
            r_left[j] = spectrum.r_left(j)?;
            r_right[j] = spectrum.r_right(j)?;
            t_right[j] = spectrum.t_right(j)?;
            let e = spectrum.phase(j);
            let dj = 1.0 - r_left[j] * r_right[j] * e * e;
            if dj.norm() < crate::optical_stack::POLE_THRESHOLD {
                return Err(CavityError::PoleProximity {
                    layer: j,
                    denominator: dj.norm(),
                });
            }
            xi_diag[j] = e / (spectrum.beta[j] * dj);
        }
        Ok(LayeredGreen {
            spectrum,
            l: stack.l,
            d: stack.d,
            r_left,
            r_right,
            t_right,
            xi_diag,
        })
    }

    pub fn check_position(&self, j: usize, z: f64) -> Result<()> {
        let upper = match j {
            1 => self.l,
            2 => self.d,
            3 => f64::INFINITY,
            _ => return Err(CavityError::OutsideLayer { layer: j, z }),
        };
        if z >= 0.0 && z <= upper {
            Ok(())
        } else {
            Err(CavityError::OutsideLayer { layer: j, z })
        }
    }

    pub fn amplitudes(&self, j: usize, z: f64) -> Result<WaveAmplitudes> {
        self.check_position(j, z)?;
        let beta = self.spectrum.beta[j];
        let dj = self.spectrum.thickness[j];
        let fwd = (I * beta * (z - dj)).exp();
        let back = (I * beta * z).exp();
        Ok(WaveAmplitudes {
            right: fwd + self.r_right[j] / fwd,
            left: 1.0 / back + self.r_left[j] * back,
        })
    }

    /// `Ξ^{ab}` for `a ≥ b`.
    fn xi(&self, a: usize, b: usize) -> Complex64 {
        debug_assert!(a >= b);
        self.t_right[b] / self.t_right[a] * self.xi_diag[b]
    }

    pub fn eval(&self, j: usize, z: f64, jp: usize, zp: f64) -> Result<Complex64> {
        let here = self.amplitudes(j, z)?;
        let there = self.amplitudes(jp, zp)?;
        let g = if j > jp || (j == jp && z >= zp) {
            here.right * self.xi(j, jp) * there.left
        } else {
            here.left * self.xi(jp, j) * there.right
        };
        Ok(0.5 * I * g)
    }

    /// Coefficient `a` with `G(1,z; 3,x) = a·e^{iβ_3 x}`.
    pub fn outgoing_coefficient(&self, z: f64) -> Result<Complex64> {
        let here = self.amplitudes(1, z)?;
        Ok(0.5 * I * here.left * self.xi(3, 1))
    }
}

pub fn wave_amplitudes(stack: &LayerStack, j: usize, z: f64, omega: f64) -> Result<WaveAmplitudes> {
    LayeredGreen::new(stack, omega)?.amplitudes(j, z)
}

pub fn green(
    stack: &LayerStack,
    j: usize,
    z: f64,
    jp: usize,
    zp: f64,
    omega: f64,
) -> Result<Complex64> {
    LayeredGreen::new(stack, omega)?.eval(j, z, jp, zp)
}

/// `i e^{iβ|z − z'|}/(2β)`, the Green function of a homogeneous medium.
pub fn free_space_green(beta: Complex64, z: f64, zp: f64) -> Complex64 {
    0.5 * I * (I * beta * (z - zp).abs()).exp() / beta
}

/// `|∂²_z G + ω²ε_j G|` from a central difference with step `h`, source and
/// field point both in layer `j`.
pub fn helmholtz_residual(
    stack: &LayerStack,
    j: usize,
    z: f64,
    zp: f64,
    omega: f64,
    h: f64,
) -> Result<f64> {
    let g = LayeredGreen::new(stack, omega)?;
    helmholtz_residual_with(&g, j, z, zp, h)
}

pub fn helmholtz_residual_with(g: &LayeredGreen, j: usize, z: f64, zp: f64, h: f64) -> Result<f64> {
    if (z - zp).abs() <= h
        || g.check_position(j, z - h).is_err()
        || g.check_position(j, z + h).is_err()
    {
        return Err(CavityError::Stencil { z, h });
    }
    let gm = g.eval(j, z - h, j, zp)?;
    let g0 = g.eval(j, z, j, zp)?;
    let gp = g.eval(j, z + h, j, zp)?;
    let beta = g.spectrum.beta[j];
    Ok(((gp - 2.0 * g0 + gm) / (h * h) + beta * beta * g0).norm())
}

/// Residuals at `h` and `h/2` and their ratio (≈ 4 for a second-order stencil).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Richardson {
    pub coarse: f64,
    pub fine: f64,
    pub ratio: f64,
}

pub fn helmholtz_richardson(
    stack: &LayerStack,
    j: usize,
    z: f64,
    zp: f64,
    omega: f64,
    h: f64,
) -> Result<Richardson> {
    let g = LayeredGreen::new(stack, omega)?;
    let coarse = helmholtz_residual_with(&g, j, z, zp, h)?;
    let fine = helmholtz_residual_with(&g, j, z, zp, 0.5 * h)?;
    Ok(Richardson {
        coarse,
        fine,
        ratio: coarse / fine,
    })
}

/// `∂_z G(z'+) − ∂_z G(z'−)` from second-order one-sided differences.
pub fn derivative_jump(
    stack: &LayerStack,
    j: usize,
    zp: f64,
    omega: f64,
    h: f64,
) -> Result<Complex64> {
    let g = LayeredGreen::new(stack, omega)?;
    if g.check_position(j, zp - 2.0 * h).is_err() || g.check_position(j, zp + 2.0 * h).is_err() {
        return Err(CavityError::Stencil { z: zp, h });
    }
    let f = |z: f64| g.eval(j, z, j, zp);
    let g0 = f(zp)?;
    let right = (-3.0 * g0 + 4.0 * f(zp + h)? - f(zp + 2.0 * h)?) / (2.0 * h);
    let left = (3.0 * g0 - 4.0 * f(zp - h)? + f(zp - 2.0 * h)?) / (2.0 * h);
    Ok(right - left)
}

/// Both sides of the absorption identity
/// `Im G(z1,z2) = ω² ∫ ε''(x) G(z1,x) G*(z2,x) dx` for `z1, z2` in the cavity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AbsorptionIdentity {
    pub im_g: f64,
    pub cavity_part: Complex64,
    pub mirror_part: Complex64,
    /// Outer half-space contribution, closed form `ω n_3' a_1 a_2*`; for
    /// `ε_3'' = 0` this is the radiation term of the lossless limit.
    pub outer_part: Complex64,
    pub relative_residual: f64,
}

pub fn absorption_identity_residual(
    stack: &LayerStack,
    z1: f64,
    z2: f64,
    omega: f64,
    opts: &QuadOptions,
) -> Result<AbsorptionIdentity> {
    let g = LayeredGreen::new(stack, omega)?;
    g.check_position(1, z1)?;
    g.check_position(1, z2)?;
    let n = g.spectrum.n;
    let eps_im = |j: usize| (n[j] * n[j]).im;
    let w2 = omega * omega;

    let layer_integral = |j: usize, breaks: Vec<f64>| -> Result<Complex64> {
        let e = eps_im(j);
        if e == 0.0 || breaks.last() == breaks.first() {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let f = |x: f64| {
            let a = g.eval(1, z1, j, x).unwrap_or_default();
            let b = g.eval(1, z2, j, x).unwrap_or_default();
            a * b.conj()
        };
        Ok(integrate(f, &breaks, opts)?.value * (w2 * e))
    };

    let mut cavity_breaks = vec![0.0, z1.min(z2), z1.max(z2), stack.l];
    cavity_breaks.dedup();
    let cavity_part = layer_integral(1, cavity_breaks)?;
    let mirror_part = layer_integral(2, vec![0.0, stack.d])?;
    let a1 = g.outgoing_coefficient(z1)?;
    let a2 = g.outgoing_coefficient(z2)?;
    let outer_part = omega * n[3].re * a1 * a2.conj();

    let im_g = g.eval(1, z1, 1, z2)?.im;
    let rhs = cavity_part + mirror_part + outer_part;
    let scale = im_g.abs().max(rhs.norm()).max(f64::MIN_POSITIVE);
    Ok(AbsorptionIdentity {
        im_g,
        cavity_part,
        mirror_part,
        outer_part,
        relative_residual: (rhs - im_g).norm() / scale,
    })
}
