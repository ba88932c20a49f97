//! Quantum-state input-output map for the relevant outgoing mode.
//!
//! Convention: `α = x + ip` with quadratures `x = Re α`, `p = Im α`; the
//! vacuum Wigner function has variance 1/4 in each quadrature,
//! `W_vac(α) = (2/π) e^{−2|α|²}`. Characteristic functions are
//! `C(β; s) = ∫ P(α; s) e^{βα* − β*α} d²α`, so `C(β; s) = C(β; 0) e^{s|β|²/2}`.
//!
//! The output characteristic function is
//! `C_out(β; s) = e^{−ξ|β|²/2} C_cav(√η β; s') Π_σ C_σ(√ζ_σ β; s_σ)` with
//! `ξ = η s' + Σ ζ_σ s_σ − s`, which must be non-negative.

mod formats;
mod states;
mod transform;

pub use formats::{read_grid_binary, read_grid_csv, write_grid_binary, write_grid_csv, GRID_MAGIC};
pub use states::{
    fock_wigner, thermal_wigner, ChannelEnsemble, Gaussian, Grid, PhaseSpaceState, MAX_FOCK,
};
pub use transform::{
    beta_axis, characteristic, characteristic_out, default_half_width, gaussian_propagate,
    grid_characteristic, inverse_characteristic, p_out_transform, to_grid, wigner_out_thermal,
    GridOptions, TransformInputs, LEAKAGE_LIMIT,
};

use crate::error::{CavityError, Result};
use crate::io_weights::ModeWeights;
use crate::par::Exec;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Width of the smoothing Gaussian; `limiting` marks `ξ = 0`, where the map
/// is a pure scaled convolution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Xi {
    pub value: f64,
    pub limiting: bool,
}

/// Values of `|ξ|` below this count as zero.
pub const XI_ZERO: f64 = 1e-12;

/// `ξ = η s' + Σ_σ ζ_σ s_σ − s` for channel orders `[in, cav, +, −]`.
pub fn xi_s(weights: &ModeWeights, s: f64, s_cavity: f64, s_channels: [f64; 4]) -> Result<Xi> {
    let z = [
        weights.zeta_in,
        weights.zeta_cav,
        weights.zeta_plus,
        weights.zeta_minus,
    ];
    let xi =
        weights.eta * s_cavity + z.iter().zip(&s_channels).map(|(a, b)| a * b).sum::<f64>() - s;
    if xi < -XI_ZERO {
        return Err(CavityError::NegativeXi {
            xi,
            orders: format!(
                "s = {s}, cavity s' = {s_cavity}, channels (in, cav, +, -) = {s_channels:?}"
            ),
        });
    }
    if xi.abs() <= XI_ZERO {
        return Ok(Xi {
            value: 0.0,
            limiting: true,
        });
    }
    Ok(Xi {
        value: xi,
        limiting: false,
    })
}

/// `ξ^W = 1 − η − ζ_in + 2 Σ_λ n̄_λ ζ_λ` for Wigner-order inputs and thermal
/// channels with occupations `[cav, +, −]`.
pub fn xi_wigner(weights: &ModeWeights, n_bar: [f64; 3]) -> Result<f64> {
    if n_bar.iter().any(|n| !(*n >= 0.0)) {
        return Err(CavityError::InvalidArgument(format!(
            "thermal occupations must be >= 0: {n_bar:?}"
        )));
    }
    let xi = 1.0 - weights.eta - weights.zeta_in + 2.0 * thermal_load(weights, n_bar);
    Ok(if xi.abs() <= XI_ZERO {
        0.0
    } else {
        xi.max(0.0)
    })
}

fn thermal_load(w: &ModeWeights, n_bar: [f64; 3]) -> f64 {
    n_bar[0] * w.zeta_cav + n_bar[1] * w.zeta_plus + n_bar[2] * w.zeta_minus
}

/// Figures of merit for state extraction. Ratios with a vanishing
/// denominator are `+∞`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtractionReport {
    /// `η/(1 − η)` (vacuum channels).
    pub vacuum_merit: f64,
    /// `η/(1 − η + 2Σ n̄ ζ)` (thermal channels).
    pub thermal_merit: f64,
    /// Weight of the incoming field in the output superposition.
    pub input_weight: f64,
    /// Weight of the cavity field in the output superposition.
    pub cavity_weight: f64,
    /// `ζ_in/(1 − η)²`; 1 without mirror absorption.
    pub input_suppression: f64,
    pub thermal_load: f64,
}

fn ratio(num: f64, den: f64) -> f64 {
    if den.abs() <= XI_ZERO {
        if num.abs() <= XI_ZERO {
            1.0
        } else {
            f64::INFINITY
        }
    } else {
        num / den
    }
}

pub fn extraction_report(weights: &ModeWeights, n_bar: [f64; 3]) -> ExtractionReport {
    let load = thermal_load(weights, n_bar);
    let loss = 1.0 - weights.eta;
    let shared = loss - weights.zeta_in + 2.0 * load;
    ExtractionReport {
        vacuum_merit: ratio(weights.eta, loss),
        thermal_merit: ratio(weights.eta, loss + 2.0 * load),
        input_weight: ratio(weights.zeta_in, shared),
        cavity_weight: ratio(weights.eta, shared),
        input_suppression: ratio(weights.zeta_in, loss * loss),
        thermal_load: load,
    }
}

/// Overlap `F = π ∫ W_a W_b d²α` of two Wigner functions; the fidelity when
/// one state is pure. Gaussian pairs use the closed form, anything else is
/// sampled on a common grid.
pub fn fidelity(a: &PhaseSpaceState, b: &PhaseSpaceState, opts: &GridOptions) -> Result<f64> {
    if a.order() != 0.0 || b.order() != 0.0 {
        return Err(CavityError::InvalidArgument(
            "fidelity needs Wigner-order states".into(),
        ));
    }
    if let (PhaseSpaceState::Gaussian(ga), PhaseSpaceState::Gaussian(gb)) = (a, b) {
        return Ok(gaussian_overlap(ga, gb));
    }
    let (half_width, n) = match (a, b) {
        (PhaseSpaceState::Grid(g), _) | (_, PhaseSpaceState::Grid(g)) => (g.half_width, g.n),
        _ => (
            opts.half_width
                .unwrap_or_else(|| default_half_width([a, b])),
            opts.n,
        ),
    };
    let ga = as_grid(a, half_width, n, opts.exec)?;
    let gb = as_grid(b, half_width, n, opts.exec)?;
    ga.check_same_grid(&gb)?;
    for g in [&ga, &gb] {
        let leak = (1.0 - g.mass()).abs();
        if leak > LEAKAGE_LIMIT {
            return Err(CavityError::WindowLeakage {
                leak,
                suggested: 1.5 * half_width,
            });
        }
    }
    let dot: f64 = ga.values.iter().zip(&gb.values).map(|(x, y)| x * y).sum();
    Ok(PI * dot * ga.cell_area())
}

fn as_grid(s: &PhaseSpaceState, half_width: f64, n: usize, exec: Exec) -> Result<Grid> {
    match s {
        PhaseSpaceState::Grid(g) => Ok(g.clone()),
        other => to_grid(other, half_width, n, exec),
    }
}

/// `π ∫ W_a W_b` for two Gaussians.
pub fn gaussian_overlap(a: &Gaussian, b: &Gaussian) -> f64 {
    let (ca, cb) = (a.wigner_cov(), b.wigner_cov());
    let s = [
        [ca[0][0] + cb[0][0], ca[0][1] + cb[0][1]],
        [ca[1][0] + cb[1][0], ca[1][1] + cb[1][1]],
    ];
    let det = s[0][0] * s[1][1] - s[0][1] * s[1][0];
    let d = a.mean - b.mean;
    let (dx, dp) = (d.re, d.im);
    let q = (s[1][1] * dx * dx - 2.0 * s[0][1] * dx * dp + s[0][0] * dp * dp) / det;
    PI * (-0.5 * q).exp() / (2.0 * PI * det.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use num_complex::Complex64;

    fn w(eta: f64, zin: f64, zcav: f64) -> ModeWeights {
        ModeWeights {
            eta,
            zeta_in: zin,
            zeta_cav: zcav,
            zeta_plus: 0.0,
            zeta_minus: 0.0,
            at: None,
        }
    }

    #[test]
    fn xi_examples() {
        let all = w(0.8, 0.2, 0.0);
        assert!(xi_s(&all, 0.0, 0.0, [0.0; 4]).unwrap().limiting);
        assert_relative_eq!(xi_s(&all, -1.0, 0.0, [0.0; 4]).unwrap().value, 1.0);
        assert_relative_eq!(
            xi_s(&all, 0.0, 1.0, [1.0, 0.0, 0.0, 0.0]).unwrap().value,
            1.0
        );
        assert!(matches!(
            xi_s(&all, 1.0, 0.0, [0.0; 4]),
            Err(CavityError::NegativeXi { .. })
        ));
        assert_relative_eq!(
            xi_wigner(&w(0.6, 0.3, 0.1), [2.0, 0.0, 0.0]).unwrap(),
            0.5,
            epsilon = 1e-15
        );
    }

    #[test]
    fn report_limits() {
        let r = extraction_report(&ModeWeights::identity(), [0.0; 3]);
        assert!(r.vacuum_merit.is_infinite() && r.thermal_merit.is_infinite());
        assert_eq!(r.input_suppression, 1.0);
        let r = extraction_report(&w(0.9, 0.01, 0.09), [0.0; 3]);
        assert_relative_eq!(r.vacuum_merit, 9.0, max_relative = 1e-12);
        let hot = extraction_report(&w(0.9, 0.01, 0.09), [10.0, 0.0, 0.0]);
        assert!(hot.thermal_merit < r.thermal_merit);
    }

    #[test]
    fn coherent_overlap() {
        let v = Gaussian::vacuum();
        let c = Gaussian::coherent(Complex64::new(1.0, 0.0));
        assert_relative_eq!(gaussian_overlap(&v, &v), 1.0, max_relative = 1e-14);
        assert_relative_eq!(
            gaussian_overlap(&v, &c),
            (-1.0f64).exp(),
            max_relative = 1e-14
        );
    }
}
