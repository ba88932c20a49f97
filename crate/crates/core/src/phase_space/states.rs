//! Single-mode states as s-ordered phase-space functions.

use crate::error::{CavityError, Result};
use crate::special::laguerre;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Largest Fock number with a tabulated Wigner function.
pub const MAX_FOCK: u32 = 10;

/// Wigner function of a thermal state with `n̄` quanta.
pub fn thermal_wigner(n_bar: f64, alpha: Complex64) -> f64 {
    let w = 1.0 + 2.0 * n_bar;
    2.0 / (PI * w) * (-2.0 * alpha.norm_sqr() / w).exp()
}

/// Wigner function of the Fock state `|n⟩`.
pub fn fock_wigner(n: u32, alpha: Complex64) -> f64 {
    let r2 = alpha.norm_sqr();
    let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    2.0 / PI * sign * laguerre(n, 4.0 * r2) * (-2.0 * r2).exp()
}

fn symmetric_inverse(m: &[[f64; 2]; 2]) -> Option<([[f64; 2]; 2], f64)> {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    if !(det > 0.0) {
        return None;
    }
    Some((
        [
            [m[1][1] / det, -m[0][1] / det],
            [-m[1][0] / det, m[0][0] / det],
        ],
        det,
    ))
}

/// Gaussian `P(α; s)` with mean `α̅` and covariance of `(Re α, Im α)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gaussian {
    pub mean: Complex64,
    pub cov: [[f64; 2]; 2],
    pub s: f64,
}

impl Gaussian {
    pub fn new(mean: Complex64, cov: [[f64; 2]; 2], s: f64) -> Result<Self> {
        let g = Gaussian { mean, cov, s };
        g.validate()?;
        Ok(g)
    }

    pub fn vacuum() -> Self {
        Self::thermal(0.0)
    }

    pub fn coherent(alpha: Complex64) -> Self {
        Gaussian {
            mean: alpha,
            cov: [[0.25, 0.0], [0.0, 0.25]],
            s: 0.0,
        }
    }

    pub fn thermal(n_bar: f64) -> Self {
        let v = 0.25 * (1.0 + 2.0 * n_bar);
        Gaussian {
            mean: Complex64::new(0.0, 0.0),
            cov: [[v, 0.0], [0.0, v]],
            s: 0.0,
        }
    }

    /// Squeezed vacuum: variance `e^{−2r}/4` along the direction at angle `φ/2`.
    pub fn squeezed(r: f64, phi: f64) -> Self {
        let (sn, cs) = (0.5 * phi).sin_cos();
        let (a, b) = (0.25 * (-2.0 * r).exp(), 0.25 * (2.0 * r).exp());
        let cov = [
            [a * cs * cs + b * sn * sn, (a - b) * cs * sn],
            [(a - b) * cs * sn, a * sn * sn + b * cs * cs],
        ];
        Gaussian {
            mean: Complex64::new(0.0, 0.0),
            cov,
            s: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let c = &self.cov;
        if !(self.s <= 1.0) {
            return Err(CavityError::InvalidState(format!(
                "order s = {} exceeds 1",
                self.s
            )));
        }
        if (c[0][1] - c[1][0]).abs() > 1e-12 * (c[0][0].abs() + c[1][1].abs()) {
            return Err(CavityError::InvalidState(
                "covariance is not symmetric".into(),
            ));
        }
        let w = self.wigner_cov();
        let det = w[0][0] * w[1][1] - w[0][1] * w[1][0];
        if !(w[0][0] > 0.0 && w[1][1] > 0.0 && det >= 1.0 / 16.0 - 1e-9) {
            return Err(CavityError::InvalidState(format!(
                "covariance violates the uncertainty relation (Wigner det = {det}, need >= 1/16)"
            )));
        }
        if symmetric_inverse(&self.cov).is_none() {
            return Err(CavityError::InvalidState(format!(
                "order s = {} leaves no regular phase-space function",
                self.s
            )));
        }
        Ok(())
    }

    /// Covariance of the Wigner function of the same state.
    pub fn wigner_cov(&self) -> [[f64; 2]; 2] {
        let mut c = self.cov;
        c[0][0] += 0.25 * self.s;
        c[1][1] += 0.25 * self.s;
        c
    }

    /// The same state in order `s`.
    pub fn to_order(&self, s: f64) -> Result<Self> {
        let mut c = self.wigner_cov();
        c[0][0] -= 0.25 * s;
        c[1][1] -= 0.25 * s;
        Gaussian::new(self.mean, c, s)
    }

    pub fn density(&self, alpha: Complex64) -> f64 {
        let (inv, det) = symmetric_inverse(&self.cov).expect("validated covariance");
        let dx = alpha.re - self.mean.re;
        let dp = alpha.im - self.mean.im;
        let q = inv[0][0] * dx * dx + 2.0 * inv[0][1] * dx * dp + inv[1][1] * dp * dp;
        (-0.5 * q).exp() / (2.0 * PI * det.sqrt())
    }

    /// `C(β; s) = ∫ P(α; s) e^{βα* − β*α} d²α`.
    pub fn characteristic(&self, beta: Complex64) -> Complex64 {
        let (u, v) = (beta.re, beta.im);
        let (qx, qp) = (v, -u);
        let c = &self.cov;
        let quad = c[0][0] * qx * qx + 2.0 * c[0][1] * qx * qp + c[1][1] * qp * qp;
        let phase = 2.0 * (v * self.mean.re - u * self.mean.im);
        Complex64::from_polar((-2.0 * quad).exp(), phase)
    }
}

/// Tabulated `P(α; s)` on `[−A, A]²`.
///
/// `values[row·n + col]` is the value at `x = −A + col·h`, `p = −A + row·h`
/// with `h = 2A/n` and `α = x + ip`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub half_width: f64,
    pub n: usize,
    pub s: f64,
    pub values: Vec<f64>,
}

impl Grid {
    pub fn new(half_width: f64, n: usize, s: f64, values: Vec<f64>) -> Result<Self> {
        if !(half_width > 0.0) || n < 2 || !n.is_multiple_of(2) {
            return Err(CavityError::InvalidState(format!(
                "grid needs A > 0 and an even resolution, got A = {half_width}, n = {n}"
            )));
        }
        if values.len() != n * n {
            return Err(CavityError::InvalidState(format!(
                "grid of resolution {n} needs {} values, got {}",
                n * n,
                values.len()
            )));
        }
        if !(s <= 1.0) {
            return Err(CavityError::InvalidState(format!(
                "order s = {s} exceeds 1"
            )));
        }
        Ok(Grid {
            half_width,
            n,
            s,
            values,
        })
    }

    pub fn step(&self) -> f64 {
        2.0 * self.half_width / self.n as f64
    }

    pub fn cell_area(&self) -> f64 {
        self.step().powi(2)
    }

    pub fn coordinate(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.step()
    }

    pub fn point(&self, row: usize, col: usize) -> Complex64 {
        Complex64::new(self.coordinate(col), self.coordinate(row))
    }

    pub fn sample<F: Fn(Complex64) -> f64>(
        half_width: f64,
        n: usize,
        s: f64,
        f: F,
    ) -> Result<Self> {
        let mut g = Grid::new(half_width, n, s, vec![0.0; n * n])?;
        for row in 0..n {
            for col in 0..n {
                g.values[row * n + col] = f(g.point(row, col));
            }
        }
        Ok(g)
    }

    pub fn value(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.n + col]
    }

    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.cell_area()
    }

    /// Fraction of `|P|` mass within `frame` cells of the border.
    pub fn border_fraction(&self, frame: usize) -> f64 {
        let n = self.n;
        let (mut edge, mut total) = (0.0, 0.0);
        for row in 0..n {
            for col in 0..n {
                let v = self.values[row * n + col].abs();
                total += v;
                if row < frame || col < frame || row >= n - frame || col >= n - frame {
                    edge += v;
                }
            }
        }
        if total == 0.0 {
            0.0
        } else {
            edge / total
        }
    }

    /// Largest absolute difference to `other` on the same grid.
    pub fn sup_distance(&self, other: &Grid) -> Result<f64> {
        self.check_same_grid(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    pub fn check_same_grid(&self, other: &Grid) -> Result<()> {
        if self.n != other.n || (self.half_width - other.half_width).abs() > 1e-12 * self.half_width
        {
            return Err(CavityError::InvalidArgument(format!(
                "grids differ: ({}, {}) vs ({}, {})",
                self.half_width, self.n, other.half_width, other.n
            )));
        }
        Ok(())
    }

    /// `(mean α, Wigner-order covariance)` from grid moments.
    pub fn moments(&self) -> (Complex64, [[f64; 2]; 2]) {
        let n = self.n;
        let mut m = [0.0; 6];
        for row in 0..n {
            for col in 0..n {
                let v = self.values[row * n + col];
                let (x, p) = (self.coordinate(col), self.coordinate(row));
                m[0] += v;
                m[1] += v * x;
                m[2] += v * p;
                m[3] += v * x * x;
                m[4] += v * x * p;
                m[5] += v * p * p;
            }
        }
        let (mx, mp) = (m[1] / m[0], m[2] / m[0]);
        let cxx = m[3] / m[0] - mx * mx + 0.25 * self.s;
        let cxp = m[4] / m[0] - mx * mp;
        let cpp = m[5] / m[0] - mp * mp + 0.25 * self.s;
        (Complex64::new(mx, mp), [[cxx, cxp], [cxp, cpp]])
    }
}

/// A state handed to the input-output map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PhaseSpaceState {
    Gaussian(Gaussian),
    /// Fock state `|n⟩`, `n ≤ 10`, in order `s`.
    Fock {
        n: u32,
        s: f64,
    },
    Grid(Grid),
}

impl PhaseSpaceState {
    pub fn vacuum() -> Self {
        PhaseSpaceState::Gaussian(Gaussian::vacuum())
    }

    pub fn fock(n: u32) -> Result<Self> {
        if n > MAX_FOCK {
            return Err(CavityError::InvalidState(format!(
                "Fock states are tabulated up to n = {MAX_FOCK}, got {n}"
            )));
        }
        Ok(PhaseSpaceState::Fock { n, s: 0.0 })
    }

    pub fn order(&self) -> f64 {
        match self {
            PhaseSpaceState::Gaussian(g) => g.s,
            PhaseSpaceState::Fock { s, .. } => *s,
            PhaseSpaceState::Grid(g) => g.s,
        }
    }

    /// Closed-form characteristic function, if the state has one.
    pub fn analytic_characteristic(&self, beta: Complex64) -> Option<Complex64> {
        match self {
            PhaseSpaceState::Gaussian(g) => Some(g.characteristic(beta)),
            PhaseSpaceState::Fock { n, s } => {
                let b2 = beta.norm_sqr();
                Some(Complex64::new(
                    (-0.5 * (1.0 - s) * b2).exp() * laguerre(*n, b2),
                    0.0,
                ))
            }
            PhaseSpaceState::Grid(_) => None,
        }
    }

    /// Rough phase-space extent: `(amplitude, thermal-like occupation)`.
    pub fn extent(&self) -> (f64, f64) {
        match self {
            PhaseSpaceState::Gaussian(g) => {
                let w = g.wigner_cov();
                let tr = w[0][0] + w[1][1];
                let det = w[0][0] * w[1][1] - w[0][1] * w[0][1];
                let lmax = 0.5 * (tr + (tr * tr - 4.0 * det).max(0.0).sqrt());
                (g.mean.norm(), (2.0 * lmax - 0.5).max(0.0))
            }
            PhaseSpaceState::Fock { n, .. } => ((*n as f64).sqrt(), 0.0),
            PhaseSpaceState::Grid(g) => (g.half_width / 5.0, 0.0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            PhaseSpaceState::Gaussian(g) => g.validate(),
            PhaseSpaceState::Fock { n, s } => {
                if *n > MAX_FOCK || !(*s <= 1.0) {
                    return Err(CavityError::InvalidState(format!(
                        "unsupported Fock state n = {n}, s = {s}"
                    )));
                }
                Ok(())
            }
            PhaseSpaceState::Grid(g) => {
                Grid::new(g.half_width, g.n, g.s, g.values.clone()).map(|_| ())
            }
        }
    }
}

/// Thermal occupations of the dissipative channels plus the incoming field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelEnsemble {
    pub n_bar_cav: f64,
    pub n_bar_plus: f64,
    pub n_bar_minus: f64,
    pub input: PhaseSpaceState,
}

impl ChannelEnsemble {
    pub fn vacuum() -> Self {
        ChannelEnsemble {
            n_bar_cav: 0.0,
            n_bar_plus: 0.0,
            n_bar_minus: 0.0,
            input: PhaseSpaceState::vacuum(),
        }
    }

    pub fn n_bars(&self) -> [f64; 3] {
        [self.n_bar_cav, self.n_bar_plus, self.n_bar_minus]
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_bars().iter().any(|n| !(*n >= 0.0) || !n.is_finite()) {
            return Err(CavityError::InvalidState(format!(
                "thermal occupations must be finite and >= 0: {:?}",
                self.n_bars()
            )));
        }
        self.input.validate()
    }

    /// Thermal channel states as Wigner-order Gaussians.
    pub fn channel_states(&self) -> [PhaseSpaceState; 3] {
        self.n_bars()
            .map(|n| PhaseSpaceState::Gaussian(Gaussian::thermal(n)))
    }
}
