//! The state input-output map on a grid.
//!
//! Everything happens in the characteristic-function domain: each input is
//! transformed at the rescaled arguments `√w β`, the factors are multiplied
//! together with the smoothing Gaussian `e^{−ξ|β|²/2}`, and one 2-D FFT
//! returns `P_out(α; s)` on the output grid. Grid inputs are transformed by a
//! direct separable DFT because their rescaled `β` points do not sit on an
//! FFT lattice. Convolving in the `β` domain has no wrap-around, so no
//! zero padding is needed.

use super::states::{Gaussian, Grid, PhaseSpaceState};
use super::{xi_s, xi_wigner, Xi};
use crate::error::{CavityError, Result};
use crate::io_weights::ModeWeights;
use crate::par::Exec;
use num_complex::Complex64;
use rustfft::FftPlanner;
use std::f64::consts::PI;

/// Largest tolerated loss of normalization on an input grid or mass in the
/// output border frame.
pub const LEAKAGE_LIMIT: f64 = 5e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridOptions {
    /// Output half-width; `None` picks `5(1 + amplitude + √n̄)`.
    pub half_width: Option<f64>,
    pub n: usize,
    pub exec: Exec,
}

impl Default for GridOptions {
    fn default() -> Self {
        GridOptions {
            half_width: None,
            n: 256,
            exec: Exec::default(),
        }
    }
}

/// Cavity state, incoming field and the three absorption channels.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformInputs {
    pub cavity: PhaseSpaceState,
    pub input: PhaseSpaceState,
    pub cav: PhaseSpaceState,
    pub plus: PhaseSpaceState,
    pub minus: PhaseSpaceState,
}

impl TransformInputs {
    /// Given cavity state, incoming field and thermal absorption channels.
    pub fn thermal(cavity: PhaseSpaceState, input: PhaseSpaceState, n_bar: [f64; 3]) -> Self {
        let [cav, plus, minus] = n_bar.map(|n| PhaseSpaceState::Gaussian(Gaussian::thermal(n)));
        TransformInputs {
            cavity,
            input,
            cav,
            plus,
            minus,
        }
    }

    fn with_weights<'a>(&'a self, w: &ModeWeights) -> [(&'a PhaseSpaceState, f64); 5] {
        [
            (&self.cavity, w.eta),
            (&self.input, w.zeta_in),
            (&self.cav, w.zeta_cav),
            (&self.plus, w.zeta_plus),
            (&self.minus, w.zeta_minus),
        ]
    }

    fn channel_orders(&self) -> [f64; 4] {
        [
            self.input.order(),
            self.cav.order(),
            self.plus.order(),
            self.minus.order(),
        ]
    }
}

/// Default half-width `5(1 + max amplitude + √max n̄)` over the given states.
pub fn default_half_width<'a, I: IntoIterator<Item = &'a PhaseSpaceState>>(states: I) -> f64 {
    let (mut amp, mut occ) = (0.0f64, 0.0f64);
    for s in states {
        let (a, n) = s.extent();
        amp = amp.max(a);
        occ = occ.max(n);
    }
    5.0 * (1.0 + amp + occ.sqrt())
}

/// `C(β) = h² Σ P(α) e^{βα* − β*α}` over the grid.
pub fn grid_characteristic(g: &Grid, beta: Complex64) -> Complex64 {
    let n = g.n;
    let (u, v) = (beta.re, beta.im);
    let row_phase: Vec<Complex64> = (0..n)
        .map(|r| Complex64::from_polar(1.0, -2.0 * u * g.coordinate(r)))
        .collect();
    let col_phase: Vec<Complex64> = (0..n)
        .map(|c| Complex64::from_polar(1.0, 2.0 * v * g.coordinate(c)))
        .collect();
    let mut acc = Complex64::new(0.0, 0.0);
    for r in 0..n {
        let mut line = Complex64::new(0.0, 0.0);
        for c in 0..n {
            line += col_phase[c] * g.values[r * n + c];
        }
        acc += row_phase[r] * line;
    }
    acc * g.cell_area()
}

pub fn characteristic(state: &PhaseSpaceState, beta: Complex64) -> Complex64 {
    match state {
        PhaseSpaceState::Grid(g) => grid_characteristic(g, beta),
        other => other.analytic_characteristic(beta).expect("analytic state"),
    }
}

/// `C_out(β; s)`: product form with the smoothing factor `e^{−ξ|β|²/2}`.
pub fn characteristic_out(
    beta: Complex64,
    inputs: &TransformInputs,
    weights: &ModeWeights,
    s: f64,
) -> Result<Complex64> {
    let xi = xi_s(weights, s, inputs.cavity.order(), inputs.channel_orders())?;
    let mut c = Complex64::new((-0.5 * xi.value * beta.norm_sqr()).exp(), 0.0);
    for (state, w) in inputs.with_weights(weights) {
        if w > 0.0 {
            c *= characteristic(state, beta * w.sqrt());
        }
    }
    Ok(c)
}

/// `β` lattice conjugate to the output grid: `(m − n/2)·π/(2A)`.
pub fn beta_axis(half_width: f64, n: usize) -> Vec<f64> {
    let step = PI / (2.0 * half_width);
    (0..n).map(|m| (m as f64 - (n / 2) as f64) * step).collect()
}

fn check_input_grid(g: &Grid) -> Result<()> {
    let mass = g.mass();
    let leak = (1.0 - mass).abs();
    if leak > LEAKAGE_LIMIT {
        return Err(CavityError::WindowLeakage {
            leak,
            suggested: 1.5 * g.half_width,
        });
    }
    Ok(())
}

/// `C(√w β)` on the `β` lattice, row index over `Im β`, column over `Re β`.
fn lattice_characteristic(
    state: &PhaseSpaceState,
    scale: f64,
    axis: &[f64],
    exec: Exec,
) -> Result<Vec<Complex64>> {
    let n = axis.len();
    let mut out = vec![Complex64::new(0.0, 0.0); n * n];
    match state {
        PhaseSpaceState::Grid(g) => {
            check_input_grid(g)?;
            let ng = g.n;
            let coords: Vec<f64> = (0..ng).map(|i| g.coordinate(i)).collect();
            // Separable DFT: first over x for every Im β, then over p for every Re β.
            let col_phase: Vec<Vec<Complex64>> = axis
                .iter()
                .map(|v| {
                    coords
                        .iter()
                        .map(|x| Complex64::from_polar(1.0, 2.0 * scale * v * x))
                        .collect()
                })
                .collect();
            let row_phase: Vec<Vec<Complex64>> = axis
                .iter()
                .map(|u| {
                    coords
                        .iter()
                        .map(|p| Complex64::from_polar(1.0, -2.0 * scale * u * p))
                        .collect()
                })
                .collect();
            let area = g.cell_area();
            exec.for_each_chunk(&mut out, n, |mv, row| {
                let cp = &col_phase[mv];
                let partial: Vec<Complex64> = (0..ng)
                    .map(|r| {
                        let vals = &g.values[r * ng..(r + 1) * ng];
                        vals.iter().zip(cp).map(|(p, e)| e * *p).sum::<Complex64>()
                    })
                    .collect();
                for (mu, slot) in row.iter_mut().enumerate() {
                    let rp = &row_phase[mu];
                    *slot = partial
                        .iter()
                        .zip(rp)
                        .map(|(a, b)| a * b)
                        .sum::<Complex64>()
                        * area;
                }
            });
        }
        other => {
            exec.for_each_chunk(&mut out, n, |mv, row| {
                for (mu, slot) in row.iter_mut().enumerate() {
                    let beta = Complex64::new(axis[mu], axis[mv]) * scale;
                    *slot = other.analytic_characteristic(beta).expect("analytic state");
                }
            });
        }
    }
    Ok(out)
}

fn transpose(buf: &[Complex64], n: usize) -> Vec<Complex64> {
    let mut t = vec![Complex64::new(0.0, 0.0); n * n];
    for r in 0..n {
        for c in 0..n {
            t[c * n + r] = buf[r * n + c];
        }
    }
    t
}

/// `P(α) = π^{−2} ∫ C(β) e^{−(βα* − β*α)} d²β` from lattice values.
pub fn inverse_characteristic(
    c: &[Complex64],
    half_width: f64,
    n: usize,
    s: f64,
    exec: Exec,
) -> Result<Grid> {
    assert_eq!(c.len(), n * n);
    let half = (n / 2) as i64;
    let sign = |k: usize| {
        if (k as i64 - half) % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    };
    // Rows over Im β (m), columns over Re β (k).
    let mut buf: Vec<Complex64> = c
        .iter()
        .enumerate()
        .map(|(i, z)| z * sign(i / n) * sign(i % n))
        .collect();
    let mut planner = FftPlanner::new();
    let forward = planner.plan_fft_forward(n);
    let inverse = planner.plan_fft_inverse(n);
    // Transform over m (gives the x index) with e^{−2πi mj/n}.
    buf = transpose(&buf, n);
    exec.for_each_chunk(&mut buf, n, |_, row| forward.process(row));
    // buf[k][j]; transform over k (gives the p index) with e^{+2πi ki/n}.
    buf = transpose(&buf, n);
    exec.for_each_chunk(&mut buf, n, |_, row| inverse.process(row));
    // buf[j][i] → values[i][j].
    let step = PI / (2.0 * half_width);
    let norm = step * step / (PI * PI);
    let mut values = vec![0.0; n * n];
    for j in 0..n {
        for i in 0..n {
            let parity = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
            values[i * n + j] = buf[j * n + i].re * parity * norm;
        }
    }
    Grid::new(half_width, n, s, values)
}

fn finish(c: Vec<Complex64>, half_width: f64, n: usize, s: f64, exec: Exec) -> Result<Grid> {
    let g = inverse_characteristic(&c, half_width, n, s, exec)?;
    let frame = (n / 16).max(1);
    let leak = g.border_fraction(frame);
    if leak > LEAKAGE_LIMIT {
        return Err(CavityError::WindowLeakage {
            leak,
            suggested: 1.5 * half_width,
        });
    }
    Ok(g)
}

fn smoothed_product(
    factors: &[(&PhaseSpaceState, f64)],
    xi: f64,
    half_width: f64,
    n: usize,
    exec: Exec,
) -> Result<Vec<Complex64>> {
    let axis = beta_axis(half_width, n);
    let mut c: Vec<Complex64> = (0..n * n)
        .map(|i| {
            let b2 = axis[i % n].powi(2) + axis[i / n].powi(2);
            Complex64::new((-0.5 * xi * b2).exp(), 0.0)
        })
        .collect();
    for (state, w) in factors {
        if *w <= 0.0 {
            continue;
        }
        let f = lattice_characteristic(state, w.sqrt(), &axis, exec)?;
        for (a, b) in c.iter_mut().zip(f) {
            *a *= b;
        }
    }
    Ok(c)
}

fn output_geometry(states: &[&PhaseSpaceState], opts: &GridOptions) -> Result<(f64, usize)> {
    if opts.n < 4 || !opts.n.is_multiple_of(2) {
        return Err(CavityError::InvalidArgument(format!(
            "output resolution must be even and >= 4, got {}",
            opts.n
        )));
    }
    let a = opts
        .half_width
        .unwrap_or_else(|| default_half_width(states.iter().copied()));
    Ok((a, opts.n))
}

/// `P_out(α; s)` on a grid from the nested convolution of all inputs.
pub fn p_out_transform(
    inputs: &TransformInputs,
    weights: &ModeWeights,
    s: f64,
    opts: &GridOptions,
) -> Result<Grid> {
    weights.validate()?;
    let xi: Xi = xi_s(weights, s, inputs.cavity.order(), inputs.channel_orders())?;
    let factors = inputs.with_weights(weights);
    let states: Vec<&PhaseSpaceState> = factors.iter().map(|(s, _)| *s).collect();
    let (a, n) = output_geometry(&states, opts)?;
    let c = smoothed_product(&factors, xi.value, a, n, opts.exec)?;
    finish(c, a, n, s, opts.exec)
}

/// Output Wigner function with thermal absorption channels: cavity and
/// incoming field convolved with a Gaussian of width `ξ^W`.
pub fn wigner_out_thermal(
    cavity: &PhaseSpaceState,
    input: &PhaseSpaceState,
    n_bar: [f64; 3],
    weights: &ModeWeights,
    opts: &GridOptions,
) -> Result<Grid> {
    weights.validate()?;
    if cavity.order() != 0.0 || input.order() != 0.0 {
        return Err(CavityError::InvalidArgument(
            "thermal Wigner output needs Wigner-order (s = 0) inputs".into(),
        ));
    }
    let xi = xi_wigner(weights, n_bar)?;
    let factors = [(cavity, weights.eta), (input, weights.zeta_in)];
    let occ = n_bar.iter().fold(0.0f64, |m, v| m.max(*v));
    let thermal = PhaseSpaceState::Gaussian(Gaussian::thermal(occ));
    let (a, n) = output_geometry(&[cavity, input, &thermal], opts)?;
    let c = smoothed_product(&factors, xi, a, n, opts.exec)?;
    finish(c, a, n, 0.0, opts.exec)
}

/// Closed-form output for Gaussian cavity and input states and thermal
/// channels, as a Wigner-order Gaussian.
pub fn gaussian_propagate(
    cavity: &Gaussian,
    input: &Gaussian,
    n_bar: [f64; 3],
    weights: &ModeWeights,
) -> Gaussian {
    let (cc, ci) = (cavity.wigner_cov(), input.wigner_cov());
    let noise = weights.zeta_cav * (2.0 * n_bar[0] + 1.0)
        + weights.zeta_plus * (2.0 * n_bar[1] + 1.0)
        + weights.zeta_minus * (2.0 * n_bar[2] + 1.0);
    let mut cov = [[0.0; 2]; 2];
    for r in 0..2 {
        for c in 0..2 {
            cov[r][c] = weights.eta * cc[r][c] + weights.zeta_in * ci[r][c];
        }
        cov[r][r] += 0.25 * noise;
    }
    Gaussian {
        mean: cavity.mean * weights.eta.sqrt() + input.mean * weights.zeta_in.sqrt(),
        cov,
        s: 0.0,
    }
}

/// Samples an analytic Wigner-order state onto a grid; Gaussians are
/// evaluated directly, other states through their characteristic function.
pub fn to_grid(state: &PhaseSpaceState, half_width: f64, n: usize, exec: Exec) -> Result<Grid> {
    match state {
        PhaseSpaceState::Gaussian(g) => Grid::sample(half_width, n, g.s, |a| g.density(a)),
        PhaseSpaceState::Grid(g) => {
            let axis = beta_axis(half_width, n);
            let c = lattice_characteristic(state, 1.0, &axis, exec)?;
            inverse_characteristic(&c, half_width, n, g.s, exec)
        }
        PhaseSpaceState::Fock { s, .. } => {
            let axis = beta_axis(half_width, n);
            let c = lattice_characteristic(state, 1.0, &axis, exec)?;
            inverse_characteristic(&c, half_width, n, *s, exec)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase_space::states::fock_wigner;

    #[test]
    fn lattice_round_trip_of_a_gaussian() {
        let g = Gaussian::coherent(Complex64::new(0.8, -0.3));
        let st = PhaseSpaceState::Gaussian(g);
        let grid = to_grid(&st, 5.0, 64, Exec::Sequential).unwrap();
        let axis = beta_axis(5.0, 64);
        let c = lattice_characteristic(
            &PhaseSpaceState::Grid(grid.clone()),
            1.0,
            &axis,
            Exec::Sequential,
        )
        .unwrap();
        let back = inverse_characteristic(&c, 5.0, 64, 0.0, Exec::Sequential).unwrap();
        assert!(back.sup_distance(&grid).unwrap() < 1e-12);
        let exact = lattice_characteristic(&st, 1.0, &axis, Exec::Sequential).unwrap();
        let err = c
            .iter()
            .zip(&exact)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-10);
    }

    #[test]
    fn fock_grid_matches_laguerre_form() {
        let g = to_grid(
            &PhaseSpaceState::fock(2).unwrap(),
            5.0,
            128,
            Exec::Sequential,
        )
        .unwrap();
        let mut worst = 0.0f64;
        for r in 0..128 {
            for c in 0..128 {
                worst = worst.max((g.value(r, c) - fock_wigner(2, g.point(r, c))).abs());
            }
        }
        assert!(worst < 1e-10, "{worst}");
    }

    #[test]
    fn identity_channel() {
        let cav = PhaseSpaceState::Gaussian(Gaussian::squeezed(0.4, 0.3));
        let inputs = TransformInputs::thermal(cav.clone(), PhaseSpaceState::vacuum(), [0.0; 3]);
        let opts = GridOptions {
            half_width: Some(5.0),
            n: 64,
            exec: Exec::Sequential,
        };
        let out = p_out_transform(&inputs, &ModeWeights::identity(), 0.0, &opts).unwrap();
        let direct = to_grid(&cav, 5.0, 64, Exec::Sequential).unwrap();
        assert!(out.sup_distance(&direct).unwrap() < 1e-10);
    }

    #[test]
    fn small_window_is_reported() {
        let cav = PhaseSpaceState::Gaussian(Gaussian::coherent(Complex64::new(3.0, 0.0)));
        let inputs = TransformInputs::thermal(cav, PhaseSpaceState::vacuum(), [0.0; 3]);
        let opts = GridOptions {
            half_width: Some(3.0),
            n: 64,
            exec: Exec::Sequential,
        };
        let r = p_out_transform(&inputs, &ModeWeights::identity(), 0.0, &opts);
        assert!(matches!(r, Err(CavityError::WindowLeakage { .. })));
    }
}
