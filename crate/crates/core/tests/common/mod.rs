#![allow(clippy::needless_range_loop)]

//! Independent oracles shared by the integration tests: fields are built
//! from transfer matrices and direct linear solves, never from the Fresnel
//! recursion.
#![allow(dead_code)]

use lossy_cavity::optical_stack::LayerStack;
use lossy_cavity::Complex64;

pub const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Gaussian elimination with partial pivoting.
pub fn solve<const N: usize>(mut a: [[Complex64; N]; N], mut b: [Complex64; N]) -> [Complex64; N] {
    for col in 0..N {
        let piv = (col..N)
            .max_by(|&i, &j| a[i][col].norm().total_cmp(&a[j][col].norm()))
            .unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..N {
            let f = a[row][col] / a[col][col];
            for k in col..N {
                let v = a[col][k];
                a[row][k] -= f * v;
            }
            let v = b[col];
            b[row] -= f * v;
        }
    }
    let mut x = [Complex64::new(0.0, 0.0); N];
    for row in (0..N).rev() {
        let mut s = b[row];
        for k in row + 1..N {
            s -= a[row][k] * x[k];
        }
        x[row] = s / a[row][row];
    }
    x
}

/// Slab of wavenumber `b2` and thickness `d` between half-spaces `b1` (left)
/// and `b3` (right), wave incident from the left. Returns `(r, t)` with `r`
/// referred to the left face and `t` to the right face.
pub fn slab(b1: Complex64, b2: Complex64, b3: Complex64, d: f64) -> (Complex64, Complex64) {
    let e = (I * b2 * d).exp();
    let z = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    // Unknowns: r, a, b, t with u = e^{ib1 z} + r e^{-ib1 z}, a e^{ib2 z} + b e^{-ib2 z}, t e^{ib3(z-d)}.
    let m = [
        [one, -one, -one, z],
        [-b1, -b2, b2, z],
        [z, e, 1.0 / e, -one],
        [z, b2 * e, -b2 / e, -b3],
    ];
    let x = solve(m, [-one, -b1, z, z]);
    (x[0], x[3])
}

/// Wavenumbers `β_j = n_j ω` from the stack, with `n` taken as the root of
/// `ε` that has non-negative imaginary part.
pub fn wavenumbers(stack: &LayerStack, omega: Complex64) -> [Complex64; 4] {
    let idx = |e: Complex64| {
        let n = e.sqrt();
        if n.im < 0.0 || (n.im == 0.0 && n.re < 0.0) {
            -n
        } else {
            n
        }
    };
    let mut b = [Complex64::new(0.0, 0.0); 4];
    for (j, eps) in [(1, &stack.eps1), (2, &stack.eps2), (3, &stack.eps3)] {
        let n = if omega.im == 0.0 {
            idx(eps.eval(omega))
        } else {
            eps.eval(omega).sqrt()
        };
        b[j] = n * omega;
    }
    b
}

/// `D_1(Ω)` through the slab oracle.
pub fn cavity_denominator(stack: &LayerStack, omega: Complex64) -> Complex64 {
    let b = wavenumbers(stack, omega);
    let (r13, _) = slab(b[1], b[2], b[3], stack.d);
    1.0 + r13 * (2.0 * I * b[1] * stack.l).exp()
}

/// Exact solutions of `u'' + β(x)² u = 0` along the global coordinate
/// `x ∈ [0, ∞)`: perfect mirror at 0, interfaces at `l` and `l + d`.
pub struct Profile {
    pub beta: [Complex64; 4],
    pub l: f64,
    pub d: f64,
}

fn propagate(beta: Complex64, len: f64, u: Complex64, du: Complex64) -> (Complex64, Complex64) {
    if len == 0.0 {
        return (u, du);
    }
    let (s, co) = ((beta * len).sin(), (beta * len).cos());
    (u * co + du * s / beta, -u * beta * s + du * co)
}

impl Profile {
    pub fn new(stack: &LayerStack, omega: f64) -> Self {
        Profile {
            beta: wavenumbers(stack, c(omega, 0.0)),
            l: stack.l,
            d: stack.d,
        }
    }

    fn layer_of(&self, x: f64) -> (usize, f64) {
        if x <= self.l {
            (1, 0.0)
        } else if x <= self.l + self.d {
            (2, self.l)
        } else {
            (3, self.l + self.d)
        }
    }

    /// Solution vanishing at the mirror, `u(0) = 0, u'(0) = 1`.
    pub fn left(&self, x: f64) -> (Complex64, Complex64) {
        let one = c(1.0, 0.0);
        let mut st = (c(0.0, 0.0), one);
        let bounds = [0.0, self.l, self.l + self.d];
        let (j, start) = self.layer_of(x);
        for k in 1..j {
            st = propagate(self.beta[k], bounds[k] - bounds[k - 1], st.0, st.1);
        }
        propagate(self.beta[j], x - start, st.0, st.1)
    }

    /// Purely outgoing solution, `e^{iβ_3(x − l − d)}` outside.
    pub fn right(&self, x: f64) -> (Complex64, Complex64) {
        let b3 = self.beta[3];
        let edge = self.l + self.d;
        if x >= edge {
            let e = (I * b3 * (x - edge)).exp();
            return (e, I * b3 * e);
        }
        let mut st = (c(1.0, 0.0), I * b3);
        if x >= self.l {
            return propagate(self.beta[2], x - edge, st.0, st.1);
        }
        st = propagate(self.beta[2], -self.d, st.0, st.1);
        propagate(self.beta[1], x - self.l, st.0, st.1)
    }

    /// `G(x, x') = −u_L(x_<) u_R(x_>)/W`, `W = u_L u_R' − u_L' u_R`.
    pub fn green(&self, x: f64, xp: f64) -> Complex64 {
        let (lo, hi) = if x <= xp { (x, xp) } else { (xp, x) };
        let (ul, dul) = self.left(lo);
        let (ur, dur) = self.right(lo);
        let w = ul * dur - dul * ur;
        -ul * self.right(hi).0 / w
    }

    pub fn global(&self, layer: usize, z: f64) -> f64 {
        match layer {
            1 => z,
            2 => self.l + z,
            _ => self.l + self.d + z,
        }
    }
}

/// Single-mode model weights from the time-domain solution of the
/// isolated-mode Langevin equation, in closed form.
pub struct TimeDomain {
    pub eta: f64,
    pub zeta: [f64; 4],
}

pub fn time_domain_weights(
    kappa: Complex64,
    t_out: Complex64,
    coupling: [Complex64; 4],
    direct: [Complex64; 4],
    rates: [f64; 4],
    gamma_out: f64,
    tau: f64,
) -> TimeDomain {
    let g: f64 = rates.iter().sum();
    let e = (-g * tau).exp();
    let eta = gamma_out / g * (1.0 - e);
    let sk = kappa.sqrt();
    let mut zeta = [0.0; 4];
    for q in 0..4 {
        let a = sk.conj() * t_out.conj() * direct[q] + sk * coupling[q] * gamma_out / g;
        let b = sk * coupling[q] * gamma_out * e / g;
        zeta[q] = (a.norm_sqr() * (1.0 - e) / g + b.norm_sqr() * (1.0 / e - 1.0) / g
            - 2.0 * tau * (a * b.conj()).re)
            / eta;
    }
    TimeDomain { eta, zeta }
}

/// Gaussian Wigner density with mean `m` and covariance `cov` of `(x, p)`.
pub fn gaussian_density(m: Complex64, cov: [[f64; 2]; 2], a: Complex64) -> f64 {
    let det = cov[0][0] * cov[1][1] - cov[0][1] * cov[1][0];
    let (dx, dp) = (a.re - m.re, a.im - m.im);
    let q = (cov[1][1] * dx * dx - 2.0 * cov[0][1] * dx * dp + cov[0][0] * dp * dp) / det;
    (-0.5 * q).exp() / (2.0 * std::f64::consts::PI * det.sqrt())
}

/// Output of a beam-splitter network on Gaussian inputs: means add with
/// amplitude weights, covariances with intensity weights, and each thermal
/// channel adds `ζ(2n̄ + 1)/4` to both quadratures.
pub fn gaussian_network(
    parts: &[(Complex64, [[f64; 2]; 2], f64)],
    thermal: &[(f64, f64)],
) -> (Complex64, [[f64; 2]; 2]) {
    let mut mean = c(0.0, 0.0);
    let mut cov = [[0.0; 2]; 2];
    for (m, s, w) in parts {
        mean += m * w.sqrt();
        for r in 0..2 {
            for k in 0..2 {
                cov[r][k] += w * s[r][k];
            }
        }
    }
    for (w, n) in thermal {
        cov[0][0] += w * (2.0 * n + 1.0) / 4.0;
        cov[1][1] += w * (2.0 * n + 1.0) / 4.0;
    }
    (mean, cov)
}

/// Wigner functions of `|0⟩` and `|1⟩`, and the amplitude-damped photon
/// `η|1⟩⟨1| + (1 − η)|0⟩⟨0|`.
pub fn damped_photon_wigner(eta: f64, a: Complex64) -> f64 {
    let r2 = a.norm_sqr();
    let g = 2.0 / std::f64::consts::PI * (-2.0 * r2).exp();
    eta * g * (4.0 * r2 - 1.0) + (1.0 - eta) * g
}

pub struct GaussianScenario {
    pub cavity: lossy_cavity::phase_space::Gaussian,
    pub input: lossy_cavity::phase_space::Gaussian,
    pub n_bar: [f64; 3],
    pub weights: lossy_cavity::io_weights::ModeWeights,
}

/// Displaced squeezed thermal cavity state, coherent input, random weights
/// summing to one and thermal channels.
pub fn gaussian_scenario<R: rand::Rng>(rng: &mut R) -> GaussianScenario {
    use lossy_cavity::io_weights::ModeWeights;
    use lossy_cavity::phase_space::Gaussian;
    let sq = Gaussian::squeezed(
        rng.random_range(0.0..0.8),
        rng.random_range(0.0..std::f64::consts::TAU),
    );
    let heat = rng.random_range(0.0..0.5);
    let mut cov = sq.cov;
    cov[0][0] += 0.5 * heat;
    cov[1][1] += 0.5 * heat;
    let cavity = Gaussian::new(
        c(rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5)),
        cov,
        0.0,
    )
    .unwrap();
    let input = Gaussian::coherent(c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    let eta = rng.random_range(0.3..0.99);
    let cuts: [f64; 4] = std::array::from_fn(|_| rng.random_range(0.05..1.0));
    let total: f64 = cuts.iter().sum();
    let [zi, zc, zp, zm] = cuts.map(|v| (1.0 - eta) * v / total);
    GaussianScenario {
        cavity,
        input,
        n_bar: std::array::from_fn(|_| rng.random_range(0.0..2.0)),
        weights: ModeWeights {
            eta,
            zeta_in: zi,
            zeta_cav: zc,
            zeta_plus: zp,
            zeta_minus: zm,
            at: None,
        },
    }
}

impl GaussianScenario {
    /// Independent closed-form output `(mean, Wigner covariance)`.
    pub fn expected(&self) -> (Complex64, [[f64; 2]; 2]) {
        let w = &self.weights;
        gaussian_network(
            &[
                (self.cavity.mean, self.cavity.cov, w.eta),
                (self.input.mean, self.input.cov, w.zeta_in),
            ],
            &[
                (w.zeta_cav, self.n_bar[0]),
                (w.zeta_plus, self.n_bar[1]),
                (w.zeta_minus, self.n_bar[2]),
            ],
        )
    }
}
