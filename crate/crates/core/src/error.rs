use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CavityError {
    #[error("frequency must be positive, got {0}")]
    NonPositiveFrequency(f64),

    #[error("passivity violated: Im(eps) = {0:e} < 0")]
    Passivity(f64),

    #[error("invalid geometry: {0}")]
    Geometry(String),

    #[error("singular interface between layers {0} and {1} (beta_i + beta_j = 0)")]
    SingularInterface(usize, usize),

    #[error("pole proximity in recursion through layer {layer}: |denominator| = {denominator:e}")]
    PoleProximity { layer: usize, denominator: f64 },

    #[error("position z = {z} lies outside layer {layer}")]
    OutsideLayer { layer: usize, z: f64 },

    #[error(
        "finite-difference stencil at z = {z} (h = {h}) crosses a layer boundary or the source"
    )]
    Stencil { z: f64, h: f64 },

    #[error(
        "resonance k = {k} did not converge after {iterations} iterations (last iterate {last})"
    )]
    NoConvergence {
        k: u32,
        iterations: usize,
        last: Complex64,
    },

    #[error("resonance search for k = {k} landed on mode {found}")]
    BranchJump { k: u32, found: i64 },

    #[error("quadrature did not reach tolerance: estimate {value:e}, error {error:e}")]
    Quadrature { value: f64, error: f64 },

    #[error("transform undefined: xi = {xi} < 0 ({orders})")]
    NegativeXi { xi: f64, orders: String },

    #[error("grid window too small: {leak:.3e} of the mass leaks, use a half-width of at least {suggested:.3}")]
    WindowLeakage { leak: f64, suggested: f64 },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("malformed grid file: {0}")]
    Format(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for CavityError {
    fn from(e: std::io::Error) -> Self {
        CavityError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, CavityError>;
