//! Run configuration: JSON with explicit unit tags, normalized to `c = l = 1`
//! when resolved.

use crate::error::CliError;
use lossy_cavity::optical_stack::{LayerStack, Permittivity};
use lossy_cavity::phase_space::{
    read_grid_binary, read_grid_csv, Gaussian, PhaseSpaceState, MAX_FOCK,
};
use lossy_cavity::Complex64;
use schemars::JsonSchema;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// Speed of light in m/s, used only to convert physical units.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub stack: StackSpec,
    #[serde(default)]
    pub modes: ModeRange,
    #[serde(default)]
    pub time: TimeSpec,
    #[serde(default)]
    pub channels: Channels,
    #[serde(default)]
    pub states: States,
    #[serde(default)]
    pub orders: Orders,
    #[serde(default)]
    pub grid: GridSpec,
    /// Output directory; `--out` takes precedence.
    #[serde(default)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub enum LengthUnit {
    /// Multiples of the cavity length.
    #[serde(rename = "l")]
    CavityLength,
    #[serde(rename = "m")]
    Meter,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct Length {
    pub value: f64,
    pub unit: LengthUnit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub enum FrequencyUnit {
    /// Multiples of `c/l`.
    #[serde(rename = "c/l")]
    Normalized,
    #[serde(rename = "rad/s")]
    RadPerSecond,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct Frequency {
    pub value: f64,
    pub unit: FrequencyUnit,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "model", rename_all = "snake_case", deny_unknown_fields)]
pub enum PermittivitySpec {
    Constant {
        re: f64,
        im: f64,
    },
    Lorentz {
        strength: f64,
        resonance: Frequency,
        damping: Frequency,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct StackSpec {
    /// Cavity length: `{"value": 1, "unit": "l"}` or a length in meters.
    pub l: Length,
    /// Mirror thickness.
    pub d: Length,
    pub eps1: PermittivitySpec,
    pub eps2: PermittivitySpec,
    pub eps3: PermittivitySpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct ModeRange {
    pub first: u32,
    pub last: u32,
}

impl Default for ModeRange {
    fn default() -> Self {
        ModeRange { first: 1, last: 1 }
    }
}

impl ModeRange {
    /// `"3"` or `"1..5"` (inclusive).
    pub fn parse(s: &str) -> Result<Self, CliError> {
        let bad = || CliError::Config(format!("mode range must look like 3 or 1..5, got {s:?}"));
        let (a, b) = match s.split_once("..") {
            Some((a, b)) => (a, b.trim_start_matches('=')),
            None => (s, s),
        };
        let first = a.trim().parse().map_err(|_| bad())?;
        let last = b.trim().parse().map_err(|_| bad())?;
        let r = ModeRange { first, last };
        r.check()?;
        Ok(r)
    }

    fn check(&self) -> Result<(), CliError> {
        if self.first == 0 || self.first > self.last {
            return Err(CliError::Config(format!(
                "mode indices must satisfy 1 <= first <= last, got {}..{}",
                self.first, self.last
            )));
        }
        Ok(())
    }

    pub fn indices(&self) -> Vec<u32> {
        (self.first..=self.last).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub enum TimeUnit {
    /// Multiples of the mode lifetime `1/Γ`.
    #[serde(rename = "1/gamma")]
    Lifetime,
    /// Multiples of `l/c`.
    #[serde(rename = "l/c")]
    Normalized,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct TimeSpec {
    /// Elapsed times after preparation.
    pub points: Vec<f64>,
    pub unit: TimeUnit,
    /// Coarse-graining interval `Δt` in units of the inverse mode spacing.
    #[serde(default = "default_dt_factor")]
    pub dt_factor: f64,
}

fn default_dt_factor() -> f64 {
    50.0
}

impl Default for TimeSpec {
    fn default() -> Self {
        TimeSpec {
            points: vec![1.0, 5.0, 20.0],
            unit: TimeUnit::Lifetime,
            dt_factor: default_dt_factor(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct Channels {
    pub n_bar_cav: f64,
    pub n_bar_plus: f64,
    pub n_bar_minus: f64,
}

impl Channels {
    pub fn n_bars(&self) -> [f64; 3] {
        [self.n_bar_cav, self.n_bar_plus, self.n_bar_minus]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StateSpec {
    Vacuum,
    Coherent {
        re: f64,
        im: f64,
    },
    Thermal {
        n_bar: f64,
    },
    Squeezed {
        r: f64,
        phi: f64,
    },
    Fock {
        n: u32,
    },
    /// Grid file; `.bin` is read as the binary layout, anything else as CSV.
    /// Relative paths are taken from the config file's directory.
    Grid {
        path: PathBuf,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct States {
    pub cavity: StateSpec,
    pub input: StateSpec,
}

impl Default for States {
    fn default() -> Self {
        States {
            cavity: StateSpec::Vacuum,
            input: StateSpec::Vacuum,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct Orders {
    /// Order `s` of the output phase-space function (0 Wigner, −1 Q).
    pub output: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(default)]
    pub half_width: Option<f64>,
    #[serde(default = "default_grid_n")]
    pub n: usize,
}

fn default_grid_n() -> usize {
    256
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            half_width: None,
            n: default_grid_n(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<(Self, PathBuf), CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let cfg: RunConfig = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok((cfg, base))
    }

    /// Physical bounds that the schema alone cannot express.
    pub fn validate(&self) -> Result<(), CliError> {
        self.stack.resolve()?;
        self.modes.check()?;
        let t = &self.time;
        if t.points.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(CliError::Config(
                "time points must be finite and >= 0".into(),
            ));
        }
        if !(t.dt_factor > 0.0 && t.dt_factor.is_finite()) {
            return Err(CliError::Config(format!(
                "dt_factor must be > 0, got {}",
                t.dt_factor
            )));
        }
        if self
            .channels
            .n_bars()
            .iter()
            .any(|n| !(n.is_finite() && *n >= 0.0))
        {
            return Err(CliError::Config(format!(
                "thermal occupations must be >= 0, got {:?}",
                self.channels.n_bars()
            )));
        }
        for s in [&self.states.cavity, &self.states.input] {
            check_state(s)?;
        }
        if self.orders.output.is_nan() || self.orders.output > 1.0 {
            return Err(CliError::Config(format!(
                "output order s = {} exceeds 1",
                self.orders.output
            )));
        }
        let g = &self.grid;
        if g.n < 8 || !g.n.is_multiple_of(2) {
            return Err(CliError::Config(format!(
                "grid resolution must be even and >= 8, got {}",
                g.n
            )));
        }
        if let Some(a) = g.half_width {
            if !(a > 0.0 && a.is_finite()) {
                return Err(CliError::Config(format!(
                    "grid half_width must be > 0, got {a}"
                )));
            }
        }
        Ok(())
    }

    pub fn time_points(&self, gamma: f64) -> Vec<f64> {
        let scale = match self.time.unit {
            TimeUnit::Lifetime => 1.0 / gamma,
            TimeUnit::Normalized => 1.0,
        };
        self.time.points.iter().map(|p| p * scale).collect()
    }
}

fn check_state(s: &StateSpec) -> Result<(), CliError> {
    let bad = |m: String| Err(CliError::Config(m));
    match *s {
        StateSpec::Thermal { n_bar } if !(n_bar.is_finite() && n_bar >= 0.0) => {
            bad(format!("thermal state needs n_bar >= 0, got {n_bar}"))
        }
        StateSpec::Fock { n } if n > MAX_FOCK => bad(format!(
            "Fock states are supported up to n = {MAX_FOCK}, got {n}"
        )),
        StateSpec::Squeezed { r, phi } if !(r.is_finite() && phi.is_finite()) => {
            bad("squeezing parameters must be finite".into())
        }
        StateSpec::Coherent { re, im } if !(re.is_finite() && im.is_finite()) => {
            bad("coherent amplitude must be finite".into())
        }
        _ => Ok(()),
    }
}

impl StackSpec {
    fn length_scale(&self) -> Result<Option<f64>, CliError> {
        let l = self.l;
        if !(l.value > 0.0 && l.value.is_finite()) {
            return Err(CliError::Config(format!(
                "cavity length must be > 0, got {}",
                l.value
            )));
        }
        match l.unit {
            LengthUnit::Meter => Ok(Some(l.value)),
            LengthUnit::CavityLength if l.value == 1.0 => Ok(None),
            LengthUnit::CavityLength => Err(CliError::Config(format!(
                "the cavity length is the length unit; give it as 1 l or in meters, got {} l",
                l.value
            ))),
        }
    }

    fn frequency(&self, f: Frequency, meters: Option<f64>) -> Result<f64, CliError> {
        match (f.unit, meters) {
            (FrequencyUnit::Normalized, _) => Ok(f.value),
            (FrequencyUnit::RadPerSecond, Some(l)) => Ok(f.value * l / SPEED_OF_LIGHT),
            (FrequencyUnit::RadPerSecond, None) => Err(CliError::Config(
                "frequencies in rad/s need the cavity length in meters".into(),
            )),
        }
    }

    fn permittivity(
        &self,
        p: PermittivitySpec,
        meters: Option<f64>,
    ) -> Result<Permittivity, CliError> {
        Ok(match p {
            PermittivitySpec::Constant { re, im } => Permittivity::constant(re, im),
            PermittivitySpec::Lorentz {
                strength,
                resonance,
                damping,
            } => Permittivity::Lorentz {
                strength,
                resonance: self.frequency(resonance, meters)?,
                damping: self.frequency(damping, meters)?,
            },
        })
    }

    /// The stack in normalized units (`c = l = 1`).
    pub fn resolve(&self) -> Result<LayerStack, CliError> {
        let meters = self.length_scale()?;
        let d = match (self.d.unit, meters) {
            (LengthUnit::CavityLength, _) => self.d.value,
            (LengthUnit::Meter, Some(l)) => self.d.value / l,
            (LengthUnit::Meter, None) => {
                return Err(CliError::Config(
                    "mirror thickness in meters needs the cavity length in meters".into(),
                ))
            }
        };
        LayerStack::new(
            1.0,
            d,
            self.permittivity(self.eps1, meters)?,
            self.permittivity(self.eps2, meters)?,
            self.permittivity(self.eps3, meters)?,
        )
        .map_err(|e| CliError::Config(format!("stack: {e}")))
    }
}

impl StateSpec {
    pub fn resolve(&self, base: &Path) -> Result<PhaseSpaceState, CliError> {
        let st = match *self {
            StateSpec::Vacuum => PhaseSpaceState::vacuum(),
            StateSpec::Coherent { re, im } => {
                PhaseSpaceState::Gaussian(Gaussian::coherent(Complex64::new(re, im)))
            }
            StateSpec::Thermal { n_bar } => PhaseSpaceState::Gaussian(Gaussian::thermal(n_bar)),
            StateSpec::Squeezed { r, phi } => PhaseSpaceState::Gaussian(Gaussian::squeezed(r, phi)),
            StateSpec::Fock { n } => {
                PhaseSpaceState::fock(n).map_err(|e| CliError::Config(e.to_string()))?
            }
            StateSpec::Grid { ref path } => {
                let p = base.join(path);
                let f = std::fs::File::open(&p).map_err(|e| {
                    CliError::Config(format!("cannot open grid {}: {e}", p.display()))
                })?;
                let g = if p.extension().is_some_and(|e| e == "bin") {
                    read_grid_binary(std::io::BufReader::new(f))
                } else {
                    read_grid_csv(f)
                }
                .map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
                PhaseSpaceState::Grid(g)
            }
        };
        st.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(st)
    }
}
