//! Simulation parameters: turbine, platform, numerics and layout.
//!
//! Configuration files are flat TOML documents. Every key carries its unit
//! in the name (`rotor_diameter_m`, `pitch_stiffness_nm_per_rad`, ...) and
//! values are stored in that unit without conversion, with the single
//! exception of the output weights which are given per MW and kept per W
//! alongside.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::objective::ObjectiveWeights;
use crate::Vec2;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("failed to read config {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed config: {0}")]
    Parse(String),
    #[error("missing required config key `{0}`")]
    MissingKey(&'static str),
    #[error("invalid value for `{field}` = {value}: {reason}")]
    Invalid {
        field: &'static str,
        value: String,
        reason: &'static str,
    },
}

fn invalid(field: &'static str, value: impl ToString, reason: &'static str) -> ConfigError {
    ConfigError::Invalid {
        field,
        value: value.to_string(),
        reason,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TurbineParams {
    pub rotor_diameter: f64,
    pub hub_height: f64,
    /// Glauert-correction parameter of the high-induction thrust branch.
    pub ct1: f64,
    pub air_density: f64,
}

impl TurbineParams {
    /// Swept area of the physical disc, pi (D/2)^2.
    pub fn rotor_area(&self) -> f64 {
        let r = 0.5 * self.rotor_diameter;
        std::f64::consts::PI * r * r
    }

    pub fn rotor_radius(&self) -> f64 {
        0.5 * self.rotor_diameter
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlatformParams {
    pub mass: f64,
    pub added_mass: f64,
    pub inertia: f64,
    pub added_inertia: f64,
    pub pitch_stiffness: f64,
    pub pitch_damping: f64,
    pub surge_stiffness: f64,
    pub surge_damping: f64,
}

impl PlatformParams {
    /// Physical plus hydrodynamic added mass.
    pub fn total_mass(&self) -> f64 {
        self.mass + self.added_mass
    }

    /// Physical plus hydrodynamic added pitch inertia.
    pub fn total_inertia(&self) -> f64 {
        self.inertia + self.added_inertia
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NumericalParams {
    pub dt_wake: f64,
    pub dt_floater: f64,
    pub num_rings: usize,
    pub core_size: f64,
    pub inflow: Vec2,
    pub substeps_per_wake_step: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LayoutParams {
    /// x-position of the virtual downstream turbine.
    pub downstream_spacing: f64,
    /// Constant induction of the virtual downstream turbine.
    pub virtual_turbine_induction: f64,
    pub rotor_samples: usize,
}

/// Which platform degrees of freedom respond to thrust.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlatformMode {
    /// Pitch and surge.
    Floating,
    /// Bottom-fixed: the nacelle never moves.
    Fixed,
    /// Pitch only, surge pinned.
    Pitch,
    /// Surge only, pitch pinned.
    Surge,
}

impl PlatformMode {
    pub fn pitch_active(self) -> bool {
        matches!(self, PlatformMode::Floating | PlatformMode::Pitch)
    }

    pub fn surge_active(self) -> bool {
        matches!(self, PlatformMode::Floating | PlatformMode::Surge)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            PlatformMode::Floating => "floating",
            PlatformMode::Fixed => "fixed",
            PlatformMode::Pitch => "pitch",
            PlatformMode::Surge => "surge",
        }
    }
}

impl std::str::FromStr for PlatformMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "floating" => Ok(PlatformMode::Floating),
            "fixed" => Ok(PlatformMode::Fixed),
            "pitch" => Ok(PlatformMode::Pitch),
            "surge" => Ok(PlatformMode::Surge),
            other => Err(format!(
                "unknown platform mode `{other}` (expected floating, fixed, pitch or surge)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub turbine: TurbineParams,
    pub platform: PlatformParams,
    pub numerical: NumericalParams,
    pub layout: LayoutParams,
    pub mode: PlatformMode,
    /// Bounds applied to the controlled induction factor.
    pub induction_bounds: (f64, f64),
    pub weights: ObjectiveWeights,
}

/// On-disk layout. Every field is optional here so that a missing key can
/// be reported by name.
#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    rotor_diameter_m: Option<f64>,
    hub_height_m: Option<f64>,
    ct1: Option<f64>,
    air_density_kg_m3: Option<f64>,

    mass_kg: Option<f64>,
    added_mass_kg: Option<f64>,
    inertia_kg_m2: Option<f64>,
    added_inertia_kg_m2: Option<f64>,
    pitch_stiffness_nm_per_rad: Option<f64>,
    pitch_damping_nms_per_rad: Option<f64>,
    surge_stiffness_n_per_m: Option<f64>,
    surge_damping_ns_per_m: Option<f64>,

    dt_wake_s: Option<f64>,
    dt_floater_s: Option<f64>,
    num_rings: Option<i64>,
    core_size_m: Option<f64>,
    inflow_x_m_s: Option<f64>,
    inflow_y_m_s: Option<f64>,

    downstream_spacing_m: Option<f64>,
    virtual_turbine_induction: Option<f64>,
    rotor_samples: Option<i64>,

    platform_mode: Option<PlatformMode>,
    induction_min: Option<f64>,
    induction_max: Option<f64>,
    q_turbine0_per_mw: Option<f64>,
    q_turbine1_per_mw: Option<f64>,
    r_move: Option<f64>,
}

fn required<T>(value: Option<T>, key: &'static str) -> Result<T, ConfigError> {
    value.ok_or(ConfigError::MissingKey(key))
}

fn positive(value: f64, field: &'static str) -> Result<f64, ConfigError> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(invalid(field, value, "must be finite and strictly positive"))
    }
}

pub const DEFAULT_ROTOR_SAMPLES: usize = 9;
pub const DEFAULT_VIRTUAL_INDUCTION: f64 = 1.0 / 3.0;
pub const DEFAULT_SPACING_DIAMETERS: f64 = 5.0;
pub const DEFAULT_INDUCTION_BOUNDS: (f64, f64) = (0.0, 0.45);
pub const DEFAULT_Q_PER_MW: f64 = -1.0;
pub const DEFAULT_R_MOVE: f64 = 4.7e-2;

impl SimConfig {
    /// The turbine, platform and numerical setup of the reference 10 MW
    /// triple-spar case.
    pub fn reference() -> Self {
        Self::from_toml_str(REFERENCE_TEMPLATE).expect("reference template is valid")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let file: ConfigFile = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        Self::from_file(file)
    }

    fn from_file(f: ConfigFile) -> Result<Self, ConfigError> {
        let turbine = TurbineParams {
            rotor_diameter: positive(required(f.rotor_diameter_m, "rotor_diameter_m")?, "rotor_diameter_m")?,
            hub_height: positive(required(f.hub_height_m, "hub_height_m")?, "hub_height_m")?,
            ct1: required(f.ct1, "ct1")?,
            air_density: positive(required(f.air_density_kg_m3, "air_density_kg_m3")?, "air_density_kg_m3")?,
        };
        if !(turbine.ct1.is_finite() && turbine.ct1 > 1.0) {
            return Err(invalid("ct1", turbine.ct1, "must exceed 1"));
        }

        let platform = PlatformParams {
            mass: positive(required(f.mass_kg, "mass_kg")?, "mass_kg")?,
            added_mass: positive(required(f.added_mass_kg, "added_mass_kg")?, "added_mass_kg")?,
            inertia: positive(required(f.inertia_kg_m2, "inertia_kg_m2")?, "inertia_kg_m2")?,
            added_inertia: positive(
                required(f.added_inertia_kg_m2, "added_inertia_kg_m2")?,
                "added_inertia_kg_m2",
            )?,
            pitch_stiffness: positive(
                required(f.pitch_stiffness_nm_per_rad, "pitch_stiffness_nm_per_rad")?,
                "pitch_stiffness_nm_per_rad",
            )?,
            pitch_damping: positive(
                required(f.pitch_damping_nms_per_rad, "pitch_damping_nms_per_rad")?,
                "pitch_damping_nms_per_rad",
            )?,
            surge_stiffness: positive(
                required(f.surge_stiffness_n_per_m, "surge_stiffness_n_per_m")?,
                "surge_stiffness_n_per_m",
            )?,
            surge_damping: positive(
                required(f.surge_damping_ns_per_m, "surge_damping_ns_per_m")?,
                "surge_damping_ns_per_m",
            )?,
        };

        let dt_wake = positive(required(f.dt_wake_s, "dt_wake_s")?, "dt_wake_s")?;
        let dt_floater = positive(required(f.dt_floater_s, "dt_floater_s")?, "dt_floater_s")?;
        let ratio = (dt_wake / dt_floater).round();
        if ratio < 1.0 || ((ratio * dt_floater) - dt_wake).abs() > 1e-9 * dt_wake {
            return Err(invalid(
                "dt_floater_s",
                dt_floater,
                "dt_wake_s must be an integer multiple of dt_floater_s",
            ));
        }
        let num_rings = required(f.num_rings, "num_rings")?;
        if num_rings < 1 {
            return Err(invalid("num_rings", num_rings, "must be at least 1"));
        }
        let inflow = Vec2::new(
            required(f.inflow_x_m_s, "inflow_x_m_s")?,
            required(f.inflow_y_m_s, "inflow_y_m_s")?,
        );
        if !(inflow.x.is_finite() && inflow.y.is_finite()) || inflow.norm() == 0.0 {
            return Err(invalid("inflow_x_m_s", inflow.x, "inflow must be finite and non-zero"));
        }
        let numerical = NumericalParams {
            dt_wake,
            dt_floater,
            num_rings: num_rings as usize,
            core_size: positive(required(f.core_size_m, "core_size_m")?, "core_size_m")?,
            inflow,
            substeps_per_wake_step: ratio as usize,
        };

        let downstream_spacing = positive(
            f.downstream_spacing_m
                .unwrap_or(DEFAULT_SPACING_DIAMETERS * turbine.rotor_diameter),
            "downstream_spacing_m",
        )?;
        let a1 = f.virtual_turbine_induction.unwrap_or(DEFAULT_VIRTUAL_INDUCTION);
        if !(0.0..1.0).contains(&a1) {
            return Err(invalid("virtual_turbine_induction", a1, "must lie in [0, 1)"));
        }
        let rotor_samples = f.rotor_samples.unwrap_or(DEFAULT_ROTOR_SAMPLES as i64);
        if rotor_samples < 1 || rotor_samples % 2 == 0 {
            return Err(invalid("rotor_samples", rotor_samples, "must be a positive odd count"));
        }
        let layout = LayoutParams {
            downstream_spacing,
            virtual_turbine_induction: a1,
            rotor_samples: rotor_samples as usize,
        };

        let a_min = f.induction_min.unwrap_or(DEFAULT_INDUCTION_BOUNDS.0);
        let a_max = f.induction_max.unwrap_or(DEFAULT_INDUCTION_BOUNDS.1);
        if !(0.0 <= a_min && a_min < a_max && a_max < 1.0) {
            return Err(invalid(
                "induction_max",
                a_max,
                "induction bounds must satisfy 0 <= min < max < 1",
            ));
        }

        let q0 = f.q_turbine0_per_mw.unwrap_or(DEFAULT_Q_PER_MW);
        let q1 = f.q_turbine1_per_mw.unwrap_or(DEFAULT_Q_PER_MW);
        for (field, q) in [("q_turbine0_per_mw", q0), ("q_turbine1_per_mw", q1)] {
            if !(q.is_finite() && q < 0.0) {
                return Err(invalid(field, q, "output weights must be strictly negative"));
            }
        }
        let r = positive(f.r_move.unwrap_or(DEFAULT_R_MOVE), "r_move")?;

        Ok(SimConfig {
            turbine,
            platform,
            numerical,
            layout,
            mode: f.platform_mode.unwrap_or(PlatformMode::Floating),
            induction_bounds: (a_min, a_max),
            weights: ObjectiveWeights::from_per_mw([q0, q1], r),
        })
    }

    fn to_file(&self) -> ConfigFile {
        ConfigFile {
            rotor_diameter_m: Some(self.turbine.rotor_diameter),
            hub_height_m: Some(self.turbine.hub_height),
            ct1: Some(self.turbine.ct1),
            air_density_kg_m3: Some(self.turbine.air_density),
            mass_kg: Some(self.platform.mass),
            added_mass_kg: Some(self.platform.added_mass),
            inertia_kg_m2: Some(self.platform.inertia),
            added_inertia_kg_m2: Some(self.platform.added_inertia),
            pitch_stiffness_nm_per_rad: Some(self.platform.pitch_stiffness),
            pitch_damping_nms_per_rad: Some(self.platform.pitch_damping),
            surge_stiffness_n_per_m: Some(self.platform.surge_stiffness),
            surge_damping_ns_per_m: Some(self.platform.surge_damping),
            dt_wake_s: Some(self.numerical.dt_wake),
            dt_floater_s: Some(self.numerical.dt_floater),
            num_rings: Some(self.numerical.num_rings as i64),
            core_size_m: Some(self.numerical.core_size),
            inflow_x_m_s: Some(self.numerical.inflow.x),
            inflow_y_m_s: Some(self.numerical.inflow.y),
            downstream_spacing_m: Some(self.layout.downstream_spacing),
            virtual_turbine_induction: Some(self.layout.virtual_turbine_induction),
            rotor_samples: Some(self.layout.rotor_samples as i64),
            platform_mode: Some(self.mode),
            induction_min: Some(self.induction_bounds.0),
            induction_max: Some(self.induction_bounds.1),
            q_turbine0_per_mw: Some(self.weights.q_per_mw[0]),
            q_turbine1_per_mw: Some(self.weights.q_per_mw[1]),
            r_move: Some(self.weights.r),
        }
    }

    /// Serializes every field, including defaulted ones.
    pub fn to_toml_string(&self) -> String {
        toml::to_string(&self.to_file()).expect("flat config always serializes")
    }

    /// Copy of this configuration with the platform pinned at rest.
    pub fn bottom_fixed(&self) -> Self {
        self.with_mode(PlatformMode::Fixed)
    }

    pub fn with_mode(&self, mode: PlatformMode) -> Self {
        SimConfig { mode, ..self.clone() }
    }

    /// Free-stream speed.
    pub fn inflow_speed(&self) -> f64 {
        self.numerical.inflow.norm()
    }

    pub fn clamp_induction(&self, a: f64) -> f64 {
        a.clamp(self.induction_bounds.0, self.induction_bounds.1)
    }

    /// Human-readable summary used in run manifests.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = write!(
            s,
            "D={} m, h={} m, dt_w={} s ({} substeps), n_r={}, sigma={} m, mode={}",
            self.turbine.rotor_diameter,
            self.turbine.hub_height,
            self.numerical.dt_wake,
            self.numerical.substeps_per_wake_step,
            self.numerical.num_rings,
            self.numerical.core_size,
            self.mode.as_str()
        );
        s
    }
}

/// Template written by `export-config-template`; doubles as the reference
/// configuration.
pub const REFERENCE_TEMPLATE: &str = r#"# Turbine
rotor_diameter_m = 178.3
hub_height_m = 119.0
ct1 = 2.3
air_density_kg_m3 = 1.225

# Floating platform (triple-spar, rigid)
mass_kg = 1.1e6
added_mass_kg = 2.8e7
inertia_kg_m2 = 3.9e10
added_inertia_kg_m2 = 1.1e10
pitch_stiffness_nm_per_rad = 6.2e9
pitch_damping_nms_per_rad = 7.3e8
surge_stiffness_n_per_m = 8.3e4
surge_damping_ns_per_m = 1.7e5

# Numerics
dt_wake_s = 3.6
dt_floater_s = 0.9
num_rings = 60
core_size_m = 17.8
inflow_x_m_s = 10.0
inflow_y_m_s = 0.0

# Optional (defaults shown)
# downstream_spacing_m = 891.5        # 5 rotor diameters
# virtual_turbine_induction = 0.3333333333333333
# rotor_samples = 9
# platform_mode = "floating"          # floating | fixed | pitch | surge
# induction_min = 0.0
# induction_max = 0.45
# q_turbine0_per_mw = -1.0
# q_turbine1_per_mw = -1.0
# r_move = 0.047
"#;
