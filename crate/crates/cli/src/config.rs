//! Experiment configuration: TOML with `[section]` headers, unknown keys
//! rejected. See `docs/config.md` for the schema.

use serde::Deserialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Solve,
    Homog,
    Metric,
    Heat,
    Schur,
    Kernel,
    Validate,
    OpsCheck,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::Homog => "homog",
            Command::Metric => "metric",
            Command::Heat => "heat",
            Command::Schur => "schur",
            Command::Kernel => "kernel",
            Command::Validate => "validate",
            Command::OpsCheck => "ops-check",
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub command: Option<Command>,
    pub seed: Option<u64>,
    pub out: Option<String>,
    /// Fractional order.
    pub s: Option<f64>,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub mask: MaskConfig,
    #[serde(default)]
    pub coefficient: CoefficientConfig,
    #[serde(default)]
    pub forcing: ForcingConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub experiment: ExperimentConfig,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub dim: Option<usize>,
    /// Half-width `L` of the box `[−L, L)^d`.
    pub half_width: Option<f64>,
    /// Cells per axis.
    pub n: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MaskShape {
    Interval,
    Ball,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaskConfig {
    pub shape: Option<MaskShape>,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub center: Option<[f64; 2]>,
    pub radius: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyKind {
    Constant,
    Periodic,
    Checkerboard,
    Layered,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProfileKind {
    Sine,
    TwoPhase,
    Constant,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegionKind {
    Whole,
    Omega,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientConfig {
    pub family: Option<FamilyKind>,
    pub profile: Option<ProfileKind>,
    pub mean: Option<f64>,
    pub amplitude: Option<f64>,
    pub low: Option<f64>,
    pub high: Option<f64>,
    pub value: Option<f64>,
    /// Declared ellipticity bounds; default to the profile range.
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub region: Option<RegionKind>,
    pub exterior: Option<f64>,
    pub skew: Option<f64>,
    /// Sequence index used by `solve`, `validate` and the membership check.
    pub member: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ForcingKind {
    One,
    Bump,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TimeProfile {
    Steady,
    Sine,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForcingConfig {
    pub kind: Option<ForcingKind>,
    pub center: Option<[f64; 2]>,
    pub radius: Option<f64>,
    pub time: Option<TimeProfile>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub restart: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LimitKind {
    Predicted,
    Finest,
    Constant,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeKind {
    ImplicitEuler,
    CrankNicolson,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n_list: Option<Vec<usize>>,
    pub tol: Option<f64>,
    pub limit: Option<LimitKind>,
    /// Coefficient inside Ω for `limit = "constant"`.
    pub limit_value: Option<f64>,
    /// `d_s` terms; 0 skips the metric column.
    pub n_terms: Option<usize>,
    pub probes: Option<usize>,
    /// Row-major 2×2 `γ` for the membership check.
    pub gamma: Option<[f64; 4]>,
    pub t_final: Option<f64>,
    pub dt: Option<f64>,
    pub scheme: Option<SchemeKind>,
    pub snapshot_every: Option<usize>,
    pub dt_halving: Option<bool>,
    pub shifts: Option<Vec<f64>>,
    /// Random fields per identity in `ops-check`.
    pub fields: Option<usize>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }
}
