//! Experiment configuration: a single JSON document per run.
//!
//! Every object rejects unknown keys. Points are either coordinate arrays or
//! the string `"inf"`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use qrlab::metrics::Region;
use qrlab::zoo::{self, IsometrySpace, MapDescriptor};
use qrlab::{ConformalMetric, ExtPoint, QrError};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("invalid config: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError::Invalid(msg.into()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PointSpec {
    Coords(Vec<f64>),
    Named(String),
}

impl PointSpec {
    pub fn resolve(&self, n: usize) -> Result<ExtPoint, ConfigError> {
        match self {
            PointSpec::Named(s) if s == "inf" => Ok(ExtPoint::Infinity),
            PointSpec::Named(s) => invalid(format!("unknown point {s:?}; use a coordinate array or \"inf\"")),
            PointSpec::Coords(c) if c.len() == n => {
                if c.iter().all(|v| v.is_finite()) {
                    Ok(ExtPoint::new(c))
                } else {
                    invalid("point coordinates must be finite")
                }
            }
            PointSpec::Coords(c) => invalid(format!("point {c:?} does not have {n} coordinates")),
        }
    }

    pub fn finite(&self, n: usize) -> Result<Vec<f64>, ConfigError> {
        match self.resolve(n)? {
            ExtPoint::Finite(c) => Ok(c.to_vec()),
            ExtPoint::Infinity => invalid("a finite point is required here"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RegionSpec {
    Whole {},
    Sphere {},
    UnitBall {},
    UpperHalfSpace {},
    Cube { half_width: f64 },
    Beam {},
    Ball { center: Vec<f64>, radius: f64 },
}

impl RegionSpec {
    pub fn resolve(&self, n: usize) -> Result<Region, ConfigError> {
        Ok(match self {
            RegionSpec::Whole {} => Region::Whole,
            RegionSpec::Sphere {} => Region::Sphere,
            RegionSpec::UnitBall {} => Region::UnitBall,
            RegionSpec::UpperHalfSpace {} => Region::UpperHalfSpace,
            RegionSpec::Cube { half_width } if *half_width > 0.0 => Region::Cube { half_width: *half_width },
            RegionSpec::Cube { .. } => return invalid("cube half_width must be positive"),
            RegionSpec::Beam {} => Region::Beam,
            RegionSpec::Ball { center, radius } => {
                if center.len() != n || radius.is_nan() || *radius <= 0.0 {
                    return invalid("ball needs an n-dimensional center and a positive radius");
                }
                Region::Ball {
                    center: center.clone(),
                    radius: *radius,
                }
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricName {
    Euclidean,
    Spherical,
    Hyperbolic,
    Quasihyperbolic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricSpec {
    pub kind: MetricName,
    /// Required for the quasihyperbolic metric; restricts the euclidean one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub region: Option<RegionSpec>,
}

impl MetricSpec {
    pub fn of(kind: MetricName) -> Self {
        MetricSpec { kind, region: None }
    }

    pub fn resolve(&self, n: usize) -> Result<ConformalMetric, ConfigError> {
        let region = self.region.as_ref().map(|r| r.resolve(n)).transpose()?;
        match (self.kind, region) {
            (MetricName::Euclidean, None) => Ok(ConformalMetric::euclidean(n)),
            (MetricName::Euclidean, Some(r)) => Ok(ConformalMetric::euclidean_on(n, r)),
            (MetricName::Spherical, None) => Ok(ConformalMetric::spherical(n)),
            (MetricName::Hyperbolic, None) => Ok(ConformalMetric::hyperbolic(n)),
            (MetricName::Quasihyperbolic, Some(r)) => {
                ConformalMetric::quasihyperbolic(n, r).map_err(|e| ConfigError::Invalid(e.to_string()))
            }
            (MetricName::Quasihyperbolic, None) => invalid("quasihyperbolic metric needs a region"),
            (k, Some(_)) => invalid(format!("metric {k:?} has a fixed region")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpaceName {
    Hyperbolic,
    Euclidean,
    Spherical,
}

impl From<SpaceName> for IsometrySpace {
    fn from(s: SpaceName) -> Self {
        match s {
            SpaceName::Hyperbolic => IsometrySpace::Hyperbolic,
            SpaceName::Euclidean => IsometrySpace::Euclidean,
            SpaceName::Spherical => IsometrySpace::Spherical,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MapSpec {
    Identity {},
    Constant { point: PointSpec },
    RadialPower { t: f64 },
    Zorich {},
    ZorichExtended {},
    ZorichInverse {},
    ZorichBloch {},
    /// Coefficients `[re, im]`, lowest degree first.
    Polynomial { coeffs: Vec<[f64; 2]> },
    QcConjugate { base: Box<MapSpec>, stretch: Vec<f64> },
    /// Row-major `n×n` matrix.
    Linear { matrix: Vec<f64> },
    PlanarStretch { k: f64 },
    MobiusBall { anchor: Vec<f64> },
    BallToHalfSpace {},
    Translation { offset: Vec<f64> },
    Exp {},
    ExpExp {},
    PiecewiseLinear { m: f64 },
    /// The rotation of `S^n` taking the given point to 0.
    SphericalIsometry { to_zero: PointSpec },
    Compose { outer: Box<MapSpec>, inner: Box<MapSpec> },
}

fn build_err(e: QrError) -> ConfigError {
    ConfigError::Invalid(format!("map: {e}"))
}

impl MapSpec {
    pub fn build(&self, n: usize) -> Result<MapDescriptor, ConfigError> {
        let f = match self {
            MapSpec::Identity {} => zoo::identity(n),
            MapSpec::Constant { point } => zoo::constant(point.resolve(n)?, n),
            MapSpec::RadialPower { t } => zoo::radial_power(*t, n).map_err(build_err)?,
            MapSpec::Zorich {} => zoo::zorich(),
            MapSpec::ZorichExtended {} => zoo::zorich_extended(),
            MapSpec::ZorichInverse {} => zoo::zorich_inverse_map(),
            MapSpec::ZorichBloch {} => zoo::zorich_bloch(),
            MapSpec::Polynomial { coeffs } => {
                let c: Vec<(f64, f64)> = coeffs.iter().map(|[a, b]| (*a, *b)).collect();
                zoo::planar_polynomial(&c).map_err(build_err)?
            }
            MapSpec::QcConjugate { base, stretch } => {
                zoo::qc_conjugate(&base.build(n)?, stretch).map_err(build_err)?
            }
            MapSpec::Linear { matrix } => zoo::linear(matrix, n).map_err(build_err)?,
            MapSpec::PlanarStretch { k } => zoo::planar_stretch(*k).map_err(build_err)?,
            MapSpec::MobiusBall { anchor } => {
                if anchor.len() != n {
                    return invalid("mobius_ball anchor has the wrong dimension");
                }
                zoo::mobius_ball_isometry(&ExtPoint::new(anchor)).map_err(build_err)?
            }
            MapSpec::BallToHalfSpace {} => zoo::ball_to_half_space(n),
            MapSpec::Translation { offset } => zoo::translation(offset),
            MapSpec::Exp {} => zoo::exp_map(),
            MapSpec::ExpExp {} => zoo::exp_exp_map(),
            MapSpec::PiecewiseLinear { m } => zoo::piecewise_linear(*m).map_err(build_err)?,
            MapSpec::SphericalIsometry { to_zero } => zoo::spherical_isometry_to_zero(&to_zero.resolve(n)?, n),
            MapSpec::Compose { outer, inner } => {
                zoo::compose(&outer.build(n)?, &inner.build(n)?).map_err(build_err)?
            }
        };
        if f.dim != n {
            return invalid(format!("map {} lives in dimension {}, config says {n}", f.name, f.dim));
        }
        Ok(f)
    }
}

fn default_pairs() -> usize {
    2000
}

fn default_samples() -> usize {
    32
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistConfig {
    pub metric: MetricSpec,
    pub x: PointSpec,
    pub y: PointSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HolderConfig {
    pub metric_in: MetricSpec,
    pub metric_out: MetricSpec,
    pub center: Vec<f64>,
    pub radius: f64,
    /// Defaults to the map's `K^{1/(1−n)}`.
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default = "default_pairs")]
    pub pairs: usize,
    /// Force every pair through this point.
    #[serde(default)]
    pub through: Option<PointSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExponentConfig {
    pub metric_in: MetricSpec,
    pub metric_out: MetricSpec,
    pub x0: PointSpec,
    /// Strictly decreasing radii.
    pub scales: Vec<f64>,
    #[serde(default = "default_samples")]
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileConfig {
    pub space: SpaceName,
    pub metric_in: MetricSpec,
    pub metric_out: MetricSpec,
    pub deltas: Vec<f64>,
    #[serde(default = "ProfileConfig::default_anchors")]
    pub anchors: usize,
    /// Explicit anchors, used instead of random ones.
    #[serde(default)]
    pub anchor_points: Option<Vec<PointSpec>>,
    #[serde(default = "ProfileConfig::default_reach")]
    pub reach: f64,
    #[serde(default = "ProfileConfig::default_directions")]
    pub directions: usize,
    #[serde(default = "ProfileConfig::default_threshold_fraction")]
    pub threshold_fraction: f64,
    #[serde(default)]
    pub base_point: Option<PointSpec>,
}

impl ProfileConfig {
    fn default_anchors() -> usize {
        64
    }
    fn default_reach() -> f64 {
        4.0
    }
    fn default_directions() -> usize {
        16
    }
    fn default_threshold_fraction() -> f64 {
        1e-2
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QfConfig {
    pub metric_in: MetricSpec,
    pub metric_out: MetricSpec,
    pub points: Vec<PointSpec>,
    #[serde(default)]
    pub alpha: Option<f64>,
    pub scales: Vec<f64>,
    #[serde(default = "default_samples")]
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlochConfig {
    pub levels: Vec<f64>,
    pub centers: usize,
    #[serde(default = "BlochConfig::default_ball_samples")]
    pub ball_samples: usize,
    #[serde(default = "BlochConfig::default_probe_centers")]
    pub probe_centers: usize,
}

impl BlochConfig {
    fn default_ball_samples() -> usize {
        64
    }
    fn default_probe_centers() -> usize {
        16
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GrowthConfig {
    pub radii: Vec<f64>,
    #[serde(default)]
    pub x0: Option<PointSpec>,
    #[serde(default = "GrowthConfig::default_sphere_samples")]
    pub sphere_samples: usize,
    /// Monte Carlo samples per shell for `A`; 0 skips it.
    #[serde(default)]
    pub mc_samples: usize,
    #[serde(default = "GrowthConfig::default_tail_fraction")]
    pub tail_fraction: f64,
}

impl GrowthConfig {
    fn default_sphere_samples() -> usize {
        64
    }
    fn default_tail_fraction() -> f64 {
        0.5
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlochCheckConfig {
    pub bloch: BlochConfig,
    pub radii: Vec<f64>,
    #[serde(default = "BlochCheckConfig::default_sphere_samples")]
    pub sphere_samples: usize,
}

impl BlochCheckConfig {
    fn default_sphere_samples() -> usize {
        200
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZalcmanConfig {
    pub profile: ProfileConfig,
    pub window: f64,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default = "ZalcmanConfig::default_grid")]
    pub grid: usize,
    #[serde(default = "ZalcmanConfig::default_probes")]
    pub probes: usize,
    #[serde(default = "ZalcmanConfig::default_max_terms")]
    pub max_terms: usize,
}

impl ZalcmanConfig {
    fn default_grid() -> usize {
        200
    }
    fn default_probes() -> usize {
        1000
    }
    fn default_max_terms() -> usize {
        8
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RayEndSpec {
    Point { point: Vec<f64> },
    Infinity { direction: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EscherConfig {
    pub metric_y: MetricSpec,
    pub metric_z: MetricSpec,
    pub center: Vec<f64>,
    pub end: RayEndSpec,
    #[serde(default = "EscherConfig::default_decades")]
    pub decades: f64,
    #[serde(default = "EscherConfig::default_steps")]
    pub steps: usize,
}

impl EscherConfig {
    fn default_decades() -> f64 {
        6.0
    }
    fn default_steps() -> usize {
        24
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JuliaConfig {
    pub x_range: [f64; 2],
    pub y_range: [f64; 2],
    #[serde(default = "JuliaConfig::default_size")]
    pub width: usize,
    #[serde(default = "JuliaConfig::default_size")]
    pub height: usize,
    /// Coordinates varied along the pixel axes (3-D slices).
    #[serde(default = "JuliaConfig::default_axes")]
    pub axes: [usize; 2],
    /// Remaining coordinates of the slice; zeros by default.
    #[serde(default)]
    pub base: Option<Vec<f64>>,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default = "JuliaConfig::default_r_list")]
    pub r_list: Vec<f64>,
    #[serde(default = "JuliaConfig::default_m_max")]
    pub m_max: usize,
    #[serde(default = "JuliaConfig::default_samples")]
    pub samples: usize,
    #[serde(default = "JuliaConfig::default_threshold")]
    pub threshold: f64,
    /// Points whose full `(m, r)` tables are written.
    #[serde(default)]
    pub probes: Vec<PointSpec>,
}

impl JuliaConfig {
    fn default_size() -> usize {
        256
    }
    fn default_axes() -> [usize; 2] {
        [0, 1]
    }
    fn default_r_list() -> Vec<f64> {
        (1..=10).map(|k| 0.5f64.powi(k)).collect()
    }
    fn default_m_max() -> usize {
        20
    }
    fn default_samples() -> usize {
        16
    }
    fn default_threshold() -> f64 {
        1e3
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AcceptanceConfig {
    /// Run only these criterion numbers; all when absent.
    #[serde(default)]
    pub only: Option<Vec<usize>>,
}

/// A full experiment: the map, the seed, and the section of the command
/// being run. Sections for other commands may be present and are echoed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dimension: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub map: Option<MapSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dist: Option<DistConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub holder: Option<HolderConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exponent: Option<ExponentConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normality: Option<ProfileConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qf: Option<QfConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bloch: Option<BlochConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub growth: Option<GrowthConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bloch_check: Option<BlochCheckConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zalcman: Option<ZalcmanConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub escher: Option<EscherConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub julia: Option<JuliaConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub acceptance: Option<AcceptanceConfig>,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let cfg: ExperimentConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    /// Defaults for runs without a config file (only `acceptance`).
    pub fn bare() -> Self {
        ExperimentConfig {
            dimension: 3,
            seed: 0,
            out: None,
            map: None,
            dist: None,
            holder: None,
            exponent: None,
            normality: None,
            qf: None,
            bloch: None,
            growth: None,
            bloch_check: None,
            zalcman: None,
            escher: None,
            julia: None,
            acceptance: None,
        }
    }

    fn validate(&self) -> Result<(), ConfigError> {
        if self.dimension < 2 {
            return invalid(format!("dimension must be at least 2, got {}", self.dimension));
        }
        if let Some(m) = &self.map {
            m.build(self.dimension)?;
        }
        Ok(())
    }

    pub fn map(&self) -> Result<MapDescriptor, ConfigError> {
        match &self.map {
            Some(m) => m.build(self.dimension),
            None => invalid("missing key `map`"),
        }
    }

    pub fn section<'a, T>(&self, value: &'a Option<T>, key: &str) -> Result<&'a T, ConfigError> {
        value
            .as_ref()
            .ok_or_else(|| ConfigError::Invalid(format!("missing key `{key}` for this command")))
    }
}
