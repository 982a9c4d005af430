//! Experiment configuration: one TOML file, addressed by dotted key paths
//! (`boundary.radius`, `noise.seed`, ...) for `--set` overrides.
//!
//! ```toml
//! dim = 2
//! wavenumber = 20.0
//! output_dir = "out"
//!
//! [boundary]
//! shape = "circle"        # or "sphere"
//! center = [0.0, 0.0]
//! radius = 50.0
//! points = 256            # circle only
//! # n_theta = 64          # sphere only
//! # n_phi = 128           # sphere only
//!
//! [sources]
//! kind = "point"          # or "small_volume"
//! min_separation = 0.1
//! # epsilon = 0.05        # small_volume only
//! # quad_order = 8        # small_volume only
//!
//! [[sources.entries]]
//! location = [0.15, 0.0]
//! intensity = [1.0, -2.0] # point: [re, im]
//! # radius = 1.0          # small_volume: B_j radius
//! # density = [1.0, 0.0]  # small_volume: f = density * (1 + gradient . w)
//! # gradient = [0.0, 0.0]
//!
//! [noise]
//! level = 0.1
//! seed = 0
//! write_clean = false
//!
//! [grid]
//! lower = [-2.0, -2.0]
//! upper = [2.0, 2.0]
//! resolution = [256, 256]
//!
//! [detection]
//! p = 4.0
//! threshold = 0.25
//! min_separation = 0.2
//! # max_peaks = 4
//! refine = false
//! normalize_output = true
//!
//! [input]
//! data = "out/data.csv"   # reconstruct only
//! ```

use std::path::Path;

use helmsrc::{
    make_circle_boundary, make_sampling_grid, make_sphere_boundary, Complex64, DetectionParams, Density, Dim,
    MeasurementSurface, NoiseSpec, Point, PointSource, PointSourceSet, SamplingGrid, SmallVolume,
    SmallVolumeSourceSet,
};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dim: u8,
    pub wavenumber: f64,
    #[serde(default = "default_output_dir")]
    pub output_dir: String,
    pub boundary: BoundaryConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sources: Option<SourcesConfig>,
    #[serde(default)]
    pub noise: NoiseConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridConfig>,
    #[serde(default)]
    pub detection: DetectionConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<InputConfig>,
}

fn default_output_dir() -> String {
    "out".into()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    Circle,
    Sphere,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundaryConfig {
    pub shape: Shape,
    pub center: Vec<f64>,
    pub radius: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_theta: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_phi: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceKind {
    Point,
    SmallVolume,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourcesConfig {
    pub kind: SourceKind,
    pub min_separation: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quad_order: Option<usize>,
    #[serde(default)]
    pub entries: Vec<SourceEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceEntry {
    pub location: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intensity: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gradient: Option<Vec<f64>>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    #[serde(default)]
    pub level: f64,
    /// Kept below 2^63 so it fits a TOML integer.
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub write_clean: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub resolution: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectionConfig {
    #[serde(default = "default_p")]
    pub p: f64,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    #[serde(default = "default_separation")]
    pub min_separation: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_peaks: Option<usize>,
    #[serde(default)]
    pub refine: bool,
    #[serde(default = "yes")]
    pub normalize_output: bool,
}

fn default_p() -> f64 {
    4.0
}
fn default_threshold() -> f64 {
    helmsrc::detect::DEFAULT_THRESHOLD
}
fn default_separation() -> f64 {
    helmsrc::detect::DEFAULT_MIN_SEPARATION
}
fn yes() -> bool {
    true
}

impl Default for DetectionConfig {
    fn default() -> Self {
        Self {
            p: default_p(),
            threshold: default_threshold(),
            min_separation: default_separation(),
            max_peaks: None,
            refine: false,
            normalize_output: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputConfig {
    pub data: String,
}

/// Either kind of validated source set.
#[derive(Clone, Debug)]
pub enum Sources {
    Points(PointSourceSet),
    SmallVolumes { set: SmallVolumeSourceSet, quad_order: usize },
}

fn bad(key: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{key}: {msg}"))
}

fn coords(dim: Dim, key: &str, v: &[f64]) -> CliResult<Point> {
    if v.len() != dim.count() {
        return Err(bad(key, format!("expected {} coordinates, found {}", dim.count(), v.len())));
    }
    if v.iter().any(|c| !c.is_finite()) {
        return Err(bad(key, "coordinates must be finite"));
    }
    helmsrc::geometry::point_from_slice(dim, v).map_err(|e| CliError::at(key, e))
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> CliResult<Self> {
        Self::from_toml_with(text, &[])
    }

    /// Parses `text`, applies `key=value` overrides, then checks every
    /// invariant.
    pub fn from_toml_with(text: &str, overrides: &[String]) -> CliResult<Self> {
        let de = |e: toml::de::Error| CliError::Config(e.to_string().trim_end().to_string());
        let cfg: Self = if overrides.is_empty() {
            // Straight from the text, so errors carry line and column.
            toml::from_str(text).map_err(de)?
        } else {
            let mut table: toml::Table = text.parse().map_err(de)?;
            for o in overrides {
                apply_override(&mut table, o)?;
            }
            table.try_into().map_err(de)?
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path, overrides: &[String]) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_toml_with(&text, overrides).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes to TOML")
    }

    /// Copy with `key=value` overrides applied and re-validated.
    pub fn with_overrides(&self, overrides: &[String]) -> CliResult<Self> {
        if overrides.is_empty() {
            return Ok(self.clone());
        }
        Self::from_toml_with(&self.to_toml_string(), overrides)
    }

    pub fn dimension(&self) -> CliResult<Dim> {
        Dim::try_from(self.dim).map_err(|e| bad("dim", e))
    }

    /// Checks every section that is present.
    pub fn validate(&self) -> CliResult<()> {
        self.dimension()?;
        if !(self.wavenumber.is_finite() && self.wavenumber > 0.0) {
            return Err(bad("wavenumber", format!("must be positive, got {}", self.wavenumber)));
        }
        if self.output_dir.is_empty() {
            return Err(bad("output_dir", "must not be empty"));
        }
        self.surface()?;
        if self.sources.is_some() {
            self.sources()?;
        }
        self.noise_spec()?;
        if self.noise.seed > i64::MAX as u64 {
            return Err(bad("noise.seed", "must be below 2^63"));
        }
        if self.grid.is_some() {
            self.grid()?;
        }
        self.detection_params()?;
        if !(self.detection.p.is_finite() && self.detection.p > 0.0) {
            return Err(bad("detection.p", format!("must be positive, got {}", self.detection.p)));
        }
        if self.detection.max_peaks == Some(0) {
            return Err(bad("detection.max_peaks", "must be at least 1 when given"));
        }
        if let Some(input) = &self.input {
            if input.data.is_empty() {
                return Err(bad("input.data", "must not be empty"));
            }
        }
        Ok(())
    }

    pub fn surface(&self) -> CliResult<MeasurementSurface> {
        let dim = self.dimension()?;
        let b = &self.boundary;
        let center = coords(dim, "boundary.center", &b.center)?;
        if !(b.radius.is_finite() && b.radius > 0.0) {
            return Err(bad("boundary.radius", format!("must be positive, got {}", b.radius)));
        }
        match (b.shape, dim) {
            (Shape::Circle, Dim::Two) => {
                if b.n_theta.is_some() || b.n_phi.is_some() {
                    return Err(bad("boundary", "n_theta / n_phi apply to spheres only"));
                }
                let m = b.points.ok_or_else(|| bad("boundary.points", "required for a circle"))?;
                if m < 3 {
                    return Err(bad("boundary.points", format!("need at least 3, got {m}")));
                }
                make_circle_boundary([center[0], center[1]], b.radius, m).map_err(|e| CliError::at("boundary", e))
            }
            (Shape::Sphere, Dim::Three) => {
                if b.points.is_some() {
                    return Err(bad("boundary.points", "applies to circles only; use n_theta and n_phi"));
                }
                let nt = b.n_theta.ok_or_else(|| bad("boundary.n_theta", "required for a sphere"))?;
                let np = b.n_phi.ok_or_else(|| bad("boundary.n_phi", "required for a sphere"))?;
                if nt < 2 {
                    return Err(bad("boundary.n_theta", format!("need at least 2, got {nt}")));
                }
                if np < 3 {
                    return Err(bad("boundary.n_phi", format!("need at least 3, got {np}")));
                }
                make_sphere_boundary(center, b.radius, nt, np).map_err(|e| CliError::at("boundary", e))
            }
            (Shape::Circle, Dim::Three) => Err(bad("boundary.shape", "a circle needs dim = 2")),
            (Shape::Sphere, Dim::Two) => Err(bad("boundary.shape", "a sphere needs dim = 3")),
        }
    }

    pub fn sources(&self) -> CliResult<Sources> {
        let dim = self.dimension()?;
        let s = self.sources.as_ref().ok_or_else(|| bad("sources", "section is required"))?;
        if !(s.min_separation.is_finite() && s.min_separation > 0.0) {
            return Err(bad("sources.min_separation", format!("must be positive, got {}", s.min_separation)));
        }
        let surface = self.surface()?;
        match s.kind {
            SourceKind::Point => {
                if s.epsilon.is_some() || s.quad_order.is_some() {
                    return Err(bad("sources", "epsilon / quad_order apply to small_volume sources only"));
                }
                let mut list = Vec::new();
                for (i, e) in s.entries.iter().enumerate() {
                    let key = format!("sources.entries[{i}]");
                    if e.radius.is_some() || e.density.is_some() || e.gradient.is_some() {
                        return Err(bad(&key, "radius / density / gradient apply to small_volume sources only"));
                    }
                    let location = coords(dim, &format!("{key}.location"), &e.location)?;
                    let [re, im] = e.intensity.ok_or_else(|| bad(&format!("{key}.intensity"), "required"))?;
                    if !(re.is_finite() && im.is_finite()) || (re == 0.0 && im == 0.0) {
                        return Err(bad(&format!("{key}.intensity"), "must be finite and nonzero"));
                    }
                    if !surface.contains(&location, helmsrc::forward::BOUNDARY_MARGIN) {
                        return Err(bad(&format!("{key}.location"), "lies outside the measurement surface"));
                    }
                    list.push(PointSource { location, intensity: Complex64::new(re, im) });
                }
                PointSourceSet::new(dim, list, s.min_separation)
                    .map(Sources::Points)
                    .map_err(|e| CliError::at("sources", e))
            }
            SourceKind::SmallVolume => {
                let eps = s.epsilon.ok_or_else(|| bad("sources.epsilon", "required for small_volume sources"))?;
                if !(eps.is_finite() && eps > 0.0) {
                    return Err(bad("sources.epsilon", format!("must be positive, got {eps}")));
                }
                let quad_order = s.quad_order.unwrap_or(helmsrc::forward::DEFAULT_QUAD_ORDER);
                if quad_order == 0 {
                    return Err(bad("sources.quad_order", "must be at least 1"));
                }
                let mut list = Vec::new();
                for (i, e) in s.entries.iter().enumerate() {
                    let key = format!("sources.entries[{i}]");
                    if e.intensity.is_some() {
                        return Err(bad(&format!("{key}.intensity"), "small_volume sources take a density"));
                    }
                    let center = coords(dim, &format!("{key}.location"), &e.location)?;
                    let radius = e.radius.unwrap_or(1.0);
                    if !(radius.is_finite() && radius > 0.0) {
                        return Err(bad(&format!("{key}.radius"), format!("must be positive, got {radius}")));
                    }
                    let [re, im] = e.density.ok_or_else(|| bad(&format!("{key}.density"), "required"))?;
                    if !(re.is_finite() && im.is_finite()) {
                        return Err(bad(&format!("{key}.density"), "must be finite"));
                    }
                    let value = Complex64::new(re, im);
                    let density = match &e.gradient {
                        None => Density::Constant(value),
                        Some(g) => Density::Linear {
                            value,
                            gradient: coords(dim, &format!("{key}.gradient"), g)?,
                        },
                    };
                    list.push(SmallVolume { center, radius, density });
                }
                let set = SmallVolumeSourceSet::new(dim, eps, list, s.min_separation)
                    .map_err(|e| CliError::at("sources", e))?;
                let margin = helmsrc::forward::BOUNDARY_MARGIN;
                for (i, v) in set.subregions().iter().enumerate() {
                    let reach = eps * v.radius / surface.scale();
                    if !surface.contains(&v.center, margin + reach) {
                        return Err(bad(
                            &format!("sources.entries[{i}].location"),
                            "subregion reaches outside the measurement surface",
                        ));
                    }
                }
                Ok(Sources::SmallVolumes { set, quad_order })
            }
        }
    }

    pub fn noise_spec(&self) -> CliResult<NoiseSpec> {
        NoiseSpec::new(self.noise.level, self.noise.seed).map_err(|e| CliError::at("noise.level", e))
    }

    pub fn grid(&self) -> CliResult<SamplingGrid> {
        let dim = self.dimension()?;
        let g = self.grid.as_ref().ok_or_else(|| bad("grid", "section is required"))?;
        for (key, len) in [("grid.lower", g.lower.len()), ("grid.upper", g.upper.len()), ("grid.resolution", g.resolution.len())] {
            if len != dim.count() {
                return Err(bad(key, format!("expected {} entries, found {len}", dim.count())));
            }
        }
        if g.lower.iter().chain(&g.upper).any(|v| !v.is_finite()) {
            return Err(bad("grid", "bounds must be finite"));
        }
        if let Some(a) = (0..dim.count()).find(|&a| g.lower[a] >= g.upper[a]) {
            return Err(bad("grid.upper", format!("axis {a}: upper bound must exceed lower bound")));
        }
        if let Some(a) = (0..dim.count()).find(|&a| g.resolution[a] < 2) {
            return Err(bad("grid.resolution", format!("axis {a}: need at least 2 points")));
        }
        make_sampling_grid(&g.lower, &g.upper, &g.resolution).map_err(|e| CliError::at("grid", e))
    }

    pub fn detection_params(&self) -> CliResult<DetectionParams> {
        let d = &self.detection;
        let params = DetectionParams {
            threshold: d.threshold,
            min_separation: d.min_separation,
            max_peaks: d.max_peaks,
            refine: d.refine,
        };
        params.validate().map_err(|e| CliError::at("detection", e))?;
        Ok(params)
    }
}

/// Applies `a.b.c=value`. The value is read as a TOML literal when it parses
/// as one and as a bare string otherwise.
pub fn apply_override(table: &mut toml::Table, assignment: &str) -> CliResult<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| CliError::Usage(format!("override '{assignment}' is not of the form key=value")))?;
    let key = key.trim();
    let raw = raw.trim();
    if key.is_empty() || key.split('.').any(str::is_empty) {
        return Err(CliError::Usage(format!("override '{assignment}' has an empty key segment")));
    }
    let value = format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    let mut parts: Vec<&str> = key.split('.').collect();
    let last = parts.pop().expect("non-empty key");
    let mut cur = table;
    let mut path = String::new();
    for p in parts {
        path = if path.is_empty() { p.to_string() } else { format!("{path}.{p}") };
        cur = match cur.entry(p).or_insert_with(|| toml::Value::Table(toml::Table::new())) {
            toml::Value::Table(t) => t,
            _ => return Err(bad(&path, "is not a table")),
        };
    }
    cur.insert(last.to_string(), value);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
dim = 2
wavenumber = 20.0
[boundary]
shape = "circle"
center = [0.0, 0.0]
radius = 50.0
points = 256
"#;

    #[test]
    fn minimal_config_takes_defaults() {
        let c = ExperimentConfig::from_toml_str(MINIMAL).unwrap();
        assert_eq!(c.output_dir, "out");
        assert_eq!(c.detection, DetectionConfig::default());
        assert_eq!(c.noise.level, 0.0);
        assert_eq!(c.surface().unwrap().len(), 256);
    }

    #[test]
    fn overrides_create_and_replace_keys() {
        let c = ExperimentConfig::from_toml_with(
            MINIMAL,
            &["noise.level=0.1".into(), "noise.seed = 7".into(), "output_dir=results/a".into()],
        )
        .unwrap();
        assert_eq!(c.noise.level, 0.1);
        assert_eq!(c.noise.seed, 7);
        assert_eq!(c.output_dir, "results/a");
        assert!(matches!(
            ExperimentConfig::from_toml_with(MINIMAL, &["noise.level".into()]),
            Err(CliError::Usage(_))
        ));
        let err = ExperimentConfig::from_toml_with(MINIMAL, &["boundary.radius=-1".into()]).unwrap_err();
        assert!(err.to_string().contains("boundary.radius"), "{err}");
    }
}
