//! Built-in experiments: location and intensity tables for point sources,
//! center table for small disks, and the indicator grids behind the
//! corresponding pictures.
//!
//! Every row runs the noiseless data once and `seeds` noisy realizations
//! (seeds `noise.seed, noise.seed + 1, ...`), imaged together in one batch.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use helmsrc::formats::{write_indicator_binary, write_peaks_jsonl};
use helmsrc::geometry::distance;
use helmsrc::{
    add_noise, estimate_intensities, find_peaks, imaging_map_batch, Complex64, Execution, ImagingResult, NoiseSpec,
    PeakList, Point,
};
use serde::Serialize;

use crate::commands::{clean_data, create_dir, write_file};
use crate::config::{
    BoundaryConfig, DetectionConfig, ExperimentConfig, GridConfig, NoiseConfig, Shape, SourceEntry, SourceKind,
    SourcesConfig,
};
use crate::error::{CliError, CliResult};
use crate::manifest::Manifest;

pub const LOCATION_TOLERANCE: f64 = 0.06;
pub const INTENSITY_TOLERANCE: f64 = 0.12;
/// Fraction of noisy runs that must pass (18 of 20).
pub const REQUIRED_PASS_FRACTION: f64 = 0.9;
pub const DEFAULT_SEEDS: usize = 20;

/// Small-disk protocol: `eps * B_j` with `B_j` the unit disk.
pub const DISK_EPSILON: f64 = 0.05;
pub const DISK_DENSITIES: [f64; 5] = [1.0, 1.2, 0.9, 1.1, 0.8];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentName {
    Table1,
    Table2,
    Table3,
    Fig1,
    Fig2,
}

impl ExperimentName {
    pub const ALL: [ExperimentName; 5] = [Self::Table1, Self::Table2, Self::Table3, Self::Fig1, Self::Fig2];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Table1 => "table1",
            Self::Table2 => "table2",
            Self::Table3 => "table3",
            Self::Fig1 => "fig1",
            Self::Fig2 => "fig2",
        }
    }

    fn disks(self) -> bool {
        matches!(self, Self::Table3 | Self::Fig2)
    }

    fn writes_grids(self) -> bool {
        matches!(self, Self::Fig1 | Self::Fig2)
    }

    /// Tables are gated by tolerances; figures only produce grids.
    fn gated(self) -> bool {
        !self.writes_grids()
    }

    pub fn default_seeds(self) -> usize {
        if self.writes_grids() {
            1
        } else {
            DEFAULT_SEEDS
        }
    }
}

impl FromStr for ExperimentName {
    type Err = CliError;
    fn from_str(s: &str) -> CliResult<Self> {
        Self::ALL
            .into_iter()
            .find(|n| n.as_str() == s)
            .ok_or_else(|| CliError::Usage(format!("unknown experiment '{s}' (expected table1, table2, table3, fig1 or fig2)")))
    }
}

/// The common measurement protocol: `k = 20`, 256 points on the circle of
/// radius 50, 10% noise, `|I|^4` on a 256 x 256 grid over `[-2, 2]^2`.
pub fn protocol() -> ExperimentConfig {
    ExperimentConfig {
        dim: 2,
        wavenumber: 20.0,
        output_dir: "out".into(),
        boundary: BoundaryConfig {
            shape: Shape::Circle,
            center: vec![0.0, 0.0],
            radius: 50.0,
            points: Some(256),
            n_theta: None,
            n_phi: None,
        },
        sources: None,
        noise: NoiseConfig { level: 0.1, seed: 0, write_clean: false },
        grid: Some(GridConfig {
            lower: vec![-2.0, -2.0],
            upper: vec![2.0, 2.0],
            resolution: vec![256, 256],
        }),
        detection: DetectionConfig::default(),
        input: None,
    }
}

type PointRow = (&'static str, &'static str, &'static [([f64; 2], [f64; 2])]);

const POINT_ROWS: [PointRow; 4] = [
    ("n2_close", "2 (close)", &[([0.15, 0.0], [1.0, -2.0]), ([-0.15, 0.0], [1.0, 2.0])]),
    ("n2_distant", "2 (distant)", &[([-1.0, 0.8], [1.0, -2.0]), ([0.7, -1.0], [1.0, 2.0])]),
    ("n3", "3", &[([1.0, -1.0], [4.0, 0.0]), ([1.3, 1.0], [3.5, -1.0]), ([-1.2, -0.25], [3.5, 1.0])]),
    (
        "n4",
        "4",
        &[([1.0, -1.0], [2.5, 2.0]), ([1.0, 0.75], [2.5, -2.0]), ([-1.2, -1.0], [3.5, -1.0]), ([-1.2, 0.75], [3.0, 1.0])],
    ),
];

type DiskRow = (&'static str, &'static str, &'static [[f64; 2]]);

const DISK_ROWS: [DiskRow; 3] = [
    ("n3", "3", &[[1.0, 0.75], [-1.0, -1.0], [1.25, -1.5]]),
    ("n4", "4", &[[1.0, 1.0], [-1.0, -1.25], [1.0, -1.0], [-1.0, 0.75]]),
    ("n5", "5", &[[1.25, 1.2], [-1.0, 0.0], [1.0, -1.0], [-0.6, 1.0], [0.25, 0.0]]),
];

/// One row of a built-in experiment.
#[derive(Clone, Debug)]
pub struct RowSpec {
    pub slug: &'static str,
    pub label: &'static str,
    pub config: ExperimentConfig,
}

pub fn rows(name: ExperimentName) -> Vec<RowSpec> {
    let base = protocol();
    if name.disks() {
        DISK_ROWS
            .iter()
            .map(|(slug, label, centers)| {
                let mut config = base.clone();
                config.sources = Some(SourcesConfig {
                    kind: SourceKind::SmallVolume,
                    min_separation: 0.3,
                    epsilon: Some(DISK_EPSILON),
                    quad_order: Some(helmsrc::forward::DEFAULT_QUAD_ORDER),
                    entries: centers
                        .iter()
                        .zip(DISK_DENSITIES)
                        .map(|(c, f)| SourceEntry {
                            location: c.to_vec(),
                            intensity: None,
                            radius: Some(1.0),
                            density: Some([f, 0.0]),
                            gradient: None,
                        })
                        .collect(),
                });
                RowSpec { slug, label, config }
            })
            .collect()
    } else {
        POINT_ROWS
            .iter()
            .map(|(slug, label, sources)| {
                let mut config = base.clone();
                config.sources = Some(SourcesConfig {
                    kind: SourceKind::Point,
                    min_separation: 0.1,
                    epsilon: None,
                    quad_order: None,
                    entries: sources
                        .iter()
                        .map(|(x, a)| SourceEntry {
                            location: x.to_vec(),
                            intensity: Some(*a),
                            radius: None,
                            density: None,
                            gradient: None,
                        })
                        .collect(),
                });
                RowSpec { slug, label, config }
            })
            .collect()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TruthReport {
    pub location: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub intensity: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub density: Option<[f64; 2]>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PeakReport {
    pub location: Vec<f64>,
    /// Indicator divided by the map maximum.
    pub indicator: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub intensity: Option<[f64; 2]>,
    pub on_boundary: bool,
}

/// Truth `j` paired with detected peak `peak` (greedy nearest pairs).
#[derive(Clone, Debug, Serialize)]
pub struct MatchReport {
    pub peak: Option<usize>,
    pub location_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub intensity_error: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    /// `None` for the noiseless control run.
    pub seed: Option<u64>,
    pub peaks: Vec<PeakReport>,
    pub matches: Vec<MatchReport>,
    pub count_ok: bool,
    pub max_location_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_intensity_error: Option<f64>,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct RowReport {
    pub slug: String,
    pub label: String,
    pub truth: Vec<TruthReport>,
    pub noiseless: RunReport,
    pub runs: Vec<RunReport>,
    pub passes: usize,
    pub required: usize,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Settings {
    pub wavenumber: f64,
    pub boundary_radius: f64,
    pub boundary_points: Option<usize>,
    pub noise_level: f64,
    pub seeds: Vec<u64>,
    pub grid_lower: Vec<f64>,
    pub grid_upper: Vec<f64>,
    pub grid_resolution: Vec<usize>,
    pub p: f64,
    pub threshold: f64,
    pub min_separation: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentReport {
    pub experiment: ExperimentName,
    pub version: &'static str,
    pub settings: Settings,
    pub location_tolerance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub intensity_tolerance: Option<f64>,
    pub gated: bool,
    pub rows: Vec<RowReport>,
    pub pass: bool,
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Number of noisy realizations; the experiment's default when `None`.
    pub seeds: Option<usize>,
    /// `key=value` overrides applied to every row's configuration.
    pub overrides: Vec<String>,
    pub execution: Execution,
}

fn truth_of(cfg: &ExperimentConfig) -> Vec<TruthReport> {
    cfg.sources
        .as_ref()
        .map(|s| {
            s.entries
                .iter()
                .map(|e| TruthReport { location: e.location.clone(), intensity: e.intensity, density: e.density })
                .collect()
        })
        .unwrap_or_default()
}

fn point_of(v: &[f64]) -> Point {
    let mut p = [0.0; 3];
    p[..v.len()].copy_from_slice(v);
    p
}

/// Greedy nearest-pair assignment of truths to detected peaks.
fn assign(truth: &[TruthReport], peaks: &PeakList) -> Vec<Option<usize>> {
    let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
    for (j, t) in truth.iter().enumerate() {
        for (i, p) in peaks.peaks.iter().enumerate() {
            pairs.push((distance(&point_of(&t.location), &p.location), j, i));
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut out = vec![None; truth.len()];
    let mut used = vec![false; peaks.len()];
    for (_, j, i) in pairs {
        if out[j].is_none() && !used[i] {
            out[j] = Some(i);
            used[i] = true;
        }
    }
    out
}

fn evaluate(name: ExperimentName, truth: &[TruthReport], result: &ImagingResult, seed: Option<u64>, cfg: &ExperimentConfig) -> CliResult<RunReport> {
    let params = cfg.detection_params()?;
    let peaks = find_peaks(result, &params).map_err(|e| CliError::at("detection", e))?;
    let peaks = estimate_intensities(&peaks, result).map_err(|e| CliError::at("detection", e))?;
    let dim = result.grid().dim().count();
    let max = result.indicator().iter().copied().fold(0.0, f64::max);
    let assignment = assign(truth, &peaks);
    let matches: Vec<MatchReport> = truth
        .iter()
        .zip(&assignment)
        .map(|(t, a)| {
            let Some(i) = *a else {
                return MatchReport { peak: None, location_error: None, intensity_error: None };
            };
            let p = &peaks.peaks[i];
            let intensity_error = t.intensity.zip(p.intensity).map(|([re, im], est)| {
                let alpha = Complex64::new(re, im);
                (est - alpha).norm() / alpha.norm()
            });
            MatchReport {
                peak: Some(i),
                location_error: Some(distance(&point_of(&t.location), &p.location)),
                intensity_error,
            }
        })
        .collect();
    let count_ok = peaks.len() == truth.len();
    let fold = |f: fn(&MatchReport) -> Option<f64>| -> Option<f64> {
        matches.iter().try_fold(0.0f64, |acc, m| f(m).map(|v| acc.max(v)))
    };
    let max_location_error = fold(|m| m.location_error);
    let max_intensity_error = if truth.iter().all(|t| t.intensity.is_some()) { fold(|m| m.intensity_error) } else { None };
    let loc_ok = max_location_error.is_some_and(|e| e <= LOCATION_TOLERANCE);
    let pass = count_ok
        && match name {
            ExperimentName::Table2 => max_intensity_error.is_some_and(|e| e <= INTENSITY_TOLERANCE),
            _ => loc_ok,
        };
    Ok(RunReport {
        seed,
        peaks: peaks
            .peaks
            .iter()
            .map(|p| PeakReport {
                location: p.location[..dim].to_vec(),
                indicator: if max > 0.0 { p.indicator / max } else { 0.0 },
                intensity: p.intensity.map(|a| [a.re, a.im]),
                on_boundary: p.on_boundary,
            })
            .collect(),
        matches,
        count_ok,
        max_location_error,
        max_intensity_error,
        pass,
    })
}

/// Indicator-like grid of the source density (zero off the disks).
fn profile(cfg: &ExperimentConfig, grid: &helmsrc::SamplingGrid) -> CliResult<ImagingResult> {
    let s = cfg.sources.as_ref().ok_or_else(|| CliError::Config("sources: section is required".into()))?;
    let eps = s.epsilon.unwrap_or(0.0);
    let values = grid
        .points()
        .map(|z| {
            s.entries
                .iter()
                .filter_map(|e| {
                    let c = point_of(&e.location);
                    let r = e.radius.unwrap_or(1.0) * eps;
                    (distance(&z, &c) < r).then(|| {
                        let [re, im] = e.density.unwrap_or([0.0, 0.0]);
                        let g = e.gradient.as_deref().map(point_of).unwrap_or([0.0; 3]);
                        let w: f64 = (0..3).map(|a| g[a] * (z[a] - c[a]) / eps).sum();
                        Complex64::new(re, im) * (1.0 + w)
                    })
                })
                .sum()
        })
        .collect();
    ImagingResult::from_values(grid.clone(), values, cfg.wavenumber, 1.0).map_err(|e| CliError::at("grid", e))
}

fn required_passes(seeds: usize) -> usize {
    (REQUIRED_PASS_FRACTION * seeds as f64).ceil() as usize
}

/// Runs every row of `name`; writes report, manifest and (for figures)
/// grids into `out` when given.
pub fn run_experiment(name: ExperimentName, opts: &RunOptions, out: Option<&Path>) -> CliResult<ExperimentReport> {
    let n_seeds = opts.seeds.unwrap_or(name.default_seeds());
    if n_seeds == 0 {
        return Err(CliError::Usage("--seeds must be at least 1".into()));
    }
    let specs = rows(name);
    let configs: Vec<ExperimentConfig> = specs
        .iter()
        .map(|r| r.config.with_overrides(&opts.overrides))
        .collect::<CliResult<_>>()?;
    let first = &configs[0];
    let base_seed = first.noise.seed;
    let seeds: Vec<u64> = (0..n_seeds as u64)
        .map(|i| base_seed.checked_add(i).ok_or_else(|| CliError::Config("noise.seed: seed range overflows".into())))
        .collect::<CliResult<_>>()?;
    let dir = out.map(|o| o.join(name.as_str()));
    if let Some(d) = &dir {
        create_dir(d)?;
    }
    let mut files: Vec<PathBuf> = Vec::new();
    let mut row_reports = Vec::new();
    for (spec, cfg) in specs.iter().zip(&configs) {
        let grid = cfg.grid()?;
        let clean = clean_data(cfg)?;
        let mut batch = vec![clean.clone()];
        for &seed in &seeds {
            let spec = NoiseSpec::new(cfg.noise.level, seed).map_err(|e| CliError::at("noise.level", e))?;
            batch.push(add_noise(&clean, &spec).map_err(|e| CliError::at("noise", e))?);
        }
        let results = imaging_map_batch(&grid, &batch, cfg.detection.p, opts.execution).map_err(|e| CliError::at("grid", e))?;
        let truth = truth_of(cfg);
        let noiseless = evaluate(name, &truth, &results[0], None, cfg)?;
        let runs = results[1..]
            .iter()
            .zip(&seeds)
            .map(|(r, &s)| evaluate(name, &truth, r, Some(s), cfg))
            .collect::<CliResult<Vec<_>>>()?;
        let passes = runs.iter().filter(|r| r.pass).count();
        let required = required_passes(n_seeds);
        if let (Some(d), true) = (&dir, name.writes_grids()) {
            let shown = if cfg.detection.normalize_output { results[1].normalized() } else { results[1].clone() };
            let params = cfg.detection_params()?;
            let peaks = estimate_intensities(&find_peaks(&results[1], &params).map_err(|e| CliError::at("detection", e))?, &results[1])
                .map_err(|e| CliError::at("detection", e))?;
            files.push(write_file(d, &format!("{}.bin", spec.slug), |w| write_indicator_binary(&shown, w))?);
            files.push(write_file(d, &format!("{}_peaks.jsonl", spec.slug), |w| write_peaks_jsonl(&peaks, grid.dim(), w))?);
            if name.disks() {
                let prof = profile(cfg, &grid)?;
                files.push(write_file(d, &format!("{}_profile.bin", spec.slug), |w| write_indicator_binary(&prof, w))?);
            }
        }
        row_reports.push(RowReport {
            slug: spec.slug.to_string(),
            label: spec.label.to_string(),
            truth,
            noiseless,
            runs,
            passes,
            required,
            pass: !name.gated() || passes >= required,
        });
    }
    let report = ExperimentReport {
        experiment: name,
        version: env!("CARGO_PKG_VERSION"),
        settings: Settings {
            wavenumber: first.wavenumber,
            boundary_radius: first.boundary.radius,
            boundary_points: first.boundary.points,
            noise_level: first.noise.level,
            seeds,
            grid_lower: first.grid.as_ref().map(|g| g.lower.clone()).unwrap_or_default(),
            grid_upper: first.grid.as_ref().map(|g| g.upper.clone()).unwrap_or_default(),
            grid_resolution: first.grid.as_ref().map(|g| g.resolution.clone()).unwrap_or_default(),
            p: first.detection.p,
            threshold: first.detection.threshold,
            min_separation: first.detection.min_separation,
            epsilon: first.sources.as_ref().and_then(|s| s.epsilon),
        },
        location_tolerance: LOCATION_TOLERANCE,
        intensity_tolerance: (name == ExperimentName::Table2).then_some(INTENSITY_TOLERANCE),
        gated: name.gated(),
        pass: row_reports.iter().all(|r| r.pass),
        rows: row_reports,
    };
    if let Some(d) = &dir {
        let mut json = serde_json::to_string_pretty(&report).expect("report serializes");
        json.push('\n');
        let text = render_report(&report);
        files.push(write_file(d, "report.json", |w| Ok(std::io::Write::write_all(w, json.as_bytes())?))?);
        files.push(write_file(d, "report.txt", |w| Ok(std::io::Write::write_all(w, text.as_bytes())?))?);
        let config_text: String = configs.iter().map(|c| c.to_toml_string()).collect::<Vec<_>>().join("\n");
        let mut manifest = Manifest::new(format!("experiment {}", name.as_str()), &config_text, base_seed, first.noise.level);
        manifest.record(d, &files)?;
        manifest.write(d)?;
    }
    Ok(report)
}

fn fmt_point(v: &[f64]) -> String {
    format!("({})", v.iter().map(|c| format!("{c:.3}")).collect::<Vec<_>>().join(", "))
}

fn fmt_complex(v: [f64; 2]) -> String {
    format!("{:.3}{:+.3}i", v[0], v[1])
}

fn fmt_err(v: Option<f64>) -> String {
    v.map_or("missing".into(), |e| format!("{e:.4}"))
}

/// Side-by-side truth / computed table; the computed column is the first
/// noisy run, followed by the worst error over all runs.
pub fn render_report(r: &ExperimentReport) -> String {
    let s = &r.settings;
    let mut out = String::new();
    let seeds = match (s.seeds.first(), s.seeds.last()) {
        (Some(a), Some(b)) if a != b => format!("{a}..={b}"),
        (Some(a), _) => a.to_string(),
        _ => "-".into(),
    };
    let _ = writeln!(
        out,
        "{}: k = {}, circle R = {} with {} points, noise {}, seeds {seeds}, grid {:?} on {} x {}, p = {}, threshold {}, separation {}",
        r.experiment.as_str(),
        s.wavenumber,
        s.boundary_radius,
        s.boundary_points.map_or("-".into(), |m| m.to_string()),
        s.noise_level,
        s.grid_resolution,
        fmt_point(&s.grid_lower),
        fmt_point(&s.grid_upper),
        s.p,
        s.threshold,
        s.min_separation,
    );
    if let Some(eps) = s.epsilon {
        let _ = writeln!(out, "small disks of radius {eps}");
    }
    for row in &r.rows {
        let _ = writeln!(out);
        let verdict = if !r.gated {
            String::new()
        } else if row.pass {
            "  PASS".into()
        } else {
            "  FAIL".into()
        };
        let _ = writeln!(
            out,
            "N = {}: {}/{} runs pass (need {}), noiseless peaks {}{verdict}",
            row.label,
            row.passes,
            row.runs.len(),
            row.required,
            row.noiseless.peaks.len(),
        );
        let first = &row.runs[0];
        for (j, t) in row.truth.iter().enumerate() {
            let m = &first.matches[j];
            let computed = m.peak.map(|i| &first.peaks[i]);
            let worst_loc = row.runs.iter().map(|run| run.matches[j].location_error.unwrap_or(f64::INFINITY)).fold(0.0, f64::max);
            let mut line = format!(
                "  true {:<18} computed {:<18} error {}  worst {}",
                fmt_point(&t.location),
                computed.map_or("missing".into(), |p| fmt_point(&p.location)),
                fmt_err(m.location_error),
                fmt_err(Some(worst_loc).filter(|v| v.is_finite())),
            );
            if let Some(a) = t.intensity {
                let est = computed.and_then(|p| p.intensity);
                let worst = row
                    .runs
                    .iter()
                    .map(|run| run.matches[j].intensity_error.unwrap_or(f64::INFINITY))
                    .fold(0.0, f64::max);
                let _ = write!(
                    line,
                    " | alpha {} computed {} rel. error {}  worst {}",
                    fmt_complex(a),
                    est.map_or("missing".into(), fmt_complex),
                    fmt_err(m.intensity_error),
                    fmt_err(Some(worst).filter(|v| v.is_finite())),
                );
            }
            out.push_str(line.trim_end());
            out.push('\n');
        }
    }
    let _ = writeln!(out);
    let _ = writeln!(out, "{}", if !r.gated { "DONE" } else if r.pass { "PASS" } else { "FAIL" });
    out
}
