//! `simulate` and `reconstruct`.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use helmsrc::formats::{read_cauchy_csv, write_cauchy_csv, write_imaging_csv, write_indicator_binary, write_peaks_jsonl};
use helmsrc::{
    add_noise, estimate_intensities, find_peaks, imaging_map, radiate_points, radiate_small_volumes, CauchyData,
    ImagingResult, PeakList,
};

use crate::config::{ExperimentConfig, Sources};
use crate::error::{CliError, CliResult};
use crate::manifest::Manifest;

pub const DATA_FILE: &str = "data.csv";
pub const CLEAN_DATA_FILE: &str = "data_clean.csv";
pub const INDICATOR_FILE: &str = "indicator.bin";
pub const IMAGING_FILE: &str = "imaging.csv";
pub const PEAKS_FILE: &str = "peaks.jsonl";

pub(crate) fn create_dir(dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

/// Opens `dir/name` for writing and hands a buffered writer to `f`.
pub(crate) fn write_file<F>(dir: &Path, name: &str, f: F) -> CliResult<PathBuf>
where
    F: FnOnce(&mut BufWriter<File>) -> helmsrc::Result<()>,
{
    let path = dir.join(name);
    let file = File::create(&path).map_err(|e| CliError::io(&path, e))?;
    let mut w = BufWriter::new(file);
    f(&mut w).map_err(|e| CliError::io(&path, e))?;
    w.flush().map_err(|e| CliError::io(&path, e))?;
    Ok(PathBuf::from(name))
}

/// Noiseless Cauchy data for the configured sources.
pub fn clean_data(cfg: &ExperimentConfig) -> CliResult<CauchyData> {
    let surface = cfg.surface()?;
    let k = cfg.wavenumber;
    match cfg.sources()? {
        Sources::Points(set) => radiate_points(&set, &surface, k),
        Sources::SmallVolumes { set, quad_order } => radiate_small_volumes(&set, &surface, k, quad_order),
    }
    .map_err(|e| CliError::at("sources", e))
}

pub fn noisy_data(cfg: &ExperimentConfig, clean: &CauchyData) -> CliResult<CauchyData> {
    add_noise(clean, &cfg.noise_spec()?).map_err(|e| CliError::at("noise", e))
}

/// Writes `data.csv` (and `data_clean.csv` when requested) plus a manifest
/// into `out`; returns the artifact paths relative to `out`.
pub fn simulate(cfg: &ExperimentConfig, out: &Path) -> CliResult<Vec<PathBuf>> {
    let clean = clean_data(cfg)?;
    let noisy = noisy_data(cfg, &clean)?;
    create_dir(out)?;
    let mut files = vec![write_file(out, DATA_FILE, |w| write_cauchy_csv(&noisy, w))?];
    if cfg.noise.write_clean {
        files.push(write_file(out, CLEAN_DATA_FILE, |w| write_cauchy_csv(&clean, w))?);
    }
    let mut manifest = Manifest::new("simulate", &cfg.to_toml_string(), cfg.noise.seed, cfg.noise.level);
    manifest.record(out, &files)?;
    manifest.write(out)?;
    Ok(files)
}

pub fn read_data(path: &Path) -> CliResult<CauchyData> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    read_cauchy_csv(BufReader::new(file)).map_err(|e| CliError::input(path, e))
}

/// Outcome of a reconstruction: the raw map and its peaks with intensity
/// estimates.
pub struct Reconstruction {
    pub result: ImagingResult,
    pub peaks: PeakList,
}

pub fn reconstruct_data(cfg: &ExperimentConfig, data: &CauchyData) -> CliResult<Reconstruction> {
    let dim = cfg.dimension()?;
    if data.dim() != dim {
        return Err(CliError::Config(format!(
            "dim: config says {}D but the data are {}D",
            dim.count(),
            data.dim().count()
        )));
    }
    if (data.wavenumber() - cfg.wavenumber).abs() > 1e-12 * cfg.wavenumber {
        return Err(CliError::Config(format!(
            "wavenumber: config says {} but the data were recorded at {}",
            cfg.wavenumber,
            data.wavenumber()
        )));
    }
    let grid = cfg.grid()?;
    let params = cfg.detection_params()?;
    let result = imaging_map(&grid, data, cfg.detection.p).map_err(|e| CliError::at("grid", e))?;
    let peaks = find_peaks(&result, &params).map_err(|e| CliError::at("detection", e))?;
    let peaks = estimate_intensities(&peaks, &result).map_err(|e| CliError::at("detection", e))?;
    Ok(Reconstruction { result, peaks })
}

/// Writes the indicator grid, the complex functional and the peak list.
pub fn write_reconstruction(cfg: &ExperimentConfig, rec: &Reconstruction, out: &Path) -> CliResult<Vec<PathBuf>> {
    create_dir(out)?;
    let shown = if cfg.detection.normalize_output {
        rec.result.normalized()
    } else {
        rec.result.clone()
    };
    let dim = rec.result.grid().dim();
    Ok(vec![
        write_file(out, INDICATOR_FILE, |w| write_indicator_binary(&shown, w))?,
        write_file(out, IMAGING_FILE, |w| write_imaging_csv(&shown, w))?,
        write_file(out, PEAKS_FILE, |w| write_peaks_jsonl(&rec.peaks, dim, w))?,
    ])
}

pub fn reconstruct(cfg: &ExperimentConfig, data_path: &Path, out: &Path) -> CliResult<Reconstruction> {
    let data = read_data(data_path)?;
    let rec = reconstruct_data(cfg, &data)?;
    let files = write_reconstruction(cfg, &rec, out)?;
    let mut manifest = Manifest::new("reconstruct", &cfg.to_toml_string(), cfg.noise.seed, cfg.noise.level);
    manifest.record(out, &files)?;
    manifest.write(out)?;
    Ok(rec)
}

/// Human-readable peak table.
pub fn peak_table(rec: &Reconstruction) -> String {
    let dim = rec.result.grid().dim().count();
    let max = rec.result.indicator().iter().copied().fold(0.0, f64::max);
    let mut s = String::new();
    if rec.peaks.is_empty() {
        s.push_str("no significant peaks\n");
        return s;
    }
    let _ = writeln!(s, "{:>3}  {:<28} {:>9}  intensity", "#", "location", "|I|^p rel");
    for (i, p) in rec.peaks.peaks.iter().enumerate() {
        let loc: Vec<String> = p.location[..dim].iter().map(|v| format!("{v:.4}")).collect();
        let alpha = p.intensity.map_or("-".to_string(), |a| format!("{:.4}{:+.4}i", a.re, a.im));
        let flag = if p.on_boundary { "  (grid edge)" } else { "" };
        let _ = writeln!(
            s,
            "{:>3}  {:<28} {:>9.4}  {alpha}{flag}",
            i + 1,
            format!("({})", loc.join(", ")),
            p.indicator / max
        );
    }
    s
}
