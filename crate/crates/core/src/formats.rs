//! File formats.
//!
//! * Surface / grid CSV: one row per node, `x,y[,z][,nx,ny[,nz],weight]`.
//! * Cauchy CSV: a `# helmsrc-cauchy v1 dim=<d> k=<k>` line, a column header,
//!   then one row per boundary node:
//!   `x,y[,z],nx,ny[,nz],weight,re_u,im_u,re_dnu,im_dnu`.
//! * Imaging CSV: `x,y[,z],re_i,im_i,indicator` in grid order, preceded by a
//!   `# helmsrc-imaging v1 ...` line recording `k`, `p` and the normalization flag.
//! * Indicator binary (little endian): magic `HSINDIC1`, `u32` version,
//!   `u32` dim, `u32` dtype tag (1 = f64), `u32` normalized flag, `f64` k,
//!   `f64` p, then per axis `u64` resolution, `f64` lower, `f64` upper,
//!   followed by the indicator values in grid order.
//! * Peak list: JSON lines, one [`PeakRecord`] per peak.
//!
//! Floats are written in Rust's shortest round-trip form, so reading a file
//! back reproduces the values bit for bit.

use std::io::{BufRead, Read, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::detect::{Peak, PeakList};
use crate::error::{Error, Result};
use crate::forward::CauchyData;
use crate::geometry::{point_from_slice, Dim, MeasurementSurface, SamplingGrid};
use crate::imaging::ImagingResult;

pub const CAUCHY_MAGIC: &str = "# helmsrc-cauchy v1";
pub const IMAGING_MAGIC: &str = "# helmsrc-imaging v1";
pub const INDICATOR_MAGIC: &[u8; 8] = b"HSINDIC1";
pub const INDICATOR_VERSION: u32 = 1;
pub const DTYPE_F64: u32 = 1;

const AXES: [&str; 3] = ["x", "y", "z"];
const NORMAL_AXES: [&str; 3] = ["nx", "ny", "nz"];

fn f(v: f64) -> String {
    format!("{v:e}")
}

fn coord_columns(dim: Dim) -> Vec<&'static str> {
    AXES[..dim.count()].to_vec()
}

fn surface_columns(dim: Dim) -> Vec<&'static str> {
    let mut cols = coord_columns(dim);
    cols.extend_from_slice(&NORMAL_AXES[..dim.count()]);
    cols.push("weight");
    cols
}

fn surface_row(surface: &MeasurementSurface, i: usize) -> Vec<String> {
    let d = surface.dim().count();
    let mut row: Vec<String> = surface.points()[i][..d].iter().map(|v| f(*v)).collect();
    row.extend(surface.normals()[i][..d].iter().map(|v| f(*v)));
    row.push(f(surface.weights()[i]));
    row
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(e) => Error::Io(e),
        other => Error::Parse {
            line: 0,
            message: format!("{other:?}"),
        },
    }
}

pub fn write_surface_csv<W: Write>(surface: &MeasurementSurface, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(surface_columns(surface.dim())).map_err(csv_err)?;
    for i in 0..surface.len() {
        out.write_record(surface_row(surface, i)).map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_grid_csv<W: Write>(grid: &SamplingGrid, w: W) -> Result<()> {
    let d = grid.dim().count();
    let mut out = csv::Writer::from_writer(w);
    out.write_record(coord_columns(grid.dim())).map_err(csv_err)?;
    for p in grid.points() {
        out.write_record(p[..d].iter().map(|v| f(*v))).map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_cauchy_csv<W: Write>(data: &CauchyData, mut w: W) -> Result<()> {
    let dim = data.dim();
    writeln!(w, "{CAUCHY_MAGIC} dim={} k={:?}", dim.count(), data.wavenumber())?;
    let mut out = csv::Writer::from_writer(w);
    let mut cols = surface_columns(dim);
    cols.extend(["re_u", "im_u", "re_dnu", "im_dnu"]);
    out.write_record(&cols).map_err(csv_err)?;
    for i in 0..data.surface().len() {
        let mut row = surface_row(data.surface(), i);
        let (u, du) = (data.u()[i], data.dnu_u()[i]);
        row.extend([f(u.re), f(u.im), f(du.re), f(du.im)]);
        out.write_record(&row).map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

fn header_field<'a>(line: &'a str, key: &str) -> Option<&'a str> {
    line.split_whitespace()
        .find_map(|tok| tok.strip_prefix(key).and_then(|v| v.strip_prefix('=')))
}

pub fn read_cauchy_csv<R: BufRead>(mut r: R) -> Result<CauchyData> {
    let mut first = String::new();
    r.read_line(&mut first)?;
    let first = first.trim_end();
    if !first.starts_with(CAUCHY_MAGIC) {
        return Err(Error::parse(1, format!("expected '{CAUCHY_MAGIC}' header, found '{first}'")));
    }
    let dim_value: u8 = header_field(first, "dim")
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| Error::parse(1, "missing or invalid dim"))?;
    let dim = Dim::try_from(dim_value).map_err(|e| Error::parse(1, e))?;
    let k: f64 = header_field(first, "k")
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| Error::parse(1, "missing or invalid k"))?;

    let d = dim.count();
    let width = 2 * d + 5;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(r);
    let headers = reader.headers().map_err(csv_err)?.clone();
    if headers.len() != width {
        return Err(Error::parse(2, format!("expected {width} columns, found {}", headers.len())));
    }
    let (mut points, mut normals, mut weights, mut u, mut du) = (vec![], vec![], vec![], vec![], vec![]);
    for (row, rec) in reader.records().enumerate() {
        // line 1 is the magic header, line 2 the column names
        let line = row as u64 + 3;
        let rec = rec.map_err(|e| Error::parse(line, e.to_string()))?;
        if rec.len() != width {
            return Err(Error::parse(line, format!("expected {width} fields, found {}", rec.len())));
        }
        let vals = rec
            .iter()
            .enumerate()
            .map(|(c, s)| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::parse(line, format!("column '{}': cannot parse '{s}'", &headers[c])))
            })
            .collect::<Result<Vec<f64>>>()?;
        points.push(point_from_slice(dim, &vals[..d])?);
        normals.push(point_from_slice(dim, &vals[d..2 * d])?);
        weights.push(vals[2 * d]);
        u.push(Complex64::new(vals[2 * d + 1], vals[2 * d + 2]));
        du.push(Complex64::new(vals[2 * d + 3], vals[2 * d + 4]));
    }
    let surface = MeasurementSurface::from_parts(dim, points, normals, weights)
        .map_err(|e| Error::parse(0, e.to_string()))?;
    CauchyData::new(surface, k, u, du)
}

pub fn write_imaging_csv<W: Write>(result: &ImagingResult, mut w: W) -> Result<()> {
    let grid = result.grid();
    let d = grid.dim().count();
    writeln!(
        w,
        "{IMAGING_MAGIC} dim={d} k={:?} p={:?} normalized={}",
        result.wavenumber(),
        result.exponent(),
        result.is_normalized()
    )?;
    let mut out = csv::Writer::from_writer(w);
    let mut cols = coord_columns(grid.dim());
    cols.extend(["re_i", "im_i", "indicator"]);
    out.write_record(&cols).map_err(csv_err)?;
    for (i, p) in grid.points().enumerate() {
        let v = result.values()[i];
        let mut row: Vec<String> = p[..d].iter().map(|c| f(*c)).collect();
        row.extend([f(v.re), f(v.im), f(result.indicator()[i])]);
        out.write_record(&row).map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

/// Decoded indicator binary.
#[derive(Clone, Debug, PartialEq)]
pub struct IndicatorGrid {
    pub dim: Dim,
    pub normalized: bool,
    pub k: f64,
    pub p: f64,
    pub resolution: Vec<usize>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub values: Vec<f64>,
}

pub fn write_indicator_binary<W: Write>(result: &ImagingResult, mut w: W) -> Result<()> {
    let grid = result.grid();
    w.write_all(INDICATOR_MAGIC)?;
    for v in [
        INDICATOR_VERSION,
        grid.dim().count() as u32,
        DTYPE_F64,
        u32::from(result.is_normalized()),
    ] {
        w.write_all(&v.to_le_bytes())?;
    }
    w.write_all(&result.wavenumber().to_le_bytes())?;
    w.write_all(&result.exponent().to_le_bytes())?;
    for a in 0..grid.dim().count() {
        w.write_all(&(grid.resolution()[a] as u64).to_le_bytes())?;
        w.write_all(&grid.lower()[a].to_le_bytes())?;
        w.write_all(&grid.upper()[a].to_le_bytes())?;
    }
    for v in result.indicator() {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

fn read_array<const N: usize, R: Read>(r: &mut R) -> Result<[u8; N]> {
    let mut b = [0u8; N];
    r.read_exact(&mut b)?;
    Ok(b)
}

pub fn read_indicator_binary<R: Read>(mut r: R) -> Result<IndicatorGrid> {
    let magic: [u8; 8] = read_array(&mut r)?;
    if &magic != INDICATOR_MAGIC {
        return Err(Error::parse(0, "not an indicator grid file"));
    }
    let mut u32s = [0u32; 4];
    for v in &mut u32s {
        *v = u32::from_le_bytes(read_array(&mut r)?);
    }
    let [version, dim, dtype, normalized] = u32s;
    if version != INDICATOR_VERSION || dtype != DTYPE_F64 {
        return Err(Error::parse(0, format!("unsupported version {version} / dtype {dtype}")));
    }
    let dim = Dim::try_from(dim as u8).map_err(|e| Error::parse(0, e))?;
    let k = f64::from_le_bytes(read_array(&mut r)?);
    let p = f64::from_le_bytes(read_array(&mut r)?);
    let (mut resolution, mut lower, mut upper) = (vec![], vec![], vec![]);
    for _ in 0..dim.count() {
        resolution.push(u64::from_le_bytes(read_array(&mut r)?) as usize);
        lower.push(f64::from_le_bytes(read_array(&mut r)?));
        upper.push(f64::from_le_bytes(read_array(&mut r)?));
    }
    let n: usize = resolution.iter().product();
    let mut values = Vec::with_capacity(n);
    for _ in 0..n {
        values.push(f64::from_le_bytes(read_array(&mut r)?));
    }
    Ok(IndicatorGrid {
        dim,
        normalized: normalized != 0,
        k,
        p,
        resolution,
        lower,
        upper,
        values,
    })
}

/// One line of a peak-list file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeakRecord {
    pub rank: usize,
    pub location: Vec<f64>,
    pub indicator: f64,
    pub re_i: f64,
    pub im_i: f64,
    pub re_alpha: Option<f64>,
    pub im_alpha: Option<f64>,
    pub on_boundary: bool,
}

impl PeakRecord {
    pub fn from_peak(rank: usize, dim: Dim, p: &Peak) -> Self {
        Self {
            rank,
            location: p.location[..dim.count()].to_vec(),
            indicator: p.indicator,
            re_i: p.value.re,
            im_i: p.value.im,
            re_alpha: p.intensity.map(|a| a.re),
            im_alpha: p.intensity.map(|a| a.im),
            on_boundary: p.on_boundary,
        }
    }
}

pub fn write_peaks_jsonl<W: Write>(peaks: &PeakList, dim: Dim, mut w: W) -> Result<()> {
    for (rank, p) in peaks.peaks.iter().enumerate() {
        let rec = PeakRecord::from_peak(rank + 1, dim, p);
        let line = serde_json::to_string(&rec).map_err(|e| Error::Domain(e.to_string()))?;
        writeln!(w, "{line}")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_peaks_jsonl<R: BufRead>(r: R) -> Result<Vec<PeakRecord>> {
    r.lines()
        .enumerate()
        .filter(|(_, l)| l.as_ref().map_or(true, |l| !l.trim().is_empty()))
        .map(|(i, line)| {
            let line = line?;
            serde_json::from_str(&line).map_err(|e| Error::parse(i as u64 + 1, e.to_string()))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{make_circle_boundary, make_sampling_grid};

    #[test]
    fn malformed_cauchy_rows_report_their_line() {
        let s = make_circle_boundary([0.0, 0.0], 1.0, 3).unwrap();
        let d = CauchyData::zeros(s, 2.0).unwrap();
        let mut buf = Vec::new();
        write_cauchy_csv(&d, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines: Vec<String> = text.lines().map(String::from).collect();
        lines[3] = lines[3].replacen("0e0", "zero", 1);
        let broken = lines.join("\n");
        match read_cauchy_csv(broken.as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("expected parse error, got {other:?}"),
        }
        assert!(matches!(read_cauchy_csv("x,y\n".as_bytes()), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn surface_csv_layout() {
        let s = make_circle_boundary([0.0, 0.0], 1.0, 4).unwrap();
        let mut buf = Vec::new();
        write_surface_csv(&s, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("x,y,nx,ny,weight"));
        assert_eq!(lines.next(), Some("1e0,0e0,1e0,0e0,1.5707963267948966e0"));
        assert_eq!(text.lines().count(), 5);
    }

    #[test]
    fn indicator_binary_header() {
        let g = make_sampling_grid(&[-1.0, 0.0], &[1.0, 2.0], &[3, 2]).unwrap();
        let values = (0..6).map(|i| Complex64::new(i as f64, 0.0)).collect();
        let r = ImagingResult::from_values(g, values, 20.0, 4.0).unwrap().normalized();
        let mut buf = Vec::new();
        write_indicator_binary(&r, &mut buf).unwrap();
        assert_eq!(buf.len(), 8 + 16 + 16 + 2 * 24 + 6 * 8);
        let back = read_indicator_binary(buf.as_slice()).unwrap();
        assert!(back.normalized);
        assert_eq!(back.resolution, vec![3, 2]);
        assert_eq!(back.values, r.indicator());
    }
}
