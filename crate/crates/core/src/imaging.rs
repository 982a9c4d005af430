//! The single-integral sampling functional
//!
//! ```text
//! I(z) = int_{dOmega} ( dIm Phi(x, z)/dnu(x) u(x) - Im Phi(x, z) du/dnu(x) ) ds(x)
//! ```
//!
//! discretized with the measurement surface's quadrature weights. For
//! radiated data it equals `sum_j alpha_j Im Phi(x_j, z)`, so `|I|^p` peaks at
//! the sources.

use std::time::{Duration, Instant};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::forward::{CauchyData, Helmholtz};
use crate::geometry::{Dim, Point, SamplingGrid};

/// Functional values and indicator `|I|^p` over a sampling grid.
#[derive(Clone, Debug)]
pub struct ImagingResult {
    grid: SamplingGrid,
    values: Vec<Complex64>,
    k: f64,
    p: f64,
    indicator: Vec<f64>,
    normalized: bool,
    elapsed: Duration,
}

impl ImagingResult {
    /// Assembles a result from precomputed functional values.
    pub fn from_values(grid: SamplingGrid, values: Vec<Complex64>, k: f64, p: f64) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Domain(format!(
                "{} values for a grid of {} points",
                values.len(),
                grid.len()
            )));
        }
        check_exponent(p)?;
        let indicator = values.iter().map(|v| v.norm().powf(p)).collect();
        Ok(Self {
            grid,
            values,
            k,
            p,
            indicator,
            normalized: false,
            elapsed: Duration::ZERO,
        })
    }

    pub fn grid(&self) -> &SamplingGrid {
        &self.grid
    }

    /// `I(z)` in grid order.
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn wavenumber(&self) -> f64 {
        self.k
    }

    pub fn exponent(&self) -> f64 {
        self.p
    }

    /// `|I(z)|^p`, divided by its maximum when [`Self::is_normalized`].
    pub fn indicator(&self) -> &[f64] {
        &self.indicator
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// Wall-clock time spent evaluating the functional.
    pub fn elapsed(&self) -> Duration {
        self.elapsed
    }

    /// Copy with the indicator divided by its maximum (left as is when the
    /// map is identically zero).
    pub fn normalized(&self) -> Self {
        let mut out = self.clone();
        if !self.normalized {
            let max = self.indicator.iter().copied().fold(0.0, f64::max);
            if max > 0.0 {
                out.indicator.iter_mut().for_each(|v| *v /= max);
            }
            out.normalized = true;
        }
        out
    }

    /// Copy with a different exponent; the normalization flag is kept.
    pub fn with_exponent(&self, p: f64) -> Result<Self> {
        let mut out = Self::from_values(self.grid.clone(), self.values.clone(), self.k, p)?;
        out.elapsed = self.elapsed;
        Ok(if self.normalized { out.normalized() } else { out })
    }

    /// Index of the largest indicator value; ties go to the lowest index.
    pub fn argmax(&self) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for (i, &v) in self.indicator.iter().enumerate() {
            if best.is_none_or(|(_, b)| v > b) {
                best = Some((i, v));
            }
        }
        best.map(|(i, _)| i)
    }
}

fn check_exponent(p: f64) -> Result<()> {
    if !(p.is_finite() && p > 0.0) {
        return Err(Error::Config(format!("exponent p must be positive, got {p}")));
    }
    Ok(())
}

fn check_point_dim(dim: Dim, z: &Point) -> Result<()> {
    if z.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("sampling point is not finite".into()));
    }
    if dim == Dim::Two && z[2] != 0.0 {
        return Err(Error::Domain(
            "sampling point has a third coordinate but the data are 2D".into(),
        ));
    }
    Ok(())
}

/// Quadrature sum of the functional at `z` for every data set in `data`
/// (which must share one surface). Summation runs over surface nodes in
/// ascending order.
#[inline]
fn accumulate(kernel: &Helmholtz, z: &Point, data: &[&CauchyData], out: &mut [Complex64]) {
    out.fill(Complex64::new(0.0, 0.0));
    let surface = data[0].surface();
    let points = surface.points();
    let normals = surface.normals();
    let weights = surface.weights();
    for i in 0..points.len() {
        let (g, dg) = kernel.im_green_pair(&points[i], z, &normals[i]);
        let a = weights[i] * dg;
        let b = weights[i] * g;
        for (d, acc) in data.iter().zip(out.iter_mut()) {
            *acc += d.u()[i] * a - d.dnu_u()[i] * b;
        }
    }
}

/// `I(z)` for one sampling point.
pub fn imaging_functional(z: &Point, data: &CauchyData) -> Result<Complex64> {
    check_point_dim(data.dim(), z)?;
    let kernel = Helmholtz::new(data.dim(), data.wavenumber())?;
    let mut out = [Complex64::new(0.0, 0.0)];
    accumulate(&kernel, z, &[data], &mut out);
    Ok(out[0])
}

/// Evaluates the functional on every grid point; the indicator is `|I|^p`,
/// not normalized.
pub fn imaging_map(grid: &SamplingGrid, data: &CauchyData, p: f64) -> Result<ImagingResult> {
    imaging_map_with(grid, data, p, Execution::default())
}

pub fn imaging_map_with(grid: &SamplingGrid, data: &CauchyData, p: f64, exec: Execution) -> Result<ImagingResult> {
    Ok(imaging_map_batch(grid, std::slice::from_ref(data), p, exec)?
        .pop()
        .expect("one data set in, one result out"))
}

/// Images several data sets recorded on the same surface at the same
/// wavenumber (e.g. noise realizations), evaluating the kernel once per
/// grid point and surface node. Each result is bit-identical to a separate
/// [`imaging_map_with`] call.
pub fn imaging_map_batch(
    grid: &SamplingGrid,
    data: &[CauchyData],
    p: f64,
    exec: Execution,
) -> Result<Vec<ImagingResult>> {
    check_exponent(p)?;
    if grid.is_empty() {
        return Err(Error::Config("sampling grid is empty".into()));
    }
    let Some(first) = data.first() else {
        return Ok(Vec::new());
    };
    for d in data {
        if d.surface() != first.surface() || d.wavenumber() != first.wavenumber() {
            return Err(Error::Domain(
                "batched data must share one surface and wavenumber".into(),
            ));
        }
    }
    if grid.dim() != first.dim() {
        return Err(Error::Domain(format!(
            "grid is {}D but the data are {}D",
            grid.dim().count(),
            first.dim().count()
        )));
    }
    let kernel = Helmholtz::new(first.dim(), first.wavenumber())?;
    let refs: Vec<&CauchyData> = data.iter().collect();
    let batch = data.len();

    let start = Instant::now();
    let mut buf = vec![Complex64::new(0.0, 0.0); grid.len() * batch];
    exec.for_each_chunk(&mut buf, batch, |zi, out| {
        accumulate(&kernel, &grid.point(zi), &refs, out);
    });
    let elapsed = start.elapsed();

    (0..batch)
        .map(|b| {
            let values = buf.iter().skip(b).step_by(batch).copied().collect();
            let mut r = ImagingResult::from_values(grid.clone(), values, first.wavenumber(), p)?;
            r.elapsed = elapsed;
            Ok(r)
        })
        .collect()
}
