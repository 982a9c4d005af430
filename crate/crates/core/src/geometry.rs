//! Measurement surfaces (discretized closed boundaries with outward normals
//! and quadrature weights) and rectangular sampling grids.
//!
//! All points are stored as `[f64; 3]`; two-dimensional objects keep the
//! third coordinate at zero.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Point = [f64; 3];

/// Spatial dimension of a problem.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Dim {
    Two,
    Three,
}

impl Dim {
    pub fn count(self) -> usize {
        match self {
            Dim::Two => 2,
            Dim::Three => 3,
        }
    }
}

impl TryFrom<u8> for Dim {
    type Error = String;

    fn try_from(d: u8) -> Result<Self, String> {
        match d {
            2 => Ok(Dim::Two),
            3 => Ok(Dim::Three),
            _ => Err(format!("dimension must be 2 or 3, got {d}")),
        }
    }
}

impl From<Dim> for u8 {
    fn from(d: Dim) -> u8 {
        d.count() as u8
    }
}

/// Lifts a coordinate slice of length 2 or 3 into a `Point`.
pub fn point_from_slice(dim: Dim, coords: &[f64]) -> Result<Point> {
    if coords.len() != dim.count() {
        return Err(Error::Domain(format!(
            "expected {} coordinates, got {}",
            dim.count(),
            coords.len()
        )));
    }
    let mut p = [0.0; 3];
    p[..coords.len()].copy_from_slice(coords);
    Ok(p)
}

#[inline]
pub(crate) fn sub(a: &Point, b: &Point) -> Point {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub(crate) fn dot(a: &Point, b: &Point) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub(crate) fn norm(a: &Point) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn distance(a: &Point, b: &Point) -> f64 {
    norm(&sub(a, b))
}

/// Analytic description of the boundary a surface was sampled from.
#[derive(Clone, Debug, PartialEq)]
pub enum SurfaceShape {
    Circle { center: Point, radius: f64 },
    Sphere { center: Point, radius: f64 },
    /// Surface assembled from caller-supplied points; containment checks are
    /// the caller's responsibility.
    Custom,
}

/// Discretized closed measurement boundary.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementSurface {
    dim: Dim,
    shape: SurfaceShape,
    points: Vec<Point>,
    normals: Vec<Point>,
    weights: Vec<f64>,
}

impl MeasurementSurface {
    /// Builds a surface from raw nodes. This is the hook for boundaries other
    /// than circles and spheres.
    pub fn from_parts(
        dim: Dim,
        points: Vec<Point>,
        normals: Vec<Point>,
        weights: Vec<f64>,
    ) -> Result<Self> {
        Self::checked(dim, SurfaceShape::Custom, points, normals, weights)
    }

    fn checked(
        dim: Dim,
        shape: SurfaceShape,
        points: Vec<Point>,
        normals: Vec<Point>,
        weights: Vec<f64>,
    ) -> Result<Self> {
        if points.len() != normals.len() || points.len() != weights.len() {
            return Err(Error::Config(format!(
                "surface arrays differ in length: {} points, {} normals, {} weights",
                points.len(),
                normals.len(),
                weights.len()
            )));
        }
        if points.is_empty() {
            return Err(Error::Config("surface has no points".into()));
        }
        for (i, ((p, n), w)) in points.iter().zip(&normals).zip(&weights).enumerate() {
            if p.iter().chain(n).any(|v| !v.is_finite()) {
                return Err(Error::Config(format!("surface node {i} is not finite")));
            }
            if dim == Dim::Two && (p[2] != 0.0 || n[2] != 0.0) {
                return Err(Error::Config(format!(
                    "surface node {i} has a third coordinate in a 2D surface"
                )));
            }
            if (norm(n) - 1.0).abs() > 1e-12 {
                return Err(Error::Config(format!("normal {i} is not a unit vector")));
            }
            if !(w.is_finite() && *w > 0.0) {
                return Err(Error::Config(format!("weight {i} = {w} is not positive")));
            }
        }
        Ok(Self {
            dim,
            shape,
            points,
            normals,
            weights,
        })
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn shape(&self) -> &SurfaceShape {
        &self.shape
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn normals(&self) -> &[Point] {
        &self.normals
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Total measure (length or area) of the discretized boundary.
    pub fn measure(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Largest distance between the shape center and a node; the surface
    /// diameter is twice this for circles and spheres.
    pub fn scale(&self) -> f64 {
        match self.shape {
            SurfaceShape::Circle { radius, .. } | SurfaceShape::Sphere { radius, .. } => radius,
            SurfaceShape::Custom => self.points.iter().map(norm).fold(0.0, f64::max),
        }
    }

    /// Whether `x` lies inside the boundary with at least `margin` (a fraction
    /// of the radius) to spare. Custom surfaces always answer `true`.
    pub fn contains(&self, x: &Point, margin: f64) -> bool {
        match &self.shape {
            SurfaceShape::Circle { center, radius } | SurfaceShape::Sphere { center, radius } => {
                distance(x, center) < (1.0 - margin) * radius
            }
            SurfaceShape::Custom => true,
        }
    }
}

/// `m` equi-angular nodes on a circle with equal trapezoidal weights `2 pi R / m`.
pub fn make_circle_boundary(center: [f64; 2], radius: f64, m: usize) -> Result<MeasurementSurface> {
    if m < 3 {
        return Err(Error::Config(format!(
            "circle boundary needs at least 3 points, got {m}"
        )));
    }
    if !(radius.is_finite() && radius > 0.0) {
        return Err(Error::Config(format!("circle radius must be positive, got {radius}")));
    }
    let c = [center[0], center[1], 0.0];
    let w = 2.0 * PI * radius / m as f64;
    let mut points = Vec::with_capacity(m);
    let mut normals = Vec::with_capacity(m);
    for i in 0..m {
        let theta = 2.0 * PI * i as f64 / m as f64;
        let (s, co) = theta.sin_cos();
        normals.push([co, s, 0.0]);
        points.push([c[0] + radius * co, c[1] + radius * s, 0.0]);
    }
    MeasurementSurface::checked(
        Dim::Two,
        SurfaceShape::Circle { center: c, radius },
        points,
        normals,
        vec![w; m],
    )
}

/// Latitude-longitude product rule on a sphere: Gauss-Legendre nodes in
/// `cos(theta)` and `n_phi` uniform longitudes.
pub fn make_sphere_boundary(
    center: [f64; 3],
    radius: f64,
    n_theta: usize,
    n_phi: usize,
) -> Result<MeasurementSurface> {
    if n_theta < 2 || n_phi < 3 {
        return Err(Error::Config(format!(
            "sphere boundary needs n_theta >= 2 and n_phi >= 3, got {n_theta} x {n_phi}"
        )));
    }
    if !(radius.is_finite() && radius > 0.0) {
        return Err(Error::Config(format!("sphere radius must be positive, got {radius}")));
    }
    let (nodes, gl_weights) = gauss_legendre(n_theta);
    let dphi = 2.0 * PI / n_phi as f64;
    let n = n_theta * n_phi;
    let mut points = Vec::with_capacity(n);
    let mut normals = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for (&ct, &gw) in nodes.iter().zip(&gl_weights) {
        let st = (1.0 - ct * ct).sqrt();
        for j in 0..n_phi {
            let (sp, cp) = (j as f64 * dphi).sin_cos();
            let nrm = [st * cp, st * sp, ct];
            points.push([
                center[0] + radius * nrm[0],
                center[1] + radius * nrm[1],
                center[2] + radius * nrm[2],
            ]);
            normals.push(nrm);
            weights.push(radius * radius * gw * dphi);
        }
    }
    MeasurementSurface::checked(
        Dim::Three,
        SurfaceShape::Sphere { center, radius },
        points,
        normals,
        weights,
    )
}

/// Gauss-Legendre nodes (ascending) and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_n.
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    (p1, nf * (x * p1 - p0) / (x * x - 1.0))
}

/// Closed, uniformly spaced box of sampling points.
///
/// Points are ordered row-major with the first axis varying fastest:
/// `index = ix + nx * (iy + ny * iz)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SamplingGrid {
    dim: Dim,
    lower: Point,
    upper: Point,
    resolution: [usize; 3],
}

/// Uniform grid over `[lower, upper]` including both corners.
pub fn make_sampling_grid(lower: &[f64], upper: &[f64], resolution: &[usize]) -> Result<SamplingGrid> {
    let dim = match lower.len() {
        2 => Dim::Two,
        3 => Dim::Three,
        n => return Err(Error::Config(format!("grid corners must have 2 or 3 coordinates, got {n}"))),
    };
    if upper.len() != lower.len() || resolution.len() != lower.len() {
        return Err(Error::Config(
            "grid corners and resolution must have the same dimension".into(),
        ));
    }
    for a in 0..lower.len() {
        if !(lower[a].is_finite() && upper[a].is_finite()) {
            return Err(Error::Config(format!("grid corner on axis {a} is not finite")));
        }
        if lower[a] >= upper[a] {
            return Err(Error::Config(format!(
                "grid box is inverted on axis {a}: lower {} >= upper {}",
                lower[a], upper[a]
            )));
        }
        if resolution[a] < 2 {
            return Err(Error::Config(format!(
                "grid resolution on axis {a} must be at least 2, got {}",
                resolution[a]
            )));
        }
    }
    let mut res = [1; 3];
    res[..resolution.len()].copy_from_slice(resolution);
    Ok(SamplingGrid {
        dim,
        lower: point_from_slice(dim, lower)?,
        upper: point_from_slice(dim, upper)?,
        resolution: res,
    })
}

impl SamplingGrid {
    /// Degenerate one-point grid at `z`.
    pub fn single_point(dim: Dim, z: Point) -> Self {
        Self {
            dim,
            lower: z,
            upper: z,
            resolution: [1; 3],
        }
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn lower(&self) -> &Point {
        &self.lower
    }

    pub fn upper(&self) -> &Point {
        &self.upper
    }

    /// Resolution per active axis.
    pub fn resolution(&self) -> &[usize] {
        &self.resolution[..self.dim.count()]
    }

    pub fn len(&self) -> usize {
        self.resolution.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        let n = self.resolution[axis];
        if n < 2 {
            0.0
        } else {
            (self.upper[axis] - self.lower[axis]) / (n - 1) as f64
        }
    }

    pub fn index(&self, ijk: [usize; 3]) -> usize {
        ijk[0] + self.resolution[0] * (ijk[1] + self.resolution[1] * ijk[2])
    }

    pub fn multi_index(&self, index: usize) -> [usize; 3] {
        let nx = self.resolution[0];
        let ny = self.resolution[1];
        [index % nx, (index / nx) % ny, index / (nx * ny)]
    }

    fn coordinate(&self, axis: usize, i: usize) -> f64 {
        let n = self.resolution[axis];
        if n < 2 {
            return self.lower[axis];
        }
        if i == n - 1 {
            return self.upper[axis];
        }
        let t = i as f64 / (n - 1) as f64;
        self.lower[axis] + t * (self.upper[axis] - self.lower[axis])
    }

    pub fn point(&self, index: usize) -> Point {
        let ijk = self.multi_index(index);
        [
            self.coordinate(0, ijk[0]),
            self.coordinate(1, ijk[1]),
            self.coordinate(2, ijk[2]),
        ]
    }

    pub fn points(&self) -> impl Iterator<Item = Point> + '_ {
        (0..self.len()).map(|i| self.point(i))
    }

    /// Whether the grid point lies on a face of the box.
    pub fn on_boundary(&self, index: usize) -> bool {
        let ijk = self.multi_index(index);
        (0..self.dim.count()).any(|a| ijk[a] == 0 || ijk[a] + 1 == self.resolution[a])
    }

    /// Row-major indices of the in-grid neighbors (8 in 2D, 26 in 3D for
    /// interior points).
    pub fn neighbors(&self, index: usize) -> impl Iterator<Item = usize> + '_ {
        let ijk = self.multi_index(index);
        let d = self.dim.count();
        let span = move |a: usize| -> std::ops::RangeInclusive<isize> {
            if a < d {
                -1..=1
            } else {
                0..=0
            }
        };
        let res = self.resolution;
        span(2)
            .flat_map(move |dz| span(1).flat_map(move |dy| span(0).map(move |dx| [dx, dy, dz])))
            .filter(|off| *off != [0, 0, 0])
            .filter_map(move |off| {
                let mut n = [0usize; 3];
                for a in 0..3 {
                    let v = ijk[a] as isize + off[a];
                    if v < 0 || v >= res[a] as isize {
                        return None;
                    }
                    n[a] = v as usize;
                }
                Some(n[0] + res[0] * (n[1] + res[1] * n[2]))
            })
    }
}
