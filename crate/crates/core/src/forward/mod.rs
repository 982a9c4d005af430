//! Forward model: Cauchy data radiated by point sources and by small-volume
//! sources, plus the relative noise model.

mod green;
mod noise;
mod volume;

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::geometry::{distance, Dim, MeasurementSurface, Point};

pub use green::{Helmholtz, SINGULAR_RELATIVE_RADIUS};
pub use noise::{add_noise, NoiseSpec};
pub use volume::{volume_rule, DEFAULT_QUAD_ORDER};

/// Sources closer than this fraction of the surface radius to the boundary
/// are rejected.
pub const BOUNDARY_MARGIN: f64 = 0.01;

fn check_point(dim: Dim, p: &Point, what: &str) -> Result<()> {
    if p.iter().any(|v| !v.is_finite()) {
        return Err(Error::Config(format!("{what} is not finite")));
    }
    if dim == Dim::Two && p[2] != 0.0 {
        return Err(Error::Config(format!("{what} has a third coordinate in 2D")));
    }
    Ok(())
}

fn check_separation(centers: &[Point], c0: f64) -> Result<()> {
    if !(c0.is_finite() && c0 > 0.0) {
        return Err(Error::Config(format!("minimum separation must be positive, got {c0}")));
    }
    for i in 0..centers.len() {
        for j in i + 1..centers.len() {
            let d = distance(&centers[i], &centers[j]);
            if d < c0 {
                return Err(Error::Config(format!(
                    "sources {i} and {j} are {d} apart, closer than the minimum separation {c0}"
                )));
            }
        }
    }
    Ok(())
}

/// Monopole `alpha * delta_x`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PointSource {
    pub location: Point,
    pub intensity: Complex64,
}

/// Well-separated point sources with nonzero intensities.
#[derive(Clone, Debug, PartialEq)]
pub struct PointSourceSet {
    dim: Dim,
    sources: Vec<PointSource>,
    min_separation: f64,
}

impl PointSourceSet {
    pub fn new(dim: Dim, sources: Vec<PointSource>, min_separation: f64) -> Result<Self> {
        for (i, s) in sources.iter().enumerate() {
            if !(s.intensity.re.is_finite() && s.intensity.im.is_finite()) {
                return Err(Error::Config(format!("intensity of source {i} is not finite")));
            }
            if s.intensity == Complex64::new(0.0, 0.0) {
                return Err(Error::Config(format!("intensity of source {i} is zero")));
            }
        }
        Self::with_any_intensity(dim, sources, min_separation)
    }

    /// Same checks as [`PointSourceSet::new`] except that zero intensities are
    /// allowed (a small-volume source with zero-mean density has a vanishing
    /// point equivalent).
    fn with_any_intensity(dim: Dim, sources: Vec<PointSource>, min_separation: f64) -> Result<Self> {
        for (i, s) in sources.iter().enumerate() {
            check_point(dim, &s.location, &format!("location of source {i}"))?;
        }
        let centers: Vec<Point> = sources.iter().map(|s| s.location).collect();
        check_separation(&centers, min_separation)?;
        Ok(Self {
            dim,
            sources,
            min_separation,
        })
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn sources(&self) -> &[PointSource] {
        &self.sources
    }

    pub fn min_separation(&self) -> f64 {
        self.min_separation
    }

    pub fn len(&self) -> usize {
        self.sources.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sources.is_empty()
    }
}

/// Density of a small-volume source.
#[derive(Clone)]
pub enum Density {
    Constant(Complex64),
    /// `f(x_j + eps w) = value * (1 + gradient . w)` in the scaled
    /// coordinates `w` of `B_j`; the mean over `B_j` is `value`.
    Linear { value: Complex64, gradient: Point },
    /// Arbitrary density evaluated at physical points of `D_j`.
    Custom(Arc<dyn Fn(&Point) -> Complex64 + Send + Sync>),
}

impl Density {
    /// Value at physical point `y`, whose scaled offset from the center is `w`.
    fn eval(&self, y: &Point, w: &Point) -> Complex64 {
        match self {
            Density::Constant(c) => *c,
            Density::Linear { value, gradient } => {
                value * (1.0 + gradient[0] * w[0] + gradient[1] * w[1] + gradient[2] * w[2])
            }
            Density::Custom(f) => f(y),
        }
    }
}

impl fmt::Debug for Density {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Density::Constant(c) => f.debug_tuple("Constant").field(c).finish(),
            Density::Linear { value, gradient } => f
                .debug_struct("Linear")
                .field("value", value)
                .field("gradient", gradient)
                .finish(),
            Density::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

/// `D_j = x_j + eps B_j` with `B_j` a disk (2D) or ball (3D) of radius `radius`.
#[derive(Clone, Debug)]
pub struct SmallVolume {
    pub center: Point,
    pub radius: f64,
    pub density: Density,
}

#[derive(Clone, Debug)]
pub struct SmallVolumeSourceSet {
    dim: Dim,
    epsilon: f64,
    subregions: Vec<SmallVolume>,
    min_separation: f64,
}

impl SmallVolumeSourceSet {
    /// Validates separation (`dist >= c0 > eps (r_i + r_j)`) and smallness
    /// (`eps * max r < c0 / 4`).
    pub fn new(dim: Dim, epsilon: f64, subregions: Vec<SmallVolume>, min_separation: f64) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(Error::Config(format!("epsilon must be positive, got {epsilon}")));
        }
        for (i, s) in subregions.iter().enumerate() {
            check_point(dim, &s.center, &format!("center of subregion {i}"))?;
            if !(s.radius.is_finite() && s.radius > 0.0) {
                return Err(Error::Config(format!(
                    "radius of subregion {i} must be positive, got {}",
                    s.radius
                )));
            }
        }
        let centers: Vec<Point> = subregions.iter().map(|s| s.center).collect();
        check_separation(&centers, min_separation)?;
        for i in 0..subregions.len() {
            for j in i + 1..subregions.len() {
                let reach = epsilon * (subregions[i].radius + subregions[j].radius);
                if !(min_separation > reach) {
                    return Err(Error::Config(format!(
                        "subregions {i} and {j} may overlap: minimum separation {min_separation} <= {reach}"
                    )));
                }
            }
        }
        let max_r = subregions.iter().map(|s| s.radius).fold(0.0, f64::max);
        if !(epsilon * max_r < 0.25 * min_separation) {
            return Err(Error::Config(format!(
                "subregions are not small: eps * max radius = {} must be below c0/4 = {}",
                epsilon * max_r,
                0.25 * min_separation
            )));
        }
        Ok(Self {
            dim,
            epsilon,
            subregions,
            min_separation,
        })
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn subregions(&self) -> &[SmallVolume] {
        &self.subregions
    }

    pub fn min_separation(&self) -> f64 {
        self.min_separation
    }

    /// Same centers, shapes and densities at a different scale.
    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        Self::new(self.dim, epsilon, self.subregions.clone(), self.min_separation)
    }

    /// Quadrature nodes `(y, c)` for `int_{D_j} f(y) g(y) dy ~ sum c g(y)`.
    fn weighted_nodes(&self, index: usize, order: usize) -> Vec<(Point, Complex64)> {
        let s = &self.subregions[index];
        let scale = self.epsilon.powi(self.dim.count() as i32);
        volume_rule(self.dim, s.radius, order)
            .into_iter()
            .map(|(w, weight)| {
                let y = [
                    s.center[0] + self.epsilon * w[0],
                    s.center[1] + self.epsilon * w[1],
                    s.center[2] + self.epsilon * w[2],
                ];
                (y, s.density.eval(&y, &w) * (scale * weight))
            })
            .collect()
    }
}

/// Field and normal derivative sampled on a measurement surface.
#[derive(Clone, Debug, PartialEq)]
pub struct CauchyData {
    surface: MeasurementSurface,
    k: f64,
    u: Vec<Complex64>,
    dnu_u: Vec<Complex64>,
}

impl CauchyData {
    pub fn new(surface: MeasurementSurface, k: f64, u: Vec<Complex64>, dnu_u: Vec<Complex64>) -> Result<Self> {
        if !(k.is_finite() && k > 0.0) {
            return Err(Error::Config(format!("wavenumber must be positive, got {k}")));
        }
        if u.len() != surface.len() || dnu_u.len() != surface.len() {
            return Err(Error::Domain(format!(
                "Cauchy data lengths ({}, {}) do not match the {} surface points",
                u.len(),
                dnu_u.len(),
                surface.len()
            )));
        }
        if u.iter().chain(&dnu_u).any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::Domain("Cauchy data contains non-finite entries".into()));
        }
        Ok(Self { surface, k, u, dnu_u })
    }

    /// All-zero data on `surface`.
    pub fn zeros(surface: MeasurementSurface, k: f64) -> Result<Self> {
        let n = surface.len();
        Self::new(surface, k, vec![Complex64::new(0.0, 0.0); n], vec![Complex64::new(0.0, 0.0); n])
    }

    pub fn surface(&self) -> &MeasurementSurface {
        &self.surface
    }

    pub fn dim(&self) -> Dim {
        self.surface.dim()
    }

    pub fn wavenumber(&self) -> f64 {
        self.k
    }

    pub fn u(&self) -> &[Complex64] {
        &self.u
    }

    pub fn dnu_u(&self) -> &[Complex64] {
        &self.dnu_u
    }

    /// Both components multiplied by `c`.
    pub fn scaled(&self, c: Complex64) -> Self {
        Self {
            surface: self.surface.clone(),
            k: self.k,
            u: self.u.iter().map(|v| v * c).collect(),
            dnu_u: self.dnu_u.iter().map(|v| v * c).collect(),
        }
    }

    /// Elementwise sum with data on the same surface and wavenumber.
    pub fn sum(&self, other: &Self) -> Result<Self> {
        if self.surface != other.surface || self.k != other.k {
            return Err(Error::Domain("cannot add Cauchy data from different setups".into()));
        }
        Ok(Self {
            surface: self.surface.clone(),
            k: self.k,
            u: self.u.iter().zip(&other.u).map(|(a, b)| a + b).collect(),
            dnu_u: self.dnu_u.iter().zip(&other.dnu_u).map(|(a, b)| a + b).collect(),
        })
    }
}

/// Frobenius norm of a complex vector.
pub fn frobenius_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

fn check_setup(dim: Dim, surface: &MeasurementSurface) -> Result<()> {
    if dim != surface.dim() {
        return Err(Error::Domain(format!(
            "sources are {}D but the surface is {}D",
            dim.count(),
            surface.dim().count()
        )));
    }
    Ok(())
}

/// `u = sum_j alpha_j Phi(., x_j)` and its normal derivative on `surface`.
pub fn radiate_points(sources: &PointSourceSet, surface: &MeasurementSurface, k: f64) -> Result<CauchyData> {
    radiate_points_with(sources, surface, k, Execution::default())
}

pub fn radiate_points_with(
    sources: &PointSourceSet,
    surface: &MeasurementSurface,
    k: f64,
    exec: Execution,
) -> Result<CauchyData> {
    check_setup(sources.dim(), surface)?;
    for (i, s) in sources.sources().iter().enumerate() {
        if !surface.contains(&s.location, BOUNDARY_MARGIN) {
            return Err(Error::Domain(format!(
                "source {i} at {:?} is not strictly inside the measurement surface",
                &s.location[..sources.dim().count()]
            )));
        }
    }
    let nodes: Vec<(Point, Complex64)> = sources.sources().iter().map(|s| (s.location, s.intensity)).collect();
    radiate_nodes(&nodes, surface, k, exec)
}

/// Field of `int_D f(y) Phi(x, y) dy`, with each `D_j` integrated by the
/// product Gauss rule of [`volume_rule`] at `quad_order`.
pub fn radiate_small_volumes(
    sources: &SmallVolumeSourceSet,
    surface: &MeasurementSurface,
    k: f64,
    quad_order: usize,
) -> Result<CauchyData> {
    radiate_small_volumes_with(sources, surface, k, quad_order, Execution::default())
}

pub fn radiate_small_volumes_with(
    sources: &SmallVolumeSourceSet,
    surface: &MeasurementSurface,
    k: f64,
    quad_order: usize,
    exec: Execution,
) -> Result<CauchyData> {
    if quad_order < 1 {
        return Err(Error::Config("quadrature order must be at least 1".into()));
    }
    check_setup(sources.dim(), surface)?;
    let scale = surface.scale();
    for (i, s) in sources.subregions().iter().enumerate() {
        let reach = sources.epsilon() * s.radius / scale;
        if !surface.contains(&s.center, BOUNDARY_MARGIN + reach) {
            return Err(Error::Domain(format!(
                "subregion {i} is not strictly inside the measurement surface"
            )));
        }
    }
    let nodes: Vec<(Point, Complex64)> = (0..sources.subregions().len())
        .flat_map(|j| sources.weighted_nodes(j, quad_order))
        .collect();
    radiate_nodes(&nodes, surface, k, exec)
}

fn radiate_nodes(
    nodes: &[(Point, Complex64)],
    surface: &MeasurementSurface,
    k: f64,
    exec: Execution,
) -> Result<CauchyData> {
    let kernel = Helmholtz::new(surface.dim(), k)?;
    let points = surface.points();
    let normals = surface.normals();
    let values = exec.map(surface.len(), |i| -> Result<(Complex64, Complex64)> {
        let mut u = Complex64::new(0.0, 0.0);
        let mut du = Complex64::new(0.0, 0.0);
        for (y, c) in nodes {
            let (g, dg) = kernel.green_pair(&points[i], y, &normals[i])?;
            u += c * g;
            du += c * dg;
        }
        Ok((u, du))
    });
    let (u, dnu_u) = values.into_iter().collect::<Result<Vec<_>>>()?.into_iter().unzip();
    CauchyData::new(surface.clone(), k, u, dnu_u)
}

/// Leading-order point equivalent: `alpha_j = eps^d |B_j| mean(f on D_j)`,
/// i.e. `int_{D_j} f`, computed with the default volume rule.
pub fn asymptotic_point_equivalent(sources: &SmallVolumeSourceSet) -> PointSourceSet {
    asymptotic_point_equivalent_with_order(sources, DEFAULT_QUAD_ORDER)
}

pub fn asymptotic_point_equivalent_with_order(sources: &SmallVolumeSourceSet, order: usize) -> PointSourceSet {
    let order = order.max(1);
    let list = (0..sources.subregions().len())
        .map(|j| PointSource {
            location: sources.subregions()[j].center,
            intensity: sources.weighted_nodes(j, order).iter().map(|(_, c)| c).sum(),
        })
        .collect();
    PointSourceSet::with_any_intensity(sources.dim(), list, sources.min_separation())
        .expect("validated small-volume set yields a valid point set")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::make_circle_boundary;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn point_set_rejects_zero_intensity_and_crowding() {
        let s = |x: f64, a: Complex64| PointSource {
            location: [x, 0.0, 0.0],
            intensity: a,
        };
        assert!(PointSourceSet::new(Dim::Two, vec![s(0.0, c(0.0, 0.0))], 0.1).is_err());
        assert!(PointSourceSet::new(Dim::Two, vec![s(0.0, c(1.0, 0.0)), s(0.05, c(1.0, 0.0))], 0.1).is_err());
        assert!(PointSourceSet::new(Dim::Two, vec![s(0.0, c(1.0, 0.0))], 0.0).is_err());
        assert!(PointSourceSet::new(Dim::Two, vec![s(0.0, c(1.0, 0.0)), s(0.2, c(1.0, 0.0))], 0.1).is_ok());
    }

    #[test]
    fn centered_source_has_rotationally_symmetric_data() {
        let surface = make_circle_boundary([0.0, 0.0], 50.0, 256).unwrap();
        let set = PointSourceSet::new(
            Dim::Two,
            vec![PointSource {
                location: [0.0; 3],
                intensity: c(1.0, 0.0),
            }],
            0.1,
        )
        .unwrap();
        let data = radiate_points(&set, &surface, 20.0).unwrap();
        let expected = c(0.0, 0.25) * crate::specfun::hankel1_0(1000.0).unwrap();
        for u in data.u() {
            assert!((u - expected).norm() < 1e-15, "{u} vs {expected}");
        }
    }

    #[test]
    fn source_outside_is_rejected() {
        let surface = make_circle_boundary([0.0, 0.0], 1.0, 16).unwrap();
        let set = PointSourceSet::new(
            Dim::Two,
            vec![PointSource {
                location: [0.995, 0.0, 0.0],
                intensity: c(1.0, 0.0),
            }],
            0.1,
        )
        .unwrap();
        assert!(matches!(radiate_points(&set, &surface, 1.0), Err(Error::Domain(_))));
    }

    fn disk(center: [f64; 2], density: Density) -> SmallVolume {
        SmallVolume {
            center: [center[0], center[1], 0.0],
            radius: 1.0,
            density,
        }
    }

    #[test]
    fn constant_disk_equivalent_is_area_times_density() {
        let set = SmallVolumeSourceSet::new(
            Dim::Two,
            0.05,
            vec![disk([0.0, 0.0], Density::Constant(c(2.0, -1.0)))],
            1.0,
        )
        .unwrap();
        let eq = asymptotic_point_equivalent(&set);
        let expected = c(2.0, -1.0) * (0.05 * 0.05 * PI);
        assert!((eq.sources()[0].intensity - expected).norm() < 1e-15);
    }

    #[test]
    fn zero_mean_density_has_vanishing_equivalent() {
        let set = SmallVolumeSourceSet::new(
            Dim::Two,
            0.05,
            vec![disk(
                [0.0, 0.0],
                Density::Custom(Arc::new(|y: &Point| Complex64::new(y[0], 0.0))),
            )],
            1.0,
        )
        .unwrap();
        let eq = asymptotic_point_equivalent(&set);
        assert!(eq.sources()[0].intensity.norm() < 1e-18);
    }

    #[test]
    fn zero_density_contributes_nothing() {
        let surface = make_circle_boundary([0.0, 0.0], 5.0, 32).unwrap();
        let one = SmallVolumeSourceSet::new(Dim::Two, 0.05, vec![disk([0.5, 0.0], Density::Constant(c(1.0, 0.5)))], 0.5)
            .unwrap();
        let two = SmallVolumeSourceSet::new(
            Dim::Two,
            0.05,
            vec![
                disk([0.5, 0.0], Density::Constant(c(1.0, 0.5))),
                disk([-0.5, 0.0], Density::Constant(c(0.0, 0.0))),
            ],
            0.5,
        )
        .unwrap();
        let a = radiate_small_volumes(&one, &surface, 3.0, 8).unwrap();
        let b = radiate_small_volumes(&two, &surface, 3.0, 8).unwrap();
        assert_eq!(a.u(), b.u());
        assert_eq!(a.dnu_u(), b.dnu_u());
    }

    #[test]
    fn small_volume_validation() {
        let d = |x: f64| disk([x, 0.0], Density::Constant(c(1.0, 0.0)));
        // overlapping after scaling
        assert!(SmallVolumeSourceSet::new(Dim::Two, 0.2, vec![d(0.0), d(0.3)], 0.3).is_err());
        // not small relative to c0
        assert!(SmallVolumeSourceSet::new(Dim::Two, 0.1, vec![d(0.0), d(1.0)], 0.3).is_err());
        assert!(SmallVolumeSourceSet::new(Dim::Two, 0.05, vec![d(0.0), d(1.0)], 0.3).is_ok());
        assert!(SmallVolumeSourceSet::new(Dim::Two, 0.0, vec![d(0.0)], 0.3).is_err());
    }

    #[test]
    fn quad_order_must_be_positive() {
        let surface = make_circle_boundary([0.0, 0.0], 5.0, 32).unwrap();
        let set = SmallVolumeSourceSet::new(Dim::Two, 0.05, vec![disk([0.0, 0.0], Density::Constant(c(1.0, 0.0)))], 1.0)
            .unwrap();
        assert!(matches!(radiate_small_volumes(&set, &surface, 1.0, 0), Err(Error::Config(_))));
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let surface = crate::geometry::make_sphere_boundary([0.0; 3], 2.0, 4, 8).unwrap();
        let set = PointSourceSet::new(
            Dim::Two,
            vec![PointSource {
                location: [0.0; 3],
                intensity: c(1.0, 0.0),
            }],
            0.1,
        )
        .unwrap();
        assert!(matches!(radiate_points(&set, &surface, 1.0), Err(Error::Domain(_))));
    }
}
