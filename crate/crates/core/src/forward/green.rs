use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{dot, norm, sub, Dim, Point};
use crate::specfun;

/// Points closer than `SINGULAR_RELATIVE_RADIUS * max(1, |x|, |y|)` are
/// treated as coincident by [`Helmholtz::green`] and [`Helmholtz::green_dnu`].
pub const SINGULAR_RELATIVE_RADIUS: f64 = 1e-12;

/// Outgoing free-space Helmholtz kernel at a fixed wavenumber.
///
/// `Phi(x, y) = (i/4) H_0^(1)(k|x-y|)` in 2D and `e^{ik|x-y|} / (4 pi |x-y|)` in 3D.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Helmholtz {
    pub dim: Dim,
    pub k: f64,
}

impl Helmholtz {
    pub fn new(dim: Dim, k: f64) -> Result<Self> {
        if !(k.is_finite() && k > 0.0) {
            return Err(Error::Config(format!("wavenumber must be positive, got {k}")));
        }
        Ok(Self { dim, k })
    }

    fn separation(&self, x: &Point, y: &Point) -> Result<(Point, f64)> {
        let d = sub(x, y);
        let r = norm(&d);
        let scale = 1f64.max(norm(x)).max(norm(y));
        if !(r > SINGULAR_RELATIVE_RADIUS * scale) {
            return Err(Error::Singularity(format!(
                "Green function evaluated at coincident points (|x - y| = {r:e})"
            )));
        }
        Ok((d, r))
    }

    /// `Phi(x, y)`.
    pub fn green(&self, x: &Point, y: &Point) -> Result<Complex64> {
        let (_, r) = self.separation(x, y)?;
        Ok(self.green_radial(r))
    }

    /// Normal derivative of `Phi(., y)` at `x` in direction `nu`.
    pub fn green_dnu(&self, x: &Point, y: &Point, nu: &Point) -> Result<Complex64> {
        let (d, r) = self.separation(x, y)?;
        let (_, dr) = self.green_pair_radial(r);
        Ok(dr * (dot(&d, nu) / r))
    }

    /// `(Phi, dPhi/dnu)` at `x` for a source at `y`.
    pub(crate) fn green_pair(&self, x: &Point, y: &Point, nu: &Point) -> Result<(Complex64, Complex64)> {
        let (d, r) = self.separation(x, y)?;
        let (g, dr) = self.green_pair_radial(r);
        Ok((g, dr * (dot(&d, nu) / r)))
    }

    fn green_radial(&self, r: f64) -> Complex64 {
        let kr = self.k * r;
        match self.dim {
            Dim::Two => {
                let [j0, _, y0, _] = specfun::all_orders(kr);
                // (i/4)(J0 + i Y0)
                Complex64::new(-0.25 * y0, 0.25 * j0)
            }
            Dim::Three => Complex64::from_polar(1.0 / (4.0 * PI * r), kr),
        }
    }

    /// `Phi(r)` and its radial derivative `dPhi/dr`.
    fn green_pair_radial(&self, r: f64) -> (Complex64, Complex64) {
        let k = self.k;
        let kr = k * r;
        match self.dim {
            Dim::Two => {
                let [j0, j1, y0, y1] = specfun::all_orders(kr);
                // d/dr (i/4) H_0(kr) = -(ik/4) H_1(kr) = (k/4)(Y1 - i J1)
                (
                    Complex64::new(-0.25 * y0, 0.25 * j0),
                    Complex64::new(0.25 * k * y1, -0.25 * k * j1),
                )
            }
            Dim::Three => {
                let g = Complex64::from_polar(1.0 / (4.0 * PI * r), kr);
                (g, g * Complex64::new(-1.0 / r, k))
            }
        }
    }

    /// `Im Phi(x, z)`: `J_0(k|x-z|)/4` in 2D, `k j_0(k|x-z|) / (4 pi)` in 3D.
    /// Entire in both arguments.
    pub fn im_green(&self, x: &Point, z: &Point) -> f64 {
        let kr = self.k * norm(&sub(x, z));
        match self.dim {
            Dim::Two => 0.25 * specfun::j0_j1(kr).0,
            Dim::Three => self.k / (4.0 * PI) * specfun::sph_j0(kr),
        }
    }

    /// Normal derivative of `Im Phi(., z)` at `x`; zero when `x = z`.
    pub fn im_green_dnu(&self, x: &Point, z: &Point, nu: &Point) -> f64 {
        self.im_green_pair(x, z, nu).1
    }

    /// `Im Phi(x, z)` at the coincident point: `1/4` in 2D, `k/(4 pi)` in 3D.
    pub fn im_green_diagonal(&self) -> f64 {
        match self.dim {
            Dim::Two => 0.25,
            Dim::Three => self.k / (4.0 * PI),
        }
    }

    /// `(Im Phi(x, z), d Im Phi(x, z) / d nu(x))`.
    #[inline]
    pub(crate) fn im_green_pair(&self, x: &Point, z: &Point, nu: &Point) -> (f64, f64) {
        let k = self.k;
        let d = sub(x, z);
        let r = norm(&d);
        let kr = k * r;
        match self.dim {
            Dim::Two => {
                let (j0, j1) = specfun::j0_j1(kr);
                let dnu = if r > 0.0 {
                    -0.25 * k * j1 * (dot(&d, nu) / r)
                } else {
                    0.0
                };
                (0.25 * j0, dnu)
            }
            Dim::Three => {
                let c = k / (4.0 * PI);
                let dnu = if r > 0.0 {
                    c * k * specfun::sph_j0_prime(kr) * (dot(&d, nu) / r)
                } else {
                    0.0
                };
                (c * specfun::sph_j0(kr), dnu)
            }
        }
    }
}
