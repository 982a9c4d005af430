//! Locating point-like and small-volume sources of the Helmholtz equation
//! from Cauchy data recorded on a closed surface at one frequency.
//!
//! The pipeline is: build a measurement surface ([`geometry`]), synthesize or
//! load Cauchy data ([`forward`], [`formats`]), evaluate the sampling
//! functional on a grid ([`imaging`]) and pick the significant peaks
//! ([`detect`]).

// `!(a > b)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod detect;
pub mod error;
mod exec;
pub mod formats;
pub mod forward;
pub mod geometry;
pub mod imaging;
pub mod specfun;

pub use detect::{estimate_intensities, find_peaks, DetectionParams, Peak, PeakList};
pub use error::{Error, Result};
pub use exec::Execution;
pub use forward::{
    add_noise, radiate_points, radiate_points_with, radiate_small_volumes, radiate_small_volumes_with,
    CauchyData, Density, Helmholtz, NoiseSpec, PointSource, PointSourceSet, SmallVolume,
    SmallVolumeSourceSet,
};
pub use geometry::{
    make_circle_boundary, make_sampling_grid, make_sphere_boundary, Dim, MeasurementSurface, Point,
    SamplingGrid,
};
pub use imaging::{imaging_functional, imaging_map, imaging_map_batch, imaging_map_with, ImagingResult};

pub use num_complex::Complex64;
