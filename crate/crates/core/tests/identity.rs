//! The functional of radiated data equals `sum_j alpha_j Im Phi(x_j, z)` up
//! to quadrature error, and inherits the `t^{-1/2}` decay of `J_0`.

use helmsrc::imaging::imaging_functional;
use helmsrc::{
    imaging_map, make_circle_boundary, make_sampling_grid, make_sphere_boundary, radiate_points, Dim, Helmholtz,
    PointSource, PointSourceSet,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_sources(dim: Dim, n: usize, seed: u64) -> PointSourceSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sources = (0..n)
        .map(|_| {
            let mut location = [0.0; 3];
            for c in location.iter_mut().take(dim.count()) {
                *c = rng.random_range(-1.0..1.0);
            }
            PointSource {
                location,
                intensity: Complex64::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)),
            }
        })
        .collect();
    PointSourceSet::new(dim, sources, 1e-3).unwrap()
}

fn identity_residual(dim: Dim, sources: &PointSourceSet, data: &helmsrc::CauchyData, grid: &helmsrc::SamplingGrid) -> f64 {
    let kernel = Helmholtz::new(dim, data.wavenumber()).unwrap();
    let map = imaging_map(grid, data, 1.0).unwrap();
    let alpha_max = sources.sources().iter().map(|s| s.intensity.norm()).fold(0.0, f64::max);
    grid.points()
        .zip(map.values())
        .map(|(z, v)| {
            let exact: Complex64 = sources.sources().iter().map(|s| s.intensity * kernel.im_green(&s.location, &z)).sum();
            (v - exact).norm() / alpha_max
        })
        .fold(0.0, f64::max)
}

#[test]
fn identity_on_a_resolved_circle() {
    let surface = make_circle_boundary([0.0, 0.0], 3.0, 256).unwrap();
    let grid = make_sampling_grid(&[-1.0, -1.0], &[1.0, 1.0], &[50, 50]).unwrap();
    for seed in 0..3 {
        let sources = random_sources(Dim::Two, 3, seed);
        let data = radiate_points(&sources, &surface, 1.0).unwrap();
        let res = identity_residual(Dim::Two, &sources, &data, &grid);
        assert!(res <= 1e-8, "seed {seed}: {res:e}");
    }
}

#[test]
fn identity_on_a_resolved_sphere() {
    let surface = make_sphere_boundary([0.0; 3], 3.0, 64, 128).unwrap();
    let grid = make_sampling_grid(&[-1.0; 3], &[1.0; 3], &[9, 9, 9]).unwrap();
    let sources = random_sources(Dim::Three, 3, 7);
    let data = radiate_points(&sources, &surface, 1.0).unwrap();
    let res = identity_residual(Dim::Three, &sources, &data, &grid);
    assert!(res <= 1e-6, "{res:e}");
}

#[test]
fn single_unit_source_at_the_origin() {
    let surface = make_circle_boundary([0.0, 0.0], 3.0, 256).unwrap();
    let sources = PointSourceSet::new(
        Dim::Two,
        vec![PointSource { location: [0.0; 3], intensity: Complex64::new(1.0, 0.0) }],
        0.1,
    )
    .unwrap();
    let data = radiate_points(&sources, &surface, 1.0).unwrap();
    let kernel = Helmholtz::new(Dim::Two, 1.0).unwrap();
    let grid = make_sampling_grid(&[-1.0, -1.0], &[1.0, 1.0], &[21, 21]).unwrap();
    for z in grid.points() {
        let v = imaging_functional(&z, &data).unwrap();
        assert!((v - kernel.im_green(&[0.0; 3], &z)).norm() < 1e-8);
    }
}

/// Slope of the least-squares line through `(ln t, ln |I|)` at the local
/// maxima of `|I|` along a ray.
fn envelope_slope(k: f64, m: usize, t_lo: f64, t_hi: f64) -> f64 {
    let surface = make_circle_boundary([0.0, 0.0], 3.0, m).unwrap();
    let sources = PointSourceSet::new(
        Dim::Two,
        vec![PointSource { location: [0.0; 3], intensity: Complex64::new(1.0, 0.0) }],
        0.1,
    )
    .unwrap();
    let data = radiate_points(&sources, &surface, k).unwrap();
    let dir = [0.6, 0.8];
    let step = (t_hi - t_lo) / 8000.0;
    let samples: Vec<(f64, f64)> = (0..=8000)
        .map(|i| {
            let t = t_lo + step * i as f64;
            let v = imaging_functional(&[t * dir[0], t * dir[1], 0.0], &data).unwrap();
            (t, v.norm())
        })
        .collect();
    let peaks: Vec<(f64, f64)> = samples
        .windows(3)
        .filter(|w| w[1].1 > w[0].1 && w[1].1 >= w[2].1)
        .map(|w| (w[1].0.ln(), w[1].1.ln()))
        .collect();
    assert!(peaks.len() > 20, "only {} maxima", peaks.len());
    let n = peaks.len() as f64;
    let (sx, sy) = peaks.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (mx, my) = (sx / n, sy / n);
    let (sxy, sxx) = peaks
        .iter()
        .fold((0.0, 0.0), |(a, b), (x, y)| (a + (x - mx) * (y - my), b + (x - mx) * (x - mx)));
    sxy / sxx
}

#[test]
fn envelope_decays_like_inverse_square_root() {
    let lambda = 2.0 * std::f64::consts::PI;
    let slope = envelope_slope(1.0, 1024, 5.0 * lambda, 50.0 * lambda);
    assert!((-0.7..=-0.3).contains(&slope), "slope {slope}");
    assert!((slope + 0.5).abs() < 0.02, "slope {slope}");
}
