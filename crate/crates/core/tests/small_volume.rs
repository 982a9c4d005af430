use helmsrc::forward::{asymptotic_point_equivalent, frobenius_norm};
use helmsrc::{
    make_circle_boundary, make_sphere_boundary, radiate_points, radiate_small_volumes, CauchyData, Density, Dim,
    MeasurementSurface, SmallVolume, SmallVolumeSourceSet,
};
use num_complex::Complex64;

fn discrepancy(a: &CauchyData, b: &CauchyData) -> f64 {
    let du: Vec<Complex64> = a.u().iter().zip(b.u()).map(|(x, y)| x - y).collect();
    let dd: Vec<Complex64> = a.dnu_u().iter().zip(b.dnu_u()).map(|(x, y)| x - y).collect();
    let num = frobenius_norm(&du).hypot(frobenius_norm(&dd));
    num / frobenius_norm(b.u()).hypot(frobenius_norm(b.dnu_u()))
}

fn linear_disks(dim: Dim, eps: f64) -> SmallVolumeSourceSet {
    let (centers, gradient) = match dim {
        Dim::Two => (vec![[0.5, -0.3, 0.0], [-0.6, 0.4, 0.0]], [1.0, -0.5, 0.0]),
        Dim::Three => (vec![[0.5, -0.3, 0.2], [-0.6, 0.4, -0.1]], [1.0, -0.5, 0.3]),
    };
    let subregions = centers
        .into_iter()
        .map(|center| SmallVolume {
            center,
            radius: 1.0,
            density: Density::Linear { value: Complex64::new(1.0, 0.5), gradient },
        })
        .collect();
    SmallVolumeSourceSet::new(dim, eps, subregions, 0.5).unwrap()
}

fn ratios(dim: Dim, surface: &MeasurementSurface, k: f64) -> Vec<f64> {
    let errs: Vec<f64> = [0.1, 0.05, 0.025]
        .iter()
        .map(|&eps| {
            let set = linear_disks(dim, eps);
            let sv = radiate_small_volumes(&set, surface, k, 8).unwrap();
            let pt = radiate_points(&asymptotic_point_equivalent(&set), surface, k).unwrap();
            discrepancy(&sv, &pt)
        })
        .collect();
    errs.windows(2).map(|w| w[1] / w[0]).collect()
}

#[test]
fn point_equivalent_error_is_first_order_in_epsilon_2d() {
    let surface = make_circle_boundary([0.0, 0.0], 3.0, 256).unwrap();
    for r in ratios(Dim::Two, &surface, 1.0) {
        assert!((0.3..=0.7).contains(&r), "ratio {r}");
    }
}

#[test]
fn point_equivalent_error_is_first_order_in_epsilon_3d() {
    let surface = make_sphere_boundary([0.0; 3], 3.0, 32, 64).unwrap();
    for r in ratios(Dim::Three, &surface, 1.0) {
        assert!((0.3..=0.7).contains(&r), "ratio {r}");
    }
}

#[test]
fn uniform_disk_radiates_like_its_center() {
    // Outside a disk, a constant density is indistinguishable from a point
    // source of strength 2 pi rho J1(k rho) / k (Graf's addition theorem).
    let surface = make_circle_boundary([0.0, 0.0], 50.0, 256).unwrap();
    let (k, eps, c) = (20.0, 0.05, Complex64::new(1.2, -0.4));
    let set = SmallVolumeSourceSet::new(
        Dim::Two,
        eps,
        vec![SmallVolume { center: [0.3, 0.2, 0.0], radius: 1.0, density: Density::Constant(c) }],
        0.5,
    )
    .unwrap();
    let sv = radiate_small_volumes(&set, &surface, k, 8).unwrap();
    let strength = c * 2.0 * std::f64::consts::PI * eps * helmsrc::specfun::bessel_j1(k * eps).unwrap() / k;
    let pt = helmsrc::PointSourceSet::new(
        Dim::Two,
        vec![helmsrc::PointSource { location: [0.3, 0.2, 0.0], intensity: strength }],
        0.5,
    )
    .unwrap();
    let reference = radiate_points(&pt, &surface, k).unwrap();
    assert!(discrepancy(&sv, &reference) < 1e-9);
}
