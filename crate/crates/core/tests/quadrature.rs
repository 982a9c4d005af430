use helmsrc::forward::{
    asymptotic_point_equivalent_with_order, radiate_small_volumes_with, volume_rule,
};
use helmsrc::{make_circle_boundary, make_sphere_boundary, Density, Dim, Execution, SmallVolume, SmallVolumeSourceSet};
use num_complex::Complex64;
use proptest::prelude::*;
use std::f64::consts::PI;

proptest! {
    #[test]
    fn circle_rule_integrates_trigonometric_modes(m in 3usize..400, mode in 1usize..399, r in 0.1f64..60.0) {
        prop_assume!(mode % m != 0);
        let s = make_circle_boundary([0.5, -0.25], r, m).unwrap();
        let sum: Complex64 = s.points().iter().zip(s.weights()).map(|(p, w)| {
            let theta = (p[1] + 0.25).atan2(p[0] - 0.5);
            Complex64::from_polar(*w, mode as f64 * theta)
        }).sum();
        prop_assert!(sum.norm() <= 1e-11 * 2.0 * PI * r);
        prop_assert!((s.measure() - 2.0 * PI * r).abs() <= 1e-12 * 2.0 * PI * r);
    }

    #[test]
    fn sphere_rule_integrates_low_degree_polynomials(a in 0usize..6, b in 0usize..6, c in 0usize..6) {
        let s = make_sphere_boundary([0.0; 3], 1.0, 8, 16).unwrap();
        let sum: f64 = s.points().iter().zip(s.weights())
            .map(|(p, w)| w * p[0].powi(a as i32) * p[1].powi(b as i32) * p[2].powi(c as i32))
            .sum();
        // Exact monomial moments of the unit sphere.
        let exact = if a % 2 == 1 || b % 2 == 1 || c % 2 == 1 {
            0.0
        } else {
            let g = |n: usize| -> f64 { libm_gamma((n as f64 + 1.0) / 2.0) };
            2.0 * g(a) * g(b) * g(c) / libm_gamma((a + b + c + 3) as f64 / 2.0)
        };
        prop_assert!((sum - exact).abs() < 1e-12, "{} vs {}", sum, exact);
    }
}

/// Gamma at positive half-integers.
fn libm_gamma(x: f64) -> f64 {
    if (x - x.round()).abs() < 1e-12 {
        (1..x.round() as usize).map(|v| v as f64).product()
    } else {
        let mut v = PI.sqrt();
        let mut t = 0.5;
        while t < x - 1e-12 {
            v *= t;
            t += 1.0;
        }
        v
    }
}

#[test]
fn volume_rule_reproduces_disk_and_ball_moments() {
    for order in [2, 4, 8] {
        let disk = volume_rule(Dim::Two, 0.5, order);
        let m0: f64 = disk.iter().map(|(_, w)| w).sum();
        let m2: f64 = disk.iter().map(|(p, w)| w * (p[0] * p[0] + p[1] * p[1])).sum();
        assert!((m0 - PI * 0.25).abs() < 1e-14);
        assert!((m2 - PI * 0.5f64.powi(4) / 2.0).abs() < 1e-14);
        let ball = volume_rule(Dim::Three, 0.5, order);
        let v: f64 = ball.iter().map(|(_, w)| w).sum();
        assert!((v - 4.0 / 3.0 * PI * 0.125).abs() < 1e-14);
    }
}

#[test]
fn doubling_the_volume_order_changes_the_data_by_less_than_1e_6() {
    let surface = make_circle_boundary([0.0, 0.0], 50.0, 256).unwrap();
    let set = SmallVolumeSourceSet::new(
        Dim::Two,
        0.05,
        vec![SmallVolume {
            center: [0.4, -0.3, 0.0],
            radius: 1.0,
            density: Density::Custom(std::sync::Arc::new(|y: &[f64; 3]| {
                Complex64::new(1.0 + (3.0 * y[0]).sin(), y[1] * y[1])
            })),
        }],
        0.5,
    )
    .unwrap();
    let a = radiate_small_volumes_with(&set, &surface, 20.0, 8, Execution::Sequential).unwrap();
    let b = radiate_small_volumes_with(&set, &surface, 20.0, 16, Execution::Sequential).unwrap();
    let scale = a.u().iter().map(|v| v.norm()).fold(0.0, f64::max);
    for (x, y) in a.u().iter().zip(b.u()) {
        assert!((x - y).norm() < 1e-6 * scale);
    }
    let p8 = asymptotic_point_equivalent_with_order(&set, 8).sources()[0].intensity;
    let p16 = asymptotic_point_equivalent_with_order(&set, 16).sources()[0].intensity;
    assert!((p8 - p16).norm() < 1e-12 * p16.norm());
}
