use std::f64::consts::PI;

use crate::geometry::{gauss_legendre, Dim, Point};

/// Default order of the small-volume rule (8 radial x 16 angular nodes in 2D).
pub const DEFAULT_QUAD_ORDER: usize = 8;

/// Product rule on the disk or ball of radius `radius` centered at the origin.
///
/// Radial nodes are Gauss-Legendre in `r` with the Jacobian (`r` or `r^2`)
/// folded into the weights; angles are `2 * order` midpoints in `theta`
/// (2D) or `order` Gauss-Legendre nodes in `cos(theta)` times `2 * order`
/// midpoints in `phi` (3D). Weights are positive and sum to the area
/// (any order) or volume (order >= 2) up to rounding.
pub fn volume_rule(dim: Dim, radius: f64, order: usize) -> Vec<(Point, f64)> {
    let order = order.max(1);
    let (x, w) = gauss_legendre(order);
    let radial: Vec<(f64, f64)> = x
        .iter()
        .zip(&w)
        .map(|(x, w)| {
            let r = 0.5 * radius * (1.0 + x);
            let jac = match dim {
                Dim::Two => r,
                Dim::Three => r * r,
            };
            (r, 0.5 * radius * w * jac)
        })
        .collect();
    let n_az = 2 * order;
    let d_az = 2.0 * PI / n_az as f64;
    let azimuths: Vec<(f64, f64)> = (0..n_az).map(|j| ((j as f64 + 0.5) * d_az).sin_cos()).collect();

    match dim {
        Dim::Two => {
            let mut nodes = Vec::with_capacity(order * n_az);
            for &(r, wr) in &radial {
                for &(s, c) in &azimuths {
                    nodes.push(([r * c, r * s, 0.0], wr * d_az));
                }
            }
            nodes
        }
        Dim::Three => {
            let mut nodes = Vec::with_capacity(order * order * n_az);
            for &(r, wr) in &radial {
                for (&ct, &wt) in x.iter().zip(&w) {
                    let st = (1.0 - ct * ct).sqrt();
                    for &(s, c) in &azimuths {
                        nodes.push(([r * st * c, r * st * s, r * ct], wr * wt * d_az));
                    }
                }
            }
            nodes
        }
    }
}
