use num_complex::Complex64;
use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use super::{frobenius_norm, CauchyData};
use crate::error::{Error, Result};

/// Relative noise level and generator seed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub level: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(level: f64, seed: u64) -> Result<Self> {
        if !(level.is_finite() && level >= 0.0) {
            return Err(Error::Config(format!("noise level must be nonnegative, got {level}")));
        }
        Ok(Self { level, seed })
    }
}

/// Draws `n` entries `a + ib` with `a, b` uniform on `(-1, 1)`.
fn noise_vector(rng: &mut ChaCha20Rng, n: usize) -> Vec<Complex64> {
    let mut draw = || 2.0 * rng.sample::<f64, _>(Open01) - 1.0;
    (0..n)
        .map(|_| {
            let a = draw();
            let b = draw();
            Complex64::new(a, b)
        })
        .collect()
}

fn perturb(clean: &[Complex64], noise: &[Complex64], level: f64) -> Vec<Complex64> {
    let factor = level * frobenius_norm(clean) / frobenius_norm(noise);
    clean.iter().zip(noise).map(|(c, n)| c + n * factor).collect()
}

/// `u + level * N1/|N1|_F * |u|_F` and likewise for `du/dnu` with an
/// independent `N2`.
///
/// The generator is ChaCha20 seeded from `spec.seed`; `N1` is drawn in full
/// before `N2`, real part before imaginary part.
pub fn add_noise(data: &CauchyData, spec: &NoiseSpec) -> Result<CauchyData> {
    if !(spec.level.is_finite() && spec.level >= 0.0) {
        return Err(Error::Config(format!(
            "noise level must be nonnegative, got {}",
            spec.level
        )));
    }
    if spec.level == 0.0 {
        return Ok(data.clone());
    }
    if frobenius_norm(data.u()) == 0.0 || frobenius_norm(data.dnu_u()) == 0.0 {
        return Err(Error::Domain(
            "relative noise needs nonzero data (both components)".into(),
        ));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(spec.seed);
    let n = data.u().len();
    let n1 = noise_vector(&mut rng, n);
    let n2 = noise_vector(&mut rng, n);
    CauchyData::new(
        data.surface().clone(),
        data.wavenumber(),
        perturb(data.u(), &n1, spec.level),
        perturb(data.dnu_u(), &n2, spec.level),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::make_circle_boundary;

    fn sample_data() -> CauchyData {
        let s = make_circle_boundary([0.0, 0.0], 2.0, 40).unwrap();
        let u = (0..40).map(|i| Complex64::new(i as f64, 1.0)).collect();
        let du = (0..40).map(|i| Complex64::new(-1.0, 0.5 * i as f64)).collect();
        CauchyData::new(s, 3.0, u, du).unwrap()
    }

    #[test]
    fn zero_level_is_identity() {
        let d = sample_data();
        assert_eq!(add_noise(&d, &NoiseSpec::new(0.0, 9).unwrap()).unwrap(), d);
    }

    #[test]
    fn relative_level_is_exact() {
        let d = sample_data();
        for level in [0.01, 0.1, 0.5] {
            let noisy = add_noise(&d, &NoiseSpec::new(level, 17).unwrap()).unwrap();
            for (a, b) in [(noisy.u(), d.u()), (noisy.dnu_u(), d.dnu_u())] {
                let diff: Vec<_> = a.iter().zip(b).map(|(x, y)| x - y).collect();
                let rel = frobenius_norm(&diff) / frobenius_norm(b);
                assert!((rel - level).abs() < 1e-12, "{rel} vs {level}");
            }
        }
    }

    #[test]
    fn zero_data_is_rejected() {
        let s = make_circle_boundary([0.0, 0.0], 2.0, 8).unwrap();
        let d = CauchyData::zeros(s, 1.0).unwrap();
        assert!(matches!(add_noise(&d, &NoiseSpec { level: 0.1, seed: 0 }), Err(Error::Domain(_))));
        assert_eq!(add_noise(&d, &NoiseSpec { level: 0.0, seed: 0 }).unwrap(), d);
    }

    #[test]
    fn same_seed_same_bits() {
        let d = sample_data();
        let spec = NoiseSpec::new(0.1, 5).unwrap();
        assert_eq!(add_noise(&d, &spec).unwrap(), add_noise(&d, &spec).unwrap());
        let other = add_noise(&d, &NoiseSpec::new(0.1, 6).unwrap()).unwrap();
        assert_ne!(add_noise(&d, &spec).unwrap(), other);
    }

    #[test]
    fn negative_level_is_rejected() {
        assert!(NoiseSpec::new(-0.1, 0).is_err());
    }
}
