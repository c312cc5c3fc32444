//! Seeded field generators: band-limited random fields and Taylor–Green flows.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::spectral::{Field, Grid3, VectorField};

/// Shape of a random spectrum: `|f̂_k| ∝ |k|^{-decay}` inside `|freq| <= max_freq`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Spectrum {
    pub max_freq: usize,
    pub decay: f64,
    pub zero_mean: bool,
}

impl Spectrum {
    /// Flat spectrum on the 2/3-rule band.
    pub fn dealiased(grid: &Grid3) -> Self {
        Self {
            max_freq: grid.n() / 3,
            decay: 0.0,
            zero_mean: false,
        }
    }

    pub fn band(max_freq: usize) -> Self {
        Self {
            max_freq,
            decay: 0.0,
            zero_mean: false,
        }
    }

    pub fn with_decay(mut self, decay: f64) -> Self {
        self.decay = decay;
        self
    }

    pub fn zero_mean(mut self) -> Self {
        self.zero_mean = true;
        self
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random real field with the given spectral envelope, returned in spectral
/// form. White noise is drawn in physical space, so Hermitian symmetry is exact.
pub fn random_scalar(grid: &Grid3, spectrum: Spectrum, rng: &mut impl Rng) -> Field {
    let noise: Vec<f64> = (0..grid.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let white = Field::from_physical(grid, noise).unwrap().to_spectral().unwrap();
    let max = spectrum.max_freq as i64;
    white
        .map_modes(|idx, c| {
            let [i, j, k] = grid.split(idx);
            let f = [grid.frequency(i), grid.frequency(j), grid.frequency(k)];
            if f.iter().any(|x| x.abs() > max) || grid.has_nyquist(idx) {
                return Default::default();
            }
            let k2 = grid.wavenumber_sq(idx);
            if k2 == 0.0 {
                return if spectrum.zero_mean { Default::default() } else { c };
            }
            c * k2.powf(-0.5 * spectrum.decay)
        })
        .unwrap()
}

pub fn random_vector(grid: &Grid3, spectrum: Spectrum, rng: &mut impl Rng) -> VectorField {
    VectorField::new([0, 1, 2].map(|_| random_scalar(grid, spectrum, rng))).unwrap()
}

/// `(sin x cos y cos z, -cos x sin y cos z, 0)` with coordinates rescaled to
/// the box, in spectral form.
pub fn taylor_green(grid: &Grid3, amplitude: f64) -> VectorField {
    let s = 2.0 * std::f64::consts::PI / grid.length();
    VectorField::from_fn(grid, |x, y, z| {
        let (x, y, z) = (s * x, s * y, s * z);
        [
            amplitude * x.sin() * y.cos() * z.cos(),
            -amplitude * x.cos() * y.sin() * z.cos(),
            0.0,
        ]
    })
    .to_spectral()
    .unwrap()
}

/// Taylor–Green pattern with axes permuted `(x,y,z) → (y,z,x)`:
/// `(0, sin y cos z cos x, -cos y sin z cos x)`.
pub fn taylor_green_rotated(grid: &Grid3, amplitude: f64) -> VectorField {
    let s = 2.0 * std::f64::consts::PI / grid.length();
    VectorField::from_fn(grid, |x, y, z| {
        let (x, y, z) = (s * x, s * y, s * z);
        [
            0.0,
            amplitude * y.sin() * z.cos() * x.cos(),
            -amplitude * y.cos() * z.sin() * x.cos(),
        ]
    })
    .to_spectral()
    .unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeded_fields_are_reproducible() {
        let g = Grid3::periodic(8).unwrap();
        let a = random_scalar(&g, Spectrum::dealiased(&g), &mut rng(7));
        let b = random_scalar(&g, Spectrum::dealiased(&g), &mut rng(7));
        assert_eq!(a.spectral().unwrap(), b.spectral().unwrap());
    }

    #[test]
    fn band_limit_and_mean() {
        let g = Grid3::periodic(16).unwrap();
        let f = random_scalar(&g, Spectrum::band(3).zero_mean(), &mut rng(1));
        assert_eq!(f.dealias().unwrap().sub(&f).unwrap().max_abs(), 0.0);
        assert_eq!(f.mean(), 0.0);
        assert!(f.l2_norm() > 0.0);
    }

    #[test]
    fn taylor_green_energy() {
        let g = Grid3::periodic(16).unwrap();
        let u = taylor_green(&g, 1.0);
        let pi3 = std::f64::consts::PI.powi(3);
        assert!((0.5 * u.norm_sq() - pi3).abs() < 1e-11);
        let b = taylor_green_rotated(&g, 1.0);
        assert!((0.5 * b.norm_sq() - pi3).abs() < 1e-11);
    }
}
