//! Rough randomized initial data and the named experiment datum.
//!
//! Random coefficients come from ChaCha8 seeded with `seed_from_u64`, drawn in
//! the order `k = 0, 1, -1, 2, -2, ...` (real part first). A coarser grid
//! therefore sees the same low modes as a finer one, up to normalization.

use crate::error::{Error, Result};
use crate::spectral::{SpectralField, TorusGrid};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DataKind {
    /// `(a_k + i b_k) <k>^{-(s + 1/2)}` with uniform `a_k, b_k`, unit L2 norm.
    RandomizedSobolev {
        s: f64,
        seed: u64,
    },
    /// Randomized `H^1` part plus `2 sin x / (2 - cos x)`.
    Paper8Datum {
        seed: u64,
    },
    PlaneWave {
        k: i64,
        amplitude: [f64; 2],
    },
    /// Samples `e^{ix} / (2 + cos x)`.
    SmoothProfile,
    /// Coefficients in wavenumber order `-N/2 .. N/2-1`.
    Custom {
        coeffs: Vec<[f64; 2]>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataSpec {
    pub kind: DataKind,
    pub grid: TorusGrid,
}

impl DataSpec {
    pub fn build(&self) -> Result<SpectralField> {
        let grid = self.grid;
        match &self.kind {
            DataKind::RandomizedSobolev { s, seed } => randomized_sobolev(*s, *seed, grid),
            DataKind::Paper8Datum { seed } => paper8_datum(*seed, grid),
            DataKind::PlaneWave { k, amplitude } => {
                SpectralField::plane_wave(grid, *k, Complex64::new(amplitude[0], amplitude[1]))
            }
            DataKind::SmoothProfile => smooth_profile(grid),
            DataKind::Custom { coeffs } => SpectralField::from_coeffs(
                grid,
                coeffs
                    .iter()
                    .map(|&[re, im]| Complex64::new(re, im))
                    .collect(),
            ),
        }
    }

    /// The same datum with its seed replaced, for kinds that carry one.
    pub fn with_seed(&self, seed: u64) -> Self {
        let kind = match &self.kind {
            DataKind::RandomizedSobolev { s, .. } => DataKind::RandomizedSobolev { s: *s, seed },
            DataKind::Paper8Datum { .. } => DataKind::Paper8Datum { seed },
            other => other.clone(),
        };
        Self {
            kind,
            grid: self.grid,
        }
    }
}

/// Wavenumbers in drawing order: `0, 1, -1, 2, -2, ...`, Nyquist excluded.
fn draw_order(grid: TorusGrid) -> impl Iterator<Item = i64> {
    let top = grid.max_symmetric_mode();
    std::iter::once(0).chain((1..=top).flat_map(|k| [k, -k]))
}

pub fn randomized_sobolev(s: f64, seed: u64, grid: TorusGrid) -> Result<SpectralField> {
    if !(s >= 0.0 && s.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "regularity must be nonnegative, got {s}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coeffs = vec![Complex64::new(0.0, 0.0); grid.n()];
    for k in draw_order(grid) {
        let a: f64 = rng.gen_range(-1.0..=1.0);
        let b: f64 = rng.gen_range(-1.0..=1.0);
        let envelope = (1.0 + (k * k) as f64).powf(-(s + 0.5) / 2.0);
        coeffs[grid.index_of(k).unwrap()] = Complex64::new(a, b) * envelope;
    }
    let f = SpectralField::from_coeffs(grid, coeffs)?;
    let norm = f.l2_norm();
    Ok(f.scale(Complex64::new(1.0 / norm, 0.0)))
}

/// `2 sin x / (2 - cos x)` sampled at the collocation points.
pub fn smooth_part(grid: TorusGrid) -> Result<SpectralField> {
    let f = SpectralField::from_fn(grid, |x| {
        Complex64::new(2.0 * x.sin() / (2.0 - x.cos()), 0.0)
    })?;
    Ok(zero_nyquist(f))
}

fn zero_nyquist(f: SpectralField) -> SpectralField {
    let grid = f.grid();
    let mut coeffs = f.into_coeffs();
    coeffs[0] = Complex64::new(0.0, 0.0);
    SpectralField::from_coeffs(grid, coeffs).expect("finite")
}

/// `f_{H^1} + 2 sin x / (2 - cos x)` with `f_{H^1} = randomized_sobolev(1, seed)`.
pub fn paper8_datum(seed: u64, grid: TorusGrid) -> Result<SpectralField> {
    randomized_sobolev(1.0, seed, grid)?.add(&smooth_part(grid)?)
}

/// `e^{ix} / (2 + cos x)`, an analytic profile with geometrically decaying modes.
pub fn smooth_profile(grid: TorusGrid) -> Result<SpectralField> {
    let f = SpectralField::from_fn(grid, |x| Complex64::from_polar(1.0 / (2.0 + x.cos()), x))?;
    Ok(zero_nyquist(f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::sobolev_norm;
    use std::f64::consts::PI;

    fn grid(n: usize) -> TorusGrid {
        TorusGrid::new(n).unwrap()
    }

    #[test]
    fn normalized_and_deterministic() {
        let g = grid(256);
        let f = randomized_sobolev(1.0, 17, g).unwrap();
        assert!((f.l2_norm() - 1.0).abs() < 1e-12);
        assert_eq!(f, randomized_sobolev(1.0, 17, g).unwrap());
        assert_ne!(f, randomized_sobolev(1.0, 18, g).unwrap());
        assert_eq!(f.coeff(-128), Complex64::new(0.0, 0.0));
        assert!(randomized_sobolev(-0.1, 1, g).is_err());
    }

    #[test]
    fn coarse_grid_sees_same_modes() {
        let fine = randomized_sobolev(0.5, 3, grid(64)).unwrap();
        let coarse = randomized_sobolev(0.5, 3, grid(16)).unwrap();
        let ratio = fine.coeff(5) / coarse.coeff(5);
        for k in -7..8 {
            assert!((fine.coeff(k) - coarse.coeff(k) * ratio).norm() < 1e-14);
        }
    }

    #[test]
    fn h2_norm_grows_under_refinement() {
        let mut exponents: Vec<f64> = (0..20u64)
            .map(|seed| {
                let a = sobolev_norm(&randomized_sobolev(1.0, seed, grid(1024)).unwrap(), 2.0);
                let b = sobolev_norm(&randomized_sobolev(1.0, seed, grid(4096)).unwrap(), 2.0);
                (b / a).ln() / 4f64.ln()
            })
            .collect();
        exponents.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let median = 0.5 * (exponents[9] + exponents[10]);
        assert!(median >= 0.4, "median growth exponent {median}");
        let h1 = sobolev_norm(&randomized_sobolev(1.0, 0, grid(1024)).unwrap(), 1.0);
        assert!(h1.is_finite());
    }

    #[test]
    fn lies_in_slightly_weaker_space() {
        let g = grid(4096);
        for seed in 0..100 {
            let f = randomized_sobolev(1.0, seed, g).unwrap();
            assert!(sobolev_norm(&f, 0.9) < 1e3);
        }
    }

    #[test]
    fn smooth_part_decays_geometrically() {
        let f = smooth_part(grid(256)).unwrap();
        let (mut sx, mut sy, mut sxx, mut sxy, mut n) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for k in 1..=30i64 {
            let x = k as f64;
            let y = f.coeff(k).norm().ln();
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
            n += 1.0;
        }
        let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        assert!(slope < -0.2, "slope {slope}");
    }

    #[test]
    fn paper_datum_parseval() {
        let g = grid(512);
        let u = paper8_datum(5, g).unwrap();
        assert_eq!(u, paper8_datum(5, g).unwrap());
        let quad: f64 = u.values().iter().map(|v| v.norm_sqr()).sum::<f64>() * 2.0 * PI / 512.0;
        assert!((u.l2_norm().powi(2) - quad).abs() < 1e-10);
    }

    #[test]
    fn spec_roundtrip() {
        let spec = DataSpec {
            kind: DataKind::Paper8Datum { seed: 4 },
            grid: grid(32),
        };
        let s = serde_json::to_string(&spec).unwrap();
        let back: DataSpec = serde_json::from_str(&s).unwrap();
        assert_eq!(back.build().unwrap(), spec.build().unwrap());
        let pw = DataSpec {
            kind: DataKind::PlaneWave {
                k: 1,
                amplitude: [1.0, 0.0],
            },
            grid: grid(16),
        };
        assert_eq!(pw.build().unwrap().coeff(1), Complex64::new(1.0, 0.0));
    }
}
