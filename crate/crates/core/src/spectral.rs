//! Torus grid, band-ordered Fourier fields and the linear operators acting on
//! them: the free Schrödinger flow, smooth frequency filters, the mean-free
//! antiderivative, and Sobolev norms. Nonlinear products are computed on a
//! zero-padded grid so that retained modes are alias-free.
//!
//! Coefficients follow `u_hat(k) = (1/2pi) int_{-pi}^{pi} u(x) e^{-ikx} dx` and
//! are stored for `k = -N/2, ..., N/2-1`. Collocation points are
//! `x_j = -pi + 2 pi j / N`.

use crate::error::{Error, Result};
use crate::fft;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Periodic grid on `[-pi, pi)` with `n` collocation points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TorusGrid {
    n: usize,
}

impl TorusGrid {
    pub fn new(n: usize) -> Result<Self> {
        if n < 4 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(n));
        }
        Ok(Self { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Wavenumber stored at band index `i`.
    #[inline]
    pub fn wavenumber(&self, i: usize) -> i64 {
        i as i64 - (self.n / 2) as i64
    }

    /// Band index of wavenumber `k`, if it is retained.
    #[inline]
    pub fn index_of(&self, k: i64) -> Option<usize> {
        let i = k + (self.n / 2) as i64;
        (0..self.n as i64).contains(&i).then_some(i as usize)
    }

    pub fn wavenumbers(&self) -> impl Iterator<Item = i64> + '_ {
        (0..self.n).map(|i| self.wavenumber(i))
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n)
            .map(|j| -PI + 2.0 * PI * j as f64 / self.n as f64)
            .collect()
    }

    /// Largest wavenumber magnitude that is represented symmetrically.
    pub fn max_symmetric_mode(&self) -> i64 {
        (self.n / 2) as i64 - 1
    }
}

/// The smooth cutoff: one on `[-1, 1]`, zero outside `(-2, 2)`, and the
/// standard `e^{-1/t}` partition of unity in between.
pub fn bump(x: f64) -> f64 {
    fn phi(t: f64) -> f64 {
        if t > 0.0 {
            (-1.0 / t).exp()
        } else {
            0.0
        }
    }
    let a = x.abs();
    if a <= 1.0 {
        1.0
    } else if a >= 2.0 {
        0.0
    } else {
        let p = phi(2.0 - a);
        p / (p + phi(a - 1.0))
    }
}

/// The Fourier multiplier `chi(k / L)^2` at a real cutoff `L`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterSpec {
    cutoff: f64,
}

impl FilterSpec {
    pub fn new(cutoff: f64) -> Result<Self> {
        if !(cutoff.is_finite() && cutoff > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "filter cutoff must be positive and finite, got {cutoff}"
            )));
        }
        Ok(Self { cutoff })
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    #[inline]
    pub fn multiplier(&self, k: i64) -> f64 {
        let c = bump(k as f64 / self.cutoff);
        c * c
    }
}

/// One periodic function, stored as Fourier coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: TorusGrid,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(grid: TorusGrid) -> Self {
        Self {
            grid,
            coeffs: vec![ZERO; grid.n()],
        }
    }

    pub fn from_coeffs(grid: TorusGrid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.n() {
            return Err(Error::GridMismatch {
                left: grid.n(),
                right: coeffs.len(),
            });
        }
        if coeffs
            .iter()
            .any(|c| !(c.re.is_finite() && c.im.is_finite()))
        {
            return Err(Error::NonFinite("field coefficients".into()));
        }
        Ok(Self { grid, coeffs })
    }

    /// Field with a single mode `amplitude * e^{ikx}`.
    pub fn plane_wave(grid: TorusGrid, k: i64, amplitude: Complex64) -> Result<Self> {
        let i = grid.index_of(k).ok_or_else(|| {
            Error::InvalidParameter(format!("mode {k} outside band of N = {}", grid.n()))
        })?;
        let mut f = Self::zeros(grid);
        f.coeffs[i] = amplitude;
        Ok(f)
    }

    pub fn constant(grid: TorusGrid, c: Complex64) -> Self {
        let mut f = Self::zeros(grid);
        f.coeffs[grid.n() / 2] = c;
        f
    }

    /// Interpolating field of collocation values at the grid points.
    pub fn from_values(grid: TorusGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.n() {
            return Err(Error::GridMismatch {
                left: grid.n(),
                right: values.len(),
            });
        }
        Self::from_coeffs(grid, fft::points_to_band(values, grid.n()))
    }

    /// Samples `f` at the collocation points and interpolates.
    pub fn from_fn(grid: TorusGrid, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        let values = grid.points().into_iter().map(f).collect();
        Self::from_values(grid, values)
    }

    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    /// Coefficient of wavenumber `k`; zero outside the band.
    pub fn coeff(&self, k: i64) -> Complex64 {
        self.grid.index_of(k).map_or(ZERO, |i| self.coeffs[i])
    }

    /// The zero mode `u_hat(0)`.
    pub fn mean(&self) -> Complex64 {
        self.coeffs[self.grid.n() / 2]
    }

    /// Collocation values at the grid points.
    pub fn values(&self) -> Vec<Complex64> {
        fft::band_to_points(&self.coeffs, self.grid.n())
    }

    /// Values on a finer grid of `m >= N` points.
    pub fn values_on(&self, m: usize) -> Vec<Complex64> {
        fft::band_to_points(&self.coeffs, m)
    }

    fn check_same_grid(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch {
                left: self.grid.n(),
                right: other.grid.n(),
            });
        }
        Ok(())
    }

    pub(crate) fn map_modes(&self, f: impl Fn(i64, Complex64) -> Complex64) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, &c)| f(self.grid.wavenumber(i), c))
            .collect();
        Self {
            grid: self.grid,
            coeffs,
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_grid(other)?;
        Ok(self.zip_with(other, |a, b| a + b))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_grid(other)?;
        Ok(self.zip_with(other, |a, b| a - b))
    }

    fn zip_with(&self, other: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Self {
        Self {
            grid: self.grid,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            grid: self.grid,
            coeffs: self.coeffs.iter().map(|&a| a * c).collect(),
        }
    }

    /// `self + c * other`.
    pub fn axpy(&self, c: Complex64, other: &Self) -> Result<Self> {
        self.check_same_grid(other)?;
        Ok(self.zip_with(other, |a, b| a + c * b))
    }

    /// Coefficients of the complex conjugate: `conj(u)_hat(k) = conj(u_hat(-k))`.
    pub fn conj(&self) -> Self {
        let n = self.grid.n();
        let mut coeffs = vec![ZERO; n];
        for (i, out) in coeffs.iter_mut().enumerate().skip(1) {
            // band index of -k is n - i for k = i - n/2
            *out = self.coeffs[n - i].conj();
        }
        Self {
            grid: self.grid,
            coeffs,
        }
    }

    /// Spectral derivative.
    pub fn differentiate(&self) -> Self {
        self.map_modes(|k, c| c * Complex64::new(0.0, k as f64))
    }

    /// Largest `|k|` with a nonzero coefficient (zero for the zero field).
    pub fn support_radius(&self) -> i64 {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| c.re != 0.0 || c.im != 0.0)
            .map(|(i, _)| self.grid.wavenumber(i).abs())
            .max()
            .unwrap_or(0)
    }

    /// Same function on a grid of `m` points: zero-padding when `m > N`,
    /// sharp truncation (with the new Nyquist mode zeroed) when `m < N`.
    pub fn resample(&self, m: usize) -> Result<Self> {
        let grid = TorusGrid::new(m)?;
        let mut out = Self::zeros(grid);
        for (i, &c) in self.coeffs.iter().enumerate() {
            let k = self.grid.wavenumber(i);
            if let Some(j) = grid.index_of(k) {
                out.coeffs[j] = c;
            }
        }
        if m < self.grid.n() {
            out.coeffs[0] = ZERO;
        }
        Ok(out)
    }

    pub fn l2_norm(&self) -> f64 {
        sobolev_norm(self, 0.0)
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs
            .iter()
            .all(|c| c.re.is_finite() && c.im.is_finite())
    }

    pub fn to_record(&self) -> FieldRecord {
        FieldRecord {
            format: FieldRecord::FORMAT.to_string(),
            version: FieldRecord::VERSION,
            n: self.grid.n(),
            coeffs: self.coeffs.iter().map(|c| [c.re, c.im]).collect(),
        }
    }

    pub fn from_record(rec: &FieldRecord) -> Result<Self> {
        if rec.format != FieldRecord::FORMAT {
            return Err(Error::Format(format!(
                "unknown field format {:?}",
                rec.format
            )));
        }
        if rec.version != FieldRecord::VERSION {
            return Err(Error::Format(format!(
                "unsupported field record version {}",
                rec.version
            )));
        }
        let grid = TorusGrid::new(rec.n)?;
        let coeffs = rec
            .coeffs
            .iter()
            .map(|&[re, im]| Complex64::new(re, im))
            .collect();
        Self::from_coeffs(grid, coeffs)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&self.to_record())?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Self::from_record(&serde_json::from_str(s)?)
    }
}

/// Versioned on-disk form of a [`SpectralField`]: `n` and one `[re, im]` pair
/// per wavenumber, ordered `-n/2 .. n/2-1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldRecord {
    pub format: String,
    pub version: u32,
    pub n: usize,
    pub coeffs: Vec<[f64; 2]>,
}

impl FieldRecord {
    pub const FORMAT: &'static str = "nls-lowreg/field";
    pub const VERSION: u32 = 1;
}

/// Precomputed free Schrödinger flow `e^{it d_xx}` for one grid and time.
#[derive(Debug, Clone)]
pub struct Propagator {
    grid: TorusGrid,
    phases: Vec<Complex64>,
}

impl Propagator {
    pub fn new(grid: TorusGrid, t: f64) -> Result<Self> {
        if !t.is_finite() {
            return Err(Error::NonFinite("free flow time".into()));
        }
        let phases = grid
            .wavenumbers()
            .map(|k| {
                let theta = (t * (k * k) as f64).rem_euclid(2.0 * PI);
                Complex64::from_polar(1.0, -theta)
            })
            .collect();
        Ok(Self { grid, phases })
    }

    pub fn apply(&self, u: &SpectralField) -> Result<SpectralField> {
        if u.grid != self.grid {
            return Err(Error::GridMismatch {
                left: self.grid.n(),
                right: u.grid.n(),
            });
        }
        Ok(SpectralField {
            grid: u.grid,
            coeffs: u
                .coeffs
                .iter()
                .zip(&self.phases)
                .map(|(c, p)| c * p)
                .collect(),
        })
    }
}

/// `e^{it d_xx} u`: mode `k` is multiplied by `e^{-itk^2}`.
pub fn free_flow(u: &SpectralField, t: f64) -> Result<SpectralField> {
    Propagator::new(u.grid, t)?.apply(u)
}

/// `Pi_L u`.
pub fn project(u: &SpectralField, f: &FilterSpec) -> SpectralField {
    u.map_modes(|k, c| c * f.multiplier(k))
}

/// `Pi_{K+} u = Pi_K u - Pi_{tau^{-1/2}} u`, the intermediate frequencies.
pub fn project_intermediate(u: &SpectralField, k_cut: f64, tau: f64) -> Result<SpectralField> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "step size must be positive, got {tau}"
        )));
    }
    let low = tau.powf(-0.5);
    if k_cut < low {
        return Err(Error::InvalidParameter(format!(
            "cutoff K = {k_cut} below low-frequency cutoff {low}"
        )));
    }
    let high = FilterSpec::new(k_cut)?;
    let low = FilterSpec::new(low)?;
    Ok(u.map_modes(|k, c| c * (high.multiplier(k) - low.multiplier(k))))
}

/// Mean-free antiderivative: mode `k != 0` divided by `ik`, mode 0 dropped.
pub fn inv_dx(u: &SpectralField) -> SpectralField {
    u.map_modes(|k, c| if k == 0 { ZERO } else { c / (I * k as f64) })
}

/// `(2 pi sum_k <k>^{2s} |u_hat(k)|^2)^{1/2}` with `<k> = (1 + k^2)^{1/2}`.
pub fn sobolev_norm(u: &SpectralField, s: f64) -> f64 {
    let sum: f64 = u
        .coeffs
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let k = u.grid.wavenumber(i) as f64;
            (1.0 + k * k).powf(s) * c.norm_sqr()
        })
        .sum();
    (2.0 * PI * sum).sqrt()
}

/// Product of `factors` evaluated on an `m`-point grid and truncated to the
/// band of the factors' grid. Alias-free on retained modes when the summed
/// support radii stay below `m - N/2`.
pub(crate) fn product_on(factors: &[&SpectralField], m: usize) -> Result<SpectralField> {
    let grid = factors[0].grid;
    for f in &factors[1..] {
        factors[0].check_same_grid(f)?;
    }
    let mut acc = factors[0].values_on(m);
    for f in &factors[1..] {
        let vals = f.values_on(m);
        acc.iter_mut().zip(vals).for_each(|(a, b)| *a *= b);
    }
    let mut coeffs = fft::points_to_band(acc, grid.n());
    coeffs[0] = ZERO;
    Ok(SpectralField { grid, coeffs })
}

/// Dealiased product `u v`, evaluated on a `2N` zero-padded grid; the Nyquist
/// mode of the result is zeroed.
pub fn pointwise_product(u: &SpectralField, v: &SpectralField) -> Result<SpectralField> {
    product_on(&[u, v], 2 * u.grid.n())
}

/// Dealiased triple product `u v w` on a `2N` zero-padded grid.
pub fn cubic_product(
    u: &SpectralField,
    v: &SpectralField,
    w: &SpectralField,
) -> Result<SpectralField> {
    product_on(&[u, v, w], 2 * u.grid.n())
}

/// Mode-0 coefficient of `u v`, computed directly from the coefficients.
pub(crate) fn product_mean(u: &SpectralField, v: &SpectralField) -> Complex64 {
    u.coeffs
        .iter()
        .enumerate()
        .map(|(i, &c)| c * v.coeff(-u.grid.wavenumber(i)))
        .sum()
}
