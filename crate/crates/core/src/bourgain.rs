//! Discrete space-time Fourier analysis of step sequences `(u_n)`.
//!
//! A sequence of `M` frames is extended by zero to all `n`, and its transform
//! `u~(sigma, k) = tau sum_n u_hat_n(k) e^{i n tau sigma}` is sampled on the
//! dual grid `sigma_j = -pi/tau + 2 pi j / (tau M')`, `M' = M * oversample`.
//! With `sigma_j` written out, the sum is an unnormalized inverse DFT of
//! length `M'` applied to `tau (-1)^n u_hat_n(k)`.
//!
//! Integrals over `sigma` use the trapezoid rule on the dual grid. For `b = 0`
//! this is exact (Parseval); for `b != 0` the error decays like
//! `exp(-c tau M')`, so single-frame inputs need large oversampling.

use crate::error::{Error, Result};
use crate::fft;
use crate::initial_data::randomized_sobolev;
use crate::spectral::{bump, project, FilterSpec, SpectralField, TorusGrid};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

pub const DEFAULT_OVERSAMPLE: usize = 8;

/// Frames `u_0, ..., u_{M-1}` at step `tau` on a common grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    tau: f64,
    fields: Vec<SpectralField>,
}

impl TimeSeries {
    pub fn new(tau: f64, fields: Vec<SpectralField>) -> Result<Self> {
        if !(tau > 0.0 && tau <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "step must lie in (0, 1], got {tau}"
            )));
        }
        let first = fields.first().ok_or_else(|| {
            Error::InvalidParameter("time series needs at least one frame".into())
        })?;
        let grid = first.grid();
        if let Some(f) = fields.iter().find(|f| f.grid() != grid) {
            return Err(Error::GridMismatch {
                left: grid.n(),
                right: f.grid().n(),
            });
        }
        Ok(Self { tau, fields })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn fields(&self) -> &[SpectralField] {
        &self.fields
    }

    pub fn len(&self) -> usize {
        self.fields.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fields.is_empty()
    }

    pub fn grid(&self) -> TorusGrid {
        self.fields[0].grid()
    }

    /// Applies `f(n, u_n)` to every frame.
    pub fn map(&self, f: impl Fn(usize, &SpectralField) -> SpectralField) -> Result<Self> {
        Self::new(
            self.tau,
            self.fields
                .iter()
                .enumerate()
                .map(|(n, u)| f(n, u))
                .collect(),
        )
    }
}

/// Samples of `u~(sigma_j, k)`, stored per spatial mode in grid order.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimeSpectrum {
    tau: f64,
    grid: TorusGrid,
    sigma: Vec<f64>,
    values: Vec<Vec<Complex64>>,
}

impl SpaceTimeSpectrum {
    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    /// Samples along `sigma` for wavenumber `k`.
    pub fn mode(&self, k: i64) -> Option<&[Complex64]> {
        self.grid.index_of(k).map(|i| self.values[i].as_slice())
    }

    /// Spacing of the dual grid, the trapezoid weight.
    pub fn d_sigma(&self) -> f64 {
        2.0 * PI / (self.tau * self.sigma.len() as f64)
    }

    /// `(int sum_k |u~(sigma, k)|^2 dsigma)^{1/2}` by the trapezoid rule.
    pub fn l2_norm(&self) -> f64 {
        let sum: f64 = self.values.iter().flatten().map(|c| c.norm_sqr()).sum();
        (sum * self.d_sigma()).sqrt()
    }
}

pub fn spacetime_transform(ts: &TimeSeries, oversample: usize) -> Result<SpaceTimeSpectrum> {
    if oversample < 1 {
        return Err(Error::InvalidParameter(
            "oversample must be at least 1".into(),
        ));
    }
    let tau = ts.tau;
    let grid = ts.grid();
    let m_dual = ts.len() * oversample;
    let sigma = (0..m_dual)
        .map(|j| -PI / tau + 2.0 * PI * j as f64 / (tau * m_dual as f64))
        .collect();
    let values = (0..grid.n())
        .map(|i| {
            let mut buf = vec![Complex64::new(0.0, 0.0); m_dual];
            for (n, u) in ts.fields.iter().enumerate() {
                let sign = if n % 2 == 0 { tau } else { -tau };
                buf[n] = u.coeffs()[i] * sign;
            }
            fft::inverse(&mut buf);
            buf
        })
        .collect();
    Ok(SpaceTimeSpectrum {
        tau,
        grid,
        sigma,
        values,
    })
}

/// `(e^{i tau sigma} - 1) / tau`.
pub fn d_tau(sigma: f64, tau: f64) -> Complex64 {
    let theta = (tau * sigma).rem_euclid(2.0 * PI);
    (Complex64::from_polar(1.0, theta) - 1.0) / tau
}

/// `<d_tau(sigma)>^2 = 1 + 4 sin^2(tau sigma / 2) / tau^2`, from the reduced angle.
fn d_bracket_sq(theta: f64, tau: f64) -> f64 {
    let s = (0.5 * theta).sin();
    1.0 + 4.0 * s * s / (tau * tau)
}

/// `|| <k>^s <d_tau(sigma - k^2)>^b u~ ||_{L^2 l^2}` by trapezoid quadrature.
pub fn bourgain_norm(ts: &TimeSeries, s: f64, b: f64, oversample: usize) -> Result<f64> {
    if oversample < 4 {
        return Err(Error::InvalidParameter(format!(
            "bourgain norm needs oversample >= 4, got {oversample}"
        )));
    }
    let spec = spacetime_transform(ts, oversample)?;
    Ok(weighted_norm(&spec, s, b))
}

fn weighted_norm(spec: &SpaceTimeSpectrum, s: f64, b: f64) -> f64 {
    let tau = spec.tau;
    let two_pi = 2.0 * PI;
    let sum: f64 = spec
        .values
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let k = spec.grid.wavenumber(i);
            if row.iter().all(|c| c.norm_sqr() == 0.0) {
                return 0.0;
            }
            let kk = (k * k) as f64;
            let shift = (tau * kk).rem_euclid(two_pi);
            let space = (1.0 + kk).powf(s);
            let time: f64 = row
                .iter()
                .zip(&spec.sigma)
                .map(|(c, &sg)| {
                    let theta = (tau * sg - shift).rem_euclid(two_pi);
                    let w = if b == 0.0 {
                        1.0
                    } else {
                        d_bracket_sq(theta, tau).powf(b)
                    };
                    w * c.norm_sqr()
                })
                .sum();
            space * time
        })
        .sum();
    (sum * spec.d_sigma()).sqrt()
}

/// `L^q` norm by trapezoid quadrature on `m` collocation points; `q = inf` is the max.
fn lq_on(u: &SpectralField, q: f64, m: usize) -> f64 {
    let vals = u.values_on(m);
    if q.is_infinite() {
        return vals.iter().map(|v| v.norm()).fold(0.0, f64::max);
    }
    let sum: f64 = vals.iter().map(|v| v.norm().powf(q)).sum();
    (sum * 2.0 * PI / m as f64).powf(1.0 / q)
}

fn lp_of(tau: f64, norms: impl Iterator<Item = f64>, p: f64) -> f64 {
    if p.is_infinite() {
        return norms.fold(0.0, f64::max);
    }
    (tau * norms.map(|x| x.powf(p)).sum::<f64>()).powf(1.0 / p)
}

fn check_exponent(name: &str, p: f64) -> Result<()> {
    if p >= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "{name} must lie in [1, inf], got {p}"
        )))
    }
}

/// `(tau sum_n ||u_n||_{L^q}^p)^{1/p}`, with `f64::INFINITY` meaning a maximum.
pub fn lp_lq_norm(ts: &TimeSeries, p: f64, q: f64) -> Result<f64> {
    check_exponent("p", p)?;
    check_exponent("q", q)?;
    let n = ts.grid().n();
    Ok(lp_of(ts.tau, ts.fields.iter().map(|u| lq_on(u, q, n)), p))
}

/// `max_n ||u_n||_{H^s}`.
pub fn linf_sobolev(ts: &TimeSeries, s: f64) -> f64 {
    ts.fields
        .iter()
        .map(|u| crate::spectral::sobolev_norm(u, s))
        .fold(0.0, f64::max)
}

/// Smooth time cutoff, one on `[1/2, 3/2]` and zero outside `(0, 2)`.
pub fn time_cutoff(t: f64) -> f64 {
    bump(2.0 * t - 2.0)
}

/// `u_n = eta(n tau) e^{i n tau d^2} f` for `n = 0 .. ceil(2 / tau)`.
pub fn free_flow_series(f: &SpectralField, tau: f64) -> Result<TimeSeries> {
    let frames = (2.0 / tau).ceil() as usize + 1;
    let fields = (0..frames)
        .map(|n| {
            let t = n as f64 * tau;
            let eta = time_cutoff(t);
            f.map_modes(|k, c| {
                c * Complex64::from_polar(eta, -(t * (k * k) as f64).rem_euclid(2.0 * PI))
            })
        })
        .collect();
    TimeSeries::new(tau, fields)
}

/// `||Pi_K u_n||_{l^4 L^4} / ((K tau^{1/2})^{1/2} ||u_n||_{X^{0,3/8}})`, or
/// `None` when the denominator vanishes. The `L^4` integrals use a grid large
/// enough to be exact for the filtered band.
pub fn l4_ratio(ts: &TimeSeries, k_cut: f64, oversample: usize) -> Result<Option<f64>> {
    let rhs = bourgain_norm(ts, 0.0, 0.375, oversample)?;
    if rhs == 0.0 {
        return Ok(None);
    }
    let filter = FilterSpec::new(k_cut)?;
    let m = quadrature_points(ts.grid().n(), k_cut);
    let lhs = lp_of(
        ts.tau,
        ts.fields
            .iter()
            .map(|u| lq_on(&project(u, &filter), 4.0, m)),
        4.0,
    );
    Ok(Some(lhs / ((k_cut * ts.tau.sqrt()).sqrt() * rhs)))
}

/// Smallest power of two at least `n` that exceeds the degree `8K` of `|Pi_K u|^4`.
fn quadrature_points(n: usize, k_cut: f64) -> usize {
    let need = (8.0 * k_cut).ceil() as usize + 1;
    need.next_power_of_two().max(n)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct L4Record {
    pub tau: f64,
    #[serde(rename = "K")]
    pub k: f64,
    pub max_ratio: Option<f64>,
    pub median_ratio: Option<f64>,
    pub skipped: usize,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct L4Report {
    pub records: Vec<L4Record>,
    /// Largest factor by which the max ratio grows between successive steps.
    pub max_growth: Option<f64>,
    /// True when `max_growth <= 2`.
    pub stable: bool,
}

/// Grid used for the random ensembles at cutoff `K`: covers the filter band.
pub fn ensemble_grid(k_cut: f64) -> Result<TorusGrid> {
    let need = (4.0 * k_cut).ceil() as usize;
    TorusGrid::new(need.next_power_of_two().max(16))
}

/// `round(1/tau)` frames of unit-norm `randomized_sobolev(s)` data.
pub fn random_series(tau: f64, grid: TorusGrid, s: f64, seed: u64) -> Result<TimeSeries> {
    let frames = (1.0 / tau).round().max(1.0) as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let fields = (0..frames)
        .map(|_| randomized_sobolev(s, rng.gen(), grid))
        .collect::<Result<Vec<_>>>()?;
    TimeSeries::new(tau, fields)
}

/// Empirical check of the `l^4 L^4` bound for filtered sequences on random
/// ensembles of frames with regularity `s`.
pub fn check_l4_estimate(
    ensemble_size: usize,
    taus: &[f64],
    k_rule: &(dyn Fn(f64) -> f64 + Sync),
    s: f64,
    seed: u64,
) -> Result<L4Report> {
    check_l4_estimate_with(
        ensemble_size,
        taus,
        k_rule,
        seed,
        &|tau, grid, member_seed| random_series(tau, grid, s, member_seed),
    )
}

/// As [`check_l4_estimate`] with a caller-supplied ensemble generator.
pub fn check_l4_estimate_with(
    ensemble_size: usize,
    taus: &[f64],
    k_rule: &(dyn Fn(f64) -> f64 + Sync),
    seed: u64,
    sampler: &(dyn Fn(f64, TorusGrid, u64) -> Result<TimeSeries> + Sync),
) -> Result<L4Report> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut records = Vec::with_capacity(taus.len());
    for &tau in taus {
        let k = k_rule(tau);
        if !(k >= tau.powf(-0.5) * (1.0 - 1e-12)) {
            return Err(Error::InvalidParameter(format!(
                "cutoff {k} below tau^(-1/2) at tau = {tau}"
            )));
        }
        let grid = ensemble_grid(k)?;
        let seeds: Vec<u64> = (0..ensemble_size).map(|_| rng.gen()).collect();
        let ratios = seeds
            .par_iter()
            .map(|&sd| l4_ratio(&sampler(tau, grid, sd)?, k, 4))
            .collect::<Result<Vec<_>>>()?;
        let skipped = ratios.iter().filter(|r| r.is_none()).count();
        let mut kept: Vec<f64> = ratios.into_iter().flatten().collect();
        kept.sort_by(|a, b| a.total_cmp(b));
        records.push(L4Record {
            tau,
            k,
            max_ratio: kept.last().copied(),
            median_ratio: median(&kept),
            skipped,
            samples: ensemble_size,
        });
    }
    let mut order: Vec<&L4Record> = records.iter().collect();
    order.sort_by(|a, b| b.tau.total_cmp(&a.tau));
    let max_growth = order
        .windows(2)
        .filter_map(|w| Some(w[1].max_ratio? / w[0].max_ratio?))
        .fold(None, |acc: Option<f64>, g| {
            Some(acc.map_or(g, |a| a.max(g)))
        });
    let stable = max_growth.is_none_or(|g| g <= 2.0);
    Ok(L4Report {
        records,
        max_growth,
        stable,
    })
}

fn median(sorted: &[f64]) -> Option<f64> {
    let n = sorted.len();
    match n {
        0 => None,
        _ if n % 2 == 1 => Some(sorted[n / 2]),
        _ => Some(0.5 * (sorted[n / 2 - 1] + sorted[n / 2])),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> TorusGrid {
        TorusGrid::new(n).unwrap()
    }

    fn random_frames(tau: f64, n: usize, frames: usize, seed: u64) -> TimeSeries {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let fields = (0..frames)
            .map(|_| randomized_sobolev(0.5, rng.gen(), grid(n)).unwrap())
            .collect();
        TimeSeries::new(tau, fields).unwrap()
    }

    /// Direct evaluation of the defining finite sum.
    fn direct_transform(ts: &TimeSeries, sigma: f64, k: i64) -> Complex64 {
        ts.fields()
            .iter()
            .enumerate()
            .map(|(n, u)| u.coeff(k) * Complex64::from_polar(ts.tau(), n as f64 * ts.tau() * sigma))
            .sum()
    }

    #[test]
    fn series_validation() {
        assert!(TimeSeries::new(0.1, vec![]).is_err());
        assert!(TimeSeries::new(0.0, vec![SpectralField::zeros(grid(8))]).is_err());
        assert!(TimeSeries::new(1.5, vec![SpectralField::zeros(grid(8))]).is_err());
        let mixed = vec![
            SpectralField::zeros(grid(8)),
            SpectralField::zeros(grid(16)),
        ];
        assert!(TimeSeries::new(0.5, mixed).is_err());
    }

    #[test]
    fn transform_matches_direct_sum() {
        let ts = random_frames(0.1, 16, 7, 2);
        let spec = spacetime_transform(&ts, 3).unwrap();
        assert_eq!(spec.sigma().len(), 21);
        for k in [-5, 0, 3] {
            for (j, &sg) in spec.sigma().iter().enumerate() {
                let d = direct_transform(&ts, sg, k);
                assert!((spec.mode(k).unwrap()[j] - d).norm() < 1e-12);
            }
        }
        assert!(spacetime_transform(&ts, 0).is_err());
    }

    #[test]
    fn single_frame_is_constant_in_sigma() {
        let f = randomized_sobolev(0.0, 1, grid(8)).unwrap();
        let ts = TimeSeries::new(0.25, vec![f.clone()]).unwrap();
        let spec = spacetime_transform(&ts, 5).unwrap();
        for k in -4..4 {
            for c in spec.mode(k).unwrap() {
                assert!((c - f.coeff(k) * 0.25).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn parseval() {
        for (tau, frames, over) in [(0.1, 10, 1), (0.05, 13, 4), (1.0, 3, 2)] {
            let ts = random_frames(tau, 16, frames, 11);
            let lhs = spacetime_transform(&ts, over).unwrap().l2_norm();
            let rhs = lp_lq_norm(&ts, 2.0, 2.0).unwrap();
            assert!((lhs - rhs).abs() <= 1e-10 * rhs, "{lhs} vs {rhs}");
        }
    }

    #[test]
    fn temporal_oscillation_concentrates() {
        let tau = 0.125;
        let frames = 16;
        let j0 = 5;
        let sigma0 = -PI / tau + 2.0 * PI * j0 as f64 / (tau * frames as f64);
        let f = SpectralField::plane_wave(grid(8), 2, Complex64::new(1.0, 0.0)).unwrap();
        let fields = (0..frames)
            .map(|n| f.scale(Complex64::from_polar(1.0, -(n as f64) * tau * sigma0)))
            .collect();
        let spec = spacetime_transform(&TimeSeries::new(tau, fields).unwrap(), 1).unwrap();
        let row = spec.mode(2).unwrap();
        for (j, c) in row.iter().enumerate() {
            let expect = if j == j0 { frames as f64 * tau } else { 0.0 };
            assert!((c - expect).norm() < 1e-12, "j = {j}: {c}");
        }
    }

    #[test]
    fn time_shift_modulates() {
        let tau = 0.1;
        let ts = random_frames(tau, 8, 9, 4);
        let over = 2;
        let m_dual = 18;
        let p = 4;
        let sigma0 = 2.0 * PI * p as f64 / (tau * m_dual as f64);
        let shifted = ts
            .map(|n, u| u.scale(Complex64::from_polar(1.0, -(n as f64) * tau * sigma0)))
            .unwrap();
        let a = spacetime_transform(&ts, over).unwrap();
        let b = spacetime_transform(&shifted, over).unwrap();
        for k in -3..4 {
            let (ra, rb) = (a.mode(k).unwrap(), b.mode(k).unwrap());
            for j in 0..m_dual {
                assert!((rb[(j + p) % m_dual] - ra[j]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn d_tau_examples() {
        assert_eq!(d_tau(0.0, 0.3), Complex64::new(0.0, 0.0));
        assert!(d_tau(2.0 * PI / 0.3, 0.3).norm() < 1e-12);
        assert!((d_tau(PI, 1.0) - Complex64::new(-2.0, 0.0)).norm() < 1e-15);
        for &(sg, tau) in &[(0.7, 0.1), (13.0, 0.01), (-4.0, 0.5)] {
            let want = 2.0 * (sg * tau / 2.0_f64).sin().abs() / tau;
            assert!((d_tau(sg, tau).norm() - want).abs() < 1e-10);
        }
    }

    #[test]
    fn b_zero_matches_l2() {
        let ts = random_frames(0.05, 16, 20, 8);
        let a = bourgain_norm(&ts, 0.0, 0.0, 4).unwrap();
        let b = lp_lq_norm(&ts, 2.0, 2.0).unwrap();
        assert!((a - b).abs() <= 1e-8 * b);
        assert!(bourgain_norm(&ts, 0.0, 0.5, 3).is_err());
    }

    /// Composite Gauss-Legendre quadrature of `<d_tau(sigma)>^{2b}` over one period.
    fn period_integral(tau: f64, b: f64) -> f64 {
        let nodes = [
            (0.0, 128.0 / 225.0),
            (0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
            (-0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
            (0.906_179_845_938_664, 0.236_926_885_056_189_1),
            (-0.906_179_845_938_664, 0.236_926_885_056_189_1),
        ];
        let (lo, hi) = (-PI / tau, PI / tau);
        let panels = 20_000;
        let h = (hi - lo) / panels as f64;
        let mut acc = 0.0;
        for p in 0..panels {
            let mid = lo + (p as f64 + 0.5) * h;
            for &(x, w) in &nodes {
                let sg = mid + 0.5 * h * x;
                let d = d_tau(sg, tau).norm();
                acc += 0.5 * h * w * (1.0 + d * d).powf(b);
            }
        }
        acc
    }

    #[test]
    fn single_frame_closed_form() {
        for &(tau, s, b) in &[(0.25, 0.0, 0.375), (0.1, 1.0, 0.6), (0.5, 0.5, 1.0)] {
            let f = randomized_sobolev(0.0, 3, grid(16)).unwrap();
            let weighted: f64 = (-8..8)
                .map(|k: i64| (1.0 + (k * k) as f64).powf(s) * f.coeff(k).norm_sqr())
                .sum();
            let want = tau * (weighted * period_integral(tau, b)).sqrt();
            let ts = TimeSeries::new(tau, vec![f]).unwrap();
            let got = bourgain_norm(&ts, s, b, 2048).unwrap();
            assert!(
                (got - want).abs() <= 1e-8 * want,
                "tau {tau}: {got} vs {want}"
            );
        }
    }

    #[test]
    fn oversample_doubling_converges() {
        let ts = random_frames(0.125, 8, 8, 6);
        let a = bourgain_norm(&ts, 0.5, 0.6, 32).unwrap();
        let b = bourgain_norm(&ts, 0.5, 0.6, 64).unwrap();
        assert!((a - b).abs() <= 1e-8 * b);
    }

    #[test]
    fn monotone_in_b() {
        let ts = random_frames(0.1, 16, 10, 9);
        let mut prev = 0.0;
        for b in [0.0, 0.125, 0.375, 0.5, 0.6, 1.0] {
            let v = bourgain_norm(&ts, 0.5, b, 8).unwrap();
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn lp_lq_examples() {
        let c = Complex64::new(0.6, -0.8);
        let tau = 0.25;
        let ts = TimeSeries::new(tau, vec![SpectralField::constant(grid(8), c)]).unwrap();
        for &(p, q) in &[(1.0, 1.0), (2.0, 4.0), (3.0, 2.0)] {
            let want = tau.powf(1.0 / p) * (2.0 * PI).powf(1.0 / q) * c.norm();
            assert!((lp_lq_norm(&ts, p, q).unwrap() - want).abs() < 1e-12);
        }
        assert!((lp_lq_norm(&ts, f64::INFINITY, f64::INFINITY).unwrap() - 1.0).abs() < 1e-12);
        let e1 = SpectralField::plane_wave(grid(16), 1, Complex64::new(1.0, 0.0)).unwrap();
        let one = TimeSeries::new(1.0, vec![e1]).unwrap();
        assert!((lp_lq_norm(&one, 1.0, 4.0).unwrap() - (2.0 * PI).powf(0.25)).abs() < 1e-12);
        assert!(lp_lq_norm(&one, 0.5, 2.0).is_err());
    }

    #[test]
    fn free_flow_bounded_uniformly() {
        let f = randomized_sobolev(1.0, 5, grid(32)).unwrap();
        let s = 0.5;
        let norms: Vec<f64> = (4..=10)
            .map(|e| {
                let tau = 2f64.powi(-e);
                bourgain_norm(&free_flow_series(&f, tau).unwrap(), s, 0.6, 8).unwrap()
            })
            .collect();
        let hs = crate::spectral::sobolev_norm(&f, s);
        let (lo, hi) = norms
            .iter()
            .fold((f64::MAX, 0.0_f64), |(l, h), &x| (l.min(x), h.max(x)));
        assert!(hi / hs < 10.0, "{norms:?}");
        assert!(hi / lo < 1.5, "{norms:?}");
    }

    #[test]
    fn embedding_into_linf_hs() {
        let mut worst: f64 = 0.0;
        for seed in 0..20 {
            for tau in [0.25, 0.0625] {
                let ts = random_frames(tau, 16, (1.0 / tau) as usize, seed);
                let lhs = linf_sobolev(&ts, 0.5);
                let rhs = bourgain_norm(&ts, 0.5, 0.6, 8).unwrap();
                worst = worst.max(lhs / rhs);
            }
        }
        assert!(worst < 5.0, "embedding ratio {worst}");
    }

    #[test]
    fn time_cutoff_shape() {
        assert_eq!(time_cutoff(1.0), 1.0);
        assert_eq!(time_cutoff(0.5), 1.0);
        assert_eq!(time_cutoff(0.0), 0.0);
        assert_eq!(time_cutoff(2.0), 0.0);
        assert!(time_cutoff(0.25) > 0.0 && time_cutoff(0.25) < 1.0);
    }

    #[test]
    fn zero_series_all_skipped() {
        let report = check_l4_estimate_with(
            7,
            &[0.25, 0.0625],
            &|t: f64| t.powf(-0.5),
            1,
            &|tau, g, _| TimeSeries::new(tau, vec![SpectralField::zeros(g); 3]),
        )
        .unwrap();
        for r in &report.records {
            assert_eq!(r.skipped, 7);
            assert_eq!(r.max_ratio, None);
        }
        assert!(report.stable);
    }

    #[test]
    fn l4_rejects_small_cutoff() {
        assert!(check_l4_estimate(2, &[0.0625], &|_| 2.0, 0.0, 1).is_err());
    }

    #[test]
    fn free_flow_sample_ratio() {
        let tau = 0.0625;
        let f = randomized_sobolev(0.0, 2, grid(16)).unwrap();
        let r = l4_ratio(&free_flow_series(&f, tau).unwrap(), 4.0, 4).unwrap();
        assert!(r.unwrap().is_finite());
    }

    #[test]
    fn l4_report_deterministic() {
        let rule = |t: f64| t.powf(-0.5);
        let a = check_l4_estimate(10, &[0.25, 0.0625], &rule, 0.0, 3).unwrap();
        let b = check_l4_estimate(10, &[0.25, 0.0625], &rule, 0.0, 3).unwrap();
        assert_eq!(a, b);
        assert!(a.records.iter().all(|r| r.max_ratio.unwrap().is_finite()));
    }
}
