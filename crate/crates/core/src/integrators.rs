//! One-step maps for the cubic NLS `i u_t = -u_xx + |u|^2 u`.
//!
//! The twice-filtered integrator splits every state into low frequencies
//! (`|k| <~ tau^{-1/2}`) and intermediate frequencies (`tau^{-1/2} <~ |k| <~ K`).
//! Interactions of one intermediate factor with two low factors are integrated
//! exactly through the closed-form kernels [`kernel_j1`] and [`kernel_j2`];
//! the remaining low-frequency interactions are approximated. Lie splitting,
//! exponential Euler and a Strang reference are provided for comparison.

use crate::error::{Error, Result};
use crate::spectral::{
    inv_dx, product_mean, product_on, FilterSpec, Propagator, SpectralField, TorusGrid,
};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::cell::RefCell;
use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Growth factor of the L2 norm beyond which a run is declared diverged.
pub const BLOWUP_FACTOR: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeId {
    TwiceFiltered,
    SingleFiltered,
    LieSplitting,
    ExponentialEuler,
    StrangReference,
}

impl SchemeId {
    pub const ALL: [SchemeId; 5] = [
        SchemeId::TwiceFiltered,
        SchemeId::SingleFiltered,
        SchemeId::LieSplitting,
        SchemeId::ExponentialEuler,
        SchemeId::StrangReference,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            SchemeId::TwiceFiltered => "twice-filtered",
            SchemeId::SingleFiltered => "single-filtered",
            SchemeId::LieSplitting => "lie-splitting",
            SchemeId::ExponentialEuler => "exponential-euler",
            SchemeId::StrangReference => "strang-reference",
        }
    }

    /// Human-readable label used in reports and plots.
    pub fn label(&self) -> &'static str {
        match self {
            SchemeId::TwiceFiltered => "twice-filtered Fourier",
            SchemeId::SingleFiltered => "single-filtered (variant)",
            SchemeId::LieSplitting => "Lie splitting",
            SchemeId::ExponentialEuler => "exponential Euler",
            SchemeId::StrangReference => "Strang splitting",
        }
    }

    /// Whether the scheme carries its own frequency filter (and thus runs on
    /// the full grid) rather than a fixed spatial band.
    pub fn is_filtered(&self) -> bool {
        matches!(self, SchemeId::TwiceFiltered | SchemeId::SingleFiltered)
    }
}

impl fmt::Display for SchemeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchemeId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SchemeId::ALL
            .into_iter()
            .find(|id| id.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown scheme {s:?}")))
    }
}

/// Step size, intermediate cutoff `K`, and the strength of the cubic term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepParams {
    tau: f64,
    k_cut: f64,
    coupling: f64,
}

impl StepParams {
    pub fn new(tau: f64, k_cut: f64) -> Result<Self> {
        if !(tau > 0.0 && tau <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "step size must lie in (0, 1], got {tau}"
            )));
        }
        let low = tau.powf(-0.5);
        if !(k_cut.is_finite() && k_cut >= low) {
            return Err(Error::InvalidParameter(format!(
                "cutoff K = {k_cut} must be at least tau^(-1/2) = {low}"
            )));
        }
        Ok(Self {
            tau,
            k_cut,
            coupling: 1.0,
        })
    }

    /// Parameters for schemes without an intermediate band (`K = tau^{-1/2}`).
    pub fn plain(tau: f64) -> Result<Self> {
        Self::new(tau, tau.powf(-0.5))
    }

    /// Scales the cubic term; zero turns every scheme into the free flow.
    pub fn with_coupling(mut self, coupling: f64) -> Self {
        self.coupling = coupling;
        self
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn k_cut(&self) -> f64 {
        self.k_cut
    }

    pub fn low_cutoff(&self) -> f64 {
        self.tau.powf(-0.5)
    }

    pub fn coupling(&self) -> f64 {
        self.coupling
    }
}

/// Smallest working grid on which the kernels are exact on the `n`-mode band
/// for inputs supported in `|k| <= r`.
fn work_size(n: usize, r: i64) -> usize {
    let mut whole = 8usize;
    while (whole / 2) as i64 <= 3 * r {
        whole *= 2;
    }
    let mut banded = n;
    while (banded / 2) as i64 <= 2 * r {
        banded *= 2;
    }
    whole.min(banded)
}

/// Propagators `e^{+i tau d_xx}` and `e^{-i tau d_xx}` per working grid size.
struct KernelCache {
    tau: f64,
    props: RefCell<HashMap<usize, (Propagator, Propagator)>>,
}

impl KernelCache {
    fn new(tau: f64) -> Result<Self> {
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "step size must be positive, got {tau}"
            )));
        }
        Ok(Self {
            tau,
            props: RefCell::new(HashMap::new()),
        })
    }

    fn flows(&self, grid: TorusGrid) -> Result<(Propagator, Propagator)> {
        let mut props = self.props.borrow_mut();
        if let Some(p) = props.get(&grid.n()) {
            return Ok(p.clone());
        }
        let p = (
            Propagator::new(grid, self.tau)?,
            Propagator::new(grid, -self.tau)?,
        );
        props.insert(grid.n(), p.clone());
        Ok(p)
    }

    fn lift(
        &self,
        v1: &SpectralField,
        v2: &SpectralField,
        v3: &SpectralField,
    ) -> Result<(usize, [SpectralField; 3])> {
        let n = v1.grid().n();
        for v in [v2, v3] {
            if v.grid() != v1.grid() {
                return Err(Error::GridMismatch {
                    left: n,
                    right: v.grid().n(),
                });
            }
        }
        let r = v1
            .support_radius()
            .max(v2.support_radius())
            .max(v3.support_radius());
        let m = work_size(n, r);
        Ok((m, [v1.resample(m)?, v2.resample(m)?, v3.resample(m)?]))
    }

    fn j1(
        &self,
        v1: &SpectralField,
        v2: &SpectralField,
        v3: &SpectralField,
    ) -> Result<SpectralField> {
        let n = v1.grid().n();
        let (m, [v1, v2, v3]) = self.lift(v1, v2, v3)?;
        let grid = v1.grid();
        if v2.support_radius() == 0 && v2.mean() == Complex64::new(0.0, 0.0) {
            return Ok(SpectralField::zeros(TorusGrid::new(n)?));
        }
        let (fwd, back) = self.flows(grid)?;
        let tau = self.tau;
        let prod = |a: &SpectralField, b: &SpectralField| product_on(&[a, b], 2 * m);

        let p = prod(&v1, &v3)?;
        let dv2 = inv_dx(&v2);
        let dp = inv_dx(&p);
        let osc = back.apply(&prod(&fwd.apply(&dv2)?, &fwd.apply(&dp)?)?)?;
        let frozen = prod(&dv2, &dp)?;
        let v2_mean = v2.mean();
        let v2_fluct = v2.sub(&SpectralField::constant(grid, v2_mean))?;

        let out = osc
            .scale(0.5 * I)
            .axpy(-0.5 * I, &frozen)?
            .axpy(tau * v2_mean, &p)?
            .axpy(tau * p.mean(), &v2_fluct)?;
        out.resample(n)
    }

    fn j2(
        &self,
        v1: &SpectralField,
        v2: &SpectralField,
        v3: &SpectralField,
    ) -> Result<SpectralField> {
        let n = v1.grid().n();
        let (m, [v1, v2, v3]) = self.lift(v1, v2, v3)?;
        let grid = v1.grid();
        let (fwd, back) = self.flows(grid)?;
        let tau = self.tau;
        let prod = |a: &SpectralField, b: &SpectralField| product_on(&[a, b], 2 * m);

        let q = prod(&v2, &v3)?;
        let dv1 = inv_dx(&v1);
        let osc = back.apply(&inv_dx(&prod(&back.apply(&dv1)?, &fwd.apply(&q)?)?))?;
        let frozen = inv_dx(&prod(&q, &dv1)?);
        let triple_mean = product_mean(&v1, &q);
        let q_fluct = q.sub(&SpectralField::constant(grid, q.mean()))?;

        let out = osc
            .scale(0.5 * I)
            .axpy(-0.5 * I, &frozen)?
            .add(&SpectralField::constant(grid, tau * triple_mean))?
            .axpy(tau * v1.mean(), &q_fluct)?;
        out.resample(n)
    }
}

/// `J1(v1, v2, v3)`: the exact value of
/// `int_0^tau e^{-is d_xx}[(e^{is d_xx} v2) e^{is d_xx}(v1 v3)] ds`, written with
/// antiderivatives so that no quadrature is needed.
pub fn kernel_j1(
    v1: &SpectralField,
    v2: &SpectralField,
    v3: &SpectralField,
    tau: f64,
) -> Result<SpectralField> {
    KernelCache::new(tau)?.j1(v1, v2, v3)
}

/// `J2(v1, v2, v3)`: the exact value of
/// `int_0^tau e^{-is d_xx}[(e^{-is d_xx} v1)(e^{is d_xx}(v2 v3))] ds`.
pub fn kernel_j2(
    v1: &SpectralField,
    v2: &SpectralField,
    v3: &SpectralField,
    tau: f64,
) -> Result<SpectralField> {
    KernelCache::new(tau)?.j2(v1, v2, v3)
}

/// A one-step map with its per-grid tables precomputed.
pub struct Integrator {
    scheme: SchemeId,
    params: StepParams,
    grid: TorusGrid,
    flow: Propagator,
    half_flow: Propagator,
    low_mult: Vec<f64>,
    k_mult: Vec<f64>,
    kernels: KernelCache,
}

impl Integrator {
    pub fn new(scheme: SchemeId, params: StepParams, grid: TorusGrid) -> Result<Self> {
        let params = match scheme {
            SchemeId::SingleFiltered => StepParams {
                k_cut: params.low_cutoff(),
                ..params
            },
            _ => params,
        };
        let tau = params.tau;
        let low = FilterSpec::new(params.low_cutoff())?;
        let high = FilterSpec::new(params.k_cut)?;
        Ok(Self {
            scheme,
            params,
            grid,
            flow: Propagator::new(grid, tau)?,
            half_flow: Propagator::new(grid, 0.5 * tau)?,
            low_mult: grid.wavenumbers().map(|k| low.multiplier(k)).collect(),
            k_mult: grid.wavenumbers().map(|k| high.multiplier(k)).collect(),
            kernels: KernelCache::new(tau)?,
        })
    }

    pub fn scheme(&self) -> SchemeId {
        self.scheme
    }

    pub fn params(&self) -> &StepParams {
        &self.params
    }

    fn filtered(&self, u: &SpectralField, mult: &[f64]) -> SpectralField {
        u.map_modes(|k, c| c * mult[self.grid.index_of(k).unwrap()])
    }

    /// The starting state of a run: `Pi_K u0` for the filtered schemes.
    pub fn initial_state(&self, u0: &SpectralField) -> Result<SpectralField> {
        self.check_grid(u0)?;
        Ok(match self.scheme {
            SchemeId::TwiceFiltered | SchemeId::SingleFiltered => self.filtered(u0, &self.k_mult),
            _ => u0.clone(),
        })
    }

    fn check_grid(&self, u: &SpectralField) -> Result<()> {
        if u.grid() != self.grid {
            return Err(Error::GridMismatch {
                left: self.grid.n(),
                right: u.grid().n(),
            });
        }
        Ok(())
    }

    pub fn step(&self, u: &SpectralField) -> Result<SpectralField> {
        self.check_grid(u)?;
        match self.scheme {
            SchemeId::TwiceFiltered | SchemeId::SingleFiltered => self.step_filtered(u),
            SchemeId::LieSplitting => {
                let rotated = self.nonlinear_phase(u, self.params.tau)?;
                self.flow.apply(&rotated)
            }
            SchemeId::ExponentialEuler => {
                let cubic = product_on(&[u, u, &u.conj()], 2 * self.grid.n())?;
                let c = -I * self.params.tau * self.params.coupling;
                self.flow.apply(&u.axpy(c, &cubic)?)
            }
            SchemeId::StrangReference => {
                let half = self.half_flow.apply(u)?;
                let rotated = self.nonlinear_phase(&half, self.params.tau)?;
                self.half_flow.apply(&rotated)
            }
        }
    }

    fn step_filtered(&self, u: &SpectralField) -> Result<SpectralField> {
        let ubar = u.conj();
        let u_low = self.filtered(u, &self.low_mult);
        let ubar_low = self.filtered(&ubar, &self.low_mult);
        let ubar_k = self.filtered(&ubar, &self.k_mult);
        let u_mid = u.map_modes(|k, c| {
            let i = self.grid.index_of(k).unwrap();
            c * (self.k_mult[i] - self.low_mult[i])
        });

        let j1 = self.kernels.j1(&ubar_low, &u_mid, &u_low)?;
        let j2 = self.kernels.j2(&ubar_k, &u_low, &u_low)?;
        let nonlinear = j1.scale(-2.0 * I).axpy(-I, &j2)?;
        let nonlinear = self.filtered(&self.flow.apply(&nonlinear)?, &self.k_mult);
        self.flow
            .apply(u)?
            .axpy(Complex64::new(self.params.coupling, 0.0), &nonlinear)
    }

    /// Exact flow of `i u_t = c |u|^2 u` over time `t` at the collocation points.
    /// The Nyquist mode is kept so that the substep is exactly unitary.
    fn nonlinear_phase(&self, u: &SpectralField, t: f64) -> Result<SpectralField> {
        let c = self.params.coupling;
        let values = u
            .values()
            .into_iter()
            .map(|z| z * Complex64::from_polar(1.0, -t * c * z.norm_sqr()))
            .collect();
        SpectralField::from_values(self.grid, values)
    }

    /// `n` steps from `u0` (after the scheme's initial projection).
    pub fn evolve_steps(&self, u0: &SpectralField, n: usize) -> Result<SpectralField> {
        let mut u = self.initial_state(u0)?;
        let limit = BLOWUP_FACTOR * u.l2_norm();
        for step in 1..=n {
            u = self.step(&u)?;
            let norm = u.l2_norm();
            if !norm.is_finite() || (limit > 0.0 && norm > limit) {
                return Err(Error::Diverged { step, norm });
            }
        }
        Ok(u)
    }
}

/// Number of steps of size `tau` that reach `t_final`.
pub fn step_count(tau: f64, t_final: f64) -> Result<usize> {
    if !(t_final >= 0.0 && t_final.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "final time must be nonnegative, got {t_final}"
        )));
    }
    let n = (t_final / tau).round();
    if (n * tau - t_final).abs() > 1e-9 * t_final.max(1.0) {
        return Err(Error::InvalidParameter(format!(
            "final time {t_final} is not a multiple of tau = {tau}"
        )));
    }
    Ok(n as usize)
}

pub fn step_twice_filtered(u: &SpectralField, p: &StepParams) -> Result<SpectralField> {
    Integrator::new(SchemeId::TwiceFiltered, *p, u.grid())?.step(u)
}

pub fn step_single_filtered(u: &SpectralField, tau: f64) -> Result<SpectralField> {
    Integrator::new(SchemeId::SingleFiltered, StepParams::plain(tau)?, u.grid())?.step(u)
}

pub fn step_lie_splitting(u: &SpectralField, tau: f64) -> Result<SpectralField> {
    Integrator::new(SchemeId::LieSplitting, StepParams::plain(tau)?, u.grid())?.step(u)
}

pub fn step_exponential_euler(u: &SpectralField, tau: f64) -> Result<SpectralField> {
    Integrator::new(
        SchemeId::ExponentialEuler,
        StepParams::plain(tau)?,
        u.grid(),
    )?
    .step(u)
}

pub fn step_strang_reference(u: &SpectralField, tau: f64) -> Result<SpectralField> {
    Integrator::new(SchemeId::StrangReference, StepParams::plain(tau)?, u.grid())?.step(u)
}

/// Evolves `u0` to `t_final = n tau` with the chosen scheme.
pub fn evolve(
    u0: &SpectralField,
    scheme: SchemeId,
    p: &StepParams,
    t_final: f64,
) -> Result<SpectralField> {
    let n = step_count(p.tau(), t_final)?;
    Integrator::new(scheme, *p, u0.grid())?.evolve_steps(u0, n)
}
