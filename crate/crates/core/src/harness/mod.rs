//! Convergence studies: cutoff selection, a shared fine-step reference,
//! per-step-size error tables with fitted orders, and their persistence.

pub mod config;
pub mod output;

pub use config::{DataChoice, ReferenceSpec, RunConfig, DEFAULT_EPSILON};
pub use output::{emit_plot, write_plot_files, write_sweep};

use crate::error::{Error, Result};
use crate::integrators::{step_count, Integrator, SchemeId, StepParams};
use crate::spectral::{SpectralField, TorusGrid};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::time::Instant;

pub const REPORT_SCHEMA: &str = "nls-lowreg/convergence-report";
pub const REPORT_VERSION: u32 = 1;

/// Errors at or below this multiple of the solution norm count as roundoff.
pub const EXACT_TOL: f64 = 1e-11;

/// Points within this factor of the reference error estimate are excluded
/// from the order fit.
pub const REFERENCE_MARGIN: f64 = 10.0;

fn check_regime(s0: f64, tau: f64) -> Result<()> {
    if !(s0 > 0.0 && s0 <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "s0 must lie in (0, 1], got {s0}"
        )));
    }
    if !(tau > 0.0 && tau <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "tau must lie in (0, 1], got {tau}"
        )));
    }
    Ok(())
}

fn check_epsilon(s0: f64, epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    if s0 <= 0.25 + epsilon {
        return Err(Error::InvalidParameter(format!(
            "need 1/4 + epsilon < s0, got s0 = {s0}, epsilon = {epsilon}"
        )));
    }
    Ok(())
}

/// Intermediate cutoff `K(tau)` for data of regularity `s0`:
///
/// * `s0 <= 1/4`: `K = tau^{-1/2}`;
/// * `1/4 < s0 <= 1/2`: `K = tau^{-(s0 + 1/8 - eps/2) / (s0 + 1/2)}`;
/// * `s0 > 1/2`: `K = tau^{-1 + (1/8 + eps/2) / s0}`.
pub fn choose_k(s0: f64, tau: f64, epsilon: f64) -> Result<f64> {
    check_regime(s0, tau)?;
    let exponent = if s0 <= 0.25 {
        0.5
    } else {
        check_epsilon(s0, epsilon)?;
        if s0 <= 0.5 {
            (s0 + 0.125 - 0.5 * epsilon) / (s0 + 0.5)
        } else {
            1.0 - (0.125 + 0.5 * epsilon) / s0
        }
    };
    let k = tau.powf(-exponent);
    let low = tau.powf(-0.5);
    if k < low * (1.0 - 1e-12) {
        return Err(Error::InvalidParameter(format!(
            "cutoff {k} below tau^(-1/2) = {low}"
        )));
    }
    Ok(k.max(low))
}

/// Expected convergence order of the twice-filtered scheme with [`choose_k`].
pub fn predicted_order(s0: f64, epsilon: f64) -> Result<f64> {
    check_regime(s0, 1.0)?;
    if s0 <= 0.25 {
        return Ok(s0 / 2.0);
    }
    check_epsilon(s0, epsilon)?;
    Ok(if s0 <= 0.5 {
        s0 * (1.0 - (0.75 + epsilon) / (2.0 * s0 + 1.0))
    } else {
        s0 - 0.125 - 0.5 * epsilon
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunStatus {
    Ok,
    /// Error within the reference-error margin; excluded from the fit.
    BelowReference,
    Diverged,
}

impl RunStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            RunStatus::Ok => "ok",
            RunStatus::BelowReference => "below-reference",
            RunStatus::Diverged => "diverged",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TauRecord {
    pub tau: f64,
    #[serde(rename = "K")]
    pub k: f64,
    pub steps: usize,
    /// `||P u_ref(T) - u_tau(T)||` with `P` the run's spatial band; absent when diverged.
    pub error_l2: Option<f64>,
    /// `||(1 - P) u_ref(T)||`, the part of the reference the run cannot represent.
    pub tail_l2: f64,
    pub wallclock_s: Option<f64>,
    pub status: RunStatus,
    /// Step at which the blow-up guard fired.
    pub diverged_at: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceInfo {
    pub scheme: SchemeId,
    pub tau: f64,
    pub n: usize,
    /// `||u_ref(tau_ref) - u_ref(2 tau_ref)||`.
    pub error_estimate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub schema: String,
    pub version: u32,
    pub scheme: SchemeId,
    pub label: String,
    pub config_hash: String,
    pub data: DataChoice,
    pub s0: f64,
    pub epsilon: f64,
    pub t_final: f64,
    pub grid_n: usize,
    pub predicted_order: Option<f64>,
    pub reference: ReferenceInfo,
    pub records: Vec<TauRecord>,
    pub fitted_order: Option<f64>,
    /// Step sizes used by the fit.
    pub fit_window: Vec<f64>,
    /// All errors at roundoff level: the scheme is exact on this datum.
    pub exact: bool,
    pub notes: Vec<String>,
}

impl ConvergenceReport {
    pub fn error_at(&self, tau: f64) -> Option<f64> {
        self.records
            .iter()
            .find(|r| r.tau == tau)
            .and_then(|r| r.error_l2)
    }
}

/// Reference solution at the final time and its self-consistency estimate.
#[derive(Debug, Clone)]
pub struct Reference {
    pub info: ReferenceInfo,
    pub initial: SpectralField,
    pub final_state: SpectralField,
}

pub fn config_hash(cfg: &RunConfig) -> Result<String> {
    let bytes = serde_json::to_vec(cfg)?;
    let digest = Sha256::digest(&bytes);
    Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
}

/// The cutoff `K` a scheme uses at step `tau`: `choose_k` for the twice-filtered
/// scheme, `tau^{-1/2}` for the single-filtered one, the band edge otherwise.
pub fn scheme_cutoff(cfg: &RunConfig, scheme: SchemeId, tau: f64) -> Result<f64> {
    Ok(match scheme {
        SchemeId::TwiceFiltered => choose_k(cfg.s0, tau, cfg.epsilon)?,
        SchemeId::SingleFiltered => tau.powf(-0.5),
        _ => (scheme_grid(cfg, scheme)?.n() / 2) as f64,
    })
}

fn scheme_grid(cfg: &RunConfig, scheme: SchemeId) -> Result<TorusGrid> {
    TorusGrid::new(if scheme.is_filtered() {
        cfg.n
    } else {
        cfg.comparison_n
    })
}

fn step_params(cfg: &RunConfig, scheme: SchemeId, tau: f64) -> Result<StepParams> {
    match scheme {
        SchemeId::TwiceFiltered => StepParams::new(tau, choose_k(cfg.s0, tau, cfg.epsilon)?),
        _ => StepParams::plain(tau),
    }
}

/// Evolves the datum on the reference grid at `tau_min / divisor` and at twice
/// that step.
pub fn compute_reference(cfg: &RunConfig) -> Result<Reference> {
    let grid = TorusGrid::new(cfg.reference.n)?;
    let initial = cfg.data.on(grid).build()?;
    let tau = cfg.tau_min() / cfg.reference.tau_divisor as f64;
    let run = |tau: f64| -> Result<SpectralField> {
        let integ = Integrator::new(cfg.reference.scheme, StepParams::plain(tau)?, grid)?;
        integ.evolve_steps(&initial, step_count(tau, cfg.t_final)?)
    };
    let (fine, coarse) = rayon::join(|| run(tau), || run(2.0 * tau));
    let fine = fine?;
    let error_estimate = fine.sub(&coarse?)?.l2_norm();
    Ok(Reference {
        info: ReferenceInfo {
            scheme: cfg.reference.scheme,
            tau,
            n: cfg.reference.n,
            error_estimate,
        },
        initial,
        final_state: fine,
    })
}

/// One run of `scheme` at step `tau`, measured against the reference.
pub fn run_single(
    cfg: &RunConfig,
    reference: &Reference,
    scheme: SchemeId,
    tau: f64,
) -> Result<(TauRecord, Option<SpectralField>)> {
    let grid = scheme_grid(cfg, scheme)?;
    let u0 = reference.initial.resample(grid.n())?;
    let steps = step_count(tau, cfg.t_final)?;
    let integ = Integrator::new(scheme, step_params(cfg, scheme, tau)?, grid)?;
    let banded_ref = reference.final_state.resample(grid.n())?;
    let tail_l2 = reference
        .final_state
        .sub(&banded_ref.resample(reference.final_state.grid().n())?)?
        .l2_norm();
    let start = Instant::now();
    let outcome = integ.evolve_steps(&u0, steps);
    let wallclock_s = cfg.record_wallclock.then(|| start.elapsed().as_secs_f64());
    let k = scheme_cutoff(cfg, scheme, tau)?;
    let mut record = TauRecord {
        tau,
        k,
        steps,
        error_l2: None,
        tail_l2,
        wallclock_s,
        status: RunStatus::Diverged,
        diverged_at: None,
    };
    match outcome {
        Ok(u) => {
            let err = banded_ref.sub(&u)?.l2_norm();
            record.error_l2 = Some(err);
            record.status = if err > REFERENCE_MARGIN * reference.info.error_estimate {
                RunStatus::Ok
            } else {
                RunStatus::BelowReference
            };
            Ok((record, Some(u)))
        }
        Err(Error::Diverged { step, .. }) => {
            record.diverged_at = Some(step);
            Ok((record, None))
        }
        Err(e) => Err(e),
    }
}

/// Least-squares slope of `log error` against `log tau` over the longest run of
/// consecutive usable points whose errors decrease with `tau` (ties go to the
/// run at smaller steps). Fewer than two points give no order.
pub fn fit_order(records: &[TauRecord]) -> (Option<f64>, Vec<f64>) {
    let mut best: (usize, usize) = (0, 0);
    let mut start = 0;
    for i in 0..records.len() {
        let usable = records[i].status == RunStatus::Ok;
        let continues = i > start
            && records[i - 1].status == RunStatus::Ok
            && records[i].tau < records[i - 1].tau
            && records[i].error_l2 < records[i - 1].error_l2;
        if !usable {
            start = i + 1;
            continue;
        }
        if !continues {
            start = i;
        }
        if i + 1 - start >= best.1 - best.0 {
            best = (start, i + 1);
        }
    }
    let window = &records[best.0..best.1];
    if window.len() < 2 {
        return (None, Vec::new());
    }
    let pts: Vec<(f64, f64)> = window
        .iter()
        .map(|r| (r.tau.ln(), r.error_l2.unwrap().ln()))
        .collect();
    (Some(slope(&pts)), window.iter().map(|r| r.tau).collect())
}

fn slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

/// A report with the final state at each step size, `None` where the run diverged.
pub type SchemeRun = (ConvergenceReport, Vec<Option<SpectralField>>);

/// Reports for every scheme in `schemes`, sharing one reference. The runs for
/// all `(scheme, tau)` pairs execute on the current rayon pool; results are
/// assembled in configuration order.
pub fn run_sweep(
    cfg: &RunConfig,
    schemes: &[SchemeId],
) -> Result<(Reference, Vec<SchemeRun>)> {
    cfg.validate()?;
    let reference = compute_reference(cfg)?;
    let hash = config_hash(cfg)?;
    let jobs: Vec<(SchemeId, f64)> = schemes
        .iter()
        .flat_map(|&s| cfg.tau_grid.iter().map(move |&t| (s, t)))
        .collect();
    let mut results = jobs
        .par_iter()
        .map(|&(s, t)| run_single(cfg, &reference, s, t))
        .collect::<Result<Vec<_>>>()?
        .into_iter();
    let norm = reference.final_state.l2_norm().max(1.0);
    let mut out = Vec::with_capacity(schemes.len());
    for &scheme in schemes {
        let (records, fields): (Vec<_>, Vec<_>) = results.by_ref().take(cfg.tau_grid.len()).unzip();
        let exact = records
            .iter()
            .all(|r| r.error_l2.is_some_and(|e| e <= EXACT_TOL * norm));
        let (fitted_order, fit_window) = if exact {
            (None, Vec::new())
        } else {
            fit_order(&records)
        };
        let mut notes = vec![format!(
            "initial data truncated to the {}-point band of the run",
            scheme_grid(cfg, scheme)?.n()
        )];
        if scheme == SchemeId::SingleFiltered {
            notes
                .push("single-filtered variant: the twice-filtered map with K = tau^(-1/2)".into());
        }
        out.push((
            ConvergenceReport {
                schema: REPORT_SCHEMA.into(),
                version: REPORT_VERSION,
                scheme,
                label: scheme.label().into(),
                config_hash: hash.clone(),
                data: cfg.data,
                s0: cfg.s0,
                epsilon: cfg.epsilon,
                t_final: cfg.t_final,
                grid_n: scheme_grid(cfg, scheme)?.n(),
                predicted_order: (scheme == SchemeId::TwiceFiltered)
                    .then(|| predicted_order(cfg.s0, cfg.epsilon))
                    .transpose()?,
                reference: reference.info.clone(),
                records,
                fitted_order,
                fit_window,
                exact,
                notes,
            },
            fields,
        ));
    }
    Ok((reference, out))
}

/// Convergence report for `cfg.scheme` alone.
pub fn run_convergence(cfg: &RunConfig) -> Result<ConvergenceReport> {
    let (_, mut reports) = run_sweep(cfg, &[cfg.scheme])?;
    Ok(reports.remove(0).0)
}

/// A rayon pool with `threads` workers (`0` means one per core).
pub fn thread_pool(threads: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("cannot build thread pool: {e}")))
}
