//! One-step consistency of the schemes on smooth data, measured against a
//! fine Strang flow that is itself checked against an integrating-factor RK4.

use nls_lowreg::harness::{choose_k, DEFAULT_EPSILON};
use nls_lowreg::integrators::{Integrator, SchemeId, StepParams};
use nls_lowreg::spectral::{cubic_product, SpectralField, TorusGrid};
use num_complex::Complex64;
use std::f64::consts::PI;

fn smooth(n: usize) -> SpectralField {
    let grid = TorusGrid::new(n).unwrap();
    SpectralField::from_fn(grid, |x| {
        Complex64::from_polar(1.0 / (2.0 + x.cos()), x) + 0.3 * Complex64::from_polar(1.0, -2.0 * x)
    })
    .unwrap()
}

fn strang_flow(u: &SpectralField, t: f64, substeps: usize) -> SpectralField {
    let p = StepParams::plain(t / substeps as f64).unwrap();
    Integrator::new(SchemeId::StrangReference, p, u.grid())
        .unwrap()
        .evolve_steps(u, substeps)
        .unwrap()
}

/// `v = e^{-it d_xx} u` satisfies `v' = -i e^{-it d_xx}(|u|^2 u)`; classical RK4 on `v`.
fn rk4_flow(u0: &SpectralField, t: f64, steps: usize) -> SpectralField {
    let grid = u0.grid();
    let h = t / steps as f64;
    let phase = |v: &SpectralField, s: f64| -> SpectralField {
        let coeffs = grid
            .wavenumbers()
            .zip(v.coeffs())
            .map(|(k, c)| c * Complex64::from_polar(1.0, s * (k * k) as f64))
            .collect();
        SpectralField::from_coeffs(grid, coeffs).unwrap()
    };
    let rhs = |v: &SpectralField, s: f64| -> SpectralField {
        let u = phase(v, -s);
        let n = cubic_product(&u, &u, &u.conj()).unwrap();
        phase(&n, s).scale(Complex64::new(0.0, -1.0))
    };
    let mut v = u0.clone();
    for j in 0..steps {
        let s = j as f64 * h;
        let k1 = rhs(&v, s);
        let k2 = rhs(
            &v.axpy(Complex64::new(0.5 * h, 0.0), &k1).unwrap(),
            s + 0.5 * h,
        );
        let k3 = rhs(
            &v.axpy(Complex64::new(0.5 * h, 0.0), &k2).unwrap(),
            s + 0.5 * h,
        );
        let k4 = rhs(&v.axpy(Complex64::new(h, 0.0), &k3).unwrap(), s + h);
        let incr = k1.add(&k2.scale(Complex64::new(2.0, 0.0))).unwrap();
        let incr = incr
            .add(&k3.scale(Complex64::new(2.0, 0.0)))
            .unwrap()
            .add(&k4)
            .unwrap();
        v = v.axpy(Complex64::new(h / 6.0, 0.0), &incr).unwrap();
    }
    phase(&v, -t)
}

#[test]
fn fine_strang_agrees_with_rk4() {
    let u = smooth(64);
    let tau = 1.0 / 16.0;
    let a = strang_flow(&u, tau, 256);
    let b = rk4_flow(&u, tau, 512);
    let rel = a.sub(&b).unwrap().l2_norm() / u.l2_norm();
    assert!(rel < 1e-7, "relative difference {rel:e}");
}

fn local_error(scheme: SchemeId, u: &SpectralField, tau: f64) -> f64 {
    let p = match scheme {
        SchemeId::TwiceFiltered => {
            StepParams::new(tau, choose_k(1.0, tau, DEFAULT_EPSILON).unwrap()).unwrap()
        }
        _ => StepParams::plain(tau).unwrap(),
    };
    let out = Integrator::new(scheme, p, u.grid())
        .unwrap()
        .step(u)
        .unwrap();
    out.sub(&strang_flow(u, tau, 256)).unwrap().l2_norm()
}

fn halving_ratios(scheme: SchemeId) -> Vec<f64> {
    let u = smooth(64);
    let errs: Vec<f64> = (4..=9)
        .map(|e| local_error(scheme, &u, 2f64.powi(-e)))
        .collect();
    errs.windows(2).map(|w| w[0] / w[1]).collect()
}

#[test]
fn twice_filtered_local_error_is_second_order() {
    for r in halving_ratios(SchemeId::TwiceFiltered) {
        assert!((r - 4.0).abs() <= 0.8, "ratio {r}");
    }
}

#[test]
fn exponential_euler_local_error_is_second_order() {
    for r in halving_ratios(SchemeId::ExponentialEuler) {
        assert!((r - 4.0).abs() <= 0.8, "ratio {r}");
    }
}

#[test]
fn local_error_over_tau_squared_is_bounded() {
    let u = smooth(64);
    for scheme in [
        SchemeId::TwiceFiltered,
        SchemeId::SingleFiltered,
        SchemeId::LieSplitting,
        SchemeId::ExponentialEuler,
    ] {
        let scaled: Vec<f64> = (4..=10)
            .map(|e| {
                let tau = 2f64.powi(-e);
                local_error(scheme, &u, tau) / (tau * tau)
            })
            .collect();
        let max = scaled.iter().cloned().fold(0.0, f64::max);
        let min = scaled.iter().cloned().fold(f64::MAX, f64::min);
        assert!(max / min < 2.0, "{scheme}: {scaled:?}");
    }
}

#[test]
fn strang_global_order_two() {
    let u = smooth(64);
    let reference = strang_flow(&u, 1.0, 1 << 14);
    let errs: Vec<f64> = (3..=7)
        .map(|e| {
            strang_flow(&u, 1.0, 1 << e)
                .sub(&reference)
                .unwrap()
                .l2_norm()
        })
        .collect();
    let pts: Vec<(f64, f64)> = errs
        .iter()
        .enumerate()
        .map(|(i, e)| ((-(i as f64 + 3.0) * 2f64.ln()), e.ln()))
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
        / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    assert!((slope - 2.0).abs() <= 0.2, "order {slope}");
}

#[test]
fn free_flow_norm_and_period() {
    let u = smooth(64);
    let p = StepParams::plain(2.0 * PI / 64.0)
        .unwrap()
        .with_coupling(0.0);
    let back = Integrator::new(SchemeId::LieSplitting, p, u.grid())
        .unwrap()
        .evolve_steps(&u, 64)
        .unwrap();
    assert!(back.sub(&u).unwrap().l2_norm() < 1e-12);
}
