//! Transform helpers between band-ordered Fourier coefficients and collocation
//! values. Plans are cached per thread, so results do not depend on how many
//! threads are running.

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

type PlanCache = (FftPlanner<f64>, HashMap<(usize, bool), Arc<dyn Fft<f64>>>);

thread_local! {
    static PLANS: RefCell<PlanCache> =
        RefCell::new((FftPlanner::new(), HashMap::new()));
}

fn plan(len: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANS.with(|p| {
        let (planner, cache) = &mut *p.borrow_mut();
        cache
            .entry((len, inverse))
            .or_insert_with(|| {
                if inverse {
                    planner.plan_fft_inverse(len)
                } else {
                    planner.plan_fft_forward(len)
                }
            })
            .clone()
    })
}

/// Unnormalized forward transform, `X_j = sum_m x_m e^{-2 pi i j m / len}`.
pub(crate) fn forward(buf: &mut [Complex64]) {
    plan(buf.len(), false).process(buf);
}

/// Unnormalized inverse transform, `x_m = sum_j X_j e^{2 pi i j m / len}`.
pub(crate) fn inverse(buf: &mut [Complex64]) {
    plan(buf.len(), true).process(buf);
}

#[inline]
fn sign(k: i64) -> f64 {
    if k.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Values at `x_j = -pi + 2 pi j / m` of the trigonometric polynomial whose
/// coefficients for `k = -nb/2 .. nb/2-1` are `coeffs`. Requires `nb <= m`.
pub(crate) fn band_to_points(coeffs: &[Complex64], m: usize) -> Vec<Complex64> {
    let nb = coeffs.len();
    debug_assert!(nb <= m);
    let half = (nb / 2) as i64;
    let mut buf = vec![Complex64::new(0.0, 0.0); m];
    for (i, c) in coeffs.iter().enumerate() {
        let k = i as i64 - half;
        buf[k.rem_euclid(m as i64) as usize] = c * sign(k);
    }
    inverse(&mut buf);
    buf
}

/// Coefficients `k = -nb/2 .. nb/2-1` of the interpolant of `values` given at
/// `x_j = -pi + 2 pi j / m`. Requires `nb <= m`.
pub(crate) fn points_to_band(mut values: Vec<Complex64>, nb: usize) -> Vec<Complex64> {
    let m = values.len();
    debug_assert!(nb <= m);
    forward(&mut values);
    let half = (nb / 2) as i64;
    let scale = 1.0 / m as f64;
    (0..nb)
        .map(|i| {
            let k = i as i64 - half;
            values[k.rem_euclid(m as i64) as usize] * (sign(k) * scale)
        })
        .collect()
}
