//! Brute-force mode sums for the oscillatory Duhamel integrals behind the
//! twice-filtered kernels.
//!
//! Every routine here evaluates a triple sum over wavenumbers with the time
//! integral done in closed form. No fast transforms are used, so these sums are
//! an independent path from [`crate::integrators::kernel_j1`] and
//! [`crate::integrators::kernel_j2`]. Output modes outside the band (and the
//! Nyquist mode) are dropped, matching the convention of the spectral products.
//!
//! Index convention: `j1, j2, j3` are the wavenumbers of the fields *as passed*
//! (a conjugated factor is passed already conjugated), `k = j1 + j2 + j3`.

use crate::error::{Error, Result};
use crate::integrators::{kernel_j1, kernel_j2};
use crate::spectral::{SpectralField, TorusGrid};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Largest grid accepted by the `O(N^3)` sums.
pub const MAX_ORACLE_N: usize = 64;

/// `int_0^tau e^{i phi s} ds`.
pub fn osc_weight(phi: f64, tau: f64) -> Complex64 {
    if phi == 0.0 {
        return Complex64::new(tau, 0.0);
    }
    // (e^{i x} - 1) / (i phi) = 2 sin(x/2) e^{i x/2} / phi, x = phi tau
    let half = 0.5 * phi * tau;
    Complex64::from_polar(2.0 * half.sin() / phi, half)
}

/// `int_0^tau e^{i alpha s} int_0^s e^{i beta r} dr ds`, with the resonant
/// cases enumerated.
pub fn nested_osc_weight(alpha: f64, beta: f64, tau: f64) -> Complex64 {
    let i = Complex64::new(0.0, 1.0);
    if beta != 0.0 {
        // inner integral is (e^{i beta s} - 1) / (i beta)
        (osc_weight(alpha + beta, tau) - osc_weight(alpha, tau)) / (i * beta)
    } else if alpha != 0.0 {
        // int_0^tau s e^{i alpha s} ds
        (tau * Complex64::from_polar(1.0, alpha * tau) - osc_weight(alpha, tau)) / (i * alpha)
    } else {
        Complex64::new(0.5 * tau * tau, 0.0)
    }
}

/// How each factor of a cubic term is free-evolved inside the integral:
/// `true` marks a conjugated factor, evolved by `e^{-is d_xx}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConjugationPattern(pub [bool; 3]);

impl ConjugationPattern {
    /// `conj(w) v w`-type products: only the first factor is conjugated.
    pub const FIRST: Self = Self([true, false, false]);
    pub const NONE: Self = Self([false, false, false]);
}

fn check_inputs(fields: [&SpectralField; 3], tau: f64) -> Result<TorusGrid> {
    let grid = fields[0].grid();
    if grid.n() > MAX_ORACLE_N {
        return Err(Error::OracleTooLarge {
            n: grid.n(),
            max: MAX_ORACLE_N,
        });
    }
    for f in &fields[1..] {
        if f.grid() != grid {
            return Err(Error::GridMismatch {
                left: grid.n(),
                right: f.grid().n(),
            });
        }
    }
    if !(tau >= 0.0 && tau.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "tau must be nonnegative, got {tau}"
        )));
    }
    Ok(grid)
}

fn nonzero_modes(f: &SpectralField) -> Vec<(i64, Complex64)> {
    let g = f.grid();
    f.coeffs()
        .iter()
        .enumerate()
        .filter(|(_, c)| **c != ZERO)
        .map(|(i, &c)| (g.wavenumber(i), c))
        .collect()
}

/// Sums `v1(j1) v2(j2) v3(j3) weight(j1, j2, j3)` into output mode
/// `j1 + j2 + j3`, skipping modes outside the band and the Nyquist mode.
fn triple_sum(
    v1: &SpectralField,
    v2: &SpectralField,
    v3: &SpectralField,
    weight: impl Fn(i64, i64, i64) -> Complex64,
) -> SpectralField {
    let grid = v1.grid();
    let nyquist = -(grid.n() as i64) / 2;
    let mut out = vec![ZERO; grid.n()];
    let (m1, m2, m3) = (nonzero_modes(v1), nonzero_modes(v2), nonzero_modes(v3));
    for &(j1, c1) in &m1 {
        for &(j2, c2) in &m2 {
            for &(j3, c3) in &m3 {
                let k = j1 + j2 + j3;
                if k == nyquist {
                    continue;
                }
                if let Some(idx) = grid.index_of(k) {
                    out[idx] += c1 * c2 * c3 * weight(j1, j2, j3);
                }
            }
        }
    }
    SpectralField::from_coeffs(grid, out).expect("finite oracle sum")
}

/// Wavenumbers of one interacting triple, its output mode and its phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseTriple {
    pub k1: i64,
    pub k2: i64,
    pub k3: i64,
    pub k: i64,
    pub phase: i64,
}

impl PhaseTriple {
    /// Phase `k^2 - (k2^2 + (k1 + k3)^2) = 2 k2 (k1 + k3)`.
    pub fn j1(k1: i64, k2: i64, k3: i64) -> Self {
        Self {
            k1,
            k2,
            k3,
            k: k1 + k2 + k3,
            phase: 2 * k2 * (k1 + k3),
        }
    }

    /// Phase `k^2 + k1^2 - (k2 + k3)^2 = 2 k1 k`.
    pub fn j2(k1: i64, k2: i64, k3: i64) -> Self {
        let k = k1 + k2 + k3;
        Self {
            k1,
            k2,
            k3,
            k,
            phase: 2 * k1 * k,
        }
    }
}

/// Mode sum for `int_0^tau e^{-is d_xx}[(e^{is d_xx} v2) e^{is d_xx}(v1 v3)] ds`.
/// The phase of a triple is [`PhaseTriple::j1`].
pub fn duhamel_j1_integral(
    v1: &SpectralField,
    v2: &SpectralField,
    v3: &SpectralField,
    tau: f64,
) -> Result<SpectralField> {
    check_inputs([v1, v2, v3], tau)?;
    Ok(triple_sum(v1, v2, v3, |j1, j2, j3| {
        osc_weight(PhaseTriple::j1(j1, j2, j3).phase as f64, tau)
    }))
}

/// Mode sum for `int_0^tau e^{-is d_xx}[(e^{-is d_xx} v1)(e^{is d_xx}(v2 v3))] ds`.
/// With `k = j1 + j2 + j3` the phase is `k^2 + j1^2 - (j2 + j3)^2 = 2 j1 k`; for
/// `v1 = conj(v)` and `j1 = -k1` this is the familiar `-2 k1 k`.
pub fn duhamel_j2_integral(
    v1: &SpectralField,
    v2: &SpectralField,
    v3: &SpectralField,
    tau: f64,
) -> Result<SpectralField> {
    check_inputs([v1, v2, v3], tau)?;
    Ok(triple_sum(v1, v2, v3, |j1, j2, j3| {
        osc_weight(PhaseTriple::j2(j1, j2, j3).phase as f64, tau)
    }))
}

/// `int_0^tau e^{-is d_xx}(F1 F2 F3) ds` where each factor is `e^{is d_xx} v_i`,
/// or `e^{-is d_xx} v_i` when marked conjugated. Phase per triple:
/// `k^2 - sum_i sigma_i j_i^2` with `sigma = +1` forward, `-1` conjugated.
pub fn duhamel_full_cubic(
    v1: &SpectralField,
    v2: &SpectralField,
    v3: &SpectralField,
    tau: f64,
    pattern: ConjugationPattern,
) -> Result<SpectralField> {
    check_inputs([v1, v2, v3], tau)?;
    let sigma = pattern.0.map(|conj| if conj { -1 } else { 1 });
    Ok(triple_sum(v1, v2, v3, |j1, j2, j3| {
        let k = j1 + j2 + j3;
        let phi = k * k - sigma[0] * j1 * j1 - sigma[1] * j2 * j2 - sigma[2] * j3 * j3;
        osc_weight(phi as f64, tau)
    }))
}

/// Remainder of the `J1` approximation in its nested-integral form,
///
/// `R1 = -2i int_0^tau e^{-is d_xx}[(e^{is d_xx} v2) int_0^s e^{i(s-r) d_xx}
///       [(e^{-ir d_xx} d_xx v1)(e^{ir d_xx} v3) + (e^{-ir d_xx} d_x v1)(e^{ir d_xx} d_x v3)] dr] ds`.
///
/// With `m = j1 + j3` the derivative factors give `-j1^2 - j1 j3 = -j1 m`, the
/// inner phase is `beta = m^2 + j1^2 - j3^2 = 2 j1 m` and the outer phase is
/// `alpha = k^2 - j2^2 - m^2 = 2 j2 m`, so each triple carries
/// `2i j1 m * nested(alpha, beta)`.
pub fn remainder_r1(
    v1: &SpectralField,
    v2: &SpectralField,
    v3: &SpectralField,
    tau: f64,
) -> Result<SpectralField> {
    check_inputs([v1, v2, v3], tau)?;
    Ok(triple_sum(v1, v2, v3, |j1, j2, j3| {
        let m = j1 + j3;
        let k = j2 + m;
        let alpha = k * k - j2 * j2 - m * m;
        let beta = m * m + j1 * j1 - j3 * j3;
        Complex64::new(0.0, 2.0 * (j1 * m) as f64)
            * nested_osc_weight(alpha as f64, beta as f64, tau)
    }))
}

/// Remainder of the `J2` approximation in its nested-integral form,
///
/// `R2 = -2i int_0^tau e^{-is d_xx}[(e^{-is d_xx} v1) int_0^s e^{i(s-r) d_xx}
///       (e^{ir d_xx} d_x v2)(e^{ir d_xx} d_x v3) dr] ds`.
///
/// With `m = j2 + j3`: derivative factor `-j2 j3`, inner phase
/// `beta = m^2 - j2^2 - j3^2`, outer phase `alpha = k^2 + j1^2 - m^2`.
pub fn remainder_r2(
    v1: &SpectralField,
    v2: &SpectralField,
    v3: &SpectralField,
    tau: f64,
) -> Result<SpectralField> {
    check_inputs([v1, v2, v3], tau)?;
    Ok(triple_sum(v1, v2, v3, |j1, j2, j3| {
        let m = j2 + j3;
        let k = j1 + m;
        let alpha = k * k + j1 * j1 - m * m;
        let beta = m * m - j2 * j2 - j3 * j3;
        Complex64::new(0.0, 2.0 * (j2 * j3) as f64)
            * nested_osc_weight(alpha as f64, beta as f64, tau)
    }))
}

/// `max_k |a_k - b_k| / max_k |b_k|` (absolute when `b` vanishes).
pub fn max_rel_deviation(a: &SpectralField, b: &SpectralField) -> f64 {
    let scale = b.coeffs().iter().map(|c| c.norm()).fold(0.0, f64::max);
    let diff = a
        .coeffs()
        .iter()
        .zip(b.coeffs())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max);
    if scale > 0.0 {
        diff / scale
    } else {
        diff
    }
}

/// A field with i.i.d. uniform `[-1, 1] + i[-1, 1]` coefficients on the whole
/// band except the Nyquist mode.
pub fn random_trial_field(grid: TorusGrid, rng: &mut impl Rng) -> SpectralField {
    let mut coeffs: Vec<Complex64> = (0..grid.n())
        .map(|_| Complex64::new(rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0)))
        .collect();
    coeffs[0] = ZERO;
    SpectralField::from_coeffs(grid, coeffs).expect("finite coefficients")
}

/// Worst deviations found by [`check_identities`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub n: usize,
    pub trials: usize,
    /// `kernel_j1` against [`duhamel_j1_integral`].
    pub j1: f64,
    /// `kernel_j2` against [`duhamel_j2_integral`].
    pub j2: f64,
    /// Full cubic integral against `J1 + R1`.
    pub split_j1: f64,
    /// Full cubic integral against `J2 + R2`.
    pub split_j2: f64,
}

impl IdentityReport {
    pub fn max(&self) -> f64 {
        self.j1.max(self.j2).max(self.split_j1).max(self.split_j2)
    }
}

/// Runs the kernel identities and the remainder decompositions over `trials`
/// random triples at each step size.
pub fn check_identities(
    n: usize,
    trials: usize,
    taus: &[f64],
    seed: u64,
) -> Result<IdentityReport> {
    let grid = TorusGrid::new(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = IdentityReport {
        n,
        trials,
        ..Default::default()
    };
    for &tau in taus {
        for _ in 0..trials {
            let v1 = random_trial_field(grid, &mut rng);
            let v2 = random_trial_field(grid, &mut rng);
            let v3 = random_trial_field(grid, &mut rng);
            let exact1 = duhamel_j1_integral(&v1, &v2, &v3, tau)?;
            let exact2 = duhamel_j2_integral(&v1, &v2, &v3, tau)?;
            rep.j1 = rep
                .j1
                .max(max_rel_deviation(&kernel_j1(&v1, &v2, &v3, tau)?, &exact1));
            rep.j2 = rep
                .j2
                .max(max_rel_deviation(&kernel_j2(&v1, &v2, &v3, tau)?, &exact2));

            let full = duhamel_full_cubic(&v1, &v2, &v3, tau, ConjugationPattern::FIRST)?;
            let o1 = exact1.add(&remainder_r1(&v1, &v2, &v3, tau)?)?;
            let o2 = exact2.add(&remainder_r2(&v1, &v2, &v3, tau)?)?;
            rep.split_j1 = rep.split_j1.max(max_rel_deviation(&o1, &full));
            rep.split_j2 = rep.split_j2.max(max_rel_deviation(&o2, &full));
        }
    }
    Ok(rep)
}
