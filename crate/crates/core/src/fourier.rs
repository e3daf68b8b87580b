//! Fourier-series approximation of `1/x` used as the comparison baseline.
//!
//! `1/x ≈ (i/√(2π)) Σ_j Δ_y Σ_k Δ_z z_k e^{-z_k²/2} e^{-i x y_j z_k}` with
//! `y_j = jΔ_y` (`j = 0..J-1`) and `z_k = kΔ_z` (`k = -K..K`). Pairing `±k`
//! gives the real sine form
//! `(2/√(2π)) Σ_j Δ_y Δ_z² Σ_{k=1..K} k e^{-z_k²/2} sin(x y_j z_k)`,
//! which is odd in `x`.

use nalgebra::DVector;
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, QklsError, Result};
use crate::hamiltonian::EigenSystem;
use crate::scalar::{from_usize, lit, re, to_f64, Cx, Real};
use crate::statevector::StateVector;

/// Multipliers on the asymptotic schedule expressions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FourierConstants {
    pub c_j: f64,
    pub c_k: f64,
    pub c_y: f64,
    pub c_z: f64,
}

impl Default for FourierConstants {
    fn default() -> Self {
        Self { c_j: 1.0, c_k: 1.0, c_y: 1.0, c_z: 1.0 }
    }
}

/// Discretization grid of the double integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FourierSchedule<T: Real = f64> {
    pub j_steps: usize,
    pub k_steps: usize,
    pub delta_y: T,
    pub delta_z: T,
    pub constants: FourierConstants,
}

/// `J = ⌈C_J (κ/ε) ln(κ/ε)⌉`, `K = ⌈C_K κ ln(κ/ε)⌉`,
/// `Δ_y = C_y ε / √ln(κ/ε)`, `Δ_z = C_z / (κ √ln(κ/ε))`.
pub fn make_schedule<T: Real>(
    kappa: f64,
    epsilon: f64,
    constants: FourierConstants,
) -> Result<FourierSchedule<T>> {
    if !(kappa > 1.0) || !kappa.is_finite() {
        return Err(invalid(format!("kappa must be finite and > 1, got {kappa}")));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(invalid(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    let c = constants;
    if [c.c_j, c.c_k, c.c_y, c.c_z].iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
        return Err(invalid("schedule constants must be positive and finite"));
    }
    let log = (kappa / epsilon).ln();
    let j_steps = (c.c_j * kappa / epsilon * log).ceil();
    let k_steps = (c.c_k * kappa * log).ceil();
    if j_steps > usize::MAX as f64 / 4.0 || k_steps > usize::MAX as f64 / 4.0 {
        return Err(invalid("schedule too large"));
    }
    Ok(FourierSchedule {
        j_steps: j_steps as usize,
        k_steps: k_steps as usize,
        delta_y: lit(c.c_y * epsilon / log.sqrt()),
        delta_z: lit(c.c_z / (kappa * log.sqrt())),
        constants,
    })
}

impl<T: Real> FourierSchedule<T> {
    /// Explicit grid.
    pub fn new(j_steps: usize, k_steps: usize, delta_y: T, delta_z: T) -> Result<Self> {
        if j_steps == 0 {
            return Err(invalid("J must be at least 1"));
        }
        if !(delta_y > T::zero()) || !(delta_z > T::zero()) {
            return Err(invalid("grid spacings must be positive"));
        }
        Ok(Self {
            j_steps,
            k_steps,
            delta_y,
            delta_z,
            constants: FourierConstants::default(),
        })
    }

    /// Same integration ranges `J Δ_y` and `K Δ_z`, resolved with fewer
    /// (or more) points.
    pub fn resampled(&self, j_steps: usize, k_steps: usize) -> Result<Self> {
        if j_steps == 0 || k_steps == 0 {
            return Err(invalid("resampled grid needs J, K >= 1"));
        }
        let y_range = from_usize::<T>(self.j_steps) * self.delta_y;
        let z_range = from_usize::<T>(self.k_steps.max(1)) * self.delta_z;
        Ok(Self {
            j_steps,
            k_steps,
            delta_y: y_range / from_usize(j_steps),
            delta_z: z_range / from_usize(k_steps),
            constants: self.constants,
        })
    }

    /// Number of time-evolution operators `J (2K + 1)`.
    pub fn term_count(&self) -> usize {
        self.j_steps * (2 * self.k_steps + 1)
    }

    pub fn y(&self, j: usize) -> T {
        from_usize::<T>(j) * self.delta_y
    }

    pub fn z(&self, k: i64) -> T {
        lit::<T>(k as f64) * self.delta_z
    }

    fn prefactor(&self) -> T {
        T::one() / (lit::<T>(2.0) * T::pi()).sqrt()
    }
}

/// Direct evaluation of the complex double sum.
pub fn invert_scalar<T: Real>(lambda: T, sched: &FourierSchedule<T>) -> Cx<T> {
    let k_max = sched.k_steps as i64;
    let mut total = re(T::zero());
    for j in 0..sched.j_steps {
        let y = sched.y(j);
        let mut inner = re(T::zero());
        for k in -k_max..=k_max {
            let z = sched.z(k);
            let phase = lambda * y * z;
            let w = z * (-(z * z) / lit(2.0)).exp();
            inner += Complex::new(phase.cos(), -phase.sin()) * w;
        }
        total += inner;
    }
    total * Complex::new(T::zero(), sched.prefactor() * sched.delta_y * sched.delta_z)
}

/// Direct evaluation of the real sine form.
pub fn sine_form_scalar<T: Real>(lambda: T, sched: &FourierSchedule<T>) -> T {
    let mut total = T::zero();
    for j in 0..sched.j_steps {
        let y = sched.y(j);
        let mut inner = T::zero();
        for k in 1..=sched.k_steps {
            let z = sched.z(k as i64);
            inner += from_usize::<T>(k) * (-(z * z) / lit(2.0)).exp() * (lambda * y * z).sin();
        }
        total += inner;
    }
    lit::<T>(2.0) * sched.prefactor() * sched.delta_y * sched.delta_z * sched.delta_z * total
}

/// Sine form with the `j` sum in closed form:
/// `Σ_{j<J} sin(jθ) = sin(Jθ/2) sin((J-1)θ/2) / sin(θ/2)`.
/// Costs `O(K)` per point instead of `O(JK)`.
pub fn sine_form_fast<T: Real>(lambda: T, sched: &FourierSchedule<T>) -> T {
    let half = lit::<T>(0.5);
    let jn = from_usize::<T>(sched.j_steps);
    let mut total = T::zero();
    for k in 1..=sched.k_steps {
        let z = sched.z(k as i64);
        let theta = lambda * sched.delta_y * z;
        let denom = (theta * half).sin();
        let j_sum = if denom.abs() < lit(1e-8) {
            (0..sched.j_steps)
                .map(|j| (from_usize::<T>(j) * theta).sin())
                .fold(T::zero(), |a, b| a + b)
        } else {
            (jn * theta * half).sin() * ((jn - T::one()) * theta * half).sin() / denom
        };
        total += from_usize::<T>(k) * (-(z * z) * half).exp() * j_sum;
    }
    lit::<T>(2.0) * sched.prefactor() * sched.delta_y * sched.delta_z * sched.delta_z * total
}

/// `max |λ f(λ) - 1|` over `points` evenly spaced `λ ∈ [1/κ, 1]`.
pub fn interval_accuracy<T: Real>(kappa: f64, sched: &FourierSchedule<T>, points: usize) -> f64 {
    let lo = 1.0 / kappa;
    let steps = points.max(2) - 1;
    (0..=steps)
        .map(|i| {
            let lam = lo + (1.0 - lo) * i as f64 / steps as f64;
            (lam * to_f64(sine_form_fast(lit::<T>(lam), sched)) - 1.0).abs()
        })
        .fold(0.0, f64::max)
}

/// Grid size for [`interval_accuracy`] during calibration.
pub const CALIBRATION_GRID: usize = 1000;

/// Doubles `(C_J, C_K)` from `start` until the interval accuracy is `≤ ε`.
pub fn calibrate_constants(
    kappa: f64,
    epsilon: f64,
    start: FourierConstants,
    max_doublings: u32,
) -> Result<(FourierConstants, FourierSchedule<f64>)> {
    let mut constants = start;
    for _ in 0..=max_doublings {
        let sched = make_schedule::<f64>(kappa, epsilon, constants)?;
        if interval_accuracy(kappa, &sched, CALIBRATION_GRID) <= epsilon {
            return Ok((constants, sched));
        }
        constants.c_j *= 2.0;
        constants.c_k *= 2.0;
    }
    Err(invalid(format!(
        "Fourier schedule for kappa={kappa}, epsilon={epsilon} not accurate after {max_doublings} doublings"
    )))
}

/// Unnormalized `Σ_jk (...) e^{-iH y_j z_k}|b>`, evaluated spectrally.
pub fn apply_fourier_unnormalized<T: Real>(
    eig: &EigenSystem<T>,
    b: &StateVector<T>,
    sched: &FourierSchedule<T>,
) -> Result<DVector<Cx<T>>> {
    if eig.dim() != b.dim() {
        return Err(QklsError::DimensionMismatch { expected: eig.dim(), found: b.dim() });
    }
    Ok(eig.apply_fn(b.amplitudes(), |lam| re(sine_form_fast(lam, sched))))
}

/// Normalized baseline state and its evolution-operator count.
pub fn apply_fourier<T: Real>(
    eig: &EigenSystem<T>,
    b: &StateVector<T>,
    sched: &FourierSchedule<T>,
) -> Result<(StateVector<T>, usize)> {
    let v = apply_fourier_unnormalized(eig, b, sched)?;
    let norm = v.norm();
    if !(norm > lit(1e-14)) {
        return Err(QklsError::NullState { norm: to_f64(norm) });
    }
    Ok((StateVector::from_amplitudes(b.num_qubits(), v)?, sched.term_count()))
}
