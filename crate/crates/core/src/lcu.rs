//! Reconstruction of `|x̃> ∝ Σ_n c_n e^{-iHnτ}|b>` by a linear combination
//! of unitaries.
//!
//! `V` prepares `Σ_n sqrt(|c_n| / Σ|c|) |n>` on `m = ⌈log2 M⌉` ancillas,
//! the select operator applies `phase_n e^{-iHnτ}` on branch `n` (the complex
//! phase of `c_n` is absorbed into its branch, keeping the branch unitary),
//! and after `V†` the ancillas are postselected on `|0^m>`. The surviving
//! system state is `(1/Σ|c|) M|b>` with `M = Σ c_n e^{-iHnτ}`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

use crate::error::{invalid, QklsError, Result};
use crate::scalar::{from_usize, lit, modulus, re, to_f64, Cx, Real};
use crate::statevector::{inner, Propagator, StateVector};

/// Factored LCU coefficients, zero-padded to a power of two.
#[derive(Debug, Clone, PartialEq)]
pub struct LcuPlan<T: Real = f64> {
    /// Ancilla count.
    pub m: usize,
    /// Number of unpadded coefficients.
    pub terms: usize,
    pub padded_coeffs: Vec<Cx<T>>,
    /// Unit-modulus phases; `1` for zero coefficients.
    pub phases: Vec<Cx<T>>,
    pub magnitudes: Vec<T>,
    /// `Σ |c_n|`.
    pub c_norm: T,
}

impl<T: Real> LcuPlan<T> {
    /// Amplitudes `sqrt(|c_n| / c_norm)` prepared by `V` from `|0^m>`.
    pub fn prepare_amplitudes(&self) -> Vec<T> {
        self.magnitudes
            .iter()
            .map(|&mag| (mag / self.c_norm).sqrt())
            .collect()
    }

    /// A real orthogonal `V` with `V|0> = prepare_amplitudes()`, built as a
    /// Householder reflection (so `V† = V`).
    pub fn prepare_unitary(&self) -> DMatrix<T> {
        let alpha = DVector::from_vec(self.prepare_amplitudes());
        let dim = alpha.len();
        let mut w = -alpha.clone();
        w[0] += T::one();
        let ww = w.norm_squared();
        if ww <= T::machine_eps() * T::machine_eps() {
            return DMatrix::identity(dim, dim);
        }
        DMatrix::identity(dim, dim) - (&w * w.transpose()) * (lit::<T>(2.0) / ww)
    }
}

/// Pads and factors the coefficients into magnitudes and phases.
pub fn plan_lcu<T: Real>(c: &[Cx<T>]) -> Result<LcuPlan<T>> {
    if c.is_empty() {
        return Err(invalid("no LCU coefficients"));
    }
    let c_norm = c.iter().map(|&z| modulus(z)).fold(T::zero(), |a, b| a + b);
    if !(c_norm > T::zero()) || !c_norm.is_finite() {
        return Err(invalid("LCU coefficients must be finite and not all zero"));
    }
    let m = ceil_log2(c.len().max(2));
    let dim = 1usize << m;
    let mut padded_coeffs = vec![re(T::zero()); dim];
    padded_coeffs[..c.len()].copy_from_slice(c);
    let magnitudes: Vec<T> = padded_coeffs.iter().map(|&z| modulus(z)).collect();
    let phases = padded_coeffs
        .iter()
        .zip(&magnitudes)
        .map(|(&z, &mag)| if mag > T::zero() { z / re(mag) } else { re(T::one()) })
        .collect();
    Ok(LcuPlan {
        m,
        terms: c.len(),
        padded_coeffs,
        phases,
        magnitudes,
        c_norm,
    })
}

fn ceil_log2(x: usize) -> usize {
    (usize::BITS - (x - 1).leading_zeros()) as usize
}

/// Postselected state and its bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct LcuOutcome<T: Real = f64> {
    pub state: StateVector<T>,
    /// Probability of reading `|0^m>` on the ancillas, `(‖M b‖ / c_norm)²`.
    pub success_prob: T,
    /// `c_norm / ‖M b‖`: expected rounds with amplitude amplification.
    pub expected_repetitions: T,
    /// `‖M b‖`.
    pub operator_norm_on_b: T,
}

fn outcome<T: Real>(n: usize, v: DVector<Cx<T>>, c_norm: T, success_prob: T) -> Result<LcuOutcome<T>> {
    let norm = v.norm();
    if !(norm > lit(1e-14)) {
        return Err(QklsError::NullState { norm: to_f64(norm) });
    }
    Ok(LcuOutcome {
        state: StateVector::from_amplitudes(n, v)?,
        success_prob,
        expected_repetitions: c_norm / norm,
        operator_norm_on_b: norm,
    })
}

/// `v = Σ_n c_n e^{-iHnτ}|b>` applied directly to the state.
pub fn apply_lcu_direct<T: Real>(
    prop: &Propagator<T>,
    b: &StateVector<T>,
    c: &[Cx<T>],
    tau: T,
) -> Result<LcuOutcome<T>> {
    let plan = plan_lcu(c)?;
    let weighted: Vec<(Cx<T>, T)> = c
        .iter()
        .enumerate()
        .map(|(n, &cn)| (cn, from_usize::<T>(n) * tau))
        .collect();
    let v = prop.combine(&weighted, b);
    let norm = v.norm();
    let ratio = norm / plan.c_norm;
    outcome(b.num_qubits(), v, plan.c_norm, ratio * ratio)
}

/// Simulates `V† U V` on the `(m + n)`-qubit register and postselects the
/// ancillas on `|0^m>`.
///
/// `U` is realized as the ladder of controlled `e^{-iH 2^r τ}`, `r = 0..m-1`,
/// preceded by the diagonal phases of the plan.
pub fn apply_lcu_circuit<T: Real>(
    prop: &Propagator<T>,
    b: &StateVector<T>,
    plan: &LcuPlan<T>,
    tau: T,
) -> Result<LcuOutcome<T>> {
    let dim_anc = 1usize << plan.m;
    if plan.padded_coeffs.len() != dim_anc || plan.phases.len() != dim_anc {
        return Err(invalid("LCU plan is inconsistent with its ancilla count"));
    }
    let v_mat = plan.prepare_unitary();
    let zero = DVector::from_element(b.dim(), re(T::zero()));

    // |0^m>|b>
    let mut register: Vec<DVector<Cx<T>>> = vec![zero.clone(); dim_anc];
    register[0] = b.amplitudes().clone();

    register = apply_ancilla_matrix(&v_mat, &register, &zero);

    for (branch, &phase) in register.iter_mut().zip(&plan.phases) {
        *branch *= phase;
    }
    for r in 0..plan.m {
        let t = from_usize::<T>(1usize << r) * tau;
        for (j, branch) in register.iter_mut().enumerate() {
            if j >> r & 1 == 1 {
                *branch = prop.evolve_vector(t, branch);
            }
        }
    }

    register = apply_ancilla_matrix(&v_mat.transpose(), &register, &zero);

    let kept = register.swap_remove(0);
    let p = kept.norm_squared();
    outcome(b.num_qubits(), kept, plan.c_norm, p)
}

/// `branch_i <- Σ_j M[i][j] branch_j` for a real matrix acting on the ancillas.
fn apply_ancilla_matrix<T: Real>(
    mat: &DMatrix<T>,
    register: &[DVector<Cx<T>>],
    zero: &DVector<Cx<T>>,
) -> Vec<DVector<Cx<T>>> {
    (0..register.len())
        .map(|i| {
            register.iter().enumerate().fold(zero.clone(), |acc, (j, branch)| {
                let w = mat[(i, j)];
                if w == T::zero() {
                    acc
                } else {
                    acc + branch * Complex::new(w, T::zero())
                }
            })
        })
        .collect()
}

/// `|1 - |<approx, reference>||`; insensitive to global phase.
pub fn error_metric<T: Real>(approx: &StateVector<T>, reference: &StateVector<T>) -> Result<T> {
    let overlap = inner(approx, reference)?;
    Ok((T::one() - modulus(overlap)).abs())
}
