//! Statevector simulation: `|b>` preparation, exact and Trotterized time
//! evolution `e^{-iHt}`, inner products and the reference solution `H^{-1}|b>`.

use nalgebra::DVector;
use num_complex::Complex;

use crate::error::{invalid, QklsError, Result};
use crate::hamiltonian::{EigenSystem, PauliSum, ZERO_EIGENVALUE_TOL};
use crate::scalar::{expi_neg, from_usize, lit, re, to_f64, Cx, Real};

/// Normalized `n`-qubit state.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector<T: Real = f64> {
    n: usize,
    amps: DVector<Cx<T>>,
}

impl<T: Real> StateVector<T> {
    /// Normalizes `amps`; the length must be `2^n`.
    pub fn from_amplitudes(n: usize, amps: DVector<Cx<T>>) -> Result<Self> {
        if n == 0 {
            return Err(invalid("qubit count must be at least 1"));
        }
        if amps.len() != 1 << n {
            return Err(QklsError::DimensionMismatch {
                expected: 1 << n,
                found: amps.len(),
            });
        }
        let norm = amps.norm();
        if !(norm > lit(1e-14)) || !norm.is_finite() {
            return Err(QklsError::NullState { norm: to_f64(norm) });
        }
        Ok(Self {
            n,
            amps: amps.unscale(norm),
        })
    }

    /// Like [`from_amplitudes`](Self::from_amplitudes) but infers `n` from the length.
    pub fn from_vec(amps: Vec<Cx<T>>) -> Result<Self> {
        let len = amps.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(invalid(format!("length {len} is not a power of two >= 2")));
        }
        Self::from_amplitudes(len.trailing_zeros() as usize, DVector::from_vec(amps))
    }

    /// Computational basis state `|index>`.
    pub fn basis(n: usize, index: usize) -> Result<Self> {
        if index >= 1 << n {
            return Err(invalid(format!("basis index {index} out of range")));
        }
        let mut amps = DVector::from_element(1 << n, re(T::zero()));
        amps[index] = re(T::one());
        Self::from_amplitudes(n, amps)
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &DVector<Cx<T>> {
        &self.amps
    }

    pub fn into_amplitudes(self) -> DVector<Cx<T>> {
        self.amps
    }

    pub fn norm(&self) -> T {
        self.amps.norm()
    }

    /// `<self|other>`, conjugating `self`.
    pub fn inner(&self, other: &Self) -> Result<Cx<T>> {
        inner(self, other)
    }
}

/// `|b> = H^{⊗n}|0>`: every amplitude equals `2^{-n/2}`.
pub fn prepare_b<T: Real>(n: usize) -> Result<StateVector<T>> {
    if n == 0 {
        return Err(invalid("qubit count must be at least 1"));
    }
    let dim = 1usize << n;
    let a = T::one() / from_usize::<T>(dim).sqrt();
    StateVector::from_amplitudes(n, DVector::from_element(dim, re(a)))
}

/// `<psi|phi>` with conjugation on the first argument.
pub fn inner<T: Real>(psi: &StateVector<T>, phi: &StateVector<T>) -> Result<Cx<T>> {
    if psi.dim() != phi.dim() {
        return Err(QklsError::DimensionMismatch {
            expected: psi.dim(),
            found: phi.dim(),
        });
    }
    Ok(psi.amps.dotc(&phi.amps))
}

/// How `e^{-iHt}` is realized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EvolutionBackend {
    /// Diagonalize once and exponentiate the spectrum.
    #[default]
    Exact,
    /// First-order product formula over the Pauli terms.
    Trotter1 { steps_per_unit_time: u32 },
    /// Symmetric second-order product formula.
    Trotter2 { steps_per_unit_time: u32 },
}

#[derive(Debug, Clone)]
enum Engine<T: Real> {
    Exact(EigenSystem<T>),
    Trotter { order: u8, steps_per_unit_time: u32 },
}

/// Time-evolution operator for a fixed Hamiltonian.
///
/// The exact backend caches the eigendecomposition; the value is read-only
/// afterwards and can be shared between threads.
#[derive(Debug, Clone)]
pub struct Propagator<T: Real = f64> {
    h: PauliSum<T>,
    engine: Engine<T>,
}

impl<T: Real> Propagator<T> {
    pub fn new(h: &PauliSum<T>, backend: EvolutionBackend) -> Result<Self> {
        let engine = match backend {
            EvolutionBackend::Exact => Engine::Exact(EigenSystem::of(h)?),
            EvolutionBackend::Trotter1 { steps_per_unit_time } => {
                trotter_engine(1, steps_per_unit_time)?
            }
            EvolutionBackend::Trotter2 { steps_per_unit_time } => {
                trotter_engine(2, steps_per_unit_time)?
            }
        };
        Ok(Self { h: h.clone(), engine })
    }

    pub fn exact(h: &PauliSum<T>) -> Result<Self> {
        Self::new(h, EvolutionBackend::Exact)
    }

    /// Exact propagator reusing an eigensystem that must describe `h`.
    pub fn with_eigensystem(h: &PauliSum<T>, eig: EigenSystem<T>) -> Result<Self> {
        if eig.dim() != h.dim() {
            return Err(QklsError::DimensionMismatch {
                expected: h.dim(),
                found: eig.dim(),
            });
        }
        Ok(Self {
            h: h.clone(),
            engine: Engine::Exact(eig),
        })
    }

    pub fn hamiltonian(&self) -> &PauliSum<T> {
        &self.h
    }

    pub fn backend(&self) -> EvolutionBackend {
        match self.engine {
            Engine::Exact(_) => EvolutionBackend::Exact,
            Engine::Trotter { order: 1, steps_per_unit_time } => {
                EvolutionBackend::Trotter1 { steps_per_unit_time }
            }
            Engine::Trotter { steps_per_unit_time, .. } => {
                EvolutionBackend::Trotter2 { steps_per_unit_time }
            }
        }
    }

    pub fn eigensystem(&self) -> Option<&EigenSystem<T>> {
        match &self.engine {
            Engine::Exact(eig) => Some(eig),
            Engine::Trotter { .. } => None,
        }
    }

    /// `e^{-iHt}|psi>`, renormalized. Negative `t` runs the evolution backwards.
    pub fn evolve(&self, t: T, psi: &StateVector<T>) -> StateVector<T> {
        assert_eq!(psi.dim(), self.h.dim(), "state dimension does not match Hamiltonian");
        if t == T::zero() {
            return psi.clone();
        }
        let amps = match &self.engine {
            Engine::Exact(eig) => eig.apply_fn(&psi.amps, |lam| expi_neg(lam * t)),
            Engine::Trotter { order, steps_per_unit_time } => {
                trotterize(&self.h, t, *order, *steps_per_unit_time, psi.amps.clone())
            }
        };
        StateVector::from_amplitudes(psi.n, amps).expect("unitary evolution preserves the norm")
    }

    /// `e^{-iHt} v` for an arbitrary (unnormalized) vector; the norm is preserved.
    pub fn evolve_vector(&self, t: T, v: &DVector<Cx<T>>) -> DVector<Cx<T>> {
        assert_eq!(v.len(), self.h.dim(), "vector dimension does not match Hamiltonian");
        let norm = v.norm();
        if t == T::zero() || norm == T::zero() {
            return v.clone();
        }
        let out = match &self.engine {
            Engine::Exact(eig) => eig.apply_fn(v, |lam| expi_neg(lam * t)),
            Engine::Trotter { order, steps_per_unit_time } => {
                trotterize(&self.h, t, *order, *steps_per_unit_time, v.clone())
            }
        };
        let out_norm = out.norm();
        out * re(norm / out_norm)
    }

    /// Unnormalized `Σ_j w_j e^{-iH t_j}|psi>`.
    pub fn combine(&self, terms: &[(Cx<T>, T)], psi: &StateVector<T>) -> DVector<Cx<T>> {
        match &self.engine {
            Engine::Exact(eig) => {
                let mut coords = eig.to_eigenbasis(&psi.amps);
                for (z, &lam) in coords.iter_mut().zip(eig.values()) {
                    let factor = terms
                        .iter()
                        .fold(re(T::zero()), |acc, &(w, t)| acc + w * expi_neg(lam * t));
                    *z *= factor;
                }
                eig.from_eigenbasis(&coords)
            }
            Engine::Trotter { .. } => terms.iter().fold(
                DVector::from_element(psi.dim(), re(T::zero())),
                |acc, &(w, t)| acc + self.evolve(t, psi).amps * w,
            ),
        }
    }

    /// `H|psi>` (not normalized).
    pub fn apply_hamiltonian(&self, psi: &StateVector<T>) -> DVector<Cx<T>> {
        DVector::from_vec(self.h.apply(psi.amps.as_slice()))
    }
}

fn trotter_engine<T: Real>(order: u8, steps_per_unit_time: u32) -> Result<Engine<T>> {
    if steps_per_unit_time == 0 {
        return Err(invalid("steps_per_unit_time must be positive"));
    }
    Ok(Engine::Trotter { order, steps_per_unit_time })
}

/// Applies `e^{-i c P dt}` in place: `cos(c dt) psi - i sin(c dt) P psi`.
fn apply_pauli_exponential<T: Real>(
    coeff: T,
    string: &crate::hamiltonian::PauliString,
    dt: T,
    psi: &mut DVector<Cx<T>>,
) {
    let theta = coeff * dt;
    if string.is_identity() {
        let phase = expi_neg(theta);
        psi.iter_mut().for_each(|z| *z *= phase);
        return;
    }
    let masks = string.masks();
    let (cos, sin) = (theta.cos(), theta.sin());
    let minus_i_sin = Complex::new(T::zero(), -sin);
    let mut out = psi.map(|z| z * cos);
    for (x, &amp) in psi.iter().enumerate() {
        let (y, phase) = masks.act::<T>(x);
        out[y] += minus_i_sin * phase * amp;
    }
    *psi = out;
}

fn trotterize<T: Real>(
    h: &PauliSum<T>,
    t: T,
    order: u8,
    steps_per_unit_time: u32,
    mut psi: DVector<Cx<T>>,
) -> DVector<Cx<T>> {
    let steps_f = (t.abs() * from_usize::<T>(steps_per_unit_time as usize)).ceil();
    let steps = steps_f.to_usize().unwrap_or(1).max(1);
    let dt = t / from_usize::<T>(steps);
    let terms = h.terms();
    for _ in 0..steps {
        match order {
            1 => {
                for term in terms {
                    apply_pauli_exponential(term.coeff, &term.string, dt, &mut psi);
                }
            }
            _ => {
                let half = dt / lit(2.0);
                for term in terms {
                    apply_pauli_exponential(term.coeff, &term.string, half, &mut psi);
                }
                for term in terms.iter().rev() {
                    apply_pauli_exponential(term.coeff, &term.string, half, &mut psi);
                }
            }
        }
    }
    psi
}

/// Free-standing `e^{-iHt}|psi>` that builds a one-shot propagator.
pub fn evolve<T: Real>(
    h: &PauliSum<T>,
    t: T,
    psi: &StateVector<T>,
    backend: EvolutionBackend,
) -> Result<StateVector<T>> {
    if psi.dim() != h.dim() {
        return Err(QklsError::DimensionMismatch {
            expected: h.dim(),
            found: psi.dim(),
        });
    }
    Ok(Propagator::new(h, backend)?.evolve(t, psi))
}

/// Normalized `H^{-1}|b>` by eigendecomposition.
pub fn exact_solution<T: Real>(h: &PauliSum<T>, b: &StateVector<T>) -> Result<StateVector<T>> {
    exact_solution_with(&EigenSystem::of(h)?, b)
}

pub fn exact_solution_with<T: Real>(eig: &EigenSystem<T>, b: &StateVector<T>) -> Result<StateVector<T>> {
    if eig.dim() != b.dim() {
        return Err(QklsError::DimensionMismatch {
            expected: eig.dim(),
            found: b.dim(),
        });
    }
    let tol = lit::<T>(ZERO_EIGENVALUE_TOL);
    if let Some(&lam) = eig.values().iter().find(|l| l.abs() < tol) {
        return Err(QklsError::SingularHamiltonian {
            eigenvalue: to_f64(lam),
            tolerance: ZERO_EIGENVALUE_TOL,
        });
    }
    let x = eig.apply_fn(b.amplitudes(), |lam| re(T::one() / lam));
    StateVector::from_amplitudes(b.num_qubits(), x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn x_hamiltonian() -> PauliSum<f64> {
        PauliSum::new(1, [(1.0, "X".parse().unwrap())]).unwrap()
    }

    #[test]
    fn prepare_b_is_uniform() {
        for n in [1usize, 2, 10] {
            let b = prepare_b::<f64>(n).unwrap();
            let expected = 1.0 / (b.dim() as f64).sqrt();
            assert!(b.amplitudes().iter().all(|z| (z.re - expected).abs() < 1e-15 && z.im == 0.0));
        }
    }

    #[test]
    fn inner_product_examples() {
        let zero = StateVector::<f64>::basis(1, 0).unwrap();
        let one = StateVector::<f64>::basis(1, 1).unwrap();
        let plus = prepare_b::<f64>(1).unwrap();
        assert_relative_eq!(inner(&plus, &plus).unwrap().re, 1.0, epsilon = 1e-15);
        assert_eq!(inner(&zero, &one).unwrap(), re(0.0));
        assert_relative_eq!(inner(&zero, &plus).unwrap().re, 0.5f64.sqrt(), epsilon = 1e-15);
        assert!(inner(&zero, &prepare_b(2).unwrap()).is_err());
    }

    #[test]
    fn x_rotation_closed_form() {
        let prop = Propagator::exact(&x_hamiltonian()).unwrap();
        let zero = StateVector::basis(1, 0).unwrap();
        for t in [0.3, -1.1, 2.5] {
            let out = prop.evolve(t, &zero);
            let a = out.amplitudes();
            assert!((a[0] - Complex::new(f64::cos(t), 0.0)).norm() < 1e-14);
            assert!((a[1] - Complex::new(0.0, -f64::sin(t))).norm() < 1e-14);
        }
        let plus = prepare_b(1).unwrap();
        let out = prop.evolve(0.7, &plus);
        assert_relative_eq!(inner(&out, &plus).unwrap().norm(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn commuting_terms_make_trotter_exact() {
        let h = PauliSum::new(2, [(0.4, "ZI".parse().unwrap()), (0.7, "ZZ".parse().unwrap())]).unwrap();
        let psi = prepare_b(2).unwrap();
        let exact = evolve(&h, 1.3, &psi, EvolutionBackend::Exact).unwrap();
        let trot = evolve(&h, 1.3, &psi, EvolutionBackend::Trotter1 { steps_per_unit_time: 1 }).unwrap();
        assert!((exact.amplitudes() - trot.amplitudes()).norm() < 1e-13);
    }

    #[test]
    fn zero_step_density_rejected() {
        let backend = EvolutionBackend::Trotter2 { steps_per_unit_time: 0 };
        assert!(Propagator::new(&x_hamiltonian(), backend).is_err());
    }

    #[test]
    fn exact_solution_of_diagonal_operator() {
        let h = PauliSum::new(1, [(0.75, "I".parse().unwrap()), (-0.25, "Z".parse().unwrap())]).unwrap();
        let x = exact_solution(&h, &prepare_b(1).unwrap()).unwrap();
        let norm = 5f64.sqrt();
        assert_relative_eq!(x.amplitudes()[0].re, 2.0 / norm, epsilon = 1e-14);
        assert_relative_eq!(x.amplitudes()[1].re, 1.0 / norm, epsilon = 1e-14);
    }

    #[test]
    fn eigenvector_right_hand_side_is_returned() {
        let h = PauliSum::new(1, [(0.5, "X".parse().unwrap())]).unwrap();
        let b = prepare_b(1).unwrap();
        let x = exact_solution(&h, &b).unwrap();
        assert_relative_eq!(inner(&x, &b).unwrap().norm(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn singular_operator_has_no_solution() {
        let h = PauliSum::new(1, [(1.0, "I".parse().unwrap()), (1.0, "Z".parse().unwrap())]).unwrap();
        assert!(matches!(
            exact_solution(&h, &prepare_b(1).unwrap()),
            Err(QklsError::SingularHamiltonian { .. })
        ));
    }

    #[test]
    fn evolve_vector_keeps_norm_and_zero() {
        let prop = Propagator::exact(&x_hamiltonian()).unwrap();
        let v = DVector::from_vec(vec![Complex::new(2.0, 0.0), Complex::new(0.0, 1.0)]);
        assert_relative_eq!(prop.evolve_vector(0.4, &v).norm(), v.norm(), epsilon = 1e-14);
        let zero = DVector::from_element(2, re(0.0));
        assert_eq!(prop.evolve_vector(0.4, &zero), zero);
    }
}
