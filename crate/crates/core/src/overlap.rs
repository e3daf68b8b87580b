//! Hadamard-test overlap estimation.
//!
//! `<b|U|b>` for `U = e^{-iHt}` is read out of an ancilla: after
//! `H · (phase) · controlled-U · H` the ancilla is `|0>` with probability
//! `(1 + Re<U>)/2`, or `(1 + Im<U>)/2` when the `S†` phase gate is inserted.
//! Matrix elements `<φ_n'|H|φ_n>` are obtained without implementing `H` by a
//! first-order finite difference in time:
//!
//! ```text
//! A = <b|e^{-iH(kτ + t)}|b>,  B = <b|e^{-iHkτ}|b>,  k = n - n'
//! Re<H> ≈ (Im B - Im A) / t,  Im<H> ≈ (Re A - Re B) / t
//! ```
//!
//! Every evolution commutes with every other, so a bra-ket pair collapses
//! to one evolution of total time `kτ (+ t)` applied to `|b>`.

use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use crate::error::{invalid, Result};
use crate::hamiltonian::EigenSystem;
use crate::scalar::{expi_neg, from_i64, from_usize, lit, re, to_f64, Cx, Real};
use crate::statevector::{inner, Propagator, StateVector};

/// Which component of `<U>` a Hadamard test measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Part {
    Real,
    Imag,
}

/// Shot budget and seed for sampled estimation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ShotModel {
    pub shots_per_circuit: u64,
    pub seed: u64,
}

/// Exact expectations or finite-shot sampling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Shots {
    #[default]
    Exact,
    Sampled(ShotModel),
}

impl Shots {
    pub fn sampled(shots_per_circuit: u64, seed: u64) -> Self {
        Shots::Sampled(ShotModel { shots_per_circuit, seed })
    }

    pub fn count(&self) -> Option<u64> {
        match self {
            Shots::Exact => None,
            Shots::Sampled(m) => Some(m.shots_per_circuit),
        }
    }
}

/// Sign pattern used to turn overlaps into `<H>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SignConvention {
    /// Follows `e^{-iHt} = I - iHt + O(t²)`; converges to the true element.
    #[default]
    Corrected,
    /// The pattern that assumes `e^{-iHt} = I + iHt + ...`. It converges to
    /// `-<H>` and exists only as a regression target.
    Flipped,
}

/// Identifies the circuit a random stream belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Circuit {
    /// `<b|e^{-iHkτ}|b>` used for `s`.
    Overlap { k: i64 },
    /// Finite-difference leg with the extra `t` (`A`).
    Shifted { k: i64 },
    /// Finite-difference leg without it (`B`).
    Unshifted { k: i64 },
}

impl Circuit {
    fn stream(self, part: Part) -> u64 {
        let (kind, k) = match self {
            Circuit::Overlap { k } => (1u64, k),
            Circuit::Shifted { k } => (2, k),
            Circuit::Unshifted { k } => (3, k),
        };
        let part = match part {
            Part::Real => 0u64,
            Part::Imag => 1,
        };
        splitmix64(splitmix64(kind << 1 | part) ^ k as u64)
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// One ancilla readout: `2 P(0) - 1` and its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Measurement<T: Real = f64> {
    pub value: T,
    pub std_error: T,
}

/// Complex estimate with per-component standard errors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverlapEstimate<T: Real = f64> {
    pub value: Cx<T>,
    /// `None` for exact expectations.
    pub shots: Option<u64>,
    pub std_error_re: T,
    pub std_error_im: T,
}

impl<T: Real> OverlapEstimate<T> {
    pub fn exact(value: Cx<T>) -> Self {
        Self {
            value,
            shots: None,
            std_error_re: T::zero(),
            std_error_im: T::zero(),
        }
    }

    /// Larger of the two component standard errors.
    pub fn std_error(&self) -> T {
        self.std_error_re.max(self.std_error_im)
    }
}

/// Probability that the Hadamard-test ancilla reads `|0>`, from an explicit
/// simulation of the two ancilla branches.
pub fn ancilla_zero_probability<T: Real>(
    prop: &Propagator<T>,
    b: &StateVector<T>,
    total_time: T,
    part: Part,
) -> T {
    let ub = prop.evolve(total_time, b);
    // Ancilla |1> branch carries U|b>; S† multiplies it by -i before the final H.
    let phase = match part {
        Part::Real => re(T::one()),
        Part::Imag => Complex::new(T::zero(), -T::one()),
    };
    let half = lit::<T>(0.5);
    let zero_branch = (b.amplitudes() + ub.amplitudes() * phase) * re(half);
    zero_branch.norm_squared().max(T::zero()).min(T::one())
}

/// Simulated Hadamard test of `U = e^{-iH total_time}` on `|b>`.
///
/// Exact mode returns `Re<U>` or `Im<U>`; sampled mode draws
/// `shots_per_circuit` ancilla outcomes and returns `2 · (fraction of 0) - 1`.
pub fn hadamard_test<T: Real>(
    prop: &Propagator<T>,
    b: &StateVector<T>,
    total_time: T,
    part: Part,
    shots: &Shots,
    circuit: Circuit,
) -> Result<Measurement<T>> {
    if !total_time.is_finite() {
        return Err(invalid("evolution time must be finite"));
    }
    let p0 = ancilla_zero_probability(prop, b, total_time, part);
    match shots {
        Shots::Exact => Ok(Measurement {
            value: lit::<T>(2.0) * p0 - T::one(),
            std_error: T::zero(),
        }),
        Shots::Sampled(model) => {
            if model.shots_per_circuit == 0 {
                return Err(invalid("shots per circuit must be positive"));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(model.seed);
            rng.set_stream(circuit.stream(part));
            let dist = Binomial::new(model.shots_per_circuit, to_f64(p0).clamp(0.0, 1.0))
                .map_err(|e| invalid(e.to_string()))?;
            let zeros = dist.sample(&mut rng);
            let shots_t = from_usize::<T>(model.shots_per_circuit as usize);
            let frac = from_usize::<T>(zeros as usize) / shots_t;
            let value = lit::<T>(2.0) * frac - T::one();
            let std_error = ((T::one() - value * value).max(T::zero()) / shots_t).sqrt();
            Ok(Measurement { value, std_error })
        }
    }
}

/// Overlap and matrix-element estimator bound to one `(H, |b>)` pair.
#[derive(Debug, Clone, Copy)]
pub struct OverlapEstimator<'a, T: Real = f64> {
    prop: &'a Propagator<T>,
    b: &'a StateVector<T>,
    shots: Shots,
    sign: SignConvention,
}

impl<'a, T: Real> OverlapEstimator<'a, T> {
    pub fn new(prop: &'a Propagator<T>, b: &'a StateVector<T>) -> Self {
        Self {
            prop,
            b,
            shots: Shots::Exact,
            sign: SignConvention::Corrected,
        }
    }

    pub fn with_shots(mut self, shots: Shots) -> Self {
        self.shots = shots;
        self
    }

    pub fn with_sign(mut self, sign: SignConvention) -> Self {
        self.sign = sign;
        self
    }

    pub fn shots(&self) -> Shots {
        self.shots
    }

    /// `<b|e^{-iH total_time}|b>` from a real and an imaginary Hadamard test.
    pub fn overlap(&self, total_time: T, circuit: Circuit) -> Result<OverlapEstimate<T>> {
        let r = hadamard_test(self.prop, self.b, total_time, Part::Real, &self.shots, circuit)?;
        let i = hadamard_test(self.prop, self.b, total_time, Part::Imag, &self.shots, circuit)?;
        Ok(OverlapEstimate {
            value: Complex::new(r.value, i.value),
            shots: self.shots.count(),
            std_error_re: r.std_error,
            std_error_im: i.std_error,
        })
    }

    /// `s[n'] = <φ_n'|φ_0> = <b|e^{+iHn'τ}|b>`.
    pub fn s_element(&self, n_prime: usize, tau: T) -> Result<OverlapEstimate<T>> {
        let k = -(n_prime as i64);
        self.overlap(from_i64::<T>(k) * tau, Circuit::Overlap { k })
    }

    /// Finite-difference estimate of `<φ_n'|H|φ_n>` with time step `t_fd`.
    pub fn f_element_fd(
        &self,
        n_prime: usize,
        n: usize,
        tau: T,
        t_fd: T,
    ) -> Result<OverlapEstimate<T>> {
        if !(t_fd > T::zero()) || !t_fd.is_finite() {
            return Err(invalid(format!("finite-difference time must be positive, got {t_fd}")));
        }
        let k = n as i64 - n_prime as i64;
        let base = from_i64::<T>(k) * tau;
        let a = self.overlap(base + t_fd, Circuit::Shifted { k })?;
        let b = self.overlap(base, Circuit::Unshifted { k })?;
        let (re_part, im_part) = match self.sign {
            SignConvention::Corrected => (
                (b.value.im - a.value.im) / t_fd,
                (a.value.re - b.value.re) / t_fd,
            ),
            SignConvention::Flipped => (
                (a.value.im - b.value.im) / t_fd,
                (b.value.re - a.value.re) / t_fd,
            ),
        };
        Ok(OverlapEstimate {
            value: Complex::new(re_part, im_part),
            shots: self.shots.count(),
            std_error_re: a.std_error_im.hypot(b.std_error_im) / t_fd,
            std_error_im: a.std_error_re.hypot(b.std_error_re) / t_fd,
        })
    }

    /// Statevector reference `<evolve(n'τ, b)| H |evolve(nτ, b)>`.
    ///
    /// With the exact backend this is evaluated spectrally,
    /// `Σ_i |<v_i|b>|² λ_i e^{-iλ_i (n - n')τ}`, so that `H` and its
    /// evolutions come from the same decomposition.
    pub fn f_element_exact(&self, n_prime: usize, n: usize, tau: T) -> Cx<T> {
        if let Some(eig) = self.prop.eigensystem() {
            let t = (from_usize::<T>(n) - from_usize::<T>(n_prime)) * tau;
            return spectral_sum(eig, self.b, |lam| expi_neg(lam * t) * lam);
        }
        let bra = self.prop.evolve(from_usize::<T>(n_prime) * tau, self.b);
        let ket = self.prop.evolve(from_usize::<T>(n) * tau, self.b);
        let h_ket = self.prop.apply_hamiltonian(&ket);
        bra.amplitudes().dotc(&h_ket)
    }

    /// Statevector reference for `s[n']`.
    pub fn s_element_exact(&self, n_prime: usize, tau: T) -> Cx<T> {
        if let Some(eig) = self.prop.eigensystem() {
            let t = -from_usize::<T>(n_prime) * tau;
            return spectral_sum(eig, self.b, |lam| expi_neg(lam * t));
        }
        let bra = self.prop.evolve(from_usize::<T>(n_prime) * tau, self.b);
        inner(&bra, self.b).expect("same register")
    }
}

/// `Σ_i |<v_i|b>|² f(λ_i)`.
fn spectral_sum<T: Real>(eig: &EigenSystem<T>, b: &StateVector<T>, f: impl Fn(T) -> Cx<T>) -> Cx<T> {
    let coords = eig.to_eigenbasis(b.amplitudes());
    coords
        .iter()
        .zip(eig.values())
        .fold(re(T::zero()), |acc, (z, &lam)| acc + f(lam) * z.norm_sqr())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{build_ising, PauliSum};
    use crate::statevector::prepare_b;
    use approx::assert_relative_eq;

    fn pauli_x() -> (Propagator<f64>, StateVector<f64>) {
        let h = PauliSum::new(1, [(1.0, "X".parse().unwrap())]).unwrap();
        (Propagator::exact(&h).unwrap(), prepare_b(1).unwrap())
    }

    #[test]
    fn identity_evolution_reads_one_and_zero() {
        let (prop, b) = pauli_x();
        let c = Circuit::Overlap { k: 0 };
        let r = hadamard_test(&prop, &b, 0.0, Part::Real, &Shots::Exact, c).unwrap();
        let i = hadamard_test(&prop, &b, 0.0, Part::Imag, &Shots::Exact, c).unwrap();
        assert_relative_eq!(r.value, 1.0, epsilon = 1e-15);
        assert_relative_eq!(i.value, 0.0, epsilon = 1e-15);
        // Real part is deterministic even when sampled.
        let s = hadamard_test(&prop, &b, 0.0, Part::Real, &Shots::sampled(100, 3), c).unwrap();
        assert_eq!(s.value, 1.0);
    }

    #[test]
    fn phase_gate_convention_on_plus_state() {
        // X|+> = |+>, so <+|e^{-iXt}|+> = e^{-it}.
        let (prop, b) = pauli_x();
        let t = 0.7;
        let c = Circuit::Overlap { k: 0 };
        let r = hadamard_test(&prop, &b, t, Part::Real, &Shots::Exact, c).unwrap();
        let i = hadamard_test(&prop, &b, t, Part::Imag, &Shots::Exact, c).unwrap();
        assert_relative_eq!(r.value, f64::cos(t), epsilon = 1e-14);
        assert_relative_eq!(i.value, -f64::sin(t), epsilon = 1e-14);
    }

    #[test]
    fn zero_shots_rejected() {
        let (prop, b) = pauli_x();
        let r = hadamard_test(&prop, &b, 0.1, Part::Real, &Shots::sampled(0, 1), Circuit::Overlap { k: 0 });
        assert!(r.is_err());
    }

    #[test]
    fn s_element_closed_forms() {
        let (prop, b) = pauli_x();
        let est = OverlapEstimator::new(&prop, &b);
        let s0 = est.s_element(0, 0.1).unwrap();
        assert_relative_eq!(s0.value.re, 1.0, epsilon = 1e-15);
        assert_relative_eq!(s0.value.im, 0.0, epsilon = 1e-15);
        let s3 = est.s_element(3, 0.1).unwrap();
        assert_relative_eq!(s3.value.re, f64::cos(0.3), epsilon = 1e-14);
        assert_relative_eq!(s3.value.im, f64::sin(0.3), epsilon = 1e-14);
        assert_eq!(s3.std_error(), 0.0);
        assert_eq!(s3.shots, None);
    }

    #[test]
    fn finite_difference_on_plus_state() {
        let (prop, b) = pauli_x();
        let est = OverlapEstimator::new(&prop, &b);
        let t = 0.01;
        let f = est.f_element_fd(2, 2, 0.1, t).unwrap();
        // Closed form: Re = sin(t)/t, Im = (cos t - 1)/t.
        assert_relative_eq!(f.value.re, f64::sin(t) / t, epsilon = 1e-12);
        assert_relative_eq!(f.value.im, (f64::cos(t) - 1.0) / t, epsilon = 1e-12);
        assert!((f.value.re - 0.99998).abs() < 1e-5);
        assert!((f.value.im + 0.005).abs() < 1e-5);
    }

    #[test]
    fn finite_difference_zero_expectation() {
        let h = PauliSum::new(1, [(1.0, "Z".parse().unwrap())]).unwrap();
        let prop = Propagator::exact(&h).unwrap();
        let b = prepare_b(1).unwrap();
        let est = OverlapEstimator::new(&prop, &b);
        for t in [0.1, 0.01, 0.001] {
            let f = est.f_element_fd(0, 0, 0.3, t).unwrap();
            assert_relative_eq!(f.value.re, 0.0, epsilon = 1e-12);
            assert_relative_eq!(f.value.im, (f64::cos(t) - 1.0) / t, epsilon = 1e-11);
        }
    }

    #[test]
    fn nonpositive_fd_time_rejected() {
        let (prop, b) = pauli_x();
        let est = OverlapEstimator::new(&prop, &b);
        assert!(est.f_element_fd(0, 1, 0.1, 0.0).is_err());
        assert!(est.f_element_fd(0, 1, 0.1, -0.01).is_err());
    }

    #[test]
    fn exact_elements_are_hermitian_toeplitz() {
        let h = build_ising(3, 0.1, 1.3, 2.9).unwrap();
        let prop = Propagator::exact(&h).unwrap();
        let b = prepare_b(3).unwrap();
        let est = OverlapEstimator::new(&prop, &b);
        let tau = 0.2;
        let diag = est.f_element_exact(2, 2, tau);
        assert!(f64::abs(diag.im) < 1e-12);
        let a = est.f_element_exact(1, 3, tau);
        let shifted = est.f_element_exact(2, 4, tau);
        let adj = est.f_element_exact(3, 1, tau).conj();
        assert!((a - shifted).norm() < 1e-12);
        assert!((a - adj).norm() < 1e-12);
    }

    #[test]
    fn sampled_streams_are_deterministic() {
        let (prop, b) = pauli_x();
        let est = OverlapEstimator::new(&prop, &b).with_shots(Shots::sampled(500, 42));
        let x = est.s_element(2, 0.3).unwrap();
        let y = est.s_element(2, 0.3).unwrap();
        assert_eq!(x, y);
        assert!(x.value.re.abs() <= 1.0 && x.value.im.abs() <= 1.0);
        assert!(x.std_error_re > 0.0);
        let other = OverlapEstimator::new(&prop, &b).with_shots(Shots::sampled(500, 43));
        assert_ne!(x, other.s_element(2, 0.3).unwrap());
    }
}
