use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex;

use super::{build_ising, PauliSum, DEFAULT_DENSE_CAP};
use crate::error::{invalid, QklsError, Result};
use crate::scalar::{lit, modulus, to_f64, Cx, Real};

/// Eigenvalues below this magnitude make a Hamiltonian singular.
pub const ZERO_EIGENVALUE_TOL: f64 = 1e-12;

/// Eigendecomposition `H = U diag(values) U†` with ascending eigenvalues.
///
/// The eigenvector matrix is shared, so affine transforms of the spectrum
/// (shift and scale) are free.
#[derive(Debug, Clone)]
pub struct EigenSystem<T: Real = f64> {
    values: Vec<T>,
    vectors: Arc<DMatrix<Cx<T>>>,
}

impl<T: Real> EigenSystem<T> {
    pub fn of(h: &PauliSum<T>) -> Result<Self> {
        Ok(Self::of_dense(&h.to_dense_with_cap(DEFAULT_DENSE_CAP)?))
    }

    /// Hermitian eigensolve; real-valued inputs go through the cheaper real solver.
    pub fn of_dense(dense: &DMatrix<Cx<T>>) -> Self {
        assert!(dense.is_square(), "eigensolve needs a square matrix");
        let (values, vectors) = if dense.iter().all(|z| z.im == T::zero()) {
            let real = dense.map(|z| z.re);
            let eig = SymmetricEigen::new(real);
            (eig.eigenvalues, eig.eigenvectors.map(|x| Complex::new(x, T::zero())))
        } else {
            let eig = SymmetricEigen::new(dense.clone());
            (eig.eigenvalues, eig.eigenvectors)
        };
        let mut order: Vec<usize> = (0..values.len()).collect();
        order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).expect("finite eigenvalues"));
        let sorted_values = order.iter().map(|&i| values[i]).collect();
        let sorted_vectors = DMatrix::from_fn(vectors.nrows(), vectors.ncols(), |r, c| {
            vectors[(r, order[c])]
        });
        Self {
            values: sorted_values,
            vectors: Arc::new(sorted_vectors),
        }
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn vectors(&self) -> &DMatrix<Cx<T>> {
        &self.vectors
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// Spectrum of `(H + shift) / scale`, sharing the eigenvectors.
    pub fn affine(&self, shift: T, scale: T) -> Self {
        let mut values: Vec<T> = self.values.iter().map(|&v| (v + shift) / scale).collect();
        let vectors = if scale < T::zero() {
            // Negative scale reverses the order.
            values.reverse();
            let n = self.vectors.ncols();
            Arc::new(DMatrix::from_fn(self.vectors.nrows(), n, |r, c| {
                self.vectors[(r, n - 1 - c)]
            }))
        } else {
            Arc::clone(&self.vectors)
        };
        Self { values, vectors }
    }

    /// Coordinates of `psi` in the eigenbasis, `U† psi`.
    pub fn to_eigenbasis(&self, psi: &DVector<Cx<T>>) -> DVector<Cx<T>> {
        self.vectors.ad_mul(psi)
    }

    /// `U coords`.
    pub fn from_eigenbasis(&self, coords: &DVector<Cx<T>>) -> DVector<Cx<T>> {
        &*self.vectors * coords
    }

    /// Functional calculus `f(H) psi`.
    pub fn apply_fn(&self, psi: &DVector<Cx<T>>, f: impl Fn(T) -> Cx<T>) -> DVector<Cx<T>> {
        let mut coords = self.to_eigenbasis(psi);
        for (z, &lam) in coords.iter_mut().zip(&self.values) {
            *z *= f(lam);
        }
        self.from_eigenbasis(&coords)
    }

    /// Dense reconstruction `U diag(values) U†`.
    pub fn reconstruct(&self) -> DMatrix<Cx<T>> {
        let u = &*self.vectors;
        let mut scaled = u.clone();
        for (mut col, &lam) in scaled.column_iter_mut().zip(&self.values) {
            col *= Complex::new(lam, T::zero());
        }
        scaled * u.adjoint()
    }
}

/// Spectral characterization of a nonsingular Hermitian operator.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralInfo<T: Real = f64> {
    /// Ascending.
    pub eigenvalues: Vec<T>,
    /// `max|λ| / min|λ|`.
    pub kappa: T,
    /// `max|λ|`.
    pub spectral_norm: T,
    /// Maximum number of nonzero entries in a row of the dense matrix.
    pub sparsity_d: usize,
}

pub fn spectral_info<T: Real>(h: &PauliSum<T>) -> Result<SpectralInfo<T>> {
    let dense = h.to_dense_with_cap(DEFAULT_DENSE_CAP)?;
    let eig = EigenSystem::of_dense(&dense);
    spectral_info_with(&dense, &eig)
}

/// Spectral info from an already computed dense matrix and eigensystem.
pub fn spectral_info_with<T: Real>(
    dense: &DMatrix<Cx<T>>,
    eig: &EigenSystem<T>,
) -> Result<SpectralInfo<T>> {
    let tol = lit::<T>(ZERO_EIGENVALUE_TOL);
    let (mut min_abs, mut max_abs) = (T::max_value().expect("bounded"), T::zero());
    for &lam in eig.values() {
        let a = lam.abs();
        if a < tol {
            return Err(QklsError::SingularHamiltonian {
                eigenvalue: to_f64(lam),
                tolerance: ZERO_EIGENVALUE_TOL,
            });
        }
        min_abs = min_abs.min(a);
        max_abs = max_abs.max(a);
    }
    if eig.dim() == 0 {
        return Err(invalid("empty operator"));
    }
    Ok(SpectralInfo {
        eigenvalues: eig.values().to_vec(),
        kappa: max_abs / min_abs,
        spectral_norm: max_abs,
        sparsity_d: row_sparsity(dense),
    })
}

fn row_sparsity<T: Real>(dense: &DMatrix<Cx<T>>) -> usize {
    let scale = dense.iter().map(|&z| modulus(z)).fold(T::zero(), |a, b| a.max(b));
    let cut = scale * T::machine_eps() * lit(16.0);
    dense
        .row_iter()
        .map(|row| row.iter().filter(|&&z| modulus(z) > cut).count())
        .max()
        .unwrap_or(0)
}

/// Shift and scale that place an Ising spectrum on `[1/κ, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsingCalibration<T: Real = f64> {
    pub eta: T,
    pub zeta: T,
}

/// Solves `(λ_max + η)/ζ = 1` and `(λ_min + η)/ζ = 1/κ`.
pub fn calibrate_from_extremes<T: Real>(
    lambda_min: T,
    lambda_max: T,
    target_kappa: T,
) -> Result<IsingCalibration<T>> {
    if !(target_kappa > T::one()) || !target_kappa.is_finite() {
        return Err(invalid(format!("target kappa must exceed 1, got {target_kappa}")));
    }
    let width = lambda_max - lambda_min;
    if !(width > T::zero()) {
        return Err(invalid("spectrum has zero width; kappa cannot be tuned"));
    }
    let zeta = width / (T::one() - T::one() / target_kappa);
    Ok(IsingCalibration {
        eta: zeta - lambda_max,
        zeta,
    })
}

/// Finds `(η, ζ)` so that `build_ising(n, coupling, η, ζ)` has spectrum `[1/κ, 1]`.
pub fn calibrate_kappa<T: Real>(
    n: usize,
    coupling: T,
    target_kappa: T,
) -> Result<IsingCalibration<T>> {
    if !(target_kappa > T::one()) {
        return Err(invalid(format!("target kappa must exceed 1, got {target_kappa}")));
    }
    let base = build_ising(n, coupling, T::zero(), T::one())?;
    let eig = EigenSystem::of(&base)?;
    let values = eig.values();
    calibrate_from_extremes(values[0], values[values.len() - 1], target_kappa)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn pauli_x_spectrum() {
        let h = build_ising(1, 0.0, 0.0, 1.0).unwrap();
        let info = spectral_info(&h).unwrap();
        assert_relative_eq!(info.eigenvalues[0], -1.0, epsilon = 1e-14);
        assert_relative_eq!(info.eigenvalues[1], 1.0, epsilon = 1e-14);
        assert_relative_eq!(info.kappa, 1.0, epsilon = 1e-14);
        assert_relative_eq!(info.spectral_norm, 1.0, epsilon = 1e-14);
        assert_eq!(info.sparsity_d, 1);

        let shifted = build_ising(1, 0.0, 0.5, 1.0).unwrap();
        assert_eq!(spectral_info(&shifted).unwrap().sparsity_d, 2);
    }

    #[test]
    fn zero_eigenvalue_is_singular() {
        let h = PauliSum::new(1, [(1.0, "Z".parse().unwrap()), (1.0, "I".parse().unwrap())]).unwrap();
        assert!(matches!(
            spectral_info(&h),
            Err(QklsError::SingularHamiltonian { .. })
        ));
    }

    #[test]
    fn closed_form_single_qubit_calibration() {
        let cal = calibrate_kappa(1, 0.0, 2.0).unwrap();
        assert_relative_eq!(cal.eta, 3.0, epsilon = 1e-12);
        assert_relative_eq!(cal.zeta, 4.0, epsilon = 1e-12);
        let info = spectral_info(&build_ising(1, 0.0, cal.eta, cal.zeta).unwrap()).unwrap();
        assert_relative_eq!(info.eigenvalues[0], 0.5, epsilon = 1e-12);
        assert_relative_eq!(info.eigenvalues[1], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn unreachable_kappa_rejected() {
        assert!(matches!(
            calibrate_kappa(2, 0.1, 0.5),
            Err(QklsError::InvalidParameter(_))
        ));
        assert!(calibrate_kappa(2, 0.1, 1.0).is_err());
    }

    #[test]
    fn ising_sparsity_counts_flips_plus_diagonal() {
        for n in 2..=6 {
            let h = build_ising(n, 0.1, 0.37, 1.0).unwrap();
            assert_eq!(spectral_info(&h).unwrap().sparsity_d, n + 1, "n = {n}");
        }
    }

    #[test]
    fn affine_and_reconstruct_agree_with_direct_build() {
        let base = build_ising(3, 0.1, 0.0, 1.0).unwrap();
        let eig = EigenSystem::of(&base).unwrap().affine(2.0, 3.0);
        let direct = build_ising(3, 0.1, 2.0, 3.0).unwrap().to_dense().unwrap();
        let rebuilt = eig.reconstruct();
        for (a, b) in rebuilt.iter().zip(direct.iter()) {
            assert_relative_eq!(a.re, b.re, epsilon = 1e-12);
            assert_relative_eq!(a.im, b.im, epsilon = 1e-12);
        }
        let flipped = EigenSystem::of(&base).unwrap().affine(0.0, -1.0);
        assert!(flipped.values().windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn complex_hermitian_eigensolve() {
        let h = PauliSum::new(
            2,
            [(0.4, "XY".parse().unwrap()), (0.3, "YI".parse().unwrap()), (1.0, "ZZ".parse().unwrap())],
        )
        .unwrap();
        let eig = EigenSystem::of(&h).unwrap();
        let dense = h.to_dense().unwrap();
        for (a, b) in eig.reconstruct().iter().zip(dense.iter()) {
            assert_relative_eq!(a.re, b.re, epsilon = 1e-12);
            assert_relative_eq!(a.im, b.im, epsilon = 1e-12);
        }
    }
}
