//! Pauli-sum Hamiltonians.
//!
//! `H = Σ_k c_k P_k` with real `c_k`, so every `PauliSum` is Hermitian by
//! construction. Sums are kept in canonical form: terms sorted by string,
//! duplicates merged, zero coefficients dropped.

mod pauli;
mod spectrum;

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{invalid, QklsError, Result};
use crate::scalar::{lit, to_f64, Cx, Real};

pub use pauli::{Pauli, PauliMasks, PauliString};
pub use spectrum::{
    calibrate_from_extremes, calibrate_kappa, spectral_info, spectral_info_with, EigenSystem,
    IsingCalibration, SpectralInfo, ZERO_EIGENVALUE_TOL,
};

/// Largest qubit count for which dense matrices are materialized by default.
pub const DEFAULT_DENSE_CAP: usize = 12;

#[derive(Debug, Clone, PartialEq)]
pub struct PauliTerm<T: Real = f64> {
    pub coeff: T,
    pub string: PauliString,
}

/// Real-weighted sum of `n`-qubit Pauli strings.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliSum<T: Real = f64> {
    n: usize,
    terms: Vec<PauliTerm<T>>,
}

impl<T: Real> PauliSum<T> {
    /// Builds a canonical sum; every string must act on exactly `n` qubits.
    pub fn new(n: usize, terms: impl IntoIterator<Item = (T, PauliString)>) -> Result<Self> {
        if n == 0 {
            return Err(invalid("qubit count must be at least 1"));
        }
        let mut merged: BTreeMap<PauliString, T> = BTreeMap::new();
        for (coeff, string) in terms {
            if string.num_qubits() != n {
                return Err(QklsError::DimensionMismatch {
                    expected: n,
                    found: string.num_qubits(),
                });
            }
            if !coeff.is_finite() {
                return Err(invalid(format!("non-finite coefficient on {string}")));
            }
            *merged.entry(string).or_insert_with(T::zero) += coeff;
        }
        let terms = merged
            .into_iter()
            .filter(|(_, c)| *c != T::zero())
            .map(|(string, coeff)| PauliTerm { coeff, string })
            .collect();
        Ok(Self { n, terms })
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn terms(&self) -> &[PauliTerm<T>] {
        &self.terms
    }

    /// Re-runs canonicalization.
    pub fn canonicalized(&self) -> Self {
        Self::new(
            self.n,
            self.terms.iter().map(|t| (t.coeff, t.string.clone())),
        )
        .expect("a valid sum stays valid")
    }

    /// Coefficient of the identity string (zero if absent).
    pub fn identity_coeff(&self) -> T {
        self.terms
            .iter()
            .find(|t| t.string.is_identity())
            .map_or_else(T::zero, |t| t.coeff)
    }

    /// `(H + shift) / scale`.
    pub fn shifted_scaled(&self, shift: T, scale: T) -> Result<Self> {
        if scale == T::zero() {
            return Err(invalid("scale must be nonzero"));
        }
        let id = PauliString::identity(self.n)?;
        let terms = self
            .terms
            .iter()
            .map(|t| (t.coeff, t.string.clone()))
            .chain(std::iter::once((shift, id)))
            .map(|(c, s)| (c / scale, s));
        Self::new(self.n, terms)
    }

    /// `H|psi>` computed term by term with bit masks.
    pub fn apply(&self, psi: &[Cx<T>]) -> Vec<Cx<T>> {
        assert_eq!(psi.len(), self.dim(), "state dimension does not match Hamiltonian");
        let mut out = vec![Complex::new(T::zero(), T::zero()); psi.len()];
        for term in &self.terms {
            let masks = term.string.masks();
            for (x, &amp) in psi.iter().enumerate() {
                let (y, phase) = masks.act::<T>(x);
                out[y] += phase * amp * term.coeff;
            }
        }
        out
    }

    /// Dense matrix with the default qubit cap.
    pub fn to_dense(&self) -> Result<DMatrix<Cx<T>>> {
        self.to_dense_with_cap(DEFAULT_DENSE_CAP)
    }

    /// Dense matrix as a sum of Kronecker products of 2x2 factors.
    pub fn to_dense_with_cap(&self, cap: usize) -> Result<DMatrix<Cx<T>>> {
        if self.n > cap {
            return Err(QklsError::ResourceLimit { qubits: self.n, cap });
        }
        let dim = self.dim();
        let mut dense = DMatrix::from_element(dim, dim, Complex::new(T::zero(), T::zero()));
        for term in &self.terms {
            let mut acc = DMatrix::from_element(1, 1, Complex::new(term.coeff, T::zero()));
            for &p in term.string.axes() {
                let m = p.matrix::<T>();
                let factor = DMatrix::from_row_slice(2, 2, &[m[0][0], m[0][1], m[1][0], m[1][1]]);
                acc = acc.kronecker(&factor);
            }
            dense += acc;
        }
        Ok(dense)
    }

    /// Serializes to `{"n": .., "terms": [{"coeff": .., "string": ".."}]}`.
    pub fn to_json(&self) -> String {
        serde_json::to_string(&HamiltonianJson::from(self)).expect("plain data serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let wire: HamiltonianJson =
            serde_json::from_str(text).map_err(|e| QklsError::Parse(e.to_string()))?;
        wire.try_into()
    }
}

/// Transverse-field Ising operator
/// `(1/zeta) (Σ_j X_j + J Σ_j Z_j Z_{j+1} + eta I)` on an open chain of `n` qubits.
pub fn build_ising<T: Real>(n: usize, coupling: T, eta: T, zeta: T) -> Result<PauliSum<T>> {
    if n == 0 {
        return Err(invalid("qubit count must be at least 1"));
    }
    if zeta == T::zero() || !zeta.is_finite() {
        return Err(invalid("zeta must be finite and nonzero"));
    }
    let mut terms = Vec::with_capacity(2 * n);
    for j in 0..n {
        terms.push((T::one() / zeta, PauliString::with_ops(n, &[(j, Pauli::X)])?));
    }
    for j in 0..n.saturating_sub(1) {
        terms.push((
            coupling / zeta,
            PauliString::with_ops(n, &[(j, Pauli::Z), (j + 1, Pauli::Z)])?,
        ));
    }
    terms.push((eta / zeta, PauliString::identity(n)?));
    PauliSum::new(n, terms)
}

#[derive(Debug, Serialize, Deserialize)]
struct TermJson {
    coeff: f64,
    string: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct HamiltonianJson {
    n: usize,
    terms: Vec<TermJson>,
}

impl<T: Real> From<&PauliSum<T>> for HamiltonianJson {
    fn from(h: &PauliSum<T>) -> Self {
        Self {
            n: h.n,
            terms: h
                .terms
                .iter()
                .map(|t| TermJson {
                    coeff: to_f64(t.coeff),
                    string: t.string.to_string(),
                })
                .collect(),
        }
    }
}

impl<T: Real> TryFrom<HamiltonianJson> for PauliSum<T> {
    type Error = QklsError;

    fn try_from(wire: HamiltonianJson) -> Result<Self> {
        let terms = wire
            .terms
            .into_iter()
            .map(|t| Ok((lit::<T>(t.coeff), t.string.parse::<PauliString>()?)))
            .collect::<Result<Vec<_>>>()?;
        PauliSum::new(wire.n, terms)
    }
}

impl<T: Real> Serialize for PauliSum<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        HamiltonianJson::from(self).serialize(serializer)
    }
}

impl<'de, T: Real> Deserialize<'de> for PauliSum<T> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let wire = HamiltonianJson::deserialize(deserializer)?;
        wire.try_into().map_err(serde::de::Error::custom)
    }
}
