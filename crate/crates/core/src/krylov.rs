//! Projected system `F c = s` over the basis `|φ_n> = e^{-iHnτ}|b>`,
//! `n = 0..M-1`.
//!
//! Because every evolution commutes, `F[n'][n] = h(n - n')` with
//! `h(k) = <b|H e^{-iHkτ}|b>` and `h(-k) = conj(h(k))`: `F` is
//! Hermitian-Toeplitz, and only `M` generators need to be estimated.
//! Likewise `s[n'] = <b|e^{+iHn'τ}|b>`.

use nalgebra::{DMatrix, DVector, SVD};
use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, QklsError, Result};
use crate::overlap::{OverlapEstimate, OverlapEstimator, Shots};
use crate::scalar::{from_usize, lit, modulus, re, to_f64, Cx, Real};
use crate::statevector::{Propagator, StateVector};

/// Relative singular-value cut used for exactly computed systems.
pub const DEFAULT_EXACT_SVD_THRESHOLD: f64 = 1e-12;

/// Where the matrix elements of `F` come from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ElementSource<T: Real = f64> {
    /// Statevector evaluation of `<φ_n'|H|φ_n>`.
    Exact,
    /// Hadamard-test finite differences with time step `t_fd`.
    FiniteDifference { t_fd: T, shots: Shots },
}

/// Estimated Toeplitz generators, reusable for every `M` up to their length.
#[derive(Debug, Clone)]
pub struct KrylovGenerators<T: Real = f64> {
    tau: T,
    source: ElementSource<T>,
    /// `h(k)` for `k = 0..len`.
    f_gen: Vec<OverlapEstimate<T>>,
    /// `s[n']` for `n' = 0..len`.
    s_gen: Vec<OverlapEstimate<T>>,
}

impl<T: Real> KrylovGenerators<T> {
    pub fn estimate(
        prop: &Propagator<T>,
        b: &StateVector<T>,
        max_m: usize,
        tau: T,
        source: ElementSource<T>,
    ) -> Result<Self> {
        if max_m == 0 {
            return Err(invalid("subspace dimension must be at least 1"));
        }
        if !(tau > T::zero()) || !tau.is_finite() {
            return Err(invalid(format!("time step must be positive, got {tau}")));
        }
        let shots = match source {
            ElementSource::Exact => Shots::Exact,
            ElementSource::FiniteDifference { shots, .. } => shots,
        };
        let est = OverlapEstimator::new(prop, b).with_shots(shots);
        let f_gen = (0..max_m)
            .into_par_iter()
            .map(|k| match source {
                ElementSource::Exact => Ok(OverlapEstimate::exact(est.f_element_exact(0, k, tau))),
                ElementSource::FiniteDifference { t_fd, .. } => est.f_element_fd(0, k, tau, t_fd),
            })
            .collect::<Result<Vec<_>>>()?;
        let s_gen = (0..max_m)
            .into_par_iter()
            .map(|n_prime| est.s_element(n_prime, tau))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { tau, source, f_gen, s_gen })
    }

    pub fn max_m(&self) -> usize {
        self.f_gen.len()
    }

    /// Generator `h(k)` for any signed `k` with `|k| < max_m`, before symmetrization.
    pub fn f_generator(&self, k: i64) -> Cx<T> {
        let v = self.f_gen[k.unsigned_abs() as usize].value;
        if k < 0 {
            v.conj()
        } else {
            v
        }
    }

    /// The `M x M` system built from the leading generators.
    pub fn system(&self, m: usize) -> Result<KrylovSystem<T>> {
        if m == 0 || m > self.max_m() {
            return Err(invalid(format!(
                "subspace dimension {m} outside 1..={}",
                self.max_m()
            )));
        }
        // Hermitian diagonal: the k <-> -k average of h(0) is its real part.
        let h0 = re(self.f_gen[0].value.re);
        let f = DMatrix::from_fn(m, m, |row, col| {
            if row == col {
                h0
            } else {
                self.f_generator(col as i64 - row as i64)
            }
        });
        let s = DVector::from_fn(m, |i, _| self.s_gen[i].value);
        let element_std_error = self.f_gen[..m]
            .iter()
            .chain(&self.s_gen[..m])
            .map(|e| e.std_error())
            .fold(T::zero(), |a, b| a.max(b));
        Ok(KrylovSystem {
            m,
            tau: self.tau,
            f,
            s,
            source: self.source,
            element_std_error,
        })
    }
}

/// The projected linear system and its provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct KrylovSystem<T: Real = f64> {
    pub m: usize,
    pub tau: T,
    pub f: DMatrix<Cx<T>>,
    pub s: DVector<Cx<T>>,
    pub source: ElementSource<T>,
    /// Largest standard error among the estimated generators (zero when exact).
    pub element_std_error: T,
}

/// Estimates `F` and `s` for subspace dimension `m`.
pub fn assemble<T: Real>(
    prop: &Propagator<T>,
    b: &StateVector<T>,
    m: usize,
    tau: T,
    source: ElementSource<T>,
) -> Result<KrylovSystem<T>> {
    KrylovGenerators::estimate(prop, b, m, tau, source)?.system(m)
}

impl<T: Real> KrylovSystem<T> {
    /// `1e-12` for exact systems; for sampled systems the cut sits at five
    /// element standard errors relative to the largest singular value.
    pub fn default_svd_threshold(&self) -> T {
        let floor = lit::<T>(DEFAULT_EXACT_SVD_THRESHOLD);
        if self.element_std_error == T::zero() {
            return floor;
        }
        let sigma_max = self.f.clone().singular_values().max();
        if sigma_max > T::zero() {
            (lit::<T>(5.0) * self.element_std_error / sigma_max).max(floor)
        } else {
            floor
        }
    }

    /// Largest deviation of `F` from Hermitian-Toeplitz form.
    pub fn toeplitz_defect(&self) -> T {
        let m = self.m;
        let mut worst = T::zero();
        for r in 0..m {
            for c in 0..m {
                let adj = modulus(self.f[(r, c)] - self.f[(c, r)].conj());
                worst = worst.max(adj);
                if r + 1 < m && c + 1 < m {
                    worst = worst.max(modulus(self.f[(r, c)] - self.f[(r + 1, c + 1)]));
                }
            }
        }
        worst
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&KrylovJson::from(self)).expect("plain data serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let wire: KrylovJson =
            serde_json::from_str(text).map_err(|e| QklsError::Parse(e.to_string()))?;
        wire.try_into()
    }
}

/// Coefficients of `|x̃> = Σ c_n |φ_n>` and diagnostics of the solve.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult<T: Real = f64> {
    pub c: DVector<Cx<T>>,
    /// `‖F c - s‖`, recomputed from the returned `c`.
    pub residual: T,
    /// `σ_max / σ_min` of `F` before truncation; infinite when `σ_min = 0`.
    pub f_condition: T,
    /// Number of singular values kept.
    pub truncated_rank: usize,
    /// Descending.
    pub singular_values: Vec<T>,
}

/// Truncated-SVD pseudo-inverse solve, discarding `σ < threshold · σ_max`.
pub fn solve<T: Real>(sys: &KrylovSystem<T>, svd_threshold: T) -> Result<SolveResult<T>> {
    if sys.m == 0 || sys.f.nrows() != sys.m || sys.f.ncols() != sys.m || sys.s.len() != sys.m {
        return Err(invalid("malformed projected system"));
    }
    if !(svd_threshold >= T::zero()) {
        return Err(invalid("svd threshold must be nonnegative"));
    }
    // nalgebra's complex SVD loses up to ~1e-2 relative accuracy on some
    // inputs; the real SVD of the embedding [[Re F, -Im F], [Im F, Re F]] is
    // backward stable and carries every singular value of F twice.
    let m = sys.m;
    let f_re = sys.f.map(|z| z.re);
    let f_im = sys.f.map(|z| z.im);
    let mut embed = DMatrix::<T>::zeros(2 * m, 2 * m);
    embed.view_mut((0, 0), (m, m)).copy_from(&f_re);
    embed.view_mut((m, m), (m, m)).copy_from(&f_re);
    embed.view_mut((0, m), (m, m)).copy_from(&(-&f_im));
    embed.view_mut((m, 0), (m, m)).copy_from(&f_im);
    let rhs = DVector::from_fn(2 * m, |i, _| if i < m { sys.s[i].re } else { sys.s[i - m].im });

    let svd = SVD::new(embed, true, true);
    let u = svd.u.as_ref().expect("requested U");
    let v_t = svd.v_t.as_ref().expect("requested V^T");
    let sigma = &svd.singular_values;
    let sigma_max = sigma.max();
    let sigma_min = sigma.min();
    let cut = svd_threshold * sigma_max;
    let mut x = DVector::<T>::zeros(2 * m);
    let mut kept = 0usize;
    for (i, &sv) in sigma.iter().enumerate() {
        if sv > T::zero() && sv > cut {
            kept += 1;
            let proj = u.column(i).dot(&rhs) / sv;
            x += v_t.row(i).transpose() * proj;
        }
    }
    if kept == 0 {
        return Err(QklsError::DegenerateSystem);
    }
    let c = DVector::from_fn(m, |i, _| Complex::new(x[i], x[i + m]));
    let residual = (&sys.f * &c - &sys.s).norm();
    let f_condition = if sigma_min > T::zero() {
        sigma_max / sigma_min
    } else {
        T::one() / T::zero()
    };
    let mut doubled: Vec<T> = sigma.iter().copied().collect();
    doubled.sort_by(|a, b| b.partial_cmp(a).expect("finite singular values"));
    let singular_values = doubled.into_iter().step_by(2).collect();
    Ok(SolveResult {
        c,
        residual,
        f_condition,
        truncated_rank: kept.div_ceil(2),
        singular_values,
    })
}

/// Vandermonde entries `[V]_{kl} = (-i l τ)^k / k!`.
pub fn vandermonde_matrix<T: Real>(m: usize, tau: T) -> DMatrix<Cx<T>> {
    let mut v = DMatrix::from_element(m, m, re(T::zero()));
    for l in 0..m {
        let step = Complex::new(T::zero(), -from_usize::<T>(l) * tau);
        let mut term = re(T::one());
        for k in 0..m {
            if k > 0 {
                term = term * step / re(from_usize::<T>(k));
            }
            v[(k, l)] = term;
        }
    }
    v
}

/// Maps time-evolution coefficients `c_l` to power-basis coefficients
/// `ĉ_k = Σ_l (-i l τ)^k / k! · c_l`, so `Σ_l c_l e^{-iHlτ}|b>` matches
/// `Σ_k ĉ_k H^k |b>` up to `O(τ^M)`.
pub fn vandermonde_map<T: Real>(c: &[Cx<T>], tau: T) -> Vec<Cx<T>> {
    let v = vandermonde_matrix(c.len(), tau);
    (&v * DVector::from_column_slice(c)).iter().copied().collect()
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
enum SourceJson {
    Exact,
    FiniteDifference {
        t_fd: f64,
        shots: Option<u64>,
        seed: Option<u64>,
    },
}

#[derive(Debug, Serialize, Deserialize)]
struct KrylovJson {
    m: usize,
    tau: f64,
    /// Row-major, each entry `[re, im]`.
    f: Vec<Vec<[f64; 2]>>,
    s: Vec<[f64; 2]>,
    source: SourceJson,
    element_std_error: f64,
}

fn pair<T: Real>(z: Cx<T>) -> [f64; 2] {
    [to_f64(z.re), to_f64(z.im)]
}

fn unpair<T: Real>(p: [f64; 2]) -> Cx<T> {
    Complex::new(lit(p[0]), lit(p[1]))
}

impl<T: Real> From<&KrylovSystem<T>> for KrylovJson {
    fn from(sys: &KrylovSystem<T>) -> Self {
        let source = match sys.source {
            ElementSource::Exact => SourceJson::Exact,
            ElementSource::FiniteDifference { t_fd, shots } => SourceJson::FiniteDifference {
                t_fd: to_f64(t_fd),
                shots: shots.count(),
                seed: match shots {
                    Shots::Exact => None,
                    Shots::Sampled(m) => Some(m.seed),
                },
            },
        };
        Self {
            m: sys.m,
            tau: to_f64(sys.tau),
            f: sys
                .f
                .row_iter()
                .map(|row| row.iter().map(|&z| pair(z)).collect())
                .collect(),
            s: sys.s.iter().map(|&z| pair(z)).collect(),
            source,
            element_std_error: to_f64(sys.element_std_error),
        }
    }
}

impl<T: Real> TryFrom<KrylovJson> for KrylovSystem<T> {
    type Error = QklsError;

    fn try_from(w: KrylovJson) -> Result<Self> {
        if w.f.len() != w.m || w.s.len() != w.m || w.f.iter().any(|r| r.len() != w.m) {
            return Err(QklsError::Parse(format!("system is not {0}x{0}", w.m)));
        }
        let source = match w.source {
            SourceJson::Exact => ElementSource::Exact,
            SourceJson::FiniteDifference { t_fd, shots, seed } => ElementSource::FiniteDifference {
                t_fd: lit(t_fd),
                shots: match shots {
                    None => Shots::Exact,
                    Some(n) => Shots::sampled(n, seed.unwrap_or(0)),
                },
            },
        };
        Ok(Self {
            m: w.m,
            tau: lit(w.tau),
            f: DMatrix::from_fn(w.m, w.m, |r, c| unpair(w.f[r][c])),
            s: DVector::from_iterator(w.m, w.s.iter().map(|&p| unpair(p))),
            source,
            element_std_error: lit(w.element_std_error),
        })
    }
}
