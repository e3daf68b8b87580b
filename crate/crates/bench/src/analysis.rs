use serde::{Deserialize, Serialize};

use crate::records::{ExperimentRecord, Method};

/// Least-squares line `y = slope x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// `None` for fewer than two points or constant `x`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Option<LinearFit> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs.iter().zip(ys).map(|(x, y)| (y - slope * x - intercept).powi(2)).sum();
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - ss_res / syy };
    Some(LinearFit { slope, intercept, r_squared })
}

/// Exponent `p` of `y ∝ x^p`, fitted in log-log space.
pub fn power_law_exponent(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.iter().chain(ys).any(|&v| !(v > 0.0)) {
        return None;
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    linear_fit(&lx, &ly).map(|f| f.slope)
}

/// Smallest QKLS `terms` whose error is at most `threshold`.
pub fn minimal_terms(records: &[ExperimentRecord], kappa: f64, threshold: f64) -> Option<usize> {
    records
        .iter()
        .filter(|r| r.method == Method::Qkls && r.kappa == kappa && r.is_ok() && r.error <= threshold)
        .map(|r| r.terms)
        .min()
}

/// A baseline point paired with the QKLS point that uses no more evolution operators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub terms: usize,
    pub qkls_terms: usize,
    pub qkls_error: f64,
    pub fourier_error: f64,
}

/// Error ordering between the methods at shared evolution-operator counts.
///
/// A baseline point with `t` terms is comparable when `t` lies within the
/// span of the QKLS `M` grid; it is paired with QKLS at the largest `M <= t`.
/// The crossover is the first comparable count at which QKLS is at least as
/// accurate; violations are later counts at which it is not.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderingReport {
    pub kappa: f64,
    pub qkls_best_error: f64,
    pub comparisons: Vec<Comparison>,
    pub crossover: Option<usize>,
    pub violations: Vec<Comparison>,
    /// Baseline points above the QKLS grid: `(terms, error)`.
    pub beyond_range: Vec<(usize, f64)>,
}

impl OrderingReport {
    pub fn holds(&self) -> bool {
        self.crossover.is_some() && self.violations.is_empty()
    }
}

pub fn ordering_report(records: &[ExperimentRecord], kappa: f64) -> OrderingReport {
    let mut qkls: Vec<(usize, f64)> = records
        .iter()
        .filter(|r| r.method == Method::Qkls && r.kappa == kappa)
        .map(|r| (r.terms, r.error))
        .collect();
    qkls.sort_by_key(|p| p.0);
    let mut fourier: Vec<(usize, f64)> = records
        .iter()
        .filter(|r| r.method == Method::Fourier && r.kappa == kappa)
        .map(|r| (r.terms, r.error))
        .collect();
    fourier.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));

    let qkls_best_error = qkls.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let (lo, hi) = match (qkls.first(), qkls.last()) {
        (Some(a), Some(b)) => (a.0, b.0),
        _ => (1, 0),
    };
    let mut comparisons = Vec::new();
    let mut beyond_range = Vec::new();
    for &(terms, fourier_error) in &fourier {
        if terms < lo {
            continue;
        }
        if terms > hi {
            beyond_range.push((terms, fourier_error));
            continue;
        }
        let &(qkls_terms, qkls_error) = qkls.iter().rev().find(|p| p.0 <= terms).expect("within span");
        comparisons.push(Comparison { terms, qkls_terms, qkls_error, fourier_error });
    }
    let crossover = comparisons.iter().find(|c| c.qkls_error <= c.fourier_error).map(|c| c.terms);
    let violations = match crossover {
        Some(x) => comparisons
            .iter()
            .filter(|c| c.terms >= x && c.qkls_error > c.fourier_error)
            .copied()
            .collect(),
        None => Vec::new(),
    };
    OrderingReport { kappa, qkls_best_error, comparisons, crossover, violations, beyond_range }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::records::{PointDetail, STATUS_OK};

    fn rec(method: Method, terms: usize, error: f64) -> ExperimentRecord {
        ExperimentRecord {
            method,
            kappa: 2.0,
            tau: None,
            terms,
            error,
            success_prob: None,
            f_condition: None,
            seed: 0,
            status: STATUS_OK.into(),
            wall_time_ms: 0.0,
            detail: PointDetail::None,
        }
    }

    #[test]
    fn exact_line() {
        let f = linear_fit(&[1.0, 2.0, 3.0], &[3.0, 5.0, 7.0]).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-14 && (f.intercept - 1.0).abs() < 1e-14);
        assert!((f.r_squared - 1.0).abs() < 1e-14);
        assert!(linear_fit(&[1.0, 1.0], &[0.0, 1.0]).is_none());
    }

    #[test]
    fn power_law() {
        let p = power_law_exponent(&[1.0, 2.0, 4.0], &[3.0, 12.0, 48.0]).unwrap();
        assert!((p - 2.0).abs() < 1e-12);
        assert!(power_law_exponent(&[0.0, 1.0], &[1.0, 1.0]).is_none());
    }

    #[test]
    fn ordering_pairs_by_largest_smaller_count() {
        let records = vec![
            rec(Method::Qkls, 1, 0.5),
            rec(Method::Qkls, 4, 1e-4),
            rec(Method::Qkls, 16, 1e-6),
            rec(Method::Fourier, 2, 0.1),
            rec(Method::Fourier, 6, 1e-2),
            rec(Method::Fourier, 20, 1e-8),
        ];
        let report = ordering_report(&records, 2.0);
        assert_eq!(report.comparisons.len(), 2);
        assert_eq!(report.comparisons[1].qkls_terms, 4);
        assert_eq!(report.crossover, Some(6));
        assert!(report.holds());
        assert_eq!(report.beyond_range, vec![(20, 1e-8)]);
        assert_eq!(minimal_terms(&records, 2.0, 1e-3), Some(4));
    }

    #[test]
    fn ordering_reports_violations() {
        let records = vec![
            rec(Method::Qkls, 1, 0.5),
            rec(Method::Qkls, 8, 1e-3),
            rec(Method::Fourier, 2, 0.9),
            rec(Method::Fourier, 8, 1e-5),
        ];
        let report = ordering_report(&records, 2.0);
        assert_eq!(report.crossover, Some(2));
        assert_eq!(report.violations.len(), 1);
        assert!(!report.holds());
    }
}
