//! Asymptotic cost expressions evaluated with unit constants and natural logs.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{BenchError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexityReport {
    pub d: f64,
    pub kappa: f64,
    pub epsilon: f64,
    pub big_n: f64,
    pub qkls_query: f64,
    pub qkls_gate: f64,
    pub fourier_query: f64,
    pub fourier_gate: f64,
}

impl ComplexityReport {
    pub fn query_ratio(&self) -> f64 {
        self.fourier_query / self.qkls_query
    }

    pub fn gate_ratio(&self) -> f64 {
        self.fourier_gate / self.qkls_gate
    }
}

/// `d` sparsity, `κ` condition number, `ε` target accuracy, `N` dimension.
pub fn complexity_report(d: f64, kappa: f64, epsilon: f64, big_n: f64) -> Result<ComplexityReport> {
    if !(d > 0.0 && kappa >= 1.0 && big_n > 0.0) || ![d, kappa, big_n].iter().all(|v| v.is_finite()) {
        return Err(BenchError::Config(format!(
            "need d > 0, kappa >= 1, N > 0; got d={d}, kappa={kappa}, N={big_n}"
        )));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(BenchError::Config(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    let l_eps = (1.0 / epsilon).ln();
    let l_ke = (kappa / epsilon).ln();
    let l_n = big_n.ln();
    Ok(ComplexityReport {
        d,
        kappa,
        epsilon,
        big_n,
        qkls_query: d * kappa * l_eps * l_ke,
        qkls_gate: d * kappa * l_eps.powi(2) * (l_n + l_eps.powf(2.5)),
        fourier_query: d * kappa * kappa * l_eps.powf(2.5),
        fourier_gate: d * kappa * kappa * l_ke.powf(2.5) * (l_n + l_ke.powf(2.5)),
    })
}

impl fmt::Display for ComplexityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "# unit constants, natural logarithms")?;
        writeln!(f, "# d={} kappa={} epsilon={} N={}", self.d, self.kappa, self.epsilon, self.big_n)?;
        writeln!(f, "{:<8} {:>14} {:>14} {:>14}", "cost", "QKLS", "Fourier", "Fourier/QKLS")?;
        writeln!(
            f,
            "{:<8} {:>14.6e} {:>14.6e} {:>14.6e}",
            "query",
            self.qkls_query,
            self.fourier_query,
            self.query_ratio()
        )?;
        write!(
            f,
            "{:<8} {:>14.6e} {:>14.6e} {:>14.6e}",
            "gate",
            self.qkls_gate,
            self.fourier_gate,
            self.gate_ratio()
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn query_cost_example() {
        let r = complexity_report(11.0, 27.6, 1e-3, 1024.0).unwrap();
        let expected = 11.0 * 27.6 * 1000f64.ln() * 27600f64.ln();
        assert!((r.qkls_query - expected).abs() < 1e-9 * expected);
        assert!((r.qkls_query - 2.14e4).abs() < 0.01e4);
    }

    #[test]
    fn unit_kappa_ratio() {
        let eps: f64 = 1e-2;
        let r = complexity_report(3.0, 1.0, eps, 64.0).unwrap();
        let expected = (1.0 / eps).ln().powf(1.5) / (1.0 / eps).ln();
        assert!((r.query_ratio() - expected).abs() < 1e-12 * expected);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(complexity_report(11.0, 27.6, 1.0, 1024.0).is_err());
        assert!(complexity_report(0.0, 27.6, 0.1, 1024.0).is_err());
        assert!(complexity_report(11.0, 0.5, 0.1, 1024.0).is_err());
    }
}
