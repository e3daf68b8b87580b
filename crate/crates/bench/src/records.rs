use std::cmp::Ordering;
use std::io::Write;

use num_complex::Complex;
use qkls_core::fourier::FourierSchedule;
use serde::{Deserialize, Serialize};

use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "QKLS")]
    Qkls,
    Fourier,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Qkls => "QKLS",
            Self::Fourier => "Fourier",
        }
    }
}

/// What is needed to rebuild the output state of a point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PointDetail {
    Coefficients {
        c: Vec<Complex<f64>>,
        svd_threshold: f64,
        truncated_rank: usize,
    },
    Schedule(FourierSchedule<f64>),
    None,
}

/// Status written for points that completed.
pub const STATUS_OK: &str = "ok";

/// One benchmark point. Failed points carry `error = 1` (the largest value
/// of the metric) and a non-`ok` status.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub method: Method,
    pub kappa: f64,
    pub tau: Option<f64>,
    /// `M` for QKLS, `J (2K + 1)` for the baseline.
    pub terms: usize,
    pub error: f64,
    pub success_prob: Option<f64>,
    /// Infinite for a singular `F`; JSON has no infinity, so it reads back as `None`.
    pub f_condition: Option<f64>,
    pub seed: u64,
    pub status: String,
    pub wall_time_ms: f64,
    pub detail: PointDetail,
}

impl ExperimentRecord {
    pub fn is_ok(&self) -> bool {
        self.status == STATUS_OK
    }

    fn sort_key_cmp(&self, other: &Self) -> Ordering {
        self.method
            .cmp(&other.method)
            .then(self.kappa.total_cmp(&other.kappa))
            .then(self.terms.cmp(&other.terms))
            .then(self.error.total_cmp(&other.error))
            .then(self.status.cmp(&other.status))
    }
}

/// Canonical order: method, κ, terms.
pub fn sort_records(records: &mut [ExperimentRecord]) {
    records.sort_by(ExperimentRecord::sort_key_cmp);
}

pub const CSV_HEADER: [&str; 10] = [
    "method",
    "kappa",
    "tau",
    "terms",
    "error",
    "success_prob",
    "f_condition",
    "seed",
    "status",
    "wall_time_ms",
];

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "n/a".to_string(), |v| format!("{v:e}"))
}

pub fn write_csv<W: Write>(records: &[ExperimentRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.write_record([
            r.method.as_str().to_string(),
            r.kappa.to_string(),
            opt(r.tau),
            r.terms.to_string(),
            format!("{:e}", r.error),
            opt(r.success_prob),
            opt(r.f_condition),
            r.seed.to_string(),
            r.status.clone(),
            format!("{:.3}", r.wall_time_ms),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Finite-difference accuracy of one `(κ, t_fd)` pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlapRecord {
    pub kappa: f64,
    pub tau: f64,
    pub t_fd: f64,
    /// `max_k |f_fd(0, k) - f_exact(0, k)|`.
    pub max_element_error: f64,
}

pub fn write_overlap_csv<W: Write>(records: &[OverlapRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["kappa", "tau", "t_fd", "max_element_error"])?;
    for r in records {
        w.write_record([
            r.kappa.to_string(),
            r.tau.to_string(),
            r.t_fd.to_string(),
            format!("{:e}", r.max_element_error),
        ])?;
    }
    w.flush()?;
    Ok(())
}
