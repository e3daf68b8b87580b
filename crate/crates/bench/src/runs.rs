use std::time::Instant;

use qkls_core::error::QklsError;
use qkls_core::fourier::{apply_fourier, calibrate_constants, make_schedule, FourierConstants, FourierSchedule};
use qkls_core::hamiltonian::{build_ising, calibrate_from_extremes, EigenSystem, IsingCalibration, PauliSum};
use qkls_core::krylov::{solve, ElementSource, KrylovGenerators};
use qkls_core::lcu::{apply_lcu_direct, error_metric};
use qkls_core::overlap::{OverlapEstimator, Shots};
use qkls_core::statevector::{exact_solution_with, prepare_b, Propagator, StateVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, SourceKind};
use crate::records::{sort_records, ExperimentRecord, Method, OverlapRecord, PointDetail, STATUS_OK};
use crate::{BenchError, Result};

/// Largest number of `(C_J, C_K)` doublings tried by baseline calibration.
pub const MAX_FOURIER_DOUBLINGS: u32 = 6;

/// A calibrated Ising operator with its reference solution.
pub struct Instance {
    pub kappa: f64,
    pub calibration: IsingCalibration<f64>,
    pub h: PauliSum<f64>,
    pub prop: Propagator<f64>,
    pub b: StateVector<f64>,
    pub x: StateVector<f64>,
}

impl Instance {
    pub fn new(n: usize, coupling: f64, kappa: f64) -> Result<Self> {
        let base = build_ising(n, coupling, 0.0, 1.0)?;
        let eig = EigenSystem::of(&base)?;
        Self::from_base(n, coupling, kappa, &eig)
    }

    /// Reuses the eigendecomposition of the unshifted operator (`η = 0`, `ζ = 1`).
    pub fn from_base(n: usize, coupling: f64, kappa: f64, base: &EigenSystem<f64>) -> Result<Self> {
        let values = base.values();
        let calibration = calibrate_from_extremes(values[0], values[values.len() - 1], kappa)?;
        let h = build_ising(n, coupling, calibration.eta, calibration.zeta)?;
        let eig = base.affine(calibration.eta, calibration.zeta);
        let b = prepare_b(n)?;
        let x = exact_solution_with(&eig, &b)?;
        let prop = Propagator::with_eigensystem(&h, eig)?;
        Ok(Self { kappa, calibration, h, prop, b, x })
    }

    pub fn eigensystem(&self) -> &EigenSystem<f64> {
        self.prop.eigensystem().expect("exact propagator")
    }
}

/// One instance per target κ, sharing a single diagonalization.
pub fn instances(config: &ExperimentConfig) -> Result<Vec<Instance>> {
    let base = EigenSystem::of(&build_ising(config.n, config.coupling, 0.0, 1.0)?)?;
    config
        .target_kappas
        .iter()
        .map(|&k| Instance::from_base(config.n, config.coupling, k, &base))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationInfo {
    pub kappa: f64,
    pub eta: f64,
    pub zeta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineConstants {
    pub kappa: f64,
    pub epsilon: f64,
    pub constants: FourierConstants,
}

/// Everything needed to reproduce a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub version: String,
    pub seed: u64,
    pub config: ExperimentConfig,
    pub calibrations: Vec<CalibrationInfo>,
    pub fourier_constants: Vec<BaselineConstants>,
    pub records: Vec<ExperimentRecord>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub records: Vec<ExperimentRecord>,
    pub metadata: RunMetadata,
}

fn with_pool<R: Send>(workers: usize, job: impl FnOnce() -> R + Send) -> Result<R> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| BenchError::Config(format!("worker pool: {e}")))?;
    Ok(pool.install(job))
}

fn status_of(err: &QklsError) -> String {
    match err {
        QklsError::NullState { .. } => "null-state".into(),
        QklsError::DegenerateSystem => "degenerate".into(),
        other => format!("failed: {other}"),
    }
}

fn failed(method: Method, kappa: f64, tau: Option<f64>, terms: usize, seed: u64, err: &QklsError, started: Instant) -> ExperimentRecord {
    ExperimentRecord {
        method,
        kappa,
        tau,
        terms,
        error: 1.0,
        success_prob: None,
        f_condition: None,
        seed,
        status: status_of(err),
        wall_time_ms: elapsed_ms(started),
        detail: PointDetail::None,
    }
}

fn elapsed_ms(started: Instant) -> f64 {
    started.elapsed().as_secs_f64() * 1e3
}

fn source_of(config: &ExperimentConfig, kappa_index: usize) -> ElementSource<f64> {
    match config.source {
        SourceKind::Exact => ElementSource::Exact,
        SourceKind::FiniteDifference => ElementSource::FiniteDifference {
            t_fd: config.solve_t_fd(),
            shots: shots_of(config, kappa_index),
        },
    }
}

fn shots_of(config: &ExperimentConfig, kappa_index: usize) -> Shots {
    match config.shots {
        None => Shots::Exact,
        Some(count) => Shots::sampled(count, config.seed.wrapping_add(kappa_index as u64)),
    }
}

fn metadata(config: &ExperimentConfig, insts: &[Instance], fourier_constants: Vec<BaselineConstants>, records: &[ExperimentRecord]) -> RunMetadata {
    RunMetadata {
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed: config.seed,
        config: config.clone(),
        calibrations: insts
            .iter()
            .map(|i| CalibrationInfo { kappa: i.kappa, eta: i.calibration.eta, zeta: i.calibration.zeta })
            .collect(),
        fourier_constants,
        records: records.to_vec(),
    }
}

/// QKLS points for one instance.
pub fn qkls_points(config: &ExperimentConfig, inst: &Instance, kappa_index: usize) -> Vec<ExperimentRecord> {
    let started = Instant::now();
    let tau = config.tau;
    let generators =
        match KrylovGenerators::estimate(&inst.prop, &inst.b, config.max_m(), tau, source_of(config, kappa_index)) {
            Ok(g) => g,
            Err(e) => {
                return config
                    .m_grid
                    .iter()
                    .map(|&m| failed(Method::Qkls, inst.kappa, Some(tau), m, config.seed, &e, started))
                    .collect()
            }
        };
    config
        .m_grid
        .par_iter()
        .map(|&m| {
            let started = Instant::now();
            qkls_point(config, inst, &generators, m)
                .map(|mut r| {
                    r.wall_time_ms = elapsed_ms(started);
                    r
                })
                .unwrap_or_else(|e| failed(Method::Qkls, inst.kappa, Some(tau), m, config.seed, &e, started))
        })
        .collect()
}

fn qkls_point(
    config: &ExperimentConfig,
    inst: &Instance,
    generators: &KrylovGenerators<f64>,
    m: usize,
) -> std::result::Result<ExperimentRecord, QklsError> {
    let sys = generators.system(m)?;
    let threshold = config.svd_threshold.unwrap_or_else(|| sys.default_svd_threshold());
    let sol = solve(&sys, threshold)?;
    let out = apply_lcu_direct(&inst.prop, &inst.b, sol.c.as_slice(), config.tau)?;
    Ok(ExperimentRecord {
        method: Method::Qkls,
        kappa: inst.kappa,
        tau: Some(config.tau),
        terms: m,
        error: error_metric(&out.state, &inst.x)?,
        success_prob: Some(out.success_prob),
        f_condition: Some(sol.f_condition),
        seed: config.seed,
        status: STATUS_OK.into(),
        wall_time_ms: 0.0,
        detail: PointDetail::Coefficients {
            c: sol.c.iter().copied().collect(),
            svd_threshold: threshold,
            truncated_rank: sol.truncated_rank,
        },
    })
}

pub fn run_qkls(config: &ExperimentConfig) -> Result<RunOutput> {
    config.validate()?;
    let insts = instances(config)?;
    let mut records = with_pool(config.workers, || {
        insts
            .iter()
            .enumerate()
            .flat_map(|(i, inst)| qkls_points(config, inst, i))
            .collect::<Vec<_>>()
    })?;
    sort_records(&mut records);
    let metadata = metadata(config, &insts, Vec::new(), &records);
    Ok(RunOutput { records, metadata })
}

/// Schedule for one `(κ, ε)` target, calibrated if requested.
pub fn baseline_schedule(config: &ExperimentConfig, kappa: f64, epsilon: f64) -> Result<FourierSchedule<f64>> {
    if config.calibrate_fourier {
        Ok(calibrate_constants(kappa, epsilon, config.fourier_constants, MAX_FOURIER_DOUBLINGS)?.1)
    } else {
        Ok(make_schedule(kappa, epsilon, config.fourier_constants)?)
    }
}

fn fourier_point(inst: &Instance, sched: &FourierSchedule<f64>, seed: u64) -> ExperimentRecord {
    let started = Instant::now();
    let terms = sched.term_count();
    match apply_fourier(inst.eigensystem(), &inst.b, sched).and_then(|(state, _)| error_metric(&state, &inst.x)) {
        Ok(error) => ExperimentRecord {
            method: Method::Fourier,
            kappa: inst.kappa,
            tau: None,
            terms,
            error,
            success_prob: None,
            f_condition: None,
            seed,
            status: STATUS_OK.into(),
            wall_time_ms: elapsed_ms(started),
            detail: PointDetail::Schedule(*sched),
        },
        Err(e) => ExperimentRecord {
            detail: PointDetail::Schedule(*sched),
            ..failed(Method::Fourier, inst.kappa, None, terms, seed, &e, started)
        },
    }
}

/// Baseline schedules for one instance: every ε target plus the truncated
/// grids resampled over the coarsest target's integration ranges.
pub fn fourier_schedules(config: &ExperimentConfig, kappa: f64) -> Result<Vec<FourierSchedule<f64>>> {
    let mut scheds = config
        .epsilon_targets
        .iter()
        .map(|&eps| baseline_schedule(config, kappa, eps))
        .collect::<Result<Vec<_>>>()?;
    let coarsest = config.epsilon_targets.iter().copied().fold(f64::MIN, f64::max);
    let base = baseline_schedule(config, kappa, coarsest)?;
    for &(j, k) in &config.fourier_truncations {
        scheds.push(base.resampled(j, k)?);
    }
    Ok(scheds)
}

pub fn run_fourier(config: &ExperimentConfig) -> Result<RunOutput> {
    config.validate()?;
    let insts = instances(config)?;
    let mut constants = Vec::new();
    let mut jobs = Vec::new();
    for (i, inst) in insts.iter().enumerate() {
        for &eps in &config.epsilon_targets {
            let sched = baseline_schedule(config, inst.kappa, eps)?;
            constants.push(BaselineConstants { kappa: inst.kappa, epsilon: eps, constants: sched.constants });
        }
        jobs.extend(fourier_schedules(config, inst.kappa)?.into_iter().map(|s| (i, s)));
    }
    let mut records = with_pool(config.workers, || {
        jobs.par_iter().map(|(i, s)| fourier_point(&insts[*i], s, config.seed)).collect::<Vec<_>>()
    })?;
    sort_records(&mut records);
    let metadata = metadata(config, &insts, constants, &records);
    Ok(RunOutput { records, metadata })
}

/// Both methods on the same κ grid, in one record list.
pub fn run_compare(config: &ExperimentConfig) -> Result<RunOutput> {
    let qkls = run_qkls(config)?;
    let fourier = run_fourier(config)?;
    let mut records = qkls.records;
    records.extend(fourier.records);
    sort_records(&mut records);
    let mut metadata = fourier.metadata;
    metadata.records = records.clone();
    Ok(RunOutput { records, metadata })
}

/// Rebuilds a record's output state from its serialized detail and returns
/// the error metric against the instance's exact solution.
pub fn recompute_error(inst: &Instance, record: &ExperimentRecord) -> Result<f64> {
    match &record.detail {
        PointDetail::Coefficients { c, .. } => {
            let tau = record
                .tau
                .ok_or_else(|| BenchError::Config("QKLS record without tau".into()))?;
            let out = apply_lcu_direct(&inst.prop, &inst.b, c, tau)?;
            Ok(error_metric(&out.state, &inst.x)?)
        }
        PointDetail::Schedule(sched) => {
            let (state, _) = apply_fourier(inst.eigensystem(), &inst.b, sched)?;
            Ok(error_metric(&state, &inst.x)?)
        }
        PointDetail::None => Err(BenchError::Config("record carries no reconstruction data".into())),
    }
}

/// Finite-difference element error against the statevector reference.
pub fn run_overlap_study(config: &ExperimentConfig) -> Result<Vec<OverlapRecord>> {
    config.validate()?;
    let insts = instances(config)?;
    let jobs: Vec<(usize, f64)> = (0..insts.len())
        .flat_map(|i| config.t_fd_grid.iter().map(move |&t| (i, t)))
        .collect();
    let records = with_pool(config.workers, || {
        jobs.par_iter()
            .map(|&(i, t_fd)| {
                let inst = &insts[i];
                let est = OverlapEstimator::new(&inst.prop, &inst.b).with_shots(shots_of(config, i));
                let mut worst = 0.0f64;
                for k in 0..=config.overlap_max_k {
                    let fd = est.f_element_fd(0, k, config.tau, t_fd)?;
                    let exact = est.f_element_exact(0, k, config.tau);
                    worst = worst.max((fd.value - exact).norm());
                }
                Ok(OverlapRecord { kappa: inst.kappa, tau: config.tau, t_fd, max_element_error: worst })
            })
            .collect::<Result<Vec<_>>>()
    })??;
    Ok(records)
}

/// Exact-source solve of a single `(κ, M)` point.
pub fn solve_point(config: &ExperimentConfig, kappa: f64, m: usize) -> Result<(Instance, ExperimentRecord)> {
    let inst = Instance::new(config.n, config.coupling, kappa)?;
    let mut single = config.clone();
    single.m_grid = vec![m];
    let record = qkls_points(&single, &inst, 0).remove(0);
    Ok((inst, record))
}
