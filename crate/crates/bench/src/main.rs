use std::path::PathBuf;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use qkls_bench::analysis::{linear_fit, ordering_report};
use qkls_bench::complexity::complexity_report;
use qkls_bench::records::{write_csv, write_overlap_csv, PointDetail};
use qkls_bench::runs::solve_point;
use qkls_bench::{run_compare, run_fourier, run_overlap_study, run_qkls, write_run, ExperimentConfig, SourceKind};

#[derive(Parser)]
#[command(name = "qkls", version, about = "Simulated quantum Krylov-subspace linear solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a single (kappa, M) point and print the coefficients.
    Solve {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, default_value_t = 27.6)]
        kappa: f64,
        #[arg(long, default_value_t = 8)]
        m: usize,
    },
    /// Benchmark sweeps.
    Bench {
        #[command(subcommand)]
        which: BenchCommand,
    },
    /// Finite-difference element error against t_fd.
    OverlapStudy {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Evaluate the asymptotic cost formulas.
    Complexity {
        #[arg(long)]
        d: f64,
        #[arg(long)]
        kappa: f64,
        #[arg(long)]
        epsilon: f64,
        /// System dimension.
        #[arg(long = "big-n")]
        big_n: f64,
    },
}

#[derive(Subcommand)]
enum BenchCommand {
    Qkls(CommonArgs),
    Fourier(CommonArgs),
    /// Both methods on one kappa grid, with the ordering check.
    Compare(CommonArgs),
}

/// Flags override values read from `--config`.
#[derive(Args, Clone, Default)]
struct CommonArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    /// Ising coupling J.
    #[arg(long)]
    coupling: Option<f64>,
    #[arg(long = "kappas", value_delimiter = ',')]
    target_kappas: Option<Vec<f64>>,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long = "m-grid", value_delimiter = ',')]
    m_grid: Option<Vec<usize>>,
    #[arg(long = "t-fd-grid", value_delimiter = ',')]
    t_fd_grid: Option<Vec<f64>>,
    /// `exact` or `finite-difference`.
    #[arg(long)]
    source: Option<SourceKind>,
    #[arg(long)]
    shots: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long = "epsilons", value_delimiter = ',')]
    epsilon_targets: Option<Vec<f64>>,
    #[arg(long)]
    calibrate_fourier: bool,
    #[arg(long)]
    svd_threshold: Option<f64>,
    #[arg(long)]
    workers: Option<usize>,
    /// CSV destination; run metadata goes next to it with a `.json` extension.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

impl CommonArgs {
    fn resolve(&self) -> anyhow::Result<ExperimentConfig> {
        let mut c = match &self.config {
            Some(path) => ExperimentConfig::load(path).with_context(|| format!("reading {}", path.display()))?,
            None => ExperimentConfig::default(),
        };
        macro_rules! set {
            ($($field:ident),*) => {$(
                if let Some(v) = &self.$field {
                    c.$field = v.clone();
                }
            )*};
        }
        set!(n, coupling, target_kappas, tau, m_grid, t_fd_grid, source, seed, epsilon_targets, workers);
        if self.shots.is_some() {
            c.shots = self.shots;
        }
        if self.svd_threshold.is_some() {
            c.svd_threshold = self.svd_threshold;
        }
        if self.calibrate_fourier {
            c.calibrate_fourier = true;
        }
        if self.output.is_some() {
            c.output_path = self.output.clone();
        }
        c.validate()?;
        Ok(c)
    }
}

fn emit(output: &qkls_bench::RunOutput, config: &ExperimentConfig) -> anyhow::Result<()> {
    match &config.output_path {
        Some(path) => {
            write_run(output, path)?;
            eprintln!("wrote {} ({} records)", path.display(), output.records.len());
        }
        None => write_csv(&output.records, std::io::stdout().lock())?,
    }
    Ok(())
}

fn main() -> anyhow::Result<()> {
    match Cli::parse().command {
        Command::Solve { common, kappa, m } => {
            let config = common.resolve()?;
            let (inst, record) = solve_point(&config, kappa, m)?;
            println!("kappa={kappa} eta={} zeta={}", inst.calibration.eta, inst.calibration.zeta);
            println!("M={m} status={} error={:e}", record.status, record.error);
            if let Some(cond) = record.f_condition {
                println!("f_condition={cond:e}");
            }
            if let Some(p) = record.success_prob {
                println!("success_prob={p}");
            }
            if let PointDetail::Coefficients { c, truncated_rank, .. } = &record.detail {
                println!("rank={truncated_rank}");
                for (i, z) in c.iter().enumerate() {
                    println!("c[{i}] = {:+.12e} {:+.12e}i", z.re, z.im);
                }
            }
        }
        Command::Bench { which } => match which {
            BenchCommand::Qkls(common) => {
                let config = common.resolve()?;
                emit(&run_qkls(&config)?, &config)?;
            }
            BenchCommand::Fourier(common) => {
                let config = common.resolve()?;
                emit(&run_fourier(&config)?, &config)?;
            }
            BenchCommand::Compare(common) => {
                let config = common.resolve()?;
                let out = run_compare(&config)?;
                emit(&out, &config)?;
                for &kappa in &config.target_kappas {
                    let r = ordering_report(&out.records, kappa);
                    eprintln!(
                        "kappa={kappa}: best QKLS error {:e}, crossover {:?}, {} comparable counts, {} violations, ordering {}",
                        r.qkls_best_error,
                        r.crossover,
                        r.comparisons.len(),
                        r.violations.len(),
                        if r.holds() { "holds" } else { "fails" }
                    );
                }
            }
        },
        Command::OverlapStudy { common } => {
            let config = common.resolve()?;
            let records = run_overlap_study(&config)?;
            match &config.output_path {
                Some(path) => write_overlap_csv(&records, std::fs::File::create(path)?)?,
                None => write_overlap_csv(&records, std::io::stdout().lock())?,
            }
            for &kappa in &config.target_kappas {
                let (xs, ys): (Vec<f64>, Vec<f64>) = records
                    .iter()
                    .filter(|r| r.kappa == kappa)
                    .map(|r| (r.t_fd, r.max_element_error))
                    .unzip();
                if let Some(fit) = linear_fit(&xs, &ys) {
                    eprintln!("kappa={kappa}: slope {:e}, intercept {:e}, R^2 {:.6}", fit.slope, fit.intercept, fit.r_squared);
                }
            }
        }
        Command::Complexity { d, kappa, epsilon, big_n } => {
            println!("{}", complexity_report(d, kappa, epsilon, big_n)?);
        }
    }
    Ok(())
}
