//! Command-line harness: `solve` runs one solver on files, `experiment` runs
//! the multi-trial studies, `feasibility` runs projection schedules on a set
//! collection, `rate` prints theoretical contraction factors.
//!
//! Exit codes: 0 success, 2 bad arguments or unreadable/invalid input files,
//! 3 numerical failure during a run.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use randlin::conditioning::{
    hoffman_constant, polyhedral_gamma_surrogate, rate_ap, rate_aphoff, rate_cdmn2, rate_lc1,
    rate_mrap, renegar_rate, HoffmanMode, MrapFlavor, RateReport,
};
use randlin::geometry::{
    run_alternating_projections, run_averaged_projections, run_norepeat_projections,
    run_randomized_projections,
};
use randlin::harness::{fit_log_slope, run_experiment, ExperimentKind, ExperimentSpec};
use randlin::io;
use randlin::linalg::frobenius_norm;
use randlin::solvers::{
    append_trace_csv, cd_lsq, cd_psd, kaczmarz, proj_inequalities, write_trace_csv_header,
    InequalitySystem, IterationTrace, LinearSystem, RowKind, SolverConfig,
};
use randlin::DenseVector;

#[derive(Parser)]
#[command(
    name = "randlin",
    version,
    about = "Randomized coordinate descent and projection methods for linear constraints"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Algorithm {
    Cdpsd,
    Cdlsq,
    Kaczmarz,
    Projineq,
}

#[derive(Clone, Copy, ValueEnum)]
enum Schedule {
    Uniform,
    Norepeat,
    Averaged,
    Alternate,
}

#[derive(Clone, Copy, ValueEnum)]
enum Theorem {
    Lc1,
    Cdmn2,
    Ap,
    Aphoff,
    Renegar,
    Mrap,
}

#[derive(Clone, Copy, ValueEnum)]
enum Flavor {
    Uniform,
    Norepeat,
    Twoset,
}

#[derive(Args)]
struct RunOpts {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long = "max-iters", default_value_t = 10_000)]
    max_iters: usize,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long = "trace-every", default_value_t = 1)]
    trace_every: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Run one solver on a system read from files.
    Solve {
        #[arg(long, value_enum)]
        alg: Algorithm,
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        rhs: PathBuf,
        /// Per-row kinds (LE/EQ) for projineq; defaults to all LE.
        #[arg(long = "ineq-kinds")]
        ineq_kinds: Option<PathBuf>,
        /// Starting point file; defaults to the origin.
        #[arg(long)]
        x0: Option<PathBuf>,
        /// Append the iteration trace to this CSV file.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[command(flatten)]
        run: RunOpts,
    },
    /// Run a multi-trial randomized study and write CSV + SVG artifacts.
    Experiment {
        #[arg(long)]
        kind: String,
        #[arg(long, default_value_t = 500)]
        rows: usize,
        /// Comma-separated list of column counts, e.g. 50,100,150,200.
        #[arg(long, value_delimiter = ',')]
        cols: Vec<usize>,
        #[arg(long, default_value_t = 10)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long = "max-iters", default_value_t = 3000)]
        max_iters: usize,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[arg(long = "trace-every", default_value_t = 1)]
        trace_every: usize,
    },
    /// Run a projection schedule on a convex set collection.
    Feasibility {
        #[arg(long)]
        sets: PathBuf,
        #[arg(long, value_enum)]
        schedule: Schedule,
        /// Regularity-modulus bound used for the theoretical factor.
        #[arg(long = "gamma-bar")]
        gamma_bar: Option<f64>,
        #[arg(long)]
        x0: Option<PathBuf>,
        #[arg(long)]
        trace: Option<PathBuf>,
        #[command(flatten)]
        run: RunOpts,
    },
    /// Print the theoretical contraction factor of one theorem as key=value
    /// lines plus JSON.
    Rate {
        #[arg(long, value_enum)]
        theorem: Theorem,
        #[arg(long)]
        matrix: Option<PathBuf>,
        #[arg(long)]
        rhs: Option<PathBuf>,
        /// Per-row kinds file for aphoff; defaults to all EQ.
        #[arg(long)]
        ineq: Option<PathBuf>,
        /// Feasible witness file (sampled Hoffman bound for inequality
        /// systems).
        #[arg(long)]
        witness: Option<PathBuf>,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Distance to infeasibility (renegar).
        #[arg(long)]
        mu: Option<f64>,
        /// ‖b‖ (renegar).
        #[arg(long)]
        normb: Option<f64>,
        #[arg(long = "gamma-bar")]
        gamma_bar: Option<f64>,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long, value_enum)]
        flavor: Option<Flavor>,
    },
}

enum CliError {
    Usage(String),
    Numerical(String),
}

impl CliError {
    fn usage(e: impl std::fmt::Display) -> Self {
        CliError::Usage(e.to_string())
    }

    fn numerical(e: impl std::fmt::Display) -> Self {
        CliError::Numerical(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Numerical(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Solve {
            alg,
            matrix,
            rhs,
            ineq_kinds,
            x0,
            trace,
            run,
        } => cmd_solve(alg, matrix, rhs, ineq_kinds, x0, trace, run),
        Command::Experiment {
            kind,
            rows,
            cols,
            trials,
            seed,
            out,
            max_iters,
            tol,
            trace_every,
        } => cmd_experiment(kind, rows, cols, trials, seed, out, max_iters, tol, trace_every),
        Command::Feasibility {
            sets,
            schedule,
            gamma_bar,
            x0,
            trace,
            run,
        } => cmd_feasibility(sets, schedule, gamma_bar, x0, trace, run),
        Command::Rate {
            theorem,
            matrix,
            rhs,
            ineq,
            witness,
            samples,
            seed,
            mu,
            normb,
            gamma_bar,
            m,
            flavor,
        } => cmd_rate(
            theorem, matrix, rhs, ineq, witness, samples, seed, mu, normb, gamma_bar, m, flavor,
        ),
    }
}

fn write_trace(
    path: &PathBuf,
    algorithm: &str,
    trace: &IterationTrace,
) -> Result<(), CliError> {
    let file = File::create(path).map_err(CliError::usage)?;
    let mut w = BufWriter::new(file);
    write_trace_csv_header(&mut w).map_err(CliError::numerical)?;
    append_trace_csv(&mut w, algorithm, 0, trace).map_err(CliError::numerical)?;
    w.flush().map_err(CliError::numerical)?;
    Ok(())
}

fn cmd_solve(
    alg: Algorithm,
    matrix: PathBuf,
    rhs: PathBuf,
    ineq_kinds: Option<PathBuf>,
    x0: Option<PathBuf>,
    trace_path: Option<PathBuf>,
    run: RunOpts,
) -> Result<(), CliError> {
    let a = io::read_matrix(&matrix).map_err(CliError::usage)?;
    let b = io::read_vector(&rhs).map_err(CliError::usage)?;
    let x0 = match x0 {
        Some(p) => io::read_vector(&p).map_err(CliError::usage)?,
        None => DenseVector::zeros(a.cols()),
    };
    let cfg = SolverConfig::new(run.seed, run.max_iters, run.tol, run.trace_every);

    let (name, trace) = match alg {
        Algorithm::Cdpsd => {
            let sys = LinearSystem::new(a, b).map_err(CliError::usage)?;
            let (_, t) = cd_psd(&sys, &x0, &cfg, None).map_err(CliError::numerical)?;
            ("cdpsd", t)
        }
        Algorithm::Cdlsq => {
            let sys = LinearSystem::new(a, b).map_err(CliError::usage)?;
            let (_, t) = cd_lsq(&sys, &x0, &cfg, None).map_err(CliError::numerical)?;
            ("cdlsq", t)
        }
        Algorithm::Kaczmarz => {
            let sys = LinearSystem::new(a, b).map_err(CliError::usage)?;
            let (_, t) = kaczmarz(&sys, &x0, &cfg, None).map_err(CliError::numerical)?;
            ("kaczmarz", t)
        }
        Algorithm::Projineq => {
            let kinds = match ineq_kinds {
                Some(p) => io::read_row_kinds(&p).map_err(CliError::usage)?,
                None => vec![RowKind::Le; a.rows()],
            };
            let sys = InequalitySystem::new(a, b, kinds).map_err(CliError::usage)?;
            let (_, t) =
                proj_inequalities(&sys, &x0, &cfg, None).map_err(CliError::numerical)?;
            ("projineq", t)
        }
    };

    let last = trace.records.last().expect("trace has the initial record");
    println!("algorithm={name}");
    println!("iters={}", trace.iters_run);
    println!("converged={}", trace.converged);
    println!("final_residual={}", last.residual_norm);
    if let Some(g) = last.objective_gap {
        println!("final_objective={g}");
    }
    if let Some(p) = trace_path {
        write_trace(&p, name, &trace)?;
        println!("trace={}", p.display());
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_experiment(
    kind: String,
    rows: usize,
    cols: Vec<usize>,
    trials: usize,
    seed: u64,
    out: PathBuf,
    max_iters: usize,
    tol: f64,
    trace_every: usize,
) -> Result<(), CliError> {
    let kind: ExperimentKind = kind.parse().map_err(CliError::Usage)?;
    if cols.is_empty() {
        return Err(CliError::Usage("provide at least one --cols value".into()));
    }
    let spec = ExperimentSpec {
        kind,
        rows,
        cols_list: cols,
        trials,
        base_seed: seed,
        max_iters,
        tol,
        trace_every,
        output_dir: out,
    };
    spec.validate().map_err(CliError::usage)?;
    let results = run_experiment(&spec).map_err(CliError::numerical)?;
    println!("kind={}", spec.kind.slug());
    println!("trials_completed={}", results.len());
    println!("out={}", spec.output_dir.display());
    for r in &results {
        let factor = r
            .rate_report
            .as_ref()
            .map(|rep| format!("{}", rep.theoretical_factor))
            .unwrap_or_else(|| "-".into());
        println!(
            "cols={} trial={} seed={} iters={} slope={} theoretical_factor={}",
            r.cols, r.trial, r.seed, r.trace.iters_run, r.fitted_log_slope, factor
        );
    }
    Ok(())
}

fn cmd_feasibility(
    sets: PathBuf,
    schedule: Schedule,
    gamma_bar: Option<f64>,
    x0: Option<PathBuf>,
    trace_path: Option<PathBuf>,
    run: RunOpts,
) -> Result<(), CliError> {
    let collection = io::read_set_collection(&sets).map_err(CliError::usage)?;
    let collection = match gamma_bar {
        Some(g) => collection.with_gamma_bar(g).map_err(CliError::usage)?,
        None => collection,
    };
    let x0 = match x0 {
        Some(p) => io::read_vector(&p).map_err(CliError::usage)?,
        None => DenseVector::zeros(collection.dimension()),
    };
    let cfg = SolverConfig::new(run.seed, run.max_iters, run.tol, run.trace_every);
    let m = collection.len();

    let (name, result) = match schedule {
        Schedule::Uniform => (
            "uniform",
            run_randomized_projections(&collection, &x0, &cfg, None),
        ),
        Schedule::Norepeat => (
            "norepeat",
            run_norepeat_projections(&collection, &x0, &cfg, None),
        ),
        Schedule::Averaged => (
            "averaged",
            run_averaged_projections(&collection, &x0, &cfg, None),
        ),
        Schedule::Alternate => (
            "alternate",
            run_alternating_projections(&collection, &x0, &cfg, None),
        ),
    };
    let (_, trace) = result.map_err(CliError::numerical)?;

    let last = trace.records.last().expect("trace has the initial record");
    println!("schedule={name}");
    println!("sets={m}");
    println!("iters={}", trace.iters_run);
    println!("converged={}", trace.converged);
    println!("final_feasibility_residual={}", last.residual_norm);

    if let Some(g) = collection.gamma_bar() {
        let flavor = match schedule {
            Schedule::Uniform | Schedule::Averaged => Some(MrapFlavor::Uniform),
            Schedule::Norepeat => Some(MrapFlavor::NoRepeat),
            Schedule::Alternate => (m == 2).then_some(MrapFlavor::TwoSet),
        };
        if let Some(flavor) = flavor {
            let mut report = rate_mrap(m, g, flavor).map_err(CliError::usage)?;
            // For pure halfspace/hyperplane collections the regularity bound
            // is global; otherwise it only holds near the intersection.
            let polyhedral = polyhedral_gamma_surrogate(&collection, None, 0, 0).is_ok();
            if !polyhedral {
                report = report.mark_local_only();
            }
            let pts: Vec<(f64, f64)> = trace
                .records
                .iter()
                .filter_map(|r| {
                    let v = r.residual_norm;
                    (v > 1e-14).then_some((r.iter as f64, v))
                })
                .collect();
            let (slope, _exact) = fit_log_slope(&pts);
            let observed = (2.0 * slope).exp();
            report = report.with_observed(observed, 1);
            print!("{}", report.key_value_lines());
            if observed > report.theoretical_factor + 1e-9 {
                println!("observed_exceeds_bound=true");
            }
        }
    }

    if let Some(p) = trace_path {
        write_trace(&p, name, &trace)?;
        println!("trace={}", p.display());
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_rate(
    theorem: Theorem,
    matrix: Option<PathBuf>,
    rhs: Option<PathBuf>,
    ineq: Option<PathBuf>,
    witness: Option<PathBuf>,
    samples: usize,
    seed: u64,
    mu: Option<f64>,
    normb: Option<f64>,
    gamma_bar: Option<f64>,
    m: Option<usize>,
    flavor: Option<Flavor>,
) -> Result<(), CliError> {
    let need_matrix = || -> Result<_, CliError> {
        let p = matrix
            .as_ref()
            .ok_or_else(|| CliError::Usage("this theorem needs --matrix".into()))?;
        io::read_matrix(p).map_err(CliError::usage)
    };

    let report: RateReport = match theorem {
        Theorem::Lc1 => rate_lc1(&need_matrix()?).map_err(CliError::numerical)?,
        Theorem::Cdmn2 => rate_cdmn2(&need_matrix()?).map_err(CliError::numerical)?,
        Theorem::Ap => rate_ap(&need_matrix()?).map_err(CliError::numerical)?,
        Theorem::Aphoff => {
            let a = need_matrix()?;
            let kinds = match &ineq {
                Some(p) => io::read_row_kinds(p).map_err(CliError::usage)?,
                None => vec![RowKind::Eq; a.rows()],
            };
            let b = match &rhs {
                Some(p) => io::read_vector(p).map_err(CliError::usage)?,
                None => DenseVector::zeros(a.rows()),
            };
            let sys = InequalitySystem::new(a, b, kinds).map_err(CliError::usage)?;
            let has_le = sys.row_kinds.contains(&RowKind::Le);
            let l = if has_le {
                let wpath = witness.as_ref().ok_or_else(|| {
                    CliError::Usage(
                        "inequality systems need --witness (a feasible point) for the sampled Hoffman bound".into(),
                    )
                })?;
                let w = io::read_vector(wpath).map_err(CliError::usage)?;
                hoffman_constant(
                    &sys,
                    HoffmanMode::SampledLowerBound {
                        witness: &w,
                        samples,
                        seed,
                    },
                )
                .map_err(CliError::numerical)?
            } else {
                hoffman_constant(&sys, HoffmanMode::ExactEquality).map_err(CliError::numerical)?
            };
            rate_aphoff(&sys, &l)
        }
        Theorem::Renegar => {
            let mu = mu.ok_or_else(|| CliError::Usage("renegar needs --mu".into()))?;
            let norm_b = match (normb, &rhs) {
                (Some(v), _) => v,
                (None, Some(p)) => io::read_vector(p).map_err(CliError::usage)?.norm(),
                (None, None) => {
                    return Err(CliError::Usage("renegar needs --normb (or --rhs)".into()))
                }
            };
            let frob = frobenius_norm(&need_matrix()?);
            renegar_rate(frob * frob, mu, norm_b).map_err(CliError::numerical)?
        }
        Theorem::Mrap => {
            let g = gamma_bar.ok_or_else(|| CliError::Usage("mrap needs --gamma-bar".into()))?;
            let m = m.ok_or_else(|| CliError::Usage("mrap needs --m".into()))?;
            let flavor = match flavor.unwrap_or(Flavor::Uniform) {
                Flavor::Uniform => MrapFlavor::Uniform,
                Flavor::Norepeat => MrapFlavor::NoRepeat,
                Flavor::Twoset => MrapFlavor::TwoSet,
            };
            rate_mrap(m, g, flavor).map_err(CliError::usage)?
        }
    };

    print!("{}", report.key_value_lines());
    println!(
        "{}",
        serde_json::to_string(&report).map_err(CliError::numerical)?
    );
    Ok(())
}
