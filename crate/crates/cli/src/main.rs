//! Command-line front end: instance file I/O, example generators, and
//! one subcommand per library operation.
//!
//! Exit codes: 0 success (and MATCHING verdicts), 1 NOT_MATCHING,
//! 2 malformed input or I/O failure, 3 resource caps exceeded.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use num_traits::ToPrimitive;
use qmatch::exactmat::{parse_rational, Matrix, Rational};
use qmatch::hardness::{build_gadget, gadget_value_lhs, gadget_value_rhs, Gadget, GadgetError};
use qmatch::hmip::{decide_matching_with_log, Decision, HmipError, HmipInstance};
use qmatch::instances;
use qmatch::io::{InstanceFile, IoError, Meta};
use qmatch::matroid::{edmonds_rado_check, mi_rank_bruteforce, MatroidError};
use qmatch::permanents::{
    barvinok_estimate, matroidal_permanent, mixed_discriminant, permanent,
    quantum_permanent_with_cap, PermError, QpRoute,
};
use qmatch::scaling::{osi_run, osi_run_f, CpOperatorF, ScalingError};
use qmatch::ComplexRational;

#[derive(Parser)]
#[command(
    name = "qmatch",
    about = "Exact quantum permanents, operator Sinkhorn scaling, and matroid-intersection decisions",
    version
)]
struct Cli {
    /// Seed for every randomized operation (estimators, generators).
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Dimension cap for quantum-permanent computations.
    #[arg(long = "max-n", global = true, default_value_t = 5)]
    max_n: usize,

    /// Arithmetic mode for scaling trajectories.
    #[arg(long, global = true, value_enum, default_value_t = ModeArg::Exact)]
    mode: ModeArg,

    /// Write a JSONL trajectory log ({"iter":..,"ds":..,"a":..} per line).
    #[arg(long, global = true)]
    log: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Exact,
    Float,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum RouteArg {
    /// Signed sum of block mixed discriminants (fastest exact route).
    SignedMixed,
    /// Triple permutation contraction.
    Triple,
    /// Quadruple permutation contraction with 1/N! prefactor.
    Quad,
}

impl From<RouteArg> for QpRoute {
    fn from(r: RouteArg) -> Self {
        match r {
            RouteArg::SignedMixed => QpRoute::SignedMixed,
            RouteArg::Triple => QpRoute::Triple,
            RouteArg::Quad => QpRoute::Quad,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Quantum permanent of a bipartite state (kraus/pairs/choi/subspace instances).
    Qp {
        instance: PathBuf,
        /// Contraction route; all three agree exactly.
        #[arg(long, value_enum, default_value_t = RouteArg::SignedMixed)]
        route: RouteArg,
    },
    /// Mixed discriminant of a tuple instance.
    Mixdisc { instance: PathBuf },
    /// Permanent of a matrix instance.
    Perm { instance: PathBuf },
    /// Matroidal permanent of a pairs instance.
    Mp { instance: PathBuf },
    /// Monte Carlo estimate of the matroidal permanent.
    Estimate {
        instance: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
    },
    /// Operator Sinkhorn scaling until the defect reaches --eps.
    ///
    /// Exact-mode iterates grow quickly in coefficient size, so tight
    /// thresholds want --mode float or --round-bits.
    Scale {
        instance: PathBuf,
        #[arg(long = "max-iter", default_value_t = 200)]
        max_iter: usize,
        /// Defect threshold, a p/q fraction string.
        #[arg(long, default_value = "1/100")]
        eps: String,
        /// Optional dyadic rounding of exact iterates to denominators 2^BITS.
        #[arg(long)]
        round_bits: Option<u32>,
    },
    /// Decide whether a promised instance is matching (exit 0) or not (exit 1).
    Decide {
        instance: PathBuf,
        /// Assert the instance is separable (tightens the iteration budget).
        #[arg(long)]
        separable: bool,
    },
    /// Matroid-intersection rank with the Edmonds-Rado certificate.
    MatroidRank { instance: PathBuf },
    /// Grid maxima of the arrowhead gadget built from a tuple instance.
    Gadget {
        /// Tuple instance holding the real symmetric matrices.
        #[arg(long = "a")]
        a_matrices: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        grid: usize,
    },
    /// Emit a named example instance file.
    Examples {
        /// One of: sk3, identity, pure, permutation-pattern, random-separable, ir-subspace.
        name: String,
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 4)]
        k: usize,
        /// Output path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Serialize)]
struct ExactFloat {
    exact: String,
    float: f64,
}

impl ExactFloat {
    fn of(c: &ComplexRational) -> Self {
        Self { exact: c.to_string(), float: c.to_f64() }
    }

    fn of_rational(r: &Rational) -> Self {
        Self { exact: r.to_string(), float: r.to_f64().unwrap_or(f64::NAN) }
    }
}

#[derive(Serialize)]
struct LogLine {
    iter: usize,
    ds: f64,
    a: Option<f64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("qmatch: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Instance(#[from] IoError),
    #[error("{0}")]
    Perm(#[from] PermError),
    #[error("{0}")]
    Matroid(#[from] MatroidError),
    #[error("{0}")]
    Gadget(#[from] GadgetError),
    #[error("{0}")]
    Scaling(#[from] ScalingError),
    #[error("{0}")]
    Hmip(#[from] HmipError),
    #[error("{0}")]
    Usage(String),
}

fn exit_code_for(e: &CliError) -> u8 {
    match e {
        CliError::Perm(PermError::ResourceCap { .. }) => 3,
        CliError::Matroid(MatroidError::CapExceeded { .. }) => 3,
        CliError::Gadget(GadgetError::UnsupportedDimension(_)) => 3,
        _ => 2,
    }
}

fn load(path: &Path) -> Result<InstanceFile, CliError> {
    let text = std::fs::read_to_string(path)?;
    Ok(InstanceFile::parse(&text)?)
}

fn emit<T: Serialize>(value: &T) {
    println!("{}", serde_json::to_string(value).expect("serializable output"));
}

fn write_log(path: &Option<PathBuf>, lines: &[LogLine]) -> Result<(), CliError> {
    if let Some(path) = path {
        let mut f = std::fs::File::create(path)?;
        for line in lines {
            writeln!(f, "{}", serde_json::to_string(line).expect("serializable log line"))?;
        }
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<ExitCode, CliError> {
    match &cli.command {
        Command::Qp { instance, route } => {
            let rho = load(instance)?.budm()?;
            let qp = quantum_permanent_with_cap(&rho, (*route).into(), cli.max_n)?;
            emit(&ExactFloat::of(&qp));
            Ok(ExitCode::SUCCESS)
        }
        Command::Mixdisc { instance } => {
            let tuple = load(instance)?.matrix_tuple()?;
            let d = mixed_discriminant(&tuple)?;
            emit(&ExactFloat::of(&d));
            Ok(ExitCode::SUCCESS)
        }
        Command::Perm { instance } => {
            let m = load(instance)?.bare_matrix()?;
            let p = permanent(&m)?;
            emit(&ExactFloat::of(&p));
            Ok(ExitCode::SUCCESS)
        }
        Command::Mp { instance } => {
            let p = load(instance)?.pair_family()?;
            let mp = matroidal_permanent(&p)?;
            emit(&ExactFloat::of_rational(&mp));
            Ok(ExitCode::SUCCESS)
        }
        Command::Estimate { instance, samples } => {
            let p = load(instance)?.pair_family()?;
            let (mean, stderr) = barvinok_estimate(&p, *samples, cli.seed);
            #[derive(Serialize)]
            struct Out {
                mean: f64,
                stderr: f64,
                samples: usize,
            }
            emit(&Out { mean, stderr, samples: *samples });
            Ok(ExitCode::SUCCESS)
        }
        Command::Scale { instance, max_iter, eps, round_bits } => {
            let t = load(instance)?.operator()?;
            let eps_rat =
                parse_rational(eps).map_err(|e| CliError::Usage(format!("--eps: {e}")))?;
            if round_bits.is_some() && cli.mode == ModeArg::Float {
                return Err(CliError::Usage(
                    "--round-bits applies to exact mode only".into(),
                ));
            }
            #[derive(Serialize)]
            struct Out {
                reached: bool,
                iterations: usize,
                ds: f64,
                #[serde(skip_serializing_if = "Option::is_none")]
                ds_exact: Option<String>,
                singular_step: Option<usize>,
            }
            match cli.mode {
                ModeArg::Exact => {
                    let run = osi_run(&t, *max_iter, &eps_rat, *round_bits)?;
                    let lines: Vec<LogLine> = run
                        .state
                        .log
                        .iter()
                        .map(|r| LogLine {
                            iter: r.iter,
                            ds: r.ds.to_f64().unwrap_or(f64::NAN),
                            a: r.a.as_ref().map(|a| a.to_f64().unwrap_or(f64::NAN)),
                        })
                        .collect();
                    write_log(&cli.log, &lines)?;
                    emit(&Out {
                        reached: run.reached,
                        iterations: run.state.iter,
                        ds: run.state.ds.to_f64().unwrap_or(f64::NAN),
                        ds_exact: Some(run.state.ds.to_string()),
                        singular_step: run.state.certificate.as_ref().map(|c| c.step),
                    });
                }
                ModeArg::Float => {
                    let tf = CpOperatorF::from_exact(&t);
                    let eps_f = eps_rat.to_f64().unwrap_or(0.0);
                    let run = osi_run_f(&tf, *max_iter, eps_f);
                    let lines: Vec<LogLine> = run
                        .state
                        .log
                        .iter()
                        .map(|r| LogLine { iter: r.iter, ds: r.ds, a: r.a })
                        .collect();
                    write_log(&cli.log, &lines)?;
                    emit(&Out {
                        reached: run.reached,
                        iterations: run.state.iter,
                        ds: run.state.ds,
                        ds_exact: None,
                        singular_step: run.state.certificate.as_ref().map(|c| c.step),
                    });
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Decide { instance, separable } => {
            let source = load(instance)?.hmip_source()?;
            let separable =
                *separable || matches!(source, qmatch::hmip::InstanceSource::Pairs(_));
            let inst = HmipInstance::new(source, separable)?;
            let (verdict, state) = decide_matching_with_log(&inst)?;
            let lines: Vec<LogLine> = state
                .log
                .iter()
                .map(|r| LogLine {
                    iter: r.iter,
                    ds: r.ds.to_f64().unwrap_or(f64::NAN),
                    a: r.a.as_ref().map(|a| a.to_f64().unwrap_or(f64::NAN)),
                })
                .collect();
            write_log(&cli.log, &lines)?;
            emit(&verdict);
            Ok(if verdict.decision == Decision::Matching {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::MatroidRank { instance } => {
            let p = load(instance)?.pair_family()?;
            let rank = mi_rank_bruteforce(&p)?;
            let er = edmonds_rado_check(&p)?;
            #[derive(Serialize)]
            struct Out {
                rank: usize,
                full: bool,
                certificate: Option<Vec<usize>>,
            }
            emit(&Out { rank, full: er.full_rank, certificate: er.violating_set });
            Ok(ExitCode::SUCCESS)
        }
        Command::Gadget { a_matrices, grid } => {
            let ms = load(a_matrices)?.matrices()?;
            let g = Gadget::new(ms)?;
            debug_assert!(build_gadget(&g).is_hermitian());
            let lhs = gadget_value_lhs(&g, *grid)?;
            let rhs = gadget_value_rhs(&g, *grid)?;
            #[derive(Serialize)]
            struct Out {
                lhs: f64,
                rhs: f64,
                argmax_y: Vec<f64>,
            }
            emit(&Out { lhs: lhs.value, rhs: rhs.value, argmax_y: lhs.argmax });
            Ok(ExitCode::SUCCESS)
        }
        Command::Examples { name, n, k, out } => {
            let file = build_example(name, *n, *k, cli.seed)?;
            let json = file.to_json();
            match out {
                Some(path) => std::fs::write(path, json + "\n")?,
                None => println!("{json}"),
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn meta_for(name: &str, seed: u64) -> Option<Meta> {
    let mut m = BTreeMap::new();
    m.insert("generator".to_string(), name.to_string());
    m.insert("seed".to_string(), seed.to_string());
    Some(m)
}

fn build_example(name: &str, n: usize, k: usize, seed: u64) -> Result<InstanceFile, CliError> {
    match name {
        "sk3" => Ok(InstanceFile::from_operator(&instances::sk3(), meta_for(name, seed))),
        "identity" => {
            Ok(InstanceFile::from_operator(&instances::identity_map(n), meta_for(name, seed)))
        }
        "pure" => {
            let mut rng = instances::rng(seed);
            let r = instances::random_matrix(&mut rng, n, n, 2);
            Ok(InstanceFile::from_budm(&instances::pure_state(&r), meta_for(name, seed)))
        }
        "permutation-pattern" => {
            let mut rng = instances::rng(seed);
            let r = Matrix::from_fn(n, n, |_, _| {
                ComplexRational::from_int(rand::Rng::random_range(&mut rng, 0..=3i64))
            });
            Ok(InstanceFile::from_budm(&instances::permutation_pattern(&r), meta_for(name, seed)))
        }
        "random-separable" => {
            let p = instances::random_pair_family(seed, n, k, -3, 3);
            Ok(InstanceFile::from_pairs(&p, meta_for(name, seed)))
        }
        "ir-subspace" => {
            Ok(InstanceFile::from_subspace(2, instances::ir_subspace(), meta_for(name, seed)))
        }
        other => Err(CliError::Usage(format!(
            "unknown example {other:?}; expected sk3, identity, pure, permutation-pattern, random-separable, or ir-subspace"
        ))),
    }
}
