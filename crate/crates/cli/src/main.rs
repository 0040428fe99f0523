use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use bvkernel_cli::suite::{
    parse_suite, render_json, render_text, run_suite, AlgebraSpec, JobSpec, LieSpec, Overrides,
    RunReport,
};

/// Exact-arithmetic verification suites for higher order differential
/// operators, generalized BV brackets, Lie complexes, multivector calculus,
/// the bc ghost system, and the quantum master equation.
#[derive(Parser)]
#[command(name = "bvkernel", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Job-level parallelism.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,

    /// Global seed override.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Global truncation-cap override.
    #[arg(long, global = true)]
    cap: Option<i64>,

    /// Output format.
    #[arg(long, global = true, default_value = "text")]
    format: Format,

    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Args, Clone)]
struct PolyAlg {
    /// Even generator count.
    #[arg(long, default_value_t = 1)]
    n_even: usize,
    /// Odd generator count.
    #[arg(long, default_value_t = 0)]
    n_odd: usize,
    /// Even-degree truncation cap.
    #[arg(long, default_value_t = 8)]
    alg_cap: i64,
}

impl PolyAlg {
    fn spec(&self) -> AlgebraSpec {
        AlgebraSpec::Poly {
            n_even: self.n_even,
            n_odd: self.n_odd,
            cap: self.alg_cap,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Classify an operator's differential order on a polynomial algebra.
    CheckOrder {
        #[command(flatten)]
        alg: PolyAlg,
        /// Operator expression, e.g. "dx1*dx1" or "mul(x1)".
        #[arg(long)]
        op: String,
        #[arg(long, default_value_t = 3)]
        r_max: usize,
        #[arg(long, default_value_t = true)]
        unital_adjust: bool,
        #[arg(long)]
        expect_order: Option<usize>,
    },
    /// Verify the four GBVA bracket identities for an algebra and Δ.
    VerifyGbva {
        /// Algebra: "poly:E,O,CAP", "lie:sl2:homology", or "bc:CAP".
        #[arg(long)]
        algebra: String,
        #[arg(long)]
        delta: String,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        sample_seed: u64,
    },
    /// Verify the generalized identities for random odd operators on a
    /// random noncommutative, nonassociative superalgebra.
    VerifyGeneral {
        #[arg(long, default_value_t = 5)]
        dim: usize,
        #[arg(long, default_value_t = 0)]
        algebra_seed: u64,
        #[arg(long, default_value_t = 25)]
        op_count: usize,
        #[arg(long, default_value_t = 40)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        sample_seed: u64,
    },
    /// Lie complex suite: differentials, Cartan identity, orders, homology.
    LieHomology {
        /// "sl2", "abelian2", or "nonabelian2".
        #[arg(long, default_value = "sl2")]
        lie: String,
        /// Optional expected homology dims, comma-separated.
        #[arg(long)]
        expect_homology: Option<String>,
        #[arg(long)]
        expect_cohomology: Option<String>,
    },
    /// Weil homology complex against independent invariant dimensions.
    Weil {
        #[arg(long, default_value = "sl2")]
        lie: String,
        #[arg(long, default_value_t = 2)]
        sym_cap: i64,
    },
    /// Schouten bracket suite on polynomial multivector fields.
    SnCheck {
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 2)]
        poly_cap: i64,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        sample_seed: u64,
    },
    /// bc-system checks: mode orders, commutators, L0, the G0 identities.
    VosaVerify {
        #[arg(long, default_value_t = 4)]
        weight_cap: i64,
        /// Comma-separated checks, e.g. "thm22:0,thm22:1,del:1,commutators".
        #[arg(long, default_value = "thm22:0,thm22:-1,del:1,commutators,primary")]
        checks: String,
    },
    /// Master-equation checks for a candidate (W, λ) on a classical algebra.
    MasterCheck {
        #[command(flatten)]
        alg: PolyAlg,
        /// BV operator, e.g. "dx1*dt1 + dx2*dt2".
        #[arg(long)]
        delta: String,
        /// Candidate element W.
        #[arg(long)]
        w: String,
        #[arg(long, default_value = "0")]
        lambda: String,
        #[arg(long, default_value_t = 5)]
        k_max: usize,
    },
    /// Run a suite file.
    Run {
        /// Path to a TOML suite file.
        config: PathBuf,
    },
}

fn jobs_from_command(cmd: &Command) -> Result<Vec<JobSpec>> {
    Ok(match cmd {
        Command::CheckOrder {
            alg,
            op,
            r_max,
            unital_adjust,
            expect_order,
        } => vec![JobSpec::CheckOrder {
            name: None,
            algebra: alg.spec(),
            op: op.clone(),
            r_max: *r_max,
            unital_adjust: *unital_adjust,
            expect_order: *expect_order,
            expect_witness: None,
        }],
        Command::VerifyGbva {
            algebra,
            delta,
            samples,
            sample_seed,
        } => vec![JobSpec::VerifyGbva {
            name: None,
            algebra: parse_algebra_arg(algebra)?,
            delta: delta.clone(),
            samples: *samples,
            seed: *sample_seed,
        }],
        Command::VerifyGeneral {
            dim,
            algebra_seed,
            op_count,
            samples,
            sample_seed,
        } => vec![JobSpec::VerifyGeneral {
            name: None,
            dim: *dim,
            algebra_seed: *algebra_seed,
            op_count: *op_count,
            samples: *samples,
            seed: *sample_seed,
        }],
        Command::LieHomology {
            lie,
            expect_homology,
            expect_cohomology,
        } => vec![JobSpec::LieSuite {
            name: None,
            lie: LieSpec::Named(lie.clone()),
            expect_homology: parse_dims(expect_homology)?,
            expect_cohomology: parse_dims(expect_cohomology)?,
        }],
        Command::Weil { lie, sym_cap } => vec![JobSpec::Weil {
            name: None,
            lie: LieSpec::Named(lie.clone()),
            cap: *sym_cap,
        }],
        Command::SnCheck {
            dim,
            poly_cap,
            samples,
            sample_seed,
        } => vec![JobSpec::SnCheck {
            name: None,
            dim: *dim,
            cap: *poly_cap,
            samples: *samples,
            seed: *sample_seed,
        }],
        Command::VosaVerify { weight_cap, checks } => vec![JobSpec::VosaVerify {
            name: None,
            cap: *weight_cap,
            checks: checks.split(',').map(|s| s.trim().to_string()).collect(),
        }],
        Command::MasterCheck {
            alg,
            delta,
            w,
            lambda,
            k_max,
        } => vec![JobSpec::PowerLemmas {
            name: None,
            algebra: alg.spec(),
            delta: delta.clone(),
            w: w.clone(),
            lambda: lambda.clone(),
            k_max: *k_max,
        }],
        Command::Run { .. } => unreachable!("handled by caller"),
    })
}

fn parse_algebra_arg(s: &str) -> Result<AlgebraSpec> {
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        ["poly", dims] => {
            let nums: Vec<&str> = dims.split(',').collect();
            if nums.len() != 3 {
                anyhow::bail!("poly algebra spec is poly:<even>,<odd>,<cap>");
            }
            Ok(AlgebraSpec::Poly {
                n_even: nums[0].trim().parse()?,
                n_odd: nums[1].trim().parse()?,
                cap: nums[2].trim().parse()?,
            })
        }
        ["lie", name, case] => Ok(AlgebraSpec::LieExterior {
            lie: LieSpec::Named(name.to_string()),
            case: case.to_string(),
        }),
        ["bc", cap] => Ok(AlgebraSpec::Bc {
            cap: cap.trim().parse()?,
        }),
        _ => anyhow::bail!("unknown algebra spec {s:?} (poly:E,O,CAP | lie:NAME:CASE | bc:CAP)"),
    }
}

fn parse_dims(s: &Option<String>) -> Result<Option<Vec<usize>>> {
    match s {
        None => Ok(None),
        Some(s) => Ok(Some(
            s.split(',')
                .map(|p| p.trim().parse::<usize>().context("bad dimension list"))
                .collect::<Result<Vec<_>>>()?,
        )),
    }
}

fn emit(report: &RunReport, format: Format, out: &Option<PathBuf>) -> Result<()> {
    let text = match format {
        Format::Text => render_text(report),
        Format::Json => render_json(report)?,
    };
    match out {
        None => print!("{text}"),
        Some(path) => std::fs::write(path, text)
            .with_context(|| format!("cannot write report to {}", path.display()))?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let overrides = Overrides {
        seed: cli.seed,
        cap: cli.cap,
    };

    let jobs = match &cli.command {
        Command::Run { config } => {
            let text = match std::fs::read_to_string(config) {
                Ok(t) => t,
                Err(e) => {
                    eprintln!("error: cannot read {}: {e}", config.display());
                    return ExitCode::from(2);
                }
            };
            match parse_suite(&text) {
                Ok(f) => f.job,
                Err(e) => {
                    eprintln!("error: {e:#}");
                    return ExitCode::from(2);
                }
            }
        }
        other => match jobs_from_command(other) {
            Ok(j) => j,
            Err(e) => {
                eprintln!("error: {e:#}");
                return ExitCode::from(2);
            }
        },
    };

    match run_suite(&jobs, cli.jobs.max(1), &overrides) {
        Ok(report) => {
            if let Err(e) = emit(&report, cli.format, &cli.out) {
                eprintln!("error: {e:#}");
                return ExitCode::from(2);
            }
            if report.overall_pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
