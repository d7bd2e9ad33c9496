//! `renyi-lab` command-line front end.
//!
//! Exit codes: 0 on success, 1 when `verify` finds a failing property,
//! 2 on invalid input, 3 when an optimizer does not converge.

mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};

use renyi_lab::codelength::codelength_report;
use renyi_lab::hyptest::{
    achievable_exponent, alpha_grid, equality_condition, exact_errors, exponent_alpha_curve, exponent_trend,
    monte_carlo_errors, renyi_lower_bound, DecisionRule, Scenario,
};
use renyi_lab::method_of_types::type_report;
use renyi_lab::renyi::{c_alpha, i_alpha, k_alpha, renyi_divergence, renyi_entropy};
use renyi_lab::shannon::{entropy, kl_divergence};
use renyi_lab::variational::{
    j_variational, variational_divergence, variational_entropy, variational_i_alpha, variational_k_alpha,
};
use renyi_lab::verify::{run_verify_filtered, VerifyConfig};
use renyi_lab::{Channel, Distribution, Error, Order, SolverConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum RuleArg {
    Modified,
    Union,
    SingleSensor,
    DisjointSupport,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Exact,
    MonteCarlo,
}

#[derive(Debug, Parser)]
#[command(
    name = "renyi-lab",
    version,
    about = "Rényi information measures and two-sensor testing"
)]
struct Cli {
    #[arg(long, value_enum, default_value = "json", global = true)]
    format: Format,

    /// Solver tolerance.
    #[arg(long, default_value_t = 1e-9, global = true)]
    tol: f64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Rényi entropy of one distribution, or divergence between two.
    Measure {
        #[arg(long)]
        dist: PathBuf,
        #[arg(long)]
        dist2: Option<PathBuf>,
        /// Order: a positive number, `0`, `1` or `inf`.
        #[arg(long)]
        alpha: Order,
    },
    /// Direct and variational evaluation side by side.
    Variational {
        #[arg(long)]
        dist: PathBuf,
        #[arg(long, conflicts_with = "channel")]
        dist2: Option<PathBuf>,
        #[arg(long)]
        channel: Option<PathBuf>,
        #[arg(long)]
        alpha: f64,
        /// With `--dist2`, evaluate `J_{alpha,beta}` instead of `D_alpha`.
        #[arg(long, requires = "dist2")]
        beta: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// `I_α`, `K_α` and the order-α capacity of a channel.
    Channel {
        #[arg(long)]
        channel: PathBuf,
        #[arg(long)]
        dist: Option<PathBuf>,
        #[arg(long)]
        alpha: Order,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Type counting facts for block length `n`.
    Types {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        alphabet: usize,
        #[arg(long)]
        dist: Option<PathBuf>,
        #[arg(long, requires = "dist")]
        delta: Option<f64>,
    },
    /// Exponentially weighted codelength bounds.
    Codelength {
        #[arg(long)]
        dist: PathBuf,
        #[arg(long)]
        lambda: f64,
        #[arg(long, default_value_t = 12)]
        max_len: u32,
    },
    /// Error probabilities and exponents of a two-sensor test.
    Hyptest {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, value_enum, default_value = "modified")]
        rule: RuleArg,
        #[arg(long, value_enum, default_value = "exact")]
        method: MethodArg,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Total sample sizes `n = n1 + n2` for the exponent trend.
        #[arg(long, value_delimiter = ',')]
        n_list: Vec<u64>,
        /// Number of points on the α grid.
        #[arg(long, default_value_t = 10)]
        alpha_grid: usize,
    },
    /// Runs the seeded property suite.
    Verify {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        instances: usize,
        /// Only rows whose id starts with this prefix.
        #[arg(long, default_value = "")]
        filter: String,
    },
}

/// A failure tagged with the module that raised it.
struct Failure {
    module: &'static str,
    error: Error,
}

trait Tag<T> {
    fn tag(self, module: &'static str) -> Result<T, Failure>;
}

impl<T> Tag<T> for renyi_lab::Result<T> {
    fn tag(self, module: &'static str) -> Result<T, Failure> {
        self.map_err(|error| Failure { module, error })
    }
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
        .tag("input")?;
    serde_json::from_str(&text)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
        .tag("input")
}

/// Accepts `{"probs": [...]}` or a bare array.
fn read_distribution(path: &Path) -> Result<Distribution, Failure> {
    let v: Value = read_json(path)?;
    let v = if v.is_array() { json!({ "probs": v }) } else { v };
    serde_json::from_value(v)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
        .tag("input")
}

/// Accepts `{"rows": [[...], ...]}` or a bare nested array.
fn read_channel(path: &Path) -> Result<Channel, Failure> {
    let v: Value = read_json(path)?;
    let v = if v.is_array() { json!({ "rows": v }) } else { v };
    serde_json::from_value(v)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
        .tag("input")
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}

fn finite_alpha(a: f64) -> Result<renyi_lab::Alpha, Failure> {
    renyi_lab::Alpha::new(a).tag("input")
}

fn measure(dist: &Path, dist2: Option<&Path>, alpha: Order) -> Result<Value, Failure> {
    let p = read_distribution(dist)?;
    let mut out = json!({
        "alpha": to_value(&alpha),
        "H_alpha": renyi_entropy(&p, alpha),
        "H": entropy(&p),
    });
    if let Some(path) = dist2 {
        let q = read_distribution(path)?;
        out["D_alpha"] = to_value(&renyi_divergence(&p, &q, alpha).tag("renyi")?);
        out["D"] = to_value(&kl_divergence(&p, &q).tag("shannon")?);
    }
    Ok(out)
}

fn solver(tol: f64, seed: u64) -> SolverConfig {
    SolverConfig::with_tol(tol).seed(seed)
}

fn run(cli: &Cli) -> Result<Value, Failure> {
    if !(cli.tol > 0.0 && cli.tol.is_finite()) {
        return Err(Failure {
            module: "input",
            error: Error::InvalidParameter(format!("tol must be positive, got {}", cli.tol)),
        });
    }
    match &cli.command {
        Command::Measure { dist, dist2, alpha } => measure(dist, dist2.as_deref(), *alpha),
        Command::Variational {
            dist,
            dist2,
            channel,
            alpha,
            beta,
            seed,
        } => {
            let cfg = solver(cli.tol, *seed);
            let p = read_distribution(dist)?;
            if let Some(path) = channel {
                let w = read_channel(path)?;
                let a = finite_alpha(*alpha)?;
                return Ok(json!({
                    "alpha": alpha,
                    "i_alpha": to_value(&variational_i_alpha(&p, &w, a, &cfg).tag("variational")?),
                    "k_alpha": to_value(&variational_k_alpha(&p, &w, a, &cfg).tag("variational")?),
                }));
            }
            if let Some(path) = dist2 {
                let q = read_distribution(path)?;
                if let Some(beta) = beta {
                    let r = j_variational(&p, &q, *alpha, *beta, &cfg).tag("variational")?;
                    return Ok(json!({"alpha": alpha, "beta": beta, "j": to_value(&r)}));
                }
                let a = finite_alpha(*alpha)?;
                let r = variational_divergence(&p, &q, a, &cfg).tag("variational")?;
                return Ok(json!({"alpha": alpha, "divergence": to_value(&r)}));
            }
            let a = finite_alpha(*alpha)?;
            let r = variational_entropy(&p, a, &cfg).tag("variational")?;
            Ok(json!({"alpha": alpha, "entropy": to_value(&r)}))
        }
        Command::Channel {
            channel,
            dist,
            alpha,
            seed,
        } => {
            let cfg = solver(cli.tol, *seed);
            let w = read_channel(channel)?;
            let mut out = json!({
                "alpha": to_value(alpha),
                "capacity": to_value(&c_alpha(&w, *alpha, &cfg).tag("renyi")?),
            });
            if let Some(path) = dist {
                let p = read_distribution(path)?;
                out["I_alpha"] = to_value(&i_alpha(&p, &w, *alpha, &cfg).tag("renyi")?);
                out["K_alpha"] = to_value(&k_alpha(&p, &w, *alpha, &cfg).tag("renyi")?);
            }
            Ok(out)
        }
        Command::Types {
            n,
            alphabet,
            dist,
            delta,
        } => {
            let p = dist.as_deref().map(read_distribution).transpose()?;
            Ok(to_value(
                &type_report(*n, *alphabet, p.as_ref(), *delta).tag("method_of_types")?,
            ))
        }
        Command::Codelength { dist, lambda, max_len } => {
            let p = read_distribution(dist)?;
            Ok(to_value(&codelength_report(&p, *lambda, *max_len).tag("codelength")?))
        }
        Command::Hyptest {
            scenario,
            rule,
            method,
            trials,
            seed,
            n_list,
            alpha_grid: points,
        } => {
            let s: Scenario = read_json(scenario)?;
            let rule = match rule {
                RuleArg::Modified => DecisionRule::modified(),
                RuleArg::Union => DecisionRule::union(),
                RuleArg::SingleSensor => DecisionRule::single_sensor(),
                RuleArg::DisjointSupport => DecisionRule::disjoint_support(),
            };
            let errors = match method {
                MethodArg::Exact => exact_errors(&s, rule),
                MethodArg::MonteCarlo => monte_carlo_errors(&s, rule, *trials, *seed),
            }
            .tag("hyptest")?;
            let mut out = json!({
                "scenario": to_value(&s),
                "rule": to_value(&rule),
                "errors": to_value(&errors),
                "achievable": to_value(&achievable_exponent(&s)),
            });
            // the bound and the α-curve need a second sensor
            if s.realized_lambda() > 0.0 {
                out["renyi_lower_bound"] = to_value(&renyi_lower_bound(&s).tag("hyptest")?);
                out["equality"] = to_value(&equality_condition(&s, 1e-9).tag("hyptest")?);
                let grid = alpha_grid(&s, *points);
                out["exponent_alpha_curve"] = to_value(&exponent_alpha_curve(&s, &grid).tag("hyptest")?);
            }
            if !n_list.is_empty() {
                out["trend"] = to_value(&exponent_trend(&s, rule, n_list).tag("hyptest")?);
            }
            Ok(out)
        }
        Command::Verify {
            seed,
            instances,
            filter,
        } => {
            let cfg = VerifyConfig {
                seed: *seed,
                instances: *instances,
                tol: cli.tol,
            };
            Ok(to_value(&run_verify_filtered(&cfg, filter).tag("verify")?))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(v) => {
            let is_verify = matches!(cli.command, Command::Verify { .. });
            let text = match cli.format {
                Format::Json => output::render_json(&v),
                Format::Text if is_verify => output::render_verify_table(&v),
                Format::Text => output::render_text(&v),
            };
            print!("{text}");
            if is_verify && v["passed"].as_bool() != Some(true) {
                return ExitCode::from(1);
            }
            ExitCode::SUCCESS
        }
        Err(Failure { module, error }) => {
            eprintln!("renyi-lab: {module}: {error}");
            ExitCode::from(if error.is_non_convergence() { 3 } else { 2 })
        }
    }
}
