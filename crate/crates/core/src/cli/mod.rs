//! Command-line front end.
//!
//! Results go to standard output as JSON (default) or CSV (`--format csv`).
//! Exit codes: 0 success, 1 numerical failure, 2 usage error.

mod io;

use std::ffi::OsString;
use std::fs::File;
use std::io::Write;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::channels::choi;
use crate::cost::{self, ChannelFamily, ConverseParams};
use crate::entanglement::{self, SearchOptions};
use crate::entropy::{self, ClassicalJoint};
use crate::error::Error;

use io::{cell, curve_csv, curve_json, decomposition_json, num, plain_csv, state_json};
pub use io::{parse_channel, parse_state};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numeric(Error),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numeric(_) | CliError::Io(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Numeric(e) => write!(f, "numerical failure: {e}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::NotHermitian(_)
            | Error::NotPsd(_)
            | Error::InvalidTrace(_)
            | Error::NotNormalized(_)
            | Error::NonFinite
            | Error::NotTracePreserving(_)
            | Error::InvariantViolated(_) => CliError::Numeric(e),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "entcost", version, about = "Entanglement cost calculators for small quantum channels and states")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug)]
struct SearchArgs {
    /// Number of decomposition search restarts
    #[arg(long, default_value_t = 20)]
    restarts: usize,
    /// Seed for all randomness
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Decomposition size [default: min(rank², 2·rank)]
    #[arg(long)]
    max_items: Option<usize>,
    /// Convergence tolerance of the search
    #[arg(long, default_value_t = 1e-7)]
    tol: f64,
}

impl SearchArgs {
    fn options(&self) -> SearchOptions {
        SearchOptions {
            max_items: self.max_items,
            restarts: self.restarts,
            seed: self.seed,
            tol: self.tol,
            ..Default::default()
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Choi state (E ⊗ I)(φ) of a channel
    Choi {
        /// Channel JSON, e.g. '{"type":"dephasing","p":0.25}', or @file
        #[arg(long)]
        channel: String,
    },
    /// Wootters concurrence of a two-qubit state
    Concurrence {
        /// State JSON {"dims","re","im"}, or @file
        #[arg(long)]
        state: String,
    },
    /// Entanglement of formation by decomposition search (closed form included for two qubits)
    Eof {
        /// State JSON {"dims","re","im"}, or @file
        #[arg(long)]
        state: String,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Single-letter upper bound E_C¹ on the entanglement cost of a channel
    Ec1 {
        /// Channel JSON, or @file
        #[arg(long)]
        channel: String,
        /// Random pure inputs tried for channels beyond qubits
        #[arg(long, default_value_t = 8)]
        restarts: usize,
        /// Seed for all randomness
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Noisy-storage security boundary ν_max = 1/(2·E_C¹) over a channel family
    SecurityRegion {
        /// depolarizing, dephasing or amplitude_damping
        #[arg(long)]
        family: String,
        /// Number of uniform grid points on [0, 1]
        #[arg(long, default_value_t = 101)]
        points: usize,
        /// Output format
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Strong-converse error lower bounds at rate E_C¹ + δ₂
    StrongConverse {
        /// Qubit channel JSON whose E_C¹ stands in for E_C
        #[arg(long, conflicts_with = "ec", required_unless_present = "ec")]
        channel: Option<String>,
        /// Explicit entanglement cost value instead of --channel
        #[arg(long)]
        ec: Option<f64>,
        /// Simulation slack δ₁
        #[arg(long)]
        delta1: f64,
        /// Rate excess δ₂ (> δ₁)
        #[arg(long)]
        delta2: f64,
        /// Blocklengths, comma separated
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<u64>,
        /// Input dimension (with --ec)
        #[arg(long = "dimA", default_value_t = 2)]
        dim_a: usize,
        /// Output dimension (with --ec)
        #[arg(long = "dimB", default_value_t = 2)]
        dim_b: usize,
        /// Output format
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Dephasing channel: 1−h(p) ≤ E_C¹ ≤ 1−½h(p/2) on p ∈ [0, 0.5]
    DephasingCurves {
        /// Number of uniform grid points on [0, 0.5]
        #[arg(long, default_value_t = 101)]
        points: usize,
        /// Output format
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Von Neumann and log-rank entropies of a state
    Entropy {
        /// State JSON {"dims","re","im"}, or @file
        #[arg(long)]
        state: String,
    },
    /// Smooth conditional max-entropy of a classical table
    SmoothH0 {
        /// CSV file with header x,y,p
        #[arg(long)]
        table: String,
        /// Smoothing parameter in [0, 1]
        #[arg(long)]
        eps: f64,
        /// Also check the asymptotic equipartition bound at this blocklength
        #[arg(long)]
        aep: Option<usize>,
    },
    /// Bounds on the one-shot entanglement cost of a state
    OneShotCost {
        /// State JSON {"dims","re","im"}, or @file
        #[arg(long)]
        state: String,
        /// Error parameter in [0, 1]
        #[arg(long)]
        eps: f64,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Overhead constants of the dilution and simulation proofs
    Constants(ConstantsArgs),
}

#[derive(Args, Debug)]
#[command(group(clap::ArgGroup::new("which").required(true).args(["postselection", "definetti", "epsnet", "simulation_error"])))]
struct ConstantsArgs {
    /// Post-selection factor (n+1)^{|A|²−1}
    #[arg(long)]
    postselection: bool,
    /// de Finetti decomposition count (n+1)^{2|A||R|−2}
    #[arg(long)]
    definetti: bool,
    /// ε-net size (2√|B|/ε + 1)^{2χ|A||B|}
    #[arg(long)]
    epsnet: bool,
    /// Channel-simulation error α_n
    #[arg(long)]
    simulation_error: bool,
    /// Blocklength
    #[arg(long, default_value_t = 1)]
    n: u64,
    /// Dimension of A
    #[arg(long = "dimA", default_value_t = 2)]
    dim_a: usize,
    /// Dimension of B
    #[arg(long = "dimB", default_value_t = 2)]
    dim_b: usize,
    /// Dimension of R
    #[arg(long = "dimR", default_value_t = 2)]
    dim_r: usize,
    /// Net multiplicity χ
    #[arg(long, default_value_t = 1)]
    chi: usize,
    /// Net accuracy ε in (0, 1]
    #[arg(long, default_value_t = 1.0)]
    eps: f64,
    /// Simulation slack δ₁
    #[arg(long, default_value_t = 0.5)]
    delta1: f64,
    /// With --simulation-error: also report the least n with α_n below this
    #[arg(long)]
    target: Option<f64>,
}

/// Runs the command line `args` (program name first), writing results to `out`
/// and diagnostics to `err`. Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            let sink: &mut dyn Write = if code == 0 { out } else { err };
            let _ = sink.write_all(text.as_bytes());
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(text) => match out.write_all(text.as_bytes()) {
            Ok(()) => 0,
            Err(e) => {
                let _ = writeln!(err, "i/o error: {e}");
                1
            }
        },
        Err(e) => {
            let _ = writeln!(err, "{e}");
            e.exit_code()
        }
    }
}

fn json_text(v: Value) -> String {
    format!("{v}\n")
}

fn dispatch(cmd: Command) -> Result<String, CliError> {
    match cmd {
        Command::Choi { channel } => {
            let ch = parse_channel(&channel)?;
            Ok(json_text(state_json(choi(&ch).state())))
        }
        Command::Concurrence { state } => {
            let rho = parse_state(&state)?;
            Ok(json_text(json!({ "concurrence": num(entanglement::concurrence_2q(&rho)?) })))
        }
        Command::Eof { state, search } => {
            let rho = parse_state(&state)?;
            let r = entanglement::eof_numeric(&rho, &search.options())?;
            let mut out = json!({
                "value": num(r.value),
                "restarts_used": r.restarts_used,
                "converged": r.converged,
                "decomposition": decomposition_json(r.value, &r.decomposition),
            });
            if rho.dims() == [2, 2] {
                out["closed_form"] = num(entanglement::eof_2q(&rho)?);
            }
            Ok(json_text(out))
        }
        Command::Ec1 { channel, restarts, seed } => {
            let ch = parse_channel(&channel)?;
            let e = cost::ec1_general(&ch, restarts, seed)?;
            Ok(json_text(json!({ "ec1": num(e.value), "certified": e.certified })))
        }
        Command::SecurityRegion { family, points, format } => {
            let family: ChannelFamily = family.parse()?;
            let rows = cost::security_region(family, &cost::uniform_grid(0.0, 1.0, points))?;
            match format {
                Format::Csv => curve_csv(family.param_name(), &rows),
                Format::Json => Ok(json_text(curve_json(family.param_name(), &rows))),
            }
        }
        Command::StrongConverse { channel, ec, delta1, delta2, n, dim_a, dim_b, format } => {
            let (ec, dim_in, dim_out) = match (channel, ec) {
                (Some(text), _) => {
                    let ch = parse_channel(&text)?;
                    (cost::ec1_qubit(&ch)?, ch.dim_in(), ch.dim_out())
                }
                (None, Some(ec)) => (ec, dim_a, dim_b),
                (None, None) => return Err(CliError::Usage("need --channel or --ec".into())),
            };
            let mut rows = Vec::with_capacity(n.len());
            for &blocklength in &n {
                let p = ConverseParams { delta1, delta2, dim_in, dim_out, n: blocklength };
                let raw = cost::strong_converse_error_bound(&p, ec)?;
                rows.push((blocklength, raw));
            }
            let label = "bound at rate ≥ E_C¹+δ₂ ≥ E_C+δ₂";
            match format {
                Format::Csv => plain_csv(
                    &["n", "error_bound", "raw"],
                    &rows
                        .iter()
                        .map(|&(n, raw)| vec![n.to_string(), cell(raw.max(0.0)), cell(raw)])
                        .collect::<Vec<_>>(),
                ),
                Format::Json => Ok(json_text(json!({
                    "label": label,
                    "ec1": num(ec),
                    "rate": num(ec + delta2),
                    "delta1": num(delta1),
                    "delta2": num(delta2),
                    "rows": rows.iter().map(|&(n, raw)| json!({
                        "n": n,
                        "error_bound": num(raw.max(0.0)),
                        "raw": num(raw),
                    })).collect::<Vec<_>>(),
                }))),
            }
        }
        Command::DephasingCurves { points, format } => {
            let (lo, hi) = cost::DEPHASING_CURVE_RANGE;
            let rows = cost::dephasing_curves(&cost::uniform_grid(lo, hi, points))?;
            match format {
                Format::Csv => curve_csv("p", &rows),
                Format::Json => Ok(json_text(curve_json("p", &rows))),
            }
        }
        Command::Entropy { state } => {
            let rho = parse_state(&state)?;
            let mut out = json!({
                "von_neumann": num(entropy::von_neumann(&rho)),
                "h0": num(entropy::h0(&rho)),
            });
            if rho.dims().len() == 2 {
                out["cond_von_neumann"] = num(entropy::cond_von_neumann(&rho)?);
            }
            Ok(json_text(out))
        }
        Command::SmoothH0 { table, eps, aep } => {
            let file = File::open(&table).map_err(|e| CliError::Usage(format!("cannot open {table}: {e}")))?;
            let p = ClassicalJoint::from_csv(file)?;
            let mut out = json!({
                "eps": num(eps),
                "h0": num(entropy::classical_h0_cond(&p)),
                "smooth_h0": num(entropy::classical_smooth_h0_cond(&p, eps)?),
                "cond_entropy": num(p.cond_entropy()),
            });
            if let Some(n) = aep {
                let check = entropy::aep_check(&p, eps, n)?;
                out["aep"] = json!({ "n": n, "lhs": num(check.lhs), "rhs": num(check.rhs), "holds": check.holds });
            }
            Ok(json_text(out))
        }
        Command::OneShotCost { state, eps, search } => {
            let rho = parse_state(&state)?;
            let b = entanglement::one_shot_cost_bounds(&rho, eps, &search.options())?;
            Ok(json_text(json!({
                "eps": num(eps),
                "lower": num(b.lower),
                "lower_heuristic": !b.lower_certified,
                "upper": num(b.upper),
                "witness": decomposition_json(b.upper, &b.witness),
            })))
        }
        Command::Constants(c) => constants(c),
    }
}

fn constants(c: ConstantsArgs) -> Result<String, CliError> {
    let out = if c.postselection {
        json!({ "log2_factor": num(cost::postselection_factor(c.n, c.dim_a)?.log2()) })
    } else if c.definetti {
        json!({ "log2_count": num(cost::definetti_count(c.n, c.dim_a, c.dim_r)?.log2()) })
    } else if c.epsnet {
        json!({ "log2_size": num(cost::epsnet_size(c.chi, c.eps, c.dim_a, c.dim_b)?.log2()) })
    } else {
        let mut v = json!({ "alpha": num(cost::simulation_error(c.n, c.delta1, c.dim_a, c.dim_b)?) });
        if let Some(target) = c.target {
            let least = cost::simulation_blocklength(target, c.delta1, c.dim_a, c.dim_b, 1 << 32)?;
            v["least_n"] = least.map_or(Value::Null, Value::from);
        }
        v
    };
    Ok(json_text(out))
}
