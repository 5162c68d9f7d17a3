//! Command-line configuration. Unknown flags are rejected by clap; ranges
//! are checked by [`RunConfig::validate`] before any engine runs.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use hnf::arithmetic::{LatticeNorm, SequenceSpec};
use hnf::convergence::StartMode;

#[derive(Parser, Debug, Clone)]
#[command(name = "hnf", version, about = "Hamiltonian normal forms, small denominators and invariant tori")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
    /// Write report.json and CSV files into this directory instead of printing the report.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Write the small-denominator ledger to this JSON file.
    #[arg(long, global = true)]
    pub ledger: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Bits of precision for high-precision evaluation (default depends on the command).
    #[arg(long, global = true)]
    pub precision: Option<usize>,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Birkhoff normal form by both removal strategies.
    Bnf(ProblemArgs),
    /// Normal form iteration with the per-step structure checks.
    Hnf(IterArgs),
    /// Frequency map from the iteration, compared with the Birkhoff data.
    Freq(IterArgs),
    /// Diophantine sequences and the Z_n classes.
    #[command(subcommand)]
    Arith(ArithCommand),
    /// Majorant recursion for the convergence estimates.
    Majorant(MajorantArgs),
    /// Sampled and exact checks of the auxiliary estimates.
    Lemmas(LemmaArgs),
    /// Invariant torus defects for an elliptic problem.
    Torus(TorusArgs),
}

#[derive(Args, Debug, Clone)]
pub struct ProblemArgs {
    /// Problem file (see inputs/ for examples).
    pub input: PathBuf,
    /// Truncation weight W; defaults to the degree of H, raised to 2^(steps−1)+2 for hnf and freq.
    #[arg(long)]
    pub cutoff: Option<u32>,
}

#[derive(Args, Debug, Clone)]
pub struct IterArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[arg(long, default_value_t = 3)]
    pub steps: usize,
}

#[derive(Subcommand, Debug, Clone)]
pub enum ArithCommand {
    /// σ(β)_k by exhaustive lattice enumeration.
    Sigma {
        #[arg(long, value_delimiter = ',', default_value = "1,1.618033988749895")]
        beta: Vec<f64>,
        #[arg(long, default_value_t = 8)]
        kmax: u32,
        #[arg(long, default_value = "linf")]
        norm: LatticeNorm,
    },
    /// Partial Bruno sums of a sequence.
    Bruno {
        #[arg(long, default_value = "geometric(0.5)")]
        seq: SequenceSpec,
        #[arg(long, default_value_t = 60)]
        terms: usize,
    },
    /// Shrink and nesting checks for the sets Z_n.
    Zn {
        #[arg(long, value_delimiter = ',', default_value = "1,1.618033988749895")]
        alpha: Vec<f64>,
        #[arg(long, default_value = "geometric(0.25)")]
        a: SequenceSpec,
        #[arg(long, default_value = "doubleexp(1.5)")]
        rho: SequenceSpec,
        #[arg(long, default_value_t = 0.1)]
        s0: f64,
        /// Highest level n checked.
        #[arg(long, default_value_t = 6)]
        kmax: usize,
        #[arg(long, default_value_t = 1000)]
        pairs: usize,
    },
    /// Absorption of a bound class into a target sequence.
    Absorb {
        /// Bound class constants `c,k,l,m`.
        #[arg(long, value_delimiter = ',', default_value = "1,1,1,1")]
        class: Vec<f64>,
        #[arg(long, default_value = "geometric(0.5)")]
        a: SequenceSpec,
        #[arg(long, default_value = "doubleexp(1.5)")]
        b: SequenceSpec,
        #[arg(long, default_value_t = 0.5)]
        s0: f64,
        #[arg(long, default_value_t = 30)]
        n: usize,
    },
    /// Monte Carlo density of the truncated class near β.
    Density {
        #[arg(long, value_delimiter = ',', default_value = "1,1.618033988749895")]
        beta: Vec<f64>,
        #[arg(long, default_value = "geometric(0.1)")]
        a: SequenceSpec,
        #[arg(long, default_value_t = 0.01)]
        epsilon: f64,
        #[arg(long, default_value_t = 4)]
        kmax: u32,
        #[arg(long, default_value_t = 4000)]
        samples: usize,
        #[arg(long, default_value = "linf")]
        norm: LatticeNorm,
    },
}

#[derive(Args, Debug, Clone)]
pub struct MajorantArgs {
    #[arg(long, default_value_t = 1.0)]
    pub r: f64,
    #[arg(long, default_value_t = 1.75)]
    pub kappa: f64,
    /// `threshold`, `scaled:<f>` or `value:<x>`.
    #[arg(long, default_value = "threshold", value_parser = parse_start)]
    pub start: StartMode,
    #[arg(long, default_value_t = 40)]
    pub n: usize,
}

#[derive(Args, Debug, Clone)]
pub struct LemmaArgs {
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    /// Random instances per sampled estimate.
    #[arg(long, default_value_t = 10)]
    pub instances: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IntegratorKind {
    Rk8,
    Leapfrog,
}

#[derive(Args, Debug, Clone)]
pub struct TorusArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[arg(long, default_value_t = 3)]
    pub steps: usize,
    /// Amplitudes ρ; the torus sits at τ_i = w_i ρ²/2.
    #[arg(long, value_delimiter = ',', default_value = "0.1,0.05,0.025")]
    pub rho: Vec<f64>,
    /// Per-mode weights w_i (default all 1).
    #[arg(long, value_delimiter = ',')]
    pub weights: Option<Vec<f64>>,
    #[arg(long, default_value_t = 100.0)]
    pub t_span: f64,
    #[arg(long, default_value_t = 0.05)]
    pub sample_dt: f64,
    #[arg(long, default_value_t = 8)]
    pub trajectories: usize,
    #[arg(long, value_enum, default_value_t = IntegratorKind::Rk8)]
    pub integrator: IntegratorKind,
    #[arg(long, default_value_t = 1e-14)]
    pub rtol: f64,
    #[arg(long, default_value_t = 1e-17)]
    pub atol: f64,
    /// Fixed step for the leapfrog integrator.
    #[arg(long, default_value_t = 1e-2)]
    pub dt: f64,
    /// Write the first trajectory at each ρ as CSV (needs --out).
    #[arg(long)]
    pub dump: bool,
}

fn parse_start(s: &str) -> Result<StartMode, String> {
    let num = |v: &str| v.parse::<f64>().map_err(|e| format!("{v:?}: {e}"));
    match s.split_once(':') {
        None if s == "threshold" => Ok(StartMode::Threshold),
        Some(("scaled", v)) => Ok(StartMode::Scaled(num(v)?)),
        Some(("value", v)) => Ok(StartMode::Value(num(v)?)),
        _ => Err(format!("expected threshold, scaled:<f> or value:<x>, got {s:?}")),
    }
}

fn positive(name: &str, x: f64) -> Result<(), String> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(format!("--{name} must be positive, got {x}"))
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), String> {
        if let Some(bits) = self.precision {
            if !(53..=4096).contains(&bits) {
                return Err(format!("--precision must lie in 53..=4096, got {bits}"));
            }
        }
        match &self.command {
            Command::Bnf(p) => check_cutoff(p),
            Command::Hnf(a) | Command::Freq(a) => {
                check_cutoff(&a.problem)?;
                if a.steps == 0 || a.steps > 6 {
                    return Err(format!("--steps must lie in 1..=6, got {}", a.steps));
                }
                Ok(())
            }
            Command::Arith(c) => match c {
                ArithCommand::Sigma { beta, .. } if beta.iter().any(|b| !b.is_finite()) => {
                    Err("--beta entries must be finite".into())
                }
                ArithCommand::Zn { s0, pairs, alpha, .. } => {
                    positive("s0", *s0)?;
                    if *pairs == 0 || alpha.is_empty() {
                        return Err("--pairs and --alpha must be nonempty".into());
                    }
                    Ok(())
                }
                ArithCommand::Absorb { class, s0, .. } => {
                    positive("s0", *s0)?;
                    if class.len() != 4 {
                        return Err(format!("--class needs four constants c,k,l,m, got {}", class.len()));
                    }
                    Ok(())
                }
                ArithCommand::Density { epsilon, .. } => positive("epsilon", *epsilon),
                _ => Ok(()),
            },
            Command::Majorant(_) => Ok(()),
            Command::Lemmas(a) => {
                if a.samples == 0 || a.instances == 0 {
                    return Err("--samples and --instances must be positive".into());
                }
                Ok(())
            }
            Command::Torus(a) => {
                check_cutoff(&a.problem)?;
                for r in &a.rho {
                    positive("rho", *r)?;
                }
                for w in a.weights.iter().flatten() {
                    positive("weights", *w)?;
                }
                positive("t-span", a.t_span)?;
                positive("sample-dt", a.sample_dt)?;
                positive("rtol", a.rtol)?;
                positive("atol", a.atol)?;
                positive("dt", a.dt)?;
                if a.trajectories == 0 || a.steps == 0 {
                    return Err("--trajectories and --steps must be positive".into());
                }
                if a.dump && self.out.is_none() {
                    return Err("--dump needs --out".into());
                }
                Ok(())
            }
        }
    }
}

fn check_cutoff(p: &ProblemArgs) -> Result<(), String> {
    match p.cutoff {
        Some(w) if !(2..=24).contains(&w) => Err(format!("--cutoff must lie in 2..=24, got {w}")),
        _ => Ok(()),
    }
}
