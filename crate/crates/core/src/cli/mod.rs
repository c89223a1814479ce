//! Command-line front end.
//!
//! Every command writes to `--out` (or stdout) and returns a process exit
//! code: 0 on success, 2 for input, parse and domain errors, 3 for
//! numerical precondition failures and 4 for internal failures.

mod commands;

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::panic;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::lagrangians::{builtin, Kind, LagrangianModel};

pub use commands::{cmd_ce_check, cmd_fresnel, cmd_gravity, cmd_rays, cmd_shock};

#[derive(Debug, Parser)]
#[command(
    name = "cewave",
    version,
    about = "Characteristic cones, exceptionality checks, shocks and gravitational null cones",
    after_help = "Lagrangian expressions use the invariants a (alpha), b (beta), z and the flag y, \
numbers, + - * / ^ (integer or half-integer exponents), unary minus, parentheses and sqrt(...). \
Examples: \"1 - sqrt(1 + a - b^2)\", \"-a/2 + 0.1*a^2\", \"1 - sqrt(1 + 2*z)\"."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Seed for every random draw.
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,

    /// Output file (or directory for `shock`); stdout when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Output format.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exceptionality checks.
    #[command(subcommand)]
    Ce(CeCommand),
    /// Fresnel quartic roots over random electromagnetic backgrounds.
    Fresnel(FresnelArgs),
    /// Characteristic fans and shock times in one space dimension.
    Shock(ShockArgs),
    /// Kernel dimensions of gravitational discontinuity operators.
    Gravity(GravityArgs),
    /// Hamiltonian ray tracing on a constant background.
    Rays(RaysArgs),
}

#[derive(Debug, Subcommand)]
pub enum CeCommand {
    /// Classify a Lagrangian on a grid of invariants.
    Check(CeArgs),
}

/// Model selection shared by every command.
#[derive(Debug, Clone, Default, Args)]
pub struct ModelArgs {
    /// Built-in model: maxwell, born-infeld, scalar-maxwell, scalar-bi,
    /// sqrt-family, alpha-over-beta, perturbed-maxwell.
    #[arg(long, conflicts_with = "expr")]
    pub builtin: Option<String>,

    /// Comma-separated parameters of the built-in model.
    #[arg(long, requires = "builtin")]
    pub params: Option<String>,

    /// Lagrangian expression.
    #[arg(long, allow_hyphen_values = true)]
    pub expr: Option<String>,

    /// Invariants the model depends on: scalar, alpha, alpha-beta, alpha-beta-z.
    #[arg(long)]
    pub kind: Option<String>,
}

#[derive(Debug, Args)]
pub struct CeArgs {
    #[command(flatten)]
    pub model: ModelArgs,

    /// Grid, e.g. "a:-0.5:2:21,b:-1:1:21".
    #[arg(long)]
    pub grid: Option<String>,

    /// Residual tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Debug, Args)]
pub struct FresnelArgs {
    #[command(flatten)]
    pub model: ModelArgs,

    /// Number of random (background, direction) samples after the vacuum row.
    #[arg(long, default_value_t = 50)]
    pub samples: usize,

    /// Field components are drawn uniformly from [-range, range].
    #[arg(long, default_value_t = 0.4)]
    pub range: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProfileKind {
    /// `sin x` on a periodic [0, 2π].
    Sin,
    /// `tanh x` on [-5, 5]; nondecreasing, so no crossing.
    Tanh,
}

#[derive(Debug, Args)]
pub struct ShockArgs {
    /// Scalar model whose simple wave is compared with Burgers; Burgers
    /// alone when omitted.
    #[command(flatten)]
    pub model: ModelArgs,

    #[arg(long, value_enum, default_value_t = ProfileKind::Sin)]
    pub profile: ProfileKind,

    /// Horizon for crossing detection.
    #[arg(long, default_value_t = 10.0)]
    pub t_max: f64,

    /// Comma-separated snapshot times.
    #[arg(long, default_value = "0.5,1,1.5")]
    pub times: String,

    /// Number of characteristics.
    #[arg(long, default_value_t = 400)]
    pub n: usize,

    /// Fixed time derivative A of the scalar simple-wave state (A, φ).
    #[arg(long, default_value_t = 0.3)]
    pub a0: f64,

    /// Range "lo,hi" of the simple-wave parameter φ.
    #[arg(long, default_value = "0.1,0.6")]
    pub phi_range: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TheoryKind {
    Einstein,
    Quadratic,
    Fr,
}

#[derive(Debug, Args)]
pub struct GravityArgs {
    #[arg(long, value_enum, default_value_t = TheoryKind::Einstein)]
    pub theory: TheoryKind,

    /// Coefficient of R_{μν}R^{μν} (quadratic theory).
    #[arg(long, default_value_t = 1.0)]
    pub p: f64,

    /// Coefficient of −R² (quadratic theory).
    #[arg(long, default_value_t = 0.0)]
    pub q: f64,

    /// f″ at the background (f(R) theory).
    #[arg(long, default_value_t = 1.0)]
    pub fpp: f64,

    /// Spacetime dimension.
    #[arg(long = "D", default_value_t = 4)]
    pub d: usize,

    /// Random null and non-null normals each.
    #[arg(long, default_value_t = 200)]
    pub trials: usize,
}

#[derive(Debug, Args)]
pub struct RaysArgs {
    #[command(flatten)]
    pub model: ModelArgs,

    /// Electric field "x,y,z" (electrodynamics models).
    #[arg(long, default_value = "0,0,0")]
    pub e: String,

    /// Magnetic field "x,y,z" (electrodynamics models).
    #[arg(long, default_value = "0,0,0")]
    pub b: String,

    /// Scalar gradient "A,B,C,D" (scalar models).
    #[arg(long, default_value = "0,0,0,0")]
    pub sigma: String,

    /// Spatial direction of the initial covector.
    #[arg(long, default_value = "1,0,0")]
    pub n: String,

    /// Initial p0; defaults to the cone root selected by `--root`.
    #[arg(long, allow_hyphen_values = true)]
    pub p0: Option<f64>,

    /// Index of the cone root (sorted ascending) used when `--p0` is absent.
    #[arg(long, default_value_t = 0)]
    pub root: usize,

    #[arg(long, default_value_t = 10.0)]
    pub s_max: f64,

    #[arg(long, default_value_t = 1e-2)]
    pub step: f64,
}

/// Parses arguments and runs the command, returning the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match panic::catch_unwind(|| dispatch(&cli)) {
        Ok(Ok(())) => 0,
        Ok(Err(e)) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
        Err(_) => {
            eprintln!("error: internal failure");
            4
        }
    }
}

fn dispatch(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Ce(CeCommand::Check(a)) => cmd_ce_check(cli, a),
        Command::Fresnel(a) => cmd_fresnel(cli, a),
        Command::Shock(a) => cmd_shock(cli, a),
        Command::Gravity(a) => cmd_gravity(cli, a),
        Command::Rays(a) => cmd_rays(cli, a),
    }
}

impl ModelArgs {
    /// Builds the selected model; `default_kind` applies to expressions
    /// given without `--kind`.
    pub fn build(&self, default_kind: Option<Kind>) -> Result<LagrangianModel> {
        let kind = self.kind.as_deref().map(str::parse::<Kind>).transpose()?;
        match (&self.builtin, &self.expr) {
            (Some(name), None) => {
                let params = match &self.params {
                    Some(p) => parse_list(p)?,
                    None => vec![],
                };
                let m = builtin(name, &params)?;
                match kind {
                    Some(k) if k != m.kind() => m.rebind(k),
                    _ => Ok(m),
                }
            }
            (None, Some(text)) => {
                let kind = kind
                    .or(default_kind)
                    .ok_or_else(|| Error::Usage("--expr needs --kind".into()))?;
                LagrangianModel::parse(text, kind)
            }
            (Some(_), Some(_)) => Err(Error::Usage("give either --builtin or --expr, not both".into())),
            (None, None) => Err(Error::Usage("a model is required (--builtin or --expr)".into())),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.builtin.is_none() && self.expr.is_none()
    }
}

/// Comma-separated finite numbers.
pub fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| match t.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(Error::Usage(format!("`{t}` is not a finite number"))),
        })
        .collect()
}

fn parse_fixed<const N: usize>(s: &str, what: &str) -> Result<[f64; N]> {
    let v = parse_list(s)?;
    v.try_into()
        .map_err(|_| Error::Usage(format!("{what} needs {N} comma-separated components")))
}

fn write_output(out: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(p) => fs::write(p, bytes)?,
        None => {
            let mut so = io::stdout().lock();
            so.write_all(bytes)?;
            so.flush()?;
        }
    }
    Ok(())
}

fn to_json<T: serde::Serialize>(v: &T) -> Result<Vec<u8>> {
    let mut s = serde_json::to_vec_pretty(v)?;
    s.push(b'\n');
    Ok(s)
}
