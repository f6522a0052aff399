//! Flag parsing and configuration resolution: flags override the `--config`
//! JSON file, which overrides built-in defaults.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use fraclab_core::regularity::{Mask, DEFAULT_TOL_BETA, DEFAULT_TOL_THETA};
use fraclab_core::BcKind;
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const CACHE_ENV: &str = "FRACLAB_CACHE";
pub const MIN_N: usize = 64;
pub const MAX_N: usize = 8192;
pub const DEFAULT_N: usize = 1024;
pub const DEFAULT_QUAD_Q: usize = 200;
pub const DEFAULT_SEED: u64 = 20240601;

#[derive(Debug, Parser)]
#[command(name = "fraclab", version, about = "Fractional powers of elliptic operators on an interval")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    Power,
    Compat,
    Boundary,
    Compare,
    Selftest,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Apply the inverse fractional power by eigen-expansion and by quadrature, and compare
    Power(Flags),
    /// Measure eigencoefficient decay of the solution against the compatibility prediction
    Compat(Flags),
    /// Fit the power-law exponent of the solution at the left endpoint
    Boundary(Flags),
    /// Compare first eigenvalues of the spectral and restricted realizations
    Compare(Flags),
    /// Run the invariant suites of every module
    Selftest(Flags),
}

impl Command {
    pub fn split(self) -> (CommandKind, Flags) {
        match self {
            Command::Power(f) => (CommandKind::Power, f),
            Command::Compat(f) => (CommandKind::Compat, f),
            Command::Boundary(f) => (CommandKind::Boundary, f),
            Command::Compare(f) => (CommandKind::Compare, f),
            Command::Selftest(f) => (CommandKind::Selftest, f),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum BcArg {
    Dirichlet,
    Neumann,
}

impl From<BcArg> for BcKind {
    fn from(b: BcArg) -> Self {
        match b {
            BcArg::Dirichlet => BcKind::Dirichlet,
            BcArg::Neumann => BcKind::Neumann,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum MaskArg {
    All,
    Odd,
    Even,
    Nonzero,
}

impl From<MaskArg> for Mask {
    fn from(m: MaskArg) -> Self {
        match m {
            MaskArg::All => Mask::All,
            MaskArg::Odd => Mask::Odd,
            MaskArg::Even => Mask::Even,
            MaskArg::Nonzero => Mask::Nonzero,
        }
    }
}

/// Settings shared by every subcommand; all optional so that the config
/// file can fill what the command line leaves out.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct Flags {
    /// Boundary condition
    #[arg(long, value_enum)]
    pub bc: Option<BcArg>,
    /// Fractional order, in (0, 1)
    #[arg(long, allow_negative_numbers = true)]
    pub a: Option<f64>,
    /// Right-hand side: const, poly2, linear, lifted, sin:k, eigen:k, custom:path
    #[arg(long)]
    pub rhs: Option<String>,
    /// Grid size, a power of two in [64, 8192]
    #[arg(long)]
    pub n: Option<usize>,
    /// Diffusion coefficient: `const:v` or `affine:p,q` for p + q·x
    #[arg(long)]
    pub coef: Option<String>,
    /// Sinc quadrature: nodes per half-line
    #[arg(long)]
    pub quad_q: Option<usize>,
    /// Sinc quadrature: step override
    #[arg(long)]
    pub quad_step: Option<f64>,
    /// Number of modes synthesized for the boundary fit
    #[arg(long)]
    pub k_modes: Option<usize>,
    /// Decay-fit window `lo,hi` (1-based)
    #[arg(long, value_parser = parse_window)]
    pub window: Option<(usize, usize)>,
    /// Decay-fit parity mask (default: chosen from parity energy)
    #[arg(long, value_enum)]
    pub mask: Option<MaskArg>,
    /// Tolerance on the decay exponent
    #[arg(long)]
    pub tol_beta: Option<f64>,
    /// Tolerance on the boundary exponent
    #[arg(long)]
    pub tol_theta: Option<f64>,
    /// Seed for the randomized suites
    #[arg(long)]
    pub seed: Option<u64>,
    /// JSON report path (stdout when absent)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// CSV eigencoefficient dump path
    #[arg(long)]
    pub dump_coeffs: Option<PathBuf>,
    /// Decomposition cache directory (also FRACLAB_CACHE)
    #[arg(long)]
    pub cache_dir: Option<PathBuf>,
    /// JSON file with any of the settings above
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

fn parse_window(s: &str) -> Result<(usize, usize), String> {
    let (lo, hi) = s.split_once(',').ok_or("expected lo,hi")?;
    let lo = lo.trim().parse().map_err(|_| format!("bad window start '{lo}'"))?;
    let hi = hi.trim().parse().map_err(|_| format!("bad window end '{hi}'"))?;
    Ok((lo, hi))
}

impl Flags {
    /// Fields set here win over `base`.
    fn over(self, base: Flags) -> Flags {
        Flags {
            bc: self.bc.or(base.bc),
            a: self.a.or(base.a),
            rhs: self.rhs.or(base.rhs),
            n: self.n.or(base.n),
            coef: self.coef.or(base.coef),
            quad_q: self.quad_q.or(base.quad_q),
            quad_step: self.quad_step.or(base.quad_step),
            k_modes: self.k_modes.or(base.k_modes),
            window: self.window.or(base.window),
            mask: self.mask.or(base.mask),
            tol_beta: self.tol_beta.or(base.tol_beta),
            tol_theta: self.tol_theta.or(base.tol_theta),
            seed: self.seed.or(base.seed),
            out: self.out.or(base.out),
            dump_coeffs: self.dump_coeffs.or(base.dump_coeffs),
            cache_dir: self.cache_dir.or(base.cache_dir),
            config: self.config,
        }
    }
}

/// Fully resolved settings of one invocation; echoed into the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct RunConfig {
    pub command: CommandKind,
    pub bc: BcArg,
    pub a: f64,
    pub rhs: String,
    pub n: usize,
    pub coef: String,
    pub quad_q: usize,
    pub quad_step: Option<f64>,
    pub k_modes: Option<usize>,
    pub window: Option<(usize, usize)>,
    pub mask: Option<MaskArg>,
    pub tol_beta: f64,
    pub tol_theta: f64,
    pub seed: u64,
    /// output locations do not affect results and are not echoed
    #[serde(skip)]
    pub out: Option<PathBuf>,
    #[serde(skip)]
    pub dump_coeffs: Option<PathBuf>,
    #[serde(skip)]
    pub cache_dir: Option<PathBuf>,
}

fn read_config_file(path: &Path) -> Result<Flags, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))
}

impl RunConfig {
    /// Merges flags, config file, environment and defaults, then validates.
    pub fn resolve(command: CommandKind, flags: Flags, env_cache: Option<PathBuf>) -> Result<Self, CliError> {
        let file = match &flags.config {
            Some(p) => read_config_file(p)?,
            None => Flags::default(),
        };
        let f = flags.over(file);
        let cfg = RunConfig {
            command,
            bc: f.bc.unwrap_or(BcArg::Dirichlet),
            a: f.a.unwrap_or(0.5),
            rhs: f.rhs.unwrap_or_else(|| "const".into()),
            n: f.n.unwrap_or(DEFAULT_N),
            coef: f.coef.unwrap_or_else(|| "const:1".into()),
            quad_q: f.quad_q.unwrap_or(DEFAULT_QUAD_Q),
            quad_step: f.quad_step,
            k_modes: f.k_modes,
            window: f.window,
            mask: f.mask,
            tol_beta: f.tol_beta.unwrap_or(DEFAULT_TOL_BETA),
            tol_theta: f.tol_theta.unwrap_or(DEFAULT_TOL_THETA),
            seed: f.seed.unwrap_or(DEFAULT_SEED),
            out: f.out,
            dump_coeffs: f.dump_coeffs,
            cache_dir: f.cache_dir.or(env_cache),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        if !(self.a > 0.0 && self.a < 1.0) {
            return Err(CliError::Usage("a must lie in (0,1)".into()));
        }
        if !self.n.is_power_of_two() || !(MIN_N..=MAX_N).contains(&self.n) {
            return Err(CliError::Usage(format!("N must be a power of two in [{MIN_N}, {MAX_N}], got {}", self.n)));
        }
        for (name, t) in [("tol-beta", self.tol_beta), ("tol-theta", self.tol_theta)] {
            if !(t > 0.0 && t.is_finite()) {
                return Err(CliError::Usage(format!("{name} must be positive")));
            }
        }
        Ok(())
    }

    pub fn bc_kind(&self) -> BcKind {
        self.bc.into()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn defaults_are_valid() {
        let c = RunConfig::resolve(CommandKind::Power, Flags::default(), None).unwrap();
        assert_eq!((c.n, c.a, c.rhs.as_str(), c.bc), (DEFAULT_N, 0.5, "const", BcArg::Dirichlet));
    }

    #[test]
    fn rejects_order_and_size() {
        let bad_a = Flags { a: Some(1.5), ..Flags::default() };
        match RunConfig::resolve(CommandKind::Power, bad_a, None) {
            Err(CliError::Usage(m)) => assert_eq!(m, "a must lie in (0,1)"),
            other => panic!("{other:?}"),
        }
        for n in [32, 100, 16384] {
            let f = Flags { n: Some(n), ..Flags::default() };
            assert!(RunConfig::resolve(CommandKind::Power, f, None).is_err());
        }
    }

    #[test]
    fn flags_override_file_override_defaults() {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        write!(file, r#"{{"a": 0.25, "n": 2048, "rhs": "poly2"}}"#).unwrap();
        let flags = Flags { n: Some(4096), config: Some(file.path().to_path_buf()), ..Flags::default() };
        let c = RunConfig::resolve(CommandKind::Compat, flags, Some("/tmp/env".into())).unwrap();
        assert_eq!((c.a, c.n, c.rhs.as_str()), (0.25, 4096, "poly2"));
        assert_eq!(c.cache_dir, Some(PathBuf::from("/tmp/env")));
        let flags = Flags { cache_dir: Some("/tmp/flag".into()), ..Flags::default() };
        let c = RunConfig::resolve(CommandKind::Compat, flags, Some("/tmp/env".into())).unwrap();
        assert_eq!(c.cache_dir, Some(PathBuf::from("/tmp/flag")));
    }

    #[test]
    fn unknown_config_keys_are_rejected() {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        write!(file, r#"{{"alpha": 0.25}}"#).unwrap();
        let flags = Flags { config: Some(file.path().to_path_buf()), ..Flags::default() };
        assert!(matches!(RunConfig::resolve(CommandKind::Power, flags, None), Err(CliError::Usage(_))));
    }

    #[test]
    fn window_parsing() {
        assert_eq!(parse_window("8, 512"), Ok((8, 512)));
        assert!(parse_window("8").is_err());
    }
}
