use std::path::PathBuf;

use clap::{Args, ValueEnum};
use serde::Deserialize;

use padic_expsum::padic_core::{parse_rational, rat_int};
use padic_expsum::series::{PadicSeries, PhaseF};
use padic_expsum::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PhaseKind {
    /// `a0 log(1 + p^kappa c' t)`
    Log,
    /// pure power phase with `f' = p^w omega' (1 + p^kappa omega t)^-y`
    Power,
    /// `+-2 l (1 + p^kappa c' t)^(1/2)` with `l^2 = c`
    Salie,
    /// parameters read from `--file`
    Custom,
}

#[derive(Args, Clone, Debug)]
pub struct PhaseArgs {
    #[arg(long)]
    pub p: u64,
    #[arg(long)]
    pub n: u32,
    #[arg(long, default_value_t = 1)]
    pub kappa: u32,
    #[arg(long, value_enum, default_value_t = PhaseKind::Log)]
    pub phase: PhaseKind,
    #[arg(long, default_value_t = 1)]
    pub a0: u64,
    /// Residue class `c` of log and Salie phases.
    #[arg(long, default_value_t = 1)]
    pub c: u64,
    /// Root choice of Salie phases, `1` or `-1`.
    #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
    pub sign: i8,
    #[arg(long, default_value = "1")]
    pub y: String,
    #[arg(long, default_value_t = 1)]
    pub w: i32,
    #[arg(long, default_value_t = 1)]
    pub omega: u64,
    #[arg(long = "omega-prime", default_value_t = 1)]
    pub omega_prime: u64,
    #[arg(long)]
    pub file: Option<PathBuf>,
}

/// The `--file` format: the pure part plus an optional perturbation
/// `gamma0 + p^u g` with `g` given by integer coefficients.
#[derive(Deserialize)]
struct CustomPhase {
    w: i32,
    y: String,
    kappa: u32,
    omega: u64,
    omega_prime: u64,
    #[serde(default)]
    gamma0: u64,
    u: Option<i64>,
    lambda: Option<String>,
    #[serde(default)]
    g: Vec<i64>,
}

impl PhaseArgs {
    pub fn build(&self) -> Result<PhaseF> {
        let (p, n) = (self.p, self.n);
        match self.phase {
            PhaseKind::Log => PhaseF::log_phase(p, n, self.kappa, self.c, self.a0),
            PhaseKind::Salie => PhaseF::salie_phase(p, n, self.kappa, self.c, self.sign),
            PhaseKind::Power => PhaseF::pure(
                p,
                n,
                self.w,
                parse_rational(&self.y)?,
                self.kappa,
                self.omega,
                self.omega_prime,
            ),
            PhaseKind::Custom => {
                let path = self
                    .file
                    .as_ref()
                    .ok_or_else(|| Error::BadParameter("--phase custom needs --file".into()))?;
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
                let c: CustomPhase =
                    serde_json::from_str(&text).map_err(|e| Error::Parse(e.to_string()))?;
                let phi = PhaseF::pure(p, n, c.w, parse_rational(&c.y)?, c.kappa, c.omega, c.omega_prime)?;
                match c.u {
                    None => Ok(phi),
                    Some(u) => {
                        let lambda = match &c.lambda {
                            Some(l) => parse_rational(l)?,
                            None => rat_int(c.kappa as i64),
                        };
                        let coeffs: Vec<i128> = c.g.iter().map(|&v| v as i128).collect();
                        let g = PadicSeries::polynomial(p, phi.prec, &coeffs)?;
                        phi.with_perturbation(c.gamma0, u, lambda, g)
                    }
                }
            }
        }
    }
}
