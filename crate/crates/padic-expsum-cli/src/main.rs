// `!(x < t)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod phase;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde_json::{json, Value};

use padic_expsum::characters::{char_build, char_sum, char_sum_split, gauss_eps_char};
use padic_expsum::expsum::{
    brute_sum, datum_empirical_check, dft_dual_check, gauss_eps, gauss_quadratic, implicit_solve,
    stationary_restrict, summation_formula, weyl_inequality_report, Cutoff, DatumGrid, PhaseFamily,
};
use padic_expsum::lvalue::{bound_ratio_report, l_central_afe, l_central_oracle, ORACLE_GUARD};
use padic_expsum::padic_core::{format_rational, parse_rational};
use padic_expsum::pairs::{eval_datum, search_min_theta, word_to_pair, DatumJson, DatumParams};
use padic_expsum::Error;

use phase::PhaseArgs;

/// Short exponential sums modulo prime powers, exponent pairs and central
/// L-values of characters modulo p^n.
#[derive(Parser)]
#[command(name = "padic-expsum", version)]
struct Cli {
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Write the primary output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum CutoffKind {
    Gaussian,
    Bump,
}

#[derive(Subcommand)]
enum Cmd {
    /// Brute-force sum of e(f(m)/p^n) over M < m <= M + B.
    Sum {
        #[command(flatten)]
        phase: PhaseArgs,
        #[arg(long = "M", default_value_t = 0, allow_hyphen_values = true)]
        m: i128,
        #[arg(long = "B")]
        b: u64,
    },
    /// Full transform of a complete sum against the dual phase prediction.
    DftCheck {
        #[command(flatten)]
        phase: PhaseArgs,
    },
    /// Complete sum against its restriction to f'(m) = 0 mod p^j.
    Statphase {
        #[command(flatten)]
        phase: PhaseArgs,
        #[arg(long)]
        j: u32,
    },
    /// Quadratic Gauss sum sum_{m mod p^n} e(a m^2/p^n).
    Gauss {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        n: u32,
        #[arg(long, allow_hyphen_values = true)]
        a: i128,
    },
    /// Solution of f'(f~(t)) p^-w = g~0 + omega'(1 + p^(iota'+kappa) t).
    Implicit {
        #[command(flatten)]
        phase: PhaseArgs,
        /// Number of coefficients of f~ to print.
        #[arg(long, default_value_t = 6)]
        terms: usize,
    },
    /// Both sides of the smoothed summation formula.
    Poisson {
        #[command(flatten)]
        phase: PhaseArgs,
        #[arg(long = "B")]
        b: f64,
        #[arg(long, value_enum, default_value_t = CutoffKind::Gaussian)]
        cutoff: CutoffKind,
        #[arg(long, default_value_t = 400.0)]
        xi_max: f64,
    },
    /// Weyl-van der Corput inequality with step H.
    Weyl {
        #[command(flatten)]
        phase: PhaseArgs,
        #[arg(long = "M", default_value_t = 0, allow_hyphen_values = true)]
        m: i128,
        #[arg(long = "B")]
        b: u64,
        #[arg(long = "H")]
        h: u64,
    },
    /// Sup of |S| / datum bound over a grid of log phases.
    DatumCheck {
        #[arg(long, default_value = "B")]
        word: String,
        /// Primes of the grid (repeatable).
        #[arg(long = "p")]
        primes: Vec<u64>,
        /// Largest n of the grid.
        #[arg(long, default_value_t = 8)]
        n: u32,
        /// kappa values of the grid (repeatable).
        #[arg(long = "kappa")]
        kappas: Vec<u32>,
        #[arg(long, default_value_t = false)]
        salie: bool,
    },
    /// Exponent pairs and data.
    Pairs {
        #[command(subcommand)]
        cmd: PairsCmd,
    },
    /// Character sum over M < m <= M + B, directly and split mod p^kappa.
    Charsum {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        n: u32,
        #[arg(long, default_value_t = 1)]
        a0: u64,
        /// Exponent j of the component psi(g^i) = e(j i / |G|).
        #[arg(long, default_value_t = 0)]
        psi: u64,
        #[arg(long = "M", default_value_t = 0, allow_hyphen_values = true)]
        m: i128,
        #[arg(long = "B")]
        b: u64,
        #[arg(long)]
        kappa: Option<u32>,
    },
    /// L(1/2, chi) by the approximate functional equation, or a bound-ratio
    /// table over all primitive characters when --word is given.
    Lcentral {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        n: u32,
        #[arg(long, default_value_t = 1)]
        a0: u64,
        #[arg(long, default_value_t = 0)]
        psi: u64,
        #[arg(long = "A", default_value_t = 2)]
        a: u32,
        #[arg(long)]
        word: Option<String>,
        #[arg(long, default_value_t = 1)]
        kappa: i64,
    },
    /// Runs every acceptance criterion and prints a table.
    VerifyAll {
        #[arg(long, default_value_t = false)]
        quick: bool,
    },
}

#[derive(Subcommand)]
enum PairsCmd {
    /// The pair of a word in A and B applied to (0, 1).
    Word { word: String },
    /// The word of length <= L with least theta = (k + l)/2 - 1/4.
    Search {
        #[arg(long = "max-len")]
        max_len: usize,
    },
    /// The full exponent datum of a word.
    Datum {
        word: String,
        #[arg(long, default_value = "1")]
        y: String,
        #[arg(long)]
        p: u64,
        #[arg(long)]
        kappa: i64,
        /// Omit for lambda = infinity.
        #[arg(long)]
        lambda: Option<String>,
        #[arg(long, default_value_t = false)]
        generic: bool,
    },
}

enum Failure {
    Lib(Error),
    Verify(String),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

type Run = std::result::Result<String, Failure>;

fn cx(z: Complex64) -> Value {
    json!({"re": z.re, "im": z.im, "abs": z.norm()})
}

fn pair_json(word: &str) -> Run {
    let q = word_to_pair(word)?;
    Ok(json!({
        "word": word,
        "k": format_rational(&q.k),
        "l": format_rational(&q.l),
        "theta": format_rational(&q.theta()),
    })
    .to_string())
}

fn check(ok: bool, out: Value, what: &str) -> Run {
    if ok {
        Ok(out.to_string())
    } else {
        Err(Failure::Verify(format!("{what}: {out}")))
    }
}

fn run(cmd: Cmd) -> Run {
    match cmd {
        Cmd::Sum { phase, m, b } => {
            let phi = phase.build()?;
            let r = brute_sum(&phi, m, b)?;
            Ok(json!({"phase": r.phase, "M": m.to_string(), "B": b, "sum": cx(r.value)}).to_string())
        }
        Cmd::DftCheck { phase } => {
            let c = dft_dual_check(&phase.build()?)?;
            let out = json!({
                "values": c.values,
                "on_support": c.on_support,
                "max_off_support": c.max_off_support,
                "max_mismatch": c.max_mismatch,
                "s0": c.dual.s0,
                "eps": cx(c.dual.eps),
                "dual": c.dual.dual.describe(),
            });
            check(c.max_off_support < 1e-8 && c.max_mismatch < 1e-8, out, "transform mismatch")
        }
        Cmd::Statphase { phase, j } => {
            let s = stationary_restrict(&phase.build()?, j)?;
            let diff = (s.restricted - s.full).norm();
            let out = json!({
                "full": cx(s.full),
                "restricted": cx(s.restricted),
                "diff": diff,
                "kept": s.kept,
                "mu": s.mu,
            });
            check(diff < 1e-9, out, "restricted sum differs")
        }
        Cmd::Gauss { p, n, a } => {
            let z = gauss_quadratic(a, p, n)?;
            let eps = gauss_eps(a, p, n)?;
            let clean = |x: f64| if x.abs() < 1e-12 { 0.0 } else { x };
            Ok(json!({
                "p": p, "n": n, "a": a.to_string(),
                "re": clean(z.re), "im": clean(z.im), "abs": clean(z.norm()),
                "eps": cx(eps),
            })
            .to_string())
        }
        Cmd::Implicit { phase, terms } => {
            let phi = phase.build()?;
            let s = implicit_solve(&phi)?;
            let f = s.f_tilde.with_shift(0)?;
            let coeffs: Vec<String> = (0..terms).map(|k| f.coeff(k).to_string()).collect();
            Ok(json!({
                "phase": phi.describe(),
                "f_tilde": coeffs,
                "g_tilde0": s.g_tilde0.to_string(),
                "lambda_tilde": format_rational(&s.lambda_tilde),
                "u_prime": s.u_prime,
                "iterations": s.iterations,
                "precision": f.precision(),
            })
            .to_string())
        }
        Cmd::Poisson { phase, b, cutoff, xi_max } => {
            let cut = match cutoff {
                CutoffKind::Gaussian => Cutoff::Gaussian,
                CutoffKind::Bump => Cutoff::Bump { xi_max },
            };
            let r = summation_formula(&phase.build()?, b, cut)?;
            let out = json!({
                "lhs": cx(r.lhs),
                "rhs": cx(r.rhs),
                "rel_error": r.rel_error,
                "lhs_terms": r.lhs_terms,
                "rhs_terms": r.rhs_terms,
                "error_estimate": r.error_estimate,
                "dual": r.dual.dual.describe(),
            });
            let tol = if cut == Cutoff::Gaussian { 1e-7 } else { (10.0 * r.error_estimate).max(1e-7) };
            check(r.rel_error < tol, out, "sides disagree")
        }
        Cmd::Weyl { phase, m, b, h } => {
            let r = weyl_inequality_report(&phase.build()?, m, b, h)?;
            Ok(json!({
                "S": cx(r.s),
                "abs_S2": r.s.norm_sqr(),
                "rhs": r.rhs,
                "c_obs": r.c_obs,
                "shifts": r.inner.len(),
                "differenced_checked": r.differenced_checked,
            })
            .to_string())
        }
        Cmd::DatumCheck { word, primes, n, kappas, salie } => {
            let mut grid = DatumGrid::default();
            if !primes.is_empty() {
                grid.primes = primes;
            }
            if !kappas.is_empty() {
                grid.kappas = kappas;
            }
            grid.n_max = n;
            let family = if salie {
                PhaseFamily::Salie { c: vec![1, 4] }
            } else {
                PhaseFamily::default()
            };
            let r = datum_empirical_check(&word, &family, &grid)?;
            Ok(r.to_csv()
                + &format!(
                    "# sup_ratio {:.11e}; skipped {}\n",
                    r.sup_ratio,
                    r.skipped
                        .iter()
                        .map(|(p, n, k, why)| format!("({p},{n},{k}): {why}"))
                        .collect::<Vec<_>>()
                        .join("; ")
                ))
        }
        Cmd::Pairs { cmd } => match cmd {
            PairsCmd::Word { word } => pair_json(&word),
            PairsCmd::Search { max_len } => {
                let (w, _) = search_min_theta(max_len)?;
                pair_json(&w)
            }
            PairsCmd::Datum { word, y, p, kappa, lambda, generic } => {
                let lambda = lambda.as_deref().map(parse_rational).transpose()?;
                let params = DatumParams { p, y: parse_rational(&y)?, kappa, lambda };
                let d = eval_datum(&word, &params, generic)?;
                serde_json::to_string(&DatumJson::new(&word, &d)).map_err(|e| Failure::Io(e.to_string()))
            }
        },
        Cmd::Charsum { p, n, a0, psi, m, b, kappa } => {
            let chi = char_build(p, n, a0, psi)?;
            let direct = char_sum(&chi, m, b)?;
            let mut out = json!({
                "character": serde_json::from_str::<Value>(&chi.to_json()).expect("valid json"),
                "M": m.to_string(),
                "B": b,
                "sum": cx(direct),
            });
            if let Some(k) = kappa {
                let split = char_sum_split(&chi, m, b, k)?;
                out["split"] = cx(split);
                let diff = (split - direct).norm();
                out["diff"] = json!(diff);
                return check(diff < 1e-10, out, "split form disagrees");
            }
            Ok(out.to_string())
        }
        Cmd::Lcentral { p, n, a0, psi, a, word, kappa } => {
            if let Some(word) = word {
                return Ok(bound_ratio_report(&word, p, n, kappa, a)?.to_csv());
            }
            let chi = char_build(p, n, a0, psi)?;
            let r = l_central_afe(&chi, a)?;
            let mut out = json!({
                "character": serde_json::from_str::<Value>(&chi.to_json()).expect("valid json"),
                "value": cx(r.value),
                "epsilon": cx(gauss_eps_char(&chi)?),
                "terms": r.terms,
                "truncation_bound": r.truncation_bound,
            });
            if chi.modulus() <= ORACLE_GUARD {
                let o = l_central_oracle(&chi)?;
                out["oracle"] = cx(o);
                out["diff"] = json!((o - r.value).norm());
                return check((o - r.value).norm() < 1e-6, out, "oracle disagrees");
            }
            Ok(out.to_string())
        }
        Cmd::VerifyAll { quick } => {
            let (table, ok) = verify::run_all(quick);
            if ok {
                Ok(table)
            } else {
                print!("{table}");
                Err(Failure::Verify("unexpected criterion outcome".into()))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(w) = cli.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(w).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli.cmd) {
        Ok(mut text) => {
            if !text.ends_with('\n') {
                text.push('\n');
            }
            match &cli.out {
                Some(path) => {
                    if let Err(e) = std::fs::write(path, text) {
                        eprintln!("error: {}: {e}", path.display());
                        return ExitCode::from(1);
                    }
                }
                None => print!("{text}"),
            }
            ExitCode::SUCCESS
        }
        Err(Failure::Verify(msg)) => {
            eprintln!("verification failed: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::GuardExceeded(_) => 3,
                Error::Parse(_) | Error::BadParameter(_) => 2,
                _ => 1,
            })
        }
    }
}
