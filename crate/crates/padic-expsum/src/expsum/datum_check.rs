//! Empirical check of an exponent datum: brute-force the worst short sum
//! over all starting points and compare it with the datum's bound
//! `p^r (N/B)^k B^l (log N)^delta`, `N = p^(n - w - kappa - iota')`.

use std::fmt::Write as _;

use num_complex::Complex64;
use num_traits::ToPrimitive;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::expsum::{poly_exponentials, BRUTE_FORCE_GUARD};
use crate::padic_core::{format_rational, rat, rat_int, Rational};
use crate::pairs::{eval_datum, Datum, DatumParams};
use crate::series::PhaseF;

/// Phases the check runs over; every member shares `(w, y, kappa)`.
#[derive(Clone, Debug, PartialEq)]
pub enum PhaseFamily {
    /// `a0 log(1 + p^kappa c' t)` for each listed `a0` and `c`.
    Log { a0: Vec<u64>, c: Vec<u64> },
    /// `+-2 l (1 + p^kappa c' t)^(1/2)` for each `c` that is a square.
    Salie { c: Vec<u64> },
}

impl Default for PhaseFamily {
    fn default() -> Self {
        PhaseFamily::Log {
            a0: vec![1, 2],
            c: vec![1, 2],
        }
    }
}

impl PhaseFamily {
    fn y(&self) -> Rational {
        match self {
            PhaseFamily::Log { .. } => rat_int(1),
            PhaseFamily::Salie { .. } => rat(1, 2),
        }
    }

    fn members(&self, p: u64, n: u32, kappa: u32) -> Vec<PhaseF> {
        match self {
            PhaseFamily::Log { a0, c } => a0
                .iter()
                .flat_map(|&a| c.iter().map(move |&c| (a, c)))
                .filter_map(|(a, c)| PhaseF::log_phase(p, n, kappa, c, a).ok())
                .collect(),
            PhaseFamily::Salie { c } => c
                .iter()
                .flat_map(|&c| [1i8, -1].map(|s| (c, s)))
                .filter_map(|(c, s)| PhaseF::salie_phase(p, n, kappa, c, s).ok())
                .collect(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct DatumGrid {
    pub primes: Vec<u64>,
    pub n_max: u32,
    pub kappas: Vec<u32>,
}

impl Default for DatumGrid {
    fn default() -> Self {
        DatumGrid {
            primes: vec![5, 7, 11],
            n_max: 8,
            kappas: vec![1, 2],
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DatumRow {
    pub p: u64,
    pub n: u32,
    pub w: i32,
    pub kappa: u32,
    pub b: u64,
    /// `max_M |sum_{M<m<=M+B} e(f(m)/p^n)|`, also maximised over the family.
    pub abs_s: f64,
    pub rhs: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug)]
pub struct DatumReport {
    pub word: String,
    pub rows: Vec<DatumRow>,
    /// `(p, n, kappa, reason)` for grid points left out.
    pub skipped: Vec<(u64, u32, u32, String)>,
    /// `(p, sup ratio)`.
    pub sup_by_prime: Vec<(u64, f64)>,
    pub sup_ratio: f64,
}

/// 12 significant digits, the CSV convention.
fn sig12(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    format!("{x:.11e}")
}

impl DatumReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("p,n,w,kappa,B,abs_S,rhs,ratio\n");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{}",
                r.p,
                r.n,
                r.w,
                r.kappa,
                r.b,
                sig12(r.abs_s),
                sig12(r.rhs),
                sig12(r.ratio)
            );
        }
        s
    }
}

fn to_f64(x: &Rational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// `max_M |sum_{M<m<=M+B} b(m)|` for each `B`, over one period of `b`.
fn sup_over_shifts(vals: &[Complex64], bs: &[u64]) -> Vec<f64> {
    let per = vals.len();
    let top = *bs.iter().max().unwrap_or(&0) as usize;
    let mut pre = Vec::with_capacity(per + top + 1);
    pre.push(Complex64::new(0.0, 0.0));
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..per + top {
        acc += vals[i % per];
        pre.push(acc);
    }
    bs.iter()
        .map(|&b| {
            let b = b as usize;
            (0..per)
                .map(|m| (pre[m + b] - pre[m]).norm())
                .fold(0.0, f64::max)
        })
        .collect()
}

/// Datum preconditions at a grid point, as an error message if violated.
fn preconditions(d: &Datum, phi: &PhaseF) -> Option<String> {
    let k = rat_int(phi.kappa as i64);
    if k < d.kappa0 {
        return Some(format!("kappa < kappa0 = {}", format_rational(&d.kappa0)));
    }
    let need = rat_int(phi.w as i64) + &d.n0;
    if rat_int(phi.n as i64) < need {
        return Some(format!("n < w + n0 = {}", format_rational(&need)));
    }
    // u and lambda are infinite for the built-in families
    None
}

/// Runs the check for the datum of `word` over `family` and `grid`.
pub fn datum_empirical_check(
    word: &str,
    family: &PhaseFamily,
    grid: &DatumGrid,
) -> Result<DatumReport> {
    let y = family.y();
    let mut points = Vec::new();
    for &p in &grid.primes {
        for &kappa in &grid.kappas {
            for n in (2 * kappa + 1)..=grid.n_max {
                points.push((p, n, kappa));
            }
        }
    }
    let results: Vec<Result<(Vec<DatumRow>, Option<String>)>> = points
        .par_iter()
        .map(|&(p, n, kappa)| {
            let params = DatumParams {
                p,
                y: y.clone(),
                kappa: kappa as i64,
                lambda: None,
            };
            let d = eval_datum(word, &params, false)?;
            let phases = family.members(p, n, kappa);
            let Some(first) = phases.first() else {
                return Ok((vec![], Some("family is empty here".into())));
            };
            if let Some(why) = preconditions(&d, first) {
                return Ok((vec![], Some(why)));
            }
            let nw = first.period_exp()?;
            let per = p.pow(nw);
            if per > BRUTE_FORCE_GUARD {
                return Ok((
                    vec![],
                    Some(format!("period {p}^{nw} exceeds the brute-force guard")),
                ));
            }
            let ne = nw as i64 - kappa as i64 - first.iota_prime();
            let bs: Vec<u64> = (0..=ne as u32).map(|e| p.pow(e)).collect();
            let mut sup = vec![0.0f64; bs.len()];
            for phi in &phases {
                let vals = poly_exponentials(&phi.poly()?, 0, per);
                for (s, v) in sup.iter_mut().zip(sup_over_shifts(&vals, &bs)) {
                    *s = s.max(v);
                }
            }
            let big_n = (p as f64).powi(ne as i32);
            let (r, k, l, delta) = (to_f64(&d.r), to_f64(&d.k), to_f64(&d.l), to_f64(&d.delta));
            let rows = bs
                .iter()
                .zip(&sup)
                .map(|(&b, &abs_s)| {
                    let bf = b as f64;
                    let rhs = (p as f64).powf(r)
                        * (big_n / bf).powf(k)
                        * bf.powf(l)
                        * big_n.ln().powf(delta);
                    DatumRow {
                        p,
                        n,
                        w: first.w,
                        kappa,
                        b,
                        abs_s,
                        rhs,
                        ratio: abs_s / rhs,
                    }
                })
                .collect();
            Ok((rows, None))
        })
        .collect();

    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for (&(p, n, kappa), res) in points.iter().zip(results) {
        let (r, why) = res?;
        rows.extend(r);
        if let Some(why) = why {
            skipped.push((p, n, kappa, why));
        }
    }
    if rows.is_empty() {
        return Err(Error::HypothesesUnmet(format!(
            "no grid point satisfies the preconditions of datum {word:?}"
        )));
    }
    let sup_by_prime = grid
        .primes
        .iter()
        .map(|&p| {
            let s = rows
                .iter()
                .filter(|r| r.p == p)
                .map(|r| r.ratio)
                .fold(0.0, f64::max);
            (p, s)
        })
        .collect::<Vec<_>>();
    let sup_ratio = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    Ok(DatumReport {
        word: word.to_string(),
        rows,
        skipped,
        sup_by_prime,
        sup_ratio,
    })
}
