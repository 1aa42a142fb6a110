//! Exponential sums `sum e(f(m)/p^n)` for phases of class `F`.
//!
//! Everything here is exact up to the final `exp`: phases are reduced to
//! integer residues modulo `p^n` first, and complex terms are accumulated
//! with compensated summation in fixed-size chunks, so results do not
//! depend on the number of worker threads.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::padic_core::e_frac;
use crate::series::{PhaseF, PhasePoly};

pub mod datum_check;
pub mod dual;
pub mod fourier;
pub mod gauss;
pub mod implicit;
pub mod weyl;

pub use datum_check::{datum_empirical_check, DatumGrid, DatumReport, DatumRow, PhaseFamily};
pub use dual::{
    dft_dual_check, dual_phase, summation_formula, Cutoff, DftCheck, DualPhaseResult, SummationResult,
};
pub use fourier::{fourier_dft, stationary_restrict, stationary_restrict_series, Stationary};
pub use gauss::{gauss_eps, gauss_quadratic};
pub use implicit::{implicit_solve, ImplicitSolution};
pub use weyl::{weyl_difference, weyl_inequality_report, WeylDifference, WeylReport};

/// Largest number of terms any brute-force routine will touch.
pub const BRUTE_FORCE_GUARD: u64 = 10_000_000;

/// Work unit for parallel sums; fixed so the reduction order is too.
const CHUNK: usize = 1 << 15;

pub(crate) fn guard(terms: u64, what: &str) -> Result<()> {
    if terms > BRUTE_FORCE_GUARD {
        return Err(Error::GuardExceeded(format!(
            "{what}: {terms} terms is too large for brute force (limit {BRUTE_FORCE_GUARD})"
        )));
    }
    Ok(())
}

/// Kahan-Babuska compensated complex accumulator.
#[derive(Clone, Copy, Debug, Default)]
pub struct Kahan {
    sum: Complex64,
    comp: Complex64,
}

impl Kahan {
    pub fn add(&mut self, x: Complex64) {
        let t = self.sum + x;
        let fix = |s: f64, x: f64, t: f64| {
            if s.abs() >= x.abs() {
                (s - t) + x
            } else {
                (x - t) + s
            }
        };
        self.comp.re += fix(self.sum.re, x.re, t.re);
        self.comp.im += fix(self.sum.im, x.im, t.im);
        self.sum = t;
    }

    pub fn value(&self) -> Complex64 {
        self.sum + self.comp
    }
}

impl FromIterator<Complex64> for Kahan {
    fn from_iter<I: IntoIterator<Item = Complex64>>(it: I) -> Self {
        let mut k = Kahan::default();
        for x in it {
            k.add(x);
        }
        k
    }
}

#[derive(Clone, Debug)]
pub struct ExpSumResult {
    pub value: Complex64,
    pub b: u64,
    pub n: u32,
    pub phase: String,
}

/// `sum_{start <= m < start + count} e(poly(m)/p^n)`.
pub fn poly_sum(poly: &PhasePoly, start: i128, count: u64) -> Complex64 {
    let m = poly.ctx.m;
    let chunks = count.div_ceil(CHUNK as u64);
    let parts: Vec<Complex64> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let s = start + (c * CHUNK as u64) as i128;
            let len = (count - c * CHUNK as u64).min(CHUNK as u64) as usize;
            poly.values(s, len)
                .into_iter()
                .map(|v| e_frac(v, m))
                .collect::<Kahan>()
                .value()
        })
        .collect();
    parts.into_iter().collect::<Kahan>().value()
}

/// `e(poly(m)/p^n)` for `m = start, ..., start + count - 1`.
pub fn poly_exponentials(poly: &PhasePoly, start: i128, count: u64) -> Vec<Complex64> {
    let m = poly.ctx.m;
    let chunks = count.div_ceil(CHUNK as u64);
    let parts: Vec<Vec<Complex64>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let s = start + (c * CHUNK as u64) as i128;
            let len = (count - c * CHUNK as u64).min(CHUNK as u64) as usize;
            poly.values(s, len).into_iter().map(|v| e_frac(v, m)).collect()
        })
        .collect();
    parts.concat()
}

/// `sum_{M < m <= M + B} e(f(m)/p^n)`, term by term.
pub fn brute_sum(phi: &PhaseF, m: i128, b: u64) -> Result<ExpSumResult> {
    if b == 0 {
        return Err(Error::BadParameter("B must be at least 1".into()));
    }
    guard(b, "brute_sum")?;
    let poly = phi.poly()?;
    Ok(ExpSumResult {
        value: poly_sum(&poly, m + 1, b),
        b,
        n: phi.n,
        phase: phi.describe(),
    })
}
