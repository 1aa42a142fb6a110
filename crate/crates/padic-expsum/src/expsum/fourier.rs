//! Complete sums: the transform `e^_f(s)` over one period and the
//! restriction of a complete sum to approximate critical points.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::expsum::{guard, poly_exponentials, Kahan};
use crate::padic_core::{e_frac, iota_prime_int, Modulus};
use crate::series::{PadicSeries, PhaseF, PhasePoly};

/// `e^_f(s) = sum_{m mod P} e((f(m) p^(-w) - s m)/P)` for all `s mod P`,
/// `P = p^(n-w)`.
pub fn fourier_dft(phi: &PhaseF) -> Result<Vec<Complex64>> {
    let d = phi.period_exp()?;
    let per = phi.p.pow(d);
    guard(per, "fourier_dft")?;
    let poly = PhasePoly::from_series(&phi.phase_unit()?, d)?;
    let mut buf = poly_exponentials(&poly, 0, per);
    let fft = FftPlanner::new().plan_fft_forward(per as usize);
    fft.process(&mut buf);
    Ok(buf)
}

#[derive(Clone, Copy, Debug)]
pub struct Stationary {
    pub restricted: Complex64,
    pub full: Complex64,
    /// `mu` with `f' in Z_p + p^mu t I0`; `None` when `f'` is constant.
    pub mu: Option<i64>,
    /// Number of `m` kept by the restriction.
    pub kept: u64,
}

/// For an integral series `f`, compares `sum_{m mod p^n} e(f(m)/p^n)` with
/// the same sum over `f'(m) = 0 mod p^j`. Needs `1 <= j <= n - 1` and
/// `2(n - j) + mu >= n + iota'(2)`.
pub fn stationary_restrict_series(f: &PadicSeries, n: u32, j: u32) -> Result<Stationary> {
    let p = f.p();
    let fp = f.derivative();
    let mu = fp
        .abs_ords()
        .iter()
        .skip(1)
        .flatten()
        .copied()
        .min();
    let lhs = 2 * (n as i64 - j as i64) + mu.unwrap_or(i64::MAX / 4);
    if j == 0 || j >= n || lhs < n as i64 + iota_prime_int(p, 2) {
        return Err(Error::HypothesesUnmet(format!(
            "stationary phase hypotheses unmet: need 1 <= j <= n - 1 and \
             2(n - j) + mu >= n + iota'(2), got n = {n}, j = {j}, mu = {mu:?}"
        )));
    }
    let per = p.pow(n);
    guard(per, "stationary_restrict")?;
    let fpoly = PhasePoly::from_series(f, n)?;
    let dpoly = PhasePoly::from_series(&fp, j)?;
    let pj = Modulus::new(p, j)?.m;
    let fv = fpoly.values(0, per as usize);
    let dv = dpoly.values(0, per as usize);
    let mut full = Kahan::default();
    let mut restricted = Kahan::default();
    let mut kept = 0;
    for (v, d) in fv.iter().zip(&dv) {
        let z = e_frac(*v, per);
        full.add(z);
        if d % pj == 0 {
            restricted.add(z);
            kept += 1;
        }
    }
    Ok(Stationary {
        restricted: restricted.value(),
        full: full.value(),
        mu,
        kept,
    })
}

/// [`stationary_restrict_series`] for `f p^(-w)` modulo `p^(n-w)`, i.e.
/// the complete sum of `e(f(m)/p^n)` over one period.
pub fn stationary_restrict(phi: &PhaseF, j: u32) -> Result<Stationary> {
    stationary_restrict_series(&phi.phase_unit()?, phi.period_exp()?, j)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expsum::gauss::gauss_quadratic;
    use crate::padic_core::rat;

    #[test]
    fn parseval() {
        let g = PadicSeries::polynomial(5, 14, &[1, 10, 25]).unwrap();
        let phi = PhaseF::pure(5, 6, 1, rat(1, 2), 1, 2, 3)
            .unwrap()
            .with_perturbation(2, 1, rat(1, 1), g)
            .unwrap();
        let e = fourier_dft(&phi).unwrap();
        let per = 5f64.powi(5);
        let energy: f64 = e.iter().map(|z| z.norm_sqr()).sum();
        assert!((energy / (per * per) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn log_phase_support_is_one_progression() {
        let (p, n, kappa) = (5, 6, 1);
        let phi = PhaseF::log_phase(p, n, kappa, 1, 3).unwrap();
        let e = fourier_dft(&phi).unwrap();
        let s0 = phi.derivative_unit().unwrap().with_shift(0).unwrap().coeff(0) % 5;
        let big = 5f64.powf((n as f64 - 1.0 + 1.0) / 2.0);
        for (s, z) in e.iter().enumerate() {
            if s as u64 % 5 == s0 {
                assert!((z.norm() - big).abs() < 1e-6, "s = {s}");
            } else {
                assert!(z.norm() < 1e-8, "s = {s}");
            }
        }
    }

    #[test]
    fn linear_phase_has_no_critical_points() {
        let f = PadicSeries::polynomial(5, 4, &[0, 3]).unwrap();
        let r = stationary_restrict_series(&f, 4, 1).unwrap();
        assert_eq!(r.kept, 0);
        assert!(r.full.norm() < 1e-9 && r.restricted.norm() < 1e-9);
    }

    #[test]
    fn quadratic_phase_agrees_with_gauss() {
        for &(p, n, a) in &[(5u64, 5u32, 2i128), (7, 4, 3), (3, 5, 1)] {
            let f = PadicSeries::polynomial(p, n, &[0, 0, a]).unwrap();
            let j = n / 2;
            let r = stationary_restrict_series(&f, n, j).unwrap();
            let g = gauss_quadratic(a, p, n).unwrap();
            assert!((r.full - g).norm() < 1e-9);
            assert!((r.restricted - g).norm() < 1e-9);
        }
    }

    #[test]
    fn log_phase_restriction() {
        // subtract the linear term at 0 so that critical points exist
        let phi = PhaseF::log_phase(5, 8, 1, 1, 2).unwrap();
        let f = phi.phase_unit().unwrap();
        let s0 = f.derivative().with_shift(0).unwrap().coeff(0);
        let lin = PadicSeries::new(5, f.precision(), 0, vec![0, s0], None).unwrap();
        let f = f.sub(&lin).unwrap();
        let r = stationary_restrict_series(&f, 7, 3).unwrap();
        assert!(r.kept > 0);
        assert!(r.full.norm() > 1.0);
        assert!((r.restricted - r.full).norm() < 1e-8);
    }

    #[test]
    fn hypotheses_are_enforced() {
        let f = PadicSeries::polynomial(5, 6, &[0, 0, 1]).unwrap();
        assert!(matches!(
            stationary_restrict_series(&f, 6, 5),
            Err(Error::HypothesesUnmet(_))
        ));
    }
}
