//! The dual phase of a complete sum and the summation formula it feeds.
//!
//! For `f` in `F(w, y, kappa, lambda, u, omega, omega')` the transform
//! `e^_f(s)` vanishes unless `s = g~0 + omega'(1 + p^(iota'+kappa) t)`, and
//! there equals `eps p^((n-w+iota'+kappa)/2) e(f_breve(t)/p^n)` with
//!
//! ```text
//! f_breve(t) = f(f~(t)) - p^w (g~0 + omega' + omega' p^(iota'+kappa) t) f~(t).
//! ```
//!
//! Rescaling `t -> omega'^-1 t` gives the dual phase, of class
//! `F(w + ord y, 1/y, kappa, lambda~, u + floor(lambda) - ceil(lambda~) - ord y,
//! omega'^-1, -omega^-1)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use num_traits::{One, Signed};

use crate::error::{Error, Result};
use crate::expsum::fourier::fourier_dft;
use crate::expsum::gauss::gauss_eps;
use crate::expsum::implicit::{implicit_solve, ImplicitSolution};
use crate::expsum::{guard, poly_exponentials, poly_sum, Kahan};
use crate::padic_core::{ceil_i64, e_frac, format_rational, iota_prime_int, Rational};
use crate::series::{PadicSeries, PhaseF, PhasePoly, SeriesClass};

#[derive(Clone, Debug)]
pub struct DualPhaseResult {
    /// The rescaled dual phase `f_ring(t) = f_breve(omega'^-1 t)`.
    pub dual: PhaseF,
    pub w_breve: i32,
    /// `None` when `u` is infinite.
    pub u_breve: Option<i64>,
    pub f_breve: PadicSeries,
    pub implicit: ImplicitSolution,
    pub eps: Complex64,
    /// `a` with `eps = eps(a, p^nu~)`, reduced mod `p^nu~`.
    pub a: u64,
    pub nu_tilde: u32,
    /// `f'(0) p^(-w)` reduced into `[0, p^(n-w))`.
    pub s0: u64,
    /// Whether `eps` was also confirmed against `e^_f(s0)` term by term.
    pub cross_checked: bool,
}

fn unmet(what: &str, detail: String) -> Error {
    Error::HypothesesUnmet(format!("{what} fails: {detail}"))
}

fn hypotheses(phi: &PhaseF) -> Result<()> {
    let p = phi.p;
    let ip = phi.iota_prime();
    let k = phi.kappa as i64;
    let nw = phi.n as i64 - phi.w as i64;
    if nw <= k + ip {
        return Err(unmet(
            "n - w > kappa + iota'",
            format!("n - w = {nw}, kappa + iota' = {}", k + ip),
        ));
    }
    if let Some(ufl) = phi.u_plus_floor_lambda() {
        if ufl <= k + ip {
            return Err(unmet(
                "u + floor(lambda) > kappa + iota'",
                format!("u + floor(lambda) = {ufl}, kappa + iota' = {}", k + ip),
            ));
        }
    }
    let lt = phi.lambda_tilde();
    if !lt.is_positive() {
        return Err(unmet(
            "lambda~ = min(kappa - rho_p(y), lambda) > 0",
            format!("lambda~ = {}", format_rational(&lt)),
        ));
    }
    // side conditions for p = 2, 3, in their sufficient form
    let k_min = 1 + iota_prime_int(p, 4);
    if k < k_min {
        return Err(unmet(
            "kappa >= 1 + iota'(4)",
            format!("kappa = {k}, 1 + iota'(4) = {k_min}"),
        ));
    }
    let nw_min = ip + k + iota_prime_int(p, 12);
    if nw <= nw_min {
        return Err(unmet(
            "n - w > iota' + kappa + iota'(12)",
            format!("n - w = {nw}, iota' + kappa + iota'(12) = {nw_min}"),
        ));
    }
    Ok(())
}

/// Computes the dual phase, certifies it against the composition
/// `f(f~(t)) - ...` modulo `p^n`, and determines `eps`.
pub fn dual_phase(phi: &PhaseF) -> Result<DualPhaseResult> {
    hypotheses(phi)?;
    let sol = implicit_solve(phi)?;
    let (p, prec, n) = (phi.p, phi.prec, phi.n);
    let ctx = phi.modulus();
    let ip = phi.iota_prime();
    let k = phi.kappa as i64;
    let e = (ip + k) as u32;

    // f_breve by composition
    let (f, _) = phi.reconstruct()?;
    let ft = sol.f_tilde.with_shift(0)?;
    let lin = PadicSeries::new(
        p,
        prec,
        0,
        vec![
            ctx.add(sol.g_tilde0, phi.omega_p),
            ctx.mul(phi.omega_p, ctx.p_pow(e)),
        ],
        None,
    )?;
    let f_breve = f.compose(&ft)?.sub(&lin.mul(&ft)?.mul_p_pow(phi.w))?;
    let wp_inv = ctx
        .inv(phi.omega_p)
        .ok_or_else(|| Error::NonInvertible("omega'".into()))?;
    let w_inv = ctx
        .inv(phi.omega)
        .ok_or_else(|| Error::NonInvertible("omega".into()))?;
    let f_ring = f_breve.scale_arg(wp_inv);

    // f_breve' / p^(w + iota' + kappa) must lie in t I0[lambda~]
    let lt = sol.lambda_tilde.clone();
    let fd = f_breve
        .derivative()
        .renormalize_to(phi.w + e as i32)
        .map_err(|err| unmet("f_breve' in p^(w+iota'+kappa) I0", err.to_string()))?
        .mul_p_pow(-(phi.w + e as i32));
    let rep = fd.class_check(&SeriesClass::I0n { lambda: lt.clone() });
    if !rep.ok {
        return Err(unmet(
            "f_breve' in p^(w+iota'+kappa) t I0[lambda~]",
            format!("{:?}", rep.first_failure),
        ));
    }

    // the dual as a class-F phase
    let ord_y = phi.ord_y();
    let mut dual = PhaseF::pure(
        p,
        n,
        phi.w + ord_y as i32,
        Rational::one() / &phi.y,
        phi.kappa,
        wp_inv,
        ctx.neg(w_inv),
    )?;
    dual.prec = prec;
    dual.gamma0 = w_inv;
    if let Some(u) = phi.u {
        let cl = ceil_i64(&lt);
        let u_breve = u + phi.floor_lambda().unwrap_or(0) - cl - ord_y;
        let g_breve = sol.g_tilde.scale_arg(wp_inv).mul_p_pow(cl as i32).neg();
        let g_breve = g_breve.with_shift(0)?;
        dual = dual.with_perturbation(w_inv, u_breve, lt.clone(), g_breve)?;
    }
    dual.validate()?;
    let from_class = PhasePoly::from_series(&dual.reconstruct()?.0, n)?;
    let from_comp = PhasePoly::from_series(&f_ring, n)?;
    if from_class.coeffs != from_comp.coeffs {
        return Err(Error::Precision(format!(
            "dual phase does not match its class reconstruction mod {p}^{n}"
        )));
    }

    // eps from the quadratic coefficient
    let nw = n as i64 - phi.w as i64;
    let i2 = iota_prime_int(p, 2);
    let nu = (nw + ip + k - i2).rem_euclid(2);
    let nu_tilde = (nu + 2 * i2) as u32;
    let c2 = f.with_shift(0)?;
    let c2 = Rational::from_integer(c2.coeff(2).into());
    let scale = phi.w as i64 + k + ip - i2;
    let a_res = if nu_tilde == 0 {
        1
    } else {
        let big = crate::padic_core::Modulus::new(p, prec)?;
        let v = big.reduce(&c2)?;
        let pv = p.pow(scale as u32);
        if v % pv != 0 {
            return Err(Error::Precision("t^2 coefficient of f has low order".into()));
        }
        (v / pv) % p.pow(nu_tilde)
    };
    let eps = gauss_eps(a_res as i128, p, nu_tilde)?;

    let per = p.pow(nw as u32);
    let s0 = phi.derivative_unit()?.with_shift(0)?.coeff(0) % per;
    let mut cross_checked = false;
    if per <= super::BRUTE_FORCE_GUARD {
        let lin = PadicSeries::new(p, prec, 0, vec![0, s0], None)?;
        let fs = phi.phase_unit()?.sub(&lin)?;
        let direct = poly_sum(&PhasePoly::from_series(&fs, nw as u32)?, 0, per);
        let predicted = eps * (p as f64).powf((nw + ip + k) as f64 / 2.0);
        if (direct - predicted).norm() > 1e-6 * predicted.norm().max(1.0) {
            return Err(Error::SignMismatch(format!(
                "e^(s0) = {direct:.6} but eps p^((n-w+iota'+kappa)/2) = {predicted:.6}"
            )));
        }
        cross_checked = true;
    }
    Ok(DualPhaseResult {
        w_breve: dual.w,
        u_breve: dual.u,
        dual,
        f_breve,
        implicit: sol,
        eps,
        a: a_res,
        nu_tilde,
        s0,
        cross_checked,
    })
}

/// Every transform value `e^_f(s)` from a forward FFT, compared with the
/// dual phase prediction.
#[derive(Clone, Debug)]
pub struct DftCheck {
    pub values: u64,
    /// Values on the progression `s = s0 mod p^(iota'+kappa)`.
    pub on_support: u64,
    /// Largest `|e^_f(s)|` off the progression.
    pub max_off_support: f64,
    /// Largest `|e^_f(s) - eps p^((n-w+iota'+kappa)/2) e(f_ring(t)/p^n)|` on it.
    pub max_mismatch: f64,
    pub dual: DualPhaseResult,
}

pub fn dft_dual_check(phi: &PhaseF) -> Result<DftCheck> {
    let d = dual_phase(phi)?;
    let e = fourier_dft(phi)?;
    let p = phi.p;
    let nw = phi.n - phi.w as u32;
    let per = p.pow(nw);
    let ek = (phi.iota_prime() + phi.kappa as i64) as u32;
    let step = p.pow(ek);
    let mag = (p as f64).powf((nw + ek) as f64 / 2.0);
    let dpoly = d.dual.poly()?;
    let pn = p.pow(phi.n);
    let (mut on, mut off_max, mut mis) = (0u64, 0f64, 0f64);
    for (s, z) in e.iter().enumerate() {
        let off = (s as u64 + per - d.s0) % per;
        if !off.is_multiple_of(step) {
            off_max = off_max.max(z.norm());
            continue;
        }
        on += 1;
        let want = d.eps * mag * e_frac(dpoly.eval((off / step) as i128), pn);
        mis = mis.max((z - want).norm());
    }
    Ok(DftCheck {
        values: e.len() as u64,
        on_support: on,
        max_off_support: off_max,
        max_mismatch: mis,
        dual: d,
    })
}

/// Smooth weight `h` in `sum e(f(m)/p^n) h(m/B)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Cutoff {
    /// `exp(-pi x^2)`, its own transform; both sides are truncated where it
    /// drops below `1e-18`.
    Gaussian,
    /// `exp(-1/(1 - x^2))` on `(-1, 1)`. Its transform is computed by
    /// quadrature and summed for `|xi| <= xi_max`.
    Bump { xi_max: f64 },
}

/// `x` with `exp(-pi x^2) = 1e-18`.
pub fn gaussian_cutoff() -> f64 {
    (18.0 * std::f64::consts::LN_10 / PI).sqrt()
}

impl Cutoff {
    fn h(&self, x: f64) -> f64 {
        match self {
            Cutoff::Gaussian => (-PI * x * x).exp(),
            Cutoff::Bump { .. } => bump(x),
        }
    }

    /// `(h^(xi), quadrature error estimate)`.
    fn h_hat(&self, xi: f64) -> (f64, f64) {
        match self {
            Cutoff::Gaussian => ((-PI * xi * xi).exp(), 0.0),
            Cutoff::Bump { .. } => {
                let n = 256 + 32 * xi.abs().ceil() as usize;
                let fine = bump_hat(xi, 2 * n);
                (fine, (fine - bump_hat(xi, n)).abs())
            }
        }
    }

    fn support(&self) -> f64 {
        match self {
            Cutoff::Gaussian => gaussian_cutoff(),
            Cutoff::Bump { .. } => 1.0,
        }
    }

    fn xi_max(&self) -> f64 {
        match self {
            Cutoff::Gaussian => gaussian_cutoff(),
            Cutoff::Bump { xi_max } => *xi_max,
        }
    }
}

fn bump(x: f64) -> f64 {
    if x.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - x * x)).exp()
    }
}

/// `2 int_0^1 bump(x) cos(2 pi x xi) dx` by the trapezoid rule, which
/// converges faster than any power for a function flat at both ends.
fn bump_hat(xi: f64, n: usize) -> f64 {
    let h = 1.0 / n as f64;
    let mut s = 0.5 * bump(0.0);
    for i in 1..n {
        let x = i as f64 * h;
        s += bump(x) * (2.0 * PI * x * xi).cos();
    }
    2.0 * s * h
}

#[derive(Clone, Debug)]
pub struct SummationResult {
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub rel_error: f64,
    pub lhs_terms: u64,
    pub rhs_terms: u64,
    /// Bound on truncation plus quadrature error of the right side.
    pub error_estimate: f64,
    pub dual: DualPhaseResult,
}

/// Both sides of
/// `sum_m e(f(m)/p^n) h(m/B) =
///  eps B p^(-(n-w-iota'-kappa)/2) sum_t e(f_ring(t)/p^n) h^(-B (t + s0 p^(-iota'-kappa)) / Q)`
/// with `Q = p^(n-w-iota'-kappa)`.
pub fn summation_formula(phi: &PhaseF, b: f64, cutoff: Cutoff) -> Result<SummationResult> {
    if !(b >= 1.0) {
        return Err(Error::BadParameter(format!("B = {b} must be at least 1")));
    }
    let dual = dual_phase(phi)?;
    let p = phi.p;
    let ip = phi.iota_prime();
    let k = phi.kappa as i64;
    let nw = phi.n as i64 - phi.w as i64;
    let q = (p as f64).powi((nw - ip - k) as i32);
    let pe = (p as f64).powi((ip + k) as i32);

    // left side
    let mmax = (cutoff.support() * b).floor() as i128;
    let lhs_terms = (2 * mmax + 1) as u64;
    guard(lhs_terms, "summation_formula (left side)")?;
    let poly = phi.poly()?;
    let lhs = poly_exponentials(&poly, -mmax, lhs_terms)
        .into_iter()
        .enumerate()
        .map(|(i, z)| z * cutoff.h((i as i128 - mmax) as f64 / b))
        .collect::<Kahan>()
        .value();

    // right side
    let shift = dual.s0 as f64 / pe;
    let span = cutoff.xi_max() * q / b;
    let t_lo = (-span - shift).floor() as i128;
    let t_hi = (span - shift).ceil() as i128;
    let rhs_terms = (t_hi - t_lo + 1) as u64;
    guard(rhs_terms, "summation_formula (right side)")?;
    let dpoly = dual.dual.poly()?;
    let mut err = 0.0;
    let mut acc = Kahan::default();
    for (i, z) in poly_exponentials(&dpoly, t_lo, rhs_terms).into_iter().enumerate() {
        let t = (t_lo + i as i128) as f64;
        let (hh, e) = cutoff.h_hat(-b * (t + shift) / q);
        err += e;
        acc.add(z * hh);
    }
    let pref = b / (p as f64).powf((nw - ip - k) as f64 / 2.0);
    let rhs = dual.eps * acc.value() * pref;
    let tail = match cutoff {
        Cutoff::Gaussian => 1e-18 * (2.0 + q / b),
        Cutoff::Bump { xi_max } => bump_tail(xi_max) * (2.0 + q / b),
    };
    let error_estimate = pref * (err + tail);
    let rel_error = (lhs - rhs).norm() / lhs.norm().max(1.0);
    Ok(SummationResult {
        lhs,
        rhs,
        rel_error,
        lhs_terms,
        rhs_terms,
        error_estimate,
        dual,
    })
}

/// Rough bound on `sum_{|xi| > X} |bump^(xi)|` from the asymptotic
/// `|bump^(xi)| <~ exp(-2 sqrt(pi |xi|))`.
fn bump_tail(x: f64) -> f64 {
    let c = 2.0 * PI.sqrt();
    // int_X^inf exp(-c sqrt(s)) ds = 2 exp(-c sqrt X)(sqrt X / c + 1/c^2)
    4.0 * (-c * x.sqrt()).exp() * (x.sqrt() / c + 1.0 / (c * c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic_core::rat;

    fn check_against_dft(phi: &PhaseF) -> DualPhaseResult {
        let c = dft_dual_check(phi).unwrap();
        assert!(c.max_off_support < 1e-8 && c.max_mismatch < 1e-8, "{c:?}");
        c.dual
    }

    #[test]
    fn log_phase_dual() {
        let phi = PhaseF::log_phase(5, 7, 1, 2, 3).unwrap();
        let d = check_against_dft(&phi);
        assert!(d.cross_checked);
        assert_eq!(d.dual.w, 1);
        assert_eq!(d.dual.y, rat(1, 1));
    }

    #[test]
    fn square_root_phase_dual() {
        let phi = PhaseF::salie_phase(7, 6, 1, 2, 1).unwrap();
        check_against_dft(&phi);
    }

    #[test]
    fn perturbed_phase_dual() {
        let g = PadicSeries::polynomial(7, 14, &[3, 7, 49 * 2]).unwrap();
        let phi = PhaseF::pure(7, 7, 1, rat(1, 2), 2, 3, 5)
            .unwrap()
            .with_perturbation(4, 2, rat(1, 1), g)
            .unwrap();
        let d = check_against_dft(&phi);
        // u + floor(lambda) - ceil(lambda~) - ord y with lambda~ = 1
        assert_eq!(d.u_breve, Some(2 + 1 - 1));
        assert_eq!(d.w_breve, 1);
    }

    #[test]
    fn y_with_positive_order() {
        let phi = PhaseF::pure(3, 9, 1, rat(3, 1), 2, 2, 1).unwrap();
        let d = check_against_dft(&phi);
        assert_eq!(d.dual.w, 2);
        assert_eq!(d.dual.y, rat(1, 3));
    }

    #[test]
    fn two_adic_dual() {
        for (om, omp) in [(1, 3), (3, 1), (5, 7), (1, 1)] {
            let phi = PhaseF::pure(2, 12, 0, rat(1, 1), 3, om, omp).unwrap();
            check_against_dft(&phi);
            let phi = PhaseF::pure(2, 13, 0, rat(1, 1), 3, om, omp).unwrap();
            check_against_dft(&phi);
        }
    }

    #[test]
    fn hypothesis_messages_name_the_inequality() {
        let phi = PhaseF::log_phase(5, 3, 2, 1, 1).unwrap();
        match dual_phase(&phi) {
            Err(Error::HypothesesUnmet(m)) => assert!(m.contains("n - w > kappa + iota'"), "{m}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn gaussian_summation_formula() {
        let cases = [
            (PhaseF::log_phase(5, 8, 1, 2, 3).unwrap(), 125.0),
            (PhaseF::log_phase(5, 8, 1, 2, 3).unwrap(), 1.0),
            (PhaseF::log_phase(5, 7, 1, 2, 3).unwrap(), 57.5),
            (PhaseF::salie_phase(7, 7, 1, 2, 1).unwrap(), 49.0),
        ];
        for (phi, b) in cases {
            let r = summation_formula(&phi, b, Cutoff::Gaussian).unwrap();
            assert!(r.rel_error < 1e-8, "B = {b}: {} vs {}", r.lhs, r.rhs);
        }
    }

    #[test]
    fn bump_summation_formula() {
        let phi = PhaseF::salie_phase(7, 6, 1, 2, -1).unwrap();
        let r = summation_formula(&phi, 60.0, Cutoff::Bump { xi_max: 60.0 }).unwrap();
        let abs_err = (r.lhs - r.rhs).norm();
        assert!(abs_err <= r.error_estimate, "{abs_err} > {}", r.error_estimate);
        assert!(r.rel_error < 1e-8);
    }
}
