//! The inverse function of `f'`: a series `f~` with
//! `f'(f~(t)) p^(-w) = g~0 + omega' (1 + p^(iota' + kappa) t)`.

use crate::error::{Error, Result};
use crate::padic_core::{format_rational, Rational};
use crate::series::{pow_series_scaled, PadicSeries, PhaseF, SeriesClass};
use num_traits::Signed;

#[derive(Clone, Debug)]
pub struct ImplicitSolution {
    pub f_tilde: PadicSeries,
    /// The solution for `g = 0`.
    pub f_tilde0: PadicSeries,
    /// `(f~ - f~0) / p^(u' - iota')`, zero when `u` is infinite.
    pub g_tilde: PadicSeries,
    pub g_tilde0: u64,
    pub lambda_tilde: Rational,
    /// `u' = u + floor(lambda) - kappa`.
    pub u_prime: Option<i64>,
    pub iterations: usize,
}

fn hypotheses(phi: &PhaseF) -> Result<()> {
    let lt = phi.lambda_tilde();
    if !lt.is_positive() {
        return Err(Error::HypothesesUnmet(format!(
            "implicit function hypotheses unmet: lambda~ = min(kappa - rho_p(y), lambda) = {} is not positive",
            format_rational(&lt)
        )));
    }
    if let Some(ufl) = phi.u_plus_floor_lambda() {
        if ufl <= phi.kappa as i64 + phi.iota_prime() {
            return Err(Error::HypothesesUnmet(format!(
                "implicit function hypotheses unmet: u > kappa - floor(lambda) + iota' fails: u + floor(lambda) = {ufl}, \
                 kappa + iota' = {}",
                phi.kappa as i64 + phi.iota_prime()
            )));
        }
    }
    Ok(())
}

/// Solves for `f~` by the contraction
/// `f~ = omega^-1 P(t - p^(u - kappa - iota') omega'^-1 (g(f~) - g(0)))`,
/// where `P(Z) = ((1 + p^(iota' + kappa) Z)^(-1/y) - 1) / p^(iota + kappa)`.
pub fn implicit_solve(phi: &PhaseF) -> Result<ImplicitSolution> {
    phi.validate()?;
    hypotheses(phi)?;
    let (p, prec) = (phi.p, phi.prec);
    let ctx = phi.modulus();
    let ip = phi.iota_prime() as u32;
    let kappa = phi.kappa;
    let e = ip + kappa;
    let d = phi.iota() as u32 + kappa;
    let inv_y = Rational::from_integer(1.into()) / &phi.y;
    let pw = pow_series_scaled(p, &-inv_y, e, d, 1, prec)?;
    let w_inv = ctx
        .inv(phi.omega)
        .ok_or_else(|| Error::NonInvertible("omega".into()))?;
    let wp_inv = ctx
        .inv(phi.omega_p)
        .ok_or_else(|| Error::NonInvertible("omega'".into()))?;
    let t = PadicSeries::t(p, prec)?;
    let f0 = pw.compose(&t)?.scale(w_inv);
    let lambda_tilde = phi.lambda_tilde();
    let d0 = phi.derivative_unit()?.with_shift(0)?.coeff(0) % ctx.m;
    let g_tilde0 = ctx.sub(d0, phi.omega_p);

    let (f, iterations) = match (&phi.g, phi.u) {
        (Some(g), Some(u)) => {
            let gc = PadicSeries::new(p, g.precision(), g.shift(), vec![g.coeff(0)], None)?;
            let g1 = g.sub(&gc)?;
            let u_prime = u + phi.floor_lambda().expect("finite u has finite lambda") - kappa as i64;
            let gain = u_prime - ip as i64;
            let max_iter = (prec as i64).div_euclid(gain) as usize + 3;
            let mut f = f0.clone();
            let mut it = 0;
            loop {
                if it >= max_iter {
                    return Err(Error::NoConvergence(format!(
                        "implicit solve: {max_iter} iterations without a fixed point"
                    )));
                }
                it += 1;
                let corr = g1
                    .compose(&f)?
                    .mul_p_pow((u - kappa as i64 - ip as i64) as i32)
                    .scale(wp_inv);
                let z = t.sub(&corr)?;
                let next = pw.compose(&z)?.scale(w_inv);
                let same = next.sub(&f)?.is_zero();
                f = next;
                if same {
                    break;
                }
            }
            (f, it)
        }
        _ => (f0.clone(), 0),
    };

    let u_prime = phi
        .u
        .map(|u| u + phi.floor_lambda().unwrap_or(0) - kappa as i64);
    let g_tilde = match u_prime {
        Some(up) => {
            let diff = f.sub(&f0)?;
            let s = (up - ip as i64) as i32;
            if diff.is_zero() {
                PadicSeries::zero(p, diff.precision())?
            } else {
                diff.with_shift(0)?.renormalize_to(s)?.mul_p_pow(-s)
            }
        }
        None => PadicSeries::zero(p, prec)?,
    };

    for (name, s) in [("f~", &f), ("g~", &g_tilde)] {
        let rep = s.class_check(&SeriesClass::I0n {
            lambda: lambda_tilde.clone(),
        });
        if !rep.ok {
            return Err(Error::HypothesesUnmet(format!(
                "{name} is not in t I0[{}]: {:?}",
                format_rational(&lambda_tilde),
                rep.first_failure
            )));
        }
    }
    let sol = ImplicitSolution {
        f_tilde: f,
        f_tilde0: f0,
        g_tilde,
        g_tilde0,
        lambda_tilde,
        u_prime,
        iterations,
    };
    verify(phi, &sol)?;
    Ok(sol)
}

/// Number of points at which the defining congruence is checked.
pub const CHECK_POINTS: usize = 50;

/// Checks the defining congruence modulo `p^n` at [`CHECK_POINTS`]
/// pseudo-random integers (a fixed linear congruential walk).
fn verify(phi: &PhaseF, sol: &ImplicitSolution) -> Result<()> {
    let ctx = phi.modulus();
    let dser = phi.derivative_unit()?.with_shift(0)?;
    let f = sol.f_tilde.with_shift(0)?;
    let q = phi.p.pow(phi.n.min(ctx.n));
    let pe = ctx.p_pow((phi.iota_prime() + phi.kappa as i64) as u32);
    let mut t = 0u64;
    for _ in 0..CHECK_POINTS {
        t = (t.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407) >> 1) % q;
        let x = f.eval_raw(t);
        let lhs = dser.eval_raw(x) % q;
        let rhs = ctx.add(sol.g_tilde0, ctx.mul(phi.omega_p, ctx.add(1, ctx.mul(pe, t)))) % q;
        if lhs != rhs {
            return Err(Error::Precision(format!(
                "implicit solution fails at t = {t}: {lhs} != {rhs} mod {q}"
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic_core::{rat, Modulus};

    #[test]
    fn closed_form_for_log_phase() {
        let (p, kappa) = (5u64, 2u32);
        let phi = PhaseF::log_phase(p, 8, kappa, 3, 1).unwrap();
        let s = implicit_solve(&phi).unwrap();
        let ctx = Modulus::new(p, s.f_tilde.precision()).unwrap();
        let f = s.f_tilde.with_shift(0).unwrap();
        let w_inv = ctx.inv(phi.omega % ctx.m).unwrap();
        let mpk = ctx.neg(ctx.p_pow(kappa));
        for k in 1..6 {
            let want = ctx.neg(ctx.mul(w_inv, ctx.pow(mpk, k as u64 - 1)));
            assert_eq!(f.coeff(k), want, "k = {k}");
        }
        assert!(s.g_tilde.is_zero());
    }

    // Oracle: for each t, find x mod p^m by exhaustion with
    // D(x) = target(t) mod p^(m + iota' + kappa).
    fn exhaustive_check(phi: &PhaseF, s: &ImplicitSolution, m: u32) {
        let p = phi.p;
        let ctx = phi.modulus();
        let dser = phi.derivative_unit().unwrap().with_shift(0).unwrap();
        let e = (phi.iota_prime() + phi.kappa as i64) as u32;
        let big = p.pow(m + e);
        let f = s.f_tilde.with_shift(0).unwrap();
        for t in [0u64, 3, 11, 40] {
            let target = ctx.add(
                s.g_tilde0,
                ctx.mul(phi.omega_p, ctx.add(1, ctx.mul(ctx.p_pow(e), t))),
            ) % big;
            let hits: Vec<u64> = (0..p.pow(m))
                .filter(|&x| dser.eval_raw(x) % big == target)
                .collect();
            assert_eq!(hits.len(), 1, "t = {t}");
            assert_eq!(f.eval_raw(t) % p.pow(m), hits[0], "t = {t}");
        }
    }

    #[test]
    fn perturbed_phase_matches_exhaustive_inverse() {
        let g = PadicSeries::polynomial(7, 14, &[3, 7, 49 * 2, 343]).unwrap();
        let phi = PhaseF::pure(7, 6, 1, rat(1, 2), 2, 3, 5)
            .unwrap()
            .with_perturbation(4, 2, rat(1, 1), g)
            .unwrap();
        let s = implicit_solve(&phi).unwrap();
        assert!(s.iterations >= 2);
        assert!(!s.g_tilde.is_zero());
        exhaustive_check(&phi, &s, 3);
    }

    #[test]
    fn y_divisible_by_p() {
        // ord y = 1 so iota' = 1
        let phi = PhaseF::pure(3, 7, 0, rat(3, 1), 2, 2, 1).unwrap();
        let s = implicit_solve(&phi).unwrap();
        exhaustive_check(&phi, &s, 3);
    }

    #[test]
    fn rejects_small_u() {
        let g = PadicSeries::polynomial(5, 14, &[0, 5]).unwrap();
        let phi = PhaseF::pure(5, 6, 1, rat(1, 1), 2, 1, 1)
            .unwrap()
            .with_perturbation(0, 1, rat(1, 1), g)
            .unwrap();
        match implicit_solve(&phi) {
            Err(Error::HypothesesUnmet(m)) => assert!(m.contains("u > kappa")),
            other => panic!("{other:?}"),
        }
    }
}
