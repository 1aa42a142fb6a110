//! Weyl differencing: the inequality bounding `|S|^2` by differenced sums,
//! and the class of the differenced phase `f(t + p^chi h) - f(t)`.

use num_complex::Complex64;
use num_traits::One;

use crate::error::{Error, Result};
use crate::expsum::{guard, poly_exponentials, poly_sum, Kahan};
use crate::padic_core::{
    eps, floor_i64, format_rational, iota_prime_int, ord_rational, rat_int, rho, unit_of,
    Modulus, Rational,
};
use crate::series::{PadicSeries, PhaseF, PhasePoly, SeriesClass};

#[derive(Clone, Debug)]
pub struct WeylDifference {
    /// The differenced phase normalised to vanish at 0.
    pub phase: PhaseF,
    /// `f_{chi,h}(0)` mod `p^n`; `f_{chi,h} = constant + phase`.
    pub constant: u64,
    /// `g1` with `f_{chi,h} = p^chi h f' + p^(2 chi + w) g1`.
    pub g1: PadicSeries,
    pub lambda_tilde: Rational,
    pub mu: i64,
    pub chi: u32,
    pub h: i128,
}

/// `min(kappa - eps~(y) rho_p, lambda)` with `eps~(y) = [ord y < 0]`.
fn lambda_tilde_a(phi: &PhaseF) -> Rational {
    let neg = ord_rational(phi.p, &phi.y).is_some_and(|v| v < 0);
    let mut lt = rat_int(phi.kappa as i64);
    if neg {
        lt -= rho(phi.p);
    }
    match &phi.lambda {
        Some(l) if *l < lt => l.clone(),
        _ => lt,
    }
}

/// Differences `phi` by `p^chi h` and certifies the resulting class.
pub fn weyl_difference(phi: &PhaseF, chi: u32, h: i128) -> Result<WeylDifference> {
    let p = phi.p;
    if h.rem_euclid(p as i128) == 0 {
        return Err(Error::BadParameter(format!("h = {h} must be a unit")));
    }
    let k = phi.kappa as i64;
    let ip = phi.iota_prime();
    if let Some(ufl) = phi.u_plus_floor_lambda() {
        if ufl <= k + ip {
            return Err(Error::HypothesesUnmet(format!(
                "u > kappa - floor(lambda) + iota' fails: u + floor(lambda) = {ufl}, \
                 kappa + iota' = {}",
                k + ip
            )));
        }
    }
    if let Some(l) = &phi.lambda {
        if l + rat_int(chi as i64) <= rho(p) {
            return Err(Error::HypothesesUnmet(format!(
                "lambda + chi > rho_p fails: lambda = {}, chi = {chi}",
                format_rational(l)
            )));
        }
    }
    let neg = ord_rational(p, &phi.y).is_some_and(|v| v < 0);
    let lt = lambda_tilde_a(phi);
    let i2 = iota_prime_int(p, 2);
    let mu = {
        let a = 2 * k + ip - i2 - i64::from(neg);
        match (phi.u, &phi.lambda) {
            (Some(u), Some(l)) => a.min(u + floor_i64(&(l * rat_int(2) - rho(p)))),
            _ => a,
        }
    };

    let (f, fp) = phi.reconstruct()?;
    let ctx = f.modulus();
    let hh = ctx.from_i128(h);
    let delta = ctx.mul(ctx.p_pow(chi), hh);
    let f_diff = f.translate(delta).sub(&f)?;

    // g1 = p^-w sum_{r >= 2} p^((r-2) chi) h^r f^(r)/r!
    let mut acc = PadicSeries::zero(p, f.precision())?.mul_p_pow(f.shift());
    let mut hr = ctx.mul(hh, hh);
    for r in 2..f.coeffs().len() {
        let term = f
            .taylor_coeff(r)
            .scale(hr)
            .mul_p_pow(((r - 2) as u32 * chi) as i32);
        acc = acc.add(&term)?;
        hr = ctx.mul(hr, hh);
    }
    let g1 = acc.mul_p_pow(-phi.w);

    // identity f_diff - p^chi h f' - p^(2 chi + w) g1 = 0
    let resid = f_diff
        .sub(&fp.scale(hh).mul_p_pow(chi as i32))?
        .sub(&g1.mul_p_pow(2 * chi as i32 + phi.w))?;
    if let Some(v) = resid.min_coeff_ord() {
        return Err(Error::Precision(format!(
            "differencing identity fails at order {}",
            v as i64 + resid.shift() as i64
        )));
    }

    let class = SeriesClass::I0 { lambda: lt.clone() };
    let rep = g1.class_check(&class);
    if !rep.ok {
        return Err(Error::HypothesesUnmet(format!(
            "g1 not in I0[{}]: {:?}",
            format_rational(&lt),
            rep.first_failure
        )));
    }
    let g1d = g1.derivative();
    if !g1d.is_zero() {
        let rep = g1d
            .renormalize_to(mu as i32)
            .map(|s| s.mul_p_pow(-(mu as i32)))
            .map(|s| s.class_check(&class));
        match rep {
            Ok(r) if r.ok => {}
            other => {
                return Err(Error::HypothesesUnmet(format!(
                    "g1' not in p^{mu} I0[{}]: {other:?}",
                    format_rational(&lt)
                )))
            }
        }
    }

    // parameters of the differenced class
    let w_new = phi.w + (chi as i64 + k + ip) as i32;
    let y_new = &phi.y + Rational::one();
    let u_a = phi.u_plus_floor_lambda().map(|v| v - k - ip);
    let u_b = chi as i64 + k - i2 - eps(p, &phi.y);
    let u_new = u_a.map_or(u_b, |a| a.min(u_b));
    if u_new < 1 {
        return Err(Error::HypothesesUnmet(format!(
            "differenced class has u = {u_new} < 1; increase chi"
        )));
    }
    let uy = ctx.reduce(&unit_of(p, &phi.y))?;
    let omega_p_new = ctx.neg(ctx.mul(ctx.mul(phi.omega, phi.omega_p), ctx.mul(uy, hh)));
    let d_new = f_diff
        .derivative()
        .renormalize_to(w_new)
        .map_err(|e| Error::HypothesesUnmet(format!("f_diff' not divisible by p^{w_new}: {e}")))?
        .mul_p_pow(-w_new);
    let prec = d_new.precision();
    let cm = Modulus::new(p, prec)?;
    let mut new = PhaseF {
        p,
        n: phi.n,
        prec,
        w: w_new,
        y: y_new,
        kappa: phi.kappa,
        lambda: Some(lt.clone()),
        u: Some(u_new),
        omega: phi.omega % cm.m,
        omega_p: omega_p_new % cm.m,
        gamma0: 0,
        g: Some(PadicSeries::zero(p, prec)?),
    };
    let g_new = new.certify_derivative(&d_new)?.expect("finite u");
    new.g = Some(g_new);
    new.validate()?;

    // the class reconstruction must reproduce f_diff mod p^n up to f_diff(0)
    let n = phi.n;
    let md = Modulus::new(p, n)?;
    let from_diff = PhasePoly::from_series(&f_diff, n)?;
    let constant = from_diff.coeffs.first().copied().unwrap_or(0);
    let from_class = PhasePoly::from_series(&new.reconstruct()?.0, n)?;
    let deg = from_diff.coeffs.len().max(from_class.coeffs.len());
    let get = |v: &Vec<u64>, i: usize| v.get(i).copied().unwrap_or(0);
    for i in 1..deg {
        if get(&from_diff.coeffs, i) != get(&from_class.coeffs, i) {
            return Err(Error::Precision(format!(
                "differenced phase and its class disagree at t^{i} mod {p}^{n}"
            )));
        }
    }
    Ok(WeylDifference {
        phase: new,
        constant: constant % md.m,
        g1,
        lambda_tilde: lt,
        mu,
        chi,
        h,
    })
}

#[derive(Clone, Debug)]
pub struct WeylReport {
    pub s: Complex64,
    pub b: u64,
    pub h_step: u64,
    /// `(h, |J(h)|, inner sum)` for `0 < |h| < B/H`.
    pub inner: Vec<(i64, u64, Complex64)>,
    /// `B H + H sum |inner|`.
    pub rhs: f64,
    /// `|S|^2 / rhs`.
    pub c_obs: f64,
    /// Inner sums that were recomputed through [`weyl_difference`].
    pub differenced_checked: usize,
}

/// Brute-forces both sides of
/// `|S|^2 << B H + H sum_{0<|h|<B/H} |sum_{m in J(h)} e((f(m + hH) - f(m))/p^n)|`
/// for `S = sum_{M<m<=M+B} e(f(m)/p^n)`, with `J(h)` the set of `m` for
/// which both `m` and `m + hH` lie in `(M, M + B]`.
pub fn weyl_inequality_report(phi: &PhaseF, m: i128, b: u64, hstep: u64) -> Result<WeylReport> {
    if hstep == 0 || hstep > b {
        return Err(Error::BadParameter(format!("need 0 < H <= B, got H = {hstep}, B = {b}")));
    }
    let p = phi.p;
    let mut chi = 0u32;
    let mut x = hstep;
    while x.is_multiple_of(p) {
        x /= p;
        chi += 1;
    }
    if x != 1 {
        return Err(Error::BadParameter(format!("H = {hstep} is not a power of {p}")));
    }
    let hmax = ((b - 1) / hstep) as i64;
    let work: u64 = (1..=hmax as u64).map(|h| 2 * (b - h * hstep)).sum::<u64>() + b;
    guard(work, "weyl_inequality_report")?;

    let poly = phi.poly()?;
    let s = poly_sum(&poly, m + 1, b);
    let vals = poly_exponentials(&poly, m + 1, b);
    let (lo, hi) = (m, m + b as i128);
    let mut inner = Vec::new();
    let mut checked = 0;
    for h in (-hmax..=hmax).filter(|&h| h != 0) {
        let shift = h as i128 * hstep as i128;
        let j_lo = lo.max(lo - shift);
        let j_hi = (hi - shift).min(hi);
        let len = (j_hi - j_lo).max(0) as u64;
        if len != b - h.unsigned_abs() * hstep {
            return Err(Error::Mismatch(format!(
                "|J({h})| = {len} but B - |h| H = {}",
                b - h.unsigned_abs() * hstep
            )));
        }
        // J(h) is the intersection of (M, M+B] with (M - hH, M + B - hH]
        debug_assert!(j_lo >= lo && j_hi <= hi && j_lo >= lo - shift && j_hi <= hi - shift);
        let z: Complex64 = (j_lo + 1..=j_hi)
            .map(|mm| {
                let a = vals[(mm + shift - lo - 1) as usize];
                let c = vals[(mm - lo - 1) as usize].conj();
                a * c
            })
            .collect::<Kahan>()
            .value();
        if h.rem_euclid(p as i64) != 0 {
            if let Ok(wd) = weyl_difference(phi, chi, h as i128) {
                let dp = wd.phase.poly()?;
                let c = crate::padic_core::e_frac(wd.constant, dp.ctx.m);
                let alt = c * poly_sum(&dp, j_lo + 1, len);
                if (alt - z).norm() > 1e-9 * (len as f64).max(1.0) {
                    return Err(Error::Mismatch(format!(
                        "differenced phase sum {alt} differs from direct {z} at h = {h}"
                    )));
                }
                checked += 1;
            }
        }
        inner.push((h, len, z));
    }
    let hf = hstep as f64;
    let rhs = b as f64 * hf + hf * inner.iter().map(|x| x.2.norm()).sum::<f64>();
    Ok(WeylReport {
        s,
        b,
        h_step: hstep,
        c_obs: s.norm_sqr() / rhs,
        rhs,
        inner,
        differenced_checked: checked,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic_core::{e_phase, rat};

    #[test]
    fn value_at_zero() {
        let phi = PhaseF::log_phase(5, 8, 1, 2, 3).unwrap();
        let wd = weyl_difference(&phi, 1, 2).unwrap();
        let poly = phi.poly().unwrap();
        let want = (poly.eval(10) as i128 - poly.eval(0) as i128).rem_euclid(5i128.pow(8));
        assert_eq!(wd.constant as i128, want);
    }

    #[test]
    fn log_phase_class() {
        let (p, c, a0) = (7u64, 3u64, 2u64);
        let phi = PhaseF::log_phase(p, 8, 1, c, a0).unwrap();
        let wd = weyl_difference(&phi, 1, 1).unwrap();
        assert_eq!(wd.phase.y, rat(2, 1));
        assert_eq!(wd.phase.w, 1 + 1 + 1);
        // omega' = omega omega' (-1) h = -a0 c'^2
        let ctx = wd.phase.modulus();
        let cp = ctx.inv(c).unwrap();
        assert_eq!(wd.phase.omega_p, ctx.neg(ctx.mul(a0, ctx.mul(cp, cp))));
    }

    #[test]
    fn differenced_sum_matches_direct() {
        // oracle: sum of e((f(m + p^chi h) - f(m))/p^n) term by term
        let g = PadicSeries::polynomial(5, 16, &[1, 5, 50]).unwrap();
        let phi = PhaseF::pure(5, 8, 1, rat(1, 2), 2, 2, 3)
            .unwrap()
            .with_perturbation(1, 2, rat(1, 1), g)
            .unwrap();
        let poly = phi.poly().unwrap();
        for (chi, h) in [(0u32, 1i128), (1, 2), (2, -3)] {
            let wd = weyl_difference(&phi, chi, h).unwrap();
            let d = 5i128.pow(chi) * h;
            let direct: Complex64 = (-40..300)
                .map(|m| e_phase(poly.eval(m + d) as i128 - poly.eval(m) as i128, 5, 8))
                .sum();
            let dp = wd.phase.poly().unwrap();
            let via: Complex64 = (-40..300)
                .map(|m| e_phase(dp.eval(m) as i128 + wd.constant as i128, 5, 8))
                .sum();
            assert!((direct - via).norm() < 1e-9, "chi = {chi}, h = {h}");
        }
    }

    #[test]
    fn negative_order_y() {
        let phi = PhaseF::pure(3, 10, 2, rat(1, 3), 2, 1, 2).unwrap();
        let wd = weyl_difference(&phi, 1, 1).unwrap();
        assert_eq!(wd.phase.y, rat(4, 3));
        assert!(wd.mu >= 1);
    }

    #[test]
    fn j_lengths_and_trivial_cases() {
        let phi = PhaseF::log_phase(5, 7, 1, 1, 2).unwrap();
        let r = weyl_inequality_report(&phi, 3, 200, 5).unwrap();
        for &(h, len, _) in &r.inner {
            assert_eq!(len, 200 - h.unsigned_abs() * 5);
        }
        assert!(r.differenced_checked > 0);
        let r = weyl_inequality_report(&phi, 0, 25, 25).unwrap();
        assert!(r.inner.is_empty());
        let r = weyl_inequality_report(&phi, 0, 1, 1).unwrap();
        assert!((r.c_obs - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_power_h() {
        let phi = PhaseF::log_phase(5, 7, 1, 1, 2).unwrap();
        assert!(weyl_inequality_report(&phi, 0, 100, 6).is_err());
    }
}
