//! Phases of class `F(w, y, kappa, lambda, u, omega, omega')`: series whose
//! derivative is
//!
//! ```text
//! f'(t) = p^w omega' (1 + p^(iota + kappa) omega t)^(-y) + p^w gamma0 + p^(u + w) g(t)
//! ```
//!
//! with `g` in `I0[lambda]`. [`PhaseF::reconstruct`] rebuilds `f` (with
//! `f(0) = 0`) and `f'` as series; [`PhasePoly`] turns `f` into an exact
//! polynomial modulo `p^n` for fast evaluation at integers.

use num_traits::{One, Signed};

use crate::error::{Error, Result};
use crate::padic_core::{
    ceil_i64, floor_i64, format_rational, iota, iota_prime, iota_prime_int, max_precision,
    ord_rational, rho_of, Modulus, Rational,
};
use crate::series::{pow_integral_series, pow_series, PadicSeries, SeriesClass};

/// Default guard digits on top of the modulus exponent.
pub const GUARD_DIGITS: u32 = 8;

/// Working precision for a phase evaluated modulo `p^n`.
pub fn default_precision(p: u64, n: u32) -> u32 {
    (n + GUARD_DIGITS).min(max_precision(p))
}

#[derive(Clone, Debug)]
pub struct PhaseF {
    pub p: u64,
    /// Modulus exponent of the sums `e(f(m)/p^n)`.
    pub n: u32,
    /// Residue precision of `omega`, `omega'`, `gamma0` and of `g`.
    pub prec: u32,
    pub w: i32,
    pub y: Rational,
    pub kappa: u32,
    /// `None` is `lambda = infinity`.
    pub lambda: Option<Rational>,
    /// `None` is `u = infinity`, which forces `g = 0`.
    pub u: Option<i64>,
    pub omega: u64,
    pub omega_p: u64,
    pub gamma0: u64,
    pub g: Option<PadicSeries>,
}

impl PhaseF {
    /// A phase with `g = 0`, `gamma0 = 0`, `lambda = u = infinity`.
    pub fn pure(
        p: u64,
        n: u32,
        w: i32,
        y: Rational,
        kappa: u32,
        omega: u64,
        omega_p: u64,
    ) -> Result<Self> {
        let prec = default_precision(p, n);
        let m = Modulus::new(p, prec)?.m;
        let phi = PhaseF {
            p,
            n,
            prec,
            w,
            y,
            kappa,
            lambda: None,
            u: None,
            omega: omega % m,
            omega_p: omega_p % m,
            gamma0: 0,
            g: None,
        };
        phi.validate()?;
        Ok(phi)
    }

    /// `a0 log(1 + p^kappa c' t)` with `c c' = 1`, which lies in
    /// `F(kappa, 1, kappa, inf, inf, c', a0 c')`.
    pub fn log_phase(p: u64, n: u32, kappa: u32, c: u64, a0: u64) -> Result<Self> {
        let ctx = Modulus::new(p, default_precision(p, n))?;
        let cp = ctx
            .inv(c % ctx.m)
            .ok_or_else(|| Error::NonInvertible(format!("c = {c}")))?;
        Self::pure(p, n, kappa as i32, Rational::one(), kappa, cp, ctx.mul(a0 % ctx.m, cp))
    }

    /// Square-root phase `2 l (1 + p^kappa c' t)^(1/2) - 2 l` with
    /// `l^2 = c`; `sign` picks `l` or `-l`. The derivative is
    /// `l c' p^kappa (1 + p^kappa c' t)^(-1/2)`, so `omega' = +-l c'`.
    pub fn salie_phase(p: u64, n: u32, kappa: u32, c: u64, sign: i8) -> Result<Self> {
        let prec = default_precision(p, n);
        let ctx = Modulus::new(p, prec)?;
        let l = crate::padic_core::PadicInt::from_modulus(&ctx, c % ctx.m).sqrt()?;
        let l = if sign < 0 { ctx.neg(l.residue()) } else { l.residue() };
        let cp = ctx
            .inv(c % ctx.m)
            .ok_or_else(|| Error::NonInvertible(format!("c = {c}")))?;
        Self::pure(
            p,
            n,
            kappa as i32,
            Rational::new(1.into(), 2.into()),
            kappa,
            cp,
            ctx.mul(l, cp),
        )
    }

    /// Adds a perturbation `gamma0 + p^u g` with `g` in `I0[lambda]`.
    pub fn with_perturbation(
        mut self,
        gamma0: u64,
        u: i64,
        lambda: Rational,
        g: PadicSeries,
    ) -> Result<Self> {
        let m = Modulus::new(self.p, self.prec)?.m;
        self.gamma0 = gamma0 % m;
        self.u = Some(u);
        self.lambda = Some(lambda);
        self.g = Some(g);
        self.validate()?;
        Ok(self)
    }

    pub fn modulus(&self) -> Modulus {
        Modulus::new(self.p, self.prec).expect("validated")
    }

    pub fn iota(&self) -> i64 {
        iota(self.p, &self.y)
    }

    pub fn iota_prime(&self) -> i64 {
        iota_prime(self.p, &self.y)
    }

    pub fn ord_y(&self) -> i64 {
        ord_rational(self.p, &self.y).expect("y is nonzero")
    }

    /// `floor(lambda)`, `None` for infinity.
    pub fn floor_lambda(&self) -> Option<i64> {
        self.lambda.as_ref().map(floor_i64)
    }

    /// `tilde lambda = min(kappa - rho_p(y), lambda)`.
    pub fn lambda_tilde(&self) -> Rational {
        let a = Rational::from_integer((self.kappa as i64).into()) - rho_of(self.p, &self.y);
        match &self.lambda {
            Some(l) if *l < a => l.clone(),
            _ => a,
        }
    }

    /// `u + floor(lambda)`, infinite if either is.
    pub fn u_plus_floor_lambda(&self) -> Option<i64> {
        match (self.u, self.floor_lambda()) {
            (Some(u), Some(l)) => Some(u + l),
            _ => None,
        }
    }

    /// Period of `m -> e(f(m)/p^n)` as an exponent of `p`.
    pub fn period_exp(&self) -> Result<u32> {
        let d = self.n as i64 - self.w as i64;
        if d < 0 {
            return Err(Error::BadParameter(format!("w = {} exceeds n = {}", self.w, self.n)));
        }
        Ok(d as u32)
    }

    pub fn describe(&self) -> String {
        let opt = |x: &Option<Rational>| x.as_ref().map_or("inf".to_string(), format_rational);
        format!(
            "F(w={}, y={}, kappa={}, lambda={}, u={}, omega={}, omega'={}) mod {}^{}",
            self.w,
            format_rational(&self.y),
            self.kappa,
            opt(&self.lambda),
            self.u.map_or("inf".to_string(), |u| u.to_string()),
            self.omega,
            self.omega_p,
            self.p,
            self.n
        )
    }

    pub fn validate(&self) -> Result<()> {
        let ctx = Modulus::new(self.p, self.prec)?;
        if !self.y.is_positive() {
            return Err(Error::BadParameter("y must be positive".into()));
        }
        if (self.kappa as i64) < 1 + iota_prime_int(self.p, 2) {
            return Err(Error::BadParameter(format!(
                "kappa = {} is below 1 + iota'(2)",
                self.kappa
            )));
        }
        if ctx.ord(self.omega) != Some(0) || ctx.ord(self.omega_p) != Some(0) {
            return Err(Error::BadParameter("omega and omega' must be units".into()));
        }
        match (&self.g, self.u, &self.lambda) {
            (None, None, _) => {}
            (Some(g), Some(u), Some(l)) => {
                if u < 1 {
                    return Err(Error::BadParameter(format!("u = {u} must be positive")));
                }
                if !l.is_positive() {
                    return Err(Error::BadParameter("lambda must be positive".into()));
                }
                let rep = g.class_check(&SeriesClass::I0 { lambda: l.clone() });
                if !rep.ok {
                    return Err(Error::HypothesesUnmet(format!(
                        "g is not in I0[{}]: {:?}",
                        format_rational(l),
                        rep.first_failure
                    )));
                }
            }
            _ => {
                return Err(Error::BadParameter(
                    "g, u and lambda must be given together".into(),
                ))
            }
        }
        Ok(())
    }

    /// `f'(t) p^(-w)` as a series.
    pub fn derivative_unit(&self) -> Result<PadicSeries> {
        let e = (self.iota() + self.kappa as i64) as u32;
        let main = pow_series(self.p, &-self.y.clone(), e, self.omega, self.prec)?
            .scale(self.omega_p)
            .add_constant(self.gamma0)?;
        match (&self.g, self.u) {
            (Some(g), Some(u)) => main.add(&g.mul_p_pow(u as i32)),
            _ => Ok(main),
        }
    }

    /// `f(t) p^(-w)` with `f(0) = 0`.
    pub fn phase_unit(&self) -> Result<PadicSeries> {
        let e = (self.iota() + self.kappa as i64) as u32;
        let main = pow_integral_series(self.p, &self.y, e, self.omega, self.prec)?
            .scale(self.omega_p);
        let lin = PadicSeries::new(self.p, self.prec, 0, vec![0, self.gamma0], None)?;
        let mut f = main.add(&lin)?;
        if let (Some(g), Some(u)) = (&self.g, self.u) {
            f = f.add(&g.antiderivative()?.mul_p_pow(u as i32))?;
        }
        Ok(f)
    }

    /// `(f, f')` with `f(0) = 0`.
    pub fn reconstruct(&self) -> Result<(PadicSeries, PadicSeries)> {
        Ok((
            self.phase_unit()?.mul_p_pow(self.w),
            self.derivative_unit()?.mul_p_pow(self.w),
        ))
    }

    /// `f` as an exact polynomial modulo `p^n`.
    pub fn poly(&self) -> Result<PhasePoly> {
        PhasePoly::from_series(&self.reconstruct()?.0, self.n)
    }

    /// The phase of `f(M + t)`, with the parameter map
    /// `omega -> omega (1 + p^(iota+kappa) omega M)^(-1)`,
    /// `omega' -> omega' (1 + p^(iota+kappa) omega M)^(-y)`, `g -> g(M + t)`
    /// and `gamma0` unchanged.
    pub fn translate(&self, m: i128) -> Result<Self> {
        let ctx = self.modulus();
        let mm = ctx.from_i128(m);
        let e = (self.iota() + self.kappa as i64) as u32;
        let base = ctx.add(1, ctx.mul(ctx.p_pow(e), ctx.mul(self.omega, mm)));
        let inv = ctx.inv(base).expect("1 + p^e x is a unit");
        // base^(-y) through the power series at t = M
        let py = pow_series(self.p, &-self.y.clone(), e, self.omega, self.prec)?.eval_raw(mm);
        let mut out = self.clone();
        out.omega = ctx.mul(self.omega, inv);
        out.omega_p = ctx.mul(self.omega_p, py);
        out.g = self.g.as_ref().map(|g| g.translate(mm));
        Ok(out)
    }

    /// Certifies that `fprime_unit` (a series for `f' p^(-w)`) decomposes in
    /// this phase's class: subtracting the main term and `gamma0` leaves a
    /// multiple of `p^u` whose quotient lies in `I0[lambda]`, or zero when
    /// `u` is infinite. Returns the quotient `g`.
    pub fn certify_derivative(&self, fprime_unit: &PadicSeries) -> Result<Option<PadicSeries>> {
        let e = (self.iota() + self.kappa as i64) as u32;
        let main = pow_series(self.p, &-self.y.clone(), e, self.omega, self.prec)?
            .scale(self.omega_p)
            .add_constant(self.gamma0)?;
        let rest = fprime_unit.sub(&main)?;
        match self.u {
            None => {
                if let Some(v) = rest.min_coeff_ord() {
                    let abs = v as i64 + rest.shift() as i64;
                    if abs < self.n as i64 {
                        return Err(Error::HypothesesUnmet(format!(
                            "remainder of order {abs} where the class has u = inf"
                        )));
                    }
                }
                Ok(None)
            }
            Some(u) => {
                if rest.is_zero() {
                    return Ok(Some(PadicSeries::zero(self.p, rest.precision())?));
                }
                let v = rest.min_coeff_ord().unwrap_or(0) as i64 + rest.shift() as i64;
                if v < u {
                    return Err(Error::HypothesesUnmet(format!(
                        "remainder has order {v} < u = {u}"
                    )));
                }
                let g = rest.renormalize_to(u as i32)?.mul_p_pow(-(u as i32));
                let lambda = self.lambda.clone().expect("finite u comes with lambda");
                let rep = g.class_check(&SeriesClass::I0 {
                    lambda: lambda.clone(),
                });
                if !rep.ok {
                    return Err(Error::HypothesesUnmet(format!(
                        "remainder quotient not in I0[{}]: {:?}",
                        format_rational(&lambda),
                        rep.first_failure
                    )));
                }
                Ok(Some(g))
            }
        }
    }
}

/// `ceil(x)` for an optional rational, `None` staying infinite.
pub fn ceil_opt(x: &Option<Rational>) -> Option<i64> {
    x.as_ref().map(ceil_i64)
}

/// An integral series reduced to a polynomial modulo `p^n`.
#[derive(Clone, Debug)]
pub struct PhasePoly {
    pub ctx: Modulus,
    pub coeffs: Vec<u64>,
}

impl PhasePoly {
    /// Needs `shift >= 0` and absolute precision at least `n`; omitted
    /// coefficients then vanish modulo `p^n`.
    pub fn from_series(f: &PadicSeries, n: u32) -> Result<Self> {
        if f.abs_precision() < n as i64 {
            return Err(Error::Precision(format!(
                "series known to p^{} but sums need p^{n}",
                f.abs_precision()
            )));
        }
        let ctx = Modulus::new(f.p(), n)?;
        if f.shift() < 0 {
            // allowed only when the low digits are really zero
            let g = f.renormalize_to(0).map_err(|_| {
                Error::NotIntegral(format!("phase has shift {}", f.shift()))
            })?;
            return Self::from_series(&g, n);
        }
        let sh = f.shift() as u32;
        let coeffs = if sh >= n {
            vec![]
        } else {
            let scale = ctx.p_pow(sh);
            f.coeffs().iter().map(|&c| ctx.mul(c % ctx.m, scale)).collect()
        };
        let mut out = PhasePoly { ctx, coeffs };
        while out.coeffs.last() == Some(&0) {
            out.coeffs.pop();
        }
        Ok(out)
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn eval(&self, x: i128) -> u64 {
        let ctx = &self.ctx;
        let x = ctx.from_i128(x);
        let mut acc = 0;
        for &c in self.coeffs.iter().rev() {
            acc = ctx.add(ctx.mul(acc, x), c);
        }
        acc
    }

    /// Values at `start, start + 1, ..., start + count - 1` by forward
    /// differences: one Horner pass per degree, then `degree` additions per
    /// point.
    pub fn values(&self, start: i128, count: usize) -> Vec<u64> {
        let d = self.degree();
        let ctx = &self.ctx;
        let mut out = Vec::with_capacity(count);
        if count <= d + 1 {
            for i in 0..count {
                out.push(self.eval(start + i as i128));
            }
            return out;
        }
        let mut diff: Vec<u64> = (0..=d).map(|i| self.eval(start + i as i128)).collect();
        for level in 1..=d {
            for i in (level..=d).rev() {
                diff[i] = ctx.sub(diff[i], diff[i - 1]);
            }
        }
        for _ in 0..count {
            out.push(diff[0]);
            for i in 0..d {
                diff[i] = ctx.add(diff[i], diff[i + 1]);
            }
        }
        out
    }
}

impl PartialEq for PhaseF {
    fn eq(&self, o: &Self) -> bool {
        self.p == o.p
            && self.n == o.n
            && self.w == o.w
            && self.y == o.y
            && self.kappa == o.kappa
            && self.lambda == o.lambda
            && self.u == o.u
            && self.omega == o.omega
            && self.omega_p == o.omega_p
            && self.gamma0 == o.gamma0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic_core::{e_phase, rat, PadicInt};
    use crate::series::log1p_series;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn log_phase_matches_log_series() {
        let (p, n, kappa) = (5, 7, 1);
        let phi = PhaseF::log_phase(p, n, kappa, 3, 2).unwrap();
        let (f, _) = phi.reconstruct().unwrap();
        let cp = Modulus::new(p, phi.prec).unwrap().inv(3).unwrap();
        let direct = log1p_series(p, kappa, cp, phi.prec).unwrap().scale(2);
        let a = PhasePoly::from_series(&f, n).unwrap();
        let b = PhasePoly::from_series(&direct, n).unwrap();
        for t in -50..50 {
            assert_eq!(a.eval(t), b.eval(t), "t = {t}");
        }
    }

    #[test]
    fn salie_phase_omega_prime_is_l_c_prime() {
        // phase 2 l ((1 + p^k c' t)^(1/2) - 1) has omega' = l c'; twice that
        // value gives the doubled phase instead
        let (p, n, kappa) = (7, 6, 1);
        let c = 2; // 3^2 = 9 = 2 mod 7
        let phi = PhaseF::salie_phase(p, n, kappa, c, 1).unwrap();
        let ctx = phi.modulus();
        let l = PadicInt::from_modulus(&ctx, c).sqrt().unwrap().residue();
        let cp = ctx.inv(c).unwrap();
        let half = rat(1, 2);
        let direct = pow_series(p, &half, kappa, cp, phi.prec)
            .unwrap()
            .add_constant(ctx.neg(1))
            .unwrap()
            .scale(ctx.mul(2, l));
        let a = phi.poly().unwrap();
        let b = PhasePoly::from_series(&direct, n).unwrap();
        for t in 0..200 {
            assert_eq!(a.eval(t), b.eval(t));
        }
        let mut doubled = phi.clone();
        doubled.omega_p = ctx.mul(2, phi.omega_p);
        let d = doubled.poly().unwrap();
        let b2 = PhasePoly::from_series(&direct.scale(2), n).unwrap();
        assert!((0..200).all(|t| d.eval(t) == b2.eval(t)));
        assert!((0..200).any(|t| d.eval(t) != b.eval(t)));
    }

    #[test]
    fn derivative_of_reconstruction() {
        let phi = PhaseF::pure(5, 6, 1, rat(2, 1), 1, 3, 7).unwrap();
        let (f, fp) = phi.reconstruct().unwrap();
        let a = PhasePoly::from_series(&f.derivative(), 6).unwrap();
        let b = PhasePoly::from_series(&fp, 6).unwrap();
        for t in 0..100 {
            assert_eq!(a.eval(t), b.eval(t));
        }
        // constant term of f' p^(-w) is omega' when gamma0 = g = 0
        assert_eq!(phi.derivative_unit().unwrap().with_shift(0).unwrap().coeff(0) % 625, 7);
    }

    #[test]
    fn periodicity_of_exponential() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let g = PadicSeries::polynomial(5, 14, &[1, 5, 25, 125]).unwrap();
        let phi = PhaseF::pure(5, 6, 1, rat(1, 2), 1, 2, 3)
            .unwrap()
            .with_perturbation(4, 1, rat(1, 1), g)
            .unwrap();
        let poly = phi.poly().unwrap();
        let per = 5i128.pow(phi.period_exp().unwrap());
        for _ in 0..100 {
            let m: i128 = rng.gen_range(-10_000..10_000);
            let q: i128 = rng.gen_range(-50..50);
            let a = e_phase(poly.eval(m) as i128, 5, 6);
            let b = e_phase(poly.eval(m + per * q) as i128, 5, 6);
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn forward_differences_match_horner() {
        let phi = PhaseF::log_phase(7, 5, 1, 1, 3).unwrap();
        let poly = phi.poly().unwrap();
        let vals = poly.values(-123, 1000);
        for (i, v) in vals.iter().enumerate() {
            assert_eq!(*v, poly.eval(-123 + i as i128));
        }
    }

    #[test]
    fn translation_parameter_map() {
        let g = PadicSeries::polynomial(5, 14, &[2, 5, 50]).unwrap();
        let phi = PhaseF::pure(5, 7, 0, rat(1, 1), 1, 2, 3)
            .unwrap()
            .with_perturbation(1, 2, rat(1, 1), g)
            .unwrap();
        let m = 17;
        let moved = phi.translate(m).unwrap();
        let (_, fp) = phi.reconstruct().unwrap();
        let shifted = fp.translate(m as u64);
        let (_, fp2) = moved.reconstruct().unwrap();
        let a = PhasePoly::from_series(&shifted, 7).unwrap();
        let b = PhasePoly::from_series(&fp2, 7).unwrap();
        for t in 0..100 {
            assert_eq!(a.eval(t), b.eval(t));
        }
    }

    #[test]
    fn certificate_recovers_g() {
        let g = PadicSeries::polynomial(7, 12, &[3, 7, 49]).unwrap();
        let phi = PhaseF::pure(7, 6, 1, rat(1, 1), 1, 1, 2)
            .unwrap()
            .with_perturbation(0, 2, rat(1, 1), g.clone())
            .unwrap();
        let back = phi
            .certify_derivative(&phi.derivative_unit().unwrap())
            .unwrap()
            .unwrap();
        let a = PhasePoly::from_series(&back, 6).unwrap();
        let b = PhasePoly::from_series(&g, 6).unwrap();
        assert_eq!(a.coeffs, b.coeffs);
    }

    #[test]
    fn rejects_non_unit_omega() {
        assert!(PhaseF::pure(5, 4, 1, rat(1, 1), 1, 5, 1).is_err());
        assert!(PhaseF::pure(2, 4, 1, rat(1, 1), 1, 1, 1).is_err());
    }
}
