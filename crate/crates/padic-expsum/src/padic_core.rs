//! Residues modulo `p^N`, valuations of rationals and the small notation
//! functions (`iota`, `iota_prime`, `eps`, `rho`) used throughout.
//!
//! Residues live in `u64` with `u128` products, so every modulus must stay
//! below `2^63`. That covers the working precisions needed for the moduli
//! this crate targets and keeps the brute-force loops allocation free.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::{BigInt, Sign};
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

/// Largest modulus accepted by [`Modulus::new`].
pub const MAX_MODULUS: u64 = 1 << 63;

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// `ord_p` of a nonzero integer.
pub fn ord_int(p: u64, mut n: i128) -> Option<u32> {
    if n == 0 {
        return None;
    }
    let p = p as i128;
    let mut v = 0;
    while n % p == 0 {
        n /= p;
        v += 1;
    }
    Some(v)
}

fn ord_bigint(p: u64, n: &BigInt) -> (i64, BigInt) {
    let pb = BigInt::from(p);
    let mut n = n.clone();
    let mut v = 0i64;
    loop {
        let (q, r) = n.div_rem(&pb);
        if !r.is_zero() {
            return (v, n);
        }
        n = q;
        v += 1;
    }
}

/// `ord_p` of a rational; `None` for zero.
pub fn ord_rational(p: u64, y: &Rational) -> Option<i64> {
    if y.is_zero() {
        return None;
    }
    let (a, _) = ord_bigint(p, y.numer());
    let (b, _) = ord_bigint(p, y.denom());
    Some(a - b)
}

/// `iota(y) = max(0, -ord y)`.
pub fn iota(p: u64, y: &Rational) -> i64 {
    ord_rational(p, y).map_or(0, |v| (-v).max(0))
}

/// `iota'(y) = max(0, ord y)`. Zero is treated as having infinite order and
/// rejected by callers; here it maps to 0 so that `iota'` of a constant
/// such as `12` can be taken freely.
pub fn iota_prime(p: u64, y: &Rational) -> i64 {
    ord_rational(p, y).map_or(0, |v| v.max(0))
}

pub fn iota_prime_int(p: u64, n: i64) -> i64 {
    ord_int(p, n as i128).map_or(0, |v| v as i64)
}

/// 1 when `ord y != 0`, else 0.
pub fn eps(p: u64, y: &Rational) -> i64 {
    i64::from(ord_rational(p, y).is_some_and(|v| v != 0))
}

/// `1/(p-1)`.
pub fn rho(p: u64) -> Rational {
    Rational::new(BigInt::one(), BigInt::from(p - 1))
}

/// `rho` when `ord y != 0`, else 0.
pub fn rho_of(p: u64, y: &Rational) -> Rational {
    if eps(p, y) == 1 {
        rho(p)
    } else {
        Rational::zero()
    }
}

/// `1 + iota'(2)`: the exponent with `(1 + p^kappa1 Z_p)` torsion free.
pub fn kappa1(p: u64) -> u32 {
    if p == 2 {
        2
    } else {
        1
    }
}

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn floor_i64(x: &Rational) -> i64 {
    x.floor().to_integer().to_i64().expect("floor fits in i64")
}

pub fn ceil_i64(x: &Rational) -> i64 {
    x.ceil().to_integer().to_i64().expect("ceil fits in i64")
}

/// Parses `"a"`, `"-a"` or `"a/b"`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational: {s:?}"));
    match s.split_once('/') {
        Some((a, b)) => {
            let a: BigInt = a.trim().parse().map_err(|_| bad())?;
            let b: BigInt = b.trim().parse().map_err(|_| bad())?;
            if b.is_zero() {
                return Err(bad());
            }
            Ok(Rational::new(a, b))
        }
        None => Ok(Rational::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

pub fn format_rational(x: &Rational) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Jacobi symbol `(a/n)` for odd positive `n`.
pub fn jacobi(a: i128, n: u64) -> i32 {
    assert!(n % 2 == 1, "jacobi symbol needs odd modulus");
    let mut a = a.rem_euclid(n as i128) as u64;
    let mut n = n;
    let mut t = 1;
    while a != 0 {
        while a.is_multiple_of(2) {
            a /= 2;
            if n % 8 == 3 || n % 8 == 5 {
                t = -t;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a % 4 == 3 && n % 4 == 3 {
            t = -t;
        }
        a %= n;
    }
    if n == 1 {
        t
    } else {
        0
    }
}

/// `e(r/m) = exp(2 pi i r/m)` for a residue `r` modulo `m`.
pub fn e_frac(r: u64, m: u64) -> Complex64 {
    let r = r % m;
    // fold into (-1/2, 1/2] so the argument of sin/cos stays small
    let x = if r > m / 2 {
        -((m - r) as f64) / m as f64
    } else {
        r as f64 / m as f64
    };
    let (s, c) = (std::f64::consts::TAU * x).sin_cos();
    Complex64::new(c, s)
}

/// `e(v/p^n)` for any integer `v`; the residue is reduced exactly first.
pub fn e_phase(v: i128, p: u64, n: u32) -> Complex64 {
    let m = (p as i128).pow(n);
    e_frac(v.rem_euclid(m) as u64, m as u64)
}

/// Largest `N` with `p^N < 2^63`.
pub fn max_precision(p: u64) -> u32 {
    let mut n = 0;
    let mut x: u128 = 1;
    while x * (p as u128) < MAX_MODULUS as u128 {
        x *= p as u128;
        n += 1;
    }
    n
}

/// Arithmetic modulo `p^n` on raw `u64` residues.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Modulus {
    pub p: u64,
    pub n: u32,
    pub m: u64,
}

impl Modulus {
    pub fn new(p: u64, n: u32) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::BadParameter(format!("{p} is not prime")));
        }
        let mut m: u64 = 1;
        for _ in 0..n {
            m = m
                .checked_mul(p)
                .filter(|&m| m < MAX_MODULUS)
                .ok_or_else(|| {
                    Error::Unsupported(format!("{p}^{n} exceeds the 2^63 residue range"))
                })?;
        }
        Ok(Self { p, n, m })
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a as u128 + b as u128;
        (s % self.m as u128) as u64
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            self.m - (b - a)
        }
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.m - a
        }
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.m as u128) as u64
    }

    pub fn pow(&self, mut a: u64, mut e: u64) -> u64 {
        let mut r = 1 % self.m;
        a %= self.m;
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul(r, a);
            }
            a = self.mul(a, a);
            e >>= 1;
        }
        r
    }

    pub fn from_i128(&self, v: i128) -> u64 {
        v.rem_euclid(self.m as i128) as u64
    }

    /// Inverse of a unit; `None` if `p | a`.
    pub fn inv(&self, a: u64) -> Option<u64> {
        if self.m == 1 {
            return Some(0);
        }
        if a.is_multiple_of(self.p) {
            return None;
        }
        let (mut r0, mut r1) = (self.m as i128, a as i128);
        let (mut t0, mut t1) = (0i128, 1i128);
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (t0, t1) = (t1, t0 - q * t1);
        }
        Some(self.from_i128(t0))
    }

    /// `ord_p` of a residue, `None` when it is zero modulo `p^n`.
    pub fn ord(&self, mut a: u64) -> Option<u32> {
        a %= self.m;
        if a == 0 {
            return None;
        }
        let mut v = 0;
        while a.is_multiple_of(self.p) {
            a /= self.p;
            v += 1;
        }
        Some(v)
    }

    /// `p^e mod p^n`.
    pub fn p_pow(&self, e: u32) -> u64 {
        if e >= self.n {
            0
        } else {
            self.p.pow(e)
        }
    }

    /// Reduces a p-integral rational.
    pub fn reduce(&self, x: &Rational) -> Result<u64> {
        if x.is_zero() {
            return Ok(0);
        }
        let (vn, un) = ord_bigint(self.p, x.numer());
        let (vd, ud) = ord_bigint(self.p, x.denom());
        let v = vn - vd;
        if v < 0 {
            return Err(Error::NotIntegral(format!(
                "{} has {}-adic order {v}",
                format_rational(x),
                self.p
            )));
        }
        if v >= self.n as i64 {
            return Ok(0);
        }
        let mb = BigInt::from(self.m);
        let n = un.mod_floor(&mb).to_u64().unwrap();
        let d = ud.mod_floor(&mb).to_u64().unwrap();
        let d_inv = self.inv(d).expect("unit denominator");
        Ok(self.mul(self.mul(n, d_inv), self.p_pow(v as u32)))
    }

    /// Signed representative in `(-m/2, m/2]`.
    pub fn signed(&self, a: u64) -> i128 {
        if a > self.m / 2 {
            a as i128 - self.m as i128
        } else {
            a as i128
        }
    }
}

/// An element of `Z/p^N`, carrying its prime and precision.
///
/// Mixing values of different primes or precisions panics; use
/// [`PadicInt::reduce_to`] to line precisions up first.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct PadicInt {
    p: u64,
    prec: u32,
    m: u64,
    r: u64,
}

impl fmt::Debug for PadicInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} mod {}^{}", self.r, self.p, self.prec)
    }
}

impl fmt::Display for PadicInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.r)
    }
}

impl PadicInt {
    pub fn new(p: u64, prec: u32, v: i128) -> Result<Self> {
        let ctx = Modulus::new(p, prec)?;
        Ok(Self::from_modulus(&ctx, ctx.from_i128(v)))
    }

    pub fn from_modulus(ctx: &Modulus, r: u64) -> Self {
        Self {
            p: ctx.p,
            prec: ctx.n,
            m: ctx.m,
            r: r % ctx.m,
        }
    }

    pub fn from_rational(p: u64, prec: u32, x: &Rational) -> Result<Self> {
        let ctx = Modulus::new(p, prec)?;
        Ok(Self::from_modulus(&ctx, ctx.reduce(x)?))
    }

    pub fn modulus(&self) -> Modulus {
        Modulus {
            p: self.p,
            n: self.prec,
            m: self.m,
        }
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn precision(&self) -> u32 {
        self.prec
    }

    pub fn residue(&self) -> u64 {
        self.r
    }

    pub fn is_zero(&self) -> bool {
        self.r == 0
    }

    pub fn is_unit(&self) -> bool {
        !self.r.is_multiple_of(self.p) || self.m == 1
    }

    /// Valuation; errors on a residue that vanishes to full precision.
    pub fn ord(&self) -> Result<u32> {
        self.modulus().ord(self.r).ok_or(Error::InfiniteValuation)
    }

    /// `(ord, unit)` with `self = p^ord * unit`. The unit is only defined
    /// modulo `p^(N - ord)` and is returned at that precision.
    pub fn unit_part(&self) -> Result<(u32, PadicInt)> {
        let v = self.ord()?;
        let ctx = Modulus::new(self.p, self.prec - v)?;
        Ok((v, Self::from_modulus(&ctx, self.r / self.p.pow(v))))
    }

    pub fn inv(&self) -> Result<Self> {
        let ctx = self.modulus();
        ctx.inv(self.r)
            .map(|r| Self::from_modulus(&ctx, r))
            .ok_or_else(|| Error::NonInvertible(format!("{self:?}")))
    }

    pub fn pow(&self, e: u64) -> Self {
        Self::from_modulus(&self.modulus(), self.modulus().pow(self.r, e))
    }

    pub fn reduce_to(&self, prec: u32) -> Self {
        assert!(prec <= self.prec, "cannot raise precision");
        let m = self.p.pow(prec);
        Self {
            p: self.p,
            prec,
            m,
            r: self.r % m,
        }
    }

    /// Square root of a unit for odd `p` via Tonelli-Shanks and Hensel
    /// lifting. The root returned is the one whose residue mod `p` is at
    /// most `(p-1)/2`.
    pub fn sqrt(&self) -> Result<Self> {
        let p = self.p;
        if p == 2 {
            return Err(Error::Unsupported("square roots for p = 2".into()));
        }
        if !self.is_unit() {
            return Err(Error::NoSquareRoot(format!("{self:?} is not a unit")));
        }
        let a0 = self.r % p;
        if jacobi(a0 as i128, p) != 1 {
            return Err(Error::NoSquareRoot(format!("{a0} is a non-residue mod {p}")));
        }
        let fp = Modulus::new(p, 1)?;
        let mut x = tonelli_shanks(&fp, a0);
        if x > p / 2 {
            x = p - x;
        }
        // Newton: x <- x - (x^2 - a)/(2x), doubling correct digits each step
        let ctx = self.modulus();
        let mut prec = 1;
        while prec < self.prec {
            prec = (2 * prec).min(self.prec);
            let c = Modulus::new(p, prec)?;
            let a = self.r % c.m;
            let num = c.sub(c.mul(x, x), a);
            let den = c.inv(c.mul(2, x)).expect("2x is a unit");
            x = c.sub(x, c.mul(num, den));
        }
        Ok(Self::from_modulus(&ctx, x))
    }

    fn check(&self, o: &Self) {
        assert!(
            self.p == o.p && self.prec == o.prec,
            "mixed p-adic contexts: {:?} vs {:?}",
            self,
            o
        );
    }

    /// The rational integer in `[0, p^N)` representing this residue.
    pub fn to_bigint(&self) -> BigInt {
        BigInt::from(self.r)
    }
}

fn tonelli_shanks(fp: &Modulus, a: u64) -> u64 {
    let p = fp.p;
    let (mut q, mut s) = (p - 1, 0u32);
    while q % 2 == 0 {
        q /= 2;
        s += 1;
    }
    let mut z = 2;
    while jacobi(z as i128, p) != -1 {
        z += 1;
    }
    let mut m = s;
    let mut c = fp.pow(z, q);
    let mut t = fp.pow(a, q);
    let mut r = fp.pow(a, q.div_ceil(2));
    while t != 1 {
        let mut i = 0;
        let mut tt = t;
        while tt != 1 {
            tt = fp.mul(tt, tt);
            i += 1;
        }
        let b = fp.pow(c, 1u64 << (m - i - 1));
        m = i;
        c = fp.mul(b, b);
        t = fp.mul(t, c);
        r = fp.mul(r, b);
    }
    r
}

impl Add for PadicInt {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        self.check(&o);
        Self::from_modulus(&self.modulus(), self.modulus().add(self.r, o.r))
    }
}

impl Sub for PadicInt {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        self.check(&o);
        Self::from_modulus(&self.modulus(), self.modulus().sub(self.r, o.r))
    }
}

impl Mul for PadicInt {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        self.check(&o);
        Self::from_modulus(&self.modulus(), self.modulus().mul(self.r, o.r))
    }
}

impl Neg for PadicInt {
    type Output = Self;
    fn neg(self) -> Self {
        Self::from_modulus(&self.modulus(), self.modulus().neg(self.r))
    }
}

/// `y` as an element of `Q_p` reduced to `p^shift * unit`: returns the
/// order and the numerator/denominator stripped of `p`.
pub fn split_rational(p: u64, y: &Rational) -> Option<(i64, BigInt, BigInt)> {
    if y.is_zero() {
        return None;
    }
    let (a, un) = ord_bigint(p, y.numer());
    let (b, ud) = ord_bigint(p, y.denom());
    Some((a - b, un, ud))
}

/// `|y|_p * y`, the unit part of a nonzero rational.
pub fn unit_of(p: u64, y: &Rational) -> Rational {
    let (_, n, d) = split_rational(p, y).expect("nonzero");
    Rational::new(n, d)
}

pub fn is_negative(y: &Rational) -> bool {
    y.numer().sign() == Sign::Minus
}

pub fn abs_rational(y: &Rational) -> Rational {
    y.abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn valuations_and_notation() {
        let y = rat(25, 3);
        assert_eq!(ord_rational(5, &y), Some(2));
        assert_eq!(iota(5, &y), 0);
        assert_eq!(iota_prime(5, &y), 2);
        let z = rat(3, 50);
        assert_eq!(ord_rational(5, &z), Some(-2));
        assert_eq!(iota(5, &z), 2);
        assert_eq!(eps(5, &z), 1);
        assert_eq!(eps(5, &rat(3, 7)), 0);
        assert_eq!(rho_of(5, &z), rat(1, 4));
        assert_eq!(kappa1(2), 2);
        assert_eq!(iota_prime_int(2, 12), 2);
        assert_eq!(iota_prime_int(3, 12), 1);
        assert_eq!(iota_prime_int(5, 12), 0);
    }

    #[test]
    fn inverse_and_units() {
        let x = PadicInt::new(7, 5, 3).unwrap();
        let one = PadicInt::new(7, 5, 1).unwrap();
        assert_eq!(x * x.inv().unwrap(), one);
        assert!(PadicInt::new(7, 5, 14).unwrap().inv().is_err());
        let (v, u) = PadicInt::new(7, 5, 98).unwrap().unit_part().unwrap();
        assert_eq!((v, u.residue(), u.precision()), (2, 2, 3));
        assert_eq!(
            PadicInt::new(7, 5, 0).unwrap().ord(),
            Err(Error::InfiniteValuation)
        );
    }

    #[test]
    fn rational_reduction() {
        // 1/3 mod 5^3: 3 * 42 = 126 = 1 mod 125
        let x = PadicInt::from_rational(5, 3, &rat(1, 3)).unwrap();
        assert_eq!(x.residue(), 42);
        assert!(PadicInt::from_rational(5, 3, &rat(1, 5)).is_err());
        assert_eq!(
            PadicInt::from_rational(5, 3, &rat(-50, 1)).unwrap().residue(),
            75
        );
    }

    #[test]
    fn sqrt_roundtrip() {
        for a in [2u64, 3, 5, 6, 10] {
            let x = PadicInt::new(7, 6, a as i128).unwrap();
            if jacobi(a as i128, 7) == 1 {
                let r = x.sqrt().unwrap();
                assert_eq!(r * r, x);
            } else {
                assert!(matches!(x.sqrt(), Err(Error::NoSquareRoot(_))));
            }
        }
        assert!(matches!(
            PadicInt::new(2, 6, 1).unwrap().sqrt(),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn modulus_guard() {
        assert!(Modulus::new(2, 62).is_ok());
        assert!(Modulus::new(2, 63).is_err());
        assert!(Modulus::new(9, 2).is_err());
    }

    #[test]
    fn jacobi_small() {
        // quadratic residues mod 11: 1 3 4 5 9
        let qr = [1, 3, 4, 5, 9];
        for a in 1..11 {
            let expect = if qr.contains(&a) { 1 } else { -1 };
            assert_eq!(jacobi(a as i128, 11), expect);
        }
        assert_eq!(jacobi(2, 15), 1);
    }
}
