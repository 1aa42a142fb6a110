//! Dirichlet characters modulo `p^n` through the logarithm:
//! every unit factors uniquely as `m = w(c) (1 + p^k1 t)` with `w(c)` the
//! Teichmuller lift of `c = m mod p^k1` (`k1 = 1 + iota'(2)`), and
//!
//! ```text
//! chi(m) = psi(c) e(a0 log_p(1 + p^k1 t) / p^n).
//! ```
//!
//! Values are kept as exact exponents `r` with `chi(m) = e(r / D)`,
//! `D = |G| p^n`, and only turned into complex numbers when summed.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::expsum::{guard, Kahan};
use crate::padic_core::{e_frac, kappa1, Modulus};
use crate::series::phase::default_precision;
use crate::series::{log1p_series, PhaseF, PhasePoly};

#[derive(Clone, Debug)]
pub struct DirichletCharacter {
    pub p: u64,
    pub n: u32,
    /// Residue mod `p^n`; only its class mod `p^(n - k1)` matters.
    pub a0: u64,
    /// `psi(g^i) = e(j i / |G|)` for the fixed generator `g` of `G`.
    pub psi: u64,
    k1: u32,
    q: u64,
    g_ord: u64,
    /// Indexed by `c mod p^k1`: discrete log of `c` and `w(c)^-1 mod p^n`.
    ind: Vec<u64>,
    teich_inv: Vec<u64>,
    log_poly: PhasePoly,
}

#[derive(Serialize)]
struct CharJson {
    p: u64,
    n: u32,
    a0: u64,
    parity: u8,
    primitive: bool,
}

fn primitive_root(p: u64) -> u64 {
    if p == 2 {
        return 1;
    }
    let phi = p - 1;
    let mut fs = vec![];
    let mut x = phi;
    let mut d = 2;
    while d * d <= x {
        if x.is_multiple_of(d) {
            fs.push(d);
            while x.is_multiple_of(d) {
                x /= d;
            }
        }
        d += 1;
    }
    if x > 1 {
        fs.push(x);
    }
    let ctx = Modulus::new(p, 1).expect("prime");
    (2..p)
        .find(|&g| fs.iter().all(|&f| ctx.pow(g, phi / f) != 1))
        .expect("a primitive root exists")
}

/// Builds the character with log-twist `a0` and `G`-component `psi`.
pub fn char_build(p: u64, n: u32, a0: u64, psi: u64) -> Result<DirichletCharacter> {
    let k1 = kappa1(p);
    if n < k1 {
        return Err(Error::BadParameter(format!(
            "characters mod {p}^{n} need n >= {k1}"
        )));
    }
    let ctx = Modulus::new(p, n)?;
    let g_ord = if p == 2 { 2 } else { p - 1 };
    Modulus::new(p, n)?
        .m
        .checked_mul(g_ord)
        .filter(|&d| d < 1 << 62)
        .ok_or_else(|| Error::Unsupported(format!("{p}^{n} too large for exact exponents")))?;
    let pk = p.pow(k1);
    let mut ind = vec![0u64; pk as usize];
    let mut teich_inv = vec![0u64; pk as usize];
    if p == 2 {
        ind[3] = 1;
        teich_inv[1] = 1 % ctx.m;
        teich_inv[3] = ctx.neg(1);
    } else {
        let g = primitive_root(p);
        let mut x = 1u64;
        for i in 0..g_ord {
            ind[x as usize] = i;
            // w(x) = x^(p^(n-1)) mod p^n
            let mut t = x % ctx.m;
            for _ in 1..n {
                t = ctx.pow(t, p);
            }
            teich_inv[x as usize] = ctx.inv(t).expect("unit");
            x = x * g % p;
        }
    }
    let prec = default_precision(p, n);
    let log_poly = PhasePoly::from_series(&log1p_series(p, k1, 1, prec)?, n)?;
    Ok(DirichletCharacter {
        p,
        n,
        a0: a0 % ctx.m,
        psi: psi % g_ord,
        k1,
        q: ctx.m,
        g_ord,
        ind,
        teich_inv,
        log_poly,
    })
}

impl DirichletCharacter {
    pub fn modulus(&self) -> u64 {
        self.q
    }

    /// The common denominator `D` of [`DirichletCharacter::exponent`].
    pub fn denominator(&self) -> u64 {
        self.g_ord * self.q
    }

    /// `r` with `chi(m) = e(r/D)`, or `None` when `p | m`.
    pub fn exponent(&self, m: i128) -> Option<u64> {
        let q = self.q;
        let mm = m.rem_euclid(q as i128) as u64;
        if mm.is_multiple_of(self.p) {
            return None;
        }
        let pk = self.p.pow(self.k1);
        let c = (mm % pk) as usize;
        let ctx = &self.log_poly.ctx;
        let x = ctx.mul(mm, self.teich_inv[c]);
        let t = (x - 1) / pk;
        let l = self.log_poly.eval(t as i128);
        let d = self.denominator() as u128;
        let r = (self.psi as u128 * self.ind[c] as u128 * q as u128
            + ctx.mul(self.a0, l) as u128 * self.g_ord as u128)
            % d;
        Some(r as u64)
    }

    pub fn eval(&self, m: i128) -> Complex64 {
        self.exponent(m)
            .map_or(Complex64::new(0.0, 0.0), |r| e_frac(r, self.denominator()))
    }

    /// `0` for even, `1` for odd characters.
    pub fn parity(&self) -> u8 {
        (self.psi % 2) as u8
    }

    pub fn is_primitive(&self) -> bool {
        if self.n > self.k1 {
            !self.a0.is_multiple_of(self.p)
        } else {
            self.psi != 0
        }
    }

    pub fn is_principal(&self) -> bool {
        self.psi == 0 && self.a0.is_multiple_of(self.p.pow(self.n - self.k1))
    }

    pub fn conj(&self) -> Self {
        let mut c = self.clone();
        c.a0 = (self.q - self.a0) % self.q;
        c.psi = (self.g_ord - self.psi) % self.g_ord;
        c
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&CharJson {
            p: self.p,
            n: self.n,
            a0: self.a0,
            parity: self.parity(),
            primitive: self.is_primitive(),
        })
        .expect("plain data")
    }
}

/// All primitive characters mod `p^n`: `a0` over units mod `p^(n - k1)`
/// (for `n > k1`) and every `psi`.
pub fn primitive_characters(p: u64, n: u32) -> Result<Vec<DirichletCharacter>> {
    let k1 = kappa1(p);
    let g_ord = if p == 2 { 2 } else { p - 1 };
    let mut out = vec![];
    let a_range = if n > k1 { p.pow(n - k1) } else { 1 };
    for a0 in 0..a_range {
        if n > k1 && a0 % p == 0 {
            continue;
        }
        for psi in 0..g_ord {
            let chi = char_build(p, n, a0, psi)?;
            if chi.is_primitive() {
                out.push(chi);
            }
        }
    }
    Ok(out)
}

const CHUNK: u64 = 1 << 15;

/// `sum_{M < m <= M + B} chi(m)`.
pub fn char_sum(chi: &DirichletCharacter, m: i128, b: u64) -> Result<Complex64> {
    guard(b, "char_sum")?;
    let d = chi.denominator();
    let chunks = b.div_ceil(CHUNK);
    let parts: Vec<Complex64> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let lo = m + 1 + (c * CHUNK) as i128;
            let len = (b - c * CHUNK).min(CHUNK);
            (lo..lo + len as i128)
                .filter_map(|x| chi.exponent(x))
                .map(|r| e_frac(r, d))
                .collect::<Kahan>()
                .value()
        })
        .collect();
    Ok(parts.into_iter().collect::<Kahan>().value())
}

/// The same sum split by classes `c mod p^kappa`:
/// `sum_c chi(c) sum_t e(a0 log(1 + p^kappa c' t)/p^n)` over
/// `(M - c)/p^kappa < t <= (M + B - c)/p^kappa`.
pub fn char_sum_split(chi: &DirichletCharacter, m: i128, b: u64, kappa: u32) -> Result<Complex64> {
    if kappa < chi.k1 || kappa > chi.n {
        return Err(Error::BadParameter(format!(
            "kappa = {kappa} must lie in [{}, {}]",
            chi.k1, chi.n
        )));
    }
    guard(b, "char_sum_split")?;
    let p = chi.p;
    let pk = p.pow(kappa) as i128;
    let prec = default_precision(p, chi.n);
    let ctx = Modulus::new(p, prec)?;
    let mut acc = Kahan::default();
    for c in 1..=pk {
        if c % p as i128 == 0 {
            continue;
        }
        let lo = (m - c).div_euclid(pk);
        let hi = (m + b as i128 - c).div_euclid(pk);
        if hi <= lo {
            continue;
        }
        let cp = ctx.inv(c as u64).expect("unit");
        let f = log1p_series(p, kappa, cp, prec)?.scale(chi.a0);
        let poly = PhasePoly::from_series(&f, chi.n)?;
        let inner = crate::expsum::poly_sum(&poly, lo + 1, (hi - lo) as u64);
        acc.add(chi.eval(c) * inner);
    }
    Ok(acc.value())
}

/// `eps(chi) = i^-s q^-1/2 sum_{m mod q} chi(m) e(m/q)`.
pub fn gauss_eps_char(chi: &DirichletCharacter) -> Result<Complex64> {
    if !chi.is_primitive() {
        return Err(Error::HypothesesUnmet(
            "epsilon undefined: the character is not primitive".into(),
        ));
    }
    guard(chi.q, "gauss_eps")?;
    let d = chi.denominator();
    let tau = (0..chi.q as i128)
        .filter_map(|m| chi.exponent(m).map(|r| (r + m as u64 * chi.g_ord) % d))
        .map(|r| e_frac(r, d))
        .collect::<Kahan>()
        .value();
    let i_pow = if chi.parity() == 1 {
        Complex64::new(0.0, -1.0)
    } else {
        Complex64::new(1.0, 0.0)
    };
    Ok(i_pow * tau / (chi.q as f64).sqrt())
}

/// The phase `f_c(t) = a0 log(1 + p^kappa c' t)` of `chi` on `c + p^kappa Z`,
/// in class `F(kappa, 1, kappa, inf, inf, c', a0 c')`.
pub fn inner_phase(c: u64, kappa: u32, a0: u64, p: u64, n: u32) -> Result<PhaseF> {
    if c.is_multiple_of(p) {
        return Err(Error::BadParameter(format!("{p} divides c = {c}")));
    }
    if kappa < kappa1(p) {
        return Err(Error::BadParameter(format!("kappa = {kappa} is below {}", kappa1(p))));
    }
    PhaseF::log_phase(p, n, kappa, c, a0)
}
