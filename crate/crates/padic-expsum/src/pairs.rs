//! Exponent pairs and data under the `A` and `B` processes, in exact
//! rational arithmetic.
//!
//! A word such as `"ABAAAB"` is applied right to left to the trivial pair
//! `(0, 1)`. [`eval_datum`] runs the same word through the full bookkeeping
//! of `(r, delta, n0, u0, kappa0, lambda0)` at given `(y, p, kappa, lambda)`.

use std::collections::HashMap;

use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::padic_core::{
    ceil_i64, eps, floor_i64, format_rational, iota_prime, iota_prime_int, is_prime,
    ord_rational, rat, rat_int, rho, rho_of, Rational,
};

pub const MAX_SEARCH_LEN: usize = 24;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pair {
    pub k: Rational,
    pub l: Rational,
}

impl Pair {
    pub fn trivial() -> Self {
        Pair {
            k: Rational::zero(),
            l: Rational::one(),
        }
    }

    pub fn a(&self) -> Self {
        let d = (&self.k + rat_int(1)) * rat_int(2);
        Pair {
            k: &self.k / &d,
            l: (&self.k + &self.l + rat_int(1)) / d,
        }
    }

    pub fn b(&self) -> Self {
        let half = rat(1, 2);
        Pair {
            k: &self.l - &half,
            l: &self.k + half,
        }
    }

    /// `(k + l)/2 - 1/4`, the exponent this pair yields for central values.
    pub fn theta(&self) -> Rational {
        (&self.k + &self.l) / rat_int(2) - rat(1, 4)
    }
}

fn check_word(word: &str) -> Result<()> {
    match word.chars().find(|c| *c != 'A' && *c != 'B') {
        Some(c) => Err(Error::Parse(format!("word letter {c:?} is not A or B"))),
        None => Ok(()),
    }
}

/// Applies `word` right to left to `(0, 1)`.
pub fn word_to_pair(word: &str) -> Result<Pair> {
    check_word(word)?;
    Ok(word.chars().rev().fold(Pair::trivial(), |q, c| match c {
        'A' => q.a(),
        _ => q.b(),
    }))
}

pub fn theta(word: &str) -> Result<Rational> {
    Ok(word_to_pair(word)?.theta())
}

/// Lexicographically least word of length at most `max_len` minimising
/// `k + l` (equivalently `theta`).
///
/// Words are built by prepending letters, level by level in length. For a
/// fixed length the lex-least word reaching a pair is its first letter
/// followed by the lex-least word of the preimage, and both `A` and `B` are
/// injective, so one word per (length, pair) suffices.
pub fn search_min_theta(max_len: usize) -> Result<(String, Pair)> {
    if max_len > MAX_SEARCH_LEN {
        return Err(Error::GuardExceeded(format!(
            "search length {max_len} exceeds {MAX_SEARCH_LEN}"
        )));
    }
    let mut level: HashMap<Pair, String> = HashMap::new();
    level.insert(Pair::trivial(), String::new());
    let mut best: Option<(Rational, String, Pair)> = None;
    let mut consider = |level: &HashMap<Pair, String>| {
        for (q, w) in level {
            let s = &q.k + &q.l;
            let better = match &best {
                None => true,
                Some((bs, bw, _)) => s < *bs || (s == *bs && w < bw),
            };
            if better {
                best = Some((s, w.clone(), q.clone()));
            }
        }
    };
    consider(&level);
    for _ in 0..max_len {
        let mut next: HashMap<Pair, String> = HashMap::new();
        for (q, w) in &level {
            for (c, img) in [('A', q.a()), ('B', q.b())] {
                let cand = format!("{c}{w}");
                next.entry(img)
                    .and_modify(|cur| {
                        if cand < *cur {
                            *cur = cand.clone();
                        }
                    })
                    .or_insert(cand);
            }
        }
        consider(&next);
        level = next;
    }
    let (_, w, q) = best.expect("level 0 is never empty");
    Ok((w, q))
}

/// Full exponent datum; `n0` and `u0` are integers, `kappa0`, `lambda0`
/// may be fractional multiples of `rho`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Datum {
    pub k: Rational,
    pub l: Rational,
    pub r: Rational,
    pub delta: Rational,
    pub n0: Rational,
    pub u0: Rational,
    pub kappa0: Rational,
    pub lambda0: Rational,
}

impl Datum {
    pub fn pair(&self) -> Pair {
        Pair {
            k: self.k.clone(),
            l: self.l.clone(),
        }
    }
}

/// `lambda = None` means `lambda = infinity`.
#[derive(Clone, Debug)]
pub struct DatumParams {
    pub p: u64,
    pub y: Rational,
    pub kappa: i64,
    pub lambda: Option<Rational>,
}

#[derive(Serialize)]
pub struct DatumJson {
    pub word: String,
    pub k: String,
    pub l: String,
    pub theta: String,
    pub r: String,
    pub delta: String,
    pub n0: String,
    pub u0: String,
    pub kappa0: String,
    pub lambda0: String,
}

impl DatumJson {
    pub fn new(word: &str, d: &Datum) -> Self {
        let f = format_rational;
        DatumJson {
            word: word.to_string(),
            k: f(&d.k),
            l: f(&d.l),
            theta: f(&d.pair().theta()),
            r: f(&d.r),
            delta: f(&d.delta),
            n0: f(&d.n0),
            u0: f(&d.u0),
            kappa0: f(&d.kappa0),
            lambda0: f(&d.lambda0),
        }
    }
}

/// Max over the finite candidates; `None` entries stand for `-infinity`.
fn max_of(xs: impl IntoIterator<Item = Option<Rational>>) -> Rational {
    xs.into_iter()
        .flatten()
        .max()
        .expect("at least one finite candidate")
}

fn min_lambda(a: Rational, b: &Option<Rational>) -> Rational {
    match b {
        Some(b) if *b < a => b.clone(),
        _ => a,
    }
}

/// Records every argument `y` visited, for the genericity check.
struct Visit<'a> {
    ys: &'a mut Vec<Rational>,
}

/// Evaluates the datum that `word` (right to left, from the trivial datum)
/// yields at the given parameters.
///
/// With `assert_generic`, also checks that `p > 3` and every `y` value at
/// which a sub-datum is evaluated is a `p`-adic unit; this is the regime in
/// which the closed-form table for `kappa = tilde lambda` applies.
pub fn eval_datum(word: &str, params: &DatumParams, assert_generic: bool) -> Result<Datum> {
    check_word(word)?;
    let p = params.p;
    if !is_prime(p) {
        return Err(Error::BadParameter(format!("{p} is not prime")));
    }
    if params.y <= Rational::zero() {
        return Err(Error::BadParameter("y must be a positive rational".into()));
    }
    if params.kappa < 1 + iota_prime_int(p, 2) {
        return Err(Error::BadParameter(format!(
            "kappa = {} is below 1 + iota'(2)",
            params.kappa
        )));
    }
    let mut ys = Vec::new();
    let d = eval_rec(
        word.as_bytes(),
        p,
        &params.y,
        params.kappa,
        &params.lambda,
        &mut Visit { ys: &mut ys },
    )?;
    if assert_generic {
        if p <= 3 {
            return Err(Error::HypothesesUnmet(format!("p = {p} is not generic")));
        }
        if let Some(y) = ys.iter().find(|y| ord_rational(p, y) != Some(0)) {
            return Err(Error::HypothesesUnmet(format!(
                "y = {} is not a {p}-adic unit",
                format_rational(y)
            )));
        }
    }
    Ok(d)
}

fn base_datum(p: u64, y: &Rational, kappa: i64) -> Datum {
    Datum {
        k: Rational::zero(),
        l: Rational::one(),
        r: Rational::zero(),
        delta: Rational::zero(),
        n0: rat_int(kappa + iota_prime(p, y) + 1),
        u0: Rational::one(),
        kappa0: rat_int(1 + iota_prime_int(p, 2)),
        lambda0: rho(p),
    }
}

fn eval_rec(
    word: &[u8],
    p: u64,
    y: &Rational,
    kappa: i64,
    lambda: &Option<Rational>,
    v: &mut Visit,
) -> Result<Datum> {
    v.ys.push(y.clone());
    let Some((&c, rest)) = word.split_first() else {
        return Ok(base_datum(p, y, kappa));
    };
    let ip = iota_prime(p, y);
    let kap = rat_int(kappa);
    let lt = min_lambda(&kap - rho_of(p, y), lambda);
    let fl = lambda.as_ref().map(floor_i64);
    let (lt_floor, lt_ceil) = (floor_i64(&lt), ceil_i64(&lt));
    let i4 = iota_prime_int(p, 4);
    let i12 = iota_prime_int(p, 12);
    let i2 = iota_prime_int(p, 2);
    let rest_str = std::str::from_utf8(rest).unwrap();
    let inner = word_to_pair(rest_str)?;

    if c == b'B' {
        let yi = y.recip();
        let s = eval_rec(rest, p, &yi, kappa, &Some(lt.clone()), v)?;
        let ord_y = ord_rational(p, y).unwrap();
        let delta01 = if inner == Pair::trivial() {
            Rational::one()
        } else {
            Rational::zero()
        };
        let q = inner.b();
        return Ok(Datum {
            k: q.k,
            l: q.l,
            r: s.r,
            delta: s.delta + delta01,
            n0: max_of([
                Some(rat_int(kappa + ip + 1 + i12)),
                Some(rat_int(ord_y) + s.n0),
            ]),
            u0: max_of([
                fl.map(|f| rat_int(kappa - f + ip + 1)),
                fl.map(|f| rat_int(ord_y + lt_ceil - f) + &s.u0),
                Some(Rational::one()),
            ]),
            kappa0: max_of([
                Some(rat_int(1 + i4)),
                Some(s.kappa0),
                Some(s.lambda0.clone() + rho_of(p, y)),
            ]),
            lambda0: s.lambda0,
        });
    }

    let q = inner.a();
    if inner.k.is_zero() {
        let s = eval_rec(rest, p, y, kappa, lambda, v)?;
        return Ok(Datum {
            k: q.k,
            l: q.l,
            r: s.r / rat_int(2),
            delta: s.delta / rat_int(2),
            ..s
        });
    }
    if inner.l == Rational::one() {
        return Ok(Datum {
            k: q.k,
            l: q.l,
            r: Rational::zero(),
            delta: &inner.k / (&inner.k + rat_int(1)),
            n0: rat_int(kappa + ip + 1 + i12),
            u0: max_of([fl.map(|f| rat_int(kappa - f + ip + 1)), Some(Rational::one())]),
            kappa0: rat_int(1 + i4),
            lambda0: rho(p),
        });
    }
    let (k, l) = (&inner.k, &inner.l);
    if !(k <= &rat(1, 2) && l >= &rat(1, 2) && l < &Rational::one()) {
        return Err(Error::BadParameter(format!(
            "A-process needs 0 < k <= 1/2 <= l < 1, got ({}, {})",
            format_rational(k),
            format_rational(l)
        )));
    }
    let y1 = y + Rational::one();
    let y2 = y.recip() + Rational::one();
    let lt_opt = Some(lt.clone());
    let s1 = eval_rec(rest, p, &y1, kappa, &lt_opt, v)?;
    let s2 = eval_rec(rest, p, &y2, kappa, &lt_opt, v)?;
    let (i1, i2p) = (iota_prime(p, &y1), iota_prime(p, &y2));
    let ipm = i1.max(i2p);
    let e_pm = eps(p, y).max(eps(p, &y.recip()));
    let r = (&s1.r).max(&s2.r).clone();
    let n0 = (&s1.n0).max(&s2.n0).clone();
    let u0 = (&s1.u0).max(&s2.u0).clone();
    let rp = rho(p);
    let rho_y = rho_of(p, y);

    let r_new = (&r + k * rat_int(1 - kappa - i1.min(i2p))) / ((k + rat_int(1)) * rat_int(2));
    let delta_new = inner_delta(&s1.delta).max(inner_delta(&s2.delta)) / rat_int(2);

    let kappa0 = max_of([
        Some(rat_int(1 + i4)),
        Some(s1.kappa0.clone()),
        Some(s2.kappa0.clone()),
        Some(&rho_y + &s1.lambda0),
        Some(&rho_y + &s2.lambda0),
        Some(&rho_y + &rp * rat_int(2)),
    ]);
    let lambda0 = max_of([
        Some(s1.lambda0.clone()),
        Some(s2.lambda0.clone()),
        Some(&rp * rat_int(2)),
    ]);
    let ipy1 = iota_prime(p, &(y * &y1));
    let u0_new = max_of([
        Some(Rational::one()),
        fl.map(|f| &s1.u0 + rat_int(kappa - f + ip)),
        fl.map(|f| &s2.u0 + rat_int(kappa + lt_ceil - f - lt_floor + ip)),
        fl.map(|f| rat_int(2 * kappa - f - lt_floor + ipy1 + 1)),
        fl.map(|f| rat_int(2 * kappa + lt_ceil - f - 2 * lt_floor + ip + i2p + 1)),
    ]);

    let kk = &kap;
    let ipm_r = rat_int(ipm);
    let one = Rational::one();
    let u_term = &u0 - kk + rat_int(i2 + e_pm);
    let eps_u = if u_term <= Rational::zero() { 0 } else { 1 };
    let mut xs = vec![
        kk * rat_int(2) + &ipm_r * rat_int(2) + rat_int(2 * i12),
        &n0 + kk + &ipm_r - &one,
        &n0 * rat(3, 2) - kk / rat_int(2) - &ipm_r / rat_int(2) - rat(3, 2),
        &n0 + rat_int(i2 + ipm + e_pm - lt_floor),
        ((&r + kk + &ipm_r) * rat_int(2) + (k - &one)) / (&one - l),
    ];
    if eps_u == 1 {
        xs.push(
            (k * rat_int(2) + &one - l) / k * &u_term - (&r - &one) / (k * (k + &one))
                + (kk + &ipm_r) / (k + &one),
        );
    }
    let xmax = xs.into_iter().max().unwrap();
    let n0_new = rat_int(kappa + ip + ceil_i64(&xmax));

    Ok(Datum {
        k: q.k,
        l: q.l,
        r: r_new,
        delta: delta_new,
        n0: n0_new,
        u0: u0_new,
        kappa0,
        lambda0,
    })
}

fn inner_delta(d: &Rational) -> Rational {
    d.max(&Rational::one()).clone()
}

/// Closed forms of [`eval_datum`] for the named words at
/// `kappa = tilde lambda` (`lambda >= kappa`, `y` and all derived arguments
/// units, `p > 3`). Rows are `(word, datum)`.
pub fn simplified_table(p: u64, kappa: i64) -> Vec<(&'static str, Datum)> {
    let kap = rat_int(kappa);
    let one = Rational::one();
    let rp = rho(p);
    let row = |k: Rational, l: Rational, r: Rational, delta: Rational, n0: Rational, l0: Rational| {
        Datum {
            k,
            l,
            r,
            delta,
            n0,
            u0: one.clone(),
            kappa0: one.clone(),
            lambda0: l0,
        }
    };
    let c = |x: Rational| rat_int(ceil_i64(&x));
    let one_minus = &one - &kap;
    // kappa + ceil(23 kappa/2 - 6): the leading kappa comes from the A step
    let n0_a3b = c(&kap * rat(25, 2) - rat_int(6));
    vec![
        ("", row(rat_int(0), one.clone(), rat_int(0), rat_int(0), &kap + rat_int(1), rp.clone())),
        ("B", row(rat(1, 2), rat(1, 2), rat_int(0), one.clone(), &kap + rat_int(1), rp.clone())),
        (
            "AB",
            row(rat(1, 6), rat(2, 3), &one_minus / rat_int(6), rat(1, 2), &kap * rat_int(5) - rat_int(1), &rp * rat_int(2)),
        ),
        (
            "AAB",
            row(rat(1, 14), rat(11, 14), &one_minus / rat_int(7), rat(1, 2), &kap * rat_int(8) - rat_int(3), &rp * rat_int(2)),
        ),
        (
            "AAAB",
            row(
                rat(1, 30),
                rat(13, 15),
                &one_minus / rat_int(10),
                rat(1, 2),
                n0_a3b.clone(),
                &rp * rat_int(2),
            ),
        ),
        (
            "BAAAB",
            row(
                rat(11, 30),
                rat(8, 15),
                &one_minus / rat_int(10),
                rat(1, 2),
                n0_a3b.clone(),
                &rp * rat_int(2),
            ),
        ),
        (
            "ABAAAB",
            row(
                rat(11, 82),
                rat(57, 82),
                &one_minus * rat(7, 41),
                rat(1, 2),
                c(&n0_a3b * rat(3, 2) + (&kap - rat_int(3)) / rat_int(2)),
                &rp * rat_int(2),
            ),
        ),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    // Independent float model of the pair maps, used as an oracle.
    fn float_pair(word: &str) -> (f64, f64) {
        word.chars().rev().fold((0.0, 1.0), |(k, l), c| match c {
            'A' => (k / (2.0 * (k + 1.0)), (k + l + 1.0) / (2.0 * (k + 1.0))),
            _ => (l - 0.5, k + 0.5),
        })
    }

    #[test]
    fn named_pairs() {
        assert_eq!(word_to_pair("B").unwrap(), Pair { k: rat(1, 2), l: rat(1, 2) });
        assert_eq!(word_to_pair("AB").unwrap(), Pair { k: rat(1, 6), l: rat(2, 3) });
        assert_eq!(
            word_to_pair("ABAAAB").unwrap(),
            Pair { k: rat(11, 82), l: rat(57, 82) }
        );
        assert_eq!(theta("ABAAAB").unwrap(), rat(27, 164));
        assert_eq!(theta("AB").unwrap(), rat(1, 6));
        let ph = word_to_pair("ABAAABAABAAB").unwrap();
        assert_eq!(ph, Pair { k: rat(97, 696), l: rat(480, 696) });
        assert_eq!(ph.theta(), rat(229, 1392));
        assert!(word_to_pair("AXB").is_err());
    }

    #[test]
    fn matches_float_model() {
        for w in ["", "A", "BA", "ABAB", "AABBA", "ABAAABAABAAB", "BABABABA"] {
            let q = word_to_pair(w).unwrap();
            let (k, l) = float_pair(w);
            let qk: f64 = num_traits::ToPrimitive::to_f64(&q.k).unwrap();
            let ql: f64 = num_traits::ToPrimitive::to_f64(&q.l).unwrap();
            assert!((qk - k).abs() < 1e-14 && (ql - l).abs() < 1e-14, "{w}");
        }
    }

    #[test]
    fn search_small() {
        assert_eq!(search_min_theta(2).unwrap().0, "AB");
        assert_eq!(search_min_theta(6).unwrap().0, "ABAAAB");
        assert!(search_min_theta(25).is_err());
    }

    // Brute force over every word of length <= 10 as an oracle.
    #[test]
    fn search_agrees_with_exhaustive() {
        let max_len = 10;
        let mut best: Option<(Rational, String)> = None;
        for len in 0..=max_len {
            for bits in 0u32..(1 << len) {
                let w: String = (0..len)
                    .map(|i| if bits >> (len - 1 - i) & 1 == 0 { 'A' } else { 'B' })
                    .collect();
                let q = word_to_pair(&w).unwrap();
                let s = &q.k + &q.l;
                let better = match &best {
                    None => true,
                    Some((bs, bw)) => s < *bs || (s == *bs && w < *bw),
                };
                if better {
                    best = Some((s, w));
                }
            }
        }
        assert_eq!(search_min_theta(max_len).unwrap().0, best.unwrap().1);
    }

    #[test]
    fn trivial_datum_fixed_by_a() {
        let prm = DatumParams { p: 7, y: rat_int(1), kappa: 2, lambda: None };
        let d0 = eval_datum("", &prm, false).unwrap();
        let d1 = eval_datum("A", &prm, false).unwrap();
        assert_eq!(d0, d1);
    }

    #[test]
    fn half_datum_general_form() {
        for p in [2u64, 3, 5, 7] {
            for kappa in (1 + iota_prime_int(p, 2))..5 {
                for lam in [None, Some(rat_int(kappa)), Some(rho(p))] {
                    let y = rat_int(1);
                    let prm = DatumParams { p, y: y.clone(), kappa, lambda: lam.clone() };
                    let d = eval_datum("B", &prm, false).unwrap();
                    let fl = lam.as_ref().map(floor_i64);
                    let u0 = fl.map_or(1, |f| (kappa - f + 1).max(1));
                    assert_eq!(d.n0, rat_int(kappa + 1 + iota_prime_int(p, 12)));
                    assert_eq!(d.u0, rat_int(u0));
                    assert_eq!(d.kappa0, rat_int(1 + iota_prime_int(p, 4)));
                    assert_eq!(d.lambda0, rho(p));
                    assert_eq!((d.r, d.delta), (rat_int(0), rat_int(1)));
                }
            }
        }
    }

    #[test]
    fn table_matches_recursion() {
        for p in [11u64, 13, 17] {
            for kappa in 1..7 {
                for lam in [Some(rat_int(kappa)), None] {
                    let prm = DatumParams { p, y: rat_int(1), kappa, lambda: lam };
                    for (w, expect) in simplified_table(p, kappa) {
                        let d = eval_datum(w, &prm, true).unwrap();
                        assert_eq!(d, expect, "word {w:?} p {p} kappa {kappa}");
                    }
                }
            }
        }
    }

    #[test]
    fn generic_guard_rejects_small_primes() {
        let prm = DatumParams { p: 5, y: rat_int(1), kappa: 1, lambda: None };
        assert!(matches!(
            eval_datum("ABAAAB", &prm, true),
            Err(Error::HypothesesUnmet(_))
        ));
        let prm = DatumParams { p: 3, y: rat_int(1), kappa: 1, lambda: None };
        assert!(eval_datum("AB", &prm, true).is_err());
    }
}
