//! The acceptance criteria with oracles that bypass the library paths under
//! test. `--quick` shrinks the grids but keeps every criterion.

use std::f64::consts::PI;
use std::sync::atomic::{AtomicBool, Ordering};
use std::time::Instant;

use num_complex::Complex64;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use padic_expsum::characters::{char_build, char_sum_split, primitive_characters, DirichletCharacter};
use padic_expsum::expsum::{
    datum_empirical_check, dual_phase, gauss_quadratic, implicit_solve, stationary_restrict,
    summation_formula, weyl_difference, weyl_inequality_report, Cutoff, DatumGrid, PhaseFamily,
};
use padic_expsum::lvalue::{l_central_oracle, AfeTable};
use padic_expsum::padic_core::{format_rational, rat, rat_int, Rational};
use padic_expsum::pairs::{eval_datum, search_min_theta, word_to_pair, Datum, DatumParams};
use padic_expsum::series::{PadicSeries, PhaseF};
use padic_expsum::Error;

/// Criteria known not to pass; `verify-all` succeeds when exactly these fail.
pub const EXPECTED_FAIL: &[usize] = &[3];

static QUICK: AtomicBool = AtomicBool::new(false);

fn quick() -> bool {
    QUICK.load(Ordering::Relaxed)
}

type Outcome = Result<String, String>;

type Criterion = (usize, &'static str, fn() -> Outcome);

fn e(x: f64) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI * x)
}

fn mulm(a: u64, b: u64, m: u64) -> u64 {
    (a as u128 * b as u128 % m as u128) as u64
}

fn powm(mut a: u64, mut k: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    a %= m;
    while k > 0 {
        if k & 1 == 1 {
            r = mulm(r, a, m);
        }
        a = mulm(a, a, m);
        k >>= 1;
    }
    r
}

fn invm(a: u64, m: u64) -> u64 {
    let (mut r0, mut r1) = (m as i128, (a % m) as i128);
    let (mut s0, mut s1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
    }
    assert_eq!(r0, 1, "{a} not invertible mod {m}");
    s0.rem_euclid(m as i128) as u64
}

fn modi(v: i128, m: u64) -> u64 {
    v.rem_euclid(m as i128) as u64
}

/// The `b`-th root of `z = 1 mod p` that is `1 mod p`, by Newton.
fn root_one(z: u64, b: u64, m: u64) -> u64 {
    let mut r = 1u64;
    for _ in 0..70 {
        let f = (powm(r, b, m) + m - z % m) % m;
        if f == 0 {
            break;
        }
        let d = mulm(b % m, powm(r, b - 1, m), m);
        r = (r + m - mulm(f, invm(d, m), m)) % m;
    }
    assert_eq!(powm(r, b, m), z % m);
    r
}

/// Parameters of `f' p^-w = w'(1 + p^kappa w x)^-(a/b) + g0 + p^u g(x)`.
#[derive(Clone, Debug)]
struct Cfg {
    p: u64,
    n: u32,
    w: i32,
    y: (u64, u64),
    kappa: u32,
    omega: u64,
    omega_p: u64,
    pert: Option<(u64, i64, Vec<i128>)>,
}

impl Cfg {
    fn pure(p: u64, n: u32, w: i32, y: (u64, u64), kappa: u32, omega: u64, omega_p: u64) -> Self {
        Cfg { p, n, w, y, kappa, omega, omega_p, pert: None }
    }

    fn log(p: u64, n: u32, kappa: u32, c: u64, a0: u64) -> Self {
        let m = p.pow(n + 4);
        let cp = invm(c, m);
        Cfg::pure(p, n, kappa as i32, (1, 1), kappa, cp, mulm(a0, cp, m))
    }

    fn build(&self) -> PhaseF {
        self.try_build().unwrap()
    }

    fn try_build(&self) -> Result<PhaseF, Error> {
        let phi = PhaseF::pure(
            self.p,
            self.n,
            self.w,
            rat(self.y.0 as i64, self.y.1 as i64),
            self.kappa,
            self.omega,
            self.omega_p,
        )?;
        match &self.pert {
            None => Ok(phi),
            Some((g0, u, g)) => {
                let series = PadicSeries::polynomial(self.p, phi.prec, g)?;
                phi.with_perturbation(*g0, *u, rat_int(1), series)
            }
        }
    }

    /// `f'(x) p^-w mod m` for `m` a power of `p`.
    fn deriv(&self, x: i128, m: u64) -> u64 {
        let z = (1 + mulm(mulm(self.p.pow(self.kappa) % m, self.omega % m, m), modi(x, m), m)) % m;
        let root = root_one(z, self.y.1, m);
        let mut v = mulm(self.omega_p % m, invm(powm(root, self.y.0, m), m), m);
        if let Some((g0, u, g)) = &self.pert {
            let xm = modi(x, m);
            let gx = g.iter().rev().fold(0u64, |acc, &c| (mulm(acc, xm, m) + modi(c, m)) % m);
            v = (v + g0 % m + mulm(powm(self.p, *u as u64, m), gx, m)) % m;
        }
        v
    }
}

fn crit1() -> Outcome {
    let cases = [
        ("B", rat(1, 2), rat(1, 2), None),
        ("AB", rat(1, 6), rat(2, 3), None),
        ("ABAAAB", rat(11, 82), rat(57, 82), Some(rat(27, 164))),
        ("ABAAABAABAAB", rat(97, 696), rat(480, 696), Some(rat(229, 1392))),
    ];
    for (w, k, l, th) in cases {
        let q = word_to_pair(w).map_err(|e| e.to_string())?;
        if q.k != k || q.l != l {
            return Err(format!("{w}: got ({}, {})", format_rational(&q.k), format_rational(&q.l)));
        }
        if let Some(th) = th {
            if q.theta() != th {
                return Err(format!("{w}: theta {}", format_rational(&q.theta())));
            }
        }
    }
    Ok("4 words exact".into())
}

fn crit2() -> Outcome {
    let (w, q) = search_min_theta(20).map_err(|e| e.to_string())?;
    let th = q.theta().to_f64().unwrap();
    if th > 0.1645 && th < 0.16452 {
        Ok(format!("min theta {th:.7} at {w}"))
    } else {
        Err(format!("min theta {th} at {w}"))
    }
}

/// Reference values of the simplified data, for `kappa = tilde lambda`.
fn reference_row(word: &str, p: u64, kappa: i64) -> Datum {
    let kap = rat_int(kappa);
    let one = rat_int(1);
    let rp = rat(1, p as i64 - 1);
    let ceil = |x: Rational| rat_int(x.ceil().to_integer().to_i64().unwrap());
    let (k, l, r, delta, n0, l0) = match word {
        "" => (rat_int(0), one.clone(), rat_int(0), rat_int(0), &kap + rat_int(1), rp.clone()),
        "B" => (rat(1, 2), rat(1, 2), rat_int(0), one.clone(), &kap + rat_int(1), rp.clone()),
        "AB" => (rat(1, 6), rat(2, 3), (&one - &kap) / rat_int(6), rat(1, 2), &kap * rat_int(5) - rat_int(1), &rp * rat_int(2)),
        "AAB" => (rat(1, 14), rat(11, 14), (&one - &kap) / rat_int(7), rat(1, 2), &kap * rat_int(8) - rat_int(3), &rp * rat_int(2)),
        "AAAB" => (
            rat(1, 30),
            rat(13, 15),
            (&one - &kap) / rat_int(10),
            rat(1, 2),
            ceil(&kap * rat(23, 2) - rat_int(6)),
            &rp * rat_int(2),
        ),
        "BAAAB" => (
            rat(11, 30),
            rat(8, 15),
            (&one - &kap) / rat_int(10),
            rat(1, 2),
            ceil(&kap * rat(23, 2) - rat_int(6)),
            &rp * rat_int(2),
        ),
        "ABAAAB" => (
            rat(11, 82),
            rat(57, 82),
            (&one - &kap) * rat(7, 41),
            rat(1, 2),
            ceil(&kap * rat(71, 4) - rat(39, 4)),
            &rp * rat_int(2),
        ),
        _ => unreachable!(),
    };
    Datum { k, l, r, delta, n0, u0: one.clone(), kappa0: one, lambda0: l0 }
}

fn crit3() -> Outcome {
    let p = 11;
    let mut bad = Vec::new();
    for kappa in 1..=4 {
        let params = DatumParams { p, y: rat_int(1), kappa, lambda: None };
        for w in ["", "B", "AB", "AAB", "AAAB", "BAAAB", "ABAAAB"] {
            let got = eval_datum(w, &params, true).map_err(|e| e.to_string())?;
            let want = reference_row(w, p, kappa);
            let fields = [
                ("k", &got.k, &want.k),
                ("l", &got.l, &want.l),
                ("r", &got.r, &want.r),
                ("delta", &got.delta, &want.delta),
                ("n0", &got.n0, &want.n0),
                ("u0", &got.u0, &want.u0),
                ("kappa0", &got.kappa0, &want.kappa0),
                ("lambda0", &got.lambda0, &want.lambda0),
            ];
            for (name, g, t) in fields {
                if g != t {
                    bad.push(format!(
                        "{w} kappa={kappa} {name}: {} vs reference {}",
                        format_rational(g),
                        format_rational(t)
                    ));
                }
            }
        }
    }
    // omega_1/2 for generic p, y: (1/2, 1/2, 0, 1, (kappa+1, max(kappa-floor(lambda)+1, 1), 1, rho))
    for (kappa, lambda) in [(1, rat_int(1)), (2, rat(5, 2)), (3, rat_int(7))] {
        let params = DatumParams { p: 13, y: rat(2, 3), kappa, lambda: Some(lambda.clone()) };
        let d = eval_datum("B", &params, false).map_err(|e| e.to_string())?;
        let fl = lambda.floor().to_integer().to_i64().unwrap();
        let u0 = rat_int((kappa - fl + 1).max(1));
        if d.n0 != rat_int(kappa + 1) || d.u0 != u0 || d.kappa0 != rat_int(1) || d.lambda0 != rat(1, 12) {
            bad.push(format!("omega_1/2 kappa={kappa}"));
        }
    }
    if bad.is_empty() {
        Ok("7 rows x 4 kappa and omega_1/2 exact".into())
    } else {
        Err(bad.join("; "))
    }
}

/// `sum_{x mod q} e(a x^2/q)` term by term.
fn gauss_brute(a: u64, p: u64, n: u32) -> Complex64 {
    let q = p.pow(n);
    let mut acc = Complex64::default();
    let mut comp = Complex64::default();
    for x in 0..q {
        let z = e(mulm(a, mulm(x, x, q), q) as f64 / q as f64) - comp;
        let t = acc + z;
        comp = (t - acc) - z;
        acc = t;
    }
    acc
}

/// Same sum with `x = x0 + p^k y`, `2k >= n`: the `y`-sum is
/// `p^(n-k)` when `p^(n-k) | 2 a x0` and 0 otherwise.
fn gauss_split(a: u64, p: u64, n: u32) -> Complex64 {
    let q = p.pow(n);
    let k = n.div_ceil(2);
    let inner = p.pow(n - k);
    (0..p.pow(k))
        .filter(|&x0| mulm(2 * a % q, x0, q).is_multiple_of(inner))
        .map(|x0| e(mulm(a, mulm(x0, x0, q), q) as f64 / q as f64) * inner as f64)
        .sum()
}

fn crit4() -> Outcome {
    let mut count = 0;
    let mut worst = 0f64;
    for p in [2u64, 3, 5, 7, 13] {
        for n in 1..=if quick() { 4 } else { 6 } {
            let q = p.pow(n);
            let step = p.pow(n.min(3));
            let units: Vec<u64> = (1..step).filter(|a| a % p != 0).collect();
            let sums: Vec<Complex64> = units
                .iter()
                .map(|&a| if q <= 150_000 { gauss_brute(a, p, n) } else { gauss_split(a, p, n) })
                .collect();
            if q <= 400_000 {
                for &a in units.iter().take(4) {
                    if (gauss_split(a, p, n) - gauss_brute(a, p, n)).norm() > 1e-9 {
                        return Err(format!("oracles disagree at p={p} n={n} a={a}"));
                    }
                }
            }
            for (&a, z) in units.iter().zip(&sums) {
                let f = gauss_quadratic(a as i128, p, n).map_err(|e| e.to_string())?;
                worst = worst.max((z - f).norm());
                count += 1;
            }
        }
    }
    if worst < 1e-9 {
        Ok(format!("{count} sums, max diff {worst:.1e}"))
    } else {
        Err(format!("max diff {worst:e}"))
    }
}

fn random_cfg(rng: &mut ChaCha8Rng) -> Cfg {
    let p = [5u64, 7][rng.gen_range(0..2)];
    let n = rng.gen_range(3..=7u32);
    let kappa = rng.gen_range(1..=2u32.min(n - 1));
    let unit = |rng: &mut ChaCha8Rng| loop {
        let v = rng.gen_range(1..p * p);
        if v % p != 0 {
            break v;
        }
    };
    let y = [(1u64, 1u64), (1, 2), (2, 1), (3, 2)][rng.gen_range(0..4)];
    let w = rng.gen_range(0..=kappa as i32);
    let mut s = Cfg::pure(p, n, w, y, kappa, unit(rng), unit(rng));
    if rng.gen_bool(0.3) {
        s.pert = Some((rng.gen_range(0..p), rng.gen_range(1..=2), vec![rng.gen_range(0..9), rng.gen_range(0..9)]));
    }
    s
}

fn crit5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_501);
    let mut done = 0;
    let mut worst = 0f64;
    let mut tries = 0;
    let target = if quick() { 15 } else { 50 };
    while done < target {
        tries += 1;
        if tries > 5000 {
            return Err(format!("only {done} admissible configurations"));
        }
        let cfg = random_cfg(&mut rng);
        if cfg.n as i32 - cfg.w < 2 {
            continue;
        }
        let Ok(phi) = cfg.try_build() else { continue };
        let d = (cfg.n as i32 - cfg.w) as u32;
        let j = rng.gen_range(1..d);
        let st = match stationary_restrict(&phi, j) {
            Ok(s) => s,
            Err(Error::HypothesesUnmet(_)) => continue,
            Err(e) => return Err(e.to_string()),
        };
        let per = cfg.p.pow(d);
        let pw = cfg.p.pow(cfg.w as u32);
        let pj = cfg.p.pow(j);
        let poly = phi.poly().map_err(|e| e.to_string())?;
        let (mut full, mut restricted) = (Complex64::default(), Complex64::default());
        for m in 0..per as i128 {
            let z = e((poly.eval(m) / pw) as f64 / per as f64);
            full += z;
            if cfg.deriv(m, pj) == 0 {
                restricted += z;
            }
        }
        let diff = (restricted - full)
            .norm()
            .max((st.full - full).norm())
            .max((st.restricted - restricted).norm());
        worst = worst.max(diff);
        done += 1;
    }
    if worst < 1e-9 {
        Ok(format!("{target} configurations, max diff {worst:.1e}"))
    } else {
        Err(format!("max diff {worst:e}"))
    }
}

fn salie(p: u64, n: u32, kappa: u32, c: u64) -> Cfg {
    let m = p.pow(n + 4);
    let cp = invm(c, m);
    // l with l^2 = c, by brute force mod p then Newton through the oracle root
    let l0 = (1..p).find(|l| l * l % p == c % p).expect("square");
    let mut l = l0;
    for _ in 0..70 {
        let f = (mulm(l, l, m) + m - c % m) % m;
        if f == 0 {
            break;
        }
        l = (l + m - mulm(f, invm(2 * l % m, m), m)) % m;
    }
    Cfg::pure(p, n, kappa as i32, (1, 2), kappa, cp, mulm(l, cp, m))
}

fn crit6() -> Outcome {
    let mut worst = 0f64;
    let mut count = 0;
    let grid: &[(u64, u32, u32)] = if quick() { &[(5, 5, 1)] } else { &[(5, 6, 1), (7, 6, 1), (5, 7, 2)] };
    for &(p, n, kappa) in grid {
        let c_sq = if p == 5 { 4 } else { 2 };
        for cfg in [Cfg::log(p, n, kappa, 2, 3), Cfg::log(p, n, kappa, 1, 1), salie(p, n, kappa, c_sq)] {
            let phi = cfg.build();
            let d = dual_phase(&phi).map_err(|e| e.to_string())?;
            let nw = n - cfg.w as u32;
            let per = p.pow(nw);
            let pw = p.pow(cfg.w as u32);
            let ek = kappa;
            let step = p.pow(ek);
            let s0 = cfg.deriv(0, per);
            if s0 != d.s0 % per {
                return Err(format!("s0 {s0} vs {}", d.s0));
            }
            let poly = phi.poly().map_err(|e| e.to_string())?;
            let fv: Vec<u64> = (0..per as i128).map(|m| poly.eval(m) / pw).collect();
            let roots: Vec<Complex64> = (0..per).map(|k| e(k as f64 / per as f64)).collect();
            let dpoly = d.dual.poly().map_err(|e| e.to_string())?;
            let mag = (p as f64).powf((nw + ek) as f64 / 2.0);
            for s in 0..per {
                let mut sm = 0u64;
                let mut z = Complex64::default();
                for &f in &fv {
                    z += roots[((f + per - sm) % per) as usize];
                    sm = (sm + s) % per;
                }
                let off = (s + per - s0) % per;
                let err = if off % step != 0 {
                    z.norm()
                } else {
                    let want = d.eps * mag * e(dpoly.eval((off / step) as i128) as f64 / p.pow(n) as f64);
                    (z - want).norm()
                };
                worst = worst.max(err);
                count += 1;
            }
        }
    }
    if worst < 1e-8 {
        Ok(format!("{count} transform values, max err {worst:.1e}"))
    } else {
        Err(format!("max err {worst:e}"))
    }
}

fn crit7() -> Outcome {
    let cases: Vec<(Cfg, f64)> = vec![
        (Cfg::log(5, 8, 1, 2, 3), 125.0),
        (Cfg::log(5, 8, 1, 2, 3), 1.0),
        (Cfg::log(5, 7, 1, 1, 2), 57.5),
        (Cfg::log(7, 7, 1, 3, 1), 49.0),
        (salie(7, 7, 1, 2), 49.0),
        (salie(7, 7, 1, 2), 7.5),
        (salie(5, 8, 1, 4), 100.0),
        (Cfg::pure(5, 8, 1, (1, 2), 2, 2, 3), 31.0),
        (Cfg::pure(5, 8, 1, (2, 1), 1, 2, 3), 125.0),
        (Cfg::pure(5, 8, 1, (2, 1), 1, 1, 4), 30.0),
        (Cfg::pure(7, 7, 1, (2, 1), 1, 1, 3), 49.0),
        (Cfg::pure(7, 7, 1, (2, 1), 1, 2, 5), 200.0),
    ];
    let take = if quick() { 4 } else { cases.len() };
    let mut worst = 0f64;
    for (cfg, b) in cases.iter().take(take) {
        let phi = cfg.build();
        let r = summation_formula(&phi, *b, Cutoff::Gaussian).map_err(|e| format!("{cfg:?}: {e}"))?;
        let poly = phi.poly().map_err(|e| e.to_string())?;
        let q = cfg.p.pow(cfg.n) as f64;
        let lim = (6.5 * b).ceil() as i128 + 1;
        let lhs: Complex64 = (-lim..=lim)
            .map(|m| e(poly.eval(m) as f64 / q) * (-PI * (m as f64 / b).powi(2)).exp())
            .sum();
        let rel = (lhs - r.rhs).norm() / lhs.norm();
        if !(rel < 1e-7) {
            return Err(format!("{cfg:?} B={b}: rel {rel:e}"));
        }
        worst = worst.max(rel);
    }
    Ok(format!("{take} configurations, max rel {worst:.1e}"))
}

fn crit8() -> Outcome {
    let cases = vec![
        Cfg::log(5, 8, 1, 2, 3),
        Cfg::log(5, 8, 2, 3, 1),
        Cfg::log(7, 7, 1, 1, 4),
        salie(7, 7, 1, 2),
        salie(5, 8, 1, 4),
        Cfg::pure(5, 8, 1, (2, 1), 1, 2, 3),
        Cfg::pure(7, 6, 1, (2, 1), 2, 1, 4),
        Cfg::pure(5, 8, 1, (3, 2), 1, 3, 2),
        Cfg { pert: Some((4, 2, vec![3, 7, 98])), ..Cfg::pure(7, 6, 1, (1, 2), 2, 3, 5) },
        Cfg { pert: Some((1, 2, vec![2, 5])), ..Cfg::log(5, 8, 1, 1, 2) },
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for cfg in &cases {
        let phi = cfg.build();
        let s = implicit_solve(&phi).map_err(|e| format!("{cfg:?}: {e}"))?;
        let q = cfg.p.pow(cfg.n);
        let f = s.f_tilde.with_shift(0).map_err(|e| e.to_string())?;
        let g0 = cfg.deriv(0, q) + q - mulm(cfg.omega_p, 1, q);
        let pe = cfg.p.pow(cfg.kappa);
        for _ in 0..50 {
            let t = rng.gen_range(0..q);
            let x = f.eval_raw(t) % q;
            let lhs = cfg.deriv(x as i128, q);
            let rhs = (g0 + mulm(cfg.omega_p, 1 + mulm(pe, t, q), q)) % q;
            if lhs != rhs {
                return Err(format!("{cfg:?} t={t}: {lhs} != {rhs}"));
            }
        }
    }
    // y = 1, g = 0: f~(t) = w^-1 sum_k (-1)^k p^(kappa(k-1)) t^k
    let cfg = Cfg::log(5, 8, 2, 3, 1);
    let s = implicit_solve(&cfg.build()).map_err(|e| e.to_string())?;
    let f = s.f_tilde.with_shift(0).map_err(|e| e.to_string())?;
    let m = cfg.p.pow(f.precision());
    let winv = invm(cfg.omega, m);
    for k in 1..8u64 {
        let mag = mulm(winv, powm(cfg.p.pow(cfg.kappa), k - 1, m), m);
        let want = if k % 2 == 1 { (m - mag) % m } else { mag };
        if f.coeff(k as usize) % m != want {
            return Err(format!("closed form coefficient {k}"));
        }
    }
    Ok("10 configurations x 50 points, closed form exact".into())
}

fn crit9() -> Outcome {
    let mut checked = 0;
    for (cfg, m0, b, hstep) in [
        (Cfg::log(5, 8, 1, 2, 3), 17i128, 625u64, 25u64),
        (salie(7, 7, 1, 2), -40, 343, 7),
        (Cfg::pure(5, 8, 1, (2, 1), 1, 2, 3), 3, 250, 5),
    ] {
        let phi = cfg.build();
        let rep = weyl_inequality_report(&phi, m0, b, hstep).map_err(|e| e.to_string())?;
        let poly = phi.poly().map_err(|e| e.to_string())?;
        let q = cfg.p.pow(cfg.n);
        for (h, len, inner) in &rep.inner {
            let shift = *h as i128 * hstep as i128;
            if *len != b - h.unsigned_abs() * hstep {
                return Err(format!("|J({h})| = {len}"));
            }
            let direct: Complex64 = (m0 + 1..=m0 + b as i128)
                .filter(|m| m + shift > m0 && m + shift <= m0 + b as i128)
                .map(|m| e(((poly.eval(m + shift) + q - poly.eval(m)) % q) as f64 / q as f64))
                .sum();
            if (direct - inner).norm() > 1e-9 {
                return Err(format!("inner sum at h = {h}"));
            }
            // class certificate and decomposition for h H = p^chi h'
            let mut hp = shift;
            let mut chi = 0;
            while hp % cfg.p as i128 == 0 {
                hp /= cfg.p as i128;
                chi += 1;
            }
            let wd = weyl_difference(&phi, chi, hp).map_err(|e| format!("h = {h}: {e}"))?;
            let dpoly = wd.phase.poly().map_err(|e| e.to_string())?;
            for t in 0..40i128 {
                let want = (poly.eval(t + shift) + q - poly.eval(t)) % q;
                if (wd.constant + dpoly.eval(t)) % q != want {
                    return Err(format!("decomposition at h = {h}, t = {t}"));
                }
            }
            checked += 1;
        }
    }
    Ok(format!("{checked} differenced phases certified"))
}

fn naive_char_sum(chi: &DirichletCharacter, m: i128, b: u64) -> Complex64 {
    (m + 1..=m + b as i128).map(|x| chi.eval(x)).sum()
}

fn crit10() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut worst = 0f64;
    for (p, n) in [(5u64, 4u32), (7, 3), (3, 6), (2, 8), (11, 3)] {
        let g = if p == 2 { 2 } else { p - 1 };
        let q = p.pow(n) as i128;
        for _ in 0..6 {
            let chi = char_build(p, n, rng.gen_range(0..q as u64), rng.gen_range(0..g)).map_err(|e| e.to_string())?;
            for _ in 0..500 {
                let u = rng.gen_range(-q..3 * q);
                let v = rng.gen_range(-q..3 * q);
                worst = worst.max((chi.eval(u) * chi.eval(v) - chi.eval(u * v)).norm());
                worst = worst.max((chi.eval(u + q) - chi.eval(u)).norm());
            }
        }
    }
    if worst > 1e-12 {
        return Err(format!("multiplicativity or period off by {worst:e}"));
    }
    let mut checked = 0;
    for p in [2u64, 3, 5, 7, 11] {
        let k1 = if p == 2 { 2 } else { 1 };
        let mut n = k1 + 1;
        while p.pow(n - k1) <= 125 {
            for a0 in 0..p.pow(n - k1) {
                let chi = char_build(p, n, a0, 0).map_err(|e| e.to_string())?;
                let step = p.pow(n - 1) as i128;
                let conductor_full = (1..p as i128).any(|k| (chi.eval(1 + k * step) - 1.0).norm() > 1e-9);
                if conductor_full != (a0 % p != 0) || chi.is_primitive() != conductor_full {
                    return Err(format!("primitivity at p={p} n={n} a0={a0}"));
                }
                checked += 1;
            }
            n += 1;
        }
    }
    let mut split = 0f64;
    for (p, n, a0, psi) in [(5u64, 5u32, 3u64, 1u64), (7, 4, 2, 3), (2, 9, 5, 1), (3, 7, 4, 1)] {
        let chi = char_build(p, n, a0, psi).map_err(|e| e.to_string())?;
        let k1 = if p == 2 { 2 } else { 1 };
        for kappa in k1..=k1 + 2 {
            for (m, b) in [(-31i128, 2000u64), (1000, 777)] {
                let s = char_sum_split(&chi, m, b, kappa).map_err(|e| e.to_string())?;
                split = split.max((s - naive_char_sum(&chi, m, b)).norm());
            }
        }
    }
    if split > 1e-10 {
        return Err(format!("split form off by {split:e}"));
    }
    Ok(format!("{checked} twists classified, split max {split:.1e}"))
}

fn crit11() -> Outcome {
    let (mut worst, mut sym, mut count) = (0f64, 0f64, 0);
    let moduli: &[(u64, u32)] = if quick() { &[(5, 2)] } else { &[(5, 3), (7, 3)] };
    for &(p, n) in moduli {
        let q = p.pow(n);
        let tables = [
            AfeTable::new(q, 2, 0).map_err(|e| e.to_string())?,
            AfeTable::new(q, 2, 1).map_err(|e| e.to_string())?,
        ];
        for chi in primitive_characters(p, n).map_err(|e| e.to_string())? {
            let t = &tables[chi.parity() as usize];
            let a = t.central_value(&chi).map_err(|e| e.to_string())?.value;
            let o = l_central_oracle(&chi).map_err(|e| e.to_string())?;
            let c = t.central_value(&chi.conj()).map_err(|e| e.to_string())?.value;
            worst = worst.max((a - o).norm());
            sym = sym.max((c - a.conj()).norm());
            count += 1;
        }
    }
    if worst < 1e-6 && sym < 1e-9 {
        Ok(format!("{count} characters, max diff {worst:.1e}, symmetry {sym:.1e}"))
    } else {
        Err(format!("max diff {worst:e}, symmetry {sym:e}"))
    }
}

fn crit12() -> Outcome {
    let fixture: serde_json::Value = serde_json::from_str(FIXTURE).map_err(|e| e.to_string())?;
    let pinned = fixture["sup_ratio"].as_f64().ok_or("fixture lacks sup_ratio")?;
    let word = fixture["word"].as_str().ok_or("fixture lacks word")?;
    let mut grid = DatumGrid::default();
    if quick() {
        // a sub-grid can only lower the sup
        grid.primes = vec![5, 7];
        grid.n_max = 6;
    }
    let rep = datum_empirical_check(word, &PhaseFamily::default(), &grid).map_err(|e| e.to_string())?;
    if rep.sup_ratio <= pinned * 1.01 {
        Ok(format!("sup ratio {:.6} vs pinned {pinned:.6}, {} rows", rep.sup_ratio, rep.rows.len()))
    } else {
        Err(format!("sup ratio {} exceeds pinned {pinned}", rep.sup_ratio))
    }
}

const FIXTURE: &str = include_str!("../../padic-expsum/tests/fixtures/datum_calibration.json");

const CRITERIA: [Criterion; 12] = [
    (1, "exponent pair golden values", crit1),
    (2, "word search", crit2),
    (3, "datum table", crit3),
    (4, "Gauss sums", crit4),
    (5, "stationary phase", crit5),
    (6, "Fourier dichotomy and dual phase", crit6),
    (7, "summation formula", crit7),
    (8, "implicit function", crit8),
    (9, "Weyl differencing", crit9),
    (10, "character machinery", crit10),
    (11, "L-value oracle", crit11),
    (12, "empirical datum bound", crit12),
];

/// Runs every criterion; returns the table and whether each outcome matched
/// [`EXPECTED_FAIL`].
pub fn run_all(fast: bool) -> (String, bool) {
    QUICK.store(fast, Ordering::Relaxed);
    let mut table = String::new();
    let mut all_ok = true;
    for (id, name, f) in CRITERIA {
        let t = Instant::now();
        let out = f();
        let el = t.elapsed();
        let expected = EXPECTED_FAIL.contains(&id);
        let status = match (&out, expected) {
            (Ok(_), false) => "PASS",
            (Ok(_), true) => "XPASS",
            (Err(_), true) => "XFAIL",
            (Err(_), false) => "FAIL",
        };
        let detail = match &out {
            Ok(d) | Err(d) => d,
        };
        table.push_str(&format!("{id:>2} {status:<5} {name}: {detail} ({el:.2?})\n"));
        all_ok &= out.is_ok() != expected;
    }
    (table, all_ok)
}
