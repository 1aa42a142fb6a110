//! Quadratic Gauss sums `tau_a(p^n) = sum_{m mod p^n} e(a m^2 / p^n)`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::padic_core::{e_frac, iota_prime_int, is_prime, jacobi};

/// The unit factor `epsilon(a, p^n)` with `tau_a(p^n) = p^((n + iota'(2))/2) epsilon`.
/// `n = 0` gives 1 (the empty modulus). For `p = 2, n = 1` it is 0.
pub fn gauss_eps(a: i128, p: u64, n: u32) -> Result<Complex64> {
    if !is_prime(p) {
        return Err(Error::BadParameter(format!("{p} is not prime")));
    }
    if a.rem_euclid(p as i128) == 0 {
        return Err(Error::BadParameter(format!("{p} divides a = {a}")));
    }
    if n == 0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let i = Complex64::new(0.0, 1.0);
    if p != 2 {
        if n.is_multiple_of(2) {
            return Ok(Complex64::new(1.0, 0.0));
        }
        let leg = jacobi(a, p) as f64;
        return Ok(if p % 4 == 1 {
            Complex64::new(leg, 0.0)
        } else {
            i * leg
        });
    }
    if n == 1 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let ia = i.powi(a.rem_euclid(4) as i32);
    let base = (Complex64::new(1.0, 0.0) + ia) / std::f64::consts::SQRT_2;
    if n.is_multiple_of(2) {
        Ok(base)
    } else {
        // (2/a) = (-1)^((a^2 - 1)/8) for odd a
        let r = a.rem_euclid(8);
        let s = if r == 1 || r == 7 { 1.0 } else { -1.0 };
        Ok(base * s)
    }
}

/// `tau_a(p^n)` from the closed form.
pub fn gauss_quadratic(a: i128, p: u64, n: u32) -> Result<Complex64> {
    if n == 0 {
        return Err(Error::BadParameter("n must be at least 1".into()));
    }
    let eps = gauss_eps(a, p, n)?;
    let e = (n as i64 + iota_prime_int(p, 2)) as f64 / 2.0;
    Ok(eps * (p as f64).powf(e))
}

/// Term-by-term `tau_a(p^n)`, for small moduli.
pub fn gauss_direct(a: i128, p: u64, n: u32) -> Complex64 {
    let q = p.pow(n);
    let ar = a.rem_euclid(q as i128) as u128;
    (0..q)
        .map(|m| {
            let v = (ar * (m as u128 * m as u128 % q as u128)) % q as u128;
            e_frac(v as u64, q)
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_cases() {
        let c = |re, im| Complex64::new(re, im);
        assert!((gauss_quadratic(1, 5, 2).unwrap() - c(5.0, 0.0)).norm() < 1e-12);
        assert!(gauss_quadratic(1, 2, 1).unwrap().norm() < 1e-12);
        assert!((gauss_quadratic(1, 2, 2).unwrap() - c(2.0, 2.0)).norm() < 1e-12);
        // 1 + i + 1 + i over m = 0..3
        assert!((gauss_direct(1, 2, 2) - c(2.0, 2.0)).norm() < 1e-12);
    }

    #[test]
    fn closed_form_matches_direct() {
        for &p in &[2u64, 3, 5, 7, 11] {
            for n in 1..=4 {
                if p.pow(n) > 20_000 {
                    continue;
                }
                for a in 1..(p.pow(n.min(2)) as i128) {
                    if a % p as i128 == 0 {
                        continue;
                    }
                    let d = gauss_direct(a, p, n);
                    let f = gauss_quadratic(a, p, n).unwrap();
                    assert!((d - f).norm() < 1e-8, "p={p} n={n} a={a}: {d} vs {f}");
                }
            }
        }
    }

    #[test]
    fn rejects_multiples_of_p() {
        assert!(gauss_quadratic(10, 5, 3).is_err());
    }
}
