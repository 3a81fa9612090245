//! Shared brute-force oracles for the integration suites: exact q-series
//! arithmetic over BigInt (j-function, Ramanujan tau), partition counts,
//! and numerical eta evaluation. Everything here is independent of the
//! Kloosterman/Bessel path it is used to check.

use num::complex::Complex64;
use num::BigInt;
use std::f64::consts::PI;

/// p(0..=n_max) by the pentagonal-number recurrence.
pub fn partition_numbers(n_max: usize) -> Vec<i64> {
    let mut p = vec![0i64; n_max + 1];
    p[0] = 1;
    for n in 1..=n_max {
        let mut acc: i64 = 0;
        let mut k: i64 = 1;
        loop {
            let g1 = (k * (3 * k - 1) / 2) as usize;
            if g1 > n {
                break;
            }
            let sign = if k % 2 == 1 { 1 } else { -1 };
            acc += sign * p[n - g1];
            let g2 = (k * (3 * k + 1) / 2) as usize;
            if g2 <= n {
                acc += sign * p[n - g2];
            }
            k += 1;
        }
        p[n] = acc;
    }
    p
}

fn series_mul(a: &[BigInt], b: &[BigInt], n: usize) -> Vec<BigInt> {
    let mut out = vec![BigInt::from(0); n + 1];
    for (i, ai) in a.iter().enumerate().take(n + 1) {
        if ai == &BigInt::from(0) {
            continue;
        }
        for (j, bj) in b.iter().enumerate().take(n + 1 - i) {
            let t = ai * bj;
            out[i + j] += t;
        }
    }
    out
}

/// Euler product Π (1 - q^m) up to q^n via the pentagonal number theorem.
fn euler_function(n: usize) -> Vec<BigInt> {
    let mut out = vec![BigInt::from(0); n + 1];
    out[0] = BigInt::from(1);
    let mut k: i64 = 1;
    loop {
        let g1 = k * (3 * k - 1) / 2;
        if g1 as usize > n {
            break;
        }
        let sign = if k % 2 == 1 { -1 } else { 1 };
        out[g1 as usize] += sign;
        let g2 = k * (3 * k + 1) / 2;
        if g2 as usize <= n {
            out[g2 as usize] += sign;
        }
        k += 1;
    }
    out
}

/// Coefficients of Δ/q = Π(1-q^m)^24: entry [m] is τ(m+1).
pub fn eta24_over_q(n: usize) -> Vec<BigInt> {
    let e = euler_function(n);
    let mut acc = vec![BigInt::from(1)];
    acc.resize(n + 1, BigInt::from(0));
    for _ in 0..24 {
        acc = series_mul(&acc, &e, n);
    }
    acc
}

/// Ramanujan τ(1..=n_max).
pub fn tau_numbers(n_max: usize) -> Vec<BigInt> {
    let d = eta24_over_q(n_max - 1);
    (0..n_max).map(|m| d[m].clone()).collect()
}

/// j-function coefficients c(-1..=n_max) via E4³/η²⁴ power-series
/// arithmetic: returns [c(-1), c(0), c(1), ...] with c(-1) = 1, c(0) = 744.
pub fn j_coefficients(n_max: usize) -> Vec<BigInt> {
    let n = n_max + 1;
    // E4 = 1 + 240 Σ σ3(m) q^m
    let mut e4 = vec![BigInt::from(0); n + 1];
    e4[0] = BigInt::from(1);
    for m in 1..=n {
        let sigma3: i64 = (1..=m as i64).filter(|d| m as i64 % d == 0).map(|d| d * d * d).sum();
        e4[m] = BigInt::from(240 * sigma3);
    }
    let e4_cubed = series_mul(&series_mul(&e4, &e4, n), &e4, n);
    // divide by η²⁴/q (leading coefficient 1): j·q = E4³ / (η²⁴/q)
    let den = eta24_over_q(n);
    let mut quot = vec![BigInt::from(0); n + 1];
    for m in 0..=n {
        let mut acc = e4_cubed[m].clone();
        for i in 1..=m {
            acc -= &den[i] * &quot[m - i];
        }
        quot[m] = acc; // den[0] = 1
    }
    quot.truncate(n_max + 2);
    quot
}

/// Dedekind eta by its q-product; accurate for Im τ ≳ 0.3.
pub fn eta_fn(tau: Complex64) -> Complex64 {
    let q = (Complex64::new(0.0, 2.0 * PI) * tau).exp();
    let mut prod = (Complex64::new(0.0, PI / 12.0) * tau).exp();
    let mut qn = Complex64::new(1.0, 0.0);
    for _ in 1..600 {
        qn *= q;
        prod *= Complex64::new(1.0, 0.0) - qn;
        if qn.norm() < 1e-18 {
            break;
        }
    }
    prod
}

/// Evaluate Σ a_k q^{k+k0} at τ for integer-indexed BigInt coefficients.
pub fn eval_integer_series(coeffs: &[BigInt], k0: i64, tau: Complex64) -> Complex64 {
    let q = (Complex64::new(0.0, 2.0 * PI) * tau).exp();
    let mut acc = Complex64::new(0.0, 0.0);
    let mut qk = (Complex64::new(0.0, 2.0 * PI) * tau * k0 as f64).exp();
    for a in coeffs {
        acc += qk.scale(bigint_to_f64(a));
        qk *= q;
    }
    acc
}

pub fn bigint_to_f64(x: &BigInt) -> f64 {
    use num::ToPrimitive;
    x.to_f64().unwrap_or(f64::NAN)
}

#[allow(dead_code)]
pub fn assert_close(a: f64, b: f64, tol: f64, what: &str) {
    assert!((a - b).abs() <= tol, "{what}: {a} vs {b} (tol {tol})");
}
