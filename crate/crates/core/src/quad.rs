//! Quadrature helpers: adaptive Simpson refinement for complex integrands on
//! real intervals, and spectrally accurate trapezoid rules for periodic and
//! fast-decaying integrands.

use num::complex::Complex64;

/// Adaptive Simpson on `[a, b]` with absolute tolerance `tol`.
///
/// The refinement criterion is the standard |S2 - S1| <= 15 tol heuristic,
/// applied to real and imaginary parts jointly.
pub fn adaptive_simpson<F>(f: &F, a: f64, b: f64, tol: f64, max_depth: u32) -> Complex64
where
    F: Fn(f64) -> Complex64,
{
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    simpson_step(f, a, b, fa, fm, fb, simpson(a, b, fa, fm, fb), tol, max_depth)
}

fn simpson(a: f64, b: f64, fa: Complex64, fm: Complex64, fb: Complex64) -> Complex64 {
    (fa + fm.scale(4.0) + fb).scale((b - a) / 6.0)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F>(
    f: &F,
    a: f64,
    b: f64,
    fa: Complex64,
    fm: Complex64,
    fb: Complex64,
    whole: Complex64,
    tol: f64,
    depth: u32,
) -> Complex64
where
    F: Fn(f64) -> Complex64,
{
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.norm() <= 15.0 * tol {
        return left + right + delta.scale(1.0 / 15.0);
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Trapezoid rule for a function with period `period`, doubling nodes until
/// two successive refinements agree to `tol` (or `max_nodes` is reached).
/// Returns the integral over one full period and the last refinement delta.
pub fn trapezoid_periodic<F>(f: &F, period: f64, tol: f64, max_nodes: usize) -> (Complex64, f64)
where
    F: Fn(f64) -> Complex64,
{
    let mut n = 16usize;
    let mut prev = trap_fixed(f, period, n);
    loop {
        n *= 2;
        let cur = trap_fixed(f, period, n);
        let delta = (cur - prev).norm();
        if delta <= tol || n >= max_nodes {
            return (cur, delta);
        }
        prev = cur;
    }
}

fn trap_fixed<F>(f: &F, period: f64, n: usize) -> Complex64
where
    F: Fn(f64) -> Complex64,
{
    let h = period / n as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..n {
        acc += f(k as f64 * h);
    }
    acc.scale(h)
}

/// Trapezoid rule on `[0, ∞)` for an even-in-t, analytically decaying
/// integrand such as `exp(-x cosh t) cosh(ν t)`. `t_max` must be chosen so
/// the integrand is negligible beyond it. Halves the step until stable.
pub fn trapezoid_halfline<F>(f: &F, t_max: f64, tol: f64) -> f64
where
    F: Fn(f64) -> f64,
{
    let mut h = 0.25;
    let mut prev = half_trap(f, t_max, h);
    for _ in 0..6 {
        h *= 0.5;
        let cur = half_trap(f, t_max, h);
        if (cur - prev).abs() <= tol * cur.abs().max(1e-300) {
            return cur;
        }
        prev = cur;
    }
    prev
}

fn half_trap<F>(f: &F, t_max: f64, h: f64) -> f64
where
    F: Fn(f64) -> f64,
{
    let n = (t_max / h).ceil() as usize;
    let mut acc = 0.5 * f(0.0);
    for k in 1..=n {
        acc += f(k as f64 * h);
    }
    acc * h
}
