//! Vector-valued q-expansions with fractional exponents and per-coefficient
//! error estimates: the output type of the coefficient engine.

use crate::error::{RadError, Result};
use crate::ConvergenceStatus;
use num::complex::Complex64;
use num::rational::Rational64;
use num::ToPrimitive;
use std::f64::consts::PI;

/// One Fourier coefficient: exponent k on the (Z+μ)/h grid, value, and the
/// reported truncation error of the c-sum that produced it.
#[derive(Clone, Debug)]
pub struct CoeffEntry {
    pub exponent: Rational64,
    pub value: Complex64,
    pub tail_error: f64,
}

/// A truncated vector-valued q-expansion
/// f_j(τ) = pole_j q^{n} + const_j + Σ_k a_{j,k} q^{k}.
#[derive(Clone, Debug)]
pub struct CoefficientSeries {
    pub dim: usize,
    /// Weight of the form the series represents.
    pub weight: Rational64,
    /// Pole exponent (n for the Rademacher sum, -n for its shadow).
    pub pole_exponent: Rational64,
    /// δ_α {ρ_α^{-1}}_{ji} per component j (zero when the pole cusp is
    /// not ∞).
    pub pole_amplitudes: Vec<Complex64>,
    /// Constant block (2Δ_j for Rademacher sums; zero for shadows and for
    /// components with μ_j ≠ 0), with error estimates.
    pub constants: Vec<(Complex64, f64)>,
    pub constant_status: ConvergenceStatus,
    /// Per component j: entries with strictly increasing exponents.
    pub components: Vec<Vec<CoeffEntry>>,
    /// Worst per-coefficient convergence class among the entries.
    pub tail_status: ConvergenceStatus,
}

pub(crate) fn rat_f64(r: Rational64) -> f64 {
    r.numer().to_f64().unwrap() / r.denom().to_f64().unwrap()
}

impl CoefficientSeries {
    /// Check structural invariants: strictly increasing exponents per
    /// component, all on the (Z + μ_j)/h grid, no constant entry where
    /// μ_j ≠ 0 (those come in as exact zeros).
    pub fn validate_grid(&self, mu: &[Rational64], h: i64) -> Result<()> {
        for (j, comp) in self.components.iter().enumerate() {
            let mut prev: Option<Rational64> = None;
            for e in comp {
                if let Some(p) = prev {
                    if e.exponent <= p {
                        return Err(RadError::Invalid(format!(
                            "component {j}: exponents not strictly increasing"
                        )));
                    }
                }
                let on_grid = (e.exponent * Rational64::from_integer(h) - mu[j]).is_integer();
                if !on_grid {
                    return Err(RadError::IncompatibleExponent(format!(
                        "component {j}: exponent {} off the (Z+{})/{} grid",
                        e.exponent, mu[j], h
                    )));
                }
                prev = Some(e.exponent);
            }
            if mu[j] != Rational64::from_integer(0) && self.constants[j].0.norm() != 0.0 {
                return Err(RadError::Invalid(format!(
                    "component {j} has μ ≠ 0 but a nonzero constant entry"
                )));
            }
        }
        Ok(())
    }

    /// Evaluate at τ in the upper half plane. Returns the component values
    /// and an error bound combining the per-coefficient tail errors (scaled
    /// by |q|^k), the constant-block errors, and a geometric estimate for
    /// the dropped k > k_max terms.
    pub fn eval(&self, tau: Complex64) -> (Vec<Complex64>, f64) {
        assert!(tau.im > 0.0);
        let two_pi_i_tau = Complex64::new(0.0, 2.0 * PI) * tau;
        let qpow = |k: f64| (two_pi_i_tau * k).exp();
        let mut values = Vec::with_capacity(self.dim);
        let mut err_max: f64 = 0.0;
        for j in 0..self.dim {
            let mut v = self.pole_amplitudes[j] * qpow(rat_f64(self.pole_exponent));
            v += self.constants[j].0;
            let mut err = self.constants[j].1;
            let mut last_term = 0.0f64;
            for e in &self.components[j] {
                let q_k = qpow(rat_f64(e.exponent));
                v += e.value * q_k;
                err += e.tail_error * q_k.norm();
                last_term = (e.value * q_k).norm();
            }
            // dropped k-tail: the terms beyond k_max of a convergent
            // q-series shrink at least geometrically once |a_k q^k| does;
            // budget two more last-sized terms
            err += 2.0 * last_term;
            values.push(v);
            err_max = err_max.max(err);
        }
        (values, err_max)
    }

    /// Largest reported coefficient tail error.
    pub fn max_tail_error(&self) -> f64 {
        self.components
            .iter()
            .flatten()
            .map(|e| e.tail_error)
            .fold(0.0, f64::max)
    }

    /// Look up the coefficient of q^k in component j, if present.
    pub fn coefficient(&self, j: usize, k: Rational64) -> Option<&CoeffEntry> {
        self.components[j].iter().find(|e| e.exponent == k)
    }
}
