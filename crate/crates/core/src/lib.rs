//! Fourier coefficients of vector-valued Rademacher sums and shadow Poincaré
//! series of rational weight w ≤ 0 over SL2(Z) and Gamma_0(N).
//!
//! The computational pipeline is
//!
//! 1. [`group`]: exact arithmetic on group elements, cusps, automorphy
//!    factors with principal-branch phases, and coset enumeration;
//! 2. [`multiplier`]: normal multiplier systems ρ: Γ → U(d) of rational
//!    weight, including the eta powers in closed form via Dedekind sums;
//! 3. [`kloosterman`]: matrix-valued Kloosterman sums S(c) and partial sums
//!    of the Kloosterman–Selberg zeta function, with a disk cache;
//! 4. [`specfun`]: the Bessel/gamma kernel feeding the coefficient formulas;
//! 5. [`rademacher`]: the coefficient engine (Δ constants, coefficient
//!    series for Rademacher sums and their shadows, asymptotics, dimension
//!    bounds and basis enumeration);
//! 6. [`oracle`]: independent verification engines (regularized direct
//!    sums, Poincaré evaluation, shadow period integrals, Lipschitz
//!    summation, Eisenstein coefficient cross-checks).
//!
//! Every computed value carries an error estimate; nothing is silently
//! truncated.

pub mod cache;
pub mod error;
pub mod group;
pub mod kloosterman;
pub mod linalg;
pub mod multiplier;
pub mod oracle;
pub mod quad;
pub mod rademacher;
pub mod series;
pub mod specfun;

pub use error::{RadError, Result};

/// Convergence quality attached to reported values.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConvergenceStatus {
    /// Tail bounded rigorously by the trivial Kloosterman bound.
    Absolute,
    /// Conditionally convergent evaluation (Cesàro-smoothed partial sums).
    Conditional,
    /// Tail estimated empirically from the last octave of computed terms.
    Empirical,
    /// The smoothed checkpoint spread failed to shrink.
    NonConvergent,
}

impl ConvergenceStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            ConvergenceStatus::Absolute => "absolute",
            ConvergenceStatus::Conditional => "conditional",
            ConvergenceStatus::Empirical => "empirical",
            ConvergenceStatus::NonConvergent => "non-convergent",
        }
    }
}
