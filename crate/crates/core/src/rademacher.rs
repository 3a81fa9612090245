//! The coefficient engine: Δ constants, Fourier coefficients of Rademacher
//! sums and of their shadow Poincaré series, the leading-term asymptotic
//! estimate, and dimension/basis enumeration for the spaces the sums span.
//!
//! For a pole î q^n at the cusp α⁻¹∞ (n < 0, h̄n ∈ Z+ν_i) the series reads
//!
//!   R_j = δ_α {ρ_α⁻¹}_{ji} q^n + 2Δ_j
//!       + Σ_{k>0} q^k Σ_c S_{n,k}(c)_{ji} (-2πi/ch) (-k/n)^{(w-1)/2}
//!                       J_{1-w}((4πi/c)√(-kn))
//!
//! and its weight-(2-w) shadow replaces the Bessel argument by the real
//! (4π/c)√(-kn), the prefactor by 2π i^{w-2}/ch · (-k/n)^{(1-w)/2}, and the
//! Kloosterman data by S_{-n,k}(c, ρ̄).

use crate::cache::KloostermanCache;
use crate::error::{RadError, Result};
use crate::group::{CuspData, GroupSpec};
use crate::kloosterman::{build_table, zeta_at_one, zeta_partial};
use crate::multiplier::{CuspExponents, MultiplierSystem};
use crate::series::{rat_f64, CoeffEntry, CoefficientSeries};
use crate::specfun::{bessel_i, bessel_j_real, gamma_fn, i_pow, AccC, PrecisionPolicy};
use crate::ConvergenceStatus;
use num::complex::Complex64;
use num::rational::Rational64;
use num::{One, Zero};
use std::f64::consts::PI;
use std::sync::Arc;

/// Complete specification of one Rademacher sum.
#[derive(Clone)]
pub struct RademacherJob {
    pub group: GroupSpec,
    /// Weight w ≤ 0 (exact rational).
    pub weight: Rational64,
    pub multiplier: Arc<MultiplierSystem>,
    /// Cusp carrying the pole.
    pub cusp: CuspData,
    /// Component index i of the pole (0-based).
    pub component: usize,
    /// Pole exponent n < 0 with h̄·n ∈ Z + ν_i.
    pub exponent: Rational64,
}

impl RademacherJob {
    pub fn new(
        group: GroupSpec,
        weight: Rational64,
        multiplier: Arc<MultiplierSystem>,
        cusp: CuspData,
        component: usize,
        exponent: Rational64,
    ) -> Result<Self> {
        if weight > Rational64::zero() {
            return Err(RadError::OutOfScope(format!(
                "Rademacher sums are implemented for weight <= 0, got {weight}"
            )));
        }
        if exponent >= Rational64::zero() {
            return Err(RadError::Invalid(format!("pole exponent must be negative, got {exponent}")));
        }
        if component >= multiplier.dim {
            return Err(RadError::Invalid(format!(
                "component {component} out of range for dimension {}",
                multiplier.dim
            )));
        }
        // the weight and the multiplier's weight must induce the same
        // cocycle, i.e. agree mod 2
        let diff = weight - multiplier.weight;
        if !(diff / Rational64::from_integer(2)).is_integer() {
            return Err(RadError::InconsistentMultiplier(format!(
                "job weight {weight} differs from multiplier weight {} by a non-multiple of 2",
                multiplier.weight
            )));
        }
        let job = RademacherJob { group, weight, multiplier, cusp, component, exponent };
        let exps = job.cusp_exponents()?;
        let on_grid = (exponent * Rational64::from_integer(cusp.width)
            - exps.exponents[component])
            .is_integer();
        if !on_grid {
            return Err(RadError::IncompatibleExponent(format!(
                "h̄·n = {} not in Z + ν_{} = Z + {}",
                exponent * Rational64::from_integer(cusp.width),
                component,
                exps.exponents[component]
            )));
        }
        Ok(job)
    }

    pub fn weight_f64(&self) -> f64 {
        rat_f64(self.weight)
    }

    pub fn cusp_exponents(&self) -> Result<CuspExponents> {
        self.multiplier.cusp_exponents(&self.cusp)
    }

    /// -n as a positive float.
    fn minus_n(&self) -> f64 {
        -rat_f64(self.exponent)
    }
}

/// Δ vector with per-component error estimates.
#[derive(Clone, Debug)]
pub struct DeltaVector {
    pub values: Vec<Complex64>,
    pub errors: Vec<f64>,
    pub status: ConvergenceStatus,
}

/// The constant Δ_j of the Rademacher sum:
/// 0 for μ_j ≠ 0, otherwise
/// -(1/2h) (2πi)^{2-w} Γ(2-w)^{-1} Kl_{n,0}(1 - w/2)_{ji} (-n)^{1-w}.
///
/// For w < 0 the zeta value is an absolutely convergent partial sum at
/// s = 1 - w/2 > 1; at w = 0 the conditional s = 1 evaluation with Cesàro
/// smoothing is used and the result is flagged `Conditional`.
pub fn delta_constant(
    job: &RademacherJob,
    c_max: i64,
    cache: Option<&KloostermanCache>,
    policy: &PrecisionPolicy,
) -> Result<DeltaVector> {
    let d = job.multiplier.dim;
    let w = job.weight_f64();
    let h = job.group.width_at_infinity();
    let n = job.exponent;
    let mu = &job.multiplier.mu;

    let needs_constant = (0..d).any(|j| mu[j].is_zero());
    if !needs_constant {
        return Ok(DeltaVector {
            values: vec![Complex64::zero(); d],
            errors: vec![0.0; d],
            status: ConvergenceStatus::Absolute,
        });
    }

    // prefactor -(1/2h) (2πi)^{2-w} / Γ(2-w) · (-n)^{1-w}
    let two_pi_i_pow = (Complex64::new((2.0 * PI).ln(), 0.5 * PI) * (2.0 - w)).exp();
    let pref = two_pi_i_pow
        * Complex64::new(-(1.0) / (2.0 * h as f64), 0.0)
        * Complex64::new(job.minus_n().powf(1.0 - w) / gamma_fn(2.0 - w)?, 0.0);

    let (kl, kl_err, status) = if w < 0.0 {
        let s = Complex64::new(1.0 - w / 2.0, 0.0);
        let zp = zeta_partial(
            &job.group,
            &job.multiplier,
            &job.cusp,
            n,
            Rational64::zero(),
            s,
            c_max,
            cache,
            policy,
        )?;
        (zp.value, zp.tail_estimate, ConvergenceStatus::Absolute)
    } else {
        let z = zeta_at_one(
            &job.group,
            &job.multiplier,
            &job.cusp,
            n,
            Rational64::zero(),
            c_max,
            cache,
            policy,
        )?;
        if z.status == ConvergenceStatus::NonConvergent {
            return Err(RadError::NonConvergent(
                "Kl_{n,0}(1) smoothed checkpoints fail to settle".into(),
            ));
        }
        (z.value, z.error, z.status)
    };

    let i = job.component;
    let mut values = vec![Complex64::zero(); d];
    let mut errors = vec![0.0; d];
    for j in 0..d {
        if mu[j].is_zero() {
            values[j] = pref * kl.entry_ji(j, i);
            errors[j] = pref.norm() * kl_err;
        }
    }
    Ok(DeltaVector { values, errors, status })
}

/// Positive exponents on the (Z + μ_j)/h grid up to k_max.
fn component_grid(mu: Rational64, h: i64, k_max: Rational64) -> Vec<Rational64> {
    let hr = Rational64::from_integer(h);
    let mut out = Vec::new();
    let mut z = if mu.is_zero() { Rational64::one() } else { Rational64::zero() };
    loop {
        let k = (z + mu) / hr;
        if k > k_max {
            break;
        }
        out.push(k);
        z += Rational64::one();
    }
    out
}

/// Tail model for the c-sum of one coefficient.
///
/// The trivial bound |S(c)| ≤ A c² together with the small-argument Bessel
/// bound gives per-term ≤ A (2π)^{2-w} (-n)^{1-w} e^{x²/4} / (h Γ(2-w)) · c^w,
/// absolutely summable only for w < -1. In that regime the integral bound
/// is reported (`Absolute`); for w ≥ -1 the paper's trivial bound cannot
/// certify a finite tail, so the last computed octave's absolute sum is
/// reported instead and flagged `Empirical`.
struct TailModel {
    prefactor: f64,
    w: f64,
}

impl TailModel {
    fn new(a_fit: f64, w: f64, h: i64, minus_n: f64, x_at_cmax: f64) -> Self {
        let gamma2w = gamma_fn(2.0 - w).unwrap_or(f64::INFINITY);
        let prefactor = a_fit * (2.0 * PI).powf(2.0 - w) * minus_n.powf(1.0 - w)
            / (h as f64 * gamma2w)
            * (x_at_cmax * x_at_cmax / 4.0).exp();
        TailModel { prefactor, w }
    }

    fn tail(&self, c_max: i64, empirical_octave: f64) -> (f64, ConvergenceStatus) {
        if self.w < -1.0 {
            let bound =
                self.prefactor * (c_max as f64).powf(self.w + 1.0) / (-self.w - 1.0);
            (bound, ConvergenceStatus::Absolute)
        } else {
            (empirical_octave, ConvergenceStatus::Empirical)
        }
    }
}

/// Fourier coefficients of the Rademacher sum as a [`CoefficientSeries`].
pub fn coefficients(
    job: &RademacherJob,
    k_max: Rational64,
    c_max: i64,
    cache: Option<&KloostermanCache>,
    policy: &PrecisionPolicy,
) -> Result<CoefficientSeries> {
    let w = job.weight_f64();
    let h = job.group.width_at_infinity();
    let d = job.multiplier.dim;
    let minus_n = job.minus_n();
    let nu_order = 1.0 - w;

    let grids: Vec<Vec<Rational64>> =
        job.multiplier.mu.iter().map(|&mu| component_grid(mu, h, k_max)).collect();
    let mut ks_all: Vec<Rational64> = grids.iter().flatten().copied().collect();
    ks_all.sort();
    ks_all.dedup();
    if ks_all.is_empty() {
        // only the pole (and constant) blocks
        return assemble_series(job, c_max, cache, policy, &grids, &[], Vec::new());
    }

    let table = build_table(
        &job.group,
        &job.multiplier,
        &job.cusp,
        job.exponent,
        &ks_all,
        c_max,
        cache,
    )?;
    let a_fit = table.fitted_trivial_constant();
    let i = job.component;

    // per (j, k): Σ_c S(c)_{ji} (-2πi/ch) (-k/n)^{(w-1)/2} J_{1-w}(i·4π√(-kn)/c)
    let mut per_jk: Vec<Vec<(Rational64, Complex64, f64)>> = Vec::with_capacity(d);
    for j in 0..d {
        let mut rows = Vec::with_capacity(grids[j].len());
        for &k in &grids[j] {
            let t = ks_all.binary_search(&k).unwrap();
            let kf = rat_f64(k);
            let sqrt_kn = (kf * minus_n).sqrt();
            let power = (kf / minus_n).powf((w - 1.0) / 2.0);
            let rot = i_pow(nu_order); // J_ν(ix) = i^ν I_ν(x)
            let mut acc = AccC::new(policy);
            let mut octave = 0.0f64;
            for c in 1..=c_max {
                let s = table.entry(c, t).unwrap().entry_ji(j, i);
                if s.norm() == 0.0 {
                    continue;
                }
                let x = 4.0 * PI * sqrt_kn / c as f64;
                let bessel = rot.scale(bessel_i(nu_order, x, policy));
                let pref = Complex64::new(0.0, -2.0 * PI / (c as f64 * h as f64));
                let term = s * pref * bessel * power;
                acc.add(term);
                if 2 * c > c_max {
                    octave += term.norm();
                }
            }
            let x_next = 4.0 * PI * sqrt_kn / (c_max as f64 + 1.0);
            let (tail, _) = TailModel::new(a_fit, w, h, minus_n, x_next).tail(c_max, octave);
            rows.push((k, acc.total(), tail));
        }
        per_jk.push(rows);
    }

    assemble_series(job, c_max, cache, policy, &grids, &ks_all, per_jk)
}

fn assemble_series(
    job: &RademacherJob,
    c_max: i64,
    cache: Option<&KloostermanCache>,
    policy: &PrecisionPolicy,
    grids: &[Vec<Rational64>],
    _ks_all: &[Rational64],
    per_jk: Vec<Vec<(Rational64, Complex64, f64)>>,
) -> Result<CoefficientSeries> {
    let d = job.multiplier.dim;
    let w = job.weight_f64();
    let delta = delta_constant(job, c_max, cache, policy)?;
    let exps = job.cusp_exponents()?;
    let rho_alpha_inv = exps.rho_alpha.adjoint();
    let delta_alpha = job.cusp.is_infinity();

    let mut components = Vec::with_capacity(d);
    for j in 0..d {
        let rows = per_jk.get(j);
        let mut entries = Vec::with_capacity(grids[j].len());
        if let Some(rows) = rows {
            for &(k, v, tail) in rows {
                entries.push(CoeffEntry { exponent: k, value: v, tail_error: tail });
            }
        }
        components.push(entries);
    }

    let series = CoefficientSeries {
        dim: d,
        weight: job.weight,
        pole_exponent: job.exponent,
        pole_amplitudes: (0..d)
            .map(|j| {
                if delta_alpha {
                    rho_alpha_inv.entry_ji(j, job.component)
                } else {
                    Complex64::zero()
                }
            })
            .collect(),
        // the theorem's constant block is 2Δ
        constants: delta
            .values
            .iter()
            .zip(&delta.errors)
            .map(|(&v, &e)| (v * 2.0, 2.0 * e))
            .collect(),
        constant_status: delta.status,
        components,
        tail_status: if w < -1.0 {
            ConvergenceStatus::Absolute
        } else {
            ConvergenceStatus::Empirical
        },
    };
    series.validate_grid(&job.multiplier.mu, job.group.width_at_infinity())?;
    Ok(series)
}

/// One Fourier coefficient a_{j,k} of the Rademacher sum, with its tail
/// error: the k-grid membership is checked for the requested component.
/// Avoids building the whole grid when a single deep coefficient is wanted
/// (asymptotics checks, spot queries).
pub fn coefficient_at(
    job: &RademacherJob,
    j: usize,
    k: Rational64,
    c_max: i64,
    cache: Option<&KloostermanCache>,
    policy: &PrecisionPolicy,
) -> Result<CoeffEntry> {
    if j >= job.multiplier.dim {
        return Err(RadError::Invalid(format!("component {j} out of range")));
    }
    let h = job.group.width_at_infinity();
    let on_grid = (k * Rational64::from_integer(h) - job.multiplier.mu[j]).is_integer();
    if !on_grid || k <= Rational64::zero() {
        return Err(RadError::IncompatibleExponent(format!(
            "k = {k} is not a positive exponent on component {j}'s grid"
        )));
    }
    let table = build_table(
        &job.group,
        &job.multiplier,
        &job.cusp,
        job.exponent,
        &[k],
        c_max,
        cache,
    )?;
    let w = job.weight_f64();
    let minus_n = job.minus_n();
    let nu_order = 1.0 - w;
    let i = job.component;
    let kf = rat_f64(k);
    let sqrt_kn = (kf * minus_n).sqrt();
    let power = (kf / minus_n).powf((w - 1.0) / 2.0);
    let rot = i_pow(nu_order);
    let mut acc = AccC::new(policy);
    let mut octave = 0.0f64;
    for c in 1..=c_max {
        let s = table.entry(c, 0).unwrap().entry_ji(j, i);
        if s.norm() == 0.0 {
            continue;
        }
        let x = 4.0 * PI * sqrt_kn / c as f64;
        let term = s
            * Complex64::new(0.0, -2.0 * PI / (c as f64 * h as f64))
            * rot.scale(bessel_i(nu_order, x, policy))
            * power;
        acc.add(term);
        if 2 * c > c_max {
            octave += term.norm();
        }
    }
    let x_next = 4.0 * PI * sqrt_kn / (c_max as f64 + 1.0);
    let a_fit = table.fitted_trivial_constant();
    let (tail, _) = TailModel::new(a_fit, w, h, minus_n, x_next).tail(c_max, octave);
    Ok(CoeffEntry { exponent: k, value: acc.total(), tail_error: tail })
}

/// Fourier coefficients of the shadow Poincaré series
/// P_{Γ, 2-w, ρ̄, î (αq)^{-n}}: pole block δ_α {ρ̄_α⁻¹}_{ji} q^{-n}, no
/// constant, and k-sums with the real-argument Bessel J.
///
/// The Kloosterman data is S_{-n,k}(c, ρ̄): the first index is the shadow's
/// (positive) pole exponent -n, as the Petersson unfolding requires.
pub fn shadow_coefficients(
    job: &RademacherJob,
    k_max: Rational64,
    c_max: i64,
    cache: Option<&KloostermanCache>,
    policy: &PrecisionPolicy,
) -> Result<CoefficientSeries> {
    let w = job.weight_f64();
    let h = job.group.width_at_infinity();
    let d = job.multiplier.dim;
    let minus_n = job.minus_n();
    let nu_order = 1.0 - w;
    let conj = Arc::new(job.multiplier.conjugate());

    let grids: Vec<Vec<Rational64>> =
        conj.mu.iter().map(|&mu| component_grid(mu, h, k_max)).collect();
    let mut ks_all: Vec<Rational64> = grids.iter().flatten().copied().collect();
    ks_all.sort();
    ks_all.dedup();

    let exps_conj = conj.cusp_exponents(&job.cusp)?;
    let rho_alpha_inv = exps_conj.rho_alpha.adjoint();
    let delta_alpha = job.cusp.is_infinity();

    let mut components: Vec<Vec<CoeffEntry>> = vec![Vec::new(); d];
    let mut tail_status = ConvergenceStatus::Absolute;
    if !ks_all.is_empty() {
        let table =
            build_table(&job.group, &conj, &job.cusp, -job.exponent, &ks_all, c_max, cache)?;
        let a_fit = table.fitted_trivial_constant();
        let i = job.component;
        let phase = i_pow(w - 2.0); // i^{w-2}, principal
        for j in 0..d {
            for &k in &grids[j] {
                let t = ks_all.binary_search(&k).unwrap();
                let kf = rat_f64(k);
                let sqrt_kn = (kf * minus_n).sqrt();
                let power = (kf / minus_n).powf((1.0 - w) / 2.0);
                let mut acc = AccC::new(policy);
                let mut octave = 0.0f64;
                for c in 1..=c_max {
                    let s = table.entry(c, t).unwrap().entry_ji(j, i);
                    if s.norm() == 0.0 {
                        continue;
                    }
                    let x = 4.0 * PI * sqrt_kn / c as f64;
                    let bessel = bessel_j_real(nu_order, x, policy);
                    let pref = phase.scale(2.0 * PI / (c as f64 * h as f64));
                    let term = s * pref * power * bessel;
                    acc.add(term);
                    if 2 * c > c_max {
                        octave += term.norm();
                    }
                }
                let x_next = 4.0 * PI * sqrt_kn / (c_max as f64 + 1.0);
                let (tail, status) =
                    TailModel::new(a_fit, w, h, minus_n, x_next).tail(c_max, octave);
                tail_status = status;
                components[j].push(CoeffEntry { exponent: k, value: acc.total(), tail_error: tail });
            }
        }
    }

    let series = CoefficientSeries {
        dim: d,
        weight: Rational64::from_integer(2) - job.weight,
        pole_exponent: -job.exponent,
        pole_amplitudes: (0..d)
            .map(|j| {
                if delta_alpha {
                    rho_alpha_inv.entry_ji(j, job.component)
                } else {
                    Complex64::zero()
                }
            })
            .collect(),
        constants: vec![(Complex64::zero(), 0.0); d],
        constant_status: ConvergenceStatus::Absolute,
        components,
        tail_status,
    };
    series.validate_grid(&conj.mu, h)?;
    Ok(series)
}

/// Leading-term estimate of the q^k coefficient from the smallest c with
/// S_{n,k}(c)_{ji} ≠ 0:
/// S(c) e^{-iπw/2} (2c)^{-1/2} h^{-1} k^{(2w-3)/4} (-n)^{-(2w-1)/4}
/// exp(4π√(-kn)/c).
///
/// The phase e^{-iπw/2} is what the Bessel rotation J_{1-w}(ix) ~
/// i^{1-w} e^x/√(2πx) actually produces in the coefficient formula.
pub fn asymptotic_estimate(
    job: &RademacherJob,
    k: Rational64,
    c_scan_max: i64,
    cache: Option<&KloostermanCache>,
) -> Result<Complex64> {
    let table = build_table(
        &job.group,
        &job.multiplier,
        &job.cusp,
        job.exponent,
        &[k],
        c_scan_max,
        cache,
    )?;
    let j = job.component; // estimate for the pole component's own row
    let c_min = table
        .least_nonzero_c(j, job.component, 1e-10)
        .ok_or_else(|| RadError::Invalid("no nonzero c found in the Kloosterman table".into()))?;
    let s = table
        .entry(c_min, 0)
        .unwrap()
        .entry_ji(j, job.component);
    let w = job.weight_f64();
    let h = job.group.width_at_infinity() as f64;
    let kf = rat_f64(k);
    let minus_n = job.minus_n();
    let phase = i_pow(-w); // e^{-iπw/2}
    let magnitude = kf.powf((2.0 * w - 3.0) / 4.0) * minus_n.powf(-(2.0 * w - 1.0) / 4.0)
        / ((2.0 * c_min as f64).sqrt() * h)
        * (4.0 * PI * (kf * minus_n).sqrt() / c_min as f64).exp();
    Ok(s * phase.scale(magnitude))
}

/// Upper bound md (w < 0) or md + t₀ (w = 0) on dim J_w(m, ρ).
pub fn dimension_bound(rho: &MultiplierSystem, w: Rational64, m: u32) -> usize {
    let base = m as usize * rho.dim;
    if w.is_zero() {
        base + rho.invariant_subspace_dim()
    } else {
        base
    }
}

/// The basis enumeration of Rademacher sums spanning J_w(m, ρ): pole specs
/// (component i, exponent (μ_i - l)/h) for l = 1..m, plus a constants
/// marker at weight 0 when ρ has invariant vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct BasisSpec {
    pub poles: Vec<(usize, Rational64)>,
    pub include_constants: bool,
}

pub fn basis_spec(group: &GroupSpec, rho: &MultiplierSystem, w: Rational64, m: u32) -> BasisSpec {
    let h = Rational64::from_integer(group.width_at_infinity());
    let mut poles = Vec::with_capacity(m as usize * rho.dim);
    for i in 0..rho.dim {
        for l in 1..=m as i64 {
            poles.push((i, (rho.mu[i] - Rational64::from_integer(l)) / h));
        }
    }
    BasisSpec {
        poles,
        include_constants: w.is_zero() && rho.invariant_subspace_dim() > 0,
    }
}
