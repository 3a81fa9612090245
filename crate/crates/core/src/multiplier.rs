//! Normal multiplier systems ρ: Γ → U(d) of rational weight, with the
//! phase-corrected consistency condition ρ(αβ) ω_w(β,α) = ρ(α) ρ(β).
//!
//! Presets:
//! - `trivial`: the constant 1 (even integer weights, where ω ≡ 1);
//! - `eta_power(r)`: the multiplier of η^r at weight r/2, in closed form
//!   through Dedekind sums — ρ(γ) = exp(iπ r ((a+d)/12c − s(d,c) − 1/4))
//!   for canonical c > 0 and e(rb/24) on translations;
//! - `explicit`: d×d unitary images of S and T on the full modular group,
//!   validated against the projective relations S² and (ST)³;
//! - direct sums of the above at a common weight;
//! - the conjugate system ρ̄ (entrywise conjugate, dual weight 2−w).
//!
//! Exponents μ are exact rationals throughout: explicit T-images are
//! snapped to rationals of denominator ≤ 240 (tolerance 1e-10) or rejected,
//! because the q-expansion grid arithmetic downstream is exact.

use crate::error::{RadError, Result};
use crate::group::{omega_cocycle, CuspData, GroupElement, GroupSpec};
use crate::linalg::{rank_with_tol, CMat};
use crate::specfun::{dedekind_sum, e_big, e_rat};
use num::complex::Complex64;
use num::rational::Rational64;
use num::{BigInt, BigRational, ToPrimitive, Zero};
use std::collections::HashMap;
use std::sync::RwLock;

/// Letters of a word over {S, T^k} in the full modular group.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Token {
    S,
    T(i64),
}

#[derive(Clone, Debug)]
pub enum MultiplierKind {
    Trivial,
    EtaPower(i32),
    Explicit { s_image: CMat, t_image: CMat },
    DirectSum(Vec<MultiplierSystem>),
    Conjugate(Box<MultiplierSystem>),
}

/// A normal multiplier system with its weight, dimension and exponents at ∞.
#[derive(Debug)]
pub struct MultiplierSystem {
    pub group: GroupSpec,
    /// Weight as an exact rational; only its class mod 2 enters ω_w.
    pub weight: Rational64,
    pub dim: usize,
    pub kind: MultiplierKind,
    /// Exponents μ with ρ(T^h) = diag(e(μ_i)), 0 ≤ μ_i < 1, exact.
    pub mu: Vec<Rational64>,
    cache: RwLock<HashMap<GroupElement, CMat>>,
}

impl Clone for MultiplierSystem {
    fn clone(&self) -> Self {
        MultiplierSystem {
            group: self.group,
            weight: self.weight,
            dim: self.dim,
            kind: self.kind.clone(),
            mu: self.mu.clone(),
            cache: RwLock::new(HashMap::new()),
        }
    }
}

/// Eigen-data of ρ at a cusp: ρ_α ρ(α⁻¹T^h̄α) ρ_α⁻¹ = diag(e(ν)).
#[derive(Clone, Debug)]
pub struct CuspExponents {
    pub cusp: CuspData,
    /// Exponents ν_i ∈ [0,1), exact rationals.
    pub exponents: Vec<Rational64>,
    pub rho_alpha: CMat,
}

fn frac(r: Rational64) -> Rational64 {
    r - r.floor()
}

/// Snap a float to a rational with denominator ≤ 240, within 1e-10.
fn snap_rational(x: f64) -> Result<Rational64> {
    let x = x - x.floor();
    for den in 1..=240i64 {
        let num = (x * den as f64).round() as i64;
        if (x - num as f64 / den as f64).abs() <= 1e-10 {
            return Ok(frac(Rational64::new(num, den)));
        }
    }
    Err(RadError::InconsistentMultiplier(format!(
        "exponent {x} is not a rational with denominator <= 240"
    )))
}

impl MultiplierSystem {
    /// The 1-dimensional trivial system. Requires an even integer weight so
    /// that the consistency condition (with ω ≡ 1) holds.
    pub fn trivial(group: GroupSpec, weight: Rational64) -> Result<Self> {
        if !weight.is_integer() || weight.numer() % 2 != 0 {
            return Err(RadError::InconsistentMultiplier(format!(
                "trivial multiplier requires an even integer weight, got {weight}"
            )));
        }
        Ok(MultiplierSystem {
            group,
            weight,
            dim: 1,
            kind: MultiplierKind::Trivial,
            mu: vec![Rational64::zero()],
            cache: RwLock::new(HashMap::new()),
        })
    }

    /// The multiplier of η^r (weight r/2); r = 1 is the eta system itself,
    /// r = -1 the conjugate-eta (shadow-side) system with μ = 23/24.
    pub fn eta_power(group: GroupSpec, r: i32) -> Self {
        let mu = frac(Rational64::new(r as i64, 24));
        MultiplierSystem {
            group,
            weight: Rational64::new(r as i64, 2),
            dim: 1,
            kind: MultiplierKind::EtaPower(r),
            mu: vec![mu],
            cache: RwLock::new(HashMap::new()),
        }
    }

    /// Explicit system on the full modular group from unitary images of S
    /// and T. T's image must be diagonal with root-of-unity entries; the
    /// projective relations S² and (ST)³ are checked against the
    /// ω_w-corrected consistency condition.
    pub fn explicit(
        group: GroupSpec,
        weight: Rational64,
        s_image: CMat,
        t_image: CMat,
    ) -> Result<Self> {
        if group != GroupSpec::Full {
            return Err(RadError::Unsupported(
                "explicit generator images are accepted only on the full modular group".into(),
            ));
        }
        let d = s_image.dim;
        if t_image.dim != d {
            return Err(RadError::InconsistentMultiplier(
                "S and T images have different dimensions".into(),
            ));
        }
        if !s_image.is_unitary(1e-10) || !t_image.is_unitary(1e-10) {
            return Err(RadError::InconsistentMultiplier(
                "generator images must be unitary to 1e-10".into(),
            ));
        }
        if !t_image.is_diagonal(1e-10) {
            return Err(RadError::InconsistentMultiplier(
                "the image of T must be diagonal (normality axiom)".into(),
            ));
        }
        let mut mu = Vec::with_capacity(d);
        for i in 0..d {
            let z = t_image.get(i, i);
            if (z.norm() - 1.0).abs() > 1e-10 {
                return Err(RadError::InconsistentMultiplier(
                    "diagonal T entries must have modulus 1".into(),
                ));
            }
            mu.push(snap_rational(z.arg() / (2.0 * std::f64::consts::PI))?);
        }
        let sys = MultiplierSystem {
            group,
            weight,
            dim: d,
            kind: MultiplierKind::Explicit { s_image, t_image },
            mu,
            cache: RwLock::new(HashMap::new()),
        };
        sys.validate_relations()?;
        Ok(sys)
    }

    /// Direct sum of systems sharing the group and weight.
    pub fn direct_sum(components: Vec<MultiplierSystem>) -> Result<Self> {
        let first = components
            .first()
            .ok_or_else(|| RadError::Invalid("direct sum of zero components".into()))?;
        let (group, weight) = (first.group, first.weight);
        if components.iter().any(|c| c.group != group || c.weight != weight) {
            return Err(RadError::InconsistentMultiplier(
                "direct summands must share group and weight".into(),
            ));
        }
        let dim = components.iter().map(|c| c.dim).sum();
        let mu = components.iter().flat_map(|c| c.mu.clone()).collect();
        Ok(MultiplierSystem {
            group,
            weight,
            dim,
            kind: MultiplierKind::DirectSum(components),
            mu,
            cache: RwLock::new(HashMap::new()),
        })
    }

    /// The conjugate system ρ̄(γ) = conj(ρ(γ)) at the dual weight 2 − w.
    pub fn conjugate(&self) -> MultiplierSystem {
        let mu = self.mu.iter().map(|m| frac(-*m)).collect();
        MultiplierSystem {
            group: self.group,
            weight: Rational64::from_integer(2) - self.weight,
            dim: self.dim,
            kind: MultiplierKind::Conjugate(Box::new(self.clone())),
            mu,
            cache: RwLock::new(HashMap::new()),
        }
    }

    pub fn weight_f64(&self) -> f64 {
        self.weight.numer().to_f64().unwrap() / self.weight.denom().to_f64().unwrap()
    }

    /// Stable identity string for cache keys and provenance records.
    pub fn descriptor(&self) -> String {
        match &self.kind {
            MultiplierKind::Trivial => format!("trivial_w{}", self.weight),
            MultiplierKind::EtaPower(r) => format!("eta{r}"),
            MultiplierKind::Explicit { s_image, t_image } => {
                let mut bytes = String::new();
                for m in [s_image, t_image] {
                    for i in 0..m.dim {
                        for j in 0..m.dim {
                            let z = m.get(i, j);
                            bytes.push_str(&format!("{:.17e},{:.17e};", z.re, z.im));
                        }
                    }
                }
                format!("explicit_d{}_w{}_{:016x}", self.dim, self.weight, fnv64(bytes.as_bytes()))
            }
            MultiplierKind::DirectSum(cs) => {
                let inner: Vec<String> = cs.iter().map(|c| c.descriptor()).collect();
                format!("sum({})", inner.join("+"))
            }
            MultiplierKind::Conjugate(inner) => format!("conj({})", inner.descriptor()),
        }
        .replace('/', "over")
    }

    fn validate_relations(&self) -> Result<()> {
        // S·S = -I ~ identity and (ST)³ = identity in the PSL quotient
        let words: [&[Token]; 2] = [
            &[Token::S, Token::S],
            &[Token::S, Token::T(1), Token::S, Token::T(1), Token::S, Token::T(1)],
        ];
        for word in words {
            let m = self.fold_word(word)?;
            let dev = m.sub(&CMat::identity(self.dim)).max_abs();
            if dev > 1e-9 {
                return Err(RadError::InconsistentMultiplier(format!(
                    "projective relation violated by {dev:.2e} for word {word:?}"
                )));
            }
        }
        Ok(())
    }

    /// ρ of a generator token (explicit systems).
    fn token_image(&self, t: Token) -> Result<CMat> {
        match (&self.kind, t) {
            (MultiplierKind::Explicit { s_image, .. }, Token::S) => Ok(s_image.clone()),
            (MultiplierKind::Explicit { .. }, Token::T(k)) => {
                let entries: Vec<Complex64> =
                    self.mu.iter().map(|&m| e_rat(m * Rational64::from_integer(k))).collect();
                Ok(CMat::diagonal(&entries))
            }
            _ => Err(RadError::Invalid("token_image is for explicit systems".into())),
        }
    }

    /// ρ(product of word), folded left to right with the cocycle correction
    /// ρ(αg) = ω_w(g, α) ρ(α) ρ(g).
    ///
    /// The direction of ω is forced by the transformation law itself:
    /// expanding f((αg)τ) two ways through f(γτ) = j_w(γ,τ) ρ(γ) f(τ) gives
    /// ρ(αg) j_w(αg,τ) = ρ(α)ρ(g) j_w(α,gτ) j_w(g,τ), and the j-quotient on
    /// the right is ω_w(g,α) times j_w(αg,τ). (The printed condition has ω
    /// on the other side; the eta q-series oracle pins this one.)
    fn fold_word(&self, word: &[Token]) -> Result<CMat> {
        let w = self.weight_f64();
        let mut elem = GroupElement::identity();
        let mut mat = CMat::identity(self.dim);
        for &tok in word {
            let g = match tok {
                Token::S => GroupElement::s(),
                Token::T(k) => GroupElement::t_pow(k),
            };
            let omega = omega_cocycle(w, &g, &elem)?;
            mat = mat.mul(&self.token_image(tok)?).scale(omega);
            elem = elem.mul(&g);
        }
        Ok(mat)
    }

    /// Evaluate ρ(γ). Deterministic for a fixed word decomposition; cached
    /// for explicit systems (concurrent reads, serialized writes).
    pub fn evaluate(&self, gamma: &GroupElement) -> Result<CMat> {
        if !self.group.contains(gamma) {
            return Err(RadError::Invalid(format!(
                "{gamma} is not in {}",
                self.group.label()
            )));
        }
        match &self.kind {
            MultiplierKind::Trivial => Ok(CMat::identity(1)),
            MultiplierKind::EtaPower(r) => Ok(CMat::scalar(eta_power_phase(gamma, *r))),
            MultiplierKind::Conjugate(inner) => Ok(inner.evaluate(gamma)?.conj()),
            MultiplierKind::DirectSum(cs) => {
                let blocks: Result<Vec<CMat>> = cs.iter().map(|c| c.evaluate(gamma)).collect();
                Ok(CMat::block_diag(&blocks?))
            }
            MultiplierKind::Explicit { .. } => {
                if let Some(hit) = self.cache.read().unwrap().get(gamma) {
                    return Ok(hit.clone());
                }
                let word = word_decompose(gamma);
                let mat = self.fold_word(&word)?;
                self.cache.write().unwrap().insert(*gamma, mat.clone());
                Ok(mat)
            }
        }
    }

    /// Scalar fast path (d = 1): the single entry of ρ(γ).
    pub fn evaluate_scalar(&self, gamma: &GroupElement) -> Result<Complex64> {
        match &self.kind {
            MultiplierKind::Trivial => Ok(Complex64::new(1.0, 0.0)),
            MultiplierKind::EtaPower(r) => Ok(eta_power_phase(gamma, *r)),
            MultiplierKind::Conjugate(inner) => Ok(inner.evaluate_scalar(gamma)?.conj()),
            _ => Ok(self.evaluate(gamma)?.get(0, 0)),
        }
    }

    /// Exponents and diagonalizer at a cusp. At ∞ the T^h image is already
    /// diagonal (normality), so ρ_α = I and ν = μ. At other cusps the
    /// image of the parabolic must come out diagonal (scalar presets and
    /// their sums); richer vector-valued data at non-infinite cusps is out
    /// of scope.
    ///
    /// The exponents carry the branch twist e(ν̃) = e(ν) σ_w(α, α⁻¹T^h̄α):
    /// the left-coset invariance of the cusp summands forces the corrected
    /// grid, and at even weight the twist is 1 so ν̃ = ν.
    pub fn cusp_exponents(&self, cusp: &CuspData) -> Result<CuspExponents> {
        if cusp.is_infinity() {
            return Ok(CuspExponents {
                cusp: *cusp,
                exponents: self.mu.clone(),
                rho_alpha: CMat::identity(self.dim),
            });
        }
        let image = self.evaluate(&cusp.parabolic())?;
        if !image.is_diagonal(1e-10) {
            return Err(RadError::Unsupported(
                "non-diagonal parabolic image at a non-infinite cusp".into(),
            ));
        }
        // σ_w(α, P) with P = α⁻¹ T^h̄ α
        let twist = omega_cocycle(self.weight_f64(), &cusp.parabolic(), &cusp.scaling)?;
        let mut exps = Vec::with_capacity(self.dim);
        for i in 0..self.dim {
            let z = image.get(i, i) * twist;
            exps.push(snap_rational(z.arg() / (2.0 * std::f64::consts::PI))?);
        }
        Ok(CuspExponents {
            cusp: *cusp,
            exponents: exps,
            rho_alpha: CMat::identity(self.dim),
        })
    }

    /// Dimension t₀ of the joint eigenvalue-1 subspace of ρ(Γ).
    pub fn invariant_subspace_dim(&self) -> usize {
        match &self.kind {
            MultiplierKind::Trivial => 1,
            MultiplierKind::EtaPower(r) => usize::from(r.rem_euclid(24) == 0),
            MultiplierKind::Conjugate(inner) => inner.invariant_subspace_dim(),
            MultiplierKind::DirectSum(cs) => cs.iter().map(|c| c.invariant_subspace_dim()).sum(),
            MultiplierKind::Explicit { s_image, t_image } => {
                // null space of the stacked (ρ(S)-I; ρ(T)-I), tolerance 1e-9
                let d = self.dim;
                let id = CMat::identity(d);
                let mut rows = Vec::with_capacity(2 * d);
                for m in [s_image.sub(&id), t_image.sub(&id)] {
                    for i in 0..d {
                        rows.push((0..d).map(|j| m.get(i, j)).collect());
                    }
                }
                d - rank_with_tol(&rows, 1e-9)
            }
        }
    }
}

/// Closed-form phase of the η^r multiplier on a canonical representative.
pub fn eta_power_phase(gamma: &GroupElement, r: i32) -> Complex64 {
    if gamma.c == 0 {
        // canonical translation (1, b; 0, 1)
        return e_rat(Rational64::new(r as i64 * gamma.b, 24));
    }
    let (a, c, d) = (gamma.a, gamma.c, gamma.d);
    // Φ = (a+d)/(12c) - s(d,c) - 1/4; ρ = e^{iπ r Φ} = e(rΦ/2)
    let phi = BigRational::new(BigInt::from(a + d), BigInt::from(12 * c))
        - dedekind_sum(d, c)
        - BigRational::new(BigInt::from(1), BigInt::from(4));
    e_big(&(phi * BigRational::new(BigInt::from(r), BigInt::from(2))))
}

/// Decompose γ in the full modular group into a word over {S, T^k} whose
/// product is ±γ, via the Euclidean algorithm on the bottom row. Length is
/// O(log max|entry|).
pub fn word_decompose(gamma: &GroupElement) -> Vec<Token> {
    let s = GroupElement::s();
    let mut g = *gamma;
    let mut tail: Vec<Token> = Vec::new();
    while g.c != 0 {
        // nearest-integer reduction of d modulo c
        let q = nearest_div(g.d, g.c);
        if q != 0 {
            g = g.mul(&GroupElement::t_pow(-q));
            tail.push(Token::T(q));
        }
        // S ≡ S^{-1} in PSL: right-multiplying by S moves |d| into the c slot
        g = g.mul(&s);
        tail.push(Token::S);
    }
    let mut word = Vec::with_capacity(tail.len() + 1);
    if g.b != 0 {
        word.push(Token::T(g.b));
    }
    word.extend(tail.iter().rev().copied());
    word
}

/// Round-to-nearest integer division (ties toward even quotient are fine;
/// any |d - qc| ≤ |c|/2 choice terminates).
fn nearest_div(d: i64, c: i64) -> i64 {
    let q = d.div_euclid(c);
    let r = d - q * c;
    if 2 * r.abs() > c.abs() {
        q + 1
    } else {
        q
    }
}

fn fnv64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}
