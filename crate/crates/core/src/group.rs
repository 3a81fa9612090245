//! Exact arithmetic for elements of SL2(Z) and Gamma_0(N), cusp data,
//! automorphy factors with principal-branch phases, and the coset /
//! double-coset enumerations driving every sum in the crate.
//!
//! Elements are integer 2×2 matrices identified with their negatives
//! (the PSL quotient), kept in a canonical sign: c > 0, or c = 0 and d > 0.
//! The automorphy factor is j_w(γ,τ) = (cτ+d)^w on the principal branch of
//! ln(cτ+d); for a canonical representative cτ+d stays in the closed upper
//! half plane, so j_w(γ,·) is continuous in τ and the branch cocycle
//! ω_w(α,β) is genuinely τ-independent.

use crate::error::{RadError, Result};
use num::complex::Complex64;
use num::integer::gcd;
use num::rational::Rational64;

/// An element of the Fuchsian group, an integer matrix (a b; c d) of
/// determinant 1 modulo ±I, stored with canonical sign.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupElement {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub d: i64,
}

impl GroupElement {
    /// Build from entries; enforces det = 1 and canonicalizes the sign.
    pub fn new(a: i64, b: i64, c: i64, d: i64) -> Result<Self> {
        if a * d - b * c != 1 {
            return Err(RadError::Invalid(format!(
                "matrix ({a},{b};{c},{d}) has determinant {} != 1",
                a * d - b * c
            )));
        }
        let mut g = GroupElement { a, b, c, d };
        g.canonicalize();
        Ok(g)
    }

    fn canonicalize(&mut self) {
        if self.c < 0 || (self.c == 0 && self.d < 0) {
            self.a = -self.a;
            self.b = -self.b;
            self.c = -self.c;
            self.d = -self.d;
        }
    }

    pub fn identity() -> Self {
        GroupElement { a: 1, b: 0, c: 0, d: 1 }
    }

    /// S = (0 -1; 1 0).
    pub fn s() -> Self {
        GroupElement { a: 0, b: -1, c: 1, d: 0 }
    }

    /// T^n = (1 n; 0 1).
    pub fn t_pow(n: i64) -> Self {
        GroupElement { a: 1, b: n, c: 0, d: 1 }
    }

    pub fn mul(&self, other: &GroupElement) -> GroupElement {
        let mut g = GroupElement {
            a: self.a * other.a + self.b * other.c,
            b: self.a * other.b + self.b * other.d,
            c: self.c * other.a + self.d * other.c,
            d: self.c * other.b + self.d * other.d,
        };
        g.canonicalize();
        g
    }

    pub fn inv(&self) -> GroupElement {
        let mut g = GroupElement { a: self.d, b: -self.b, c: -self.c, d: self.a };
        g.canonicalize();
        g
    }

    pub fn is_identity(&self) -> bool {
        self.c == 0 && self.a == 1 && self.d == 1 && self.b == 0
    }

    /// Möbius action on the upper half plane.
    pub fn act(&self, tau: Complex64) -> Complex64 {
        let a = self.a as f64;
        let b = self.b as f64;
        let c = self.c as f64;
        let d = self.d as f64;
        (tau * a + b) / (tau * c + d)
    }

    /// γ∞ = a/c as an exact rational; `None` when c = 0 (γ fixes ∞).
    pub fn act_infinity(&self) -> Option<Rational64> {
        if self.c == 0 {
            None
        } else {
            Some(Rational64::new(self.a, self.c))
        }
    }

    /// γ⁻¹∞ = -d/c; `None` when c = 0.
    pub fn inv_act_infinity(&self) -> Option<Rational64> {
        if self.c == 0 {
            None
        } else {
            Some(Rational64::new(-self.d, self.c))
        }
    }
}

impl std::fmt::Display for GroupElement {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({} {}; {} {})", self.a, self.b, self.c, self.d)
    }
}

/// Supported group families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GroupSpec {
    /// The full modular group SL2(Z) (mod ±I).
    Full,
    /// The Hecke congruence subgroup Gamma_0(N).
    Gamma0(u32),
}

impl GroupSpec {
    pub fn level(&self) -> u32 {
        match self {
            GroupSpec::Full => 1,
            GroupSpec::Gamma0(n) => *n,
        }
    }

    /// Membership: determinant 1 (enforced by the type) plus c ≡ 0 mod N.
    pub fn contains(&self, g: &GroupElement) -> bool {
        g.c.rem_euclid(self.level() as i64) == 0
    }

    /// Width of the cusp at ∞ (1 for both supported families).
    pub fn width_at_infinity(&self) -> i64 {
        1
    }

    pub fn label(&self) -> String {
        match self {
            GroupSpec::Full => "SL2Z".into(),
            GroupSpec::Gamma0(n) => format!("Gamma0({n})"),
        }
    }
}

/// A cusp a/c of the group (or ∞), with its width and scaling matrix.
///
/// The scaling is stored as the integer matrix α = β⁻¹ where β∞ = cusp;
/// then α(cusp) = ∞ and the width is the minimal t > 0 with α⁻¹T^tα ∈ Γ.
/// Keeping α integral keeps every Kloosterman phase an exact rational.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct CuspData {
    /// Numerator of the representative (1 for ∞).
    pub numer: i64,
    /// Denominator of the representative (0 for ∞).
    pub denom: i64,
    /// Width h̄ of the cusp.
    pub width: i64,
    /// Scaling matrix α with α(cusp) = ∞.
    pub scaling: GroupElement,
}

impl CuspData {
    pub fn infinity(group: &GroupSpec) -> Self {
        CuspData {
            numer: 1,
            denom: 0,
            width: group.width_at_infinity(),
            scaling: GroupElement::identity(),
        }
    }

    /// Cusp p/q in lowest terms for the given group; computes the width
    /// N/gcd(q², N) and an integral scaling matrix.
    pub fn new(group: &GroupSpec, p: i64, q: i64) -> Result<Self> {
        if q == 0 {
            return Ok(Self::infinity(group));
        }
        let g = gcd(p.abs(), q.abs());
        let (p, q) = if q < 0 { (-p / g, -q / g) } else { (p / g, q / g) };
        let n = group.level() as i64;
        let width = n / gcd(q * q, n);
        // β = (p b; q d) with det 1, so β∞ = p/q; α = β⁻¹
        let (_, x, y) = ext_gcd(p, q);
        // p·x + q·y = 1  =>  β = (p, -y; q, x)
        let beta = GroupElement::new(p, -y, q, x)?;
        Ok(CuspData { numer: p, denom: q, width, scaling: beta.inv() })
    }

    pub fn is_infinity(&self) -> bool {
        self.denom == 0
    }

    /// β = α⁻¹, the matrix sending ∞ to the cusp.
    pub fn beta(&self) -> GroupElement {
        self.scaling.inv()
    }

    /// The parabolic generator α⁻¹ T^width α = β T^width β⁻¹ ∈ Γ fixing
    /// the cusp.
    pub fn parabolic(&self) -> GroupElement {
        let beta = self.beta();
        beta.mul(&GroupElement::t_pow(self.width)).mul(&beta.inv())
    }

    pub fn label(&self) -> String {
        if self.is_infinity() {
            "inf".into()
        } else {
            format!("{}_{}", self.numer, self.denom)
        }
    }
}

impl std::fmt::Display for CuspData {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_infinity() {
            write!(f, "inf (width {})", self.width)
        } else {
            write!(f, "{}/{} (width {})", self.numer, self.denom, self.width)
        }
    }
}

/// Extended Euclid: returns (g, x, y) with a·x + b·y = g = gcd(a, b).
pub fn ext_gcd(a: i64, b: i64) -> (i64, i64, i64) {
    if b == 0 {
        return if a < 0 { (-a, -1, 0) } else { (a, 1, 0) };
    }
    let (g, x, y) = ext_gcd(b, a.rem_euclid(b));
    (g, y, x - a.div_euclid(b) * y)
}

/// Inverse of a modulo m (m ≥ 1, gcd(a, m) = 1), in [0, m).
pub fn mod_inverse(a: i64, m: i64) -> i64 {
    if m == 1 {
        return 0;
    }
    let (g, x, _) = ext_gcd(a.rem_euclid(m), m);
    debug_assert_eq!(g, 1, "mod_inverse requires gcd(a,m) = 1");
    x.rem_euclid(m)
}

// ---------------------------------------------------------------------------
// Automorphy factor and branch cocycle
// ---------------------------------------------------------------------------

/// j_w(γ,τ) = (cτ+d)^w on the principal branch, for the canonical
/// representative. |j_w| = |cτ+d|^w, j_w(T^n,τ) = 1, and j_w(S,i) = e^{iπw/2}.
pub fn automorphy_factor(w: f64, gamma: &GroupElement, tau: Complex64) -> Complex64 {
    let z = tau * gamma.c as f64 + gamma.d as f64;
    // canonical sign puts z in the closed upper half plane; ln is principal
    (z.ln() * w).exp()
}

/// The phase ω_w(α,β) of unit modulus relating
/// j_w(βα,τ) = ω_w(α,β)^{-1} j_w(β,ατ) j_w(α,τ).
///
/// Computed from the quotient at τ = 2i, verified at a second sample point,
/// and snapped to the nearest e^{iπwk}, k ∈ {-2..2}, when within 1e-9.
/// Disagreement between sample points beyond 1e-8 is a branch-cut pathology
/// and is retried at perturbed points before giving up.
pub fn omega_cocycle(w: f64, alpha: &GroupElement, beta: &GroupElement) -> Result<Complex64> {
    // even integer weights have trivial cocycle
    if w == w.floor() && (w as i64).rem_euclid(2) == 0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let samples = [
        (Complex64::new(0.0, 2.0), Complex64::new(0.3, 0.7)),
        (Complex64::new(0.13, 1.31), Complex64::new(-0.41, 0.83)),
        (Complex64::new(0.71, 2.41), Complex64::new(-0.17, 1.129)),
    ];
    let prod = beta.mul(alpha);
    for (t0, t1) in samples {
        let w0 = omega_at(w, alpha, beta, &prod, t0);
        let w1 = omega_at(w, alpha, beta, &prod, t1);
        if (w0 - w1).norm() <= 1e-8 {
            // snap to the finite set of branch phases
            for k in -2i32..=2 {
                let cand = Complex64::from_polar(1.0, std::f64::consts::PI * w * k as f64);
                if (w0 - cand).norm() <= 1e-9 {
                    return Ok(cand);
                }
            }
            return Ok(w0 / w0.norm());
        }
    }
    Err(RadError::Numerical(format!(
        "omega cocycle sample points disagree for alpha={alpha}, beta={beta}"
    )))
}

fn omega_at(
    w: f64,
    alpha: &GroupElement,
    beta: &GroupElement,
    prod: &GroupElement,
    tau: Complex64,
) -> Complex64 {
    automorphy_factor(w, beta, alpha.act(tau)) * automorphy_factor(w, alpha, tau)
        / automorphy_factor(w, prod, tau)
}

// ---------------------------------------------------------------------------
// Coset enumeration
// ---------------------------------------------------------------------------

/// One representative per double coset Γ_∞\αΓ/Γ_∞ with c(γ) = c (left
/// quotient by T^{width(cusp)}, right by T^{width(∞)}).
///
/// Representatives are integer matrices γ = α σ, σ ∈ Γ (the stored scaling
/// is integral), normalized to d ∈ [0, c·h) and a ∈ [0, c·h̄).
/// Returns an empty list when no coset has the requested c (e.g. c not a
/// multiple of the level at the ∞ cusp).
pub fn double_coset_reps(
    group: &GroupSpec,
    cusp: &CuspData,
    c: i64,
) -> Result<Vec<GroupElement>> {
    if c < 1 {
        return Err(RadError::Invalid(format!("c must be >= 1, got {c}")));
    }
    let h = group.width_at_infinity();
    let hbar = cusp.width;
    let beta = cusp.beta();
    let mut reps = Vec::new();
    if cusp.is_infinity() {
        // fast path: d mod c coprime, a = d^{-1} mod c
        if c.rem_euclid(group.level() as i64) != 0 {
            return Ok(reps);
        }
        for d in 0..c * h {
            if gcd(d, c) != 1 {
                continue;
            }
            let a = mod_inverse(d, c); // a·d ≡ 1 (mod c), a ∈ [0, c)
            let b = (a * d - 1) / c;
            reps.push(GroupElement::new(a, b, c, d)?);
        }
        // c = 1: d = 0 is the single coset (gcd(0,1) = 1, a = 0, b = -1)
        return Ok(reps);
    }
    // general cusp: γ = (a b; c d) with βγ ∈ Γ, d mod c·h, a mod c·h̄
    for d in 0..c * h {
        if gcd(d, c) != 1 {
            continue;
        }
        let a0 = mod_inverse(d, c);
        for t in 0..hbar {
            let a = a0 + t * c;
            let b = (a * d - 1) / c;
            let gamma = GroupElement::new(a, b, c, d)?;
            if group.contains(&beta.mul(&gamma)) {
                reps.push(gamma);
            }
        }
    }
    Ok(reps)
}

/// Coset representatives of Γ_∞\Γ_{K,K²}: one per left Γ_∞-coset whose
/// bottom row satisfies 0 ≤ c < K, |d| < K². The identity coset (c = 0)
/// is always included and comes first.
pub fn enumerate_rectangle(group: &GroupSpec, k: i64) -> Result<Vec<GroupElement>> {
    if k < 1 {
        return Err(RadError::Invalid(format!("K must be >= 1, got {k}")));
    }
    let n = group.level() as i64;
    let mut out = vec![GroupElement::identity()];
    let k2 = k * k;
    let mut c = n;
    while c < k {
        for d in (1 - k2)..k2 {
            if gcd(c, d.abs()) != 1 {
                continue;
            }
            // a ≡ d^{-1} mod c picks one representative of the coset
            let a = mod_inverse(d.rem_euclid(c), c);
            let b = (a * d - 1) / c;
            out.push(GroupElement::new(a, b, c, d)?);
        }
        c += n;
    }
    Ok(out)
}

/// Coset representatives of Γ_∞\(αΓ)_{K,K²} for a pole at the given cusp:
/// integer matrices γ with βγ ∈ Γ, 0 ≤ c < K, |d| < K², one per left
/// orbit a ↦ a + c·h̄.
pub fn enumerate_rectangle_at_cusp(
    group: &GroupSpec,
    cusp: &CuspData,
    k: i64,
) -> Result<Vec<GroupElement>> {
    if cusp.is_infinity() {
        return enumerate_rectangle(group, k);
    }
    if k < 1 {
        return Err(RadError::Invalid(format!("K must be >= 1, got {k}")));
    }
    let beta = cusp.beta();
    let hbar = cusp.width;
    let mut out = Vec::new();
    let k2 = k * k;
    // c = 0: upper-triangular γ = T^b; βT^b ∈ Γ only if the cusp is
    // Γ-equivalent to ∞ under β, which our inequivalent representatives
    // are not, so the pole block is empty (δ_α = 0).
    for c in 1..k {
        for d in (1 - k2)..k2 {
            if gcd(c, d.abs()) != 1 {
                continue;
            }
            let a0 = mod_inverse(d.rem_euclid(c), c);
            for t in 0..hbar {
                let a = a0 + t * c;
                let b = (a * d - 1) / c;
                let gamma = GroupElement::new(a, b, c, d)?;
                if group.contains(&beta.mul(&gamma)) {
                    out.push(gamma);
                }
            }
        }
    }
    Ok(out)
}

/// One representative per Γ-equivalence class of cusps, with width and
/// scaling. The full modular group has the single cusp ∞; Gamma_0(N) uses
/// the standard parametrization by divisors c | N with a mod gcd(c, N/c).
pub fn cusp_list(group: &GroupSpec) -> Vec<CuspData> {
    let n = group.level() as i64;
    if n == 1 {
        return vec![CuspData::infinity(group)];
    }
    let mut cusps = vec![CuspData::infinity(group)];
    let mut divisors: Vec<i64> = (1..=n).filter(|c| n % c == 0).collect();
    divisors.sort_unstable();
    for &c in &divisors {
        if c == n {
            continue; // the class of ∞, already listed
        }
        let g = gcd(c, n / c);
        // g = 1 has the single class of 0/c; otherwise a runs over units mod g
        let range: Vec<i64> = if g == 1 { vec![0] } else { (1..=g).filter(|a| gcd(*a, g) == 1).collect() };
        for a0 in range {
            // lift a0 to a with gcd(a, c) = 1 (a ≡ a0 mod gcd(c, N/c))
            let mut a = a0;
            while gcd(a, c) != 1 {
                a += g;
            }
            cusps.push(CuspData::new(group, a, c).expect("valid cusp"));
        }
    }
    cusps
}
