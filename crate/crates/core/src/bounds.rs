//! Closed-form lower bounds on the mean of the first `k` Dirichlet
//! eigenvalues.
//!
//! All evaluators report bounds on the *mean* `(1/k) Σ_{j<=k} λ_j`. Each
//! result carries a per-term breakdown, a note describing applicability, and
//! a `certified` flag: asymptotic two-term forms evaluated with ε = 0 are
//! displayed but never used in verification.
//!
//! The poly-Laplacian bounds only read the dimension, volume and inertia of a
//! [`ProblemSpec`]; the quadratic-operator bounds additionally require the
//! operator to be `Δ² - aΔ` and read its coefficient `a`.

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::extremal;
use crate::geometry::{unit_ball_volume, Domain};

/// Operator the eigenvalue problem is posed for.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Operator {
    /// `(-Δ)^l` with Dirichlet conditions on `u` and its first `l-1` normal
    /// derivatives.
    PolyLaplacian { order: u32 },
    /// `Δ² - aΔ` with clamped (Dirichlet + normal derivative) conditions,
    /// `a >= 0`.
    Quadratic { a: f64 },
}

/// Dimension, operator and the two geometric invariants every bound needs.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub n: usize,
    pub operator: Operator,
    pub volume: f64,
    pub inertia: f64,
}

impl ProblemSpec {
    pub fn new(n: usize, operator: Operator, volume: f64, inertia: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidArgument(format!("dimension must be >= 2, got {n}")));
        }
        if !(volume.is_finite() && volume > 0.0) {
            return Err(Error::InvalidArgument("volume must be finite and > 0".into()));
        }
        if !(inertia > 0.0) {
            return Err(Error::InvalidArgument("inertia must be > 0".into()));
        }
        match operator {
            Operator::PolyLaplacian { order } if order < 1 => {
                return Err(Error::InvalidArgument("poly-Laplacian order must be >= 1".into()))
            }
            Operator::Quadratic { a } if !(a.is_finite() && a >= 0.0) => {
                return Err(Error::InvalidArgument(
                    "quadratic coefficient must be finite and >= 0".into(),
                ))
            }
            _ => {}
        }
        Ok(Self { n, operator, volume, inertia })
    }

    pub fn from_domain(domain: &Domain, operator: Operator) -> Result<Self> {
        let inv = domain.invariants()?;
        Self::new(domain.dimension(), operator, inv.volume, inv.inertia)
    }

    /// Coefficient `a` of the quadratic operator, or a not-applicable error.
    pub fn quadratic_coefficient(&self) -> Result<f64> {
        match self.operator {
            Operator::Quadratic { a } => Ok(a),
            Operator::PolyLaplacian { .. } => Err(Error::NotApplicable(
                "this bound is restricted to the quadratic operator Δ²-aΔ".into(),
            )),
        }
    }
}

/// Identifier of an inequality. The string forms are stable and are used
/// verbatim in CSV/JSON output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundId {
    Polya,
    LiYau,
    Melas,
    IlyinL1,
    LevineProtterL2,
    IlyinN2L2,
    ChengWei,
    LevineProtterGeneral,
    ChengQiWei,
    Thm1,
    LevineProtterQuad,
    Thm2,
    Thm3,
    Thm4,
    Rigorous,
    RigorousQuad,
}

impl BoundId {
    pub fn as_str(&self) -> &'static str {
        match self {
            BoundId::Polya => "polya",
            BoundId::LiYau => "li_yau",
            BoundId::Melas => "melas",
            BoundId::IlyinL1 => "ilyin_l1",
            BoundId::LevineProtterL2 => "levine_protter_l2",
            BoundId::IlyinN2L2 => "ilyin_n2_l2",
            BoundId::ChengWei => "cheng_wei",
            BoundId::LevineProtterGeneral => "levine_protter_general",
            BoundId::ChengQiWei => "cheng_qi_wei",
            BoundId::Thm1 => "thm1",
            BoundId::LevineProtterQuad => "levine_protter_quad",
            BoundId::Thm2 => "thm2",
            BoundId::Thm3 => "thm3",
            BoundId::Thm4 => "thm4",
            BoundId::Rigorous => "rigorous",
            BoundId::RigorousQuad => "rigorous_quad",
        }
    }

    pub fn all() -> &'static [BoundId] {
        &[
            BoundId::Polya,
            BoundId::LiYau,
            BoundId::Melas,
            BoundId::IlyinL1,
            BoundId::LevineProtterL2,
            BoundId::IlyinN2L2,
            BoundId::ChengWei,
            BoundId::LevineProtterGeneral,
            BoundId::ChengQiWei,
            BoundId::Thm1,
            BoundId::LevineProtterQuad,
            BoundId::Thm2,
            BoundId::Thm3,
            BoundId::Thm4,
            BoundId::Rigorous,
            BoundId::RigorousQuad,
        ]
    }
}

impl fmt::Display for BoundId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BoundId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BoundId::all()
            .iter()
            .copied()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown inequality id '{s}'")))
    }
}

impl Serialize for BoundId {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

/// One named addend of a bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Term {
    pub name: String,
    pub value: f64,
}

impl Term {
    pub(crate) fn new(name: &str, value: f64) -> Self {
        Self { name: name.to_string(), value }
    }
}

/// One inequality evaluated at one `k`: the lower bound on the mean of the
/// first `k` eigenvalues, its addends, and an applicability note.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundResult {
    pub id: BoundId,
    pub k: u64,
    /// Sum of `terms`.
    pub value: f64,
    pub terms: Vec<Term>,
    pub note: String,
    /// True when the value is a proven lower bound at this `k`; false for
    /// asymptotic displays (ε = 0 forms) and the pointwise tiling bound.
    pub certified: bool,
}

impl BoundResult {
    pub(crate) fn new(id: BoundId, k: u64, terms: Vec<Term>, note: &str, certified: bool) -> Self {
        let value = terms.iter().map(|t| t.value).sum();
        Self { id, k, value, terms, note: note.to_string(), certified }
    }
}

// Serialized shape is fixed: {id, k, value, terms, note}.
impl Serialize for BoundResult {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("BoundResult", 5)?;
        s.serialize_field("id", &self.id)?;
        s.serialize_field("k", &self.k)?;
        s.serialize_field("value", &self.value)?;
        s.serialize_field("terms", &self.terms)?;
        s.serialize_field("note", &self.note)?;
        s.end()
    }
}

/// How the `(1 - ε)` factor of the two-term bounds is treated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EpsilonMode {
    /// ε = 0: the displayed asymptotic form, not certified for small `k`.
    Zero,
    /// The second term is delegated to the certified extremal-profile bound
    /// and the effective ε is reported.
    Rigorous,
}

/// Weight `β_n` of the inertia term in the explicit low-dimension bounds.
pub fn beta_n(n: usize) -> Result<f64> {
    match n {
        2 => Ok(119.0 / 120.0),
        3 => Ok(0.986),
        4 => Ok(0.983),
        _ => Err(Error::NotApplicable(format!(
            "beta_n is only defined for n in {{2,3,4}}, got n={n}"
        ))),
    }
}

/// Weight `α_n` of the inertia term in the explicit quadratic-operator bound.
pub fn alpha_n(n: usize) -> Result<f64> {
    match n {
        2 => Ok(12095.0 / 12096.0),
        3 => Ok(0.991),
        4 => Ok(0.985),
        _ => Err(Error::NotApplicable(format!(
            "alpha_n is only defined for n in {{2,3,4}}, got n={n}"
        ))),
    }
}

/// `(2π)^e / (ω_n V)^{e/n}` — the geometry factor attached to a `k^{e/n}`
/// power.
fn geometry_power(n: usize, volume: f64, e: i32) -> f64 {
    let omega = unit_ball_volume(n).expect("n >= 2");
    (2.0 * PI).powi(e) / (omega * volume).powf(e as f64 / n as f64)
}

/// Leading Weyl-order term `n/(n+2l) · (2π)^{2l}/(ω_n V)^{2l/n} · k^{2l/n}`,
/// common to every mean bound.
pub fn weyl_leading(spec: &ProblemSpec, l: u32, k: u64) -> f64 {
    let n = spec.n as f64;
    let e = 2 * l as i32;
    n / (n + 2.0 * l as f64)
        * geometry_power(spec.n, spec.volume, e)
        * (k as f64).powf(e as f64 / n)
}

/// Single-term Berezin-type bound for the Laplacian (`l = 1`).
pub fn li_yau(spec: &ProblemSpec, k: u64) -> BoundResult {
    let terms = vec![Term::new("weyl", weyl_leading(spec, 1, k))];
    BoundResult::new(BoundId::LiYau, k, terms, "mean bound, l=1", true)
}

/// Pointwise tiling-domain bound on the k-th eigenvalue itself. Display
/// only: it bounds `λ_k`, not the mean, and holds only for tiling domains.
pub fn polya(spec: &ProblemSpec, k: u64) -> BoundResult {
    let value = geometry_power(spec.n, spec.volume, 2) * (k as f64).powf(2.0 / spec.n as f64);
    BoundResult::new(
        BoundId::Polya,
        k,
        vec![Term::new("weyl_pointwise", value)],
        "bounds the k-th eigenvalue on tiling domains; shown for reference, never verified",
        false,
    )
}

/// Berezin-type bound plus the constant inertia correction `V/(24(n+2)I)`.
pub fn melas(spec: &ProblemSpec, k: u64) -> BoundResult {
    let n = spec.n as f64;
    let terms = vec![
        Term::new("weyl", weyl_leading(spec, 1, k)),
        Term::new("inertia", spec.volume / spec.inertia / (24.0 * (n + 2.0))),
    ];
    BoundResult::new(BoundId::Melas, k, terms, "mean bound, l=1", true)
}

/// Explicit two-term `l = 1` bound with the `β_n`-weighted inertia term;
/// restricted to `n ∈ {2,3,4}`.
pub fn ilyin_l1(spec: &ProblemSpec, k: u64) -> Result<BoundResult> {
    let beta = beta_n(spec.n).map_err(|_| {
        Error::NotApplicable(format!(
            "ilyin_l1 is restricted to n in {{2,3,4}}, got n={}",
            spec.n
        ))
    })?;
    let n = spec.n as f64;
    let terms = vec![
        Term::new("weyl", weyl_leading(spec, 1, k)),
        Term::new("inertia", n / 48.0 * beta * spec.volume / spec.inertia),
    ];
    Ok(BoundResult::new(
        BoundId::IlyinL1,
        k,
        terms,
        "mean bound, l=1, beta_n-weighted",
        true,
    ))
}

/// Single Weyl-order term for any order `l >= 1`.
pub fn levine_protter(spec: &ProblemSpec, l: u32, k: u64) -> Result<BoundResult> {
    if l < 1 {
        return Err(Error::InvalidArgument("order l must be >= 1".into()));
    }
    let id = if l == 2 { BoundId::LevineProtterL2 } else { BoundId::LevineProtterGeneral };
    let terms = vec![Term::new("weyl", weyl_leading(spec, l, k))];
    Ok(BoundResult::new(id, k, terms, &format!("mean bound, l={l}"), true))
}

/// Two-term `n = 2`, `l = 2` bound `16π²/(3V²)·k² + 12095π/(3·12096·I)·k`.
pub fn ilyin_n2_l2(spec: &ProblemSpec, k: u64) -> Result<BoundResult> {
    if spec.n != 2 {
        return Err(Error::NotApplicable(format!(
            "ilyin_n2_l2 is restricted to n=2, got n={}",
            spec.n
        )));
    }
    let kf = k as f64;
    let terms = vec![
        Term::new("weyl", 16.0 * PI * PI / (3.0 * spec.volume * spec.volume) * kf * kf),
        Term::new("k_linear", 12095.0 * PI / (3.0 * 12096.0 * spec.inertia) * kf),
    ];
    Ok(BoundResult::new(BoundId::IlyinN2L2, k, terms, "mean bound, n=2, l=2", true))
}

/// Three-term strengthening of the `l = 2` bound.
pub fn cheng_wei(spec: &ProblemSpec, k: u64) -> BoundResult {
    let n = spec.n as f64;
    let kf = k as f64;
    let vi = spec.volume / spec.inertia;
    let bracket1 = (n + 2.0) / (12.0 * n * (n + 4.0)) - 1.0 / (1152.0 * n * n * (n + 4.0));
    let bracket2 =
        1.0 / (576.0 * n * (n + 4.0)) - 1.0 / (27648.0 * n * n * (n + 2.0) * (n + 4.0));
    let terms = vec![
        Term::new("weyl", weyl_leading(spec, 2, k)),
        Term::new(
            "k2_inertia",
            n / (n + 2.0) * bracket1 * geometry_power(spec.n, spec.volume, 2) * vi
                * kf.powf(2.0 / n),
        ),
        Term::new("inertia_sq", bracket2 * vi * vi),
    ];
    BoundResult::new(BoundId::ChengWei, k, terms, "mean bound, l=2", true)
}

/// `l + 1` term bound: the Weyl term plus `p = 1..l` inertia corrections
/// with coefficients `(l+1-p) / (24^p · n(n+2)···(n+2p-2))`.
pub fn cheng_qi_wei(spec: &ProblemSpec, l: u32, k: u64) -> Result<BoundResult> {
    if l < 1 {
        return Err(Error::InvalidArgument("order l must be >= 1".into()));
    }
    let n = spec.n as f64;
    let kf = k as f64;
    let vi = spec.volume / spec.inertia;
    let mut terms = vec![Term::new("weyl", weyl_leading(spec, l, k))];
    for p in 1..=l {
        let mut denom = 24f64.powi(p as i32);
        for j in 0..p {
            denom *= n + 2.0 * j as f64;
        }
        let e = 2 * (l - p) as i32;
        let value = n / (n + 2.0 * l as f64)
            * ((l + 1 - p) as f64 / denom)
            * geometry_power(spec.n, spec.volume, e)
            * vi.powi(p as i32)
            * kf.powf(e as f64 / n);
        terms.push(Term { name: format!("p{p}"), value });
    }
    Ok(BoundResult::new(BoundId::ChengQiWei, k, terms, &format!("mean bound, l={l}"), true))
}

/// Second term of [`thm1`] with ε = 0:
/// `nl/48 · (2π)^{2l-2}/(ω_n V)^{(2l-2)/n} · (V/I) · k^{(2l-2)/n}`.
pub fn thm1_second_term(spec: &ProblemSpec, l: u32, k: u64) -> f64 {
    let n = spec.n as f64;
    let e = 2 * l as i32 - 2;
    n * l as f64 / 48.0
        * geometry_power(spec.n, spec.volume, e)
        * (spec.volume / spec.inertia)
        * (k as f64).powf(e as f64 / n)
}

/// Two-term bound for any order `l`, whose second term carries the factor
/// `1 - ε(k)`. With [`EpsilonMode::Zero`] the value is an asymptotic display;
/// with [`EpsilonMode::Rigorous`] the certified extremal-profile bound is
/// reported and decomposed against the Weyl term.
pub fn thm1(spec: &ProblemSpec, l: u32, k: u64, mode: EpsilonMode) -> Result<BoundResult> {
    if l < 1 {
        return Err(Error::InvalidArgument("order l must be >= 1".into()));
    }
    let weyl = weyl_leading(spec, l, k);
    match mode {
        EpsilonMode::Zero => {
            let terms = vec![
                Term::new("weyl", weyl),
                Term::new("second", thm1_second_term(spec, l, k)),
            ];
            Ok(BoundResult::new(
                BoundId::Thm1,
                k,
                terms,
                "asymptotic, not a certified bound for small k (epsilon = 0)",
                false,
            ))
        }
        EpsilonMode::Rigorous => {
            let rig = extremal::rigorous_sum_bound(spec.n, l, spec.volume, spec.inertia, k)?;
            let eps = extremal::epsilon_effective(spec.n, l, spec.volume, spec.inertia, k)?;
            let terms = vec![Term::new("weyl", weyl), Term::new("second", rig.value - weyl)];
            Ok(BoundResult::new(
                BoundId::Thm1,
                k,
                terms,
                &format!("certified via extremal profile; effective epsilon = {eps:.6e}"),
                true,
            ))
        }
    }
}

/// Two-term bound for the quadratic operator `Δ² - aΔ`.
pub fn levine_protter_quad(spec: &ProblemSpec, k: u64) -> Result<BoundResult> {
    let a = spec.quadratic_coefficient()?;
    let n = spec.n as f64;
    let kf = k as f64;
    let terms = vec![
        Term::new("weyl", weyl_leading(spec, 2, k)),
        Term::new(
            "laplacian_a",
            n * a / (n + 2.0) * geometry_power(spec.n, spec.volume, 2) * kf.powf(2.0 / n),
        ),
    ];
    Ok(BoundResult::new(BoundId::LevineProtterQuad, k, terms, "mean bound, quadratic operator", true))
}

fn thm2_terms(spec: &ProblemSpec, a: f64, k: u64) -> (f64, f64, f64) {
    let n = spec.n as f64;
    let kf = k as f64;
    let vi = spec.volume / spec.inertia;
    let t1 = weyl_leading(spec, 2, k);
    let t2 = (n / 24.0 * vi + n * a / (n + 2.0))
        * geometry_power(spec.n, spec.volume, 2)
        * kf.powf(2.0 / n);
    let t3 = (-n * (n * n - 4.0) / 3840.0 * vi + n * a / 48.0) * vi;
    (t1, t2, t3)
}

/// Three-term bound for the quadratic operator whose constant term carries
/// `1 - ε(k)`. The constant bracket may be negative (n > 2, small `a`) and is
/// reported signed.
pub fn thm2(spec: &ProblemSpec, k: u64, mode: EpsilonMode) -> Result<BoundResult> {
    let a = spec.quadratic_coefficient()?;
    let (t1, t2, t3) = thm2_terms(spec, a, k);
    match mode {
        EpsilonMode::Zero => {
            let terms = vec![
                Term::new("weyl", t1),
                Term::new("k2_mixed", t2),
                Term::new("const_mixed", t3),
            ];
            Ok(BoundResult::new(
                BoundId::Thm2,
                k,
                terms,
                "asymptotic, not a certified bound for small k (epsilon = 0)",
                false,
            ))
        }
        EpsilonMode::Rigorous => {
            let rig =
                extremal::rigorous_quad_bound(spec.n, spec.volume, spec.inertia, a, k)?;
            let rest = rig.value - t1 - t2;
            let eps_note = if t3 != 0.0 {
                format!("effective epsilon = {:.6e}", 1.0 - rest / t3)
            } else {
                "constant bracket vanishes (n=2, a=0)".to_string()
            };
            let terms = vec![
                Term::new("weyl", t1),
                Term::new("k2_mixed", t2),
                Term::new("const_mixed", rest),
            ];
            Ok(BoundResult::new(
                BoundId::Thm2,
                k,
                terms,
                &format!("certified via extremal profile; {eps_note}"),
                true,
            ))
        }
    }
}

/// Unconditional three-term bound for the quadratic operator with
/// `α_n`-weighted `k^{2/n}` term; restricted to `n ∈ {2,3,4}`.
pub fn thm3(spec: &ProblemSpec, k: u64) -> Result<BoundResult> {
    let a = spec.quadratic_coefficient()?;
    if !(2..=4).contains(&spec.n) {
        return Err(Error::NotApplicable(format!(
            "thm3 is restricted to n in {{2,3,4}}, got n={}",
            spec.n
        )));
    }
    let alpha = alpha_n(spec.n)?;
    let beta = beta_n(spec.n)?;
    let n = spec.n as f64;
    let kf = k as f64;
    let vi = spec.volume / spec.inertia;
    let terms = vec![
        Term::new("weyl", weyl_leading(spec, 2, k)),
        Term::new(
            "k2_mixed",
            (n / 24.0 * alpha * vi + n * a / (n + 2.0))
                * geometry_power(spec.n, spec.volume, 2)
                * kf.powf(2.0 / n),
        ),
        Term::new("const_a", n * a / 48.0 * beta * vi),
    ];
    Ok(BoundResult::new(BoundId::Thm3, k, terms, "mean bound, quadratic operator, unconditional", true))
}

/// Unconditional variant of [`thm2`] with `β_n`-weighted `a`-term in the
/// constant bracket; restricted to `n ∈ {3,4}`.
pub fn thm4(spec: &ProblemSpec, k: u64) -> Result<BoundResult> {
    let a = spec.quadratic_coefficient()?;
    if !(3..=4).contains(&spec.n) {
        return Err(Error::NotApplicable(format!(
            "thm4 is restricted to n in {{3,4}}, got n={}",
            spec.n
        )));
    }
    let beta = beta_n(spec.n)?;
    let n = spec.n as f64;
    let kf = k as f64;
    let vi = spec.volume / spec.inertia;
    let terms = vec![
        Term::new("weyl", weyl_leading(spec, 2, k)),
        Term::new(
            "k2_mixed",
            (n / 24.0 * vi + n * a / (n + 2.0))
                * geometry_power(spec.n, spec.volume, 2)
                * kf.powf(2.0 / n),
        ),
        Term::new(
            "const_mixed",
            (-n * (n * n - 4.0) / 3840.0 * vi + n * a / 48.0 * beta) * vi,
        ),
    ];
    Ok(BoundResult::new(BoundId::Thm4, k, terms, "mean bound, quadratic operator, unconditional", true))
}

/// Coefficient of the third term of the large-`k` expansion of the
/// extremal-profile moment:
/// `C(n,l) = (n+2l-1)[(n+2l-2)(6l-7n+1) + 5(n-1)²] + (n-1)(n-3)(2n+1)`.
pub fn expansion_coefficient(n: usize, l: u32) -> f64 {
    let n = n as i64;
    let l = l as i64;
    let c = (n + 2 * l - 1) * ((n + 2 * l - 2) * (6 * l - 7 * n + 1) + 5 * (n - 1) * (n - 1))
        + (n - 1) * (n - 3) * (2 * n + 1);
    c as f64
}

/// Ratio of the second-term coefficient of [`thm1`] to the `p = 1` term
/// coefficient of [`cheng_qi_wei`]: it equals `n(n+2l)/2`, and the returned
/// value is cross-checked against the actual coefficients.
pub fn remark1_ratio(n: usize, l: u32) -> f64 {
    let nf = n as f64;
    let lf = l as f64;
    let formula = nf * (nf + 2.0 * lf) / 2.0;
    // thm1 second coefficient: n l / 48; p=1 coefficient: l / (24 (n + 2l))
    let direct = (nf * lf / 48.0) / (lf / (24.0 * (nf + 2.0 * lf)));
    assert!(
        (direct - formula).abs() <= 1e-12 * formula,
        "coefficient ratio drifted: {direct} vs {formula}"
    );
    formula
}
