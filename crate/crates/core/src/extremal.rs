//! Extremal trapezoid profiles and the certified eigenvalue-sum bounds they
//! generate.
//!
//! Among decreasing absolutely continuous profiles `F` with `0 <= F <= M`,
//! `0 <= -F' <= L` and a prescribed `b`-moment, the trapezoid
//!
//! ```text
//! Ψ_s(r) = M              on [0, s]
//!        = M - L (r - s)  on [s, s + M/L]
//!        = 0              beyond
//! ```
//!
//! minimizes every higher moment `∫ r^d F dr` (`d >= b`). Applied with
//! `M = (2π)^{-n} V`, `L = 2 (2π)^{-n} sqrt(V I)` and the `(n-1)`-moment
//! pinned to `k/(n ω_n)`, this turns into certified lower bounds on the sum
//! of the first `k` Dirichlet eigenvalues. The plateau is determined by the
//! normalized knee `t = Ls/M`, the nonnegative root of
//! `(t+1)^{n+1} - t^{n+1} = k_*` with
//! `k_* = k (n+1) L^n / (ω_n M^{n+1})`.
//!
//! Everything here is a pure function; the randomized minimality suite takes
//! an explicit seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

use crate::bounds::{alpha_n, BoundId, BoundResult, Term};
use crate::dd::{self, unit_ball_volume_dd, Dd};
use crate::error::{Error, Result};
use crate::geometry::unit_ball_volume;

/// Stable evaluation of `(t+1)^p - t^p` as the positive binomial sum
/// `Σ_{j<p} C(p,j) t^j`; no subtractive cancellation for large `t`.
pub fn binomial_diff(t: f64, p: u32) -> Result<f64> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "binomial_diff needs finite t >= 0, got {t}"
        )));
    }
    if !(1..=64).contains(&p) {
        return Err(Error::InvalidArgument(format!(
            "binomial_diff needs 1 <= p <= 64, got {p}"
        )));
    }
    // Horner from the top coefficient C(p, p-1) = p downwards;
    // C(p, j-1) = C(p, j) * j / (p - j + 1).
    let mut c = p as f64;
    let mut acc = c;
    for j in (1..p).rev() {
        c = c * j as f64 / (p - j + 1) as f64;
        acc = acc * t + c;
    }
    if !acc.is_finite() {
        return Err(Error::Overflow(format!(
            "(t+1)^{p} - t^{p} overflows f64 at t = {t}"
        )));
    }
    Ok(acc)
}

/// How a root of the binomial equation was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RootMethod {
    Numeric,
    Exact3,
    Exact4,
    Asymptotic,
}

impl RootMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            RootMethod::Numeric => "numeric",
            RootMethod::Exact3 => "exact3",
            RootMethod::Exact4 => "exact4",
            RootMethod::Asymptotic => "asymptotic",
        }
    }
}

/// A solution of `(t+1)^{n+1} - t^{n+1} = k_*`.
#[derive(Debug, Clone, PartialEq)]
pub struct RootSolution {
    pub n: usize,
    pub k_star: f64,
    /// The nonnegative root `t`.
    pub knee: f64,
    pub method: RootMethod,
    /// `(t+1)^{n+1} - t^{n+1} - k_*` at the returned root.
    pub residual: f64,
}

/// Bracketed, safeguarded Newton iteration for `(t+1)^p - t^p = rhs`.
///
/// The map is strictly increasing, and the mean-value identity
/// `(t+1)^p - t^p = p ξ^{p-1}` with `ξ ∈ (t, t+1)` puts the root inside
/// `[ζ-1, ζ]` for `ζ = (rhs/p)^{1/(p-1)}`. Returns the root and the final
/// residual.
pub(crate) fn solve_binomial_root(p: u32, rhs: f64) -> Result<(f64, f64)> {
    if p < 2 {
        return Err(Error::InvalidArgument("binomial root needs p >= 2".into()));
    }
    if !(rhs.is_finite() && rhs >= 1.0) {
        return Err(Error::OutOfRange(format!(
            "right-hand side {rhs} < 1: the nonnegative root does not exist"
        )));
    }
    if rhs == 1.0 {
        return Ok((0.0, 0.0));
    }
    let zeta = (rhs / p as f64).powf(1.0 / (p as f64 - 1.0));
    let mut lo = (zeta - 1.0).max(0.0);
    let mut hi = zeta;
    // guard the bracket against rounding at the endpoints
    while binomial_diff(hi, p)? < rhs {
        hi += (hi * 1e-12).max(1e-12);
    }
    if binomial_diff(lo, p)? > rhs {
        lo = 0.0;
    }
    let mut t = (zeta - 0.5).clamp(lo, hi);
    let tol = 1e-12 * rhs;
    let mut f = binomial_diff(t, p)? - rhs;
    for _ in 0..80 {
        if f.abs() <= tol {
            break;
        }
        if f > 0.0 {
            hi = t;
        } else {
            lo = t;
        }
        let df = p as f64 * binomial_diff(t, p - 1)?;
        let mut next = t - f / df;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (hi - lo) <= f64::EPSILON * hi.max(1.0) {
            break;
        }
        t = next;
        f = binomial_diff(t, p)? - rhs;
    }
    let residual = binomial_diff(t, p)? - rhs;
    if residual.abs() > 1e-9 * rhs.max(1.0) {
        return Err(Error::NumericalBreakdown(format!(
            "binomial root iteration stalled at residual {residual}"
        )));
    }
    Ok((t, residual))
}

/// Truncated large-argument expansion of the root of
/// `(η+1/2)^{n+1} - (η-1/2)^{n+1} = k_*` (so `t = η - 1/2`):
/// `η = ζ - (n-1)/24 ζ^{-1} + (n-1)(n-3)(2n+1)/5760 ζ^{-3} + ...` with
/// `ζ = (k_*/(n+1))^{1/n}`.
pub fn eta_asymptotic(n: usize, k_star: f64, terms: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidArgument("dimension must be >= 2".into()));
    }
    if !(1..=3).contains(&terms) {
        return Err(Error::InvalidArgument(format!(
            "expansion supports 1..=3 terms, got {terms}"
        )));
    }
    let nf = n as f64;
    let zeta = (k_star / (nf + 1.0)).powf(1.0 / nf);
    if !(zeta >= 1.0) {
        return Err(Error::OutOfRange(format!(
            "expansion needs zeta >= 1, got zeta = {zeta}"
        )));
    }
    let mut eta = zeta;
    if terms >= 2 {
        eta -= (nf - 1.0) / 24.0 / zeta;
    }
    if terms >= 3 {
        eta += (nf - 1.0) * (nf - 3.0) * (2.0 * nf + 1.0) / 5760.0 / zeta.powi(3);
    }
    Ok(eta)
}

/// Solves `(t+1)^{n+1} - t^{n+1} = k_star` by the requested method.
///
/// `Exact3`/`Exact4` use the closed-form radicals available in dimensions 3
/// and 4; `Asymptotic` uses the 3-term expansion.
pub fn solve_t(n: usize, k_star: f64, method: RootMethod) -> Result<RootSolution> {
    if n < 2 || n + 1 > 64 {
        return Err(Error::InvalidArgument(format!("dimension {n} unsupported")));
    }
    if !(k_star.is_finite() && k_star >= 1.0) {
        return Err(Error::OutOfRange(format!(
            "k_star = {k_star} < 1: the root would be negative"
        )));
    }
    let p = (n + 1) as u32;
    let knee = match method {
        RootMethod::Numeric => solve_binomial_root(p, k_star)?.0,
        RootMethod::Exact3 => {
            if n != 3 {
                return Err(Error::InvalidArgument(format!(
                    "exact3 requires n = 3, got n = {n}"
                )));
            }
            // t = (ρ - ϱ)/2 - 1/2 with ρϱ = 1/3; ϱ computed from ρ to avoid
            // cancellation at large k_star.
            let hyp = (k_star * k_star + 1.0 / 27.0).sqrt();
            let rho = (k_star + hyp).cbrt();
            let rho_bar = 1.0 / (3.0 * rho);
            (0.5 * (rho - rho_bar) - 0.5).max(0.0)
        }
        RootMethod::Exact4 => {
            if n != 4 {
                return Err(Error::InvalidArgument(format!(
                    "exact4 requires n = 4, got n = {n}"
                )));
            }
            let theta = ((20.0 * k_star + 5.0).sqrt() / 10.0 - 0.25).sqrt();
            (theta - 0.5).max(0.0)
        }
        RootMethod::Asymptotic => (eta_asymptotic(n, k_star, 3)? - 0.5).max(0.0),
    };
    let residual = binomial_diff(knee, p)? - k_star;
    Ok(RootSolution { n, k_star, knee, method, residual })
}

/// The extremal trapezoid for one eigenvalue problem.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtremalProfile {
    pub dim: usize,
    /// Plateau height `M = (2π)^{-n} V`.
    pub plateau_height: f64,
    /// Slope magnitude `L = 2 (2π)^{-n} sqrt(V I)`.
    pub slope: f64,
    /// Plateau radius `s = t M / L`.
    pub plateau_radius: f64,
    /// Normalized knee `t = L s / M`.
    pub knee: f64,
    /// Prescribed `(n-1)`-moment `k/(n ω_n)`.
    pub prescribed_moment: f64,
}

/// Builds the extremal profile whose `(n-1)`-moment equals `k/(n ω_n)`.
/// The profile depends only on the dimension and the two invariants; the
/// operator order enters later through which moment is read off.
pub fn profile_for(n: usize, volume: f64, inertia: f64, k: u64) -> Result<ExtremalProfile> {
    if n < 2 {
        return Err(Error::InvalidArgument("dimension must be >= 2".into()));
    }
    if !(volume.is_finite() && volume > 0.0 && inertia.is_finite() && inertia > 0.0) {
        return Err(Error::InvalidArgument(
            "volume and inertia must be finite and > 0".into(),
        ));
    }
    if k < 1 {
        return Err(Error::InvalidArgument("k must be >= 1".into()));
    }
    let omega = unit_ball_volume(n)?;
    let two_pi_n = (2.0 * PI).powi(n as i32);
    let plateau_height = volume / two_pi_n;
    let slope = 2.0 * (volume * inertia).sqrt() / two_pi_n;
    let ratio = slope / plateau_height; // 2 sqrt(I/V)
    let k_star = k as f64 * (n as f64 + 1.0) * ratio.powi(n as i32) * two_pi_n / (omega * volume);
    let (knee, _residual) = solve_binomial_root((n + 1) as u32, k_star)?;
    Ok(ExtremalProfile {
        dim: n,
        plateau_height,
        slope,
        plateau_radius: knee * plateau_height / slope,
        knee,
        prescribed_moment: k as f64 / (n as f64 * omega),
    })
}

impl ExtremalProfile {
    /// Normalized count parameter `k_* = (t+1)^{n+1} - t^{n+1}`.
    pub fn k_star(&self) -> f64 {
        binomial_diff(self.knee, (self.dim + 1) as u32).expect("knee is finite")
    }
}

/// `∫_0^∞ r^d Ψ_s(r) dr = M^{d+2} / ((d+1)(d+2) L^{d+1}) ·
/// [(t+1)^{d+2} - t^{d+2}]`.
pub fn psi_moment(profile: &ExtremalProfile, d: u32) -> Result<f64> {
    trapezoid_moment(profile.plateau_height, profile.slope, profile.knee, d)
}

/// Same closed form for a free-standing trapezoid with caps `(M, L)` and
/// normalized knee `t`.
pub fn trapezoid_moment(height: f64, slope: f64, knee: f64, d: u32) -> Result<f64> {
    if d > 62 {
        return Err(Error::InvalidArgument("moment order d > 62 unsupported".into()));
    }
    let p = d + 2;
    let df = d as f64;
    Ok(height * (height / slope).powi(d as i32 + 1) / ((df + 1.0) * (df + 2.0))
        * binomial_diff(knee, p)?)
}

/// Certified lower bound on the mean of the first `k` eigenvalues of the
/// order-`l` problem: `(1/k) n ω_n ∫ r^{n+2l-1} Ψ_s dr`.
pub fn rigorous_sum_bound(n: usize, l: u32, volume: f64, inertia: f64, k: u64) -> Result<BoundResult> {
    if l < 1 {
        return Err(Error::InvalidArgument("order l must be >= 1".into()));
    }
    let profile = profile_for(n, volume, inertia, k)?;
    let omega = unit_ball_volume(n)?;
    let d = (n as u32) + 2 * l - 1;
    let mean = n as f64 * omega * psi_moment(&profile, d)? / k as f64;
    Ok(BoundResult::new(
        BoundId::Rigorous,
        k,
        vec![Term::new("profile_moment", mean)],
        &format!("certified trapezoid-profile bound, l={l}"),
        true,
    ))
}

/// Certified lower bound for the quadratic operator `Δ² - aΔ`:
/// `(1/k) n ω_n [ ∫ r^{n+3} Ψ_s dr + a ∫ r^{n+1} Ψ_s dr ]` with a single
/// profile.
pub fn rigorous_quad_bound(n: usize, volume: f64, inertia: f64, a: f64, k: u64) -> Result<BoundResult> {
    if !(a.is_finite() && a >= 0.0) {
        return Err(Error::InvalidArgument("coefficient a must be finite and >= 0".into()));
    }
    let profile = profile_for(n, volume, inertia, k)?;
    let omega = unit_ball_volume(n)?;
    let scale = n as f64 * omega / k as f64;
    let bilap = scale * psi_moment(&profile, n as u32 + 3)?;
    let lap = a * scale * psi_moment(&profile, n as u32 + 1)?;
    Ok(BoundResult::new(
        BoundId::RigorousQuad,
        k,
        vec![
            Term::new("profile_moment_bilap", bilap),
            Term::new("profile_moment_lap_a", lap),
        ],
        "certified trapezoid-profile bound, quadratic operator",
        true,
    ))
}

/// Effective ε making the two-term form coincide with the certified profile
/// bound: `ε = 1 - (rigorous_mean - weyl_term) / second_term`.
///
/// Diagnostic only. Evaluated in double-double arithmetic throughout: the
/// numerator is the difference of two nearly equal bounds, and for
/// `k ≳ 10^4` its true value sits below the f64 roundoff of the operands.
/// May be negative at small `k`; reported signed.
pub fn epsilon_effective(n: usize, l: u32, volume: f64, inertia: f64, k: u64) -> Result<f64> {
    if inertia.is_infinite() {
        return Err(Error::NotApplicable(
            "infinite inertia: the correction term vanishes".into(),
        ));
    }
    if l < 1 {
        return Err(Error::InvalidArgument("order l must be >= 1".into()));
    }
    if n < 2 || n as u32 + 2 * l + 1 > 64 {
        return Err(Error::InvalidArgument("dimension/order out of range".into()));
    }
    if !(volume > 0.0 && inertia > 0.0 && volume.is_finite()) {
        return Err(Error::InvalidArgument("volume and inertia must be finite and > 0".into()));
    }
    let p = n as u32 + 2 * l + 1; // moment polynomial order, = d + 2
    let omega = unit_ball_volume_dd(n);
    let two_pi_n = Dd::TWO_PI.powi(n as u32);
    let v = Dd::from_f64(volume);
    let i = Dd::from_f64(inertia);
    let height = v / two_pi_n;
    let slope = (v * i).sqrt() * 2.0 / two_pi_n;
    let k_star = Dd::from_f64(k as f64) * (n as f64 + 1.0) * (slope / height).powi(n as u32)
        * two_pi_n
        / (omega * v);
    if k_star.hi < 1.0 {
        return Err(Error::OutOfRange(format!(
            "k_star = {} < 1: no extremal profile",
            k_star.hi
        )));
    }
    let seed = solve_binomial_root((n + 1) as u32, k_star.to_f64())?.0;
    let knee = dd::refine_binomial_root((n + 1) as u32, k_star, seed);

    // mean bound = pref * [(t+1)^p - t^p],  weyl = pref * p ζ^{p-1},
    // second term (ε = 0) = pref * p * l(p-1)/12 * ζ^{p-3}; the shared
    // prefactor cancels in the ratio defining ε. Integer numerators are
    // exact in f64; divisions stay in dd.
    let pf = p as f64;
    let zeta = (k_star / (n as f64 + 1.0)).nth_root(n as u32);
    let binom = binomial_diff_dd_checked(knee, p)?;
    let excess = binom - zeta.powi(p - 1) * pf;
    let second = zeta.powi(p - 3) * (pf * l as f64 * (pf - 1.0)) / 12.0;
    let eps = Dd::ONE - excess / second;
    Ok(eps.to_f64())
}

fn binomial_diff_dd_checked(t: Dd, p: u32) -> Result<Dd> {
    if !t.hi.is_finite() || t.hi < 0.0 {
        return Err(Error::NumericalBreakdown("dd root left the domain".into()));
    }
    Ok(dd::binomial_diff_dd(t, p))
}

/// Validity threshold of the dimension-3 polynomial lower bounds:
/// `432 sqrt(15) π / 25 ≈ 210.25`, the smallest `k_*` any admissible
/// 3-dimensional geometry can produce at `k = 1`.
pub fn n3_threshold() -> f64 {
    432.0 * 15f64.sqrt() * PI / 25.0
}

/// Validity threshold of the dimension-4 polynomial lower bounds:
/// `5 · 2^12 / 9 ≈ 2275.56`.
pub fn n4_threshold() -> f64 {
    5.0 * 4096.0 / 9.0
}

/// `(t+1)^8 - t^8` at the exact dimension-3 root, with its two polynomial
/// lower bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct N3PolyLower {
    /// Exact value via the binomial sum.
    pub exact: f64,
    /// `2^{1/3}/4 k^{7/3} + 7·2^{2/3}/12 k^{5/3} - 7/24 k`.
    pub three_term: f64,
    /// `2^{1/3}/4 k^{7/3} + 7·2^{2/3}/12 α_3 k^{5/3}` with `α_3 = 0.991`.
    pub alpha_weighted: f64,
}

pub fn n3_poly_lower(k_star: f64) -> Result<N3PolyLower> {
    let threshold = n3_threshold();
    if !(k_star >= threshold) {
        return Err(Error::BelowThreshold { k_star, threshold });
    }
    let root = solve_t(3, k_star, RootMethod::Exact3)?;
    let exact = binomial_diff(root.knee, 8)?;
    let c1 = 2f64.cbrt() / 4.0;
    let c2 = 7.0 * 4f64.cbrt() / 12.0;
    let kq = k_star.cbrt();
    let k73 = kq.powi(7);
    let k53 = kq.powi(5);
    Ok(N3PolyLower {
        exact,
        three_term: c1 * k73 + c2 * k53 - 7.0 / 24.0 * k_star,
        alpha_weighted: c1 * k73 + c2 * alpha_n(3)? * k53,
    })
}

/// `(t+1)^9 - t^9` at the exact dimension-4 root together with its closed
/// algebraic form; valid for every `k_star >= 1`.
pub fn n4_exact_closed(k_star: f64) -> Result<(f64, f64)> {
    if !(k_star >= 1.0) {
        return Err(Error::OutOfRange(format!("k_star = {k_star} < 1")));
    }
    let root = solve_t(4, k_star, RootMethod::Exact4)?;
    let exact = binomial_diff(root.knee, 9)?;
    let sq = (20.0 * k_star + 5.0).sqrt();
    let closed = 9.0 / 25.0 * k_star * k_star + 6.0 / 25.0 * k_star * sq - 18.0 / 25.0 * k_star
        + 3.0 / 50.0 * sq
        - 7.0 / 50.0;
    Ok((exact, closed))
}

/// Dimension-4 analogue of [`n3_poly_lower`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct N4PolyLower {
    pub exact: f64,
    /// Closed algebraic form of `exact`.
    pub closed: f64,
    /// `9/25 k² + 12√5/25 k^{3/2} - 18/25 k`.
    pub three_term: f64,
    /// `9/25 k² + 12√5/25 α_4 k^{3/2}` with `α_4 = 0.985`.
    pub alpha_weighted: f64,
}

pub fn n4_poly_lower(k_star: f64) -> Result<N4PolyLower> {
    let threshold = n4_threshold();
    if !(k_star >= threshold) {
        return Err(Error::BelowThreshold { k_star, threshold });
    }
    let (exact, closed) = n4_exact_closed(k_star)?;
    let c = 12.0 * 5f64.sqrt() / 25.0;
    let k32 = k_star * k_star.sqrt();
    Ok(N4PolyLower {
        exact,
        closed,
        three_term: 9.0 / 25.0 * k_star * k_star + c * k32 - 18.0 / 25.0 * k_star,
        alpha_weighted: 9.0 / 25.0 * k_star * k_star + c * alpha_n(4)? * k32,
    })
}

/// A sampled decreasing piecewise-linear profile with recorded caps. Heights
/// stay in `[0, height_cap]`, difference quotients in `[-slope_cap, 0]`, and
/// the last knot has height zero.
#[derive(Debug, Clone, PartialEq)]
pub struct FeasibleProfile {
    knots: Vec<(f64, f64)>,
    pub height_cap: f64,
    pub slope_cap: f64,
}

impl FeasibleProfile {
    /// The trapezoid member of the family: plateau at the cap up to
    /// `plateau_radius`, then the maximal downward ramp.
    pub fn trapezoid(height_cap: f64, slope_cap: f64, plateau_radius: f64) -> Result<Self> {
        if !(height_cap > 0.0 && slope_cap > 0.0 && plateau_radius >= 0.0) {
            return Err(Error::InvalidArgument("caps must be positive, radius >= 0".into()));
        }
        let mut knots = vec![(0.0, height_cap)];
        if plateau_radius > 0.0 {
            knots.push((plateau_radius, height_cap));
        }
        knots.push((plateau_radius + height_cap / slope_cap, 0.0));
        Ok(Self { knots, height_cap, slope_cap })
    }

    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    pub fn max_slope(&self) -> f64 {
        self.knots
            .windows(2)
            .map(|w| ((w[1].1 - w[0].1) / (w[1].0 - w[0].0)).abs())
            .fold(0.0, f64::max)
    }

    pub fn is_feasible(&self, tol: f64) -> bool {
        let heights_ok = self.knots.iter().all(|&(_, h)| {
            (-tol * self.height_cap..=self.height_cap * (1.0 + tol)).contains(&h)
        });
        let decreasing = self.knots.windows(2).all(|w| w[1].1 <= w[0].1 && w[1].0 > w[0].0);
        let slopes_ok = self.max_slope() <= self.slope_cap * (1.0 + tol);
        let ends_at_zero = self.knots.last().map(|&(_, h)| h == 0.0).unwrap_or(false);
        heights_ok && decreasing && slopes_ok && ends_at_zero
    }

    /// `∫ r^d F dr`, exact per linear segment.
    pub fn moment(&self, d: u32) -> f64 {
        let df = d as f64;
        self.knots
            .windows(2)
            .map(|w| {
                let (r0, h0) = w[0];
                let (r1, h1) = w[1];
                let beta = (h1 - h0) / (r1 - r0);
                let alpha = h0 - beta * r0;
                alpha * (r1.powi(d as i32 + 1) - r0.powi(d as i32 + 1)) / (df + 1.0)
                    + beta * (r1.powi(d as i32 + 2) - r0.powi(d as i32 + 2)) / (df + 2.0)
            })
            .sum()
    }

    /// `F(r/c)`: moments scale by `c^{d+1}`, difference quotients by `1/c`.
    pub fn scale_radius(&self, c: f64) -> Self {
        Self {
            knots: self.knots.iter().map(|&(r, h)| (c * r, h)).collect(),
            height_cap: self.height_cap,
            slope_cap: self.slope_cap,
        }
    }

    fn random(rng: &mut ChaCha8Rng, height_cap: f64, slope_cap: f64) -> Self {
        let scale = height_cap / slope_cap; // natural radial scale of the family
        let mut h = if rng.gen_bool(0.5) {
            height_cap
        } else {
            height_cap * rng.gen_range(0.1..1.0)
        };
        let mut r = 0.0;
        let mut knots = vec![(r, h)];
        if rng.gen_bool(0.3) {
            r += rng.gen_range(0.1..1.5) * scale;
            knots.push((r, h));
        }
        let segments = rng.gen_range(2..=20);
        for _ in 0..segments {
            let width = rng.gen_range(0.05..1.5) * scale;
            let g = match rng.gen_range(0..10) {
                0 | 1 => 0.0,
                2 | 3 => -slope_cap,
                _ => -slope_cap * rng.gen_range(0.0..1.0),
            };
            if g == 0.0 {
                r += width;
                knots.push((r, h));
                continue;
            }
            let next = h + g * width;
            if next <= 0.0 {
                r += h / -g;
                knots.push((r, 0.0));
                h = 0.0;
                break;
            }
            r += width;
            h = next;
            knots.push((r, h));
        }
        if h > 0.0 {
            r += h / slope_cap;
            knots.push((r, 0.0));
        }
        Self { knots, height_cap, slope_cap }
    }
}

/// Outcome of the randomized minimality check.
#[derive(Debug, Clone, PartialEq)]
pub struct MinimalityReport {
    pub trials: usize,
    /// Trials whose radius rescaling broke the slope cap and were redrawn.
    pub rejected_rescales: usize,
    pub violations: usize,
    /// Smallest observed `∫r^d F - ∫r^d Ψ_s` over all accepted trials.
    pub min_slack: f64,
    /// `∫ r^d Ψ_s dr` of the reference trapezoid.
    pub reference_moment: f64,
}

/// Randomized check that the trapezoid minimizes the `d`-moment among
/// feasible profiles sharing its `b`-moment.
///
/// Draws random feasible profiles, rescales each in radius (closed form:
/// `c = (m_star / m_b)^{1/(b+1)}`) so its `b`-moment matches `m_star`,
/// rejects rescales that break the slope cap, and verifies
/// `∫ r^d F >= ∫ r^d Ψ_s - 1e-9` for every accepted trial.
pub fn lemma1_minimality(
    height_cap: f64,
    slope_cap: f64,
    b: u32,
    d: u32,
    m_star: f64,
    trial_count: usize,
    seed: u64,
) -> Result<MinimalityReport> {
    if !(height_cap > 0.0 && slope_cap > 0.0 && height_cap.is_finite() && slope_cap.is_finite()) {
        return Err(Error::InvalidArgument("caps must be finite and > 0".into()));
    }
    if d < b || d > 62 {
        return Err(Error::InvalidArgument(format!(
            "need b <= d <= 62, got b={b}, d={d}"
        )));
    }
    if !(m_star.is_finite() && m_star > 0.0) {
        return Err(Error::InvalidArgument("m_star must be finite and > 0".into()));
    }
    // knee of the trapezoid matching the b-moment
    let min_moment = trapezoid_moment(height_cap, slope_cap, 0.0, b)?;
    let q = m_star / min_moment;
    if q < 1.0 {
        return Err(Error::InfeasibleMoment(format!(
            "m_star = {m_star} is below the moment {min_moment} of the full-slope triangle"
        )));
    }
    let (knee, _) = solve_binomial_root(b + 2, q)?;
    let reference_moment = trapezoid_moment(height_cap, slope_cap, knee, d)?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut accepted = 0;
    let mut rejected = 0;
    let mut violations = 0;
    let mut min_slack = f64::INFINITY;
    let attempt_cap = trial_count.saturating_mul(100);
    let mut attempts = 0;
    while accepted < trial_count {
        attempts += 1;
        if attempts > attempt_cap {
            return Err(Error::NumericalBreakdown(
                "rejection rate too high while sampling feasible profiles".into(),
            ));
        }
        let profile = FeasibleProfile::random(&mut rng, height_cap, slope_cap);
        let mb = profile.moment(b);
        if !(mb > 0.0 && mb.is_finite()) {
            rejected += 1;
            continue;
        }
        let c = (m_star / mb).powf(1.0 / (b as f64 + 1.0));
        // shrinking the radius steepens every segment; re-check the cap
        if profile.max_slope() / c > slope_cap * (1.0 + 1e-12) {
            rejected += 1;
            continue;
        }
        let scaled = profile.scale_radius(c);
        debug_assert!(scaled.is_feasible(1e-9));
        let slack = scaled.moment(d) - reference_moment;
        min_slack = min_slack.min(slack);
        if slack < -(1e-9 + 1e-12 * reference_moment.abs()) {
            violations += 1;
        }
        accepted += 1;
    }
    Ok(MinimalityReport {
        trials: accepted,
        rejected_rescales: rejected,
        violations,
        min_slack,
        reference_moment,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::{levine_protter, melas, Operator, ProblemSpec};
    use approx::assert_relative_eq;

    #[test]
    fn binomial_diff_basics() {
        for p in [1u32, 3, 7, 20] {
            assert_relative_eq!(binomial_diff(0.0, p).unwrap(), 1.0);
        }
        assert_relative_eq!(binomial_diff(1.0, 4).unwrap(), 15.0);
        // large-t oracle: 5t^4 + 10t^3 + 10t^2 + 5t + 1 exactly, via integers
        let t: f64 = 1e6;
        let exact = 5.0 * t.powi(4) + 10.0 * t.powi(3) + 10.0 * t.powi(2) + 5.0 * t + 1.0;
        assert_relative_eq!(binomial_diff(t, 5).unwrap(), exact, max_relative = 1e-15);
        assert!(binomial_diff(-1.0, 3).is_err());
        assert!(binomial_diff(1.0, 0).is_err());
        assert!(binomial_diff(1.0, 65).is_err());
        assert!(matches!(binomial_diff(1e300, 5), Err(Error::Overflow(_))));
    }

    #[test]
    fn binomial_diff_matches_direct_form() {
        // below t ~ 1e3 the direct difference only loses a few digits
        for p in [2u32, 3, 5, 9] {
            for &t in &[0.0f64, 0.3, 1.0, 17.5, 400.0, 1e3] {
                let direct = (t + 1.0).powi(p as i32) - t.powi(p as i32);
                assert_relative_eq!(
                    binomial_diff(t, p).unwrap(),
                    direct,
                    max_relative = 1e-12
                );
            }
        }
    }

    #[test]
    fn solve_t_trivial_roots() {
        for (n, method) in [
            (3usize, RootMethod::Numeric),
            (3, RootMethod::Exact3),
            (4, RootMethod::Numeric),
            (4, RootMethod::Exact4),
        ] {
            let r = solve_t(n, 1.0, method).unwrap();
            assert!(r.knee.abs() < 1e-12, "n={n} {:?} knee={}", method, r.knee);
        }
        // theta(1) = 1/2 exactly for the dimension-4 radical
        let theta = ((20.0f64 + 5.0).sqrt() / 10.0 - 0.25).sqrt();
        assert_eq!(theta, 0.5);
    }

    #[test]
    fn solve_t_quadratic_oracle_n2() {
        // 3t^2 + 3t + 1 = 7 gives t = 1
        let r = solve_t(2, 7.0, RootMethod::Numeric).unwrap();
        assert_relative_eq!(r.knee, 1.0, max_relative = 1e-12);
        // general n=2 oracle: t = (sqrt(12 k - 3) - 3) / 6
        for k in [1.5, 10.0, 1e4, 1e8] {
            let r = solve_t(2, k, RootMethod::Numeric).unwrap();
            let oracle = ((12.0 * k - 3.0).sqrt() - 3.0) / 6.0;
            assert_relative_eq!(r.knee, oracle, max_relative = 1e-11);
        }
    }

    #[test]
    fn solve_t_errors() {
        assert!(matches!(solve_t(3, 0.5, RootMethod::Numeric), Err(Error::OutOfRange(_))));
        assert!(solve_t(2, 10.0, RootMethod::Exact3).is_err());
        assert!(solve_t(3, 10.0, RootMethod::Exact4).is_err());
    }

    #[test]
    fn exact_vs_numeric_agreement() {
        let mut k = 1.0;
        while k <= 1e10 {
            for (n, method) in [(3usize, RootMethod::Exact3), (4, RootMethod::Exact4)] {
                let e = solve_t(n, k, method).unwrap();
                let m = solve_t(n, k, RootMethod::Numeric).unwrap();
                assert!(
                    (e.knee - m.knee).abs() <= 1e-10 * m.knee.max(1.0),
                    "n={n} k={k}: exact {} vs numeric {}",
                    e.knee,
                    m.knee
                );
                assert!(e.residual.abs() <= 1e-9 * k.max(1.0));
                assert!(m.residual.abs() <= 1e-9 * k.max(1.0));
            }
            k *= 10.0;
        }
    }

    #[test]
    fn eta_asymptotic_coefficients() {
        // the (n-3) factor kills the third coefficient at n = 3
        let k = 5000.0;
        assert_relative_eq!(
            eta_asymptotic(3, k, 2).unwrap(),
            eta_asymptotic(3, k, 3).unwrap()
        );
        // n=5 third coefficient is 88/5760
        let zeta = (k / 6.0).powf(0.2);
        let diff = eta_asymptotic(5, k, 3).unwrap() - eta_asymptotic(5, k, 2).unwrap();
        assert_relative_eq!(diff, 88.0 / 5760.0 / zeta.powi(3), max_relative = 1e-12);
        assert!(matches!(eta_asymptotic(2, 1.0, 3), Err(Error::OutOfRange(_))));
        assert!(eta_asymptotic(2, 1e4, 4).is_err());
    }

    #[test]
    fn asymptotic_error_shrinks_with_more_terms() {
        // reference via the closed quadratic root at n=2 (the numeric
        // solver's 1e-12 k_* residual tolerance is too loose here)
        let k: f64 = 1e4;
        let t_ref = ((12.0 * k - 3.0).sqrt() - 3.0) / 6.0;
        let errs: Vec<f64> = (1..=3)
            .map(|terms| (eta_asymptotic(2, k, terms).unwrap() - 0.5 - t_ref).abs())
            .collect();
        assert!(errs[1] < errs[0] * 1e-3);
        assert!(errs[2] < errs[1] * 1e-2);
    }

    #[test]
    fn profile_unit_square() {
        let p = profile_for(2, 1.0, 1.0 / 6.0, 1).unwrap();
        let two_pi_sq = (2.0 * PI).powi(2);
        assert_relative_eq!(p.plateau_height, 1.0 / two_pi_sq, max_relative = 1e-14);
        assert_relative_eq!(
            p.slope,
            2.0 * (1.0f64 / 6.0).sqrt() / two_pi_sq,
            max_relative = 1e-14
        );
        // k_* = k (n+1) L^n / (ω_n M^{n+1}) = 8π for the unit square at k=1
        assert_relative_eq!(p.k_star(), 8.0 * PI, max_relative = 1e-11);
        // b-moment round trip
        assert_relative_eq!(
            psi_moment(&p, 1).unwrap(),
            p.prescribed_moment,
            max_relative = 1e-12
        );
    }

    #[test]
    fn moment_round_trip_many() {
        for n in 2..=5usize {
            for &(v, i) in &[(1.0, 1.0 / 6.0), (2.7, 1.9), (0.3, 0.02)] {
                for &k in &[1u64, 10, 1000, 1_000_000] {
                    let p = profile_for(n, v, i, k).unwrap();
                    assert_relative_eq!(
                        psi_moment(&p, n as u32 - 1).unwrap(),
                        p.prescribed_moment,
                        max_relative = 1e-12
                    );
                }
            }
        }
    }

    #[test]
    fn profile_scaling_invariance() {
        // dilation leaves t and k_* unchanged
        let p1 = profile_for(3, 1.0, 0.25, 42).unwrap();
        let c: f64 = 2.6;
        let p2 = profile_for(3, c.powi(3) * 1.0, c.powi(5) * 0.25, 42).unwrap();
        assert_relative_eq!(p1.knee, p2.knee, max_relative = 1e-12);
        assert_relative_eq!(p1.k_star(), p2.k_star(), max_relative = 1e-12);
    }

    #[test]
    fn knee_grows_like_zeta() {
        let mut prev_ratio = 0.0;
        for &k in &[100u64, 10_000, 1_000_000, 100_000_000] {
            let p = profile_for(2, 1.0, 1.0 / 6.0, k).unwrap();
            let zeta = (p.k_star() / 3.0).sqrt();
            let ratio = p.knee / zeta;
            assert!(ratio < 1.0);
            assert!(ratio > prev_ratio);
            prev_ratio = ratio;
        }
        assert!(prev_ratio > 0.999);
    }

    #[test]
    fn psi_moment_simple_shapes() {
        // unit triangle: s = 0, M = L = 1, d = 0 integrates to 1/2
        let tri = ExtremalProfile {
            dim: 2,
            plateau_height: 1.0,
            slope: 1.0,
            plateau_radius: 0.0,
            knee: 0.0,
            prescribed_moment: 0.0,
        };
        assert_relative_eq!(psi_moment(&tri, 0).unwrap(), 0.5);
        // plateau of radius 1 plus the ramp: area 3/2
        let trap = ExtremalProfile { plateau_radius: 1.0, knee: 1.0, ..tri };
        assert_relative_eq!(psi_moment(&trap, 0).unwrap(), 1.5);
    }

    #[test]
    fn psi_moment_matches_gauss_quadrature() {
        // 5-point Gauss-Legendre per linear piece is exact through degree 9
        let gl_nodes = [
            -0.906179845938664,
            -0.5384693101056831,
            0.0,
            0.5384693101056831,
            0.906179845938664,
        ];
        let gl_weights = [
            0.23692688505618908,
            0.47862867049936647,
            0.5688888888888889,
            0.47862867049936647,
            0.23692688505618908,
        ];
        let p = profile_for(2, 1.3, 0.21, 57).unwrap();
        let (m, l, s) = (p.plateau_height, p.slope, p.plateau_radius);
        let value = |r: f64| {
            if r <= s {
                m
            } else {
                (m - l * (r - s)).max(0.0)
            }
        };
        for d in [0u32, 1, 3, 5, 8] {
            let mut total = 0.0;
            for (a, b) in [(0.0, s), (s, s + m / l)] {
                let (half, mid) = (0.5 * (b - a), 0.5 * (a + b));
                for (x, w) in gl_nodes.iter().zip(gl_weights) {
                    let r = mid + half * x;
                    total += w * half * r.powi(d as i32) * value(r);
                }
            }
            assert_relative_eq!(psi_moment(&p, d).unwrap(), total, max_relative = 1e-10);
        }
    }

    #[test]
    fn rigorous_bound_unit_square() {
        let b = rigorous_sum_bound(2, 1, 1.0, 1.0 / 6.0, 1).unwrap();
        assert!(b.certified);
        let spec = ProblemSpec::new(2, Operator::PolyLaplacian { order: 1 }, 1.0, 1.0 / 6.0)
            .unwrap();
        let melas_val = melas(&spec, 1).value;
        assert!(b.value > melas_val, "{} <= {}", b.value, melas_val);
        assert!(b.value <= 2.0 * PI + 0.0625 + 0.2);
    }

    #[test]
    fn rigorous_bound_flat_inertia_limit() {
        let spec = ProblemSpec::new(2, Operator::PolyLaplacian { order: 1 }, 1.0, 1e12).unwrap();
        let lp = levine_protter(&spec, 1, 5).unwrap().value;
        let rig = rigorous_sum_bound(2, 1, 1.0, 1e12, 5).unwrap().value;
        assert!(rig >= lp);
        assert_relative_eq!(rig, lp, max_relative = 1e-9);
    }

    #[test]
    fn rigorous_quad_reductions() {
        let (n, v, i) = (2usize, 1.0, 1.0 / 6.0);
        for k in [1u64, 10, 100] {
            let q0 = rigorous_quad_bound(n, v, i, 0.0, k).unwrap().value;
            let l2 = rigorous_sum_bound(n, 2, v, i, k).unwrap().value;
            assert_relative_eq!(q0, l2, max_relative = 1e-13);
            // affine in a
            let q1 = rigorous_quad_bound(n, v, i, 1.0, k).unwrap().value;
            let q7 = rigorous_quad_bound(n, v, i, 7.0, k).unwrap().value;
            assert_relative_eq!(q7 - q0, 7.0 * (q1 - q0), max_relative = 1e-11);
        }
    }

    #[test]
    fn epsilon_effective_n2_l1_closed_form() {
        // at n=2, l=1 the polynomial collapses and ε = 1/(5 k_*) exactly
        for &k in &[1u64, 10, 1000, 1_000_000] {
            let p = profile_for(2, 1.0, 1.0 / 6.0, k).unwrap();
            let eps = epsilon_effective(2, 1, 1.0, 1.0 / 6.0, k).unwrap();
            assert_relative_eq!(eps, 1.0 / (5.0 * p.k_star()), max_relative = 1e-9);
        }
    }

    #[test]
    fn epsilon_effective_errors() {
        assert!(matches!(
            epsilon_effective(2, 1, 1.0, f64::INFINITY, 10),
            Err(Error::NotApplicable(_))
        ));
    }

    #[test]
    fn n3_poly_lower_behaviour() {
        assert!(matches!(
            n3_poly_lower(100.0),
            Err(Error::BelowThreshold { .. })
        ));
        let r = n3_poly_lower(211.0).unwrap();
        assert!(r.exact >= r.three_term - 1e-9);
        assert!(r.exact >= r.alpha_weighted - 1e-9);
        assert!(r.alpha_weighted >= 0.0);
        let big = n3_poly_lower(1e6).unwrap();
        let gap = (big.exact - big.alpha_weighted) / big.exact;
        assert!(gap > 0.0 && gap < 1e-2);
    }

    #[test]
    fn n4_closed_identity() {
        let (exact, closed) = n4_exact_closed(1.0).unwrap();
        assert_relative_eq!(exact, 1.0, epsilon = 1e-12);
        assert_relative_eq!(closed, 1.0, epsilon = 1e-12);
        for &k in &[1.0, 3.7, 100.0, 2276.0, 1e7] {
            let (e, c) = n4_exact_closed(k).unwrap();
            assert_relative_eq!(e, c, max_relative = 1e-9);
        }
        assert!(n4_exact_closed(0.5).is_err());
        let r = n4_poly_lower(2276.0).unwrap();
        assert!(r.exact >= r.three_term - 1e-9);
        assert!(r.exact >= r.alpha_weighted - 1e-9);
        assert!(matches!(n4_poly_lower(100.0), Err(Error::BelowThreshold { .. })));
        // leading-order check at huge k_*
        let huge = n4_poly_lower(1e8).unwrap();
        assert_relative_eq!(huge.exact / (9.0 / 25.0 * 1e16), 1.0, max_relative = 1e-3);
    }

    #[test]
    fn feasible_profile_trapezoid_matches_formula() {
        let (m, l) = (0.8, 2.3);
        for &s in &[0.0, 0.4, 2.2] {
            let knee = l * s / m;
            let f = FeasibleProfile::trapezoid(m, l, s).unwrap();
            assert!(f.is_feasible(1e-12));
            for d in [0u32, 1, 3, 6] {
                assert_relative_eq!(
                    f.moment(d),
                    trapezoid_moment(m, l, knee, d).unwrap(),
                    max_relative = 1e-12
                );
            }
        }
    }

    #[test]
    fn lemma1_equality_case() {
        // F = Ψ_s itself: slack is zero up to rounding
        let (m, l, b, d) = (1.0, 1.0, 1u32, 3u32);
        let m_star = trapezoid_moment(m, l, 1.0, b).unwrap();
        let (knee, _) = solve_binomial_root(b + 2, m_star * 6.0 / (m * (m / l).powi(2))).unwrap();
        assert_relative_eq!(knee, 1.0, max_relative = 1e-12);
        let psi = FeasibleProfile::trapezoid(m, l, knee * m / l).unwrap();
        let slack = psi.moment(d) - trapezoid_moment(m, l, knee, d).unwrap();
        assert!(slack.abs() < 1e-12);
    }

    #[test]
    fn lemma1_randomized_small() {
        let m_star = trapezoid_moment(1.0, 1.0, 1.0, 1).unwrap();
        let report = lemma1_minimality(1.0, 1.0, 1, 3, m_star, 2000, 20260811).unwrap();
        assert_eq!(report.violations, 0, "min slack {}", report.min_slack);
        assert!(report.min_slack >= -1e-9);
        assert!(report.trials == 2000);
    }

    #[test]
    fn lemma1_infeasible_moment() {
        // below the full-slope triangle moment no trapezoid matches
        let min_moment = trapezoid_moment(1.0, 1.0, 0.0, 1).unwrap();
        assert!(matches!(
            lemma1_minimality(1.0, 1.0, 1, 3, 0.5 * min_moment, 10, 1),
            Err(Error::InfeasibleMoment(_))
        ));
    }

    #[test]
    fn lemma1_bathtub_member() {
        // trapezoid with a displaced knee is itself a family member
        let (m, l, d) = (1.0, 1.0, 3u32);
        let reference = trapezoid_moment(m, l, 2.0, d).unwrap();
        let other = FeasibleProfile::trapezoid(m, l, 2.0).unwrap();
        assert!(other.moment(d) >= reference - 1e-12);
    }
}
