//! True eigenvalue tables and bound verification.
//!
//! The rectangle Laplacian has the separable spectrum
//! `π² (p²/a² + q²/b²)`, enumerated exhaustively. The clamped plate and the
//! quadratic operator are discretized on 2-D boxes: the 13-point biharmonic
//! stencil encodes the clamped conditions by ghost reflection
//! (`u_{-1} = u_1`, i.e. zero normal derivative to second order), and the
//! quadratic operator adds `a` times the 5-point Laplacian on the same grid.
//! Per-eigenvalue Richardson extrapolation removes the leading O(h²)
//! discretization error.

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};
use std::f64::consts::PI;
use std::fmt::Write as _;

use crate::bounds::{BoundId, BoundResult};
use crate::error::{Error, Result};
use crate::geometry::{Domain, DomainKind};
use crate::linalg::{smallest_eigenvalues, SparseSymmetric};

/// Operator whose spectrum is tabulated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "operator", rename_all = "snake_case")]
pub enum OperatorKind {
    DirichletLaplacian,
    ClampedBilaplacian,
    Quadratic { a: f64 },
}

impl OperatorKind {
    pub fn validate(&self) -> Result<()> {
        if let OperatorKind::Quadratic { a } = self {
            if !(a.is_finite() && *a >= 0.0) {
                return Err(Error::InvalidArgument(
                    "quadratic coefficient must be finite and >= 0".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Where a table's eigenvalues came from.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum Provenance {
    Analytic,
    FiniteDifference {
        /// Cells per side for each grid used, coarse to fine.
        grids: Vec<u32>,
        extrapolated: bool,
        /// Observed convergence order per eigenvalue (needs >= 3 grids with
        /// one refinement ratio).
        observed_orders: Option<Vec<f64>>,
        /// Indices whose convergence was non-monotone or whose observed
        /// order fell outside [1.5, 2.5].
        flagged: Vec<usize>,
    },
}

/// Ascending eigenvalues of one operator with cumulative means.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumTable {
    pub operator: OperatorKind,
    pub domain: Domain,
    pub eigenvalues: Vec<f64>,
    /// `(1/k) Σ_{j<=k} λ_j` for `k = 1..=count`.
    pub cumulative_means: Vec<f64>,
    pub provenance: Provenance,
}

impl SpectrumTable {
    pub fn new(
        operator: OperatorKind,
        domain: Domain,
        eigenvalues: Vec<f64>,
        provenance: Provenance,
    ) -> Result<Self> {
        if eigenvalues.is_empty() {
            return Err(Error::InvalidArgument("empty eigenvalue list".into()));
        }
        let mut means = Vec::with_capacity(eigenvalues.len());
        let mut sum = 0.0;
        let mut prev = 0.0;
        for (i, &ev) in eigenvalues.iter().enumerate() {
            if !(ev > 0.0 && ev.is_finite()) {
                return Err(Error::NumericalBreakdown(format!(
                    "eigenvalue {i} is {ev}, expected positive"
                )));
            }
            if ev + 1e-9 * ev.abs() < prev {
                return Err(Error::NumericalBreakdown(format!(
                    "eigenvalues not ascending at index {i}: {prev} -> {ev}"
                )));
            }
            prev = ev;
            sum += ev;
            means.push(sum / (i + 1) as f64);
        }
        // means of an ascending sequence are nondecreasing
        debug_assert!(means.windows(2).all(|w| w[1] >= w[0] * (1.0 - 1e-14)));
        Ok(Self { operator, domain, eigenvalues, cumulative_means: means, provenance })
    }

    pub fn count(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Cumulative mean at 1-based index `k`.
    pub fn mean(&self, k: u64) -> Option<f64> {
        if k == 0 {
            return None;
        }
        self.cumulative_means.get(k as usize - 1).copied()
    }

    /// CSV with header `k,lambda_k,cumulative_mean`, floats at 17
    /// significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,lambda_k,cumulative_mean\n");
        for (i, (ev, mean)) in self.eigenvalues.iter().zip(&self.cumulative_means).enumerate() {
            let _ = writeln!(out, "{},{:.16e},{:.16e}", i + 1, ev, mean);
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "operator": self.operator,
            "count": self.count(),
            "eigenvalues": self.eigenvalues,
            "cumulative_means": self.cumulative_means,
            "provenance": self.provenance,
        })
    }
}

/// Exact spectrum of the Dirichlet Laplacian on an `a × b` rectangle:
/// the smallest `count` values of `π²(p²/a² + q²/b²)`, multiplicities
/// preserved. The enumeration cutoff is grown until provably exhaustive.
pub fn rectangle_laplacian(a_side: f64, b_side: f64, count: usize) -> Result<SpectrumTable> {
    if !(a_side > 0.0 && b_side > 0.0 && a_side.is_finite() && b_side.is_finite()) {
        return Err(Error::InvalidArgument("rectangle sides must be finite and > 0".into()));
    }
    if count < 1 {
        return Err(Error::InvalidArgument("count must be >= 1".into()));
    }
    // Weyl-law guess for the cutoff, grown geometrically until enough modes
    // lie at or below it; every mode <= cutoff is enumerated, so the final
    // sorted prefix is exact.
    let mut cutoff = 4.0 * PI * (count as f64 + 8.0) / (a_side * b_side)
        + PI * PI * (1.0 / (a_side * a_side) + 1.0 / (b_side * b_side));
    let mut values = Vec::new();
    loop {
        values.clear();
        let p_max = (a_side * cutoff.sqrt() / PI).ceil() as u64;
        for p in 1..=p_max {
            let px = PI * PI * (p * p) as f64 / (a_side * a_side);
            if px > cutoff {
                break;
            }
            let q_max = (b_side * ((cutoff - px).max(0.0)).sqrt() / PI).ceil() as u64;
            for q in 1..=q_max.max(1) {
                let v = px + PI * PI * (q * q) as f64 / (b_side * b_side);
                if v <= cutoff {
                    values.push(v);
                }
            }
        }
        if values.len() >= count {
            break;
        }
        cutoff *= 1.7;
    }
    values.sort_by(|x, y| x.partial_cmp(y).unwrap());
    values.truncate(count);
    SpectrumTable::new(
        OperatorKind::DirichletLaplacian,
        Domain::new_box(vec![a_side, b_side])?,
        values,
        Provenance::Analytic,
    )
}

fn box_sides_2d(domain: &Domain) -> Result<(f64, f64)> {
    match domain.kind() {
        DomainKind::Box { sides } if sides.len() == 2 => Ok((sides[0], sides[1])),
        _ => Err(Error::InvalidArgument(
            "finite-difference oracle requires a 2-D box domain".into(),
        )),
    }
}

/// 1-D stencil data for one direction: `nx` interior points, spacing `h`.
struct Direction {
    n: usize,
    h: f64,
}

/// Assembles the finite-difference matrix on a 2-D box with `grid` cells per
/// side (spacing `side/grid`, `(grid-1)²` interior unknowns):
/// 5-point Laplacian, 13-point clamped bilaplacian (ghost reflection
/// `u_{-1} = u_1`), or bilaplacian plus `a` times the Laplacian.
pub fn fd_matrix(domain: &Domain, grid: u32, operator: &OperatorKind) -> Result<SparseSymmetric> {
    operator.validate()?;
    let (a_side, b_side) = box_sides_2d(domain)?;
    if grid < 16 {
        return Err(Error::InvalidArgument(format!(
            "grid must be >= 16 cells per side, got {grid}"
        )));
    }
    let nx = Direction { n: grid as usize - 1, h: a_side / grid as f64 };
    let ny = Direction { n: grid as usize - 1, h: b_side / grid as f64 };
    match operator {
        OperatorKind::DirichletLaplacian => Ok(laplacian_2d(&nx, &ny)),
        OperatorKind::ClampedBilaplacian => Ok(biharmonic_2d(&nx, &ny)),
        OperatorKind::Quadratic { a } => {
            biharmonic_2d(&nx, &ny).add_scaled(&laplacian_2d(&nx, &ny), *a)
        }
    }
}

fn laplacian_2d(nx: &Direction, ny: &Direction) -> SparseSymmetric {
    let (cx, cy) = (1.0 / (nx.h * nx.h), 1.0 / (ny.h * ny.h));
    let order = nx.n * ny.n;
    let idx = |ix: usize, iy: usize| iy * nx.n + ix;
    let mut t = Vec::with_capacity(5 * order);
    for iy in 0..ny.n {
        for ix in 0..nx.n {
            let p = idx(ix, iy);
            t.push((p, p, 2.0 * cx + 2.0 * cy));
            if ix > 0 {
                t.push((p, idx(ix - 1, iy), -cx));
            }
            if ix + 1 < nx.n {
                t.push((p, idx(ix + 1, iy), -cx));
            }
            if iy > 0 {
                t.push((p, idx(ix, iy - 1), -cy));
            }
            if iy + 1 < ny.n {
                t.push((p, idx(ix, iy + 1), -cy));
            }
        }
    }
    SparseSymmetric::from_triplets(order, &t).expect("valid laplacian triplets")
}

/// Fourth-difference coefficient along one direction at interior offset
/// `di ∈ {-2..2}`; the first and last interior rows get the +1/h⁴ ghost
/// correction on their diagonal.
fn fourth_diff_row(dir: &Direction, i: usize, di: i64) -> f64 {
    let c = 1.0 / dir.h.powi(4);
    let stencil = match di {
        0 => {
            let mut v = 6.0;
            if i == 0 || i == dir.n - 1 {
                v += 1.0; // ghost reflection u_{-1} = u_1
            }
            v
        }
        1 | -1 => -4.0,
        2 | -2 => 1.0,
        _ => 0.0,
    };
    stencil * c
}

fn biharmonic_2d(nx: &Direction, ny: &Direction) -> SparseSymmetric {
    let order = nx.n * ny.n;
    let idx = |ix: usize, iy: usize| iy * nx.n + ix;
    let (cx, cy) = (1.0 / (nx.h * nx.h), 1.0 / (ny.h * ny.h));
    let mut t = Vec::with_capacity(13 * order);
    for iy in 0..ny.n {
        for ix in 0..nx.n {
            let p = idx(ix, iy);
            // ∂⁴x and ∂⁴y
            for di in -2i64..=2 {
                let jx = ix as i64 + di;
                if (0..nx.n as i64).contains(&jx) {
                    t.push((p, idx(jx as usize, iy), fourth_diff_row(nx, ix, di)));
                }
                let jy = iy as i64 + di;
                if (0..ny.n as i64).contains(&jy) {
                    t.push((p, idx(ix, jy as usize), fourth_diff_row(ny, iy, di)));
                }
            }
            // mixed term 2 ∂²x ∂²y: product of (-1, 2, -1)/h² stencils
            for dx in -1i64..=1 {
                let jx = ix as i64 + dx;
                if !(0..nx.n as i64).contains(&jx) {
                    continue;
                }
                let wx = if dx == 0 { 2.0 } else { -1.0 } * cx;
                for dy in -1i64..=1 {
                    let jy = iy as i64 + dy;
                    if !(0..ny.n as i64).contains(&jy) {
                        continue;
                    }
                    let wy = if dy == 0 { 2.0 } else { -1.0 } * cy;
                    t.push((p, idx(jx as usize, jy as usize), 2.0 * wx * wy));
                }
            }
        }
    }
    SparseSymmetric::from_triplets(order, &t).expect("valid biharmonic triplets")
}

/// Smallest `count` eigenvalues of an assembled FD matrix; dense for orders
/// up to the dispatcher cutoff, shift-invert block Lanczos above.
pub fn smallest_eigs(matrix: &SparseSymmetric, count: usize) -> Result<Vec<f64>> {
    smallest_eigenvalues(matrix, count)
}

/// Single-grid FD spectrum table (no extrapolation).
pub fn fd_spectrum(
    domain: &Domain,
    grid: u32,
    operator: &OperatorKind,
    count: usize,
) -> Result<SpectrumTable> {
    let matrix = fd_matrix(domain, grid, operator)?;
    let eigs = smallest_eigs(&matrix, count)?;
    SpectrumTable::new(
        *operator,
        domain.clone(),
        eigs,
        Provenance::FiniteDifference {
            grids: vec![grid],
            extrapolated: false,
            observed_orders: None,
            flagged: vec![],
        },
    )
}

/// Per-eigenvalue Richardson extrapolation over geometrically refined grids,
/// assuming the O(h²) leading error of the stencils.
///
/// With exactly two grids the order is taken as 2; with three or more grids
/// of a single refinement ratio the observed order is computed per
/// eigenvalue, and eigenvalues whose order leaves [1.5, 2.5] or whose
/// convergence is non-monotone are flagged (not fatal).
pub fn extrapolated_spectrum(
    domain: &Domain,
    operator: &OperatorKind,
    grids: &[u32],
    count: usize,
) -> Result<SpectrumTable> {
    if grids.len() < 2 {
        return Err(Error::InvalidArgument("need at least 2 grids".into()));
    }
    let mut grids = grids.to_vec();
    grids.sort_unstable();
    if grids.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidArgument("grids must be distinct".into()));
    }
    let tables: Vec<Vec<f64>> = grids
        .iter()
        .map(|&g| {
            let m = fd_matrix(domain, g, operator)?;
            smallest_eigs(&m, count)
        })
        .collect::<Result<_>>()?;
    let g = grids.len();
    // spacing ratio h_{G-1} / h_G = m_G / m_{G-1}
    let r = grids[g - 1] as f64 / grids[g - 2] as f64;
    let r2 = r * r;
    let fine = &tables[g - 1];
    let coarse = &tables[g - 2];
    let mut extrapolated: Vec<f64> = fine
        .iter()
        .zip(coarse)
        .map(|(f, c)| (r2 * f - c) / (r2 - 1.0))
        .collect();

    let mut flagged = Vec::new();
    let mut observed_orders = None;
    if g >= 3 {
        let ratio_prev = grids[g - 2] as f64 / grids[g - 3] as f64;
        if (ratio_prev - r).abs() <= 1e-9 * r {
            let mut orders = Vec::with_capacity(count);
            for i in 0..count {
                let (v1, v2, v3) = (tables[g - 3][i], tables[g - 2][i], tables[g - 1][i]);
                let (d12, d23) = (v2 - v1, v3 - v2);
                if d12 == 0.0 || d23 == 0.0 || (d12 / d23) <= 0.0 {
                    // non-monotone convergence
                    flagged.push(i);
                    orders.push(f64::NAN);
                    continue;
                }
                let p = (d12 / d23).ln() / r.ln();
                if !(1.5..=2.5).contains(&p) {
                    flagged.push(i);
                }
                orders.push(p);
            }
            observed_orders = Some(orders);
        }
    }
    // near-degenerate pairs may extrapolate marginally out of order
    extrapolated.sort_by(|a, b| a.partial_cmp(b).unwrap());
    SpectrumTable::new(
        *operator,
        domain.clone(),
        extrapolated,
        Provenance::FiniteDifference {
            grids,
            extrapolated: true,
            observed_orders,
            flagged,
        },
    )
}

/// One bound checked against one cumulative mean.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyEntry {
    pub id: BoundId,
    pub k: u64,
    pub bound: f64,
    pub mean: f64,
    /// `mean - bound (1 - slack)`; negative means violation.
    pub margin: f64,
    pub passed: bool,
}

/// Outcome of checking a set of bound evaluations against a spectrum table.
#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub entries: Vec<VerifyEntry>,
    pub slack: f64,
    /// Uncertified inputs (asymptotic displays) that were not checked.
    pub skipped_uncertified: Vec<(BoundId, u64)>,
    /// Inputs whose `k` exceeds the table.
    pub skipped_out_of_range: Vec<(BoundId, u64)>,
    /// Largest certified bound value seen at each `k`, ascending in `k`.
    pub tightest: Vec<(u64, BoundId, f64)>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| e.passed)
    }

    pub fn failures(&self) -> Vec<&VerifyEntry> {
        self.entries.iter().filter(|e| !e.passed).collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "slack": self.slack,
            "passed": self.passed(),
            "checked": self.entries.len(),
            "violations": self.failures().len(),
            "entries": self.entries,
            "skipped_uncertified": self
                .skipped_uncertified
                .iter()
                .map(|(id, k)| serde_json::json!({"id": id, "k": k}))
                .collect::<Vec<_>>(),
            "skipped_out_of_range": self
                .skipped_out_of_range
                .iter()
                .map(|(id, k)| serde_json::json!({"id": id, "k": k}))
                .collect::<Vec<_>>(),
            "tightest": self
                .tightest
                .iter()
                .map(|(k, id, v)| serde_json::json!({"k": k, "id": id, "bound": v}))
                .collect::<Vec<_>>(),
        })
    }
}

/// Checks `cumulative_mean(k) >= bound(k) · (1 - slack)` for every certified
/// bound result whose `k` lies within the table. Uncertified results
/// (asymptotic ε = 0 displays, the pointwise tiling bound) are skipped and
/// recorded.
pub fn verify(table: &SpectrumTable, bounds: &[BoundResult], slack: f64) -> VerificationReport {
    let mut entries = Vec::new();
    let mut skipped_uncertified = Vec::new();
    let mut skipped_out_of_range = Vec::new();
    let mut best: std::collections::BTreeMap<u64, (BoundId, f64)> = Default::default();
    for b in bounds {
        if !b.certified {
            skipped_uncertified.push((b.id, b.k));
            continue;
        }
        let mean = match table.mean(b.k) {
            Some(m) => m,
            None => {
                skipped_out_of_range.push((b.id, b.k));
                continue;
            }
        };
        let margin = mean - b.value * (1.0 - slack);
        entries.push(VerifyEntry {
            id: b.id,
            k: b.k,
            bound: b.value,
            mean,
            margin,
            passed: margin >= 0.0,
        });
        let e = best.entry(b.k).or_insert((b.id, f64::NEG_INFINITY));
        if b.value > e.1 {
            *e = (b.id, b.value);
        }
    }
    VerificationReport {
        entries,
        slack,
        skipped_uncertified,
        skipped_out_of_range,
        tightest: best.into_iter().map(|(k, (id, v))| (k, id, v)).collect(),
    }
}

// Serialized table shape: {operator, domain kind omitted, eigenvalues, ...}
impl Serialize for SpectrumTable {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("SpectrumTable", 4)?;
        s.serialize_field("operator", &self.operator)?;
        s.serialize_field("eigenvalues", &self.eigenvalues)?;
        s.serialize_field("cumulative_means", &self.cumulative_means)?;
        s.serialize_field("provenance", &self.provenance)?;
        s.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::{self, Operator, ProblemSpec};
    use approx::assert_relative_eq;

    fn unit_square() -> Domain {
        Domain::new_box(vec![1.0, 1.0]).unwrap()
    }

    /// Discrete closed-form spectrum of the 5-point Laplacian on a square
    /// grid: 4/h² [sin²(pπ/(2m)) + sin²(qπ/(2m))]. Test-only oracle.
    fn fd_laplacian_closed_form(grid: u32, count: usize) -> Vec<f64> {
        let m = grid as usize;
        let h = 1.0 / grid as f64;
        let mut v = Vec::new();
        for p in 1..m {
            for q in 1..m {
                let s = (p as f64 * PI / (2.0 * m as f64)).sin().powi(2)
                    + (q as f64 * PI / (2.0 * m as f64)).sin().powi(2);
                v.push(4.0 / (h * h) * s);
            }
        }
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v.truncate(count);
        v
    }

    #[test]
    fn rectangle_examples() {
        let t = rectangle_laplacian(1.0, 1.0, 3).unwrap();
        assert_relative_eq!(t.eigenvalues[0], 2.0 * PI * PI, max_relative = 1e-14);
        assert_relative_eq!(t.eigenvalues[1], 5.0 * PI * PI, max_relative = 1e-14);
        assert_relative_eq!(t.eigenvalues[2], 5.0 * PI * PI, max_relative = 1e-14);
        let r = rectangle_laplacian(2.0, 1.0, 1).unwrap();
        assert_relative_eq!(r.eigenvalues[0], 5.0 * PI * PI / 4.0, max_relative = 1e-14);
        // k=1 mean beats the two-term l=1 bound
        let spec = ProblemSpec::new(2, Operator::PolyLaplacian { order: 1 }, 1.0, 1.0 / 6.0)
            .unwrap();
        assert!(t.mean(1).unwrap() > bounds::melas(&spec, 1).value);
    }

    #[test]
    fn rectangle_enumeration_is_exhaustive() {
        // brute-force oracle with a large fixed index window
        let t = rectangle_laplacian(1.3, 0.7, 200).unwrap();
        let mut brute = Vec::new();
        for p in 1..200u64 {
            for q in 1..200u64 {
                brute.push(PI * PI * ((p * p) as f64 / 1.69 + (q * q) as f64 / 0.49));
            }
        }
        brute.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (a, b) in t.eigenvalues.iter().zip(brute.iter().take(200)) {
            assert_relative_eq!(a, b, max_relative = 1e-13);
        }
    }

    #[test]
    fn cumulative_means_nondecreasing() {
        let t = rectangle_laplacian(1.0, 1.0, 500).unwrap();
        assert!(t.cumulative_means.windows(2).all(|w| w[1] >= w[0]));
        assert_eq!(t.count(), 500);
        assert!(t.mean(0).is_none());
        assert!(t.mean(501).is_none());
    }

    #[test]
    fn fd_matrix_shapes() {
        let d = unit_square();
        let lap = fd_matrix(&d, 20, &OperatorKind::DirichletLaplacian).unwrap();
        assert_eq!(lap.order(), 19 * 19);
        assert_eq!(lap.asymmetry(), 0.0);
        let bih = fd_matrix(&d, 20, &OperatorKind::ClampedBilaplacian).unwrap();
        assert_eq!(bih.asymmetry(), 0.0);
        // interior 13-point diagonal is 20/h⁴ on a unit square grid
        let h: f64 = 1.0 / 20.0;
        let center = 9 * 19 + 9;
        assert_relative_eq!(bih.get(center, center), 20.0 / h.powi(4), max_relative = 1e-12);
        // quadratic(0) equals the bilaplacian
        let quad0 = fd_matrix(&d, 20, &OperatorKind::Quadratic { a: 0.0 }).unwrap();
        assert_eq!(&quad0, &bih);
        // grid too small
        assert!(fd_matrix(&d, 8, &OperatorKind::DirichletLaplacian).is_err());
        // non-box rejected
        let ball = Domain::new_ball(2, 1.0).unwrap();
        assert!(fd_matrix(&ball, 20, &OperatorKind::DirichletLaplacian).is_err());
    }

    #[test]
    fn fd_laplacian_matches_discrete_closed_form() {
        let d = unit_square();
        let m = fd_matrix(&d, 20, &OperatorKind::DirichletLaplacian).unwrap();
        let eigs = smallest_eigs(&m, 15).unwrap();
        let exact = fd_laplacian_closed_form(20, 15);
        for (a, b) in eigs.iter().zip(&exact) {
            assert_relative_eq!(a, b, max_relative = 1e-10);
        }
    }

    #[test]
    fn fd_below_continuum() {
        // discrete Dirichlet eigenvalues sit below the continuum ones
        let t = fd_spectrum(&unit_square(), 32, &OperatorKind::DirichletLaplacian, 25).unwrap();
        let exact = rectangle_laplacian(1.0, 1.0, 25).unwrap();
        for (fd, cont) in t.eigenvalues.iter().zip(&exact.eigenvalues) {
            assert!(fd < cont);
        }
    }

    #[test]
    fn bilaplacian_positive_definite() {
        for grid in [16u32, 24, 32] {
            let t = fd_spectrum(&unit_square(), grid, &OperatorKind::ClampedBilaplacian, 1)
                .unwrap();
            assert!(t.eigenvalues[0] > 0.0);
        }
    }

    #[test]
    fn clamped_plate_fundamental_value() {
        // extrapolated λ₁ of the clamped unit-square plate is near 1294.934
        let t = extrapolated_spectrum(
            &unit_square(),
            &OperatorKind::ClampedBilaplacian,
            &[24, 48],
            1,
        )
        .unwrap();
        assert_relative_eq!(t.eigenvalues[0], 1294.934, max_relative = 2e-3);
    }

    #[test]
    fn richardson_laplacian_converges() {
        let t = extrapolated_spectrum(
            &unit_square(),
            &OperatorKind::DirichletLaplacian,
            &[16, 32],
            5,
        )
        .unwrap();
        let exact = rectangle_laplacian(1.0, 1.0, 5).unwrap();
        for (a, b) in t.eigenvalues.iter().zip(&exact.eigenvalues) {
            assert_relative_eq!(a, b, max_relative = 2e-4);
        }
        match &t.provenance {
            Provenance::FiniteDifference { extrapolated, observed_orders, .. } => {
                assert!(*extrapolated);
                assert!(observed_orders.is_none());
            }
            _ => panic!("wrong provenance"),
        }
    }

    #[test]
    fn observed_order_with_three_grids() {
        let t = extrapolated_spectrum(
            &unit_square(),
            &OperatorKind::DirichletLaplacian,
            &[16, 32, 64],
            4,
        )
        .unwrap();
        match &t.provenance {
            Provenance::FiniteDifference { observed_orders: Some(orders), flagged, .. } => {
                for p in orders {
                    assert!((1.5..=2.5).contains(p), "order {p}");
                }
                assert!(flagged.is_empty());
            }
            _ => panic!("expected observed orders"),
        }
    }

    #[test]
    fn quadratic_monotone_in_a() {
        let d = unit_square();
        let mut prev: Option<Vec<f64>> = None;
        for a in [0.0, 1.0, 10.0] {
            let t = fd_spectrum(&d, 24, &OperatorKind::Quadratic { a }, 6).unwrap();
            if let Some(p) = prev {
                for (now, before) in t.eigenvalues.iter().zip(&p) {
                    assert!(now > before, "a={a}: {now} <= {before}");
                }
            }
            prev = Some(t.eigenvalues);
        }
    }

    #[test]
    fn verify_analytic_small() {
        let spec = ProblemSpec::new(2, Operator::PolyLaplacian { order: 1 }, 1.0, 1.0 / 6.0)
            .unwrap();
        let table = rectangle_laplacian(1.0, 1.0, 50).unwrap();
        let mut all = Vec::new();
        for k in 1..=50u64 {
            all.push(bounds::li_yau(&spec, k));
            all.push(bounds::melas(&spec, k));
            all.push(bounds::ilyin_l1(&spec, k).unwrap());
        }
        let report = verify(&table, &all, 0.0);
        assert!(report.passed());
        assert_eq!(report.entries.len(), 150);
        // tightest at every k is the beta-weighted two-term bound
        for (_, id, _) in &report.tightest {
            assert_eq!(*id, BoundId::IlyinL1);
        }
    }

    #[test]
    fn verify_skips_and_flags() {
        let spec = ProblemSpec::new(2, Operator::PolyLaplacian { order: 1 }, 1.0, 1.0 / 6.0)
            .unwrap();
        let table = rectangle_laplacian(1.0, 1.0, 5).unwrap();
        let asym = bounds::thm1(&spec, 1, 3, bounds::EpsilonMode::Zero).unwrap();
        let out_of_range = bounds::li_yau(&spec, 10);
        let report = verify(&table, &[asym, out_of_range], 0.0);
        assert!(report.entries.is_empty());
        assert_eq!(report.skipped_uncertified.len(), 1);
        assert_eq!(report.skipped_out_of_range.len(), 1);
        // empty input, empty report
        let empty = verify(&table, &[], 0.0);
        assert!(empty.passed());
        assert!(empty.entries.is_empty());
    }

    #[test]
    fn weyl_trend_on_analytic_table() {
        let spec = ProblemSpec::new(2, Operator::PolyLaplacian { order: 1 }, 1.0, 1.0 / 6.0)
            .unwrap();
        let table = rectangle_laplacian(1.0, 1.0, 2000).unwrap();
        let ratio = |k: u64| table.mean(k).unwrap() / bounds::weyl_leading(&spec, 1, k);
        for k in [1u64, 10, 100, 1000, 2000] {
            assert!(ratio(k) >= 1.0);
        }
        assert!(ratio(10) > ratio(100));
        assert!(ratio(100) > ratio(1000));
    }

    #[test]
    fn csv_shape() {
        let t = rectangle_laplacian(1.0, 1.0, 2).unwrap();
        let csv = t.to_csv();
        let lines: Vec<&str> = csv.trim().lines().collect();
        assert_eq!(lines[0], "k,lambda_k,cumulative_mean");
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("1,"));
        // 17 significant digits survive a parse round trip
        let first: f64 = lines[1].split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(first, t.eigenvalues[0]);
    }
}
