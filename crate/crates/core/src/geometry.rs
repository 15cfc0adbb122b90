//! Geometric invariants feeding the eigenvalue bounds.
//!
//! Every inequality in this crate consumes exactly three numbers from the
//! domain: the volume `V`, the moment of inertia `I` (the second moment about
//! the centroid, which minimizes the second moment over all base points), and
//! the unit-ball volume `ω_n` of the ambient dimension. Boxes and balls use
//! closed-form moments; planar polygons use exact Green's-theorem vertex sums.

use serde::Deserialize;
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Shape payload of a [`Domain`].
///
/// Deserializes from `{"kind":"box","sides":[1,1]}`,
/// `{"kind":"ball","dim":3,"radius":1.0}` or
/// `{"kind":"polygon","vertices":[[x,y],...]}`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DomainKind {
    Box { sides: Vec<f64> },
    Ball { dim: usize, radius: f64 },
    Polygon { vertices: Vec<[f64; 2]> },
}

/// A validated bounded domain: an axis-aligned box, a ball, or a simple
/// planar polygon (normalized to counterclockwise orientation).
#[derive(Debug, Clone, PartialEq)]
pub struct Domain {
    kind: DomainKind,
}

/// The derived quantities every bound formula consumes.
#[derive(Debug, Clone, PartialEq)]
pub struct GeometryInvariants {
    /// n-dimensional volume of the domain.
    pub volume: f64,
    /// Minimal second moment `min_a ∫ |x-a|² dx`, attained at the centroid.
    pub inertia: f64,
    pub centroid: Vec<f64>,
    /// `ω_n`, the volume of the unit ball in the ambient dimension.
    pub unit_ball_volume: f64,
}

/// Volume of the unit ball in `R^n`.
///
/// Computed by the recurrence `ω_n = 2π/n · ω_{n-2}` with `ω_1 = 2` and
/// `ω_2 = π`, which agrees with `π^{n/2} / Γ(n/2 + 1)`.
pub fn unit_ball_volume(n: usize) -> Result<f64> {
    if n < 1 {
        return Err(Error::InvalidArgument(format!(
            "unit ball volume needs dimension >= 1, got {n}"
        )));
    }
    let mut k = if n % 2 == 0 { 2 } else { 1 };
    let mut omega = if n % 2 == 0 { PI } else { 2.0 };
    while k < n {
        k += 2;
        omega *= 2.0 * PI / k as f64;
    }
    Ok(omega)
}

impl Domain {
    pub fn new_box(sides: Vec<f64>) -> Result<Self> {
        if sides.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "box needs dimension >= 2, got {}",
                sides.len()
            )));
        }
        if sides.iter().any(|s| !s.is_finite() || *s <= 0.0) {
            return Err(Error::InvalidArgument(
                "box sides must be finite and strictly positive".into(),
            ));
        }
        Ok(Self {
            kind: DomainKind::Box { sides },
        })
    }

    pub fn new_ball(dim: usize, radius: f64) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidArgument(format!(
                "ball needs dimension >= 2, got {dim}"
            )));
        }
        if !radius.is_finite() || radius <= 0.0 {
            return Err(Error::InvalidArgument(
                "ball radius must be finite and strictly positive".into(),
            ));
        }
        Ok(Self {
            kind: DomainKind::Ball { dim, radius },
        })
    }

    /// Builds a simple polygon. Clockwise input is silently reversed so the
    /// stored vertex list is always counterclockwise.
    pub fn new_polygon(vertices: Vec<[f64; 2]>) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::InvalidArgument(format!(
                "polygon needs >= 3 vertices, got {}",
                vertices.len()
            )));
        }
        if vertices
            .iter()
            .any(|v| !v[0].is_finite() || !v[1].is_finite())
        {
            return Err(Error::InvalidArgument(
                "polygon vertices must be finite".into(),
            ));
        }
        let m = vertices.len();
        for i in 0..m {
            let a = vertices[i];
            let b = vertices[(i + 1) % m];
            if a == b {
                return Err(Error::InvalidArgument(format!(
                    "repeated consecutive vertex at index {i}"
                )));
            }
        }
        if !polygon_is_simple(&vertices) {
            return Err(Error::InvalidArgument(
                "polygon is not simple (edges intersect)".into(),
            ));
        }
        let area2 = twice_signed_area(&vertices);
        let scale = vertices
            .iter()
            .map(|v| v[0].abs().max(v[1].abs()))
            .fold(1.0, f64::max);
        if area2.abs() <= 1e-300 * scale * scale {
            return Err(Error::DegenerateDomain("polygon has zero area".into()));
        }
        let mut vertices = vertices;
        if area2 < 0.0 {
            vertices.reverse();
        }
        Ok(Self {
            kind: DomainKind::Polygon { vertices },
        })
    }

    /// Parses and validates a JSON domain description.
    pub fn from_json(text: &str) -> Result<Self> {
        let kind: DomainKind = serde_json::from_str(text)
            .map_err(|e| Error::InvalidArgument(format!("bad domain JSON: {e}")))?;
        match kind {
            DomainKind::Box { sides } => Self::new_box(sides),
            DomainKind::Ball { dim, radius } => Self::new_ball(dim, radius),
            DomainKind::Polygon { vertices } => Self::new_polygon(vertices),
        }
    }

    pub fn kind(&self) -> &DomainKind {
        &self.kind
    }

    pub fn dimension(&self) -> usize {
        match &self.kind {
            DomainKind::Box { sides } => sides.len(),
            DomainKind::Ball { dim, .. } => *dim,
            DomainKind::Polygon { .. } => 2,
        }
    }

    /// The same domain dilated by `c > 0` (polygons dilate about the origin).
    pub fn dilate(&self, c: f64) -> Result<Self> {
        if !c.is_finite() || c <= 0.0 {
            return Err(Error::InvalidArgument("dilation factor must be > 0".into()));
        }
        match &self.kind {
            DomainKind::Box { sides } => {
                Self::new_box(sides.iter().map(|s| c * s).collect())
            }
            DomainKind::Ball { dim, radius } => Self::new_ball(*dim, c * radius),
            DomainKind::Polygon { vertices } => {
                Self::new_polygon(vertices.iter().map(|v| [c * v[0], c * v[1]]).collect())
            }
        }
    }

    /// Volume, centroid and central second moment, by closed form.
    pub fn invariants(&self) -> Result<GeometryInvariants> {
        let n = self.dimension();
        let omega = unit_ball_volume(n)?;
        match &self.kind {
            DomainKind::Box { sides } => {
                let volume: f64 = sides.iter().product();
                let sum_sq: f64 = sides.iter().map(|s| s * s).sum();
                Ok(GeometryInvariants {
                    volume,
                    inertia: volume * sum_sq / 12.0,
                    centroid: sides.iter().map(|s| 0.5 * s).collect(),
                    unit_ball_volume: omega,
                })
            }
            DomainKind::Ball { dim, radius } => {
                let volume = omega * radius.powi(*dim as i32);
                let inertia = *dim as f64 * omega * radius.powi(*dim as i32 + 2)
                    / (*dim as f64 + 2.0);
                Ok(GeometryInvariants {
                    volume,
                    inertia,
                    centroid: vec![0.0; *dim],
                    unit_ball_volume: omega,
                })
            }
            DomainKind::Polygon { vertices } => {
                let (area, centroid, second_origin) = polygon_moments(vertices);
                if area <= 0.0 {
                    return Err(Error::DegenerateDomain("polygon has zero area".into()));
                }
                let inertia =
                    second_origin - area * (centroid[0] * centroid[0] + centroid[1] * centroid[1]);
                Ok(GeometryInvariants {
                    volume: area,
                    inertia,
                    centroid: centroid.to_vec(),
                    unit_ball_volume: omega,
                })
            }
        }
    }

    /// Second moment about an arbitrary point, via the parallel-axis identity
    /// `∫ |x-a|² dx = I + V |a-c|²`.
    pub fn second_moment_about(&self, point: &[f64]) -> Result<f64> {
        let inv = self.invariants()?;
        if point.len() != self.dimension() {
            return Err(Error::InvalidArgument(format!(
                "point dimension {} does not match domain dimension {}",
                point.len(),
                self.dimension()
            )));
        }
        let dist_sq: f64 = point
            .iter()
            .zip(&inv.centroid)
            .map(|(a, c)| (a - c) * (a - c))
            .sum();
        Ok(inv.inertia + inv.volume * dist_sq)
    }
}

fn twice_signed_area(v: &[[f64; 2]]) -> f64 {
    let m = v.len();
    (0..m)
        .map(|i| {
            let a = v[i];
            let b = v[(i + 1) % m];
            a[0] * b[1] - b[0] * a[1]
        })
        .sum()
}

/// Area, centroid and polar second moment about the origin by the
/// Green's-theorem vertex sums. Assumes counterclockwise orientation.
fn polygon_moments(v: &[[f64; 2]]) -> (f64, [f64; 2], f64) {
    let m = v.len();
    let mut area2 = 0.0;
    let mut cx = 0.0;
    let mut cy = 0.0;
    let mut ixx = 0.0;
    let mut iyy = 0.0;
    for i in 0..m {
        let [x0, y0] = v[i];
        let [x1, y1] = v[(i + 1) % m];
        let cross = x0 * y1 - x1 * y0;
        area2 += cross;
        cx += (x0 + x1) * cross;
        cy += (y0 + y1) * cross;
        iyy += (x0 * x0 + x0 * x1 + x1 * x1) * cross;
        ixx += (y0 * y0 + y0 * y1 + y1 * y1) * cross;
    }
    let area = 0.5 * area2;
    let centroid = [cx / (6.0 * area), cy / (6.0 * area)];
    let second_origin = (ixx + iyy) / 12.0;
    (area, centroid, second_origin)
}

fn orient(p: [f64; 2], q: [f64; 2], r: [f64; 2]) -> f64 {
    (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])
}

fn on_segment(p: [f64; 2], q: [f64; 2], r: [f64; 2]) -> bool {
    r[0] >= p[0].min(q[0]) && r[0] <= p[0].max(q[0]) && r[1] >= p[1].min(q[1]) && r[1] <= p[1].max(q[1])
}

fn segments_intersect(p1: [f64; 2], p2: [f64; 2], q1: [f64; 2], q2: [f64; 2]) -> bool {
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    (d1 == 0.0 && on_segment(q1, q2, p1))
        || (d2 == 0.0 && on_segment(q1, q2, p2))
        || (d3 == 0.0 && on_segment(p1, p2, q1))
        || (d4 == 0.0 && on_segment(p1, p2, q2))
}

/// Pairwise edge test; adjacent edges share exactly one endpoint and are
/// skipped.
fn polygon_is_simple(v: &[[f64; 2]]) -> bool {
    let m = v.len();
    for i in 0..m {
        for j in (i + 1)..m {
            // skip the edge itself and the two neighbours
            if j == i || (j + 1) % m == i || (i + 1) % m == j {
                continue;
            }
            if segments_intersect(v[i], v[(i + 1) % m], v[j], v[(j + 1) % m]) {
                return false;
            }
        }
    }
    true
}
