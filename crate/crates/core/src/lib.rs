//! Lower bounds for sums of Dirichlet eigenvalues, and the machinery to
//! verify them.
//!
//! The crate evaluates every classical and sharpened lower bound on the mean
//! of the first `k` Dirichlet eigenvalues of the poly-Laplacian `(-Δ)^l` and
//! of the quadratic operator `Δ² - aΔ`, implements the extremal trapezoid
//! profile behind the certified bounds as reusable numerics, and produces
//! true spectra (analytic for the rectangle Laplacian, finite-difference
//! with Richardson extrapolation otherwise) to check every certified bound
//! against genuine partial sums.
//!
//! Module map:
//! - [`geometry`]: domains (box / ball / planar polygon) and their volume,
//!   inertia and centroid.
//! - [`bounds`]: the closed-form inequalities with per-term breakdowns.
//! - [`extremal`]: trapezoid profiles, the knee equation and its exact /
//!   asymptotic roots, certified profile bounds, randomized minimality.
//! - [`spectra`]: analytic and finite-difference eigenvalue tables plus the
//!   verification driver.
//! - [`linalg`]: the sparse symmetric eigensolvers backing [`spectra`].
//! - [`dd`]: double-double scalars for diagnostics that exceed f64.

pub mod bounds;
pub mod dd;
pub mod error;
pub mod extremal;
pub mod geometry;
pub mod linalg;
pub mod spectra;

pub use error::{Error, Result};
