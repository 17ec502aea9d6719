//! Elliptic theta functions, the lattice sums `Φ_n`, elliptic hypergeometric
//! series `ₛEᵣ`, the q-difference equations they satisfy, and tools for
//! computing and validating their radii of convergence.
//!
//! All complex arithmetic is `f64`-based through [`C64`].

pub mod convergence;
pub mod diffeq;
pub mod error;
pub mod line;
pub mod phi;
pub mod series;
pub mod special;
pub mod sum;
pub mod theta;

pub use error::{Error, Result};
pub use line::{LineSpec, QSpec};
pub use theta::{Nome, TruncationPolicy};

/// Complex double used throughout the crate.
pub type C64 = num_complex::Complex64;

pub(crate) const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// `{x} = x - floor(x)`, always in `[0, 1)`.
pub fn frac(x: f64) -> f64 {
    let f = x - x.floor();
    if f >= 1.0 {
        0.0
    } else {
        f
    }
}

/// Relative closeness test used by constraint checks.
pub(crate) fn rel_close(a: C64, b: C64, tol: f64) -> bool {
    let scale = a.norm().max(b.norm());
    if scale == 0.0 {
        return true;
    }
    (a - b).norm() <= tol * scale
}
