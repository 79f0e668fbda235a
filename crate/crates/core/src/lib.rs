//! Discrete fractional Gagliardo energies for maps from the circle or sphere
//! into a round sphere target.
//!
//! The central object is the double-sum discretization of
//!
//! ```text
//! E_{t,p}(u) = ∬ |u(x) − u(y)|^p / |x − y|^{n + t·p}  dx dy ,   p = n/s,
//! ```
//!
//! over S^n × S^n, together with everything needed to *minimize* it over
//! manifold-valued node fields and to *verify* the identities and inequalities
//! the energy satisfies:
//!
//! - [`geometry`]: points on S^n, stereographic charts, sphere targets.
//! - [`mesh`]: quadrature meshes (uniform circle, icosphere), node fields, I/O.
//! - [`energy`]: kernels, restricted energies, gradients, Euler–Lagrange residual.
//! - [`minimizer`]: projected gradient descent and the continuation t → s⁺.
//! - [`homotopy`]: winding number / degree and small-energy triviality.
//! - [`rescaling`]: Möbius rescaling u_λ, its kernel K_λ, and bound checks.
//! - [`constructions`]: comparison maps (cut-off blends, Luckhaus glue,
//!   inversion extension, opening maps, capacity cutoffs).
//! - [`verify`]: gradient checks, quadrature inequalities, and the bubbling
//!   experiment driver.
//!
//! All pairwise reductions are O(N²) and run in parallel with a fixed
//! reduction order, so identical inputs produce bit-identical outputs
//! regardless of thread count (see [`reduce`]).

pub mod constructions;
pub mod energy;
pub mod error;
pub mod geometry;
pub mod homotopy;
pub mod mesh;
pub mod minimizer;
pub mod reduce;
pub mod rescaling;
pub mod verify;

pub use error::{Error, Result};
