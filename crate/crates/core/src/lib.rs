//! Exact multi-soliton solutions of the real cubic nonlinear Schrödinger system
//!
//! ```text
//! u_i'' + 2 (u_1^2 + ... + u_N^2) u_i = -mu_i u_i,   i = 1..N
//! ```
//!
//! built from Hirota tau functions, together with the numerical machinery that
//! checks them: conserved quantities, masses, energies, the classification of
//! three-component solutions by their initial data, and the kernel of the
//! linearized system.
//!
//! Modules:
//! - [`exppoly`]: finite sums of real exponentials with overflow-safe evaluation.
//! - [`hirota`]: tau-function construction of `(g_1..g_N, f)`.
//! - [`invariants`]: residuals, constants of motion, masses, energy.
//! - [`classify`]: degenerate constructors, normalized solutions, admissible
//!   derivative ratios and the solution branches with prescribed initial ratios.
//! - [`linearize`]: linearized operator, analytic kernel vectors, discrete kernel.
//! - [`numeric`]: quadrature, ODE shooting, banded eigensolver, root finding.

pub mod classify;
pub mod error;
pub mod exppoly;
pub mod hirota;
pub mod invariants;
pub mod linearize;
pub mod numeric;

pub use error::{Error, Result};
pub use exppoly::{ExpPoly, ExpTerm};
pub use hirota::{build_solution, SolitonParams, SolutionRep, Spectrum};
