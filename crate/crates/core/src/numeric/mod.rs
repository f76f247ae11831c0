//! Shared numerical kernels: grids, adaptive quadrature, ODE shooting,
//! symmetric banded eigensolving and bracketing root finding.

pub mod banded;
pub mod grid;
pub mod ode;
pub mod quad;
pub mod roots;

pub use banded::{eigs_dense, eigs_smallest, BandLu, EigPairs, EigsOptions, SymBandMatrix};
pub use grid::GridSpec;
pub use ode::{integrate_ode, nls_rhs, shoot, shoot_from, OdeOptions, Trajectory};
pub use quad::{integrate, integrate_with, QuadOptions, QuadResult};
pub use roots::{find_root, golden_max};
