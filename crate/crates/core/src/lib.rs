//! Meshfree monotone finite differences for surfaces of prescribed Gaussian
//! curvature on convex planar domains.
//!
//! The pipeline is: build a [`PointCloud`](geometry::PointCloud) for a
//! [`Domain`](geometry::Domain), precompute wide stencils with
//! [`build_stencil_table`](stencil::build_stencil_table), then
//! [`solve`](solver::solve) the discrete convexified Monge–Ampère system.
//! Solutions are weak: Dirichlet data may be attained only in the sense of
//! an upper bound, which shows up as a boundary layer in the discrete solution.

pub mod analysis;
pub mod error;
pub mod geometry;
pub mod index;
pub mod oned;
pub mod operator;
pub mod solver;
pub mod stencil;

pub use analysis::{builtin_examples, convergence_study, ErrorTable, ExactSolution, StudyConfig};
pub use error::{Error, Result};
pub use geometry::{BoundingBox, ConvexPolygon, CustomDomain, Domain, Point, PointCloud};
pub use oned::{solve_1d, Problem1D};
pub use operator::{check_compatibility, GridFunction, ProblemSpec, Scheme};
pub use solver::{solve, SolveReport, SolverConfig};
pub use stencil::{build_stencil_table, make_direction_set, DirectionSet, StencilTable};
