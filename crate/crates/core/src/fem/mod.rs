//! Taylor–Hood finite elements for the generalized-Newtonian Stokes problem
//! on the unit square centred at the origin.

mod assembly;
mod basis;
mod errors;
mod export;
mod linsolve;
mod manufactured;
mod mesh;
mod newton;
mod quadrature;
mod space;
mod study;

pub use assembly::{assembly_degree, norm2, StokesProblem};
pub use basis::{LagrangeBasis, Tabulation};
pub use errors::{
    compute_errors, conjugate_exponent, error_degree, for_each_quad_point, pressure_mean,
    strain_norm, DiscreteFields, ErrorReport, PointValues, ReferenceFields,
};
pub use export::StokesSolution;
pub use linsolve::{SparseSolver, LINEAR_REL_TOL};
pub use manufactured::ManufacturedCase;
pub use mesh::{build_mesh, ElementMap, Mesh, DOMAIN_MAX, DOMAIN_MIN};
pub use newton::{newton_iterate, newton_solve, NewtonConfig, NewtonReport, NewtonStep};
pub use quadrature::{gauss_legendre, triangle_rule, TriangleRule};
pub use space::{DofMap, FeSpace};
pub use study::{
    convergence_study, errors_against_reference, log_slope, pairwise_rate, solve_manufactured,
    DegreeFit, RateRow, RateTable, SolveOutcome,
};
