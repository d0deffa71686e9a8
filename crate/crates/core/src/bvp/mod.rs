//! Boundary value problems for symplectic maps: Hamiltonian time-T maps,
//! boundary conditions as Lagrangian submanifolds of the product space,
//! solution branches, and catastrophe-labeled bifurcation diagrams.

pub mod continuation;
pub mod hamiltonian;
pub mod integrate;
pub mod io;
pub mod solve;

pub use continuation::{
    continue_branches, locate_cusp, BifurcationDiagram, Branch, BranchPoint, ContinuationOptions,
    CuspPoint, SingularPoint,
};
pub use hamiltonian::{HamiltonianSystem, HamiltonianTerm};
pub use integrate::{Scheme, SymplecticMapSpec};
pub use io::{diagram_csv, parse_system_toml, singular_points_json, SystemSetup};
pub use solve::{
    bvp_residual, classify_singular_solution, product_contact_problem, solve_bvp,
    BoundaryCondition, BvpSolution,
};
