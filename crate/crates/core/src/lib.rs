//! Ground states of the nonlocal regional Schrödinger equation with competing
//! potentials, and the numerical studies built on them.
//!
//! The crate is organised bottom-up:
//!
//! * [`field`]: lattices, nodal fields, norms and mass diagnostics;
//! * [`nonlocal`]: scope functions and the regional/full quadratic forms;
//! * [`functionals`]: energies, gradients, Nehari projection and level formulas;
//! * [`solver`]: ground-state minimization and the reference level `D`;
//! * [`experiments`]: scaling, concentration, `C(ξ)` scans and norm audits.

pub mod coeffs;
pub mod error;
pub mod experiments;
pub mod field;
pub mod functionals;
pub mod nonlocal;
pub mod solver;
pub mod zeta;

pub use coeffs::{CoeffProfile, CoeffSpec};
pub use error::{Error, Result};
pub use field::{Field, Grid, Profile};
pub use functionals::{ConstCoeffProblem, EnergyReport, NodalProblem, ProblemSpec};
pub use nonlocal::{AssemblyOptions, Frame, QuadForm, Quadrature, ScopeKind, ScopeSpec};
pub use solver::{GroundState, SolverOptions};
