//! RLT linear relaxations of nonconvex quadratic programs.
//!
//! For `min ½xᵀQx + cᵀx` over a polyhedron `F = {Gᵀx ≤ g, Hᵀx = h}`, the
//! crate builds the reformulation-linearization relaxation, solves it with a
//! built-in simplex method, certifies optimality through the dual, decides
//! exactness against an exhaustive global oracle, and generates instances
//! with a prescribed relation between the relaxation bound and the optimum.

#![allow(clippy::needless_range_loop)]

pub mod dualcert;
pub mod error;
pub mod exec;
pub mod gen;
pub mod io;
pub mod linalg;
pub mod lp;
pub mod oracle;
pub mod poly;
pub mod rlt;
pub mod special;
pub mod tol;

pub use dualcert::{
    build_dual, certify_exactness, check_optimality, underestimator, DualSolution, ExactnessReport,
    ExactnessStatus,
};
pub use error::{Error, Result};
pub use exec::Execution;
pub use linalg::{Mat, Vector};
pub use lp::{solve_lp, LpOutcome, LpProblem, LpStatus};
pub use oracle::{global_min_qp, qp_unbounded_witness, GlobalQpResult, OracleStatus};
pub use poly::{ConeGenerators, Decomposition, FaceDescriptor, Polyhedron};
pub use rlt::{
    build_rlt, enumerate_lifted_vertices, is_vertex_of_lifted, lift, lift_recession, midpoint_lift,
    solve_rlt, LiftedDirection, LiftedPoint, QpInstance, RltRelaxation, RltSolution,
};
