//! Radial solutions of the coupled Monge-Ampère system
//!
//! ```text
//! det D²u₁ = λ(-u₂)^α,   det D²u₂ = μ(-u₁)^β   in the unit ball of R^N,
//! u₁ = u₂ = 0                                  on the boundary.
//! ```
//!
//! With `v_i(t) = -u_i(t)` the problem becomes a fixed-point problem for a
//! composite integral operator on concave profiles of `[0, 1]`. The crate
//! provides the discretized profiles and operators, solvers for each sign of
//! `αβ - N²`, and the residual and bound checks that certify the output.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod error;
pub mod operators;
pub mod profile;
pub mod quadrature;
pub mod solvers;

pub use error::{Error, Result};
pub use operators::{
    apply_general, apply_t, apply_t1, apply_t1_scaled, apply_t2, apply_t2_scaled, apply_t_scaled,
    classify_general, Classification, GeneralCase, Nonlinearity, ProblemSpec, Regime,
};
pub use profile::{
    cone_report, inner_cumulative, outer_tail, sup_norm, ConeReport, Grid, RadialProfile,
};
pub use solvers::{
    certify, normalized_iteration, principal_constant, rescale_to_fixed_point,
    single_equation_eigen, solve_general, solve_picard_sublinear, solve_system, Certificate,
    EigenResult, InitialProfile, SolveConfig, SolveResult, Status,
};
