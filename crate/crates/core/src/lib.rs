//! Numerical laboratory for convex variational analysis at desk scale.
//!
//! The crate builds executable counterparts of the classical objects of
//! convex analysis on `R^d`: proper convex lower semicontinuous functions
//! with exact evaluation/prox/conjugate oracles ([`funclib`]), an exact
//! univariate piecewise-quadratic calculus used as the reference oracle
//! ([`pwq1d`]), metric slopes and minimal-norm subgradients ([`slope`]),
//! Painlevé–Kuratowski set limits and epigraphical limit estimation
//! ([`setconv`]), steepest-descent curves via the implicit proximal scheme
//! ([`flow`]), and verdict harnesses for the convergence theorems relating
//! all of the above ([`theorems`]). Scenario files drive everything
//! ([`scenario`]).
//!
//! With the default `parallel` feature the per-point and per-scenario loops
//! run on rayon; disabling the feature falls back to sequential execution
//! with identical results.

pub mod extreal;
pub mod expr;
pub mod flow;
pub mod funclib;
pub mod geom;
pub mod linalg;
pub mod par;
pub mod pwq1d;
pub mod report;
pub mod scenario;
pub mod setconv;
pub mod slope;
pub mod theorems;

pub use extreal::ExtReal;
pub use geom::Point;
