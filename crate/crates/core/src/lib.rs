//! Symbolic differential algebra for evolution equations `u_t + H = 0`.
//!
//! The crate builds adjoint equations from formal Lagrangians `v·F`, checks
//! nonlinear self-adjointness under substitutions `v = φ(x, t, u)`, emits the
//! determining system for `φ`, constructs conserved vectors from Lie point
//! symmetries and certifies them by exact divergence computation on
//! solutions.
//!
//! ```
//! use nsa_core::{adjoint, calculus::Equation, parser};
//!
//! let doc = parser::parse("u_t + u*u_xxx = 0;").unwrap();
//! let eq = Equation::new(doc.equation_lhs().unwrap().clone()).unwrap();
//! let adj = adjoint::adjoint_equation(&eq, &doc.context).unwrap();
//! assert_eq!(adj.to_string(), "-u*v_xxx - 3*u_x*v_xx - 3*v_x*u_xx - v_t");
//! ```

pub mod adjoint;
pub mod calculus;
pub mod catalog;
pub mod conslaw;
pub mod context;
pub mod error;
pub mod expr;
pub mod parallel;
pub mod parser;

pub use calculus::{Equation, PointSymmetry};
pub use context::Context;
pub use error::{Error, Result};
pub use expr::DiffExpr;
