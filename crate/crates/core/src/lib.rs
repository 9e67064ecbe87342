//! Linking operators `B_{n,ρ}^{(k)}` of Baskakov/Durrmeyer/Kantorovich type,
//! their normalized forms `V_{n,ρ}^{(k)}`, the associated discrete operators
//! `D_{n,ρ}^{(k)}`, closed-form moments and variances, and a verification
//! harness for the identities and inequalities relating them.
//!
//! Module map:
//!
//! * [`numerics`] shared kernels: factorial products, log-gamma, adaptive
//!   quadrature, finite differences, iterated integrals, moduli of continuity.
//! * [`basis`] the basis `p_{n,j}`, series truncation, `S_{n,c}` and entropy.
//! * [`funcspec`] test functions: expression parser and catalog.
//! * [`functionals`] the coefficient functionals and their closed forms.
//! * [`operators`] pointwise operator evaluation.
//! * [`analysis`] moments, `E(L)`, and the verification suites.

// `!(a > b)` is used deliberately so that NaN inputs are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod basis;
pub mod error;
pub mod funcspec;
pub mod functionals;
pub mod numerics;
pub mod operators;

pub use basis::BasisParams;
pub use error::{Error, Result};
pub use funcspec::FunctionSpec;
pub use functionals::{OperatorConfig, Rho};
pub use numerics::{Interval, Tolerances};
pub use operators::OperatorKind;
