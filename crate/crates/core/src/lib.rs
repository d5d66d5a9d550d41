//! Exact symbolic engine for Lie point symmetries and Noether conservation
//! laws of Pontryagin-type optimal control problems.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod checker;
pub mod determine;
pub mod expr;
pub mod linalg;
pub mod noether;
pub mod ocp;

pub use expr::{Expr, ExprError, Kernel, Symbol};
