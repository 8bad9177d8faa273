//! Symbolic-numeric toolkit for third-order integrals of motion of 2D
//! Euclidean Hamiltonians separable in Cartesian, polar, parabolic and
//! elliptic coordinates: exact determining-equation residuals, linear
//! compatibility conditions, coefficient vanishing (kernel) analysis,
//! Painlevé/Weierstrass potential construction, and classical
//! verification by Poisson brackets and trajectory drift.
//!
//! The crate is `no_std`-compatible (requires `alloc`); IO, CLI and file
//! formats live in the companion `cubint-cli` crate.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod charts;
pub mod determine;
pub mod dynamics;
pub mod expr;
pub mod rat;
pub mod rng;
pub mod specfun;

pub use expr::{parse_expr, Binding, Expr, Symbol};
pub use rat::Rat;
