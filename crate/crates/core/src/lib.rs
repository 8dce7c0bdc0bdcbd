//! Desk-scale numerical models for sparse domination of compositions of
//! singular integral operators with nonsmooth kernels.
//!
//! Everything lives on a uniform dyadic grid over `[0,1)^n`, `n ∈ {1,2}`:
//!
//! - [`grid`]: grid functions, grid-aligned cubes, dyadic structure, exact integration.
//! - [`orlicz`]: localized Luxemburg norms `‖g‖_{L(log L)^β,Q}` and power averages.
//! - [`weights`]: Muckenhoupt `A_p`, `A_1` and Fujii–Wilson `A_∞` constants, dual weights.
//! - [`kernels`]: dense/structured kernel operators, truncated maximal operator,
//!   approximation-to-the-identity families and kernel-condition verifiers.
//! - [`decomp`]: Calderón–Zygmund and Whitney decompositions.
//! - [`maximal`]: Hardy–Littlewood, Orlicz and grand maximal operators.
//! - [`sparse`]: sparse families, sparse forms and the stopping-time domination
//!   algorithms.
//!
//! The crate is `no_std` (it needs `alloc`); the companion harness crate adds
//! configuration, IO and the batch CLI.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

mod error;
mod math;
mod prefix;

pub mod decomp;
pub mod grid;
pub mod kernels;
pub mod maximal;
pub mod orlicz;
pub mod sparse;
pub mod weights;

pub use error::{Error, Result};
pub use grid::{Boundary, Cube, CubeFamily, DilationMode, Grid, GridFunction};
pub use kernels::{AtiFamily, KernelOperator, OperatorSpec};
pub use orlicz::LocalFunctional;
pub use weights::Weight;
