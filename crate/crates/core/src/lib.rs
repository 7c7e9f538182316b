//! Numerical laboratory for least-energy sign-changing solutions of the
//! sublinear Neumann problem `−Δu = |u|^{q−2}u` in `Ω`, `∂_ν u = 0` on `∂Ω`,
//! with `1 ≤ q < 2` (`sgn(u)` for `q = 1`).

// `!(a > b)` is used on purpose so that NaN takes the failing branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod error;
pub mod functional;
pub mod geometry;
pub mod io;
pub mod minimize;
pub mod radial;
pub mod scalar;

pub use error::{Error, Result};
pub use geometry::{build_grid, DomainSpec, Field, Grid, Halfspace, Hyperplane, Resolution};
pub use scalar::Scalar;

pub type Grid64 = Grid<f64>;
pub type Field64 = Field<f64>;
pub type Grid32 = Grid<f32>;
pub type Field32 = Field<f32>;
pub type ProblemSpec64<'g> = functional::ProblemSpec<'g, f64>;
pub type SolveReport64 = minimize::SolveReport<f64>;
