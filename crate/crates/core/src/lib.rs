//! Numerical engine for the continuous random-exchange wealth model.
//!
//! A population of agents trades by pooling the money of a random pair and
//! splitting it at a uniform random fraction. At the level of wealth
//! densities one round of trading is the nonlinear integral operator
//!
//! ```text
//! (Ty)(x) = ∫∫_{u+v>x} y(u) y(v) / (u + v) du dv,
//! ```
//!
//! whose nonzero fixed points are the exponentials `α e^{−αx}`.
//!
//! * [`grid`] and [`quadrature`]: sampled densities, norms and moments.
//! * [`operator`]: the operator, its iteration and Fourier diagnostics.
//! * [`families`]: analytic densities with closed-form first iterates.
//! * [`agents`]: the discrete Monte Carlo market.
//! * [`verify`]: the property suite behind `kwealth verify`.

pub mod agents;
pub mod cli;
pub mod derivatives;
pub mod error;
pub mod families;
pub mod grid;
pub mod io;
pub mod operator;
pub mod quadrature;
pub mod samples;
pub mod special;
pub mod verify;

pub use error::{Error, Result};
pub use grid::{Density, Grid, MomentSummary};
pub use operator::{apply_t, iterate_t, ConvolutionMethod, IterationReport};
