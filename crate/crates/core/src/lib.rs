// NaN guards use negated comparisons on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

//! Numerical toolkit for the one-dimensional fractional Schrödinger equation.
//!
//! * [`quadrature`]: adaptive integration for oscillatory, slowly decaying
//!   integrands with removable singularities.
//! * [`specfun`]: Airy Ai/Ai′ with their negative zeros, and Gamma.
//! * [`riesz`]: the quantum Riesz fractional derivative on sampled grids and
//!   its closed-form pointwise integral for the cosine ansatz.
//! * [`well`]: the square-well audit of the piecewise cosine ground state.
//! * [`oscillator`]: fractional harmonic-oscillator spectra (WKB, exact
//!   α = 1 Airy solution, momentum-space shooting).
//! * [`grid`]: dense eigen-decomposition of the restricted Riesz Hamiltonian.
//! * [`io`]: CSV/JSON serialization shared with the command-line tool.

pub mod error;
pub mod grid;
pub mod io;
pub mod oscillator;
pub mod params;
pub mod quadrature;
pub mod riesz;
pub mod specfun;
pub mod well;

pub use error::{Error, Result};
pub use params::PhysParams;
pub use quadrature::{Integrand, QuadResult};
