//! Numerical laboratory for finite-rank commutators `i[f(P), g(Q)]`.
//!
//! The pipeline is: describe `f` and `g` ([`funclib`]), lay down a trapezoid
//! grid ([`grid`]), assemble the Nyström matrix of the commutator kernel
//! ([`kernel`]), diagonalize it ([`spectral`]), then study the strip
//! analyticity of `f` and `g` ([`katoclass`]) and recover the tanh
//! representation measure ([`measurefit`]). [`cli`] drives the pipeline from
//! JSON configs and hosts the built-in experiments.

// `!(x > 0.0)` guards also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod funclib;
pub mod grid;
pub mod katoclass;
pub mod kernel;
pub mod matrix;
pub mod measurefit;
pub mod spectral;

pub use error::{Error, Result};
pub use funclib::{ComplexPoint, FunctionSpec, SampledFunction, TanhAtom, TanhMixture};
pub use grid::Grid;
pub use katoclass::StripEstimate;
pub use kernel::{KernelMatrix, Side};
pub use measurefit::DiscreteMeasure;
pub use spectral::SpectralResult;
