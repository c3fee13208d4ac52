//! scaleflow: a spectral toolkit for unregularized gradient flows on
//! weighted-l2 scale spaces.
//!
//! The crate realizes, at finite Fourier truncation, the quantitative
//! machinery behind compactness for flows `ds w = V(w)` whose vector field
//! is not a differential operator but a "lower order" perturbation of a
//! diagonal isometry between scale levels:
//!
//! * [`scale`] — the abstract weighted-l2 scale H_k = l2_{f^k}, the
//!   fundamental operator and quadratic action, projections, tail norms;
//! * [`loops`] — the concrete Fourier model: loops and boundary paths in
//!   C^n, Sobolev norms, collocation transforms, the reflection between
//!   boundary paths and symmetric loops;
//! * [`frames`] / [`fields`] — moving frames built from pointwise matrix
//!   data, Floer-type and delay vector fields, their differentials and the
//!   conjugated remainder;
//! * [`axioms`] — randomized checks of the frame and vector-field axioms
//!   with measured constants;
//! * [`flow`] — trajectory integration (exact diagonal part), residual
//!   certificates, action and energy identities, closed-form linear oracles;
//! * [`compactness`] — mollifier and cutoff utilities, bootstrap norm
//!   ledgers with explicit constant chains, quantitative tail thresholds,
//!   and convergent-subsequence extraction;
//! * [`catalog`] / [`scenario`] — the named frame/field registry and the
//!   configuration-driven experiment harness behind the CLI.

// validation guards are written as !(x > 0) on purpose: they reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod axioms;
pub mod bundled;
pub mod catalog;
pub mod compactness;
pub mod error;
pub mod fields;
pub mod flow;
pub mod frames;
pub mod loops;
pub mod numerics;
pub mod plot;
pub mod scale;
pub mod scenario;

pub use error::{Error, Result};
