//! Guaranteed upper and lower envelopes for the separation of solutions to
//! scalar Caputo fractional differential equations.
//!
//! Given two solutions of `D^alpha x = f(t, x)` (Caputo derivative of order
//! `alpha` in (0,1]) that differ only in their initial values, this crate
//! evaluates pointwise bounds on `|x2(t) - x1(t)|`:
//!
//! * classic bounds driven by a running Lipschitz supremum `L*(t)`,
//! * tighter bounds driven by running coefficient envelopes `a_*(t)`, `a^*(t)`
//!   of the (generalized) coefficient `f(t,x)/x`,
//! * shifted envelopes around a reference trajectory for right-hand sides
//!   that do not vanish at zero.
//!
//! Supporting machinery: real-argument Mittag-Leffler functions with
//! saturation semantics ([`special`]), product-integration solvers for
//! Caputo initial value problems ([`solver`]), envelope construction
//! ([`envelope`]), the bound formulas themselves ([`bounds`]), and a
//! bound-guided shooting method for terminal value problems ([`shooting`]).

pub mod bounds;
pub mod envelope;
pub mod shooting;
pub mod solver;
pub mod special;

pub use bounds::{BoundEnvelope, BoundProvenance, BoundsError, StabilityVerdict};
pub use envelope::{CoeffEnvelope, EnvelopeError, EnvelopeKind, SamplingBox};
pub use shooting::{ShootingError, ShootingReport, TVProblem};
pub use solver::{FracIVP, SolverError, Trajectory};
pub use special::{ml, ml2, MLQuery, SpecialError};
