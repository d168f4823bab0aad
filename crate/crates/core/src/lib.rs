//! Self-similar shrinker profiles of the one-dimensional Landau–Lifshitz–Gilbert
//! equation, computed from the Serret–Frenet frame of a space curve with
//! Gaussian-growing curvature and linear torsion.
//!
//! The crate integrates the frame, extracts the limit constants `B` and `W`
//! by two independent routes, evaluates the asymptotic expansions with their
//! error envelopes, builds the limiting circle geometry and assembles the
//! self-similar solution `m(x, t) = m(x/√(T−t))`.

// `!(x >= lo)` rejects NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod constants;
pub mod error;
pub mod frame;
pub mod geometry;
pub mod params;
pub mod quadrature;
pub mod report;
pub mod selfsimilar;
pub mod stepper;
pub mod vec3;

pub use error::{Error, Result};
pub use params::Params;
