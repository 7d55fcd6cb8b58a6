//! Numerical construction and verification of Ricci-soliton profile curves.
//!
//! A profile is a triple of functions `(x, y, φ)` of one variable `t` on an
//! interval `[0, T]` satisfying a second-order system with a conserved first
//! integral and singular endpoints where `φ` vanishes. Solutions yield
//! gradient Ricci solitons conformal to Kähler metrics on the projective
//! compactification `M^m_k` of the `k`-th power of the tautological bundle
//! over `CP^{m-1}`.
//!
//! The crate is organised as follows:
//!
//! * [`ode`]: right-hand side, first integral, series launch from the
//!   singular endpoints, adaptive Dormand–Prince integration and residuals.
//! * [`einstein`]: the `y ≡ 0` closed-form family and the Page /
//!   Bérard Bergery metrics.
//! * [`koiso_cao`]: the constant-conformal-factor family and the Koiso–Cao
//!   Kähler–Ricci solitons.
//! * [`geometry`]: profile-level curvature quantities, soliton residuals,
//!   case classification, the `t ↦ T − t` inversion and the radial variable.
//! * [`explorer`]: shooting, grid scans and Newton refinement over the
//!   two-parameter family of regular starts.
//! * [`io`]: CSV / JSON serialization and parsing.

// `!(a < b)` is used throughout so that NaN fails range checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod einstein;
pub mod error;
pub mod explorer;
pub mod geometry;
pub mod io;
pub mod koiso_cao;
pub mod numeric;
pub mod ode;
pub mod params;
pub mod state;

pub use error::{Error, Result};
pub use params::Params;
pub use state::{Branch, Derivative, ProfileState, Trajectory};
