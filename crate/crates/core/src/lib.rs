//! Approximate stability of Lorentz and general linear dynamical systems.
//!
//! The crate works at the level of linear fibres: a generalized dynamical
//! system is a finite [`MatrixSequence`], and everything else (approximately
//! stable subspaces, Cartan decompositions, limit sets on the light cone,
//! torus cocycles, the anti-de Sitter plane families) is computed from
//! matrices and quadratic forms.
//!
//! Module map:
//!
//! * [`minkowski`]: quadratic forms, causal types, isotropic hyperplanes.
//! * [`subspace`]: column-orthonormal subspaces and principal angles.
//! * [`cartan`]: the `L·D·R` decomposition and its Lorentz pattern.
//! * [`approx_stability`]: AS / SPAS subspaces by three limit oracles and
//!   a brute-force scorer.
//! * [`projective`]: boundary points, orbit limits, north-south
//!   certificates, limit sets and the elementary classifier.
//! * [`model_spaces`]: flat Lorentz tori, Hopf cocycles, AdS₃ planes.
//! * [`cocycles`]: normal-direction cocycles, Lyapunov exponents, entropy.
//! * [`io`]: JSON/CSV readers and writers shared by the CLI.
//! * [`reports`]: the serializable reports the CLI emits.

pub mod approx_stability;
pub mod cartan;
pub mod catalog;
pub mod cocycles;
pub mod error;
pub mod io;
pub mod limits;
pub mod linalg;
pub mod minkowski;
pub mod model_spaces;
pub mod projective;
pub mod reports;
pub mod sampling;
pub mod subspace;

pub use approx_stability::{AsKind, AsOptions, AsResult, MatrixSequence};
pub use cartan::{kak, lorentz_kak, norm_growth, KakFactorization, LorentzKak};
pub use error::{Error, Result};
pub use minkowski::{CausalType, QuadraticForm};
pub use projective::{BoundaryPoint, HyperbolicPoint, LimitSetEstimate};
pub use subspace::Subspace;
