//! Radio localization estimators and a reproducible simulation harness.
//!
//! The crate covers the classic indoor-positioning toolbox:
//!
//! * [`scenario`]: geometric network scenarios and noisy range synthesis;
//! * [`geomsolve`]: single-node geometric solvers (trilateration, weighted
//!   least squares, iterative range-difference positioning, DOP, fusion,
//!   similarity alignment, track smoothing);
//! * [`coop`]: cooperative network solvers over the whole agent set
//!   (gradient least squares, sequential multilateration, multidimensional
//!   scaling, projections onto convex sets, ADMM);
//! * [`bayes`]: grid-based Bayesian estimation, belief propagation, and its
//!   particle-based (nonparametric) variant;
//! * [`aoa`]: array processing for angle of arrival (Bartlett, Capon,
//!   MUSIC, ESPRIT) and bearing triangulation;
//! * [`fingerprint`]: RSSI fingerprinting, both classical Euclidean k-NN
//!   and rank-based matching;
//! * [`bounds`]: Cramer-Rao and Ziv-Zakai bounds for time-of-arrival
//!   ranging over discrete multicarrier spectra;
//! * [`harness`]: configuration-driven Monte Carlo experiments with
//!   deterministic, byte-reproducible outputs.
//!
//! Numeric code is generic over the scalar type via [`real::Real`]
//! (instantiable at `f32` or `f64`); the aliases below fix the common
//! double-precision case.

pub mod aoa;
pub mod bayes;
pub mod bounds;
pub mod coop;
pub mod fingerprint;
pub mod geom;
pub mod geomsolve;
pub mod harness;
pub mod real;
pub mod rng;
pub mod scenario;

pub use geom::{EdgeKey, NodeId};
pub use real::Real;

/// Double-precision position.
pub type Position64 = geom::Position<f64>;
/// Double-precision scenario.
pub type NetworkScenario64 = scenario::NetworkScenario<f64>;
/// Double-precision range measurement set.
pub type RangeSet64 = scenario::RangeSet<f64>;
/// Single-node solver outcome over `f64`.
pub type SolverReport64 = geomsolve::SolverReport<f64>;
/// Joint cooperative estimate over `f64`.
pub type PositionEstimateSet64 = coop::PositionEstimateSet<f64>;
// (aliases for solver outputs land with their modules)
