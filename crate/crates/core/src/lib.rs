//! Collaborative sensing among vehicles in obstructed environments.
//!
//! The crate samples random environments of convex objects (discs for the
//! Boolean model, oriented rectangles for the freeway scenario), computes
//! line-of-sight coverage, location redundancy and γ-coverage by
//! rasterized Monte Carlo, and evaluates the closed-form predictions that
//! go with them:
//!
//! * [`analytics`] - expected single-sensor coverage area, void-location
//!   redundancy and the Poisson-tail γ-coverage approximation for the disc
//!   model.
//! * [`v2i`] - infrastructure (V2I) capacity needed when line-of-sight
//!   V2V relay chains break, for a single lane and for the three-lane grid
//!   Markov chain.
//! * [`freeway`] and [`temporal`] - the structured freeway scenario, and the
//!   time-stepped version with road-side units and opposite traffic.
//!
//! Every random quantity is driven by a [`pointprocess::Seed`], so runs are
//! bitwise reproducible regardless of thread count.

pub mod analytics;
pub mod cli;
pub mod error;
pub mod freeway;
pub mod geometry;
pub mod montecarlo;
pub mod pointprocess;
pub mod sensing;
pub mod stats;
pub mod temporal;
pub mod v2i;
pub mod validation;

pub use error::{Error, Result};
