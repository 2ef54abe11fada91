//! Discounted collective risk models (DCRM) with pay-as-you-drive pricing.
//!
//! The total discounted loss over `(0, t]` is
//! `Z_t = sum_{i <= N(t)} X_i * exp(-delta * W_i)` where `N` is a Poisson,
//! non-homogeneous Poisson or Cox (mileage-driven) counting process. The crate
//! provides closed-form and quadrature-based moments and m.g.f.s, a seeded
//! parallel Monte Carlo simulator that serves as the cross-check for every
//! formula, and a PAYD premium engine over mileage paths.

pub mod cli;
pub mod config;
pub mod dcrm;
pub mod distributions;
mod error;
pub mod mileage;
pub mod output;
pub mod payd;
pub mod processes;
pub mod quadrature;
pub mod rng;
pub mod stats;
pub mod validation;

pub use crate::dcrm::{DcrmScenario, SimulationOptions, SimulationResult};
pub use crate::distributions::ClaimDistribution;
pub use crate::error::{Error, Result};
pub use crate::mileage::{MileageModel, MileagePath, Trip, TripLog};
pub use crate::payd::{PaydPolicy, PremiumQuote};
pub use crate::processes::{ArrivalPath, Intensity, IntensityModel, MileageAffine};
