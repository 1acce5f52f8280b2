//! Electric bus corridor simulation and diesel vs battery-electric cost engine.
//!
//! The crate is organised around five pieces:
//!
//! * [`route`]: corridor geometry, service calendar and diesel baseline operations.
//! * [`demand`]: seeded passenger synthesis (Poisson arrivals, direction and alighting draws).
//! * [`sim`]: minute-stepped fleet simulation with batteries and terminal fast chargers.
//! * [`tco`]: total cost of ownership, emissions and breakeven analysis.
//! * [`sweep`]: grid search over fleet size, battery size and charger count.
//!
//! [`scenario`] ties them together into a single validated configuration and
//! [`report`] turns results into the CSV/JSON files the command line tool writes.
//!
//! The cost and formula code is generic over [`Scalar`]; the aliases at the crate root fix it
//! to `f64`, which is what the simulator and the command line tool use.

pub mod demand;
pub mod error;
pub mod report;
pub mod route;
pub mod scalar;
pub mod scenario;
pub mod sim;
pub mod sweep;
pub mod tco;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type DieselCostModel = tco::DieselCostModel<f64>;
pub type BebCostModel = tco::BebCostModel<f64>;
pub type GridEmissionTrajectory = tco::GridEmissionTrajectory<f64>;
pub type TcoResult = tco::TcoResult<f64>;
pub type YearCost = tco::YearCost<f64>;
pub type Breakeven = tco::Breakeven<f64>;
pub type EmissionGap = tco::EmissionGap<f64>;
