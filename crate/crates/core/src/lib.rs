//! Equilibrium search for budget-constrained AIS inspection games between
//! counties.

pub mod dynamics;
pub mod error;
pub mod experiment;
pub mod fixtures;
pub mod game;
pub mod instance_io;
pub mod solver;

pub use error::{Error, Result};
pub use game::{Instance, StrategyProfile, UtilityKind, Weight};
