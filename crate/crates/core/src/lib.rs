//! Quantitative toolkit for Bitcoin economics.
//!
//! * [`attack_model`]: closed-form double-spend probabilities for an
//!   attacker racing the honest chain.
//! * [`chain_race_sim`]: seeded, parallel Monte Carlo of the same race.
//! * [`supply_model`]: block reward halvings, cumulative supply, money growth.
//! * [`calibration`]: daily-aggregate calibration of discount factors, fee
//!   rate, velocity and transaction capacity.
//! * [`distribution_analytics`]: Lorenz curves and Gini coefficients.
//! * [`data_io`]: input parsers and result emitters used by the CLI.

pub mod attack_model;
pub mod calibration;
pub mod chain_race_sim;
pub mod cli;
pub mod data_io;
pub mod distribution_analytics;
pub mod error;
pub mod supply_model;

pub use error::{Error, Result};

/// Average block interval in minutes.
pub const BLOCK_INTERVAL_MINUTES: u32 = 10;
/// Blocks per day at the average block interval (6 per hour × 24 hours).
pub const BLOCKS_PER_DAY: u32 = 6 * 24;
/// Days per year used for every annualization.
pub const DAYS_PER_YEAR: u32 = 365;
