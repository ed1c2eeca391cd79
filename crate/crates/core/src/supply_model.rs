//! Block subsidy schedule and the monetary rates derived from it.
//!
//! Amounts are tracked in integer base units (1e-8 BTC) so halvings truncate
//! exactly like the reference client and the running total can never drift
//! past the cap. Public functions take and return decimal BTC.

use std::fmt;

use crate::error::{Error, Result};
use crate::{BLOCKS_PER_DAY, DAYS_PER_YEAR};

pub const BASE_UNITS_PER_BTC: u64 = 100_000_000;

/// A currency amount in base units.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Amount(u64);

impl Amount {
    pub const ZERO: Amount = Amount(0);

    pub const fn from_base_units(units: u64) -> Self {
        Amount(units)
    }

    /// Rounds to the nearest base unit.
    pub fn from_btc(btc: f64) -> Result<Self> {
        if !btc.is_finite() || btc < 0.0 {
            return Err(Error::domain(format!("amount must be a finite nonnegative BTC value, got {btc}")));
        }
        let units = (btc * BASE_UNITS_PER_BTC as f64).round();
        if units > u64::MAX as f64 {
            return Err(Error::domain(format!("amount {btc} BTC overflows base units")));
        }
        Ok(Amount(units as u64))
    }

    pub const fn base_units(self) -> u64 {
        self.0
    }

    pub fn to_btc(self) -> f64 {
        self.0 as f64 / BASE_UNITS_PER_BTC as f64
    }
}

impl fmt::Display for Amount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}.{:08}",
            self.0 / BASE_UNITS_PER_BTC,
            self.0 % BASE_UNITS_PER_BTC
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SupplySchedule {
    initial_reward: Amount,
    halving_interval: u64,
    max_supply: Amount,
    blocks_per_day: u32,
}

impl Default for SupplySchedule {
    /// 50 BTC initial subsidy halving every 210 000 blocks, 21M cap,
    /// 144 blocks per day.
    fn default() -> Self {
        SupplySchedule {
            initial_reward: Amount(50 * BASE_UNITS_PER_BTC),
            halving_interval: 210_000,
            max_supply: Amount(21_000_000 * BASE_UNITS_PER_BTC),
            blocks_per_day: BLOCKS_PER_DAY,
        }
    }
}

impl SupplySchedule {
    pub fn new(
        initial_reward_btc: f64,
        halving_interval: u64,
        max_supply_btc: f64,
        blocks_per_day: u32,
    ) -> Result<Self> {
        let initial_reward = Amount::from_btc(initial_reward_btc)?;
        let max_supply = Amount::from_btc(max_supply_btc)?;
        if initial_reward == Amount::ZERO {
            return Err(Error::domain("initial reward must be positive"));
        }
        if max_supply == Amount::ZERO {
            return Err(Error::domain("max supply must be positive"));
        }
        if halving_interval == 0 {
            return Err(Error::domain("halving interval must be positive"));
        }
        if blocks_per_day == 0 {
            return Err(Error::domain("blocks per day must be positive"));
        }
        Ok(SupplySchedule {
            initial_reward,
            halving_interval,
            max_supply,
            blocks_per_day,
        })
    }

    pub fn initial_reward(&self) -> Amount {
        self.initial_reward
    }

    pub fn halving_interval(&self) -> u64 {
        self.halving_interval
    }

    pub fn max_supply(&self) -> Amount {
        self.max_supply
    }

    pub fn blocks_per_day(&self) -> u32 {
        self.blocks_per_day
    }

    pub fn era(&self, height: u64) -> u64 {
        height / self.halving_interval
    }

    pub fn block_reward(&self, height: u64) -> Amount {
        halved(self.initial_reward, self.era(height))
    }

    /// Total issued by blocks `0..height`, capped at `max_supply`.
    pub fn cumulative_supply(&self, height: u64) -> Amount {
        let full_eras = self.era(height);
        let partial = u128::from(height % self.halving_interval);
        let interval = u128::from(self.halving_interval);

        let mut total: u128 = (0..full_eras.min(64))
            .map(|era| u128::from(halved(self.initial_reward, era).0) * interval)
            .sum();
        total += u128::from(halved(self.initial_reward, full_eras).0) * partial;

        Amount(total.min(u128::from(self.max_supply.0)) as u64)
    }
}

fn halved(reward: Amount, era: u64) -> Amount {
    if era >= 64 {
        Amount::ZERO
    } else {
        Amount(reward.0 >> era)
    }
}

/// Supply, subsidy and growth rates at a given height.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonetarySnapshot {
    pub supply: f64,
    pub reward: f64,
    pub mu_daily: f64,
    pub annual_inflation: f64,
}

/// Block subsidy in BTC at `height`.
pub fn block_reward(schedule: &SupplySchedule, height: u64) -> f64 {
    schedule.block_reward(height).to_btc()
}

/// BTC issued by blocks `0..height`.
pub fn cumulative_supply(schedule: &SupplySchedule, height: u64) -> f64 {
    schedule.cumulative_supply(height).to_btc()
}

/// Daily growth factor `(1 + reward/supply)^blocks_per_day`.
pub fn money_growth_rate(reward: f64, supply: f64, blocks_per_day: u32) -> Result<f64> {
    if !(supply > 0.0) || !supply.is_finite() {
        return Err(Error::domain(format!("supply must be positive, got {supply}")));
    }
    if !(reward >= 0.0) || !reward.is_finite() {
        return Err(Error::domain(format!("reward must be nonnegative, got {reward}")));
    }
    Ok((1.0 + reward / supply).powi(blocks_per_day as i32))
}

/// `mu_daily^365 - 1`.
pub fn annualized_inflation(mu_daily: f64) -> Result<f64> {
    if !(mu_daily > 0.0) || !mu_daily.is_finite() {
        return Err(Error::domain(format!("growth factor must be positive, got {mu_daily}")));
    }
    Ok(mu_daily.powi(DAYS_PER_YEAR as i32) - 1.0)
}

/// Monetary state after `height` blocks. Fails at height 0, where nothing
/// has been issued yet and the growth rate is undefined.
pub fn monetary_snapshot(schedule: &SupplySchedule, height: u64) -> Result<MonetarySnapshot> {
    let supply = cumulative_supply(schedule, height);
    let reward = block_reward(schedule, height);
    let mu_daily = money_growth_rate(reward, supply, schedule.blocks_per_day())?;
    Ok(MonetarySnapshot {
        supply,
        reward,
        mu_daily,
        annual_inflation: annualized_inflation(mu_daily)?,
    })
}
