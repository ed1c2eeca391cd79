//! Calibration of the monetary model from daily Bitcoin aggregates.
//!
//! Every parameter is a closed-form function of the inputs: per-block
//! aggregates, the fee rate, average transaction size, velocity, transaction
//! capacity of the money stock, and the daily and per-block discount factors.

use crate::error::{Error, Result};
use crate::supply_model::money_growth_rate;
use crate::{BLOCKS_PER_DAY, DAYS_PER_YEAR};

/// Daily aggregates and structural constants feeding [`calibrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationInputs {
    pub tx_per_day: f64,
    pub volume_per_day: f64,
    pub fees_per_day: f64,
    pub supply: f64,
    pub blocks_per_day: u32,
    pub annual_discount: f64,
    pub reward_per_block: f64,
}

impl CalibrationInputs {
    /// 2015 averages.
    pub const PAPER_2015: CalibrationInputs = CalibrationInputs {
        tx_per_day: 122_129.7534,
        volume_per_day: 254_843.1781,
        fees_per_day: 22.459_001_83,
        supply: 14_342_502.95,
        blocks_per_day: BLOCKS_PER_DAY,
        annual_discount: 0.97,
        reward_per_block: 25.0,
    };

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("tx_per_day", self.tx_per_day),
            ("volume_per_day", self.volume_per_day),
            ("fees_per_day", self.fees_per_day),
            ("supply", self.supply),
            ("annual_discount", self.annual_discount),
            ("reward_per_block", self.reward_per_block),
        ];
        for (name, value) in positive {
            if !(value > 0.0) || !value.is_finite() {
                return Err(Error::domain(format!("{name} must be positive, got {value}")));
            }
        }
        if self.blocks_per_day == 0 {
            return Err(Error::domain("blocks_per_day must be positive"));
        }
        if self.annual_discount >= 1.0 {
            return Err(Error::domain(format!(
                "annual_discount must be below 1, got {}",
                self.annual_discount
            )));
        }
        Ok(())
    }
}

impl Default for CalibrationInputs {
    fn default() -> Self {
        Self::PAPER_2015
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibratedParams {
    /// Daily discount factor.
    pub beta: f64,
    /// Per-block discount factor.
    pub delta: f64,
    /// Daily money growth factor.
    pub mu: f64,
    /// Fees as a fraction of volume.
    pub tau: f64,
    /// Number of average-sized transactions the money stock can fund.
    pub capacity: f64,
    /// Fraction of the stock spent per day.
    pub sigma: f64,
    pub alpha: f64,
    pub avg_tx_size: f64,
    /// Confirmation lag in blocks.
    pub confirmation_lag: u64,
    pub tx_per_block: f64,
    pub volume_per_block: f64,
    pub fees_per_block: f64,
}

pub fn per_block(daily_value: f64, blocks_per_day: u32) -> Result<f64> {
    if blocks_per_day == 0 {
        return Err(Error::domain("blocks_per_day must be positive"));
    }
    Ok(daily_value / f64::from(blocks_per_day))
}

pub fn fee_rate(fees_per_block: f64, volume_per_block: f64) -> Result<f64> {
    if !(volume_per_block > 0.0) {
        return Err(Error::domain("fee rate needs positive transaction volume"));
    }
    Ok(fees_per_block / volume_per_block)
}

pub fn avg_transaction_size(volume_per_block: f64, tx_per_block: f64) -> Result<f64> {
    if !(tx_per_block > 0.0) {
        return Err(Error::domain("average size needs a positive transaction count"));
    }
    Ok(volume_per_block / tx_per_block)
}

pub fn velocity(volume_per_day: f64, supply: f64) -> Result<f64> {
    if !(supply > 0.0) {
        return Err(Error::domain("velocity needs positive supply"));
    }
    Ok(volume_per_day / supply)
}

/// `supply / avg_tx_size`, not rounded.
pub fn capacity(supply: f64, avg_tx_size: f64) -> Result<f64> {
    if !(avg_tx_size > 0.0) {
        return Err(Error::domain("capacity needs a positive average transaction size"));
    }
    Ok(supply / avg_tx_size)
}

/// Daily factor whose 365th power is `annual_discount`.
pub fn daily_discount(annual_discount: f64) -> Result<f64> {
    if !(annual_discount > 0.0 && annual_discount < 1.0) {
        return Err(Error::domain(format!(
            "annual discount must lie in (0, 1), got {annual_discount}"
        )));
    }
    Ok(annual_discount.powf(1.0 / f64::from(DAYS_PER_YEAR)))
}

/// `beta^(1 / (1 + confirmation_lag))`.
pub fn per_block_discount(beta: f64, confirmation_lag: u64) -> Result<f64> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::domain(format!("beta must lie in (0, 1), got {beta}")));
    }
    Ok(beta.powf(1.0 / (1.0 + confirmation_lag as f64)))
}

/// Inverts [`per_block_discount`]: `round(ln beta / ln delta) - 1`.
pub fn implied_confirmation_lag(beta: f64, delta: f64) -> Result<u64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::domain(format!("delta must lie in (0, 1), got {delta}")));
    }
    if !(beta > 0.0 && beta < delta) {
        return Err(Error::domain(format!(
            "beta must lie in (0, delta), got beta = {beta}, delta = {delta}"
        )));
    }
    let periods = (beta.ln() / delta.ln()).round();
    Ok(periods as u64 - 1)
}

/// `ln(x + b) - ln(b)`. Requires `b > 0`; at `b = 0` the utility is undefined.
pub fn buyer_utility(x: f64, b: f64) -> Result<f64> {
    if !(b > 0.0) || !b.is_finite() {
        return Err(Error::domain(format!(
            "utility shift b must be positive (log b diverges at 0), got {b}"
        )));
    }
    if !(x >= 0.0) {
        return Err(Error::domain(format!("consumption x must be nonnegative, got {x}")));
    }
    Ok((x / b).ln_1p())
}

/// Step CDF of transaction sizes.
#[derive(Debug, Clone, PartialEq)]
pub struct ShockDistribution {
    /// `(size, P(size' <= size))` for each distinct size, sizes ascending.
    points: Vec<(f64, f64)>,
    sample_count: usize,
}

impl ShockDistribution {
    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn sample_count(&self) -> usize {
        self.sample_count
    }

    /// Fraction of samples at or below `size`.
    pub fn cdf(&self, size: f64) -> f64 {
        let idx = self.points.partition_point(|&(s, _)| s <= size);
        if idx == 0 {
            0.0
        } else {
            self.points[idx - 1].1
        }
    }

    /// Smallest sample size whose cumulative probability reaches `prob`.
    pub fn quantile(&self, prob: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&prob) {
            return Err(Error::domain(format!("quantile level must lie in [0, 1], got {prob}")));
        }
        let idx = self.points.partition_point(|&(_, c)| c < prob);
        Ok(self.points[idx.min(self.points.len() - 1)].0)
    }
}

pub fn empirical_cdf(samples: &[f64]) -> Result<ShockDistribution> {
    if samples.is_empty() {
        return Err(Error::EmptyInput);
    }
    if let Some(bad) = samples.iter().find(|&&s| !(s > 0.0) || !s.is_finite()) {
        return Err(Error::domain(format!("transaction sizes must be positive, got {bad}")));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);

    let n = sorted.len();
    let mut points: Vec<(f64, f64)> = Vec::new();
    for (i, &size) in sorted.iter().enumerate() {
        let cum = (i + 1) as f64 / n as f64;
        match points.last_mut() {
            Some(last) if last.0 == size => last.1 = cum,
            _ => points.push((size, cum)),
        }
    }
    // exact total mass despite rounding in the division
    if let Some(last) = points.last_mut() {
        last.1 = 1.0;
    }
    Ok(ShockDistribution {
        points,
        sample_count: n,
    })
}

/// Runs the full calibration. The confirmation lag is one day of blocks
/// after the transaction's own block, `blocks_per_day - 1`.
pub fn calibrate(inputs: &CalibrationInputs) -> Result<CalibratedParams> {
    inputs.validate()?;
    let bpd = inputs.blocks_per_day;

    let tx_per_block = per_block(inputs.tx_per_day, bpd)?;
    let volume_per_block = per_block(inputs.volume_per_day, bpd)?;
    let fees_per_block = per_block(inputs.fees_per_day, bpd)?;

    let tau = fee_rate(fees_per_block, volume_per_block)?;
    let avg_tx_size = avg_transaction_size(volume_per_block, tx_per_block)?;
    let sigma = velocity(inputs.volume_per_day, inputs.supply)?;
    let capacity = capacity(inputs.supply, avg_tx_size)?;
    let mu = money_growth_rate(inputs.reward_per_block, inputs.supply, bpd)?;

    let beta = daily_discount(inputs.annual_discount)?;
    let confirmation_lag = u64::from(bpd - 1);
    let delta = per_block_discount(beta, confirmation_lag)?;

    Ok(CalibratedParams {
        beta,
        delta,
        mu,
        tau,
        capacity,
        sigma,
        alpha: 1.0,
        avg_tx_size,
        confirmation_lag,
        tx_per_block,
        volume_per_block,
        fees_per_block,
    })
}
