//! Lorenz curves and Gini coefficients over balance snapshots.
//!
//! Every entry counts as one holder. Zero balances are kept: on-chain they
//! are real (emptied) addresses and they shift the curve to the right. Note
//! that addresses are not owners; one entity may control many entries, so
//! these metrics describe the snapshot as given, not personal wealth.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Holding {
    pub holder: String,
    pub balance: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct BalanceSnapshot {
    pub label: String,
    entries: Vec<Holding>,
}

impl BalanceSnapshot {
    pub fn new(label: impl Into<String>, entries: Vec<Holding>) -> Result<Self> {
        if let Some(bad) = entries
            .iter()
            .find(|h| !(h.balance >= 0.0) || !h.balance.is_finite())
        {
            return Err(Error::domain(format!(
                "balance of `{}` must be finite and nonnegative, got {}",
                bad.holder, bad.balance
            )));
        }
        Ok(BalanceSnapshot {
            label: label.into(),
            entries,
        })
    }

    /// Anonymous snapshot with holders named by position.
    pub fn from_balances(balances: &[f64]) -> Result<Self> {
        let entries = balances
            .iter()
            .enumerate()
            .map(|(i, &balance)| Holding {
                holder: i.to_string(),
                balance,
            })
            .collect();
        Self::new("", entries)
    }

    pub fn entries(&self) -> &[Holding] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.entries.iter().map(|h| h.balance).sum()
    }

    fn sorted_balances(&self) -> Result<Vec<f64>> {
        let mut balances: Vec<f64> = self.entries.iter().map(|h| h.balance).collect();
        if !balances.iter().any(|&b| b > 0.0) {
            return Err(Error::domain(
                "inequality metrics need at least one positive balance",
            ));
        }
        balances.sort_by(f64::total_cmp);
        Ok(balances)
    }
}

/// `(population share, wealth share)` points from `(0, 0)` to `(1, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LorenzCurve {
    points: Vec<(f64, f64)>,
}

impl LorenzCurve {
    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    /// Trapezoidal area under the curve; `1/2` for perfect equality.
    pub fn area(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| (w[1].0 - w[0].0) * (w[0].1 + w[1].1) / 2.0)
            .sum()
    }

    /// Gini coefficient as `1 - 2·area`.
    pub fn gini(&self) -> f64 {
        1.0 - 2.0 * self.area()
    }
}

pub fn lorenz_curve(snapshot: &BalanceSnapshot) -> Result<LorenzCurve> {
    let balances = snapshot.sorted_balances()?;
    let n = balances.len() as f64;
    let total: f64 = balances.iter().sum();

    let mut points = Vec::with_capacity(balances.len() + 1);
    points.push((0.0, 0.0));
    let mut running = 0.0;
    for (i, b) in balances.iter().enumerate() {
        running += b;
        points.push(((i + 1) as f64 / n, running / total));
    }
    // pin the endpoint against summation rounding
    if let Some(last) = points.last_mut() {
        *last = (1.0, 1.0);
    }
    Ok(LorenzCurve { points })
}

/// `Σ_i (2i - n - 1)·x_(i) / (n²·mean)` over ascending balances, `i` from 1.
pub fn gini(snapshot: &BalanceSnapshot) -> Result<f64> {
    let balances = snapshot.sorted_balances()?;
    let n = balances.len() as f64;
    let total: f64 = balances.iter().sum();
    let weighted: f64 = balances
        .iter()
        .enumerate()
        .map(|(i, &x)| (2.0 * (i + 1) as f64 - n - 1.0) * x)
        .sum();
    Ok((weighted / (n * total)).max(0.0))
}
