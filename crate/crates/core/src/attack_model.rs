//! Closed-form double-spend mathematics.
//!
//! The honest chain and the attacker chain race block by block: each new
//! block belongs to the attacker with probability `q` and to the honest
//! network with probability `p = 1 - q`. From a deficit of `z` blocks the
//! attacker ever reaches breakeven with probability `(q/p)^z` when `p > q`
//! (the gambler's-ruin result) and with certainty otherwise.
//!
//! While the recipient waits for `z` confirmations the attacker's hidden
//! progress is modelled as Poisson with mean `λ = z·q/p`; weighting the
//! catch-up probability by that distribution gives the double-spend risk.

use crate::error::{Error, Result};

/// Depths scanned by [`min_confirmations`] before giving up.
pub const MAX_CONFIRMATION_SCAN: u64 = 1_000_000;

/// `e^{-λ}` is evaluated directly below this mean; above it the Poisson
/// weights are accumulated in log space so they do not underflow.
const LOG_SPACE_LAMBDA: f64 = 700.0;

/// Attacker hash share and confirmation depth.
///
/// The honest share is always derived as `1 - q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttackScenario {
    q: f64,
    z: u64,
}

impl AttackScenario {
    pub fn new(q: f64, z: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::domain(format!(
                "attacker share q must lie in [0, 1], got {q}"
            )));
        }
        Ok(AttackScenario { q, z })
    }

    /// Attacker share of hash power.
    pub fn q(&self) -> f64 {
        self.q
    }

    /// Honest share of hash power.
    pub fn p(&self) -> f64 {
        1.0 - self.q
    }

    /// Confirmation depth.
    pub fn z(&self) -> u64 {
        self.z
    }

    /// True when the honest network is strictly stronger than the attacker.
    /// A tie falls on the attacker's side.
    pub fn honest_majority(&self) -> bool {
        self.p() > self.q
    }

    /// Expected attacker progress `z·q/p`; infinite when `p = 0`.
    pub fn lambda(&self) -> f64 {
        let p = self.p();
        if p == 0.0 {
            f64::INFINITY
        } else {
            self.z as f64 * self.q / p
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiskResult {
    pub probability: f64,
    pub lambda: f64,
}

/// Probability that an attacker `z` blocks behind ever catches up.
pub fn catch_up_probability(scenario: &AttackScenario) -> f64 {
    if !scenario.honest_majority() {
        return 1.0;
    }
    let ratio = scenario.q() / scenario.p();
    pow_u64(ratio, scenario.z())
}

/// Probability that a double-spend succeeds after `z` confirmations.
///
/// The Poisson-weighted catch-up series rearranges to the finite form
/// `1 - Σ_{k=0}^{z} Poisson(k; λ)·(1 - (q/p)^{z-k})`. Expanding the bracket,
/// that is `Σ_{k≤z} Poisson(k; λ)·(q/p)^{z-k} + P(K > z)`; both parts are
/// sums of positive terms, so evaluating it this way keeps full relative
/// precision where `1 - Σ` would cancel down to rounding noise. Since
/// `λ < z + 1`, the upper tail's terms shrink geometrically and are summed
/// until the bounded remainder drops below machine precision.
pub fn double_spend_probability(scenario: &AttackScenario) -> Result<RiskResult> {
    if scenario.p() <= 0.0 {
        return Err(Error::domain(
            "double-spend probability needs q < 1 so that λ is finite",
        ));
    }
    let lambda = scenario.lambda();
    if !scenario.honest_majority() {
        return Ok(RiskResult {
            probability: 1.0,
            lambda,
        });
    }

    let z = scenario.z();
    let ratio = scenario.q() / scenario.p();
    let mut weights = PoissonWeights::new(lambda);

    let mut head = 0.0;
    for k in 0..=z {
        head += weights.next_weight() * pow_u64(ratio, z - k);
    }

    let mut tail = 0.0;
    let mut k = z + 1;
    let mut term = weights.next_weight();
    while term > 0.0 {
        tail += term;
        let shrink = lambda / (k + 1) as f64;
        // remaining mass ≤ term·shrink / (1 - shrink)
        if term * shrink / (1.0 - shrink) <= f64::EPSILON * 0.25 * tail {
            break;
        }
        term *= shrink;
        k += 1;
    }

    Ok(RiskResult {
        probability: (head + tail).clamp(0.0, 1.0),
        lambda,
    })
}

/// Successive Poisson probabilities `λ^k e^{-λ} / k!` for `k = 0, 1, ...`,
/// multiplied forward directly for moderate means and accumulated in log
/// space once `e^{-λ}` would underflow.
struct PoissonWeights {
    lambda: f64,
    ln_lambda: f64,
    k: u64,
    weight: f64,
    ln_weight: f64,
    log_space: bool,
}

impl PoissonWeights {
    fn new(lambda: f64) -> Self {
        PoissonWeights {
            lambda,
            ln_lambda: lambda.ln(),
            k: 0,
            weight: (-lambda).exp(),
            ln_weight: -lambda,
            log_space: lambda >= LOG_SPACE_LAMBDA,
        }
    }

    fn next_weight(&mut self) -> f64 {
        let current = if self.log_space {
            self.ln_weight.exp()
        } else {
            self.weight
        };
        self.k += 1;
        if self.log_space {
            self.ln_weight += self.ln_lambda - (self.k as f64).ln();
        } else {
            self.weight *= self.lambda / self.k as f64;
        }
        current
    }
}

/// Smallest depth `z` whose double-spend probability is strictly below
/// `epsilon`.
///
/// The risk is nonincreasing in `z`, so the first passing depth is located
/// by doubling followed by bisection; the answer equals that of a scan
/// `z = 0, 1, 2, ...`.
pub fn min_confirmations(q: f64, epsilon: f64) -> Result<u64> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::domain(format!(
            "epsilon must lie strictly between 0 and 1, got {epsilon}"
        )));
    }
    // validates q
    AttackScenario::new(q, 0)?;
    if q >= 0.5 {
        return Err(Error::NoFiniteDepth { q });
    }

    let passes = |z: u64| -> Result<bool> {
        Ok(double_spend_probability(&AttackScenario::new(q, z)?)?.probability < epsilon)
    };

    // z = 0 always has risk 1
    let mut below = 0u64;
    let mut above = 1u64;
    while !passes(above)? {
        if above >= MAX_CONFIRMATION_SCAN {
            return Err(Error::DepthSearchExhausted {
                depth: MAX_CONFIRMATION_SCAN,
                epsilon,
            });
        }
        below = above;
        above = (above * 2).min(MAX_CONFIRMATION_SCAN);
    }
    while above - below > 1 {
        let mid = below + (above - below) / 2;
        if passes(mid)? {
            above = mid;
        } else {
            below = mid;
        }
    }
    Ok(above)
}

fn pow_u64(base: f64, exp: u64) -> f64 {
    match i32::try_from(exp) {
        Ok(e) => base.powi(e),
        Err(_) => base.powf(exp as f64),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Direct evaluation of the infinite Poisson-weighted series, truncated
    /// once the remaining Poisson mass is below 1e-15.
    fn truncated_series(q: f64, z: u64) -> f64 {
        let p = 1.0 - q;
        let lambda = z as f64 * q / p;
        let ratio = q / p;
        let mut weight = (-lambda).exp();
        let mut mass = 0.0;
        let mut total = 0.0;
        let mut k = 0u64;
        loop {
            let catch_up = if k <= z {
                ratio.powi((z - k) as i32)
            } else {
                1.0
            };
            total += weight * catch_up;
            mass += weight;
            if k > z && 1.0 - mass < 1e-15 {
                break;
            }
            k += 1;
            weight *= lambda / k as f64;
        }
        total
    }

    fn scenario(q: f64, z: u64) -> AttackScenario {
        AttackScenario::new(q, z).unwrap()
    }

    #[test]
    fn catch_up_examples() {
        assert_eq!(catch_up_probability(&scenario(0.6, 10)), 1.0);
        assert_eq!(catch_up_probability(&scenario(0.3, 0)), 1.0);
        let v = catch_up_probability(&scenario(0.1, 2));
        assert!((v - 1.0 / 81.0).abs() < 1e-15, "{v}");
    }

    #[test]
    fn tie_counts_as_attacker_win() {
        assert_eq!(catch_up_probability(&scenario(0.5, 7)), 1.0);
        assert_eq!(double_spend_probability(&scenario(0.5, 7)).unwrap().probability, 1.0);
    }

    #[test]
    fn rejects_out_of_range_share() {
        assert!(AttackScenario::new(-0.01, 1).is_err());
        assert!(AttackScenario::new(1.5, 1).is_err());
        assert!(AttackScenario::new(f64::NAN, 1).is_err());
        assert!(double_spend_probability(&scenario(1.0, 3)).is_err());
    }

    #[test]
    fn geometric_ratio_is_exact() {
        for &q in &[0.05, 0.1, 0.25, 0.45] {
            let ratio = q / (1.0 - q);
            for z in 0..30 {
                let a = catch_up_probability(&scenario(q, z));
                let b = catch_up_probability(&scenario(q, z + 1));
                assert!(b < a);
                assert!((b / a - ratio).abs() < 1e-12 * ratio);
            }
        }
    }

    #[test]
    fn zero_depth_is_certain() {
        for &q in &[0.0, 0.1, 0.3, 0.49, 0.7] {
            let r = double_spend_probability(&scenario(q, 0)).unwrap();
            assert_eq!(r.probability, 1.0);
            assert_eq!(r.lambda, 0.0);
        }
    }

    #[test]
    fn frozen_double_spend_values() {
        // Values from a 40-digit evaluation of the truncated series.
        let cases = [
            (0.1, 5, 9.136_821_879_277_744e-4),
            (0.3, 5, 0.177_352_311_360_945_1),
            (0.1, 2, 0.050_977_892_839_338_62),
        ];
        for (q, z, expected) in cases {
            let got = double_spend_probability(&scenario(q, z)).unwrap().probability;
            assert!((got - expected).abs() < 1e-13, "q={q} z={z}: {got}");
            assert!((truncated_series(q, z) - expected).abs() < 1e-13);
        }
        let r = double_spend_probability(&scenario(0.1, 5)).unwrap();
        assert!((r.lambda - 5.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn finite_form_matches_series_on_grid() {
        for step in 1..=9 {
            let q = step as f64 * 0.05;
            for z in 0..=30 {
                let finite = double_spend_probability(&scenario(q, z)).unwrap().probability;
                let series = truncated_series(q, z);
                assert!((finite - series).abs() <= 1e-12, "q={q} z={z}");
            }
        }
    }

    #[test]
    fn nonincreasing_in_depth_and_above_lead_tail() {
        for step in 1..=9 {
            let q = step as f64 * 0.05;
            let mut prev = f64::INFINITY;
            for z in 0..=30 {
                let r = double_spend_probability(&scenario(q, z)).unwrap();
                assert!((0.0..=1.0).contains(&r.probability));
                assert!(r.probability <= prev, "q={q} z={z}");
                prev = r.probability;

                // Poisson mass where the attacker is already ahead.
                let mut weight = (-r.lambda).exp();
                let mut head = 0.0;
                for k in 0..=z {
                    head += weight;
                    weight *= r.lambda / (k + 1) as f64;
                }
                let lead_tail = (1.0 - head).max(0.0);
                assert!(r.probability + 1e-15 >= lead_tail, "q={q} z={z}");
            }
        }
    }

    #[test]
    fn approaches_one_near_parity() {
        for z in 0..=10 {
            let r = double_spend_probability(&scenario(0.4999, z)).unwrap();
            assert!(r.probability > 0.99, "z={z}: {}", r.probability);
        }
    }

    #[test]
    fn tiny_risks_keep_relative_precision() {
        // 50-digit evaluations of head sum + regularized incomplete gamma tail.
        // z = 1049 and 1051 straddle the log-space switch at λ = 700.
        let cases = [
            (0.05, 19, 1.876_424_112_567_881_2e-17),
            (0.1, 40, 1.027_746_149_419_980_8e-23),
            (0.4, 1049, 7.328_312_313_589_060_2e-34),
            (0.4, 1051, 6.343_458_361_944_012_1e-34),
        ];
        for (q, z, expected) in cases {
            let got = double_spend_probability(&scenario(q, z)).unwrap().probability;
            assert!(((got - expected) / expected).abs() < 1e-9, "q={q} z={z}: {got}");
        }
    }

    #[test]
    fn min_confirmation_golden_values() {
        assert_eq!(min_confirmations(0.1, 0.001).unwrap(), 5);
        // Scan of the truncated series gives 24.
        assert_eq!(min_confirmations(0.3, 0.001).unwrap(), 24);
        // Risk at z = 0 is exactly 1, so the first passing depth is 1.
        assert_eq!(min_confirmations(0.45, 0.999_999).unwrap(), 1);
    }

    #[test]
    fn min_confirmations_matches_series_scan() {
        for &(q, eps) in &[(0.1, 0.001), (0.3, 0.001), (0.2, 1e-6), (0.05, 0.01)] {
            let mut z = 0;
            while truncated_series(q, z) >= eps {
                z += 1;
            }
            assert_eq!(min_confirmations(q, eps).unwrap(), z, "q={q} eps={eps}");
        }
    }

    #[test]
    fn min_confirmations_errors() {
        assert_eq!(
            min_confirmations(0.5, 0.001),
            Err(Error::NoFiniteDepth { q: 0.5 })
        );
        assert!(matches!(min_confirmations(0.1, 0.0), Err(Error::Domain(_))));
        assert!(matches!(min_confirmations(0.1, 1.0), Err(Error::Domain(_))));
        assert_eq!(
            min_confirmations(0.4999, 1e-300),
            Err(Error::DepthSearchExhausted {
                depth: MAX_CONFIRMATION_SCAN,
                epsilon: 1e-300
            })
        );
        assert!(min_confirmations(0.1, 1e-300).unwrap() > 200);
    }
}
