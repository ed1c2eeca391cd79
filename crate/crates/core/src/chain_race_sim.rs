//! Monte Carlo simulation of the honest-vs-attacker block race.
//!
//! Each trial tracks the attacker's deficit: an attacker block shrinks it by
//! one (probability `q`), an honest block grows it by one (probability
//! `p = 1 - q`). Reaching a deficit of zero means the attacker has caught up.
//! The walk gives up once the deficit reaches `deficit_cutoff`, which makes
//! every trial terminate; the bias this introduces is at most
//! `(q/p)^deficit_cutoff`.
//!
//! Trial `i` draws from ChaCha8 stream `i` keyed by the master seed, so the
//! result depends only on the configuration and never on how many threads
//! rayon uses. Two runs that differ only in `deficit_cutoff` see identical
//! trajectories up to the first cutoff, which keeps cutoff comparisons tight.

use rand::RngCore;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Trials handed to rayon as one work item.
pub const TRIALS_PER_BATCH: u64 = 10_000;

/// Name of the generator recorded alongside each result.
pub const RNG_ALGORITHM: &str = "ChaCha8Rng(seed_from_u64(seed), stream = trial index)";

/// Upper bound on the gambler's-ruin tail ignored by the default cutoff.
const CUTOFF_TAIL: f64 = 1e-12;

/// Below this mean the Poisson head start is sampled by sequential inversion.
const INVERSION_MAX_LAMBDA: f64 = 30.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SimMode {
    /// Head start drawn from Poisson(z·q/p), then the catch-up walk.
    PoissonProgress,
    /// Block-by-block race until the honest chain has `z` blocks, then the
    /// catch-up walk.
    BernoulliRace,
}

impl SimMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            SimMode::PoissonProgress => "poisson",
            SimMode::BernoulliRace => "bernoulli",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub q: f64,
    pub z: u64,
    pub trials: u64,
    pub seed: u64,
    pub mode: SimMode,
    pub deficit_cutoff: u64,
}

impl SimConfig {
    /// Configuration with the default deficit cutoff for `(q, z)`.
    pub fn new(q: f64, z: u64, trials: u64, seed: u64, mode: SimMode) -> Result<Self> {
        check_share(q)?;
        let config = SimConfig {
            q,
            z,
            trials,
            seed,
            mode,
            deficit_cutoff: default_deficit_cutoff(q, z),
        };
        config.validate()?;
        Ok(config)
    }

    pub fn with_deficit_cutoff(mut self, deficit_cutoff: u64) -> Result<Self> {
        self.deficit_cutoff = deficit_cutoff;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        check_share(self.q)?;
        if self.trials == 0 {
            return Err(Error::domain("trials must be at least 1"));
        }
        if self.deficit_cutoff <= self.z {
            return Err(Error::domain(format!(
                "deficit cutoff {} must exceed the confirmation depth {}",
                self.deficit_cutoff, self.z
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimResult {
    pub estimate: f64,
    pub standard_error: f64,
    pub successes: u64,
    pub trials: u64,
    /// `None` for the plain catch-up walk.
    pub mode: Option<SimMode>,
    pub seed: u64,
}

impl SimResult {
    fn from_counts(successes: u64, trials: u64, mode: Option<SimMode>, seed: u64) -> Self {
        let estimate = successes as f64 / trials as f64;
        SimResult {
            estimate,
            standard_error: (estimate * (1.0 - estimate) / trials as f64).sqrt(),
            successes,
            trials,
            mode,
            seed,
        }
    }
}

/// `max(z + 30, smallest D with (q/p)^D < 1e-12)`.
pub fn default_deficit_cutoff(q: f64, z: u64) -> u64 {
    let ratio = q / (1.0 - q);
    let mut depth = 1u64;
    let mut tail = ratio;
    while tail >= CUTOFF_TAIL {
        depth += 1;
        tail *= ratio;
    }
    depth.max(z + 30)
}

/// Estimates the probability that an attacker `z` blocks behind ever
/// catches up. `deficit_cutoff = None` selects [`default_deficit_cutoff`].
pub fn simulate_catch_up(
    q: f64,
    z: u64,
    trials: u64,
    seed: u64,
    deficit_cutoff: Option<u64>,
) -> Result<SimResult> {
    let mut config = SimConfig::new(q, z, trials, seed, SimMode::PoissonProgress)?;
    if let Some(cutoff) = deficit_cutoff {
        config = config.with_deficit_cutoff(cutoff)?;
    }
    let walker = Walker::new(&config);
    let successes = run_streams(&config, |rng| walker.walk(rng, z));
    Ok(SimResult::from_counts(successes, trials, None, seed))
}

/// Estimates the double-spend success probability under `config.mode`.
pub fn simulate_double_spend(config: &SimConfig) -> Result<SimResult> {
    config.validate()?;
    let walker = Walker::new(config);
    let z = config.z;
    let successes = match config.mode {
        SimMode::PoissonProgress => {
            let lambda = z as f64 * config.q / (1.0 - config.q);
            let sampler = PoissonSampler::new(lambda);
            run_streams(config, |rng| {
                let head_start = sampler.sample(rng);
                head_start > z || walker.walk(rng, z - head_start)
            })
        }
        SimMode::BernoulliRace => run_streams(config, |rng| {
            let mut attacker = 0u64;
            let mut honest = 0u64;
            while honest < z {
                if walker.attacker_block(rng) {
                    attacker += 1;
                } else {
                    honest += 1;
                }
            }
            attacker >= z || walker.walk(rng, z - attacker)
        }),
    };
    Ok(SimResult::from_counts(
        successes,
        config.trials,
        Some(config.mode),
        config.seed,
    ))
}

fn check_share(q: f64) -> Result<()> {
    if !(0.0..0.5).contains(&q) {
        return Err(Error::domain(format!(
            "simulation needs 0 <= q < 0.5 so the walk has an absorbing failure, got {q}"
        )));
    }
    Ok(())
}

fn run_streams<F>(config: &SimConfig, trial: F) -> u64
where
    F: Fn(&mut ChaCha8Rng) -> bool + Sync,
{
    let base = ChaCha8Rng::seed_from_u64(config.seed);
    let batches = config.trials.div_ceil(TRIALS_PER_BATCH);
    (0..batches)
        .into_par_iter()
        .map(|batch| {
            let start = batch * TRIALS_PER_BATCH;
            let end = (start + TRIALS_PER_BATCH).min(config.trials);
            (start..end)
                .filter(|&index| {
                    let mut rng = base.clone();
                    rng.set_stream(index);
                    trial(&mut rng)
                })
                .count() as u64
        })
        .sum()
}

struct Walker {
    /// An attacker block occurs when a uniform u64 falls below this.
    threshold: u64,
    cutoff: u64,
}

impl Walker {
    fn new(config: &SimConfig) -> Self {
        Walker {
            threshold: (config.q * 2f64.powi(64)) as u64,
            cutoff: config.deficit_cutoff,
        }
    }

    fn attacker_block(&self, rng: &mut ChaCha8Rng) -> bool {
        rng.next_u64() < self.threshold
    }

    fn walk(&self, rng: &mut ChaCha8Rng, start: u64) -> bool {
        let mut deficit = start;
        loop {
            if deficit == 0 {
                return true;
            }
            if deficit >= self.cutoff {
                return false;
            }
            if self.attacker_block(rng) {
                deficit -= 1;
            } else {
                deficit += 1;
            }
        }
    }
}

struct PoissonSampler {
    lambda: f64,
    zero_mass: f64,
}

impl PoissonSampler {
    fn new(lambda: f64) -> Self {
        PoissonSampler {
            lambda,
            zero_mass: (-lambda).exp(),
        }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> u64 {
        if self.lambda < INVERSION_MAX_LAMBDA {
            let u = unit(rng);
            let mut k = 0u64;
            let mut mass = self.zero_mass;
            let mut cdf = mass;
            while u > cdf {
                k += 1;
                mass *= self.lambda / k as f64;
                let next = cdf + mass;
                if next == cdf {
                    break;
                }
                cdf = next;
            }
            k
        } else {
            // Count unit-rate exponential arrivals in [0, λ].
            let mut elapsed = 0.0;
            let mut k = 0u64;
            loop {
                elapsed -= (1.0 - unit(rng)).ln();
                if elapsed > self.lambda {
                    return k;
                }
                k += 1;
            }
        }
    }
}

/// Uniform on [0, 1) with 53 random bits.
fn unit(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}
