//! Command-line surface.

use std::fs::File;
use std::io::{self, Read};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::attack_model::{catch_up_probability, double_spend_probability, min_confirmations, AttackScenario};
use crate::calibration::{buyer_utility, calibrate, empirical_cdf, implied_confirmation_lag};
use crate::chain_race_sim::{simulate_double_spend, SimConfig, SimMode, RNG_ALGORITHM};
use crate::data_io::{
    emit, parse_calibration_inputs, parse_shock_samples, parse_snapshot, Format, InputSource,
    ResultDocument, Series, SourcedInputs, Value,
};
use crate::distribution_analytics::{gini, lorenz_curve};
use crate::error::{Error, Result};
use crate::supply_model::{annualized_inflation, money_growth_rate, SupplySchedule};

#[derive(Debug, Parser)]
#[command(name = "chainecon", version, about = "Bitcoin double-spend risk, supply schedule, calibration and wealth inequality")]
pub struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Table)]
    pub format: OutputFormat,

    /// RNG seed; a random seed is drawn and recorded when omitted.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Table,
    Keyvalue,
    Csv,
}

impl From<OutputFormat> for Format {
    fn from(f: OutputFormat) -> Self {
        match f {
            OutputFormat::Table => Format::Table,
            OutputFormat::Keyvalue => Format::KeyValue,
            OutputFormat::Csv => Format::Csv,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// 2015 aggregates; q = 0.1, z = 5 with a z = 0..10 series for attack-prob.
    #[value(name = "paper-2015")]
    Paper2015,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Poisson,
    Bernoulli,
}

impl From<ModeArg> for SimMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Poisson => SimMode::PoissonProgress,
            ModeArg::Bernoulli => SimMode::BernoulliRace,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Catch-up and double-spend probabilities for one attacker share.
    AttackProb(AttackProbArgs),
    /// Smallest confirmation depth pushing double-spend risk below epsilon.
    AttackConfirmations {
        #[arg(long, value_parser = parse_probability)]
        q: f64,
        #[arg(long, value_parser = parse_open_unit)]
        epsilon: f64,
    },
    /// Monte Carlo estimate of the double-spend probability.
    AttackSimulate(AttackSimulateArgs),
    /// Block reward, cumulative supply and money growth.
    Supply(SupplyArgs),
    /// Derive the calibrated parameter table from daily aggregates.
    Calibrate(CalibrateArgs),
    /// Inequality metrics over a balance snapshot.
    Wealth {
        #[command(subcommand)]
        metric: WealthMetric,
    },
}

#[derive(Debug, Args)]
pub struct AttackProbArgs {
    #[arg(long, value_parser = parse_probability, required_unless_present = "preset")]
    pub q: Option<f64>,
    #[arg(long, required_unless_present = "preset")]
    pub z: Option<u64>,
    /// Also emit a series for z = 0..=N.
    #[arg(long)]
    pub series_max_z: Option<u64>,
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
}

#[derive(Debug, Args)]
pub struct AttackSimulateArgs {
    #[arg(long, value_parser = parse_probability)]
    pub q: f64,
    #[arg(long)]
    pub z: u64,
    #[arg(long, default_value_t = 1_000_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub trials: u64,
    #[arg(long, value_enum, default_value_t = ModeArg::Poisson)]
    pub mode: ModeArg,
    /// Deficit at which a trial counts as a failed attack.
    #[arg(long)]
    pub deficit_cutoff: Option<u64>,
}

#[derive(Debug, Args)]
pub struct SupplyArgs {
    /// Report the schedule state after this many blocks.
    #[arg(long, conflicts_with = "inflation", required_unless_present = "inflation")]
    pub height: Option<u64>,
    /// Report growth and inflation for an explicit reward and supply.
    #[arg(long, requires_all = ["reward", "supply"])]
    pub inflation: bool,
    #[arg(long)]
    pub reward: Option<f64>,
    #[arg(long)]
    pub supply: Option<f64>,
    #[arg(long, default_value_t = 144)]
    pub blocks_per_day: u32,
    #[arg(long, default_value_t = 50.0)]
    pub initial_reward: f64,
    #[arg(long, default_value_t = 210_000)]
    pub halving_interval: u64,
    #[arg(long, default_value_t = 21_000_000.0)]
    pub max_supply: f64,
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    /// `key = value` input file, `-` for stdin. Flags override file values.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    #[arg(long)]
    pub tx_per_day: Option<String>,
    #[arg(long)]
    pub volume_per_day: Option<String>,
    #[arg(long)]
    pub fees_per_day: Option<String>,
    #[arg(long)]
    pub supply: Option<String>,
    #[arg(long)]
    pub blocks_per_day: Option<String>,
    #[arg(long)]
    pub annual_discount: Option<String>,
    #[arg(long)]
    pub reward_per_block: Option<String>,
    /// Evaluate the buyer utility ln(x + b) - ln(b) at this x.
    #[arg(long)]
    pub utility_x: Option<f64>,
    /// Utility shift b; must be positive since ln(b) diverges at 0.
    #[arg(long, default_value_t = 0.01)]
    pub utility_b: f64,
    /// Transaction-size samples, one per line, `-` for stdin.
    #[arg(long)]
    pub shock_samples: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum WealthMetric {
    Gini {
        /// `holder,balance` CSV, `-` for stdin.
        #[arg(long)]
        snapshot: PathBuf,
    },
    Lorenz {
        #[arg(long)]
        snapshot: PathBuf,
    },
}

fn parse_probability(s: &str) -> std::result::Result<f64, String> {
    let x: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if (0.0..=1.0).contains(&x) {
        Ok(x)
    } else {
        Err(format!("{x} is not a probability in [0, 1]"))
    }
}

fn parse_open_unit(s: &str) -> std::result::Result<f64, String> {
    let x: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if x > 0.0 && x < 1.0 {
        Ok(x)
    } else {
        Err(format!("{x} must lie strictly between 0 and 1"))
    }
}

fn open_input(path: &Path) -> Result<Box<dyn Read>> {
    if path.as_os_str() == "-" {
        Ok(Box::new(io::stdin()))
    } else {
        File::open(path)
            .map(|f| Box::new(f) as Box<dyn Read>)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))
    }
}

/// Runs a parsed command and renders the result.
pub fn run(cli: Cli) -> Result<String> {
    let seed = cli.seed.unwrap_or_else(rand::random);
    let mut doc = execute(&cli.command, seed)?;
    doc.metadata.seed = Some(seed);
    doc.metadata.timestamp = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .ok()
        .map(|d| d.as_secs());
    Ok(emit(&doc, cli.format.into()))
}

pub fn execute(command: &Command, seed: u64) -> Result<ResultDocument> {
    match command {
        Command::AttackProb(args) => attack_prob(args),
        Command::AttackConfirmations { q, epsilon } => {
            let depth = min_confirmations(*q, *epsilon)?;
            let mut doc = ResultDocument::new("attack-confirmations");
            doc.input("q", *q).input("epsilon", *epsilon);
            let risk = double_spend_probability(&AttackScenario::new(*q, depth)?)?;
            doc.output("min_confirmations", depth)
                .output("double_spend_probability", risk.probability);
            Ok(doc)
        }
        Command::AttackSimulate(args) => attack_simulate(args, seed),
        Command::Supply(args) => supply(args),
        Command::Calibrate(args) => calibrate_cmd(args),
        Command::Wealth { metric } => wealth(metric),
    }
}

fn attack_prob(args: &AttackProbArgs) -> Result<ResultDocument> {
    let preset = args.preset == Some(Preset::Paper2015);
    let q = args.q.or(preset.then_some(0.1)).ok_or_else(|| Error::domain("missing --q"))?;
    let z = args.z.or(preset.then_some(5)).ok_or_else(|| Error::domain("missing --z"))?;
    let series_max = args.series_max_z.or(preset.then_some(10));

    let scenario = AttackScenario::new(q, z)?;
    let mut doc = ResultDocument::new("attack-prob");
    doc.input("q", q).input("z", z);
    if q >= 1.0 {
        // λ is infinite; the attacker wins with certainty.
        doc.output("p", 0.0)
            .output("catch_up_probability", 1.0)
            .output("double_spend_probability", 1.0);
        return Ok(doc);
    }
    let risk = double_spend_probability(&scenario)?;
    doc.output("p", scenario.p())
        .output("lambda", risk.lambda)
        .output("catch_up_probability", catch_up_probability(&scenario))
        .output("double_spend_probability", risk.probability);

    if let Some(max_z) = series_max {
        let mut series = Series {
            columns: vec!["z".into(), "catch_up".into(), "double_spend".into()],
            rows: Vec::new(),
        };
        for depth in 0..=max_z {
            let s = AttackScenario::new(q, depth)?;
            series.rows.push(vec![
                Value::from(depth),
                catch_up_probability(&s).into(),
                double_spend_probability(&s)?.probability.into(),
            ]);
        }
        doc.series = Some(series);
    }
    Ok(doc)
}

fn attack_simulate(args: &AttackSimulateArgs, seed: u64) -> Result<ResultDocument> {
    let mut config = SimConfig::new(args.q, args.z, args.trials, seed, args.mode.into())?;
    if let Some(cutoff) = args.deficit_cutoff {
        config = config.with_deficit_cutoff(cutoff)?;
    }
    let result = simulate_double_spend(&config)?;
    let closed = double_spend_probability(&AttackScenario::new(args.q, args.z)?)?.probability;

    let mut doc = ResultDocument::new("attack-simulate");
    doc.input("q", args.q)
        .input("z", args.z)
        .input("trials", args.trials)
        .input("mode", config.mode.as_str())
        .input("deficit_cutoff", config.deficit_cutoff)
        .input("rng", RNG_ALGORITHM);
    doc.output("estimate", result.estimate)
        .output("standard_error", result.standard_error)
        .output("successes", result.successes)
        .output("closed_form", closed);
    if result.standard_error > 0.0 {
        doc.output("z_score", (result.estimate - closed) / result.standard_error);
    }
    Ok(doc)
}

fn supply(args: &SupplyArgs) -> Result<ResultDocument> {
    let mut doc = ResultDocument::new("supply");
    if args.inflation {
        let (reward, supply) = args
            .reward
            .zip(args.supply)
            .ok_or_else(|| Error::domain("--inflation needs --reward and --supply"))?;
        let mu = money_growth_rate(reward, supply, args.blocks_per_day)?;
        let annual = annualized_inflation(mu)?;
        doc.input("reward", reward)
            .input("supply", supply)
            .input("blocks_per_day", args.blocks_per_day);
        doc.output("mu_daily", mu)
            .output("annual_inflation", annual)
            .output("annual_inflation_percent", 100.0 * annual);
        return Ok(doc);
    }

    let height = args.height.ok_or_else(|| Error::domain("need --height or --inflation"))?;
    let schedule = SupplySchedule::new(
        args.initial_reward,
        args.halving_interval,
        args.max_supply,
        args.blocks_per_day,
    )?;
    let supply = schedule.cumulative_supply(height);
    let reward = schedule.block_reward(height);
    doc.input("height", height)
        .input("initial_reward", args.initial_reward)
        .input("halving_interval", args.halving_interval)
        .input("max_supply", args.max_supply)
        .input("blocks_per_day", args.blocks_per_day);
    doc.output("era", schedule.era(height))
        .output("block_reward", reward.to_btc())
        .output("cumulative_supply", supply.to_btc())
        .output("cumulative_supply_exact", supply.to_string());
    if supply.base_units() > 0 {
        let mu = money_growth_rate(reward.to_btc(), supply.to_btc(), args.blocks_per_day)?;
        doc.output("mu_daily", mu)
            .output("annual_inflation", annualized_inflation(mu)?);
    }
    Ok(doc)
}

fn calibrate_cmd(args: &CalibrateArgs) -> Result<ResultDocument> {
    let mut sourced = match &args.input {
        Some(path) => parse_calibration_inputs(open_input(path)?)?,
        None => SourcedInputs::default(),
    };
    let flags = [
        ("tx_per_day", &args.tx_per_day),
        ("volume_per_day", &args.volume_per_day),
        ("fees_per_day", &args.fees_per_day),
        ("supply", &args.supply),
        ("blocks_per_day", &args.blocks_per_day),
        ("annual_discount", &args.annual_discount),
        ("reward_per_block", &args.reward_per_block),
    ];
    for (key, value) in flags {
        if let Some(v) = value {
            sourced.set(key, v, InputSource::Flag)?;
        }
    }

    let params = calibrate(&sourced.inputs)?;
    let mut doc = ResultDocument::new("calibrate");
    if let Some(preset) = args.preset {
        let name = preset.to_possible_value().map(|v| v.get_name().to_string());
        doc.input("preset", name.unwrap_or_default());
    }
    for (key, value, source) in sourced.entries() {
        if key == "blocks_per_day" {
            doc.input(key, sourced.inputs.blocks_per_day);
        } else {
            doc.input(key, value);
        }
        doc.input(format!("{key}.source"), source.as_str());
    }

    doc.output("beta", params.beta)
        .output("delta", params.delta)
        .output("mu", params.mu)
        .output("annual_inflation", annualized_inflation(params.mu)?)
        .output("tau", params.tau)
        .output("capacity", params.capacity)
        .output("sigma", params.sigma)
        .output("alpha", params.alpha)
        .output("avg_tx_size", params.avg_tx_size)
        .output("confirmation_lag", params.confirmation_lag)
        .output("implied_confirmation_lag", implied_confirmation_lag(params.beta, params.delta)?)
        .output("tx_per_block", params.tx_per_block)
        .output("volume_per_block", params.volume_per_block)
        .output("fees_per_block", params.fees_per_block);

    if let Some(x) = args.utility_x {
        doc.input("utility_x", x).input("utility_b", args.utility_b);
        doc.output("utility", buyer_utility(x, args.utility_b)?);
    }
    if let Some(path) = &args.shock_samples {
        let dist = empirical_cdf(&parse_shock_samples(open_input(path)?)?)?;
        doc.input("shock_samples", path.display().to_string());
        doc.output("shock_sample_count", dist.sample_count() as u64)
            .output("shock_median", dist.quantile(0.5)?)
            .output("shock_p90", dist.quantile(0.9)?);
        doc.series = Some(Series {
            columns: vec!["size".into(), "cumulative_probability".into()],
            rows: dist
                .points()
                .iter()
                .map(|&(s, c)| vec![s.into(), c.into()])
                .collect(),
        });
    }
    Ok(doc)
}

fn wealth(metric: &WealthMetric) -> Result<ResultDocument> {
    let (name, path) = match metric {
        WealthMetric::Gini { snapshot } => ("wealth gini", snapshot),
        WealthMetric::Lorenz { snapshot } => ("wealth lorenz", snapshot),
    };
    let label = path.display().to_string();
    let snapshot = parse_snapshot(open_input(path)?, &label)?;
    let curve = lorenz_curve(&snapshot)?;

    let mut doc = ResultDocument::new(name);
    doc.input("snapshot", label);
    doc.output("holders", snapshot.len() as u64)
        .output("total_balance", snapshot.total())
        .output("gini", gini(&snapshot)?)
        .output("lorenz_area", curve.area());
    if matches!(metric, WealthMetric::Lorenz { .. }) {
        doc.series = Some(Series {
            columns: vec!["population_share".into(), "wealth_share".into()],
            rows: curve
                .points()
                .iter()
                .map(|&(x, y)| vec![x.into(), y.into()])
                .collect(),
        });
    }
    Ok(doc)
}
