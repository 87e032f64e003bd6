//! Flat `key = value` configuration with dotted section names.
//!
//! ```text
//! # arbitrageur regime
//! gamma = 0.8
//! beta = 0.4
//! spread.kind = adaptive
//! sweep.gamma = 0.1:0.9:0.1
//! ```
//!
//! `#` starts a comment. Lists are comma separated; numeric lists also accept
//! an inclusive `start:stop:step` range. Every key has a default, so an empty
//! file is a valid configuration.

use std::collections::HashMap;
use std::fmt::Display;
use std::path::PathBuf;
use std::str::FromStr;

use chrono::NaiveDate;

use crate::backtest::{BacktestConfig, PositionMode};
use crate::error::{ConfigError, ModelError};
use crate::evolution::{EvictionRule, EvolutionConfig, NewcomerWealth};
use crate::market_maker::{ClearingMode, SpreadPolicy};
use crate::metrics::ClassifierConfig;
use crate::model::ModelParams;
use crate::series::{parse_date, SeriesSpec};
use crate::strategy::PayoffScheme;

/// One `key = value` line.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Entry {
    pub line: usize,
    pub key: String,
    pub value: String,
}

/// Splits text into entries without interpreting keys. Rejects lines without
/// `=`, malformed keys and duplicates.
pub fn parse_entries(text: &str) -> Result<Vec<Entry>, ConfigError> {
    let mut seen: HashMap<String, usize> = HashMap::new();
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(ConfigError::Syntax {
                line,
                text: raw.trim().to_string(),
            });
        };
        let key = key.trim();
        let valid = !key.is_empty()
            && key
                .chars()
                .all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_' || c == '.');
        if !valid {
            return Err(ConfigError::Syntax {
                line,
                text: raw.trim().to_string(),
            });
        }
        if seen.insert(key.to_string(), line).is_some() {
            return Err(ConfigError::Duplicate {
                line,
                key: key.to_string(),
            });
        }
        out.push(Entry {
            line,
            key: key.to_string(),
            value: value.trim().to_string(),
        });
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpreadKind {
    None,
    Fixed,
    Rate,
    Adaptive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PositionKind {
    Fixed,
    WealthBased,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    pub gamma: Vec<f64>,
    pub beta: Vec<f64>,
    pub max_position: Vec<i32>,
    pub n_agents: Vec<usize>,
    pub samples: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvolveSpec {
    pub period: u64,
    pub horizon: u64,
    pub newcomer: NewcomerWealth,
    pub eviction: EvictionRule,
    pub samples: usize,
    pub bucket: u64,
    /// Use an adaptive spread when `spread.kind = none`.
    pub adaptive_spread: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BacktestSpec {
    pub series: Option<PathBuf>,
    pub date_column: Option<String>,
    pub close_column: String,
    pub start: Option<NaiveDate>,
    pub end: Option<NaiveDate>,
    pub schemes: Vec<PayoffScheme>,
    pub position: PositionKind,
    pub max_position: i32,
    pub initial_wealth: Option<f64>,
    pub n_agents: usize,
    pub random_decisions: bool,
    pub trajectories: usize,
    pub histogram_bins: usize,
}

/// Fully resolved configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct Config {
    pub seed: u64,
    pub n_agents: usize,
    pub memory: usize,
    pub strategies: usize,
    pub max_position: i32,
    pub gamma: f64,
    pub beta: f64,
    pub scheme: PayoffScheme,
    pub require_buy_sell: bool,
    pub zero_strategy: bool,
    pub interest_rate: f64,
    pub initial_price: f64,
    pub clearing: ClearingMode,
    pub count_clamped_in_demand: bool,
    pub spread_kind: SpreadKind,
    pub spread_s: f64,
    pub spread_rate: f64,
    pub spread_eta: f64,
    pub spread_target: f64,
    pub steps: u64,
    pub transient: f64,
    pub classifier_window: usize,
    pub classifier_periodic_window: usize,
    pub classifier_magnitude_tolerance: f64,
    pub classifier_min_cycles: usize,
    pub tail_fraction: f64,
    pub sweep: SweepSpec,
    pub evolution: EvolveSpec,
    pub backtest: BacktestSpec,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            seed: 0,
            n_agents: 100,
            memory: 3,
            strategies: 2,
            max_position: 1,
            gamma: 0.5,
            beta: 0.5,
            scheme: PayoffScheme::Wealth,
            require_buy_sell: true,
            zero_strategy: false,
            interest_rate: 0.0,
            initial_price: 0.0,
            clearing: ClearingMode::MarketMaker,
            count_clamped_in_demand: false,
            spread_kind: SpreadKind::None,
            spread_s: 0.0,
            spread_rate: 0.0,
            spread_eta: 1e-5,
            spread_target: 0.0,
            steps: 100_000,
            transient: 0.2,
            classifier_window: 2000,
            classifier_periodic_window: 500,
            classifier_magnitude_tolerance: 0.1,
            classifier_min_cycles: 2,
            tail_fraction: 0.05,
            sweep: SweepSpec {
                gamma: vec![0.5],
                beta: vec![0.5],
                max_position: vec![1],
                n_agents: vec![100],
                samples: 50,
            },
            evolution: EvolveSpec {
                period: 1000,
                horizon: 10_000,
                newcomer: NewcomerWealth::Zero,
                eviction: EvictionRule::Poorest,
                samples: 50,
                bucket: 1000,
                adaptive_spread: true,
            },
            backtest: BacktestSpec {
                series: None,
                date_column: Some("date".into()),
                close_column: "close".into(),
                start: None,
                end: None,
                schemes: PayoffScheme::ALL.to_vec(),
                position: PositionKind::Fixed,
                max_position: 3,
                initial_wealth: None,
                n_agents: 1000,
                random_decisions: false,
                trajectories: 0,
                histogram_bins: 40,
            },
        }
    }
}

fn bad(key: &str, reason: impl Display) -> ConfigError {
    ConfigError::InvalidValue {
        key: key.to_string(),
        reason: reason.to_string(),
    }
}

fn num<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: Display,
{
    value
        .parse()
        .map_err(|e| bad(key, format!("`{value}`: {e}")))
}

fn real(key: &str, value: &str) -> Result<f64, ConfigError> {
    let x: f64 = num(key, value)?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(bad(key, format!("`{value}` is not finite")))
    }
}

fn boolean(key: &str, value: &str) -> Result<bool, ConfigError> {
    match value {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(bad(key, format!("expected true or false, got `{value}`"))),
    }
}

fn optional(value: &str) -> Option<&str> {
    if value.is_empty() || value == "none" {
        None
    } else {
        Some(value)
    }
}

fn real_list(key: &str, value: &str) -> Result<Vec<f64>, ConfigError> {
    if let Some((start, rest)) = value.split_once(':') {
        let (stop, step) = rest
            .split_once(':')
            .ok_or_else(|| bad(key, "range must be start:stop:step"))?;
        let (start, stop, step) = (real(key, start)?, real(key, stop)?, real(key, step)?);
        if !(step > 0.0) || stop < start {
            return Err(bad(key, "range needs step > 0 and stop >= start"));
        }
        let n = ((stop - start) / step + 1e-9).floor() as usize + 1;
        if n > 100_000 {
            return Err(bad(key, "range has too many points"));
        }
        return Ok((0..n)
            .map(|i| ((start + i as f64 * step) * 1e12).round() / 1e12)
            .collect());
    }
    list(key, value, real)
}

fn list<T>(
    key: &str,
    value: &str,
    item: impl Fn(&str, &str) -> Result<T, ConfigError>,
) -> Result<Vec<T>, ConfigError> {
    let items: Vec<T> = value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| item(key, s))
        .collect::<Result<_, _>>()?;
    if items.is_empty() {
        return Err(bad(key, "list is empty"));
    }
    Ok(items)
}

fn join<T: Display>(items: &[T]) -> String {
    items
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(", ")
}

fn show_opt<T: Display>(x: &Option<T>) -> String {
    x.as_ref()
        .map_or_else(|| "none".to_string(), ToString::to_string)
}

impl Config {
    /// Parses a configuration file body on top of the defaults.
    pub fn from_text(text: &str) -> Result<Self, ConfigError> {
        let mut config = Config::default();
        for entry in parse_entries(text)? {
            config.set(&entry.key, &entry.value)?;
        }
        Ok(config)
    }

    /// Applies command-line style `key=value` overrides.
    pub fn apply_overrides<S: AsRef<str>>(&mut self, overrides: &[S]) -> Result<(), ConfigError> {
        for item in overrides {
            let item = item.as_ref();
            let (key, value) = item.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line: 0,
                text: item.to_string(),
            })?;
            self.set(key.trim(), value.trim())?;
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let k = key;
        match key {
            "seed" => self.seed = num(k, value)?,
            "n_agents" => self.n_agents = num(k, value)?,
            "memory" => self.memory = num(k, value)?,
            "strategies" => self.strategies = num(k, value)?,
            "max_position" => self.max_position = num(k, value)?,
            "gamma" => self.gamma = real(k, value)?,
            "beta" => self.beta = real(k, value)?,
            "scheme" => self.scheme = num(k, value)?,
            "require_buy_sell" => self.require_buy_sell = boolean(k, value)?,
            "zero_strategy" => self.zero_strategy = boolean(k, value)?,
            "interest_rate" => self.interest_rate = real(k, value)?,
            "initial_price" => self.initial_price = real(k, value)?,
            "clearing" => {
                self.clearing = match value {
                    "market_maker" => ClearingMode::MarketMaker,
                    "matched" => ClearingMode::Matched,
                    _ => return Err(bad(k, "expected market_maker or matched")),
                }
            }
            "count_clamped_in_demand" => self.count_clamped_in_demand = boolean(k, value)?,
            "spread.kind" => {
                self.spread_kind = match value {
                    "none" => SpreadKind::None,
                    "fixed" => SpreadKind::Fixed,
                    "rate" => SpreadKind::Rate,
                    "adaptive" => SpreadKind::Adaptive,
                    _ => return Err(bad(k, "expected none, fixed, rate or adaptive")),
                }
            }
            "spread.s" => self.spread_s = real(k, value)?,
            "spread.rate" => self.spread_rate = real(k, value)?,
            "spread.eta" => self.spread_eta = real(k, value)?,
            "spread.target" => self.spread_target = real(k, value)?,
            "steps" => self.steps = num(k, value)?,
            "transient" => self.transient = real(k, value)?,
            "classifier.window" => self.classifier_window = num(k, value)?,
            "classifier.periodic_window" => self.classifier_periodic_window = num(k, value)?,
            "classifier.magnitude_tolerance" => {
                self.classifier_magnitude_tolerance = real(k, value)?
            }
            "classifier.min_cycles" => self.classifier_min_cycles = num(k, value)?,
            "tail.top_fraction" => self.tail_fraction = real(k, value)?,
            "sweep.gamma" => self.sweep.gamma = real_list(k, value)?,
            "sweep.beta" => self.sweep.beta = real_list(k, value)?,
            "sweep.max_position" => self.sweep.max_position = list(k, value, num)?,
            "sweep.n_agents" => self.sweep.n_agents = list(k, value, num)?,
            "sweep.samples" => self.sweep.samples = num(k, value)?,
            "evolution.period" => self.evolution.period = num(k, value)?,
            "evolution.horizon" => self.evolution.horizon = num(k, value)?,
            "evolution.newcomer" => {
                self.evolution.newcomer = match value {
                    "zero" => NewcomerWealth::Zero,
                    "market_average" => NewcomerWealth::MarketAverage,
                    _ => return Err(bad(k, "expected zero or market_average")),
                }
            }
            "evolution.eviction" => {
                self.evolution.eviction = match value {
                    "poorest" => EvictionRule::Poorest,
                    "random" => EvictionRule::Random,
                    _ => return Err(bad(k, "expected poorest or random")),
                }
            }
            "evolution.samples" => self.evolution.samples = num(k, value)?,
            "evolution.bucket" => self.evolution.bucket = num(k, value)?,
            "evolution.adaptive_spread" => self.evolution.adaptive_spread = boolean(k, value)?,
            "backtest.series" => self.backtest.series = optional(value).map(PathBuf::from),
            "backtest.date_column" => {
                self.backtest.date_column = optional(value).map(str::to_string)
            }
            "backtest.close_column" => self.backtest.close_column = value.to_string(),
            "backtest.start" | "backtest.end" => {
                let date = optional(value)
                    .map(|v| parse_date(v).ok_or_else(|| bad(k, "expected YYYY-MM-DD")))
                    .transpose()?;
                if key == "backtest.start" {
                    self.backtest.start = date;
                } else {
                    self.backtest.end = date;
                }
            }
            "backtest.schemes" => self.backtest.schemes = list(k, value, num)?,
            "backtest.position" => {
                self.backtest.position = match value {
                    "fixed" => PositionKind::Fixed,
                    "wealth_based" => PositionKind::WealthBased,
                    _ => return Err(bad(k, "expected fixed or wealth_based")),
                }
            }
            "backtest.max_position" => self.backtest.max_position = num(k, value)?,
            "backtest.initial_wealth" => {
                self.backtest.initial_wealth = optional(value).map(|v| real(k, v)).transpose()?
            }
            "backtest.n_agents" => self.backtest.n_agents = num(k, value)?,
            "backtest.random_decisions" => self.backtest.random_decisions = boolean(k, value)?,
            "backtest.trajectories" => self.backtest.trajectories = num(k, value)?,
            "backtest.histogram_bins" => self.backtest.histogram_bins = num(k, value)?,
            _ => return Err(ConfigError::UnknownKey(key.to_string())),
        }
        Ok(())
    }

    /// Every key with its resolved value, in a fixed order. Feeding these
    /// back through [`Config::set`] reproduces the configuration.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        let spread_kind = match self.spread_kind {
            SpreadKind::None => "none",
            SpreadKind::Fixed => "fixed",
            SpreadKind::Rate => "rate",
            SpreadKind::Adaptive => "adaptive",
        };
        let clearing = match self.clearing {
            ClearingMode::MarketMaker => "market_maker",
            ClearingMode::Matched => "matched",
        };
        let newcomer = match self.evolution.newcomer {
            NewcomerWealth::Zero => "zero",
            NewcomerWealth::MarketAverage => "market_average",
        };
        let eviction = match self.evolution.eviction {
            EvictionRule::Poorest => "poorest",
            EvictionRule::Random => "random",
        };
        let position = match self.backtest.position {
            PositionKind::Fixed => "fixed",
            PositionKind::WealthBased => "wealth_based",
        };
        let b = &self.backtest;
        vec![
            ("seed", self.seed.to_string()),
            ("n_agents", self.n_agents.to_string()),
            ("memory", self.memory.to_string()),
            ("strategies", self.strategies.to_string()),
            ("max_position", self.max_position.to_string()),
            ("gamma", self.gamma.to_string()),
            ("beta", self.beta.to_string()),
            ("scheme", self.scheme.to_string()),
            ("require_buy_sell", self.require_buy_sell.to_string()),
            ("zero_strategy", self.zero_strategy.to_string()),
            ("interest_rate", self.interest_rate.to_string()),
            ("initial_price", self.initial_price.to_string()),
            ("clearing", clearing.to_string()),
            (
                "count_clamped_in_demand",
                self.count_clamped_in_demand.to_string(),
            ),
            ("spread.kind", spread_kind.to_string()),
            ("spread.s", self.spread_s.to_string()),
            ("spread.rate", self.spread_rate.to_string()),
            ("spread.eta", self.spread_eta.to_string()),
            ("spread.target", self.spread_target.to_string()),
            ("steps", self.steps.to_string()),
            ("transient", self.transient.to_string()),
            ("classifier.window", self.classifier_window.to_string()),
            (
                "classifier.periodic_window",
                self.classifier_periodic_window.to_string(),
            ),
            (
                "classifier.magnitude_tolerance",
                self.classifier_magnitude_tolerance.to_string(),
            ),
            (
                "classifier.min_cycles",
                self.classifier_min_cycles.to_string(),
            ),
            ("tail.top_fraction", self.tail_fraction.to_string()),
            ("sweep.gamma", join(&self.sweep.gamma)),
            ("sweep.beta", join(&self.sweep.beta)),
            ("sweep.max_position", join(&self.sweep.max_position)),
            ("sweep.n_agents", join(&self.sweep.n_agents)),
            ("sweep.samples", self.sweep.samples.to_string()),
            ("evolution.period", self.evolution.period.to_string()),
            ("evolution.horizon", self.evolution.horizon.to_string()),
            ("evolution.newcomer", newcomer.to_string()),
            ("evolution.eviction", eviction.to_string()),
            ("evolution.samples", self.evolution.samples.to_string()),
            ("evolution.bucket", self.evolution.bucket.to_string()),
            (
                "evolution.adaptive_spread",
                self.evolution.adaptive_spread.to_string(),
            ),
            (
                "backtest.series",
                show_opt(&b.series.as_ref().map(|p| p.display().to_string())),
            ),
            ("backtest.date_column", show_opt(&b.date_column)),
            ("backtest.close_column", b.close_column.clone()),
            ("backtest.start", show_opt(&b.start)),
            ("backtest.end", show_opt(&b.end)),
            ("backtest.schemes", join(&b.schemes)),
            ("backtest.position", position.to_string()),
            ("backtest.max_position", b.max_position.to_string()),
            ("backtest.initial_wealth", show_opt(&b.initial_wealth)),
            ("backtest.n_agents", b.n_agents.to_string()),
            ("backtest.random_decisions", b.random_decisions.to_string()),
            ("backtest.trajectories", b.trajectories.to_string()),
            ("backtest.histogram_bins", b.histogram_bins.to_string()),
        ]
    }

    /// The configuration as a config-file body.
    pub fn to_text(&self) -> String {
        self.entries()
            .into_iter()
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }

    pub fn spread_policy(&self) -> SpreadPolicy {
        match self.spread_kind {
            SpreadKind::None => SpreadPolicy::None,
            SpreadKind::Fixed => SpreadPolicy::Fixed {
                spread: self.spread_s,
            },
            SpreadKind::Rate => SpreadPolicy::Rate {
                rate: self.spread_rate,
            },
            SpreadKind::Adaptive => SpreadPolicy::Adaptive {
                rate: self.spread_rate,
                eta: self.spread_eta,
                target_wealth: self.spread_target,
            },
        }
    }

    pub fn model_params(&self) -> ModelParams {
        ModelParams {
            n_agents: self.n_agents,
            memory: self.memory,
            strategies_per_agent: self.strategies,
            max_position: self.max_position,
            gamma: self.gamma,
            beta: self.beta,
            interest_rate: self.interest_rate,
            zero_strategy: self.zero_strategy,
            require_buy_sell: self.require_buy_sell,
            initial_price: self.initial_price,
            seed: self.seed,
            scheme: self.scheme,
            clearing: self.clearing,
            spread: self.spread_policy(),
            count_clamped_in_demand: self.count_clamped_in_demand,
        }
    }

    /// Model parameters for evolving markets: the adaptive spread is switched
    /// on unless another spread is configured or the flag is off.
    pub fn evolution_params(&self) -> ModelParams {
        let mut params = self.model_params();
        if self.evolution.adaptive_spread && self.spread_kind == SpreadKind::None {
            params.spread = SpreadPolicy::Adaptive {
                rate: self.spread_rate,
                eta: self.spread_eta,
                target_wealth: self.spread_target,
            };
        }
        params
    }

    pub fn evolution_config(&self) -> EvolutionConfig {
        EvolutionConfig {
            period: self.evolution.period,
            horizon: self.evolution.horizon,
            newcomer_wealth: self.evolution.newcomer,
            eviction: self.evolution.eviction,
        }
    }

    pub fn classifier(&self) -> ClassifierConfig {
        ClassifierConfig {
            memory: self.memory,
            min_window: ClassifierConfig::new(self.memory).min_window,
            periodic_window: self.classifier_periodic_window,
            magnitude_tolerance: self.classifier_magnitude_tolerance,
            min_cycles: self.classifier_min_cycles,
        }
    }

    pub fn series_spec(&self) -> SeriesSpec {
        SeriesSpec {
            date_column: self.backtest.date_column.clone(),
            close_column: self.backtest.close_column.clone(),
            start: self.backtest.start,
            end: self.backtest.end,
        }
    }

    pub fn backtest_config(&self, scheme: PayoffScheme) -> BacktestConfig {
        let b = &self.backtest;
        BacktestConfig {
            scheme,
            memory: self.memory,
            strategies_per_agent: self.strategies,
            beta: self.beta,
            position_mode: match b.position {
                PositionKind::Fixed => PositionMode::FixedK {
                    max_position: b.max_position,
                },
                PositionKind::WealthBased => PositionMode::WealthBased,
            },
            initial_wealth: b.initial_wealth,
            require_buy_sell: self.require_buy_sell,
            n_agents: b.n_agents,
            seed: self.seed,
            random_decisions: b.random_decisions,
            histogram_bins: b.histogram_bins,
        }
    }

    /// Checks values that individual setters cannot judge alone.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let model_err = |e: ModelError| match e {
            ModelError::InvalidParam { name, reason } => bad(name, reason),
            other => bad("model", other),
        };
        self.model_params().validate().map_err(model_err)?;
        if self.steps == 0 {
            return Err(bad("steps", "must be at least 1"));
        }
        if !(0.0..1.0).contains(&self.transient) {
            return Err(bad("transient", "must lie in [0, 1)"));
        }
        if !(self.tail_fraction > 0.0 && self.tail_fraction < 1.0) {
            return Err(bad("tail.top_fraction", "must lie in (0, 1)"));
        }
        if self.classifier_periodic_window < 2 {
            return Err(bad("classifier.periodic_window", "must be at least 2"));
        }
        if !(self.classifier_magnitude_tolerance >= 0.0) {
            return Err(bad("classifier.magnitude_tolerance", "must be >= 0"));
        }
        if self.classifier_min_cycles == 0 {
            return Err(bad("classifier.min_cycles", "must be at least 1"));
        }
        if self.sweep.samples == 0 {
            return Err(bad("sweep.samples", "must be at least 1"));
        }
        for (key, grid) in [
            ("sweep.gamma", &self.sweep.gamma),
            ("sweep.beta", &self.sweep.beta),
        ] {
            if grid.iter().any(|x| !(0.0..=1.0).contains(x)) {
                return Err(bad(key, "values must lie in [0, 1]"));
            }
        }
        if self.sweep.max_position.iter().any(|&k| k < 1) {
            return Err(bad("sweep.max_position", "values must be at least 1"));
        }
        if self.sweep.n_agents.contains(&0) {
            return Err(bad("sweep.n_agents", "values must be at least 1"));
        }
        if self.evolution.period == 0 {
            return Err(bad("evolution.period", "must be at least 1"));
        }
        if self.evolution.horizon == 0 {
            return Err(bad("evolution.horizon", "must be at least 1"));
        }
        if self.evolution.samples == 0 {
            return Err(bad("evolution.samples", "must be at least 1"));
        }
        if self.evolution.bucket == 0 {
            return Err(bad("evolution.bucket", "must be at least 1"));
        }
        if self.evolution.adaptive_spread
            && self.spread_kind == SpreadKind::None
            && !(self.spread_eta > 0.0)
        {
            return Err(bad("spread.eta", "must be > 0 for the adaptive spread"));
        }
        let b = &self.backtest;
        if b.max_position < 1 {
            return Err(bad("backtest.max_position", "must be at least 1"));
        }
        if b.n_agents == 0 {
            return Err(bad("backtest.n_agents", "must be at least 1"));
        }
        if b.position == PositionKind::WealthBased && b.initial_wealth.is_some_and(|w| w <= 0.0) {
            return Err(bad(
                "backtest.initial_wealth",
                "must be > 0 in wealth_based mode",
            ));
        }
        if let (Some(s), Some(e)) = (b.start, b.end) {
            if s > e {
                return Err(bad("backtest.start", "is after backtest.end"));
            }
        }
        Ok(())
    }

    /// Full-scale sizes: 1000 agents, a million steps, 100 samples per point.
    pub fn full_scale(&mut self) {
        self.n_agents = 1000;
        self.steps = 1_000_000;
        self.sweep.n_agents = vec![1000];
        self.sweep.samples = 100;
    }
}
