//! Replays an exogenous price series against populations of agents playing
//! each payoff scheme.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::BacktestError;
use crate::model::{clamp_action, transaction_price, Decision};
use crate::seed::{self, SimRng, MARKET_STREAM};
use crate::series::PriceSeries;
use crate::strategy::{
    gen_strategy, select_strategy, update_score, Choice, PayoffScheme, PriceStep, Strategy,
    StrategyScore, ZeroStrategy,
};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PositionMode {
    FixedK {
        max_position: i32,
    },
    /// `K_i(t) = floor(max(w_i(t) / P(t), 0))`, re-evaluated daily.
    WealthBased,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BacktestConfig {
    pub scheme: PayoffScheme,
    pub memory: usize,
    pub strategies_per_agent: usize,
    pub beta: f64,
    pub position_mode: PositionMode,
    /// Starting cash. Defaults to 0 for fixed K and to five times the close
    /// of the first trading day for wealth-based K.
    pub initial_wealth: Option<f64>,
    pub require_buy_sell: bool,
    pub n_agents: usize,
    pub seed: u64,
    /// Control run: agents pick uniformly among sell, hold and buy.
    pub random_decisions: bool,
    pub histogram_bins: usize,
}

impl Default for BacktestConfig {
    fn default() -> Self {
        BacktestConfig {
            scheme: PayoffScheme::Wealth,
            memory: 3,
            strategies_per_agent: 2,
            beta: 0.5,
            position_mode: PositionMode::FixedK { max_position: 3 },
            initial_wealth: None,
            require_buy_sell: true,
            n_agents: 1000,
            seed: 0,
            random_decisions: false,
            histogram_bins: 40,
        }
    }
}

impl BacktestConfig {
    fn validate(&self) -> Result<(), BacktestError> {
        let invalid = |name, reason: &str| {
            Err(BacktestError::InvalidParam {
                name,
                reason: reason.into(),
            })
        };
        if !(1..=20).contains(&self.memory) {
            return invalid("memory", "must be between 1 and 20");
        }
        if self.strategies_per_agent == 0 {
            return invalid("strategies_per_agent", "must be at least 1");
        }
        if self.n_agents == 0 {
            return invalid("n_agents", "must be at least 1");
        }
        if !(0.0..=1.0).contains(&self.beta) {
            return invalid("beta", "must lie in [0, 1]");
        }
        if let PositionMode::FixedK { max_position } = self.position_mode {
            if max_position < 1 {
                return invalid("max_position", "must be at least 1");
            }
        }
        Ok(())
    }
}

pub fn wealth_based_k(wealth: f64, price: f64) -> i32 {
    (wealth / price).max(0.0).floor().min(f64::from(i32::MAX)) as i32
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

/// Final-day statistics. Wealths are in multiples of the final close.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BacktestSummary {
    pub scheme: PayoffScheme,
    pub n_agents: usize,
    pub trading_days: usize,
    pub initial_wealth: f64,
    pub final_close: f64,
    pub average_wealth: f64,
    pub best_wealth: f64,
    pub worst_wealth: f64,
    /// Share of agents beating the index, wealth-based mode only.
    pub percent_gaining: Option<f64>,
    pub percent_bankrupt: f64,
    pub wealth_histogram: Vec<HistogramBin>,
}

/// One agent's run.
#[derive(Clone, Debug, PartialEq)]
pub struct AgentOutcome {
    pub final_wealth: f64,
    /// Wealth after each trading day, when recorded.
    pub trajectory: Vec<f64>,
    /// Adopted strategy on each trading day (`None` under random decisions),
    /// when recorded.
    pub choices: Vec<Option<usize>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BacktestResult {
    pub summary: BacktestSummary,
    /// Raw final wealths, agent order.
    pub final_wealths: Vec<f64>,
    /// Trajectories of the first `record_agents` agents.
    pub recorded: Vec<AgentOutcome>,
    /// Series index of each trading day.
    pub days: Vec<usize>,
}

/// Inputs shared by all agents of one backtest.
struct Replay<'a> {
    closes: &'a [f64],
    states: Vec<usize>,
    first_day: usize,
    initial_wealth: f64,
}

impl<'a> Replay<'a> {
    fn new(series: &'a PriceSeries, config: &BacktestConfig) -> Result<Self, BacktestError> {
        let m = config.memory;
        series.require_len(m + 2)?;
        let closes = &series.closes[..];
        let mut rng = seed::stream(config.seed, 0, 0, MARKET_STREAM);
        let bits: Vec<u32> = closes
            .windows(2)
            .map(|w| {
                if w[1] > w[0] {
                    1
                } else if w[1] < w[0] {
                    0
                } else {
                    u32::from(rng.random::<bool>())
                }
            })
            .collect();
        // state on day t: the change into day t-1 is bit 0
        let mask = (1usize << m) - 1;
        let states = (m..closes.len() - 1)
            .map(|t| (0..m).fold(0usize, |acc, j| acc | ((bits[t - 1 - j] as usize) << j)) & mask)
            .collect();
        let initial_wealth = match (config.position_mode, config.initial_wealth) {
            (_, Some(w)) => w,
            (PositionMode::FixedK { .. }, None) => 0.0,
            (PositionMode::WealthBased, None) => 5.0 * closes[m],
        };
        if config.position_mode == PositionMode::WealthBased && !(initial_wealth > 0.0) {
            return Err(BacktestError::NonPositiveInitialWealth(initial_wealth));
        }
        Ok(Replay {
            closes,
            states,
            first_day: m,
            initial_wealth,
        })
    }

    fn simulate(&self, config: &BacktestConfig, agent: u64, record: bool) -> AgentOutcome {
        let mut rng = seed::stream(config.seed, 0, 0, agent);
        let strategies: Vec<Strategy> = (0..config.strategies_per_agent as u64)
            .map(|j| gen_strategy(j, &mut rng, config.memory, config.require_buy_sell))
            .collect();
        simulate_agent(self, config, &strategies, &mut rng, record)
    }
}

fn simulate_agent(
    replay: &Replay,
    config: &BacktestConfig,
    strategies: &[Strategy],
    rng: &mut SimRng,
    record: bool,
) -> AgentOutcome {
    let closes = replay.closes;
    let no_zero = ZeroStrategy::default();
    let mut scores = vec![StrategyScore::default(); strategies.len()];
    let mut cash = replay.initial_wealth;
    let mut position = 0i32;
    let mut wealth = cash;
    let mut pt_prev = None;
    let mut trajectory = Vec::new();
    let mut choices = Vec::new();

    for (d, &state) in replay.states.iter().enumerate() {
        let t = replay.first_day + d;
        let (p, p_next) = (closes[t], closes[t + 1]);
        let k_max = match config.position_mode {
            PositionMode::FixedK { max_position } => max_position,
            PositionMode::WealthBased => wealth_based_k(cash + f64::from(position) * p, p),
        };
        let (proposed, choice) = if config.random_decisions {
            let a = match rng.random_range(0..3u8) {
                0 => Decision::Sell,
                1 => Decision::Hold,
                _ => Decision::Buy,
            };
            (a, None)
        } else {
            match select_strategy(&scores, &no_zero, 0.0, rng) {
                Choice::Strategy(i) => (strategies[i].decide(state), Some(i)),
                Choice::Zero => unreachable!("zero strategy disabled"),
            }
        };
        let a = clamp_action(position, proposed, k_max);
        let pt = transaction_price(p, p_next, config.beta);
        cash -= f64::from(a.value()) * pt;
        position += a.value();
        wealth = cash + f64::from(position) * pt;

        let step = PriceStep {
            price_change: p_next - p,
            transaction_price: pt,
            prev_transaction_price: pt_prev.unwrap_or(pt),
        };
        for (s, score) in strategies.iter().zip(scores.iter_mut()) {
            *score = update_score(config.scheme, *score, s.decide(state), step, k_max);
        }
        pt_prev = Some(pt);
        if record {
            trajectory.push(wealth);
            choices.push(choice);
        }
    }
    AgentOutcome {
        final_wealth: wealth,
        trajectory,
        choices,
    }
}

/// Runs every agent over the series. Agents are independent and run in
/// parallel; each draws from its own stream keyed by `(seed, agent id)`.
pub fn run_backtest(
    series: &PriceSeries,
    config: &BacktestConfig,
    record_agents: usize,
) -> Result<BacktestResult, BacktestError> {
    config.validate()?;
    let replay = Replay::new(series, config)?;
    let outcomes: Vec<AgentOutcome> = (0..config.n_agents as u64)
        .into_par_iter()
        .map(|id| replay.simulate(config, id, (id as usize) < record_agents))
        .collect();
    let final_wealths: Vec<f64> = outcomes.iter().map(|o| o.final_wealth).collect();
    let summary = summarize(series, config, &replay, &final_wealths);
    let recorded = outcomes.into_iter().take(record_agents).collect();
    Ok(BacktestResult {
        summary,
        final_wealths,
        recorded,
        days: (replay.first_day..series.len() - 1).collect(),
    })
}

/// Runs one agent with the given strategies, recording its trajectory and
/// choices. The agent's stream is `(config.seed, agent)`.
pub fn run_single_agent(
    series: &PriceSeries,
    config: &BacktestConfig,
    strategies: &[Strategy],
    agent: u64,
) -> Result<AgentOutcome, BacktestError> {
    config.validate()?;
    let replay = Replay::new(series, config)?;
    let mut rng = seed::stream(config.seed, 0, 0, agent);
    Ok(simulate_agent(&replay, config, strategies, &mut rng, true))
}

fn summarize(
    series: &PriceSeries,
    config: &BacktestConfig,
    replay: &Replay,
    wealths: &[f64],
) -> BacktestSummary {
    let final_close = *series.closes.last().expect("validated length");
    let start_close = series.closes[replay.first_day];
    let w0 = replay.initial_wealth;
    let n = wealths.len() as f64;
    let normalized: Vec<f64> = wealths.iter().map(|w| w / final_close).collect();
    let percent_gaining = (config.position_mode == PositionMode::WealthBased).then(|| {
        let bar = (final_close / start_close - 1.0) * w0;
        100.0 * wealths.iter().filter(|&&w| w - w0 > bar).count() as f64 / n
    });
    BacktestSummary {
        scheme: config.scheme,
        n_agents: wealths.len(),
        trading_days: replay.states.len(),
        initial_wealth: w0,
        final_close,
        average_wealth: normalized.iter().sum::<f64>() / n,
        best_wealth: normalized.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        worst_wealth: normalized.iter().copied().fold(f64::INFINITY, f64::min),
        percent_gaining,
        percent_bankrupt: 100.0 * wealths.iter().filter(|&&w| w < 0.0).count() as f64 / n,
        wealth_histogram: histogram(&normalized, config.histogram_bins),
    }
}

fn histogram(xs: &[f64], bins: usize) -> Vec<HistogramBin> {
    if xs.is_empty() || bins == 0 {
        return Vec::new();
    }
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let width = if hi > lo {
        (hi - lo) / bins as f64
    } else {
        1.0
    };
    let mut out: Vec<HistogramBin> = (0..bins)
        .map(|b| HistogramBin {
            lo: lo + b as f64 * width,
            hi: lo + (b + 1) as f64 * width,
            count: 0,
        })
        .collect();
    for &x in xs {
        let b = (((x - lo) / width) as usize).min(bins - 1);
        out[b].count += 1;
    }
    out
}
