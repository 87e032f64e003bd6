//! Open markets: the poorest agent is periodically replaced by a newcomer.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::ModelError;
use crate::model::{AgentState, Market, ModelParams, StepRecord};
use crate::seed::SimRng;

/// Starting wealth of an entering agent.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NewcomerWealth {
    #[default]
    Zero,
    /// Average agent wealth just before the eviction.
    MarketAverage,
}

/// Which agent leaves at an eviction step.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvictionRule {
    #[default]
    Poorest,
    /// Uniformly random agent, ignoring wealth. Used as a control.
    Random,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvolutionConfig {
    pub period: u64,
    pub horizon: u64,
    pub newcomer_wealth: NewcomerWealth,
    pub eviction: EvictionRule,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        EvolutionConfig {
            period: 1000,
            horizon: 10_000,
            newcomer_wealth: NewcomerWealth::Zero,
            eviction: EvictionRule::Poorest,
        }
    }
}

impl EvolutionConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        if self.period == 0 {
            return Err(ModelError::InvalidParam {
                name: "evolution.period",
                reason: "must be at least 1".into(),
            });
        }
        if self.horizon == 0 {
            return Err(ModelError::InvalidParam {
                name: "evolution.horizon",
                reason: "must be at least 1".into(),
            });
        }
        Ok(())
    }

    pub fn is_eviction_step(&self, time: u64) -> bool {
        time > 0 && time.is_multiple_of(self.period)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Replacement {
    pub step: u64,
    pub exited_id: u64,
    pub exited_entry_time: u64,
    pub exited_wealth: f64,
    pub entrant_id: u64,
    pub entrant_wealth: f64,
}

/// Entry times of the agents present at the end of a run, plus the
/// replacement history.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SurvivalLog {
    pub n_agents: usize,
    pub period: u64,
    pub horizon: u64,
    pub entry_times: Vec<u64>,
    pub replacements: Vec<Replacement>,
}

impl SurvivalLog {
    /// Number of agents alive at the horizon, keyed by entry time.
    pub fn survivors(&self) -> BTreeMap<u64, usize> {
        let mut out = BTreeMap::new();
        for &t in &self.entry_times {
            *out.entry(t).or_insert(0) += 1;
        }
        out
    }
}

/// Evicts one agent according to `config.eviction` and admits a newcomer with
/// fresh strategies. Must be called right after the step that brings the
/// market clock to a multiple of the period.
pub fn replace_poorest(
    market: &mut Market,
    config: &EvolutionConfig,
) -> Result<Replacement, ModelError> {
    let time = market.state.time;
    if !config.is_eviction_step(time) {
        return Err(ModelError::OffSchedule {
            time,
            period: config.period,
        });
    }
    let n = market.agents.len();
    let index = match config.eviction {
        EvictionRule::Poorest => {
            let min = market
                .agents
                .iter()
                .map(|a| a.wealth)
                .fold(f64::INFINITY, f64::min);
            let tied: Vec<usize> = (0..n).filter(|&i| market.agents[i].wealth == min).collect();
            tied[market.market_rng().random_range(0..tied.len())]
        }
        EvictionRule::Random => market.market_rng().random_range(0..n),
    };
    let entrant_wealth = match config.newcomer_wealth {
        NewcomerWealth::Zero => 0.0,
        NewcomerWealth::MarketAverage => market.total_agent_wealth() / n as f64,
    };
    let exited = market.remove_agent(index);
    let id = market.next_agent_id();
    let params = market.params().clone();
    market.add_agent(AgentState::random(id, time, &params), entrant_wealth);
    Ok(Replacement {
        step: time,
        exited_id: exited.id,
        exited_entry_time: exited.entry_time,
        exited_wealth: exited.wealth,
        entrant_id: id,
        entrant_wealth,
    })
}

/// Runs an evolving market up to the horizon.
pub fn run_evolution(
    params: ModelParams,
    config: &EvolutionConfig,
) -> Result<(Vec<StepRecord>, SurvivalLog), ModelError> {
    config.validate()?;
    let mut market = Market::new(params)?;
    let mut records = Vec::with_capacity(config.horizon as usize);
    let mut replacements = Vec::new();
    for _ in 0..config.horizon {
        records.push(market.advance()?);
        if config.is_eviction_step(market.state.time) {
            replacements.push(replace_poorest(&mut market, config)?);
        }
    }
    let log = SurvivalLog {
        n_agents: market.agents.len(),
        period: config.period,
        horizon: config.horizon,
        entry_times: market.agents.iter().map(|a| a.entry_time).collect(),
        replacements,
    };
    Ok((records, log))
}

/// Survival bookkeeping of a market where a uniformly random agent is
/// replaced every period. No trading takes place.
pub fn random_eviction_log(
    n_agents: usize,
    config: &EvolutionConfig,
    rng: &mut SimRng,
) -> SurvivalLog {
    let mut entry_times = vec![0u64; n_agents];
    let mut ids: Vec<u64> = (0..n_agents as u64).collect();
    let mut next_id = n_agents as u64;
    let mut replacements = Vec::new();
    let mut t = config.period;
    while t <= config.horizon {
        let i = rng.random_range(0..n_agents);
        replacements.push(Replacement {
            step: t,
            exited_id: ids[i],
            exited_entry_time: entry_times[i],
            exited_wealth: 0.0,
            entrant_id: next_id,
            entrant_wealth: 0.0,
        });
        entry_times[i] = t;
        ids[i] = next_id;
        next_id += 1;
        t += config.period;
    }
    SurvivalLog {
        n_agents,
        period: config.period,
        horizon: config.horizon,
        entry_times,
        replacements,
    }
}

/// Survival probability at the horizon under uniformly random eviction.
/// Entrants (`entry_time > 0`) carry an extra `1/N` factor.
pub fn random_baseline(entry_time: u64, horizon: u64, n_agents: usize, period: u64) -> f64 {
    let keep = 1.0 - 1.0 / n_agents as f64;
    let evictions = horizon.saturating_sub(entry_time) as f64 / period as f64;
    if entry_time == 0 {
        keep.powf(evictions)
    } else {
        keep.powf(evictions) / n_agents as f64
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurvivalPoint {
    /// First entry time in the bucket (0 for the founders).
    pub entry_time: u64,
    /// Last entry time in the bucket.
    pub entry_time_end: u64,
    pub empirical_p: f64,
    pub baseline_p: f64,
    /// Binomial standard error of `empirical_p` under the random baseline.
    pub stderr: f64,
    pub n_entrants: u64,
    pub survivors: u64,
}

/// Survival probabilities per entry-time bucket, pooled over runs that share
/// N, period and horizon. Founders form their own bucket; entrants are
/// grouped into buckets of `bucket_width` steps. Probabilities follow the
/// normalization of [`random_baseline`]: survivors are divided by
/// `N * samples * (entry times in the bucket)`.
pub fn survival_curve(logs: &[SurvivalLog], bucket_width: u64) -> Vec<SurvivalPoint> {
    let Some(first) = logs.first() else {
        return Vec::new();
    };
    let (n, period, horizon) = (first.n_agents, first.period, first.horizon);
    let samples = logs.len() as u64;
    let width = bucket_width.max(1);
    let mut counts: BTreeMap<u64, u64> = BTreeMap::new();
    for log in logs {
        for (t, c) in log.survivors() {
            *counts.entry(t).or_insert(0) += c as u64;
        }
    }
    let nf = n as f64;
    let sf = samples as f64;
    let mut points = Vec::new();

    let q0 = random_baseline(0, horizon, n, period);
    let founders = counts.get(&0).copied().unwrap_or(0);
    points.push(SurvivalPoint {
        entry_time: 0,
        entry_time_end: 0,
        empirical_p: founders as f64 / (nf * sf),
        baseline_p: q0,
        stderr: (nf * sf * q0 * (1.0 - q0)).sqrt() / (nf * sf),
        n_entrants: n as u64 * samples,
        survivors: founders,
    });

    let entry_steps: Vec<u64> = (1..=horizon / period).map(|j| j * period).collect();
    for chunk in entry_steps.chunk_by(|a, b| (a - 1) / width == (b - 1) / width) {
        let e = chunk.len() as f64;
        let survivors: u64 = chunk
            .iter()
            .map(|t| counts.get(t).copied().unwrap_or(0))
            .sum();
        let baselines: Vec<f64> = chunk
            .iter()
            .map(|&t| random_baseline(t, horizon, n, period))
            .collect();
        let variance: f64 = baselines
            .iter()
            .map(|p| {
                let q = p * nf;
                sf * q * (1.0 - q)
            })
            .sum();
        let denom = nf * sf * e;
        points.push(SurvivalPoint {
            entry_time: chunk[0],
            entry_time_end: chunk[chunk.len() - 1],
            empirical_p: survivors as f64 / denom,
            baseline_p: baselines.iter().sum::<f64>() / e,
            stderr: variance.sqrt() / denom,
            n_entrants: chunk.len() as u64 * samples,
            survivors,
        });
    }
    points
}
