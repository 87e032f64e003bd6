//! Domain types and the single-step transition of the endogenous market.
//!
//! One call to [`Market::advance`] runs: strategy selection, position
//! clamping, clearing, price update, transaction price, spread, settlement,
//! virtual score updates and the history bit, in that order.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::ModelError;
use crate::market_maker::{
    clear_market_maker, clear_matched, compute_spread, mm_settle, zero_sum_holds, ClearingMode,
    MarketMakerState, SpreadPolicy,
};
use crate::seed::{self, SimRng, MARKET_STREAM};
use crate::strategy::{
    gen_strategy, select_strategy, update_score, Choice, PayoffScheme, PriceStep, Strategy,
    StrategyScore, ZeroStrategy,
};

pub const REL_TOL: f64 = 1e-9;
pub const ABS_TOL: f64 = 1e-12;

/// `|a - b| <= ABS_TOL + REL_TOL * scale`, where `scale` is the magnitude of
/// the terms that produced `a` and `b`.
#[inline]
pub fn approx_eq(a: f64, b: f64, scale: f64) -> bool {
    (a - b).abs() <= ABS_TOL + REL_TOL * scale.abs().max(a.abs()).max(b.abs())
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[repr(i8)]
pub enum Decision {
    Sell = -1,
    #[default]
    Hold = 0,
    Buy = 1,
}

impl Decision {
    #[inline]
    pub fn value(self) -> i32 {
        self as i8 as i32
    }

    pub fn from_value(v: i32) -> Option<Self> {
        match v {
            -1 => Some(Decision::Sell),
            0 => Some(Decision::Hold),
            1 => Some(Decision::Buy),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub n_agents: usize,
    pub memory: usize,
    pub strategies_per_agent: usize,
    pub max_position: i32,
    pub gamma: f64,
    pub beta: f64,
    /// Grand-canonical interest paid to the zero strategy.
    pub interest_rate: f64,
    pub zero_strategy: bool,
    pub require_buy_sell: bool,
    pub initial_price: f64,
    pub seed: u64,
    pub scheme: PayoffScheme,
    pub clearing: ClearingMode,
    pub spread: SpreadPolicy,
    /// Sensitivity switch: feed proposed (pre-clamp) bids into the excess demand.
    pub count_clamped_in_demand: bool,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams {
            n_agents: 100,
            memory: 3,
            strategies_per_agent: 2,
            max_position: 1,
            gamma: 0.5,
            beta: 0.5,
            interest_rate: 0.0,
            zero_strategy: false,
            require_buy_sell: true,
            initial_price: 0.0,
            seed: 0,
            scheme: PayoffScheme::Wealth,
            clearing: ClearingMode::MarketMaker,
            spread: SpreadPolicy::None,
            count_clamped_in_demand: false,
        }
    }
}

fn invalid(name: &'static str, reason: impl Into<String>) -> ModelError {
    ModelError::InvalidParam {
        name,
        reason: reason.into(),
    }
}

impl ModelParams {
    pub fn validate(&self) -> Result<(), ModelError> {
        if self.n_agents == 0 {
            return Err(invalid("n_agents", "must be >= 1"));
        }
        if !(1..=20).contains(&self.memory) {
            return Err(invalid("memory", "must be in 1..=20"));
        }
        if self.strategies_per_agent == 0 {
            return Err(invalid("strategies", "must be >= 1"));
        }
        if self.max_position < 1 {
            return Err(invalid("max_position", "must be >= 1"));
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(invalid("gamma", "must lie in [0, 1]"));
        }
        if !(0.0..=1.0).contains(&self.beta) {
            return Err(invalid("beta", "must lie in [0, 1]"));
        }
        if !(self.interest_rate >= 0.0) {
            return Err(invalid("interest_rate", "must be >= 0"));
        }
        if !self.initial_price.is_finite() {
            return Err(invalid("initial_price", "must be finite"));
        }
        match self.spread {
            SpreadPolicy::None => {}
            SpreadPolicy::Fixed { spread } if !(spread >= 0.0) => {
                return Err(invalid("spread.s", "must be >= 0"))
            }
            SpreadPolicy::Rate { rate } if !(rate >= 0.0) => {
                return Err(invalid("spread.rate", "must be >= 0"))
            }
            SpreadPolicy::Adaptive {
                rate,
                eta,
                target_wealth,
            } => {
                if !(rate >= 0.0) {
                    return Err(invalid("spread.rate", "must be >= 0"));
                }
                if !(eta > 0.0) {
                    return Err(invalid("spread.eta", "must be > 0"));
                }
                if !target_wealth.is_finite() {
                    return Err(invalid("spread.target", "must be finite"));
                }
            }
            _ => {}
        }
        if self.clearing == ClearingMode::Matched && self.spread != SpreadPolicy::None {
            return Err(invalid(
                "spread.kind",
                "matched clearing has no market maker to charge a spread",
            ));
        }
        Ok(())
    }
}

/// `P + sign(A) |A|^gamma`; zero demand leaves the price unchanged.
#[inline]
pub fn price_update(price: f64, excess_demand: i64, gamma: f64) -> f64 {
    price + price_increment(excess_demand, gamma)
}

#[inline]
pub fn price_increment(excess_demand: i64, gamma: f64) -> f64 {
    match excess_demand {
        0 => 0.0,
        a => (a.signum() as f64) * (a.unsigned_abs() as f64).powf(gamma),
    }
}

#[inline]
pub fn transaction_price(price_now: f64, price_next: f64, beta: f64) -> f64 {
    (1.0 - beta) * price_now + beta * price_next
}

/// Drops a decision that would push `|position|` past `max_position`.
/// Moves toward zero are always allowed, so a position above a shrunken
/// bound is never forced down.
#[inline]
pub fn clamp_action(position: i32, proposed: Decision, max_position: i32) -> Decision {
    let next = position + proposed.value();
    if next.abs() > max_position && next.abs() > position.abs() {
        Decision::Hold
    } else {
        proposed
    }
}

#[derive(Clone, Debug)]
pub struct AgentState {
    pub id: u64,
    pub entry_time: u64,
    pub strategies: Vec<Strategy>,
    pub scores: Vec<StrategyScore>,
    pub zero_score: f64,
    pub position: i32,
    pub cash: f64,
    pub wealth: f64,
    /// False only while frustrated by matched clearing.
    pub active: bool,
    pub last_choice: Option<Choice>,
    rng: SimRng,
}

impl AgentState {
    pub fn new(id: u64, entry_time: u64, strategies: Vec<Strategy>, rng: SimRng) -> Self {
        let scores = vec![StrategyScore::default(); strategies.len()];
        AgentState {
            id,
            entry_time,
            strategies,
            scores,
            zero_score: 0.0,
            position: 0,
            cash: 0.0,
            wealth: 0.0,
            active: true,
            last_choice: None,
            rng,
        }
    }

    /// Fresh agent whose strategies come from its own seeded stream.
    pub fn random(id: u64, entry_time: u64, params: &ModelParams) -> Self {
        let mut rng = seed::stream(params.seed, 0, 0, id);
        let strategies = (0..params.strategies_per_agent)
            .map(|j| gen_strategy(j as u64, &mut rng, params.memory, params.require_buy_sell))
            .collect();
        AgentState::new(id, entry_time, strategies, rng)
    }

    pub fn decide(&mut self, state: usize, zero: &ZeroStrategy) -> Decision {
        let choice = select_strategy(&self.scores, zero, self.zero_score, &mut self.rng);
        self.last_choice = Some(choice);
        match choice {
            Choice::Strategy(i) => self.strategies[i].decide(state),
            Choice::Zero => Decision::Hold,
        }
    }

    pub fn rng(&mut self) -> &mut SimRng {
        &mut self.rng
    }
}

/// Applies one transaction at `transaction_price` plus `spread` per unit
/// traded, then checks the incremental wealth change against the
/// mark-to-market value. `prev_transaction_price` is the mark of the
/// previous step.
pub fn settle_agent(
    agent: &mut AgentState,
    effective: Decision,
    transaction_price: f64,
    prev_transaction_price: f64,
    spread: f64,
) -> Result<(), (f64, f64)> {
    let a = effective.value();
    let increment = f64::from(agent.position) * (transaction_price - prev_transaction_price)
        - f64::from(a.abs()) * spread;
    let incremental = agent.wealth + increment;
    agent.cash -= f64::from(a) * transaction_price + f64::from(a.abs()) * spread;
    agent.position += a;
    let stock = f64::from(agent.position) * transaction_price;
    let marked = agent.cash + stock;
    let scale = agent.cash.abs().max(stock.abs());
    agent.wealth = marked;
    if approx_eq(incremental, marked, scale) {
        Ok(())
    } else {
        Err((incremental, marked))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MarketState {
    pub price: f64,
    pub transaction_price: f64,
    /// Mark of the previous step; `None` before the first trade.
    pub prev_transaction_price: Option<f64>,
    /// Last `memory` signs of price changes, most recent in bit 0.
    pub history: u32,
    pub memory: usize,
    pub time: u64,
    pub excess_demand_last: i64,
}

impl MarketState {
    #[inline]
    pub fn push_outcome(&mut self, rose: bool) {
        let mask = (1u32 << self.memory) - 1;
        self.history = ((self.history << 1) | u32::from(rose)) & mask;
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub time: u64,
    /// History state the decisions responded to.
    pub state: u32,
    pub price_before: f64,
    pub price_after: f64,
    pub transaction_price: f64,
    pub excess_demand: i64,
    pub total_agent_wealth: f64,
    pub market_maker_wealth: f64,
    pub spread: f64,
    pub rate: f64,
    pub n_buyers: u32,
    pub n_sellers: u32,
    pub n_frustrated: u32,
}

impl StepRecord {
    #[inline]
    pub fn price_change(&self) -> f64 {
        self.price_after - self.price_before
    }
}

/// A running endogenous market.
#[derive(Clone, Debug)]
pub struct Market {
    params: ModelParams,
    pub state: MarketState,
    pub agents: Vec<AgentState>,
    pub market_maker: MarketMakerState,
    spread: SpreadPolicy,
    zero: ZeroStrategy,
    rng: SimRng,
    next_agent_id: u64,
    /// Cumulative `w_exit - w_new` across replacements.
    pub boundary_outflow: f64,
    proposed: Vec<Decision>,
    effective: Vec<Decision>,
}

impl Market {
    pub fn new(params: ModelParams) -> Result<Self, ModelError> {
        params.validate()?;
        let agents = (0..params.n_agents as u64)
            .map(|id| AgentState::random(id, 0, &params))
            .collect();
        Ok(Self::assemble(params, agents))
    }

    /// Market whose agents hold the given strategy sets.
    pub fn with_strategies(
        params: ModelParams,
        strategies: Vec<Vec<Strategy>>,
    ) -> Result<Self, ModelError> {
        let mut params = params;
        params.n_agents = strategies.len();
        params.strategies_per_agent = strategies.iter().map(Vec::len).min().unwrap_or(0);
        params.validate()?;
        for set in &strategies {
            if set.iter().any(|s| s.table.len() != 1 << params.memory) {
                return Err(invalid("strategies", "table length must be 2^memory"));
            }
        }
        let agents = strategies
            .into_iter()
            .enumerate()
            .map(|(id, set)| {
                AgentState::new(
                    id as u64,
                    0,
                    set,
                    seed::stream(params.seed, 0, 0, id as u64),
                )
            })
            .collect();
        Ok(Self::assemble(params, agents))
    }

    fn assemble(params: ModelParams, agents: Vec<AgentState>) -> Self {
        let mut rng = seed::stream(params.seed, 0, 0, MARKET_STREAM);
        let history = rng.random::<u32>() & ((1u32 << params.memory) - 1);
        let n = agents.len();
        Market {
            state: MarketState {
                price: params.initial_price,
                transaction_price: params.initial_price,
                prev_transaction_price: None,
                history,
                memory: params.memory,
                time: 0,
                excess_demand_last: 0,
            },
            market_maker: MarketMakerState {
                current_rate: params.spread.current_rate(),
                ..Default::default()
            },
            spread: params.spread,
            zero: ZeroStrategy {
                enabled: params.zero_strategy,
                interest_rate: params.interest_rate,
            },
            rng,
            next_agent_id: n as u64,
            boundary_outflow: 0.0,
            proposed: vec![Decision::Hold; n],
            effective: vec![Decision::Hold; n],
            agents,
            params,
        }
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn spread_policy(&self) -> SpreadPolicy {
        self.spread
    }

    pub fn total_agent_wealth(&self) -> f64 {
        self.agents.iter().map(|a| a.wealth).sum()
    }

    pub fn total_position(&self) -> i64 {
        self.agents.iter().map(|a| i64::from(a.position)).sum()
    }

    pub fn market_rng(&mut self) -> &mut SimRng {
        &mut self.rng
    }

    pub fn next_agent_id(&mut self) -> u64 {
        let id = self.next_agent_id;
        self.next_agent_id += 1;
        id
    }

    pub fn advance(&mut self) -> Result<StepRecord, ModelError> {
        let k_max = self.params.max_position;
        let state = self.state.history as usize;
        let time = self.state.time;
        let price = self.state.price;

        // decisions, then clamping
        for (i, agent) in self.agents.iter_mut().enumerate() {
            let proposed = agent.decide(state, &self.zero);
            self.proposed[i] = proposed;
            self.effective[i] = clamp_action(agent.position, proposed, k_max);
        }

        let mut n_frustrated = 0;
        let mut excess_demand = match self.params.clearing {
            ClearingMode::MarketMaker => clear_market_maker(&self.effective),
            ClearingMode::Matched => {
                let outcome = clear_matched(&self.effective, &mut self.rng);
                n_frustrated = outcome.n_frustrated;
                for (agent, (eff, out)) in self
                    .agents
                    .iter_mut()
                    .zip(self.effective.iter_mut().zip(outcome.effective))
                {
                    agent.active = *eff == out;
                    *eff = out;
                }
                outcome.excess_demand
            }
        };
        if self.params.count_clamped_in_demand {
            excess_demand = clear_market_maker(&self.proposed);
        }

        let price_next = price_update(price, excess_demand, self.params.gamma);
        let pt = transaction_price(price, price_next, self.params.beta);
        let pt_prev = self.state.prev_transaction_price.unwrap_or(pt);

        let wealth_before = self.total_agent_wealth();
        let rate = self.spread.current_rate();
        let (spread, next_policy) =
            compute_spread(self.spread, pt, wealth_before, self.agents.len());
        self.spread = next_policy;

        let (mut n_buyers, mut n_sellers) = (0u32, 0u32);
        for (agent, &eff) in self.agents.iter_mut().zip(&self.effective) {
            n_buyers += u32::from(eff == Decision::Buy);
            n_sellers += u32::from(eff == Decision::Sell);
            if let Err((incremental, marked)) = settle_agent(agent, eff, pt, pt_prev, spread) {
                return Err(ModelError::Accounting {
                    agent: agent.id,
                    time,
                    wealth: incremental,
                    expected: marked,
                });
            }
            if agent.position.abs() > k_max {
                return Err(ModelError::PositionBound {
                    agent: agent.id,
                    time,
                    position: agent.position,
                    bound: k_max,
                });
            }
        }
        self.market_maker = mm_settle(self.market_maker, &self.effective, pt, spread);
        self.market_maker.current_rate = self.spread.current_rate();

        // virtual scores, as price takers with no spread
        let step = PriceStep {
            price_change: price_next - price,
            transaction_price: pt,
            prev_transaction_price: pt_prev,
        };
        let scheme = self.params.scheme;
        let interest = if self.zero.enabled {
            self.zero.interest_rate
        } else {
            0.0
        };
        for agent in &mut self.agents {
            for (strategy, score) in agent.strategies.iter().zip(agent.scores.iter_mut()) {
                *score = update_score(scheme, *score, strategy.decide(state), step, k_max);
            }
            agent.zero_score += interest;
        }

        let rose = if price_next > price {
            true
        } else if price_next < price {
            false
        } else {
            self.rng.random::<bool>()
        };
        self.state.push_outcome(rose);

        let total = self.total_agent_wealth();
        self.check_zero_sum(total, pt, time)?;

        self.state.price = price_next;
        self.state.prev_transaction_price = Some(pt);
        self.state.transaction_price = pt;
        self.state.excess_demand_last = excess_demand;
        self.state.time += 1;

        Ok(StepRecord {
            time,
            state: state as u32,
            price_before: price,
            price_after: price_next,
            transaction_price: pt,
            excess_demand,
            total_agent_wealth: total,
            market_maker_wealth: self.market_maker.wealth,
            spread,
            rate,
            n_buyers,
            n_sellers,
            n_frustrated: n_frustrated as u32,
        })
    }

    pub fn run(&mut self, steps: u64) -> Result<Vec<StepRecord>, ModelError> {
        (0..steps).map(|_| self.advance()).collect()
    }

    fn check_zero_sum(&self, agent_total: f64, pt: f64, time: u64) -> Result<(), ModelError> {
        let scale: f64 = self
            .agents
            .iter()
            .map(|a| a.cash.abs() + (f64::from(a.position) * pt).abs())
            .sum::<f64>()
            + self.market_maker.cash.abs()
            + (self.market_maker.inventory as f64 * pt).abs()
            + self.boundary_outflow.abs();
        if zero_sum_holds(
            agent_total,
            self.market_maker.wealth,
            self.boundary_outflow,
            scale,
        ) {
            Ok(())
        } else {
            Err(ModelError::ZeroSum {
                time,
                agents: agent_total,
                market_maker: self.market_maker.wealth,
                residual: agent_total + self.market_maker.wealth + self.boundary_outflow,
            })
        }
    }

    /// Removes agent `index`; the market maker takes over its position at
    /// the current mark, so its wealth leaves the market as cash. Returns
    /// the exiting agent.
    pub fn remove_agent(&mut self, index: usize) -> AgentState {
        let agent = self.agents.remove(index);
        self.proposed.pop();
        self.effective.pop();
        let pt = self.state.transaction_price;
        self.market_maker.inventory += i64::from(agent.position);
        self.market_maker.cash -= f64::from(agent.position) * pt;
        self.market_maker.mark(pt);
        self.boundary_outflow += agent.wealth;
        agent
    }

    /// Adds an agent holding `cash` and no stock.
    pub fn add_agent(&mut self, mut agent: AgentState, cash: f64) {
        agent.cash = cash;
        agent.wealth = cash;
        agent.position = 0;
        self.boundary_outflow -= cash;
        self.agents.push(agent);
        self.proposed.push(Decision::Hold);
        self.effective.push(Decision::Hold);
    }
}
