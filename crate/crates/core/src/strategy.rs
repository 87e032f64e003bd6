//! Strategy tables, payoff schemes and strategy selection.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::TableError;
use crate::model::{clamp_action, Decision};

/// Lookup table from history state to decision; `table.len() == 2^m`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Strategy {
    pub id: u64,
    pub table: Vec<Decision>,
}

impl Strategy {
    #[inline]
    pub fn decide(&self, state: usize) -> Decision {
        self.table[state]
    }

    pub fn memory(&self) -> usize {
        self.table.len().trailing_zeros() as usize
    }

    pub fn has_buy_and_sell(&self) -> bool {
        self.table.contains(&Decision::Buy) && self.table.contains(&Decision::Sell)
    }

    /// Comma-separated row of decisions, state 0 first.
    pub fn to_row(&self) -> String {
        let cells: Vec<String> = self.table.iter().map(|d| d.value().to_string()).collect();
        cells.join(",")
    }
}

pub fn gen_strategy<R: Rng + ?Sized>(
    id: u64,
    rng: &mut R,
    memory: usize,
    require_buy_sell: bool,
) -> Strategy {
    let len = 1usize << memory;
    loop {
        let table: Vec<Decision> = (0..len)
            .map(|_| match rng.random_range(0..3u8) {
                0 => Decision::Sell,
                1 => Decision::Hold,
                _ => Decision::Buy,
            })
            .collect();
        let strategy = Strategy { id, table };
        if !require_buy_sell || strategy.has_buy_and_sell() {
            return strategy;
        }
    }
}

/// Parses one strategy per non-empty line (`#` starts a comment). All rows
/// must share one power-of-two length.
pub fn parse_strategy_table(text: &str) -> Result<Vec<Strategy>, TableError> {
    let mut out = Vec::new();
    let mut expected = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let mut table = Vec::new();
        for token in body.split(',') {
            let token = token.trim();
            let decision = token
                .parse::<i32>()
                .ok()
                .and_then(Decision::from_value)
                .ok_or_else(|| TableError::BadEntry {
                    line,
                    token: token.to_string(),
                })?;
            table.push(decision);
        }
        let len = table.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(TableError::BadLength { line, len });
        }
        match expected {
            Some(e) if e != len => {
                return Err(TableError::Ragged {
                    line,
                    len,
                    expected: e,
                })
            }
            _ => expected = Some(len),
        }
        out.push(Strategy {
            id: out.len() as u64,
            table,
        });
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PayoffScheme {
    Wealth,
    Minority,
    Dollar,
    Majority,
}

impl PayoffScheme {
    pub const ALL: [PayoffScheme; 4] = [
        PayoffScheme::Wealth,
        PayoffScheme::Minority,
        PayoffScheme::Dollar,
        PayoffScheme::Majority,
    ];
}

impl fmt::Display for PayoffScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PayoffScheme::Wealth => "wealth",
            PayoffScheme::Minority => "minority",
            PayoffScheme::Dollar => "dollar",
            PayoffScheme::Majority => "majority",
        })
    }
}

impl FromStr for PayoffScheme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "wealth" => Ok(PayoffScheme::Wealth),
            "minority" => Ok(PayoffScheme::Minority),
            "dollar" => Ok(PayoffScheme::Dollar),
            "majority" => Ok(PayoffScheme::Majority),
            other => Err(format!(
                "unknown payoff scheme `{other}` (wealth|minority|dollar|majority)"
            )),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StrategyScore {
    pub virtual_wealth: f64,
    /// Used by the wealth scheme only.
    pub virtual_position: i32,
    /// Previous decision, used by the dollar scheme only.
    pub last_action: Decision,
}

/// The always-hold candidate of the grand-canonical variant. Its score
/// grows by `interest_rate` each step from zero.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ZeroStrategy {
    pub enabled: bool,
    pub interest_rate: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Choice {
    Strategy(usize),
    Zero,
}

/// Argmax of virtual wealth, ties broken uniformly at random. The zero
/// strategy competes with `zero_score` when enabled.
pub fn select_strategy<R: Rng + ?Sized>(
    scores: &[StrategyScore],
    zero: &ZeroStrategy,
    zero_score: f64,
    rng: &mut R,
) -> Choice {
    let mut best = f64::NEG_INFINITY;
    let mut choice = None;
    let mut ties = 0u32;
    let candidates = scores
        .iter()
        .enumerate()
        .map(|(i, s)| (Choice::Strategy(i), s.virtual_wealth))
        .chain(zero.enabled.then_some((Choice::Zero, zero_score)));
    for (candidate, value) in candidates {
        if value > best || choice.is_none() {
            best = value;
            choice = Some(candidate);
            ties = 1;
        } else if value == best {
            ties += 1;
            if rng.random_range(0..ties) == 0 {
                choice = Some(candidate);
            }
        }
    }
    choice.expect("select_strategy needs at least one candidate")
}

/// Price inputs for one score update. `price_change` is `P(t+1) - P(t)`,
/// either realized (endogenous) or taken from the exogenous series.
#[derive(Clone, Copy, Debug)]
pub struct PriceStep {
    pub price_change: f64,
    pub transaction_price: f64,
    pub prev_transaction_price: f64,
}

pub fn update_score(
    scheme: PayoffScheme,
    score: StrategyScore,
    decision: Decision,
    step: PriceStep,
    max_position: i32,
) -> StrategyScore {
    let a = f64::from(decision.value());
    let mut next = score;
    match scheme {
        PayoffScheme::Wealth => {
            next.virtual_wealth += f64::from(score.virtual_position)
                * (step.transaction_price - step.prev_transaction_price);
            let effective = clamp_action(score.virtual_position, decision, max_position);
            next.virtual_position += effective.value();
        }
        PayoffScheme::Minority => next.virtual_wealth -= a * step.price_change,
        PayoffScheme::Dollar => {
            next.virtual_wealth += f64::from(score.last_action.value()) * step.price_change;
        }
        PayoffScheme::Majority => next.virtual_wealth += a * step.price_change,
    }
    next.last_action = decision;
    next
}
