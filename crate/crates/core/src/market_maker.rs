//! Clearing modes, bid-ask spread policies and market-maker accounting.

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::model::{approx_eq, Decision};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SpreadPolicy {
    None,
    /// Constant half-spread `S`.
    Fixed {
        spread: f64,
    },
    /// `S(t) = R |P_T(t)|`.
    Rate {
        rate: f64,
    },
    /// `S(t) = R(t) |P_T(t)|` with `R` driven toward the target wealth;
    /// `rate` holds the current `R(t)`.
    Adaptive {
        rate: f64,
        eta: f64,
        target_wealth: f64,
    },
}

impl SpreadPolicy {
    pub fn current_rate(&self) -> f64 {
        match *self {
            SpreadPolicy::Rate { rate } | SpreadPolicy::Adaptive { rate, .. } => rate,
            _ => 0.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClearingMode {
    MarketMaker,
    Matched,
}

/// Returns the half-spread for this step and the policy to use next step.
/// `total_agent_wealth` is the agents' wealth before this step settles.
pub fn compute_spread(
    policy: SpreadPolicy,
    transaction_price: f64,
    total_agent_wealth: f64,
    n_agents: usize,
) -> (f64, SpreadPolicy) {
    match policy {
        SpreadPolicy::None => (0.0, policy),
        SpreadPolicy::Fixed { spread } => (spread, policy),
        SpreadPolicy::Rate { rate } => (rate * transaction_price.abs(), policy),
        SpreadPolicy::Adaptive {
            rate,
            eta,
            target_wealth,
        } => {
            let next =
                (rate + eta / n_agents as f64 * (target_wealth + total_agent_wealth)).max(0.0);
            (
                rate * transaction_price.abs(),
                SpreadPolicy::Adaptive {
                    rate: next,
                    eta,
                    target_wealth,
                },
            )
        }
    }
}

/// The market maker takes the other side of every order; effective actions
/// are the inputs and the excess demand is their sum.
pub fn clear_market_maker(actions: &[Decision]) -> i64 {
    actions.iter().map(|a| i64::from(a.value())).sum()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatchOutcome {
    pub effective: Vec<Decision>,
    /// Excess demand before matching; this still moves the price.
    pub excess_demand: i64,
    pub n_frustrated: usize,
}

/// Matches buyers against sellers. Agents on the heavier side are drawn
/// uniformly without replacement to fill the lighter side; the rest are
/// frustrated and hold.
pub fn clear_matched<R: Rng + ?Sized>(actions: &[Decision], rng: &mut R) -> MatchOutcome {
    let buyers: Vec<usize> = (0..actions.len())
        .filter(|&i| actions[i] == Decision::Buy)
        .collect();
    let sellers: Vec<usize> = (0..actions.len())
        .filter(|&i| actions[i] == Decision::Sell)
        .collect();
    let excess_demand = buyers.len() as i64 - sellers.len() as i64;
    let mut effective = actions.to_vec();
    let (majority, minority_len) = if buyers.len() > sellers.len() {
        (&buyers, sellers.len())
    } else {
        (&sellers, buyers.len())
    };
    let n_frustrated = majority.len() - minority_len;
    if n_frustrated > 0 {
        let mut keep = vec![false; majority.len()];
        for idx in sample(rng, majority.len(), minority_len) {
            keep[idx] = true;
        }
        for (slot, &agent) in majority.iter().enumerate() {
            if !keep[slot] {
                effective[agent] = Decision::Hold;
            }
        }
    }
    MatchOutcome {
        effective,
        excess_demand,
        n_frustrated,
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct MarketMakerState {
    pub cash: f64,
    /// Always `-sum(k_i)` over the agents present.
    pub inventory: i64,
    pub wealth: f64,
    pub current_rate: f64,
    /// Spread collected over the whole run.
    pub spread_income: f64,
}

impl MarketMakerState {
    pub fn mark(&mut self, transaction_price: f64) {
        self.wealth = self.cash + self.inventory as f64 * transaction_price;
    }
}

/// Books the counter-side of the agents' effective trades. Every
/// transacting agent pays `spread` on top of the mid transaction price.
pub fn mm_settle(
    mm: MarketMakerState,
    effective: &[Decision],
    transaction_price: f64,
    spread: f64,
) -> MarketMakerState {
    let mut net = 0i64;
    let mut traded = 0u64;
    for a in effective {
        net += i64::from(a.value());
        traded += u64::from(*a != Decision::Hold);
    }
    let income = traded as f64 * spread;
    let mut next = mm;
    next.inventory -= net;
    next.cash += net as f64 * transaction_price + income;
    next.spread_income += income;
    next.mark(transaction_price);
    next
}

/// `true` when `agents + market_maker + outflow` vanishes relative to the
/// magnitude of the legs that were summed.
pub fn zero_sum_holds(agent_total: f64, market_maker: f64, outflow: f64, scale: f64) -> bool {
    approx_eq(agent_total + market_maker + outflow, 0.0, scale)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::stream;
    use Decision::{Buy, Hold, Sell};

    #[test]
    fn rate_spread_uses_absolute_price() {
        let (s, _) = compute_spread(SpreadPolicy::Rate { rate: 0.001 }, -50.0, 0.0, 10);
        assert!((s - 0.05).abs() < 1e-15);
    }

    #[test]
    fn adaptive_rate_step() {
        let policy = SpreadPolicy::Adaptive {
            rate: 0.001,
            eta: 1e-5,
            target_wealth: 0.0,
        };
        let (_, next) = compute_spread(policy, 10.0, 100.0, 100);
        assert!((next.current_rate() - 0.00101).abs() < 1e-15);
    }

    #[test]
    fn adaptive_rate_floors_at_zero() {
        let policy = SpreadPolicy::Adaptive {
            rate: 1e-6,
            eta: 1e-4,
            target_wealth: 0.0,
        };
        let (_, next) = compute_spread(policy, 10.0, -10.0, 100);
        assert_eq!(next.current_rate(), 0.0);
    }

    #[test]
    fn fixed_and_none() {
        assert_eq!(compute_spread(SpreadPolicy::None, 3.0, 1.0, 1).0, 0.0);
        assert_eq!(
            compute_spread(SpreadPolicy::Fixed { spread: 0.4 }, 3.0, 1.0, 1).0,
            0.4
        );
    }

    #[test]
    fn market_maker_clearing() {
        assert_eq!(clear_market_maker(&[Buy, Buy, Sell]), 1);
        assert_eq!(clear_market_maker(&[Hold; 5]), 0);
        assert_eq!(clear_market_maker(&[Buy; 7]), 7);
        let mm = mm_settle(MarketMakerState::default(), &[Buy, Buy, Sell], 10.0, 0.0);
        assert_eq!(mm.inventory, -1);
    }

    #[test]
    fn matched_five_buyers_three_sellers() {
        let mut rng = stream(5, 0, 0, 0);
        let actions = [Buy, Buy, Sell, Buy, Sell, Buy, Sell, Buy];
        let out = clear_matched(&actions, &mut rng);
        assert_eq!(out.excess_demand, 2);
        assert_eq!(out.n_frustrated, 2);
        let buys = out.effective.iter().filter(|&&a| a == Buy).count();
        let sells = out.effective.iter().filter(|&&a| a == Sell).count();
        assert_eq!((buys, sells), (3, 3));
        for (a, e) in actions.iter().zip(&out.effective) {
            assert!(e == a || *e == Hold);
        }
    }

    #[test]
    fn matched_one_sided_market_has_no_trades() {
        let mut rng = stream(5, 0, 0, 0);
        let out = clear_matched(&[Buy; 5], &mut rng);
        assert_eq!(out.excess_demand, 5);
        assert_eq!(out.n_frustrated, 5);
        assert!(out.effective.iter().all(|&a| a == Hold));
    }

    #[test]
    fn matched_balanced_market_frustrates_nobody() {
        let mut rng = stream(5, 0, 0, 0);
        let actions = [Buy, Sell, Buy, Sell, Buy, Sell];
        let out = clear_matched(&actions, &mut rng);
        assert_eq!(out.n_frustrated, 0);
        assert_eq!(out.effective, actions.to_vec());
    }

    #[test]
    fn matched_draw_is_uniform() {
        let mut rng = stream(9, 0, 0, 0);
        let actions = [Buy, Buy, Buy, Buy, Sell];
        let mut kept = [0u32; 4];
        let trials = 20_000;
        for _ in 0..trials {
            let out = clear_matched(&actions, &mut rng);
            for (k, a) in kept.iter_mut().zip(&out.effective) {
                *k += u32::from(*a == Buy);
            }
        }
        let sd = (trials as f64 * 0.25 * 0.75).sqrt();
        for k in kept {
            assert!((k as f64 - trials as f64 / 4.0).abs() < 4.0 * sd);
        }
    }

    #[test]
    fn spread_income_per_transacting_agent() {
        let mm = mm_settle(
            MarketMakerState::default(),
            &[Buy, Buy, Sell, Sell, Hold],
            10.0,
            0.5,
        );
        assert_eq!(mm.spread_income, 2.0);
        assert_eq!(mm.inventory, 0);
        assert_eq!(mm.wealth, 2.0);
    }
}
