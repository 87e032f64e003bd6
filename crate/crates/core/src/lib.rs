// Negated float comparisons are used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod backtest;
pub mod config;
pub mod error;
pub mod evolution;
pub mod harness;
pub mod market_maker;
pub mod metrics;
pub mod model;
pub mod seed;
pub mod series;
pub mod strategy;
