//! Statistics over recorded runs: predictability, volatility, wealth gain,
//! attractor classification, tail exponents and size scaling.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::MetricsError;

/// Half-open step range `[start, end)` after the equilibration cutoff.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MetricsWindow {
    pub start: usize,
    pub end: usize,
}

impl MetricsWindow {
    /// Drops the first `transient_fraction` of `len` steps.
    pub fn after_transient(len: usize, transient_fraction: f64) -> Result<Self, MetricsError> {
        let start = ((len as f64) * transient_fraction.clamp(0.0, 1.0)).floor() as usize;
        if start >= len {
            return Err(MetricsError::EmptyWindow);
        }
        Ok(MetricsWindow { start, end: len })
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    pub fn slice<'a, T>(&self, data: &'a [T]) -> &'a [T] {
        &data[self.start..self.end]
    }
}

/// `H = sum_mu rho(mu) <dP|mu>^2`. `histories[i]` is the state that
/// preceded `price_changes[i]`.
pub fn predictability(
    price_changes: &[f64],
    histories: &[u32],
    memory: usize,
) -> Result<f64, MetricsError> {
    if price_changes.len() != histories.len() {
        return Err(MetricsError::Misaligned {
            changes: price_changes.len(),
            histories: histories.len(),
        });
    }
    if price_changes.is_empty() {
        return Err(MetricsError::EmptyWindow);
    }
    let states = 1usize << memory;
    let mut count = vec![0u64; states];
    let mut sum = vec![0.0f64; states];
    for (&dp, &mu) in price_changes.iter().zip(histories) {
        let mu = mu as usize & (states - 1);
        count[mu] += 1;
        sum[mu] += dp;
    }
    let n = price_changes.len() as f64;
    Ok(count
        .iter()
        .zip(&sum)
        .filter(|(&c, _)| c > 0)
        .map(|(&c, &s)| {
            let mean = s / c as f64;
            (c as f64 / n) * mean * mean
        })
        .sum())
}

/// Population standard deviation of the price changes.
pub fn volatility(price_changes: &[f64]) -> Result<f64, MetricsError> {
    if price_changes.len() < 2 {
        return Err(MetricsError::WindowTooShort {
            len: price_changes.len(),
            required: 2,
        });
    }
    let n = price_changes.len() as f64;
    let mean = price_changes.iter().sum::<f64>() / n;
    let var = price_changes
        .iter()
        .map(|x| (x - mean).powi(2))
        .sum::<f64>()
        / n;
    Ok(var.sqrt())
}

/// Excess kurtosis, population convention (0 for a Gaussian).
pub fn excess_kurtosis(xs: &[f64]) -> Result<f64, MetricsError> {
    if xs.len() < 4 {
        return Err(MetricsError::WindowTooShort {
            len: xs.len(),
            required: 4,
        });
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let (m2, m4) = xs.iter().fold((0.0, 0.0), |(m2, m4), x| {
        let d = (x - mean) * (x - mean);
        (m2 + d, m4 + d * d)
    });
    let (m2, m4) = (m2 / n, m4 / n);
    if m2 == 0.0 {
        return Ok(0.0);
    }
    Ok(m4 / (m2 * m2) - 3.0)
}

/// Least-squares slope against the step index.
pub fn ls_slope(ys: &[f64]) -> f64 {
    let n = ys.len();
    if n < 2 {
        return 0.0;
    }
    let xbar = (n as f64 - 1.0) / 2.0;
    let ybar = ys.iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (i, y) in ys.iter().enumerate() {
        let dx = i as f64 - xbar;
        sxy += dx * (y - ybar);
        sxx += dx * dx;
    }
    sxy / sxx
}

/// Slope of the per-agent average wealth over the window.
pub fn wealth_gain_per_step(
    total_wealth: &[f64],
    n_agents: usize,
    window: MetricsWindow,
) -> Result<f64, MetricsError> {
    if window.is_empty() || window.end > total_wealth.len() {
        return Err(MetricsError::EmptyWindow);
    }
    Ok(ls_slope(window.slice(total_wealth)) / n_agents as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Attractor {
    Arbitrageur,
    Trendsetter,
    Irregular,
    Quiet,
    Unclassified,
}

impl Attractor {
    pub const ALL: [Attractor; 5] = [
        Attractor::Arbitrageur,
        Attractor::Trendsetter,
        Attractor::Irregular,
        Attractor::Quiet,
        Attractor::Unclassified,
    ];
}

impl fmt::Display for Attractor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Attractor::Arbitrageur => "arbitrageur",
            Attractor::Trendsetter => "trendsetter",
            Attractor::Irregular => "irregular",
            Attractor::Quiet => "quiet",
            Attractor::Unclassified => "unclassified",
        })
    }
}

impl FromStr for Attractor {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Attractor::ALL
            .into_iter()
            .find(|a| a.to_string() == s)
            .ok_or_else(|| format!("unknown attractor label `{s}`"))
    }
}

/// Thresholds that turn a price path into an attractor label.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassifierConfig {
    pub memory: usize,
    pub min_window: usize,
    /// Trailing steps that must be strictly period-2.
    pub periodic_window: usize,
    /// Upper bound on the coefficient of variation of rise (and fall) magnitudes.
    pub magnitude_tolerance: f64,
    pub min_cycles: usize,
}

impl ClassifierConfig {
    pub fn new(memory: usize) -> Self {
        ClassifierConfig {
            memory,
            min_window: 1000,
            periodic_window: 500,
            magnitude_tolerance: 0.1,
            min_cycles: 2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Run {
    pub len: usize,
    pub magnitude: f64,
}

/// The rise and fall legs of a four-stage trend cycle.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrendCycles {
    pub rises: Vec<Run>,
    pub falls: Vec<Run>,
    pub plateaus: Vec<usize>,
}

impl TrendCycles {
    pub fn shortest_leg(&self) -> usize {
        self.rises
            .iter()
            .chain(&self.falls)
            .map(|r| r.len)
            .min()
            .unwrap_or(0)
    }
}

fn sign(x: f64) -> i8 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}

fn sign_runs(changes: &[f64]) -> Vec<(i8, Run)> {
    let mut runs: Vec<(i8, Run)> = Vec::new();
    for &dp in changes {
        let s = sign(dp);
        match runs.last_mut() {
            Some((last, run)) if *last == s => {
                run.len += 1;
                run.magnitude += dp.abs();
            }
            _ => runs.push((
                s,
                Run {
                    len: 1,
                    magnitude: dp.abs(),
                },
            )),
        }
    }
    runs
}

/// Coefficient of variation of the leg magnitudes.
fn magnitude_variation(runs: &[Run]) -> f64 {
    let n = runs.len() as f64;
    let mean = runs.iter().map(|r| r.magnitude).sum::<f64>() / n;
    let var = runs
        .iter()
        .map(|r| (r.magnitude - mean).powi(2))
        .sum::<f64>()
        / n;
    if mean > 0.0 {
        var.sqrt() / mean
    } else {
        f64::INFINITY
    }
}

/// Decomposes the changes into repeated rise, plateau, fall, plateau
/// cycles. Partial cycles at both ends are trimmed. Returns `None` if any
/// interior run breaks the pattern.
pub fn trend_cycles(changes: &[f64], cfg: &ClassifierConfig) -> Option<TrendCycles> {
    let runs = sign_runs(changes);
    let first_plateau = runs.iter().position(|(s, _)| *s == 0)?;
    let last_plateau = runs.iter().rposition(|(s, _)| *s == 0)?;
    if last_plateau <= first_plateau {
        return None;
    }
    let body = &runs[first_plateau + 1..last_plateau];
    let mut cycles = TrendCycles::default();
    let mut expect_leg = true;
    let mut last_leg = 0i8;
    for &(s, run) in body {
        if expect_leg {
            if s == 0 || s == last_leg || run.len < cfg.memory {
                return None;
            }
            if s > 0 {
                cycles.rises.push(run);
            } else {
                cycles.falls.push(run);
            }
            last_leg = s;
        } else {
            if s != 0 {
                return None;
            }
            cycles.plateaus.push(run.len);
        }
        expect_leg = !expect_leg;
    }
    if cycles.rises.len() < cfg.min_cycles || cycles.falls.len() < cfg.min_cycles {
        return None;
    }
    if magnitude_variation(&cycles.rises) >= cfg.magnitude_tolerance
        || magnitude_variation(&cycles.falls) >= cfg.magnitude_tolerance
    {
        return None;
    }
    Some(cycles)
}

fn is_period_two(changes: &[f64]) -> bool {
    let Some(&first) = changes.first() else {
        return false;
    };
    let magnitude = first.abs();
    if magnitude == 0.0 {
        return false;
    }
    let tol = 1e-9 * magnitude;
    changes
        .windows(2)
        .all(|w| sign(w[0]) == -sign(w[1]) && (w[1].abs() - magnitude).abs() <= tol)
}

/// Labels a post-transient price path.
pub fn classify_attractor(prices: &[f64], cfg: &ClassifierConfig) -> Attractor {
    if prices.len() < cfg.min_window.max(cfg.periodic_window) + 1 {
        return Attractor::Unclassified;
    }
    let changes: Vec<f64> = prices.windows(2).map(|w| w[1] - w[0]).collect();
    classify_changes(&changes, cfg)
}

pub fn classify_changes(changes: &[f64], cfg: &ClassifierConfig) -> Attractor {
    if changes.len() < cfg.min_window.max(cfg.periodic_window) {
        return Attractor::Unclassified;
    }
    if changes.iter().all(|&dp| dp == 0.0) {
        return Attractor::Quiet;
    }
    if is_period_two(&changes[changes.len() - cfg.periodic_window..]) {
        return Attractor::Arbitrageur;
    }
    if trend_cycles(changes, cfg).is_some() {
        return Attractor::Trendsetter;
    }
    Attractor::Irregular
}

/// Hill tail estimate of `|x|`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailExponent {
    /// Tail index `alpha > 0` of the survival function `P(|X| > x) ~ x^-alpha`.
    pub alpha: f64,
    pub order_statistics: usize,
}

impl TailExponent {
    /// The survival-function exponent, `-alpha`.
    pub fn exponent(&self) -> f64 {
        -self.alpha
    }

    /// Below this index the estimate is read as a power-law tail.
    pub const FAT_TAIL_LIMIT: f64 = 8.0;

    pub fn is_fat_tailed(&self) -> bool {
        self.alpha < Self::FAT_TAIL_LIMIT
    }
}

pub const MIN_TAIL_SAMPLES: usize = 10_000;

/// Hill estimator over the largest `top_fraction` of `|x|`.
pub fn tail_exponent(xs: &[f64], top_fraction: f64) -> Result<TailExponent, MetricsError> {
    if xs.len() < MIN_TAIL_SAMPLES {
        return Err(MetricsError::WindowTooShort {
            len: xs.len(),
            required: MIN_TAIL_SAMPLES,
        });
    }
    let mut abs: Vec<f64> = xs.iter().map(|x| x.abs()).collect();
    abs.sort_by(|a, b| b.total_cmp(a));
    let k = ((abs.len() as f64 * top_fraction).floor() as usize).clamp(1, abs.len() - 1);
    let threshold = abs[k];
    if threshold <= 0.0 {
        return Err(MetricsError::DegenerateTail);
    }
    let ln_threshold = threshold.ln();
    let mean_log_excess = abs[..k].iter().map(|x| x.ln() - ln_threshold).sum::<f64>() / k as f64;
    if mean_log_excess <= 0.0 {
        return Err(MetricsError::DegenerateTail);
    }
    Ok(TailExponent {
        alpha: 1.0 / mean_log_excess,
        order_statistics: k,
    })
}

/// Cross-check: slope of log rank against log value over the same tail.
pub fn rank_regression_exponent(xs: &[f64], top_fraction: f64) -> Result<f64, MetricsError> {
    let mut abs: Vec<f64> = xs.iter().map(|x| x.abs()).filter(|x| *x > 0.0).collect();
    if abs.len() < MIN_TAIL_SAMPLES.min(xs.len().max(2)) || abs.len() < 2 {
        return Err(MetricsError::DegenerateTail);
    }
    abs.sort_by(|a, b| b.total_cmp(a));
    let k = ((abs.len() as f64 * top_fraction).floor() as usize).clamp(2, abs.len());
    let points: Vec<(f64, f64)> = abs[..k]
        .iter()
        .enumerate()
        .map(|(rank, x)| (x.ln(), ((rank + 1) as f64).ln()))
        .collect();
    let (slope, _) = linear_fit(&points);
    Ok(slope)
}

/// Ordinary least squares; returns `(slope, intercept)`.
pub fn linear_fit(points: &[(f64, f64)]) -> (f64, f64) {
    let n = points.len() as f64;
    let xbar = points.iter().map(|p| p.0).sum::<f64>() / n;
    let ybar = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|(x, y)| (x - xbar) * (y - ybar)).sum();
    let sxx: f64 = points.iter().map(|(x, _)| (x - xbar).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, ybar - slope * xbar)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhasePointSummary {
    pub gamma: f64,
    pub beta: f64,
    pub max_position: i32,
    pub n_agents: usize,
    pub samples: usize,
    pub wealth_gain_per_step: f64,
    pub wealth_gain_stderr: f64,
    pub predictability: f64,
    pub volatility: f64,
    pub attractor_counts: Vec<(Attractor, usize)>,
    pub tail_exponent: Option<f64>,
}

impl PhasePointSummary {
    pub fn count(&self, label: Attractor) -> usize {
        self.attractor_counts
            .iter()
            .find(|(a, _)| *a == label)
            .map_or(0, |(_, c)| *c)
    }

    pub fn probability(&self, label: Attractor) -> f64 {
        self.count(label) as f64 / self.samples.max(1) as f64
    }

    /// Most frequent label; ties resolve in `Attractor::ALL` order.
    pub fn dominant(&self) -> Attractor {
        Attractor::ALL
            .into_iter()
            .max_by_key(|a| (self.count(*a), std::cmp::Reverse(*a)))
            .unwrap_or(Attractor::Unclassified)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub gamma: f64,
    pub predictability_slope: f64,
    pub volatility_slope: f64,
    /// `predictability_slope - 2 gamma`.
    pub predictability_deviation: f64,
    /// `volatility_slope - gamma`.
    pub volatility_deviation: f64,
}

/// Log-log slopes of H and sigma against N across phase points that share
/// everything but N.
pub fn scaling_check(summaries: &[PhasePointSummary], gamma: f64) -> ScalingReport {
    let fit = |f: &dyn Fn(&PhasePointSummary) -> f64| {
        let pts: Vec<(f64, f64)> = summaries
            .iter()
            .map(|s| ((s.n_agents as f64).ln(), f(s).ln()))
            .collect();
        linear_fit(&pts).0
    };
    let h = fit(&|s| s.predictability);
    let v = fit(&|s| s.volatility);
    ScalingReport {
        gamma,
        predictability_slope: h,
        volatility_slope: v,
        predictability_deviation: h - 2.0 * gamma,
        volatility_deviation: v - gamma,
    }
}
