//! Scenario execution and artifact emission for the `run`, `sweep`, `evolve`
//! and `backtest` commands.
//!
//! Every output directory gets a `meta` file: comment lines with the crate
//! version, RNG algorithm and command, followed by the resolved config in
//! config-file syntax. JSON summaries also embed the config. Sweeps flush one
//! CSV row per phase point and resume an interrupted run when the `meta`
//! file matches.

use std::collections::{BTreeMap, HashSet};
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use crate::backtest::{run_backtest, BacktestSummary};
use crate::config::Config;
use crate::error::{HarnessError, MetricsError};
use crate::evolution::{run_evolution, survival_curve, SurvivalLog, SurvivalPoint};
use crate::metrics::{
    classify_changes, excess_kurtosis, predictability, scaling_check, tail_exponent, volatility,
    wealth_gain_per_step, Attractor, ClassifierConfig, MetricsWindow, PhasePointSummary,
    ScalingReport, MIN_TAIL_SAMPLES,
};
use crate::model::{Market, ModelParams, StepRecord};
use crate::seed::{derive_seed, RNG_ALGORITHM};
use crate::series::load_series;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub const SWEEP_COLUMNS: [&str; 16] = [
    "gamma",
    "beta",
    "max_position",
    "n_agents",
    "samples",
    "wealth_gain_per_step",
    "wealth_gain_stderr",
    "predictability",
    "volatility",
    "n_arbitrageur",
    "n_trendsetter",
    "n_irregular",
    "n_quiet",
    "n_unclassified",
    "dominant",
    "tail_exponent",
];

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Body of the `meta` file.
pub fn meta_text(command: &str, config: &Config) -> String {
    format!(
        "# wgame {VERSION}\n# command: {command}\n# rng: {RNG_ALGORITHM}\n{}",
        config.to_text()
    )
}

/// The config as a sorted key-value map for JSON artifacts.
pub fn config_map(config: &Config) -> BTreeMap<&'static str, String> {
    config.entries().into_iter().collect()
}

fn prepare_dir(out: &Path) -> Result<(), HarnessError> {
    fs::create_dir_all(out).map_err(io_err(out))
}

fn write_file(path: &Path, body: &str) -> Result<(), HarnessError> {
    fs::write(path, body).map_err(io_err(path))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), HarnessError> {
    let mut body = serde_json::to_string_pretty(value)?;
    body.push('\n');
    write_file(path, &body)
}

fn csv_writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>, HarnessError> {
    let file = File::create(path).map_err(io_err(path))?;
    Ok(csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(BufWriter::new(file)))
}

/// Analysis settings shared by every sample.
#[derive(Clone, Copy, Debug)]
pub struct Analysis {
    pub transient: f64,
    pub classifier: ClassifierConfig,
    /// Trailing steps handed to the attractor classifier.
    pub classifier_window: usize,
    pub tail_fraction: f64,
}

impl Analysis {
    pub fn from_config(config: &Config) -> Self {
        Analysis {
            transient: config.transient,
            classifier: config.classifier(),
            classifier_window: config.classifier_window,
            tail_fraction: config.tail_fraction,
        }
    }
}

/// Per-sample observables.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SampleMetrics {
    pub wealth_gain_per_step: f64,
    pub predictability: f64,
    pub volatility: f64,
    pub excess_kurtosis: f64,
    pub attractor: Attractor,
}

/// Price changes after the transient.
pub fn window_changes(records: &[StepRecord], transient: f64) -> Result<Vec<f64>, MetricsError> {
    let window = MetricsWindow::after_transient(records.len(), transient)?;
    Ok(window
        .slice(records)
        .iter()
        .map(StepRecord::price_change)
        .collect())
}

pub fn analyze(
    records: &[StepRecord],
    params: &ModelParams,
    analysis: &Analysis,
) -> Result<SampleMetrics, MetricsError> {
    let window = MetricsWindow::after_transient(records.len(), analysis.transient)?;
    let kept = window.slice(records);
    let changes: Vec<f64> = kept.iter().map(StepRecord::price_change).collect();
    let states: Vec<u32> = kept.iter().map(|r| r.state).collect();
    let wealth: Vec<f64> = records.iter().map(|r| r.total_agent_wealth).collect();
    let all_changes: Vec<f64> = records.iter().map(StepRecord::price_change).collect();
    let tail_start = all_changes.len().saturating_sub(analysis.classifier_window);
    Ok(SampleMetrics {
        wealth_gain_per_step: wealth_gain_per_step(&wealth, params.n_agents, window)?,
        predictability: predictability(&changes, &states, params.memory)?,
        volatility: volatility(&changes)?,
        excess_kurtosis: excess_kurtosis(&changes).unwrap_or(f64::NAN),
        attractor: classify_changes(&all_changes[tail_start..], &analysis.classifier),
    })
}

/// Hill estimate reported as the survival-function exponent, when the pool
/// is large enough and not degenerate.
pub fn pooled_tail(changes: &[f64], top_fraction: f64) -> Option<f64> {
    if changes.len() < MIN_TAIL_SAMPLES {
        return None;
    }
    tail_exponent(changes, top_fraction)
        .ok()
        .map(|t| t.exponent())
}

#[derive(Clone, Debug, Serialize)]
pub struct RunSummary {
    pub command: &'static str,
    pub version: &'static str,
    pub rng: &'static str,
    pub seed: u64,
    pub steps: u64,
    pub n_agents: usize,
    pub metrics: SampleMetrics,
    pub tail_exponent: Option<f64>,
    pub final_price: f64,
    pub final_total_agent_wealth: f64,
    pub final_market_maker_wealth: f64,
    pub config: BTreeMap<&'static str, String>,
}

pub struct RunOutcome {
    pub records: Vec<StepRecord>,
    pub summary: RunSummary,
}

/// One market of `steps` steps with the configured parameters.
pub fn simulate_run(config: &Config) -> Result<RunOutcome, HarnessError> {
    config.validate()?;
    let params = config.model_params();
    let mut market = Market::new(params.clone())?;
    let records = market.run(config.steps)?;
    let analysis = Analysis::from_config(config);
    let metrics = analyze(&records, &params, &analysis)?;
    let tail = pooled_tail(
        &window_changes(&records, config.transient)?,
        config.tail_fraction,
    );
    let last = records.last().expect("at least one step");
    let summary = RunSummary {
        command: "run",
        version: VERSION,
        rng: RNG_ALGORITHM,
        seed: config.seed,
        steps: config.steps,
        n_agents: config.n_agents,
        metrics,
        tail_exponent: tail,
        final_price: last.price_after,
        final_total_agent_wealth: last.total_agent_wealth,
        final_market_maker_wealth: last.market_maker_wealth,
        config: config_map(config),
    };
    Ok(RunOutcome { records, summary })
}

/// Writes `steps.csv`, `summary.json` and `meta`.
pub fn run(config: &Config, out: &Path) -> Result<RunSummary, HarnessError> {
    let outcome = simulate_run(config)?;
    prepare_dir(out)?;
    write_file(&out.join("meta"), &meta_text("run", config))?;
    let mut w = csv_writer(&out.join("steps.csv"))?;
    for r in &outcome.records {
        w.serialize(r)?;
    }
    w.flush().map_err(io_err(&out.join("steps.csv")))?;
    write_json(&out.join("summary.json"), &outcome.summary)?;
    Ok(outcome.summary)
}

/// One point of a sweep grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridPoint {
    pub index: u64,
    pub gamma: f64,
    pub beta: f64,
    pub max_position: i32,
    pub n_agents: usize,
}

impl GridPoint {
    fn key(&self) -> [String; 4] {
        [
            self.gamma.to_string(),
            self.beta.to_string(),
            self.max_position.to_string(),
            self.n_agents.to_string(),
        ]
    }
}

/// Grid points in output order: gamma outermost, then beta, K and N.
pub fn grid(config: &Config) -> Vec<GridPoint> {
    let s = &config.sweep;
    let mut points = Vec::new();
    for &gamma in &s.gamma {
        for &beta in &s.beta {
            for &max_position in &s.max_position {
                for &n_agents in &s.n_agents {
                    points.push(GridPoint {
                        index: points.len() as u64,
                        gamma,
                        beta,
                        max_position,
                        n_agents,
                    });
                }
            }
        }
    }
    points
}

/// Model parameters of sample `sample` at `point`. The market seed depends
/// only on the master seed and the point and sample indices.
pub fn point_params(config: &Config, point: &GridPoint, sample: u64) -> ModelParams {
    let mut params = config.model_params();
    params.gamma = point.gamma;
    params.beta = point.beta;
    params.max_position = point.max_position;
    params.n_agents = point.n_agents;
    params.seed = derive_seed(config.seed, point.index, sample, 0);
    params
}

/// Runs every sample of one grid point and aggregates.
pub fn simulate_point(
    config: &Config,
    point: &GridPoint,
) -> Result<PhasePointSummary, HarnessError> {
    let analysis = Analysis::from_config(config);
    let samples = config.sweep.samples;
    let results: Vec<(SampleMetrics, Vec<f64>)> = (0..samples as u64)
        .into_par_iter()
        .map(|sample| -> Result<_, HarnessError> {
            let params = point_params(config, point, sample);
            let records = Market::new(params.clone())?.run(config.steps)?;
            let metrics = analyze(&records, &params, &analysis)?;
            Ok((metrics, window_changes(&records, config.transient)?))
        })
        .collect::<Result<_, _>>()?;

    let n = results.len() as f64;
    let mean = |f: &dyn Fn(&SampleMetrics) -> f64| results.iter().map(|r| f(&r.0)).sum::<f64>() / n;
    let gain = mean(&|m| m.wealth_gain_per_step);
    let gain_var = if results.len() > 1 {
        results
            .iter()
            .map(|r| (r.0.wealth_gain_per_step - gain).powi(2))
            .sum::<f64>()
            / (n - 1.0)
    } else {
        0.0
    };
    let attractor_counts = Attractor::ALL
        .into_iter()
        .map(|a| (a, results.iter().filter(|r| r.0.attractor == a).count()))
        .collect();
    let pooled: Vec<f64> = results.iter().flat_map(|r| r.1.iter().copied()).collect();
    Ok(PhasePointSummary {
        gamma: point.gamma,
        beta: point.beta,
        max_position: point.max_position,
        n_agents: point.n_agents,
        samples,
        wealth_gain_per_step: gain,
        wealth_gain_stderr: (gain_var / n).sqrt(),
        predictability: mean(&|m| m.predictability),
        volatility: mean(&|m| m.volatility),
        attractor_counts,
        tail_exponent: pooled_tail(&pooled, config.tail_fraction),
    })
}

fn sweep_row(s: &PhasePointSummary) -> Vec<String> {
    let mut row = vec![
        s.gamma.to_string(),
        s.beta.to_string(),
        s.max_position.to_string(),
        s.n_agents.to_string(),
        s.samples.to_string(),
        s.wealth_gain_per_step.to_string(),
        s.wealth_gain_stderr.to_string(),
        s.predictability.to_string(),
        s.volatility.to_string(),
    ];
    row.extend(Attractor::ALL.iter().map(|a| s.count(*a).to_string()));
    row.push(s.dominant().to_string());
    row.push(s.tail_exponent.map_or_else(String::new, |t| t.to_string()));
    row
}

fn parse_sweep_row(row: &csv::StringRecord) -> Option<PhasePointSummary> {
    let f = |i: usize| row.get(i)?.parse::<f64>().ok();
    let u = |i: usize| row.get(i)?.parse::<usize>().ok();
    let attractor_counts = Attractor::ALL
        .iter()
        .enumerate()
        .map(|(j, a)| Some((*a, u(9 + j)?)))
        .collect::<Option<Vec<_>>>()?;
    Some(PhasePointSummary {
        gamma: f(0)?,
        beta: f(1)?,
        max_position: row.get(2)?.parse().ok()?,
        n_agents: u(3)?,
        samples: u(4)?,
        wealth_gain_per_step: f(5)?,
        wealth_gain_stderr: f(6)?,
        predictability: f(7)?,
        volatility: f(8)?,
        attractor_counts,
        tail_exponent: row
            .get(15)
            .filter(|s| !s.is_empty())
            .and_then(|s| s.parse().ok()),
    })
}

/// Rows of an existing sweep CSV, keyed by point. A truncated last line is
/// dropped.
fn completed_rows(
    path: &Path,
) -> Result<Vec<(csv::StringRecord, PhasePointSummary)>, HarnessError> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_path(path)?;
    let header = rdr.headers()?.clone();
    if header.iter().ne(SWEEP_COLUMNS.iter().copied()) {
        return Err(HarnessError::Resume(format!(
            "{} has an unexpected header",
            path.display()
        )));
    }
    let mut rows = Vec::new();
    for record in rdr.records() {
        let Ok(record) = record else { break };
        if record.len() != SWEEP_COLUMNS.len() {
            break;
        }
        match parse_sweep_row(&record) {
            Some(summary) => rows.push((record, summary)),
            None => break,
        }
    }
    Ok(rows)
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepOutcome {
    pub summaries: Vec<PhasePointSummary>,
    /// Points taken from an earlier interrupted run.
    pub resumed: usize,
    /// Log-log fits against N, one per (gamma, beta, K) with two or more N.
    pub scaling: Vec<ScalingReport>,
}

/// Runs the sweep grid into `sweep.csv`, one flushed row per point. An
/// existing directory with the same `meta` resumes after its last complete
/// row; a different `meta` is an error.
pub fn sweep(config: &Config, out: &Path) -> Result<SweepOutcome, HarnessError> {
    config.validate()?;
    prepare_dir(out)?;
    let meta = meta_text("sweep", config);
    let meta_path = out.join("meta");
    let csv_path = out.join("sweep.csv");
    let points = grid(config);

    let mut done: Vec<PhasePointSummary> = Vec::new();
    if meta_path.exists() && csv_path.exists() {
        let previous = fs::read_to_string(&meta_path).map_err(io_err(&meta_path))?;
        if previous != meta {
            return Err(HarnessError::Resume(format!(
                "{} holds a sweep with a different configuration",
                out.display()
            )));
        }
        let rows = completed_rows(&csv_path)?;
        for ((record, summary), point) in rows.into_iter().zip(&points) {
            if record
                .iter()
                .take(4)
                .ne(point.key().iter().map(String::as_str))
            {
                return Err(HarnessError::Resume(format!(
                    "{} rows do not follow the configured grid",
                    csv_path.display()
                )));
            }
            done.push(summary);
        }
    }
    let resumed = done.len();
    write_file(&meta_path, &meta)?;

    // Rewrite the completed rows so a torn final line is discarded.
    let mut w = csv_writer(&csv_path)?;
    w.write_record(SWEEP_COLUMNS)?;
    for s in &done {
        w.write_record(sweep_row(s))?;
    }
    w.flush().map_err(io_err(&csv_path))?;
    for point in &points[resumed..] {
        let summary = simulate_point(config, point)?;
        w.write_record(sweep_row(&summary))?;
        w.flush().map_err(io_err(&csv_path))?;
        done.push(summary);
    }

    let scaling = scaling_reports(&done);
    if !scaling.is_empty() {
        let path = out.join("scaling.csv");
        let mut w = csv_writer(&path)?;
        for r in &scaling {
            w.serialize(r)?;
        }
        w.flush().map_err(io_err(&path))?;
    }
    Ok(SweepOutcome {
        summaries: done,
        resumed,
        scaling,
    })
}

fn scaling_reports(summaries: &[PhasePointSummary]) -> Vec<ScalingReport> {
    let mut seen = HashSet::new();
    let mut reports = Vec::new();
    for s in summaries {
        let key = (s.gamma.to_bits(), s.beta.to_bits(), s.max_position);
        if !seen.insert(key) {
            continue;
        }
        let group: Vec<PhasePointSummary> = summaries
            .iter()
            .filter(|t| (t.gamma.to_bits(), t.beta.to_bits(), t.max_position) == key)
            .cloned()
            .collect();
        let distinct: HashSet<usize> = group.iter().map(|t| t.n_agents).collect();
        if distinct.len() >= 2 {
            reports.push(scaling_check(&group, s.gamma));
        }
    }
    reports
}

#[derive(Clone, Debug, Serialize)]
pub struct EvolveOutcome {
    pub curve: Vec<SurvivalPoint>,
    pub logs: Vec<SurvivalLog>,
}

/// Runs `evolution.samples` evolving markets and pools their survival.
pub fn simulate_evolution(config: &Config) -> Result<EvolveOutcome, HarnessError> {
    config.validate()?;
    let evo = config.evolution_config();
    evo.validate()?;
    let base = config.evolution_params();
    let logs: Vec<SurvivalLog> = (0..config.evolution.samples as u64)
        .into_par_iter()
        .map(|sample| -> Result<_, HarnessError> {
            let mut params = base.clone();
            params.seed = derive_seed(config.seed, 0, sample, 0);
            Ok(run_evolution(params, &evo)?.1)
        })
        .collect::<Result<_, _>>()?;
    Ok(EvolveOutcome {
        curve: survival_curve(&logs, config.evolution.bucket),
        logs,
    })
}

/// Writes `survival.csv` and `meta`.
pub fn evolve(config: &Config, out: &Path) -> Result<EvolveOutcome, HarnessError> {
    let outcome = simulate_evolution(config)?;
    prepare_dir(out)?;
    write_file(&out.join("meta"), &meta_text("evolve", config))?;
    let path = out.join("survival.csv");
    let mut w = csv_writer(&path)?;
    for p in &outcome.curve {
        w.serialize(p)?;
    }
    w.flush().map_err(io_err(&path))?;
    Ok(outcome)
}

#[derive(Clone, Debug, Serialize)]
pub struct BacktestReport {
    pub command: &'static str,
    pub version: &'static str,
    pub rng: &'static str,
    pub seed: u64,
    pub series: Option<PathBuf>,
    pub series_len: usize,
    pub first_date: Option<String>,
    pub last_date: Option<String>,
    pub summaries: Vec<BacktestSummary>,
    pub config: BTreeMap<&'static str, String>,
}

/// Backtests every configured scheme on `backtest.series` with the same
/// seed. Writes `backtest.json`, `meta` and, when `backtest.trajectories`
/// is positive, `trajectories.csv`.
pub fn backtest(config: &Config, out: &Path) -> Result<BacktestReport, HarnessError> {
    config.validate()?;
    let path =
        config
            .backtest
            .series
            .clone()
            .ok_or_else(|| crate::error::ConfigError::InvalidValue {
                key: "backtest.series".into(),
                reason: "a series CSV is required".into(),
            })?;
    let series =
        load_series(&path, &config.series_spec()).map_err(crate::error::BacktestError::from)?;
    let n_record = config.backtest.trajectories.min(config.backtest.n_agents);
    let mut summaries = Vec::new();
    let mut trajectories = Vec::new();
    for &scheme in &config.backtest.schemes {
        let result = run_backtest(&series, &config.backtest_config(scheme), n_record)?;
        summaries.push(result.summary);
        trajectories.push((scheme, result.days, result.recorded));
    }
    prepare_dir(out)?;
    write_file(&out.join("meta"), &meta_text("backtest", config))?;
    let date = |i: usize| series.date(i).map(|d| d.to_string());
    let report = BacktestReport {
        command: "backtest",
        version: VERSION,
        rng: RNG_ALGORITHM,
        seed: config.seed,
        series: Some(path),
        series_len: series.len(),
        first_date: date(0),
        last_date: series.len().checked_sub(1).and_then(date),
        summaries,
        config: config_map(config),
    };
    write_json(&out.join("backtest.json"), &report)?;
    if n_record > 0 {
        let path = out.join("trajectories.csv");
        let mut w = csv_writer(&path)?;
        w.write_record(["scheme", "agent", "day", "date", "wealth", "strategy"])?;
        for (scheme, days, recorded) in &trajectories {
            for (agent, outcome) in recorded.iter().enumerate() {
                for (j, &day) in days.iter().enumerate() {
                    w.write_record([
                        scheme.to_string(),
                        agent.to_string(),
                        day.to_string(),
                        date(day).unwrap_or_default(),
                        outcome.trajectory[j].to_string(),
                        outcome.choices[j].map_or_else(String::new, |c| c.to_string()),
                    ])?;
                }
            }
        }
        w.flush().map_err(io_err(&path))?;
    }
    Ok(report)
}
