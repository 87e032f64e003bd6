use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use wealth_game::config::Config;
use wealth_game::harness;

#[derive(Parser)]
#[command(name = "wgame", version, about = "Wealth-game market simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one market and write its step records.
    Run(Common),
    /// Sweep a parameter grid and write one summary row per point.
    Sweep(Common),
    /// Simulate evolving markets and write survival curves.
    Evolve(Common),
    /// Replay agents against a historical price series.
    Backtest(Common),
}

#[derive(Args)]
struct Common {
    /// Configuration file (`key = value` lines).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed; overrides `seed` in the file.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Use full-scale sizes (N=1000, 10^6 steps, 100 samples). Slow.
    #[arg(long)]
    full_scale: bool,
    /// `key=value` overrides applied after the file.
    overrides: Vec<String>,
}

fn load(common: &Common) -> Result<Config> {
    let mut config = match &common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            Config::from_text(&text).with_context(|| format!("in {}", path.display()))?
        }
        None => Config::default(),
    };
    if common.full_scale {
        eprintln!("warning: full-scale runs take hours to days on a desktop machine");
        config.full_scale();
    }
    config.apply_overrides(&common.overrides)?;
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    config.validate()?;
    Ok(config)
}

fn report(out: &Path, what: &str) {
    eprintln!("wrote {what} to {}", out.display());
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(c) => {
            let config = load(&c)?;
            let s = harness::run(&config, &c.out)?;
            println!(
                "attractor={} gain_per_step={} predictability={} volatility={}",
                s.metrics.attractor,
                s.metrics.wealth_gain_per_step,
                s.metrics.predictability,
                s.metrics.volatility
            );
            report(&c.out, "steps.csv and summary.json");
        }
        Command::Sweep(c) => {
            let config = load(&c)?;
            let o = harness::sweep(&config, &c.out)?;
            if o.resumed > 0 {
                eprintln!("resumed after {} completed points", o.resumed);
            }
            println!("{} points", o.summaries.len());
            report(&c.out, "sweep.csv");
        }
        Command::Evolve(c) => {
            let config = load(&c)?;
            let o = harness::evolve(&config, &c.out)?;
            println!(
                "{} survival buckets over {} samples",
                o.curve.len(),
                o.logs.len()
            );
            report(&c.out, "survival.csv");
        }
        Command::Backtest(c) => {
            let config = load(&c)?;
            let r = harness::backtest(&config, &c.out)?;
            for s in &r.summaries {
                println!(
                    "{}: average={} best={} worst={} bankrupt={}%",
                    s.scheme, s.average_wealth, s.best_wealth, s.worst_wealth, s.percent_bankrupt
                );
            }
            report(&c.out, "backtest.json");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
