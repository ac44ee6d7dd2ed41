use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use proxavoid::harness::{self, parse_override, ExperimentConfig};
use proxavoid::par::Execution;
use proxavoid::sim::Mode;

#[derive(Parser)]
#[command(version, about = "Whole-body proximity avoidance simulator")]
struct Cli {
    /// Run ticks and trials on one thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run an experiment and write per-trial CSVs plus summaries.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_parser = parse_mode)]
        mode: Option<Mode>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Parameter override, repeatable.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
    /// Run two experiments on the same scenario and write paired distances.
    Compare {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    s.parse().map_err(|e: proxavoid::Error| e.to_string())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let exec = if cli.sequential {
        Execution::Sequential
    } else {
        Execution::default()
    };
    match dispatch(cli.cmd, exec) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cmd: Cmd, exec: Execution) -> proxavoid::Result<()> {
    match cmd {
        Cmd::Run {
            config,
            mode,
            trials,
            seed,
            out,
            set,
        } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(m) = mode {
                cfg.mode = m;
            }
            if let Some(n) = trials {
                cfg.trials = n;
            }
            if seed.is_some() {
                cfg.seed = seed;
            }
            if let Some(o) = out {
                cfg.out = o;
            }
            for s in &set {
                cfg.overrides.push(parse_override(s)?);
            }
            cfg.validate()?;
            let report = harness::run(&cfg, exec)?;
            let s = &report.summary;
            println!(
                "{} {}: trials={} d_mean={:.4} sigma_max={:.4} -> {}",
                s.scenario,
                s.mode,
                s.trials.len(),
                s.d_mean,
                s.sigma_max,
                cfg.out.display()
            );
        }
        Cmd::Compare { a, b, out } => {
            let a = ExperimentConfig::load(&a)?;
            let b = ExperimentConfig::load(&b)?;
            let r = harness::compare(&a, &b, &out, exec)?;
            println!(
                "{} - {}: mean_delta={:.4} max_delta={:.4} over {} ticks -> {}",
                r.mode_a,
                r.mode_b,
                r.mean_delta,
                r.max_delta,
                r.rows.len(),
                out.display()
            );
        }
    }
    Ok(())
}
