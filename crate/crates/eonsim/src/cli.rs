//! Command-line front end: `plan`, `run`, and `sweep-vf`.
//!
//! Exit codes: 0 on success, 1 on validation errors, 2 on runtime invariant
//! violations.

use crate::engine::{run_experiment, run_replay};
use crate::error::{Error, Result};
use crate::report::{scenario_hash, CsvReport, RunMeta};
use crate::scenario::Scenario;
use crate::traffic::{dump_stream, generate_stream, parse_stream, derive_seed, TrafficConfig};
use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::time::Instant;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Parser)]
#[command(name = "eonsim", version, about = "Elastic optical network simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Scenario file (TOML).
    #[arg(long)]
    pub scenario: PathBuf,
    /// Output directory; overrides the scenario's `output.dir`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Master seed override.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads per trial batch.
    #[arg(long, default_value_t = 1)]
    pub parallel: usize,
    /// Also write a per-move trace (one file per load point).
    #[arg(long)]
    pub verbose: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the partition plan table.
    Plan(CommonArgs),
    /// Run the experiment and write results.csv plus run metadata.
    Run(CommonArgs),
    /// Run the experiment once per variation factor.
    SweepVf {
        #[command(flatten)]
        common: CommonArgs,
        /// Comma-separated variation factors, e.g. 1,2,3.
        #[arg(long, value_delimiter = ',', required = true)]
        vf: Vec<u32>,
    },
}

/// Entry point used by the binary; maps errors to exit codes.
pub fn main_with(cli: Cli) -> i32 {
    let outcome = match cli.command {
        Command::Plan(args) => cmd_plan(&args),
        Command::Run(args) => cmd_run(&args),
        Command::SweepVf { common, vf } => cmd_sweep_vf(&common, &vf),
    };
    match outcome {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Occupancy(_) | Error::Realization(_) => 2,
                _ => 1,
            }
        }
    }
}

fn load(args: &CommonArgs) -> Result<Scenario> {
    let mut s = Scenario::load(&args.scenario)?;
    if let Some(seed) = args.seed {
        s.experiment.seed = seed;
    }
    if let Some(out) = &args.out {
        s.out_dir = Some(out.clone());
    }
    Ok(s)
}

pub fn cmd_plan(args: &CommonArgs) -> Result<()> {
    let s = load(args)?;
    print!("{}", s.ctx.plan.report());
    Ok(())
}

pub fn cmd_run(args: &CommonArgs) -> Result<()> {
    let s = load(args)?;
    let (csv, meta) = execute(&s, args, None)?;
    write_outputs(&s, &csv, &meta)
}

pub fn cmd_sweep_vf(args: &CommonArgs, vfs: &[u32]) -> Result<()> {
    let s = load(args)?;
    if s.replay.is_some() {
        return Err(Error::Scenario(
            "sweep-vf regenerates traffic; it cannot run from a replay file".into(),
        ));
    }
    let hash = scenario_hash(&s.raw);
    let mut csv = CsvReport::new(VERSION, &hash, s.experiment.seed, s.experiment.confidence);
    let mut meta = RunMeta::new(VERSION, &hash, s.experiment.seed);
    for &vf in vfs {
        let traffic = TrafficConfig {
            vf: Some(vf),
            ..s.traffic
        };
        traffic.validate()?;
        let started = Instant::now();
        let results = run_experiment(&s.ctx, &traffic, &s.experiment, args.parallel);
        let wall = started.elapsed().as_secs_f64();
        let name = s.ctx.scenario_name();
        for r in &results {
            csv.push(&name, Some(vf), r);
            meta.push_load(&name, r, wall / results.len() as f64);
        }
    }
    write_outputs(&s, &csv.finish(), &meta.finish())
}

fn execute(s: &Scenario, args: &CommonArgs, vf: Option<u32>) -> Result<(String, String)> {
    let hash = scenario_hash(&s.raw);
    let mut csv = CsvReport::new(VERSION, &hash, s.experiment.seed, s.experiment.confidence);
    let mut meta = RunMeta::new(VERSION, &hash, s.experiment.seed);
    let name = s.ctx.scenario_name();

    if let Some(replay) = &s.replay {
        let text = std::fs::read_to_string(replay)
            .map_err(|e| Error::Stream(format!("cannot read {}: {e}", replay.display())))?;
        let stream = parse_stream(&text, &s.ctx.net, s.ctx.plan.n())?;
        let started = Instant::now();
        let result = run_replay(
            &s.ctx,
            &stream,
            s.experiment.loads[0],
            s.experiment.confidence,
        );
        csv.push(&name, vf, &result);
        meta.push_load(&name, &result, started.elapsed().as_secs_f64());
        return Ok((csv.finish(), meta.finish()));
    }

    let started = Instant::now();
    let results = run_experiment(&s.ctx, &s.traffic, &s.experiment, args.parallel);
    let wall = started.elapsed().as_secs_f64();
    for r in &results {
        csv.push(&name, vf, r);
        meta.push_load(&name, r, wall / results.len() as f64);
    }

    if s.dump_streams {
        if let Some(dir) = &s.out_dir {
            std::fs::create_dir_all(dir)?;
            for (li, r) in results.iter().enumerate() {
                for (ti, &seed) in r.trial_seeds.iter().enumerate() {
                    let tcfg = TrafficConfig {
                        load: r.load,
                        ..s.traffic
                    };
                    let stream = generate_stream(&tcfg, s.ctx.net.node_count() as u32, seed);
                    let file = dir.join(format!("stream_L{}_T{ti}.txt", r.load));
                    std::fs::write(file, dump_stream(&stream, &s.ctx.net))?;
                    let _ = li;
                }
            }
        }
    }

    if args.verbose {
        if let Some(dir) = &s.out_dir {
            std::fs::create_dir_all(dir)?;
            write_move_traces(s, &results, dir)?;
        }
    }

    Ok((csv.finish(), meta.finish()))
}

/// Re-run each load's first trial with move recording and dump the trace.
/// Recording is off during measured runs, so the trace is produced on demand.
fn write_move_traces(
    s: &Scenario,
    results: &[crate::engine::LoadResult],
    dir: &std::path::Path,
) -> Result<()> {
    use crate::engine::{run_trial, TrialOptions};
    for r in results {
        let Some(&seed) = r.trial_seeds.first() else {
            continue;
        };
        let tcfg = TrafficConfig {
            load: r.load,
            ..s.traffic
        };
        let stream = generate_stream(&tcfg, s.ctx.net.node_count() as u32, seed);
        let out = run_trial(
            &s.ctx,
            &stream,
            &TrialOptions {
                record_moves: true,
                record_outcomes: false,
            },
        );
        let mut text = String::from("# time\treq\tfrom\tto\treason\n");
        for m in &out.moves {
            text.push_str(&format!(
                "{}\t{}\t{}\t{}\t{:?}\n",
                m.time, m.req, m.from, m.to, m.reason
            ));
        }
        std::fs::write(dir.join(format!("trace_L{}.tsv", r.load)), text)?;
    }
    Ok(())
}

fn write_outputs(s: &Scenario, csv: &str, meta: &str) -> Result<()> {
    match &s.out_dir {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            std::fs::write(dir.join("results.csv"), csv)?;
            std::fs::write(dir.join("run_meta.toml"), meta)?;
            Ok(())
        }
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}

/// Seed of trial `trial` at load index `load_idx`, as used by the runner.
pub fn trial_seed(master: u64, load_idx: usize, trial: usize) -> u64 {
    derive_seed(master, load_idx as u64, trial as u64)
}
