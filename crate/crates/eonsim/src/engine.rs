//! Discrete-event core: one trial's event loop and the multi-trial
//! experiment runner with confidence-based stopping.
//!
//! Events at equal times process as departure, then tick, then arrival, so
//! releases free resources before same-instant reallocation or admission
//! decisions. Ticks live on the grid `n * t0` and are only kept scheduled
//! while requests are active.

use crate::metrics::{summarize, Summary, TrialStats};
use crate::occupancy::{FreeMask, OccupancyStore};
use crate::partition::PartitionPlan;
use crate::rsa::{self, AdmissionResult, BlockStage};
use crate::spr::{self, ActiveKey, ActiveRequest, ActiveSet, MoveRecord, SchedulerConfig, SprMethod};
use crate::topology::{Network, PathTable};
use crate::traffic::{derive_seed, generate_stream, StreamRequest, TrafficConfig};
use std::cmp::Ordering;
use std::collections::BinaryHeap;

/// Path selection policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Routing {
    Pbr,
    Llr,
}

impl std::fmt::Display for Routing {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Routing::Pbr => write!(f, "PBR"),
            Routing::Llr => write!(f, "LLR"),
        }
    }
}

/// Everything fixed across the trials of one scenario.
#[derive(Debug, Clone)]
pub struct SimContext {
    pub net: Network,
    pub paths: PathTable,
    pub plan: PartitionPlan,
    pub routing: Routing,
    pub sched: SchedulerConfig,
}

impl SimContext {
    /// Label in the style partitioning-routing-realization.
    pub fn scenario_name(&self) -> String {
        format!("{}-{}-{}", self.plan.scheme(), self.routing, self.sched.method)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum EventKind {
    Departure(u32),
    Tick(u64),
    Arrival(u32),
}

impl EventKind {
    fn rank(&self) -> u8 {
        match self {
            EventKind::Departure(_) => 0,
            EventKind::Tick(_) => 1,
            EventKind::Arrival(_) => 2,
        }
    }

    fn ident(&self) -> u64 {
        match self {
            EventKind::Departure(r) => *r as u64,
            EventKind::Tick(n) => *n,
            EventKind::Arrival(i) => *i as u64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Event {
    time: f64,
    kind: EventKind,
}

impl Eq for Event {}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Event {
    fn cmp(&self, other: &Self) -> Ordering {
        // Reversed: BinaryHeap pops the maximum, we want the earliest.
        other
            .time
            .total_cmp(&self.time)
            .then_with(|| other.kind.rank().cmp(&self.kind.rank()))
            .then_with(|| other.kind.ident().cmp(&self.kind.ident()))
    }
}

/// Per-request result recorded when outcome tracking is on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RequestOutcome {
    pub req: u32,
    pub admitted: bool,
    pub initial_size: u32,
    pub ave_size: u32,
    pub final_average: f64,
    pub realized: bool,
}

/// Knobs for a single trial run.
#[derive(Debug, Clone, Copy, Default)]
pub struct TrialOptions {
    pub record_moves: bool,
    pub record_outcomes: bool,
}

/// A finished trial with optional traces.
#[derive(Debug, Clone, Default)]
pub struct TrialOutput {
    pub stats: TrialStats,
    pub moves: Vec<MoveRecord>,
    pub outcomes: Vec<RequestOutcome>,
}

/// Relative tolerance absorbing float error in the realization test.
pub const REALIZE_TOLERANCE: f64 = 1e-9;

/// Simulate one request stream to completion.
pub fn run_trial(ctx: &SimContext, stream: &[StreamRequest], opts: &TrialOptions) -> TrialOutput {
    let n_links = ctx.net.directed_links().len();
    let mut occ = OccupancyStore::new(n_links, &ctx.plan);
    let mut active: ActiveSet = ActiveSet::new();
    let mut heap: BinaryHeap<Event> = BinaryHeap::new();
    let mut scratch = FreeMask::default();
    let mut out = TrialOutput::default();
    let stats = &mut out.stats;

    let mut tick_scheduled = false;
    let mut tick_moves: Vec<MoveRecord> = Vec::new();
    let mut sur_integral = 0.0f64;
    let mut sur_last = 0.0f64;
    let mut last_departure = 0.0f64;

    if !stream.is_empty() {
        heap.push(Event {
            time: stream[0].arrival,
            kind: EventKind::Arrival(0),
        });
    }

    while let Some(ev) = heap.pop() {
        sur_integral += occ.busy_slots() as f64 * (ev.time - sur_last);
        sur_last = ev.time;

        match ev.kind {
            EventKind::Departure(req) => {
                let key = ActiveKey::new(ev.time, req);
                let mut r = active.remove(&key).expect("departing request is active");
                let avg = r.close(ev.time);
                let ave_size = ctx.plan.bin_size(r.profile.p_ave);
                let realized = avg >= ave_size as f64 * (1.0 - REALIZE_TOLERANCE);
                if realized {
                    stats.fully_realized += 1;
                }
                occ.release(req).expect("departing request held a bin");
                last_departure = ev.time;
                if opts.record_outcomes {
                    out.outcomes.push(RequestOutcome {
                        req,
                        admitted: true,
                        initial_size: r.initial_size,
                        ave_size,
                        final_average: avg,
                        realized,
                    });
                }
            }
            EventKind::Tick(n) => {
                if active.is_empty() {
                    tick_scheduled = false;
                } else {
                    tick_moves.clear();
                    match ctx.sched.method {
                        SprMethod::Dpm => spr::dpm_tick(
                            ev.time,
                            &mut active,
                            &mut occ,
                            &ctx.plan,
                            &mut scratch,
                            &mut tick_moves,
                        ),
                        SprMethod::Atm => spr::atm_tick(
                            ev.time,
                            &mut active,
                            &mut occ,
                            &ctx.plan,
                            &ctx.sched,
                            &mut scratch,
                            &mut tick_moves,
                        ),
                        SprMethod::None => {}
                    }
                    stats.moves += tick_moves.len() as u64;
                    if opts.record_moves {
                        out.moves.extend_from_slice(&tick_moves);
                    }
                    heap.push(Event {
                        time: (n + 1) as f64 * ctx.sched.t0,
                        kind: EventKind::Tick(n + 1),
                    });
                }
            }
            EventKind::Arrival(i) => {
                let req = &stream[i as usize];
                stats.offered += 1;
                let paths = ctx.paths.paths(req.profile.src, req.profile.dst);
                let chosen = match ctx.routing {
                    Routing::Llr => rsa::route_llr(paths, &occ, &mut scratch),
                    Routing::Pbr => rsa::route_pbr(&req.profile, paths, &occ, &mut scratch),
                };
                match chosen {
                    None => {
                        stats.blocked_routing += 1;
                        if opts.record_outcomes {
                            out.outcomes.push(blocked_outcome(i, req, &ctx.plan));
                        }
                    }
                    Some(path_idx) => {
                        match rsa::assign_initial(
                            i,
                            &req.profile,
                            path_idx,
                            &paths[path_idx],
                            &ctx.plan,
                            &mut occ,
                            &mut scratch,
                        ) {
                            AdmissionResult::Blocked(stage) => {
                                debug_assert_eq!(stage, BlockStage::Assignment);
                                stats.blocked_assignment += 1;
                                if opts.record_outcomes {
                                    out.outcomes.push(blocked_outcome(i, req, &ctx.plan));
                                }
                            }
                            AdmissionResult::Admitted {
                                path_idx,
                                bin,
                                assigned_size,
                            } => {
                                stats.admitted += 1;
                                let r = ActiveRequest::new(
                                    i,
                                    req.profile,
                                    paths[path_idx].links.clone().into_boxed_slice(),
                                    path_idx,
                                    bin,
                                    assigned_size,
                                    ev.time,
                                );
                                heap.push(Event {
                                    time: r.departure_time,
                                    kind: EventKind::Departure(i),
                                });
                                active.insert(ActiveKey::new(r.departure_time, i), r);
                                if ctx.sched.method != SprMethod::None && !tick_scheduled {
                                    let n = (ev.time / ctx.sched.t0).floor() as u64 + 1;
                                    heap.push(Event {
                                        time: n as f64 * ctx.sched.t0,
                                        kind: EventKind::Tick(n),
                                    });
                                    tick_scheduled = true;
                                }
                            }
                        }
                    }
                }
                if (i as usize + 1) < stream.len() {
                    heap.push(Event {
                        time: stream[i as usize + 1].arrival,
                        kind: EventKind::Arrival(i + 1),
                    });
                }
            }
        }
    }

    assert!(occ.is_empty(), "occupancy must drain by trial end");
    assert!(active.is_empty(), "active set must drain by trial end");
    assert_eq!(
        stats.offered,
        stats.admitted + stats.blocked_routing + stats.blocked_assignment
    );
    stats.duration = last_departure;
    let capacity = ctx.plan.fs() as f64 * n_links as f64;
    stats.sur = if last_departure > 0.0 {
        sur_integral / (capacity * last_departure)
    } else {
        0.0
    };
    out
}

fn blocked_outcome(req: u32, sr: &StreamRequest, plan: &PartitionPlan) -> RequestOutcome {
    RequestOutcome {
        req,
        admitted: false,
        initial_size: 0,
        ave_size: plan.bin_size(sr.profile.p_ave),
        final_average: 0.0,
        realized: false,
    }
}

/// Experiment protocol: per load point, run trials until the blocking
/// probability's confidence half-width is small enough or the trial budget
/// runs out.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub loads: Vec<f64>,
    pub trials_max: u32,
    pub requests_per_trial: u32,
    pub confidence: f64,
    /// Stop early when half-width <= this fraction of the mean.
    pub ci_half_width_rel: f64,
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            loads: Vec::new(),
            trials_max: 10,
            requests_per_trial: 100_000,
            confidence: 0.90,
            ci_half_width_rel: 0.10,
            seed: 0,
        }
    }
}

/// Aggregated outcome of one load point.
#[derive(Debug, Clone)]
pub struct LoadResult {
    pub load: f64,
    pub trials: Vec<TrialStats>,
    pub trial_seeds: Vec<u64>,
    pub bp: Summary,
    pub sur: Summary,
    pub rf: Summary,
}

/// Stop once at least two trials exist and the half-width meets the relative
/// target. Only prefixes are inspected, so parallel execution cannot change
/// the outcome.
fn stop_index(bps: &[f64], confidence: f64, rel: f64) -> Option<usize> {
    for t in 2..=bps.len() {
        let s = summarize(&bps[..t], confidence);
        if s.half_width <= rel * s.mean {
            return Some(t);
        }
    }
    None
}

/// Run every load point of a scenario. `parallel` bounds the worker threads
/// used per batch of trials; results are identical for any value.
pub fn run_experiment(
    ctx: &SimContext,
    traffic: &TrafficConfig,
    cfg: &ExperimentConfig,
    parallel: usize,
) -> Vec<LoadResult> {
    let parallel = parallel.max(1);
    cfg.loads
        .iter()
        .enumerate()
        .map(|(load_idx, &load)| {
            let mut trials: Vec<TrialStats> = Vec::new();
            let mut seeds: Vec<u64> = Vec::new();
            let mut stop = None;
            while stop.is_none() && trials.len() < cfg.trials_max as usize {
                let batch = parallel.min(cfg.trials_max as usize - trials.len());
                let first = trials.len();
                let batch_seeds: Vec<u64> = (0..batch)
                    .map(|b| derive_seed(cfg.seed, load_idx as u64, (first + b) as u64))
                    .collect();
                let batch_stats = run_batch(ctx, traffic, load, &batch_seeds, parallel);
                seeds.extend_from_slice(&batch_seeds);
                trials.extend_from_slice(&batch_stats);
                let bps: Vec<f64> = trials.iter().map(|t| t.blocking_probability()).collect();
                stop = stop_index(&bps, cfg.confidence, cfg.ci_half_width_rel);
            }
            if let Some(t) = stop {
                trials.truncate(t);
                seeds.truncate(t);
            }
            let bps: Vec<f64> = trials.iter().map(|t| t.blocking_probability()).collect();
            let surs: Vec<f64> = trials.iter().map(|t| t.sur).collect();
            let rfs: Vec<f64> = trials.iter().map(|t| t.realization_factor()).collect();
            LoadResult {
                load,
                bp: summarize(&bps, cfg.confidence),
                sur: summarize(&surs, cfg.confidence),
                rf: summarize(&rfs, cfg.confidence),
                trials,
                trial_seeds: seeds,
            }
        })
        .collect()
}

fn run_batch(
    ctx: &SimContext,
    traffic: &TrafficConfig,
    load: f64,
    seeds: &[u64],
    parallel: usize,
) -> Vec<TrialStats> {
    let one = |seed: u64| -> TrialStats {
        let tcfg = TrafficConfig {
            load,
            ..*traffic
        };
        let stream = generate_stream(&tcfg, ctx.net.node_count() as u32, seed);
        run_trial(ctx, &stream, &TrialOptions::default()).stats
    };
    if parallel <= 1 || seeds.len() <= 1 {
        seeds.iter().map(|&s| one(s)).collect()
    } else {
        std::thread::scope(|scope| {
            let handles: Vec<_> = seeds
                .iter()
                .map(|&s| scope.spawn(move || one(s)))
                .collect();
            handles.into_iter().map(|h| h.join().expect("trial panicked")).collect()
        })
    }
}

/// Run a replayed stream as a single trial and aggregate like a one-trial
/// experiment.
pub fn run_replay(
    ctx: &SimContext,
    stream: &[StreamRequest],
    load_label: f64,
    confidence: f64,
) -> LoadResult {
    let stats = run_trial(ctx, stream, &TrialOptions::default()).stats;
    LoadResult {
        load: load_label,
        bp: summarize(&[stats.blocking_probability()], confidence),
        sur: summarize(&[stats.sur], confidence),
        rf: summarize(&[stats.realization_factor()], confidence),
        trials: vec![stats],
        trial_seeds: Vec::new(),
    }
}
