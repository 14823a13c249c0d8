//! Scenario files: one TOML document describing topology, partitioning,
//! traffic, realization scheduling, and the experiment protocol.
//!
//! Relative paths inside a scenario resolve against the scenario file's own
//! directory. Validation happens before anything runs and reports the
//! offending field.

use crate::engine::{ExperimentConfig, Routing, SimContext};
use crate::error::{Error, Result};
use crate::partition::{BinSizeSet, LeftoverPolicy, PartitionPlan, PlanScheme};
use crate::spr::{SchedulerConfig, SprMethod};
use crate::topology::{load_network, PathTable};
use crate::traffic::TrafficConfig;
use serde::Deserialize;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub topology: TopologySection,
    pub partition: PartitionSection,
    pub traffic: TrafficSection,
    #[serde(default)]
    pub spr: SprSection,
    pub experiment: ExperimentSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopologySection {
    pub nodes: PathBuf,
    pub edges: PathBuf,
    #[serde(default = "default_k")]
    pub k: usize,
}

fn default_k() -> usize {
    4
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartitionSection {
    pub fs: u32,
    pub bin_sizes: Vec<u32>,
    #[serde(default = "default_scheme")]
    pub scheme: String,
    /// Optional explicit extra-bin redistribution vector.
    pub extra_bins: Option<Vec<u32>>,
}

fn default_scheme() -> String {
    "sip".into()
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrafficSection {
    #[serde(default = "default_holding")]
    pub mean_holding: f64,
    #[serde(default = "default_requests")]
    pub requests_per_trial: u32,
    pub vf: Option<u32>,
    /// Replay this dumped stream instead of generating traffic.
    pub replay: Option<PathBuf>,
    /// Write each trial's generated stream next to the results.
    #[serde(default)]
    pub dump_streams: bool,
}

fn default_holding() -> f64 {
    1.0
}

fn default_requests() -> u32 {
    100_000
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct SprSection {
    pub method: Option<SprMethod>,
    /// Check interval; defaults to mean holding time / 20.
    pub t0: Option<f64>,
    #[serde(default)]
    pub margin: u32,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    pub routing: Routing,
    pub loads: Vec<f64>,
    #[serde(default = "default_trials")]
    pub trials_max: u32,
    #[serde(default = "default_confidence")]
    pub confidence: f64,
    #[serde(default = "default_ci_rel")]
    pub ci_half_width_rel: f64,
    #[serde(default)]
    pub seed: u64,
}

fn default_trials() -> u32 {
    10
}

fn default_confidence() -> f64 {
    0.90
}

fn default_ci_rel() -> f64 {
    0.10
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: Option<PathBuf>,
}

/// A parsed, validated scenario with resolved paths and prepared context.
#[derive(Debug)]
pub struct Scenario {
    pub ctx: SimContext,
    pub traffic: TrafficConfig,
    pub experiment: ExperimentConfig,
    pub replay: Option<PathBuf>,
    pub dump_streams: bool,
    pub out_dir: Option<PathBuf>,
    /// Raw bytes of the scenario file, hashed into output provenance.
    pub raw: Vec<u8>,
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self> {
        let raw = std::fs::read(path)
            .map_err(|e| Error::Scenario(format!("cannot read {}: {e}", path.display())))?;
        let text = String::from_utf8(raw.clone())
            .map_err(|_| Error::Scenario("scenario file is not UTF-8".into()))?;
        let file: ScenarioFile = toml::from_str(&text)
            .map_err(|e| Error::Scenario(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::build(file, base, raw)
    }

    fn build(file: ScenarioFile, base: &Path, raw: Vec<u8>) -> Result<Self> {
        let resolve = |p: &PathBuf| -> PathBuf {
            if p.is_absolute() {
                p.clone()
            } else {
                base.join(p)
            }
        };

        if file.topology.k < 1 {
            return Err(Error::Scenario("topology.k must be >= 1".into()));
        }
        let nodes = resolve(&file.topology.nodes);
        let edges = resolve(&file.topology.edges);
        let net = load_network(&nodes, &edges)?;
        let paths = PathTable::compute(&net, file.topology.k);

        let sizes = BinSizeSet::new(file.partition.bin_sizes.clone())
            .map_err(|e| Error::Scenario(format!("partition.bin_sizes: {e}")))?;
        let leftover = match &file.partition.extra_bins {
            Some(v) => LeftoverPolicy::ExtraBins(v.clone()),
            None => LeftoverPolicy::GreedySmallest,
        };
        let scheme = match file.partition.scheme.to_lowercase().as_str() {
            "sip" => PlanScheme::Sip,
            "sp" => PlanScheme::Sp,
            other => {
                return Err(Error::Scenario(format!(
                    "partition.scheme must be \"sip\" or \"sp\", got {other:?}"
                )))
            }
        };
        let plan = match scheme {
            PlanScheme::Sip => PartitionPlan::sip(file.partition.fs, &sizes, &leftover),
            PlanScheme::Sp => PartitionPlan::sp(file.partition.fs, &sizes, &leftover),
        }
        .map_err(|e| Error::Scenario(format!("partition: {e}")))?;

        if file.experiment.loads.is_empty() {
            return Err(Error::Scenario("experiment.loads must not be empty".into()));
        }
        if !(0.0..1.0).contains(&file.experiment.confidence) {
            return Err(Error::Scenario(format!(
                "experiment.confidence must lie in (0, 1), got {}",
                file.experiment.confidence
            )));
        }
        if file.experiment.trials_max < 1 {
            return Err(Error::Scenario("experiment.trials_max must be >= 1".into()));
        }

        let method = file.spr.method.unwrap_or(SprMethod::None);
        let t0 = file.spr.t0.unwrap_or(file.traffic.mean_holding / 20.0);
        if !(t0 > 0.0) {
            return Err(Error::Scenario(format!("spr.t0 must be > 0, got {t0}")));
        }

        let traffic = TrafficConfig {
            load: file.experiment.loads[0],
            mean_holding: file.traffic.mean_holding,
            requests: file.traffic.requests_per_trial,
            n_partitions: plan.n(),
            vf: file.traffic.vf,
        };
        traffic.validate()?;

        let replay = file.traffic.replay.as_ref().map(resolve);
        if replay.is_some() && file.experiment.loads.len() != 1 {
            return Err(Error::Scenario(
                "traffic.replay drives a fixed stream; experiment.loads must hold exactly \
                 one label"
                    .into(),
            ));
        }

        Ok(Self {
            ctx: SimContext {
                net,
                paths,
                plan,
                routing: file.experiment.routing,
                sched: SchedulerConfig {
                    t0,
                    margin: file.spr.margin,
                    method,
                },
            },
            traffic,
            experiment: ExperimentConfig {
                loads: file.experiment.loads,
                trials_max: file.experiment.trials_max,
                requests_per_trial: file.traffic.requests_per_trial,
                confidence: file.experiment.confidence,
                ci_half_width_rel: file.experiment.ci_half_width_rel,
                seed: file.experiment.seed,
            },
            replay,
            dump_streams: file.traffic.dump_streams,
            out_dir: file.output.dir.as_ref().map(resolve),
            raw,
        })
    }
}
