//! Deterministic CSV results and the run-metadata sidecar.
//!
//! The results CSV carries provenance comments (version, scenario hash, RNG,
//! seed) and is byte-identical across runs with equal seeds. Wall-clock
//! timings vary run to run, so they go to the metadata file instead.

use crate::engine::LoadResult;
use crate::traffic::RNG_NAME;
use sha2::{Digest, Sha256};

pub fn scenario_hash(raw: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(raw);
    format!("{:x}", h.finalize())
}

/// CSV header shared by `run` and `sweep-vf`.
const HEADER: &str = "scenario,vf,load,trials,offered,blocked,bp,bp_halfwidth,sur,sur_halfwidth,rf,rf_halfwidth";

pub struct CsvReport {
    body: String,
}

impl CsvReport {
    pub fn new(version: &str, scenario_sha256: &str, seed: u64, confidence: f64) -> Self {
        let mut body = String::new();
        body.push_str("# eonsim results\n");
        body.push_str(&format!("# version={version}\n"));
        body.push_str(&format!("# scenario_sha256={scenario_sha256}\n"));
        body.push_str(&format!("# rng={RNG_NAME}\n"));
        body.push_str(&format!("# seed={seed}\n"));
        body.push_str(&format!("# confidence={confidence}\n"));
        body.push_str(HEADER);
        body.push('\n');
        Self { body }
    }

    pub fn push(&mut self, scenario: &str, vf: Option<u32>, r: &LoadResult) {
        let offered: u64 = r.trials.iter().map(|t| t.offered).sum();
        let blocked: u64 = r.trials.iter().map(|t| t.blocked()).sum();
        let vf = vf.map(|v| v.to_string()).unwrap_or_default();
        self.body.push_str(&format!(
            "{scenario},{vf},{},{},{offered},{blocked},{},{},{},{},{},{}\n",
            r.load,
            r.trials.len(),
            r.bp.mean,
            r.bp.half_width,
            r.sur.mean,
            r.sur.half_width,
            r.rf.mean,
            r.rf.half_width,
        ));
    }

    pub fn finish(self) -> String {
        self.body
    }
}

/// Non-deterministic run facts: wall-clock time per load, trial seeds.
pub struct RunMeta {
    body: String,
}

impl RunMeta {
    pub fn new(version: &str, scenario_sha256: &str, seed: u64) -> Self {
        let mut body = String::new();
        body.push_str("[run]\n");
        body.push_str(&format!("version = \"{version}\"\n"));
        body.push_str(&format!("scenario_sha256 = \"{scenario_sha256}\"\n"));
        body.push_str(&format!("rng = \"{RNG_NAME}\"\n"));
        body.push_str(&format!("seed = {seed}\n"));
        Self { body }
    }

    pub fn push_load(&mut self, scenario: &str, r: &LoadResult, wall_seconds: f64) {
        self.body.push_str("\n[[load]]\n");
        self.body.push_str(&format!("scenario = \"{scenario}\"\n"));
        self.body.push_str(&format!("load = {}\n", r.load));
        self.body.push_str(&format!("trials = {}\n", r.trials.len()));
        self.body.push_str(&format!("trial_seeds = {:?}\n", r.trial_seeds));
        self.body.push_str(&format!("wall_time_s = {wall_seconds}\n"));
    }

    pub fn finish(self) -> String {
        self.body
    }
}
