//! Stochastic workload generation.
//!
//! Requests arrive as a Poisson process and hold for exponential times, so
//! the offered load in erlang is the arrival rate times the mean holding
//! time. Routes are uniform over ordered distinct node pairs. The profile
//! triple is the sorted order statistics of three iid uniforms on the
//! partition indices; an optional variation factor caps both gaps of the
//! triple by rejection, which preserves the conditional law of the
//! unconstrained draw.

use crate::error::{Error, Result};
use crate::rsa::ServiceProfile;
use crate::topology::Network;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Exp, Uniform};

/// Name of the generator recorded in run metadata.
pub const RNG_NAME: &str = "ChaCha12";

#[derive(Debug, Clone, Copy)]
pub struct TrafficConfig {
    /// Offered load in erlang (arrival rate x mean holding time).
    pub load: f64,
    /// Mean holding time, in time units.
    pub mean_holding: f64,
    /// Requests per trial.
    pub requests: u32,
    /// Number of partitions N; profile indices are drawn from 1..=N.
    pub n_partitions: u32,
    /// Variation factor: cap on both max-ave and ave-min gaps.
    pub vf: Option<u32>,
}

impl TrafficConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.load > 0.0) {
            return Err(Error::Scenario(format!("load must be > 0, got {}", self.load)));
        }
        if !(self.mean_holding > 0.0) {
            return Err(Error::Scenario(format!(
                "mean_holding must be > 0, got {}",
                self.mean_holding
            )));
        }
        if self.requests == 0 {
            return Err(Error::Scenario("requests_per_trial must be >= 1".into()));
        }
        if self.n_partitions == 0 {
            return Err(Error::Scenario("need at least one partition".into()));
        }
        if let Some(vf) = self.vf {
            if vf == 0 || vf > self.n_partitions.saturating_sub(1) {
                return Err(Error::Scenario(format!(
                    "variation factor {vf} outside 1..={}",
                    self.n_partitions - 1
                )));
            }
        }
        Ok(())
    }
}

/// One generated request.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StreamRequest {
    pub arrival: f64,
    pub profile: ServiceProfile,
}

/// Mix a master seed with trial coordinates; splitmix64 steps.
pub fn derive_seed(master: u64, a: u64, b: u64) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }
    mix(master
        .wrapping_add(mix(a.wrapping_add(0x9e3779b97f4a7c15)))
        .wrapping_add(mix(b ^ 0x2545f4914f6cdd1d)))
}

/// Generate an arrival-ordered stream. The per-request draw order is fixed:
/// inter-arrival gap, source, destination, profile triple (with rejection
/// under a variation factor), then holding time.
pub fn generate_stream(cfg: &TrafficConfig, n_nodes: u32, seed: u64) -> Vec<StreamRequest> {
    assert!(n_nodes >= 2, "need at least two nodes");
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let gap = Exp::new(cfg.load / cfg.mean_holding).expect("positive rate");
    let hold = Exp::new(1.0 / cfg.mean_holding).expect("positive rate");
    let node = Uniform::new(0, n_nodes);
    let other = Uniform::new(0, n_nodes - 1);
    let index = Uniform::new_inclusive(1, cfg.n_partitions);

    let mut out = Vec::with_capacity(cfg.requests as usize);
    let mut t = 0.0f64;
    for _ in 0..cfg.requests {
        let mut dt: f64 = gap.sample(&mut rng);
        while dt <= 0.0 {
            dt = gap.sample(&mut rng);
        }
        t += dt;

        let src = node.sample(&mut rng);
        let mut dst = other.sample(&mut rng);
        if dst >= src {
            dst += 1;
        }

        let (p_min, p_ave, p_max) = loop {
            let mut triple = [
                index.sample(&mut rng),
                index.sample(&mut rng),
                index.sample(&mut rng),
            ];
            triple.sort_unstable();
            match cfg.vf {
                Some(vf) if triple[2] - triple[1] > vf || triple[1] - triple[0] > vf => continue,
                _ => break (triple[0], triple[1], triple[2]),
            }
        };

        let mut holding: f64 = hold.sample(&mut rng);
        while holding <= 0.0 {
            holding = hold.sample(&mut rng);
        }

        out.push(StreamRequest {
            arrival: t,
            profile: ServiceProfile {
                src,
                dst,
                p_min,
                p_ave,
                p_max,
                holding,
            },
        });
    }
    out
}

/// Serialize a stream, one request per line:
/// `arrival src dst min ave max holding`. Floats round-trip exactly.
pub fn dump_stream(stream: &[StreamRequest], net: &Network) -> String {
    let mut out = String::with_capacity(stream.len() * 48);
    out.push_str("# arrival src dst min ave max holding\n");
    for r in stream {
        out.push_str(&format!(
            "{} {} {} {} {} {} {}\n",
            r.arrival,
            net.node_name(r.profile.src),
            net.node_name(r.profile.dst),
            r.profile.p_min,
            r.profile.p_ave,
            r.profile.p_max,
            r.profile.holding
        ));
    }
    out
}

/// Parse a dumped stream back, validating node names, index bounds, and
/// arrival ordering.
pub fn parse_stream(text: &str, net: &Network, n_partitions: u32) -> Result<Vec<StreamRequest>> {
    let mut out = Vec::new();
    let mut last = 0.0f64;
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 7 {
            return Err(Error::Stream(format!(
                "line {}: expected 7 fields, got {}",
                i + 1,
                f.len()
            )));
        }
        let bad = |what: &str| Error::Stream(format!("line {}: bad {what}", i + 1));
        let arrival: f64 = f[0].parse().map_err(|_| bad("arrival"))?;
        let src = net.node_index(f[1]).ok_or_else(|| bad("source node"))?;
        let dst = net.node_index(f[2]).ok_or_else(|| bad("destination node"))?;
        let p_min: u32 = f[3].parse().map_err(|_| bad("min index"))?;
        let p_ave: u32 = f[4].parse().map_err(|_| bad("ave index"))?;
        let p_max: u32 = f[5].parse().map_err(|_| bad("max index"))?;
        let holding: f64 = f[6].parse().map_err(|_| bad("holding time"))?;
        let profile = ServiceProfile {
            src,
            dst,
            p_min,
            p_ave,
            p_max,
            holding,
        };
        if !profile.validate(n_partitions) {
            return Err(bad("profile"));
        }
        if arrival <= last {
            return Err(bad("arrival order"));
        }
        last = arrival;
        out.push(StreamRequest { arrival, profile });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(load: f64, requests: u32, vf: Option<u32>) -> TrafficConfig {
        TrafficConfig {
            load,
            mean_holding: 1.0,
            requests,
            n_partitions: 10,
            vf,
        }
    }

    #[test]
    fn streams_are_ordered_and_in_bounds() {
        let stream = generate_stream(&cfg(100.0, 5000, None), 14, 1);
        let mut last = 0.0;
        for r in &stream {
            assert!(r.arrival > last);
            last = r.arrival;
            let p = r.profile;
            assert!(1 <= p.p_min && p.p_min <= p.p_ave && p.p_ave <= p.p_max && p.p_max <= 10);
            assert!(p.holding > 0.0);
            assert!(p.src != p.dst && p.src < 14 && p.dst < 14);
        }
    }

    #[test]
    fn same_seed_same_stream() {
        let a = generate_stream(&cfg(50.0, 2000, Some(2)), 6, 42);
        let b = generate_stream(&cfg(50.0, 2000, Some(2)), 6, 42);
        assert_eq!(a, b);
    }

    #[test]
    fn variation_factor_caps_both_gaps() {
        let stream = generate_stream(&cfg(10.0, 20_000, Some(1)), 5, 7);
        for r in &stream {
            assert!(r.profile.p_max - r.profile.p_ave <= 1);
            assert!(r.profile.p_ave - r.profile.p_min <= 1);
        }
    }

    #[test]
    fn vacuous_variation_factor_changes_nothing() {
        // VF = N-1 never rejects, so the draw sequence is untouched.
        let a = generate_stream(&cfg(10.0, 5000, Some(9)), 5, 3);
        let b = generate_stream(&cfg(10.0, 5000, None), 5, 3);
        assert_eq!(a, b);
    }

    #[test]
    fn mean_interarrival_matches_rate() {
        let n = 1_000_000u32;
        let stream = generate_stream(&cfg(400.0, n, None), 4, 11);
        let mean = stream.last().unwrap().arrival / n as f64;
        let expect = 1.0 / 400.0;
        assert!(
            (mean - expect).abs() / expect < 0.01,
            "mean gap {mean} vs {expect}"
        );
    }

    #[test]
    fn triple_marginals_match_order_statistics() {
        // Expected pmfs by exhaustive enumeration of the 10^3 ordered draws.
        let n = 10usize;
        let mut pmf_min = vec![0u64; n + 1];
        let mut pmf_ave = vec![0u64; n + 1];
        let mut pmf_max = vec![0u64; n + 1];
        let mut all_equal = 0u64;
        for a in 1..=n {
            for b in 1..=n {
                for c in 1..=n {
                    let mut t = [a, b, c];
                    t.sort_unstable();
                    pmf_min[t[0]] += 1;
                    pmf_ave[t[1]] += 1;
                    pmf_max[t[2]] += 1;
                    if t[0] == t[2] {
                        all_equal += 1;
                    }
                }
            }
        }
        assert_eq!(all_equal, 10); // P(min=ave=max) = 10/1000

        let draws = 1_000_000u32;
        let stream = generate_stream(&cfg(1.0, draws, None), 4, 5);
        let mut seen_min = vec![0u64; n + 1];
        let mut seen_ave = vec![0u64; n + 1];
        let mut seen_max = vec![0u64; n + 1];
        for r in &stream {
            seen_min[r.profile.p_min as usize] += 1;
            seen_ave[r.profile.p_ave as usize] += 1;
            seen_max[r.profile.p_max as usize] += 1;
        }

        // Chi-square against the exact pmf; 5% critical value for df=9.
        let crit = 16.919;
        for (seen, pmf, what) in [
            (&seen_min, &pmf_min, "min"),
            (&seen_ave, &pmf_ave, "ave"),
            (&seen_max, &pmf_max, "max"),
        ] {
            let mut chi2 = 0.0;
            for v in 1..=n {
                let expect = pmf[v] as f64 / 1000.0 * draws as f64;
                let diff = seen[v] as f64 - expect;
                chi2 += diff * diff / expect;
            }
            assert!(chi2 < crit, "{what} marginal chi2 {chi2} >= {crit}");
        }
    }

    #[test]
    fn dump_and_parse_round_trip() {
        let net = crate::topology::parse_network(
            "A,0,0\nB,1,0\nC,2,0\n",
            "A,B,10\nB,C,20\n",
        )
        .unwrap();
        let stream = generate_stream(&cfg(5.0, 500, Some(3)), 3, 77);
        let text = dump_stream(&stream, &net);
        let back = parse_stream(&text, &net, 10).unwrap();
        assert_eq!(stream, back);
        // Byte-for-byte reproducibility of the dump itself.
        let again = dump_stream(&generate_stream(&cfg(5.0, 500, Some(3)), 3, 77), &net);
        assert_eq!(text, again);
    }

    #[test]
    fn config_validation() {
        assert!(cfg(0.0, 10, None).validate().is_err());
        assert!(cfg(1.0, 0, None).validate().is_err());
        assert!(cfg(1.0, 10, Some(0)).validate().is_err());
        assert!(cfg(1.0, 10, Some(10)).validate().is_err());
        assert!(cfg(1.0, 10, Some(9)).validate().is_ok());
    }
}
