//! Trial counters and confidence-interval aggregation.

use statrs::distribution::{ContinuousCDF, StudentsT};

/// Counters and accumulators of one simulation trial.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TrialStats {
    pub offered: u64,
    pub admitted: u64,
    pub blocked_routing: u64,
    pub blocked_assignment: u64,
    /// Admitted requests whose final average met the requested average.
    pub fully_realized: u64,
    /// Bin reallocations executed.
    pub moves: u64,
    /// Time-averaged fraction of busy slots over the whole network.
    pub sur: f64,
    /// Simulated time of the last departure.
    pub duration: f64,
}

impl TrialStats {
    pub fn blocked(&self) -> u64 {
        self.blocked_routing + self.blocked_assignment
    }

    pub fn blocking_probability(&self) -> f64 {
        if self.offered == 0 {
            0.0
        } else {
            self.blocked() as f64 / self.offered as f64
        }
    }

    /// Fully realized requests over all offered requests.
    pub fn realization_factor(&self) -> f64 {
        if self.offered == 0 {
            0.0
        } else {
            self.fully_realized as f64 / self.offered as f64
        }
    }
}

/// Sample mean with a two-sided Student-t confidence half-width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub mean: f64,
    /// Zero for a single sample.
    pub half_width: f64,
}

/// Two-sided Student-t critical value at the given confidence level.
pub fn t_critical(confidence: f64, df: u64) -> f64 {
    assert!((0.0..1.0).contains(&confidence) && df >= 1);
    let dist = StudentsT::new(0.0, 1.0, df as f64).expect("valid dof");
    dist.inverse_cdf(0.5 + confidence / 2.0)
}

/// Summarize independent trial values at a confidence level.
pub fn summarize(values: &[f64], confidence: f64) -> Summary {
    assert!(!values.is_empty());
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return Summary {
            mean,
            half_width: 0.0,
        };
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    let half_width = t_critical(confidence, values.len() as u64 - 1) * (var / n).sqrt();
    Summary { mean, half_width }
}

impl Summary {
    pub fn lower(&self) -> f64 {
        self.mean - self.half_width
    }

    pub fn upper(&self) -> f64 {
        self.mean + self.half_width
    }

    /// True when the two intervals share no point.
    pub fn disjoint_below(&self, other: &Summary) -> bool {
        self.upper() < other.lower()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn t_critical_matches_tables() {
        // Standard two-sided 90% values.
        assert!((t_critical(0.90, 2) - 2.9200).abs() < 1e-3);
        assert!((t_critical(0.90, 9) - 1.8331).abs() < 1e-3);
        assert!((t_critical(0.95, 4) - 2.7764).abs() < 1e-3);
    }

    #[test]
    fn identical_samples_have_zero_width() {
        let s = summarize(&[0.25, 0.25, 0.25], 0.90);
        assert_eq!(s.mean, 0.25);
        assert_eq!(s.half_width, 0.0);
    }

    #[test]
    fn single_sample_reports_no_width() {
        let s = summarize(&[0.5], 0.90);
        assert_eq!(s.mean, 0.5);
        assert_eq!(s.half_width, 0.0);
    }

    #[test]
    fn interval_disjointness() {
        let a = summarize(&[0.1, 0.12, 0.11], 0.90);
        let b = summarize(&[0.3, 0.33, 0.31], 0.90);
        assert!(a.disjoint_below(&b));
        assert!(!b.disjoint_below(&a));
    }

    #[test]
    fn stats_ratios() {
        let s = TrialStats {
            offered: 100,
            admitted: 90,
            blocked_routing: 4,
            blocked_assignment: 6,
            fully_realized: 81,
            ..Default::default()
        };
        assert_eq!(s.blocked(), 10);
        assert_eq!(s.blocking_probability(), 0.1);
        assert_eq!(s.realization_factor(), 0.81);
    }
}
