//! Chain diagnostics: effective sample size and per-block acceptance rates.

use serde::{Deserialize, Serialize};

/// Effective sample size via the initial monotone positive sequence
/// estimator on the autocorrelation function.
pub fn effective_sample_size(series: &[f64]) -> f64 {
    let n = series.len();
    if n < 4 {
        return n as f64;
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let centered: Vec<f64> = series.iter().map(|x| x - mean).collect();
    let c0 = centered.iter().map(|x| x * x).sum::<f64>() / n as f64;
    if c0 <= 0.0 {
        return n as f64;
    }
    let autocov = |lag: usize| -> f64 {
        centered[..n - lag].iter().zip(&centered[lag..]).map(|(a, b)| a * b).sum::<f64>() / n as f64
    };

    let mut sum_rho = 0.0;
    let mut prev_pair = f64::INFINITY;
    let mut lag = 1;
    while lag + 1 < n {
        let pair = (autocov(lag) + autocov(lag + 1)) / c0;
        if pair <= 0.0 {
            break;
        }
        // enforce monotone decrease of the paired sums
        let pair = pair.min(prev_pair);
        sum_rho += pair;
        prev_pair = pair;
        lag += 2;
    }
    (n as f64 / (1.0 + 2.0 * sum_rho)).min(n as f64)
}

/// Acceptance bookkeeping for one proposal block.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct BlockStats {
    pub accepted: u64,
    pub attempted: u64,
}

impl BlockStats {
    pub fn record(&mut self, accepted: bool) {
        self.attempted += 1;
        self.accepted += accepted as u64;
    }

    pub fn rate(&self) -> f64 {
        if self.attempted == 0 {
            f64::NAN
        } else {
            self.accepted as f64 / self.attempted as f64
        }
    }
}

/// Summary of a finished chain: acceptance rates per block, effective sample
/// sizes of representative scalar series, clamp and drift counters.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ChainDiagnostics {
    /// (block name, stats) pairs in a fixed report order.
    pub blocks: Vec<(String, BlockStats)>,
    pub ess_log_post: f64,
    /// (series name, ESS) for the monitored scalar series, in report order.
    pub ess: Vec<(String, f64)>,
    /// Linear-predictor clamp events observed during likelihood evaluation.
    pub clamp_events: u64,
    /// Largest |incremental − recomputed| log-posterior discrepancy seen at
    /// checkpoints.
    pub max_log_post_drift: f64,
    pub n_checkpoints: u64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn iid_series_has_near_full_ess() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let series: Vec<f64> = (0..4000).map(|_| rng.gen::<f64>()).collect();
        let ess = effective_sample_size(&series);
        assert!(ess > 2500.0, "ess {ess}");
        assert!(ess <= 4000.0);
    }

    #[test]
    fn correlated_series_has_reduced_ess() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut x = 0.0;
        let series: Vec<f64> = (0..4000)
            .map(|_| {
                x = 0.95 * x + rng.gen::<f64>() - 0.5;
                x
            })
            .collect();
        let ess = effective_sample_size(&series);
        assert!(ess < 600.0, "ess {ess}");
    }

    #[test]
    fn constant_series_is_full_length() {
        let series = vec![1.0; 100];
        assert_eq!(effective_sample_size(&series), 100.0);
    }
}
