//! Lower-bound request generators that react to the online algorithm.
//!
//! Each generator returns the metric it plays on, the adversary itself and
//! the value the construction predicts, so experiments can compare the
//! measured ratio against it.

mod lipschitz_lb;
mod superlinear;
mod swap_lb;

use serde::Serialize;
use thiserror::Error;

use crate::metric::{FiniteMetric, MetricError};

pub use lipschitz_lb::{lipschitz_lb_adversary, LipschitzLbAdversary};
pub use superlinear::{
    superlinear_adversary, superlinear_metric, superlinear_round_cost, Deviation, RoundCheck, SuperlinearAdversary,
};
pub use swap_lb::{swap_lb_adversary, SwapLbAdversary};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AdversaryError {
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error(transparent)]
    Metric(#[from] MetricError),
}

/// A metric, the adversary playing on it, and what the construction predicts.
#[derive(Debug)]
pub struct LowerBound<A> {
    pub metric: FiniteMetric,
    pub adversary: A,
    /// Predicted ratio for the randomized and swap constructions; predicted
    /// online cost per round (scaled) for the recursive one.
    pub predicted: f64,
}

/// Per-round aggregates of a repeated experiment.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RoundSummary {
    pub rounds: usize,
    pub mean_online: f64,
    pub mean_offline: f64,
    /// `Σ online / Σ offline`.
    pub ratio: f64,
    /// 95% normal half-width of the ratio estimate (delta method).
    pub ratio_half_width: f64,
}

/// Summarizes per-round online and offline costs (already divided by the
/// metric's scale).
pub fn summarize_rounds(online: &[f64], offline: &[f64]) -> RoundSummary {
    let r = online.len().min(offline.len());
    if r == 0 {
        return RoundSummary { rounds: 0, mean_online: 0.0, mean_offline: 0.0, ratio: 1.0, ratio_half_width: 0.0 };
    }
    let rf = r as f64;
    let mo = online[..r].iter().sum::<f64>() / rf;
    let mf = offline[..r].iter().sum::<f64>() / rf;
    let ratio = crate::wfa::ratio_of_f64(mo, mf);
    let ratio_half_width = if r > 1 && mf > 0.0 {
        let (mut voo, mut vff, mut vof) = (0.0, 0.0, 0.0);
        for i in 0..r {
            let (a, b) = (online[i] - mo, offline[i] - mf);
            voo += a * a;
            vff += b * b;
            vof += a * b;
        }
        let denom = rf - 1.0;
        let var = (voo / denom - 2.0 * ratio * vof / denom + ratio * ratio * vff / denom) / (mf * mf);
        1.96 * (var.max(0.0) / rf).sqrt()
    } else {
        0.0
    };
    RoundSummary { rounds: r, mean_online: mo, mean_offline: mf, ratio, ratio_half_width }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn summary_of_constant_rounds() {
        let s = summarize_rounds(&[9.0, 9.0], &[1.0, 1.0]);
        assert_eq!(s.ratio, 9.0);
        assert_eq!(s.ratio_half_width, 0.0);
        assert_eq!(summarize_rounds(&[], &[]).rounds, 0);
    }
}
