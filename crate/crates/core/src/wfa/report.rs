use std::fmt::Write as _;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::wfa::work_function::WorkFunction;

/// One served request: moved to `a`, relocated to `b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepRecord {
    pub t: usize,
    pub a: usize,
    pub b: usize,
    pub cost: i64,
    /// `min_p w_t(p)`: offline cost of the prefix.
    pub min_work: i64,
}

/// `w_0` followed by `(w_t⁻, w_t)` for every step.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorkFunctionTrace {
    pub initial: WorkFunction,
    pub steps: Vec<(WorkFunction, WorkFunction)>,
}

impl WorkFunctionTrace {
    pub fn new(initial: WorkFunction) -> Self {
        WorkFunctionTrace { initial, steps: Vec::new() }
    }

    pub fn push(&mut self, pre: WorkFunction, post: WorkFunction) {
        self.steps.push((pre, post));
    }

    /// `w_t` for `t = 0..=T`.
    pub fn post(&self, t: usize) -> &WorkFunction {
        if t == 0 {
            &self.initial
        } else {
            &self.steps[t - 1].1
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunReport {
    pub algorithm: String,
    /// Costs are integers on this grid; divide to get true values.
    pub scale: i64,
    pub start: usize,
    pub steps: Vec<StepRecord>,
    pub online_cost: i64,
    pub offline_cost: i64,
    /// `online / offline`; 1 when both are zero, infinite when only OPT is.
    pub ratio: f64,
    /// Step counts at which the adversary closed a round.
    pub round_ends: Vec<usize>,
    pub final_work_function: WorkFunction,
    #[serde(skip)]
    pub trace: Option<WorkFunctionTrace>,
}

pub fn ratio_of(online: i64, offline: i64) -> f64 {
    match (online, offline) {
        (0, 0) => 1.0,
        (_, 0) => f64::INFINITY,
        (a, b) => a as f64 / b as f64,
    }
}

/// [`ratio_of`] for already unscaled costs.
pub fn ratio_of_f64(online: f64, offline: f64) -> f64 {
    if offline == 0.0 {
        if online == 0.0 {
            1.0
        } else {
            f64::INFINITY
        }
    } else {
        online / offline
    }
}

/// Exact `value / scale` as `p` or `p/q`.
pub fn fmt_scaled(value: i64, scale: i64) -> String {
    Ratio::new(value, scale).to_string()
}

/// Twelve significant digits, trailing zeros trimmed.
pub fn fmt_float(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    if x == 0.0 {
        return "0".into();
    }
    let exp = x.abs().log10().floor() as i32;
    if (-4..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        let s = format!("{x:.decimals$}");
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        format!("{x:.11e}")
    }
}

impl RunReport {
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn new(
        algorithm: &str,
        scale: i64,
        start: usize,
        steps: Vec<StepRecord>,
        online_cost: i64,
        offline_cost: i64,
        round_ends: Vec<usize>,
        trace: Option<WorkFunctionTrace>,
        final_work_function: WorkFunction,
    ) -> Self {
        RunReport {
            algorithm: algorithm.to_string(),
            scale,
            start,
            steps,
            online_cost,
            offline_cost,
            ratio: ratio_of(online_cost, offline_cost),
            round_ends,
            final_work_function,
            trace,
        }
    }

    pub fn trajectory(&self) -> Vec<(usize, usize)> {
        self.steps.iter().map(|s| (s.a, s.b)).collect()
    }

    pub fn per_step_costs(&self) -> Vec<i64> {
        self.steps.iter().map(|s| s.cost).collect()
    }

    /// Step ranges `[start, end)` of each completed round.
    pub fn rounds(&self) -> Vec<(usize, usize)> {
        let mut prev = 0;
        self.round_ends
            .iter()
            .map(|&end| {
                let r = (prev, end);
                prev = end;
                r
            })
            .collect()
    }

    fn min_work_after(&self, steps: usize) -> i64 {
        if steps == 0 {
            0
        } else {
            self.steps[steps - 1].min_work
        }
    }

    /// Online cost of each round.
    pub fn round_online_costs(&self) -> Vec<i64> {
        self.rounds().into_iter().map(|(s, e)| self.steps[s..e].iter().map(|r| r.cost).sum()).collect()
    }

    /// Increase of the offline optimum over each round.
    pub fn round_offline_costs(&self) -> Vec<i64> {
        self.rounds().into_iter().map(|(s, e)| self.min_work_after(e) - self.min_work_after(s)).collect()
    }

    /// One row per step: `t,a_t,b_t,step_cost,min_work`, costs as exact rationals.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,a_t,b_t,step_cost,min_work\n");
        for s in &self.steps {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                s.t,
                s.a,
                s.b,
                fmt_scaled(s.cost, self.scale),
                fmt_scaled(s.min_work, self.scale)
            );
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_formatting() {
        assert_eq!(fmt_float(9.0), "9");
        assert_eq!(fmt_float(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_float(33.5), "33.5");
        assert_eq!(fmt_float(f64::INFINITY), "inf");
        assert_eq!(fmt_float(1e20), "1.00000000000e20");
    }

    #[test]
    fn scaled_formatting() {
        assert_eq!(fmt_scaled(6, 4), "3/2");
        assert_eq!(fmt_scaled(8, 4), "2");
    }
}
