//! Potential functions and replay of the three inequalities behind the
//! generic work-function competitiveness argument:
//!
//! 1. `w_t⁻(x) - w_{t-1}(x) <= Φ(w_t⁻) - Φ(w_{t-1})` for every `x`,
//! 2. `Φ(w_t⁻) <= Φ(w_t)`,
//! 3. `Φ(w) <= ρ · min_p w(p) + C`.
//!
//! Violations are findings, not errors: some potentials legitimately fail on
//! some spaces.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metric::MetricSpace;
use crate::wfa::report::WorkFunctionTrace;
use crate::wfa::work_function::WorkFunction;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PotentialError {
    #[error("swap potential needs at least two points, got {0}")]
    TooFewPoints(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Potential {
    /// `Σ_p w(p)`.
    Sum,
    /// `Σ_p w(p) + min_{x≠y} Ψ_{x,y}(w)` for identity/swap requests.
    Swap,
}

/// `cl(X)`: sum of all pairwise distances within `X`.
pub fn clique_sum<M: MetricSpace + ?Sized>(m: &M, points: &[usize]) -> i64 {
    let mut total = 0;
    for (i, &x) in points.iter().enumerate() {
        for &y in &points[i + 1..] {
            total += m.dist(x, y);
        }
    }
    total
}

struct SwapTables {
    total: i64,
    row: Vec<i64>,
}

impl SwapTables {
    fn new<M: MetricSpace + ?Sized>(m: &M) -> Self {
        let n = m.len();
        let row: Vec<i64> = (0..n).map(|x| (0..n).map(|p| m.dist(x, p)).sum()).collect();
        SwapTables { total: row.iter().sum::<i64>() / 2, row }
    }

    fn phi<M: MetricSpace + ?Sized>(&self, m: &M, w: &WorkFunction) -> i64 {
        let n = m.len();
        let mut best = i64::MAX;
        for x in 0..n {
            for y in x + 1..n {
                // Ψ is symmetric in (x, y).
                let mut psi = self.total - self.row[x] - self.row[y] + m.dist(x, y);
                let (wx, wy) = (w.get(x), w.get(y));
                for p in 0..n {
                    if p != x && p != y {
                        psi += (wx + m.dist(y, p)).min(wy + m.dist(x, p));
                    }
                }
                best = best.min(psi);
            }
        }
        w.potential_sum() + best
    }
}

/// `Φ(w) = Σ_p w(p) + min_{x≠y} [cl(M−x−y) + Σ_{p∈M−x−y} min{w(x)+d(y,p), w(y)+d(x,p)}]`.
pub fn swap_potential<M: MetricSpace + ?Sized>(m: &M, w: &WorkFunction) -> Result<i64, PotentialError> {
    if m.len() < 2 {
        return Err(PotentialError::TooFewPoints(m.len()));
    }
    Ok(SwapTables::new(m).phi(m, w))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    /// 1-based step; 0 refers to `w_0`.
    pub step: usize,
    /// Which of the three inequalities failed.
    pub inequality: u8,
    pub lhs: i128,
    pub rhs: i128,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PotentialReport {
    pub potential: Potential,
    pub phi_initial: i64,
    /// `Φ(w_t⁻)` per step.
    pub phi_pre: Vec<i64>,
    /// `Φ(w_t)` per step.
    pub phi_post: Vec<i64>,
    pub rho: i64,
    pub additive: i64,
    pub violations: Vec<Violation>,
}

impl PotentialReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn violations_of(&self, inequality: u8) -> impl Iterator<Item = &Violation> {
        self.violations.iter().filter(move |v| v.inequality == inequality)
    }
}

/// Replays a recorded run and evaluates all three inequalities at every step.
pub fn check_potential_run<M: MetricSpace + ?Sized>(
    m: &M,
    trace: &WorkFunctionTrace,
    potential: Potential,
    rho: i64,
    additive: i64,
) -> Result<PotentialReport, PotentialError> {
    let tables = match potential {
        Potential::Sum => None,
        Potential::Swap => {
            if m.len() < 2 {
                return Err(PotentialError::TooFewPoints(m.len()));
            }
            Some(SwapTables::new(m))
        }
    };
    let phi = |w: &WorkFunction| match &tables {
        None => w.potential_sum(),
        Some(t) => t.phi(m, w),
    };
    let mut violations = Vec::new();
    let check_bound = |step: usize, w: &WorkFunction, value: i64, violations: &mut Vec<Violation>| {
        let rhs = rho as i128 * w.min() as i128 + additive as i128;
        if value as i128 > rhs {
            violations.push(Violation { step, inequality: 3, lhs: value as i128, rhs });
        }
    };

    let phi_initial = phi(&trace.initial);
    check_bound(0, &trace.initial, phi_initial, &mut violations);
    let mut phi_pre = Vec::with_capacity(trace.steps.len());
    let mut phi_post = Vec::with_capacity(trace.steps.len());
    let mut prev_phi = phi_initial;
    for (i, (pre, post)) in trace.steps.iter().enumerate() {
        let step = i + 1;
        let prev = trace.post(i);
        let (p_pre, p_post) = (phi(pre), phi(post));

        let growth = pre.values().iter().zip(prev.values()).map(|(a, b)| a - b).max().unwrap_or(0);
        if growth > p_pre - prev_phi {
            violations.push(Violation { step, inequality: 1, lhs: growth as i128, rhs: (p_pre - prev_phi) as i128 });
        }
        if p_pre > p_post {
            violations.push(Violation { step, inequality: 2, lhs: p_pre as i128, rhs: p_post as i128 });
        }
        check_bound(step, pre, p_pre, &mut violations);
        check_bound(step, post, p_post, &mut violations);

        phi_pre.push(p_pre);
        phi_post.push(p_post);
        prev_phi = p_post;
    }
    Ok(PotentialReport { potential, phi_initial, phi_pre, phi_post, rho, additive, violations })
}
