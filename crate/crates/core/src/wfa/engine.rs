//! The T-MSS game loop, the work function algorithm and the plumbing that
//! lets arbitrary online algorithms and adaptive adversaries play.

use thiserror::Error;

use crate::metric::MetricSpace;
use crate::transform::{TransformError, Transformation};
use crate::wfa::report::{RunReport, StepRecord, WorkFunctionTrace};
use crate::wfa::work_function::WorkFunction;

pub type AlgorithmError = Box<dyn std::error::Error + Send + Sync>;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("start point {start} out of range for {len} points")]
    StartOutOfRange { start: usize, len: usize },
    #[error("request {step}: {source}")]
    InvalidRequest {
        step: usize,
        #[source]
        source: TransformError,
    },
    #[error("request {step}: algorithm chose point {point} outside the domain")]
    AlgorithmChoseOutsideDomain { step: usize, point: usize },
    #[error("request {step}: algorithm failed: {source}")]
    Algorithm {
        step: usize,
        #[source]
        source: AlgorithmError,
    },
    #[error("request {step}: invariant violated: {what}")]
    InvariantViolated { step: usize, what: String },
}

/// Everything an online algorithm may look at when serving request `step`.
pub struct StepContext<'a> {
    pub metric: &'a dyn MetricSpace,
    /// 1-based index of the request being served.
    pub step: usize,
    pub position: usize,
    pub request: &'a Transformation,
    /// `w_{t-1}`.
    pub work_function: &'a WorkFunction,
    /// `w_t⁻`, determined by the history and the current domain.
    pub pre_work_function: &'a WorkFunction,
    pub history: &'a [StepRecord],
}

pub trait OnlineAlgorithm {
    fn name(&self) -> &str;

    /// Returns the point `a_t` of the request's domain to move to.
    fn serve(&mut self, ctx: &StepContext<'_>) -> Result<usize, AlgorithmError>;
}

/// What the adversary sees before issuing the next request.
pub struct AdversaryView<'a> {
    pub metric: &'a dyn MetricSpace,
    pub position: usize,
    /// Current work function `w_t`.
    pub work_function: &'a WorkFunction,
    pub history: &'a [StepRecord],
    /// Number of completed rounds.
    pub round: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AdversaryMove {
    Request(Transformation),
    EndOfRound,
    Finished,
}

pub trait AdaptiveAdversary {
    fn next(&mut self, view: &AdversaryView<'_>) -> AdversaryMove;
}

/// A fixed request sequence played as a single round.
#[derive(Clone, Debug)]
pub struct ScriptedRequests {
    requests: Vec<Transformation>,
    next: usize,
}

impl ScriptedRequests {
    pub fn new(requests: Vec<Transformation>) -> Self {
        ScriptedRequests { requests, next: 0 }
    }
}

impl AdaptiveAdversary for ScriptedRequests {
    fn next(&mut self, _view: &AdversaryView<'_>) -> AdversaryMove {
        match self.requests.get(self.next) {
            Some(t) => {
                self.next += 1;
                AdversaryMove::Request(t.clone())
            }
            None => AdversaryMove::Finished,
        }
    }
}

/// `argmin_{a ∈ A} w⁻(a) + d(a, b_prev)`, preferring `b_prev` and then the
/// lowest index on ties.
pub fn wfa_choice<M: MetricSpace + ?Sized>(m: &M, pre: &WorkFunction, domain: &[usize], position: usize) -> usize {
    let mut best: Option<(i64, usize)> = None;
    for &a in domain {
        let score = pre.get(a) + m.dist(a, position);
        let better = match best {
            None => true,
            Some((s, b)) => score < s || (score == s && b != position && (a == position || a < b)),
        };
        if better {
            best = Some((score, a));
        }
    }
    best.expect("non-empty domain").1
}

/// Result of a single work function algorithm step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WfaStep {
    pub a: usize,
    pub b: usize,
    pub cost: i64,
    pub pre_work_function: WorkFunction,
    pub work_function: WorkFunction,
}

pub fn wfa_step<M: MetricSpace + ?Sized>(
    m: &M,
    w_prev: &WorkFunction,
    t: &Transformation,
    b_prev: usize,
) -> Result<WfaStep, TransformError> {
    let pre = w_prev.pre_update(m, t.domain()).ok_or(TransformError::EmptyDomain)?;
    let a = wfa_choice(m, &pre, t.domain(), b_prev);
    let b = t.apply(a).expect("choice lies in the domain");
    let work_function = pre.post_update(m, t);
    Ok(WfaStep { a, b, cost: m.dist(b_prev, a), pre_work_function: pre, work_function })
}

/// The work function algorithm.
#[derive(Clone, Copy, Debug, Default)]
pub struct Wfa;

impl OnlineAlgorithm for Wfa {
    fn name(&self) -> &str {
        "wfa"
    }

    fn serve(&mut self, ctx: &StepContext<'_>) -> Result<usize, AlgorithmError> {
        Ok(wfa_choice(ctx.metric, ctx.pre_work_function, ctx.request.domain(), ctx.position))
    }
}

/// Moves to the nearest feasible point (staying if possible, then lowest index).
#[derive(Clone, Copy, Debug, Default)]
pub struct Greedy;

impl OnlineAlgorithm for Greedy {
    fn name(&self) -> &str {
        "greedy"
    }

    fn serve(&mut self, ctx: &StepContext<'_>) -> Result<usize, AlgorithmError> {
        let domain = ctx.request.domain();
        if domain.contains(&ctx.position) {
            return Ok(ctx.position);
        }
        Ok(*domain.iter().min_by_key(|&&a| (ctx.metric.dist(ctx.position, a), a)).expect("non-empty domain"))
    }
}

#[derive(Clone, Debug)]
pub struct SimOptions {
    /// Keep every `w_t⁻` and `w_t` for potential checks.
    pub record_work_functions: bool,
    /// Assert 1-Lipschitzness, non-negativity and monotone offline cost after
    /// every update (quadratic in the number of points).
    pub check_invariants: bool,
    pub max_steps: Option<usize>,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions { record_work_functions: false, check_invariants: true, max_steps: None }
    }
}

impl SimOptions {
    pub fn recording() -> Self {
        SimOptions { record_work_functions: true, ..Default::default() }
    }
}

fn check_work_function<M: MetricSpace + ?Sized>(
    m: &M,
    w: &WorkFunction,
    step: usize,
    which: &str,
) -> Result<(), SimError> {
    match w.lipschitz_violation(m) {
        None => Ok(()),
        Some((x, y)) if x == y => Err(SimError::InvariantViolated { step, what: format!("{which}({x}) < 0") }),
        Some((x, y)) => {
            Err(SimError::InvariantViolated { step, what: format!("{which} not 1-Lipschitz on ({x},{y})") })
        }
    }
}

/// Plays `algo` against `adversary` from `start`, running the work-function
/// dynamic program alongside so the offline optimum is always available.
pub fn simulate<M: MetricSpace>(
    m: &M,
    start: usize,
    adversary: &mut dyn AdaptiveAdversary,
    algo: &mut dyn OnlineAlgorithm,
    opts: &SimOptions,
) -> Result<RunReport, SimError> {
    let n = m.len();
    if start >= n {
        return Err(SimError::StartOutOfRange { start, len: n });
    }
    let mut w = WorkFunction::initial(m, start);
    let mut trace = opts.record_work_functions.then(|| WorkFunctionTrace::new(w.clone()));
    let mut history: Vec<StepRecord> = Vec::new();
    let mut round_ends = Vec::new();
    let mut position = start;
    let mut online: i64 = 0;

    loop {
        if opts.max_steps.is_some_and(|cap| history.len() >= cap) {
            break;
        }
        let view = AdversaryView { metric: m, position, work_function: &w, history: &history, round: round_ends.len() };
        let request = match adversary.next(&view) {
            AdversaryMove::Finished => break,
            AdversaryMove::EndOfRound => {
                round_ends.push(history.len());
                continue;
            }
            AdversaryMove::Request(t) => t,
        };
        let step = history.len() + 1;
        if let Some(&bad) = request.domain().iter().chain(request.image()).find(|&&p| p >= n) {
            return Err(SimError::InvalidRequest {
                step,
                source: TransformError::IndexOutOfRange { index: bad, len: n },
            });
        }
        let pre = w
            .pre_update(m, request.domain())
            .ok_or(SimError::InvalidRequest { step, source: TransformError::EmptyDomain })?;
        let ctx = StepContext {
            metric: m,
            step,
            position,
            request: &request,
            work_function: &w,
            pre_work_function: &pre,
            history: &history,
        };
        let a = algo.serve(&ctx).map_err(|source| SimError::Algorithm { step, source })?;
        let b = request.apply(a).ok_or(SimError::AlgorithmChoseOutsideDomain { step, point: a })?;
        let cost = m.dist(position, a);
        let next = pre.post_update(m, &request);

        if opts.check_invariants {
            check_work_function(m, &pre, step, "w⁻")?;
            check_work_function(m, &next, step, "w")?;
            if next.min() < w.min() {
                return Err(SimError::InvariantViolated { step, what: "min work function decreased".into() });
            }
        }
        online += cost;
        history.push(StepRecord { t: step, a, b, cost, min_work: next.min() });
        if let Some(tr) = trace.as_mut() {
            tr.push(pre, next.clone());
        }
        w = next;
        position = b;
    }

    let offline = w.min();
    if opts.check_invariants && offline > online {
        return Err(SimError::InvariantViolated {
            step: history.len(),
            what: format!("offline cost {offline} exceeds online cost {online}"),
        });
    }
    Ok(RunReport::new(algo.name(), m.scale(), start, history, online, offline, round_ends, trace, w))
}

/// Convenience wrapper for a fixed request list.
pub fn simulate_sequence<M: MetricSpace>(
    m: &M,
    start: usize,
    requests: &[Transformation],
    algo: &mut dyn OnlineAlgorithm,
    opts: &SimOptions,
) -> Result<RunReport, SimError> {
    simulate(m, start, &mut ScriptedRequests::new(requests.to_vec()), algo, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{FiniteMetric, Rational};

    fn star(n: usize) -> FiniteMetric {
        FiniteMetric::from_fn(n, 1, |i, j| match (i, j) {
            _ if i == j => 0,
            (0, _) | (_, 0) => 1,
            _ => 2,
        })
        .unwrap()
    }

    fn line(points: &[i64]) -> FiniteMetric {
        let pts: Vec<Rational> = points.iter().map(|&v| Rational::from_integer(v)).collect();
        FiniteMetric::on_line(&pts).unwrap()
    }

    #[test]
    fn identity_on_everything_stays() {
        let m = line(&[0, 1, 3, 9]);
        let w = WorkFunction::initial(&m, 2);
        let t = Transformation::identity(vec![0, 1, 2, 3]).unwrap();
        let s = wfa_step(&m, &w, &t, 2).unwrap();
        assert_eq!((s.a, s.b, s.cost), (2, 2, 0));
    }

    #[test]
    fn star_first_round_breaks_ties_by_index() {
        let m = star(5);
        let w = WorkFunction::initial(&m, 0);
        let t = Transformation::identity(vec![1, 2, 3, 4]).unwrap();
        let s = wfa_step(&m, &w, &t, 0).unwrap();
        assert_eq!((s.a, s.cost), (1, 1));
    }

    #[test]
    fn forced_final_move() {
        // Algorithm at p1, request {p_n} -> {p1} on the n = 4, alpha = 2 space.
        let m = FiniteMetric::from_scaled(
            None,
            &[vec![0, 1, 3, 9], vec![1, 0, 2, 8], vec![3, 2, 0, 6], vec![9, 8, 6, 0]],
            1,
        )
        .unwrap();
        let w = WorkFunction::initial(&m, 0);
        let t = Transformation::classify(&m, vec![3], vec![0]).unwrap();
        let s = wfa_step(&m, &w, &t, 0).unwrap();
        assert_eq!((s.a, s.b, s.cost), (3, 0, 9));
    }

    #[test]
    fn empty_sequence_costs_nothing() {
        let m = line(&[0, 1]);
        let r = simulate_sequence(&m, 0, &[], &mut Wfa, &SimOptions::default()).unwrap();
        assert_eq!((r.online_cost, r.offline_cost), (0, 0));
        assert_eq!(r.ratio, 1.0);
    }

    #[test]
    fn single_forced_move() {
        let m = line(&[0, 7]);
        let t = Transformation::identity(vec![1]).unwrap();
        let r = simulate_sequence(&m, 0, &[t], &mut Wfa, &SimOptions::default()).unwrap();
        assert_eq!((r.online_cost, r.offline_cost), (7, 7));
        assert_eq!(r.ratio, 1.0);
    }

    struct Teleport;
    impl OnlineAlgorithm for Teleport {
        fn name(&self) -> &str {
            "teleport"
        }
        fn serve(&mut self, ctx: &StepContext<'_>) -> Result<usize, AlgorithmError> {
            Ok((0..ctx.metric.len()).find(|p| !ctx.request.contains(*p)).unwrap())
        }
    }

    #[test]
    fn outside_domain_is_rejected() {
        let m = line(&[0, 1, 2]);
        let t = Transformation::identity(vec![1, 2]).unwrap();
        let err = simulate_sequence(&m, 0, &[t], &mut Teleport, &SimOptions::default()).unwrap_err();
        assert!(matches!(err, SimError::AlgorithmChoseOutsideDomain { step: 1, point: 0 }));
    }

    #[test]
    fn greedy_moves_to_nearest() {
        let m = line(&[0, 1, 3, 9]);
        let t = Transformation::identity(vec![2, 3]).unwrap();
        let r = simulate_sequence(&m, 0, &[t], &mut Greedy, &SimOptions::default()).unwrap();
        assert_eq!(r.trajectory(), vec![(2, 2)]);
    }

    #[test]
    fn deterministic() {
        let m = star(6);
        let reqs: Vec<_> =
            [vec![1, 2, 3], vec![2, 3], vec![3, 5]].into_iter().map(|d| Transformation::identity(d).unwrap()).collect();
        let a = simulate_sequence(&m, 0, &reqs, &mut Wfa, &SimOptions::default()).unwrap();
        let b = simulate_sequence(&m, 0, &reqs, &mut Wfa, &SimOptions::default()).unwrap();
        assert_eq!(a.steps, b.steps);
    }
}
