//! Reduction from α-Lipschitz requests on arbitrary metrics to 1-Lipschitz
//! requests on ultrametrics, and the composed online algorithm that runs the
//! work function algorithm on the symmetric-tree extension of the result.

use serde::Serialize;
use thiserror::Error;

use crate::homogenize::{build_symmetric_tree_extension, ExtendedSpace, HomogenizeError, SymmetricTreeMetric};
use crate::metric::{FiniteMetric, MetricError, MetricSpace, Rational};
use crate::transform::{TransformError, Transformation};
use crate::ultrametric::UltrametricTree;
use crate::wfa::{
    simulate, wfa_step, AdaptiveAdversary, AlgorithmError, OnlineAlgorithm, RunReport, ScriptedRequests, SimError,
    SimOptions, StepContext, WorkFunction,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LipschitzError {
    #[error("a single point has nothing to distort")]
    SinglePoint,
    #[error(transparent)]
    Metric(#[from] MetricError),
}

/// Grouping of all pairs into levels of distances with no gap wider than α′.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LevelPartition {
    n: usize,
    /// Row-major `n × n`; 0 on the diagonal, otherwise the 1-based level.
    level_of_pair: Vec<usize>,
    /// `L_k`, the longest distance in level `k` (index `k - 1`).
    pub level_max: Vec<i64>,
    /// Shortest distance in each level.
    pub level_min: Vec<i64>,
    pub alpha_used: Rational,
}

impl LevelPartition {
    pub fn level(&self, x: usize, y: usize) -> usize {
        self.level_of_pair[x * self.n + y]
    }

    pub fn level_count(&self) -> usize {
        self.level_max.len()
    }

    /// `d̂(x, y) = L_{level(x, y)}`.
    pub fn distorted(&self, x: usize, y: usize) -> i64 {
        match self.level(x, y) {
            0 => 0,
            l => self.level_max[l - 1],
        }
    }

    /// Checks that, for every `k`, points joined by edges of level `≤ k`
    /// are pairwise at level `≤ k`.
    pub fn connectivity_is_equivalence(&self) -> bool {
        let n = self.n;
        for k in 1..=self.level_count() {
            let mut parent: Vec<usize> = (0..n).collect();
            fn find(p: &mut [usize], mut x: usize) -> usize {
                while p[x] != x {
                    p[x] = p[p[x]];
                    x = p[x];
                }
                x
            }
            for x in 0..n {
                for y in x + 1..n {
                    if self.level(x, y) <= k {
                        let (a, b) = (find(&mut parent, x), find(&mut parent, y));
                        parent[a] = b;
                    }
                }
            }
            for x in 0..n {
                for y in x + 1..n {
                    if find(&mut parent, x) == find(&mut parent, y) && self.level(x, y) > k {
                        return false;
                    }
                }
            }
        }
        true
    }
}

/// The ultrametric `d̂` produced from `d`.
#[derive(Clone, Debug)]
pub struct UltrametricDistortion {
    pub tree: UltrametricTree,
    pub partition: LevelPartition,
    /// `max_{x≠y} d̂(x, y) / d(x, y)`.
    pub distortion: Rational,
    /// The pair attaining the distortion.
    pub witness: (usize, usize),
}

/// `max(α, 2)`.
pub fn effective_alpha(alpha: Rational) -> Rational {
    alpha.max(Rational::from_integer(2))
}

/// `(α′ + 1)^{n-2}` for `n ≥ 2`.
pub fn distortion_bound(alpha: Rational, n: usize) -> Rational {
    let base = effective_alpha(alpha) + Rational::from_integer(1);
    (0..n.saturating_sub(2)).fold(Rational::from_integer(1), |acc, _| acc * base)
}

fn within_factor(x: i64, alpha: Rational, reference: i64) -> bool {
    // x <= alpha * reference
    x as i128 * *alpha.denom() as i128 <= *alpha.numer() as i128 * reference as i128
}

/// Groups distances into levels and stretches each pair to the longest
/// distance of its level. Distances sorted ascending start a new level when
/// they exceed α′ times the longest distance collected so far.
pub fn build_ultrametric_distortion(
    m: &FiniteMetric,
    alpha: Rational,
) -> Result<UltrametricDistortion, LipschitzError> {
    let n = m.len();
    if n < 2 {
        return Err(LipschitzError::SinglePoint);
    }
    let alpha = effective_alpha(alpha);
    let mut distances: Vec<i64> =
        (0..n).flat_map(|x| (x + 1..n).map(move |y| (x, y))).map(|(x, y)| m.dist(x, y)).collect();
    distances.sort_unstable();
    distances.dedup();

    let mut level_min = vec![distances[0]];
    let mut level_max = vec![distances[0]];
    for &d in &distances[1..] {
        let top = level_max.last_mut().unwrap();
        if within_factor(d, alpha, *top) {
            *top = d;
        } else {
            level_min.push(d);
            level_max.push(d);
        }
    }
    let level_of = |d: i64| level_max.partition_point(|&top| top < d) + 1;
    let mut level_of_pair = vec![0; n * n];
    for x in 0..n {
        for y in 0..n {
            if x != y {
                level_of_pair[x * n + y] = level_of(m.dist(x, y));
            }
        }
    }
    let partition = LevelPartition { n, level_of_pair, level_max, level_min, alpha_used: alpha };

    let hat =
        FiniteMetric::from_fn(n, m.scale(), |x, y| partition.distorted(x, y))?.with_labels(m.labels().to_vec())?;
    let tree = UltrametricTree::from_metric(&hat)?;

    let mut witness = (0, 1);
    for x in 0..n {
        for y in x + 1..n {
            let (bx, by) = witness;
            // hat(x,y)/d(x,y) > hat(bx,by)/d(bx,by)
            if hat.dist(x, y) as i128 * m.dist(bx, by) as i128 > hat.dist(bx, by) as i128 * m.dist(x, y) as i128 {
                witness = (x, y);
            }
        }
    }
    let distortion = Rational::new(hat.dist(witness.0, witness.1), m.dist(witness.0, witness.1));
    Ok(UltrametricDistortion { tree, partition, distortion, witness })
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("request {step} is {found}-Lipschitz, above the declared {declared}")]
    RequestNotLipschitz { step: usize, found: Rational, declared: Rational },
    #[error("request {step} is {found}-Lipschitz in the distorted ultrametric")]
    RequestNot1LipschitzAfterDistortion { step: usize, found: Rational },
    #[error("algorithm state diverged from the simulated position at request {step}")]
    PositionMismatch { step: usize },
    #[error(transparent)]
    Distortion(#[from] LipschitzError),
    #[error(transparent)]
    Homogenize(#[from] HomogenizeError),
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error(transparent)]
    Simulation(#[from] SimError),
}

impl PipelineError {
    /// Errors that can only come from a broken invariant rather than input.
    pub fn is_internal(&self) -> bool {
        matches!(
            self,
            PipelineError::RequestNot1LipschitzAfterDistortion { .. }
                | PipelineError::PositionMismatch { .. }
                | PipelineError::Simulation(SimError::InvariantViolated { .. })
        )
    }
}

/// Online algorithm on `(M, d)` that serves every request with the work
/// function algorithm on the symmetric-tree extension of `d̂`.
pub struct PipelineAlgorithm {
    alpha: Rational,
    distortion: UltrametricDistortion,
    extension: ExtendedSpace<SymmetricTreeMetric>,
    back: Vec<Option<usize>>,
    work_function: WorkFunction,
    position: usize,
    hat_online: i64,
}

impl PipelineAlgorithm {
    pub fn new(m: &FiniteMetric, start: usize, alpha: Rational) -> Result<Self, PipelineError> {
        let distortion = build_ultrametric_distortion(m, alpha)?;
        let extension = build_symmetric_tree_extension(&distortion.tree)?;
        let mut back = vec![None; extension.size()];
        for (p, &x) in extension.embedding.iter().enumerate() {
            back[x] = Some(p);
        }
        let position = extension.embedding[start];
        Ok(PipelineAlgorithm {
            alpha,
            work_function: WorkFunction::initial(&extension.extension, position),
            distortion,
            extension,
            back,
            position,
            hat_online: 0,
        })
    }

    pub fn distortion(&self) -> &UltrametricDistortion {
        &self.distortion
    }

    pub fn extension(&self) -> &ExtendedSpace<SymmetricTreeMetric> {
        &self.extension
    }

    /// Cost paid so far measured in `d̂`.
    pub fn hat_online_cost(&self) -> i64 {
        self.hat_online
    }

    /// Offline optimum so far on the extension under `d̂`.
    pub fn hat_offline_cost(&self) -> i64 {
        self.work_function.min()
    }

    fn step(&mut self, ctx: &StepContext<'_>) -> Result<usize, PipelineError> {
        let step = ctx.step;
        if self.back[self.position] != Some(ctx.position) {
            return Err(PipelineError::PositionMismatch { step });
        }
        let t = ctx.request;
        let found = Transformation::classify(ctx.metric, t.domain().to_vec(), t.image().to_vec())?.alpha();
        if found > self.alpha {
            return Err(PipelineError::RequestNotLipschitz { step, found, declared: self.alpha });
        }
        let hat = t.map_points(&self.extension.extension, &self.extension.embedding)?;
        if hat.alpha() > Rational::from_integer(1) {
            return Err(PipelineError::RequestNot1LipschitzAfterDistortion { step, found: hat.alpha() });
        }
        let s = wfa_step(&self.extension.extension, &self.work_function, &hat, self.position)?;
        self.hat_online += s.cost;
        self.work_function = s.work_function;
        self.position = s.b;
        Ok(self.back[s.a].expect("domain lies in the base"))
    }
}

impl OnlineAlgorithm for PipelineAlgorithm {
    fn name(&self) -> &str {
        "ultrametric-pipeline"
    }

    fn serve(&mut self, ctx: &StepContext<'_>) -> Result<usize, AlgorithmError> {
        self.step(ctx).map_err(|e| Box::new(e) as AlgorithmError)
    }
}

/// Outcome of a pipeline run: costs in `d` plus diagnostics in `d̂`.
#[derive(Clone, Debug, Serialize)]
pub struct PipelineReport {
    /// Trajectory and costs in the original metric, OPT under `d`.
    pub run: RunReport,
    pub hat_online_cost: i64,
    pub hat_offline_cost: i64,
    pub extension_size: usize,
    pub distortion: Rational,
    pub alpha_used: Rational,
    pub level_max: Vec<i64>,
}

impl PipelineReport {
    /// `(|M̂| - 1) · OPT_{d̂} + (|M̂| - 1) · L_max`, the guarantee on the extension.
    pub fn hat_bound(&self) -> i128 {
        let k = self.extension_size as i128 - 1;
        k * self.hat_offline_cost as i128 + k * self.level_max.last().copied().unwrap_or(0) as i128
    }
}

fn unwrap_sim(e: SimError) -> PipelineError {
    match e {
        SimError::Algorithm { source, step } => match source.downcast::<PipelineError>() {
            Ok(p) => *p,
            Err(source) => PipelineError::Simulation(SimError::Algorithm { step, source }),
        },
        other => PipelineError::Simulation(other),
    }
}

/// Plays the pipeline against an adversary on `(M, d)`.
pub fn run_pipeline(
    m: &FiniteMetric,
    start: usize,
    adversary: &mut dyn AdaptiveAdversary,
    alpha: Rational,
    opts: &SimOptions,
) -> Result<PipelineReport, PipelineError> {
    if start >= m.len() {
        return Err(SimError::StartOutOfRange { start, len: m.len() }.into());
    }
    let mut algo = PipelineAlgorithm::new(m, start, alpha)?;
    let run = simulate(m, start, adversary, &mut algo, opts).map_err(unwrap_sim)?;
    Ok(PipelineReport {
        hat_online_cost: algo.hat_online_cost(),
        hat_offline_cost: algo.hat_offline_cost(),
        extension_size: algo.extension.size(),
        distortion: algo.distortion.distortion,
        alpha_used: algo.distortion.partition.alpha_used,
        level_max: algo.distortion.partition.level_max.clone(),
        run,
    })
}

/// The composed algorithm on a fixed request list.
pub fn run_lipschitz_pipeline(
    m: &FiniteMetric,
    start: usize,
    requests: &[Transformation],
    alpha: Rational,
) -> Result<PipelineReport, PipelineError> {
    run_pipeline(m, start, &mut ScriptedRequests::new(requests.to_vec()), alpha, &SimOptions::default())
}

/// `2 · max{2(α+1), 6}^{n-2}`.
pub fn composed_ratio_bound(alpha: Rational, n: usize) -> Rational {
    let base = (Rational::from_integer(2) * (alpha + Rational::from_integer(1))).max(Rational::from_integer(6));
    (0..n.saturating_sub(2)).fold(Rational::from_integer(2), |acc, _| acc * base)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(points: &[i64]) -> FiniteMetric {
        let pts: Vec<Rational> = points.iter().map(|&v| Rational::from_integer(v)).collect();
        FiniteMetric::on_line(&pts).unwrap()
    }

    fn r(x: i64) -> Rational {
        Rational::from_integer(x)
    }

    #[test]
    fn equal_distances_single_level() {
        let m = FiniteMetric::from_fn(4, 1, |i, j| if i == j { 0 } else { 5 }).unwrap();
        let d = build_ultrametric_distortion(&m, r(2)).unwrap();
        assert_eq!(d.partition.level_count(), 1);
        assert_eq!(d.distortion, r(1));
    }

    #[test]
    fn equality_instance() {
        let d = build_ultrametric_distortion(&line(&[0, 1, 3, 9]), r(2)).unwrap();
        assert_eq!(d.partition.level_max, vec![9]);
        assert_eq!(d.distortion, r(9));
        assert_eq!(d.distortion, distortion_bound(r(2), 4));
    }

    #[test]
    fn two_levels() {
        let m = line(&[0, 1, 10]);
        let d = build_ultrametric_distortion(&m, r(2)).unwrap();
        assert_eq!(d.partition.level_max, vec![1, 10]);
        assert_eq!((d.tree.dist(0, 1), d.tree.dist(0, 2), d.tree.dist(1, 2)), (1, 10, 10));
        assert_eq!(d.distortion, Rational::new(10, 9));
        assert!(d.partition.connectivity_is_equivalence());
    }

    #[test]
    fn small_alpha_rounds_up() {
        let d = build_ultrametric_distortion(&line(&[0, 1, 10]), r(1)).unwrap();
        assert_eq!(d.partition.alpha_used, r(2));
    }

    #[test]
    fn single_point() {
        let m = FiniteMetric::from_fn(1, 1, |_, _| 0).unwrap();
        assert_eq!(build_ultrametric_distortion(&m, r(2)).unwrap_err(), LipschitzError::SinglePoint);
    }

    #[test]
    fn bound_formula() {
        assert_eq!(composed_ratio_bound(r(2), 4), r(72));
        assert_eq!(composed_ratio_bound(r(1), 3), r(12));
    }

    #[test]
    fn identity_requests_cost_less_in_d() {
        let m = line(&[0, 1, 10]);
        let reqs = vec![
            Transformation::identity(vec![2]).unwrap(),
            Transformation::identity(vec![0, 1]).unwrap(),
            Transformation::identity(vec![2]).unwrap(),
        ];
        let rep = run_lipschitz_pipeline(&m, 0, &reqs, r(2)).unwrap();
        assert!(rep.run.online_cost <= rep.hat_online_cost);
        assert_eq!(rep.extension_size, 4);
        assert!((rep.hat_online_cost as i128) <= rep.hat_bound());
    }

    #[test]
    fn rejects_steep_request() {
        let m = line(&[0, 1, 10]);
        let t = Transformation::classify(&m, vec![0, 1], vec![0, 2]).unwrap();
        match run_lipschitz_pipeline(&m, 0, &[t], r(2)) {
            Err(PipelineError::RequestNotLipschitz { step: 1, found, .. }) => assert_eq!(found, r(10)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn collapse_to_one_point() {
        let m = line(&[0, 1, 3, 9]);
        let t = Transformation::classify(&m, vec![0, 1, 2, 3], vec![3, 3, 3, 3]).unwrap();
        let rep = run_lipschitz_pipeline(&m, 0, &vec![t; 5], r(2)).unwrap();
        // Staying put is feasible every time.
        assert_eq!(rep.run.online_cost, 0);
        assert_eq!(rep.run.offline_cost, 0);
        assert!(rep.run.steps.iter().all(|s| s.b == 3));
    }
}
