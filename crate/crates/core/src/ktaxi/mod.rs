//! k-taxi on tree metrics through the configuration torus.
//!
//! A configuration of `k` taxis on the leaves of a rooted tree is the vector
//! `x_v` of taxi counts per subtree, one coordinate per non-root vertex. With
//! edge weights `w_v` the weighted `ℓ₁` distance between two vectors is the
//! cost of moving the taxis, and a request `(s, d)` acts as a translation.

mod frt;
mod tree;

use std::collections::HashMap;

use serde::Serialize;
use thiserror::Error;

use crate::homogenize::{build_torus_extension, torus_size, ExtendedSpace, HomogenizeError, TorusMetric};
use crate::metric::{FiniteMetric, MetricError, MetricSpace};
use crate::transform::Transformation;
use crate::wfa::{simulate_sequence, RunReport, SimError, SimOptions, Wfa, WorkFunction};

pub use frt::{frt_embed, FrtEmbedding, FRT_BETA_DENOMINATOR};
pub use tree::TreeMetric;

/// Largest configuration torus that is simulated.
pub const MAX_TORUS_POINTS: u128 = 4096;
/// Limits for [`config_space_metric`].
pub const MAX_CONFIG_TAXIS: usize = 3;
pub const MAX_CONFIG_LEAVES: usize = 5;

#[derive(Debug, Error)]
pub enum KtaxiError {
    #[error("size {size} exceeds limit {limit}")]
    TooLarge { size: u128, limit: u128 },
    #[error("vertex {0} is not a leaf")]
    NotALeaf(usize),
    #[error("invalid tree: {0}")]
    InvalidTree(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Homogenize(#[from] HomogenizeError),
    #[error(transparent)]
    Simulation(#[from] SimError),
}

/// Taxi counts per subtree, indexed like [`TreeMetric::vertices`].
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct TaxiConfig {
    pub x: Vec<i64>,
}

impl TaxiConfig {
    /// The configuration with one taxi per listed leaf (repeats allowed).
    pub fn from_leaves(t: &TreeMetric, leaves: &[usize]) -> Result<Self, KtaxiError> {
        let mut x = vec![0i64; t.vertices().len()];
        for &l in leaves {
            if !t.is_leaf(l) {
                return Err(KtaxiError::NotALeaf(l));
            }
            for v in t.ancestors(l) {
                x[t.coordinate(v).expect("non-root")] += 1;
            }
        }
        Ok(TaxiConfig { x })
    }

    /// Taxi positions as sorted leaf vertices.
    pub fn leaves(&self, t: &TreeMetric) -> Vec<usize> {
        let mut out = Vec::new();
        for &l in t.leaves() {
            let c = t.coordinate(l).expect("leaf is not the root");
            out.extend(std::iter::repeat_n(l, self.x[c].max(0) as usize));
        }
        out.sort_unstable();
        out
    }

    pub fn taxis(&self, t: &TreeMetric) -> i64 {
        t.children(t.root()).iter().map(|&c| self.x[t.coordinate(c).expect("non-root")]).sum()
    }

    /// Checks the subtree counts against a placement of `k` taxis on leaves.
    pub fn validate(&self, t: &TreeMetric, k: usize) -> Result<(), KtaxiError> {
        if self.x.len() != t.vertices().len() {
            return Err(KtaxiError::InvalidConfig(format!(
                "{} coordinates for {} vertices",
                self.x.len(),
                t.vertices().len()
            )));
        }
        if self.x.iter().any(|&c| c < 0 || c > k as i64) {
            return Err(KtaxiError::InvalidConfig("counts must lie in 0..=k".into()));
        }
        let leaves = self.leaves(t);
        if leaves.len() != k || TaxiConfig::from_leaves(t, &leaves)? != *self {
            return Err(KtaxiError::InvalidConfig(format!("{:?} is not a placement of {k} taxis on leaves", self.x)));
        }
        Ok(())
    }

    pub fn label(&self, t: &TreeMetric) -> String {
        let names: Vec<&str> = self.leaves(t).into_iter().map(|l| t.label(l)).collect();
        format!("{{{}}}", names.join(","))
    }

    /// `Σ_v w_v |x_v - y_v|` on the tree's scaled grid.
    pub fn distance(&self, other: &TaxiConfig, t: &TreeMetric) -> i64 {
        self.x.iter().zip(&other.x).zip(t.scaled_weights()).map(|((a, b), w)| w * (a - b).abs()).sum()
    }
}

/// The valid configurations of `k` taxis and their weighted `ℓ₁` metric.
#[derive(Clone, Debug)]
pub struct ConfigSpace {
    pub metric: FiniteMetric,
    pub configs: Vec<TaxiConfig>,
    index: HashMap<TaxiConfig, usize>,
}

impl ConfigSpace {
    pub fn index_of(&self, c: &TaxiConfig) -> Option<usize> {
        self.index.get(c).copied()
    }
}

fn multisets(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    fn go(items: &[usize], from: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in from..items.len() {
            cur.push(items[i]);
            go(items, i, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(items, 0, k, &mut Vec::with_capacity(k), &mut out);
    out
}

fn config_space_unchecked(t: &TreeMetric, k: usize) -> Result<ConfigSpace, KtaxiError> {
    let configs: Vec<TaxiConfig> =
        multisets(t.leaves(), k).iter().map(|ls| TaxiConfig::from_leaves(t, ls)).collect::<Result<_, _>>()?;
    let labels = configs.iter().map(|c| c.label(t)).collect();
    let metric = FiniteMetric::from_fn(configs.len(), t.scale(), |i, j| configs[i].distance(&configs[j], t))?
        .with_labels(labels)?;
    let index = configs.iter().cloned().enumerate().map(|(i, c)| (c, i)).collect();
    Ok(ConfigSpace { metric, configs, index })
}

/// All placements of `k` taxis on the leaves with `d(x,y) = Σ_v w_v|x_v - y_v|`.
pub fn config_space_metric(t: &TreeMetric, k: usize) -> Result<ConfigSpace, KtaxiError> {
    if k == 0 {
        return Err(KtaxiError::InvalidConfig("need at least one taxi".into()));
    }
    if k > MAX_CONFIG_TAXIS {
        return Err(KtaxiError::TooLarge { size: k as u128, limit: MAX_CONFIG_TAXIS as u128 });
    }
    if t.leaves().len() > MAX_CONFIG_LEAVES {
        return Err(KtaxiError::TooLarge { size: t.leaves().len() as u128, limit: MAX_CONFIG_LEAVES as u128 });
    }
    config_space_unchecked(t, k)
}

/// `+1` on ancestors of `dest` that are not ancestors of `s`, `-1` on
/// ancestors of `s` that are not ancestors of `dest`.
pub fn request_to_translation(t: &TreeMetric, s: usize, dest: usize) -> Result<Vec<i64>, KtaxiError> {
    for l in [s, dest] {
        if !t.is_leaf(l) {
            return Err(KtaxiError::NotALeaf(l));
        }
    }
    let mut v = vec![0i64; t.vertices().len()];
    for a in t.ancestors(dest) {
        v[t.coordinate(a).expect("non-root")] += 1;
    }
    for a in t.ancestors(s) {
        v[t.coordinate(a).expect("non-root")] -= 1;
    }
    Ok(v)
}

/// The torus `{0..2k-1}^V` with weights `w_v`, extending `{0..k}^V`.
pub fn build_config_torus(t: &TreeMetric, k: usize) -> Result<ExtendedSpace<TorusMetric>, KtaxiError> {
    if k == 0 {
        return Err(KtaxiError::InvalidConfig("need at least one taxi".into()));
    }
    let dims = t.vertices().len();
    let size = torus_size(k, dims);
    if size > MAX_TORUS_POINTS {
        return Err(KtaxiError::TooLarge { size, limit: MAX_TORUS_POINTS });
    }
    Ok(build_torus_extension(k, dims, &t.weights())?)
}

/// Outcome of a k-taxi run.
#[derive(Clone, Debug)]
pub struct KtaxiReport {
    /// The run on the torus; costs are empty-travel distances.
    pub run: RunReport,
    /// Configuration before the first request and after each one.
    pub trajectory: Vec<TaxiConfig>,
    /// Configuration the algorithm moved to before each ride.
    pub served_from: Vec<TaxiConfig>,
    /// Offline optimum computed on the configuration metric alone.
    pub offline_config_cost: i64,
    pub torus_size: usize,
    pub scale: i64,
}

/// Runs WFA on the configuration torus for the rides `(s, dest)`.
pub fn simulate_ktaxi(
    t: &TreeMetric,
    k: usize,
    start: &TaxiConfig,
    requests: &[(usize, usize)],
) -> Result<KtaxiReport, KtaxiError> {
    start.validate(t, k)?;
    let ext = build_config_torus(t, k)?;
    let torus = &ext.extension;
    let space = config_space_unchecked(t, k)?;
    let embed = |c: &TaxiConfig| torus.index(&c.x);

    let mut on_torus = Vec::with_capacity(requests.len());
    let mut on_configs = Vec::with_capacity(requests.len());
    for &(s, dest) in requests {
        let shift = request_to_translation(t, s, dest)?;
        let sc = t.coordinate(s).expect("leaf");
        let mut dom = Vec::new();
        let mut img = Vec::new();
        for (i, c) in space.configs.iter().enumerate() {
            if c.x[sc] == 0 {
                continue;
            }
            let moved = TaxiConfig { x: c.x.iter().zip(&shift).map(|(a, b)| a + b).collect() };
            let j = space.index_of(&moved).expect("moving one taxi keeps a valid configuration");
            dom.push(i);
            img.push(j);
        }
        let to_torus = |v: &[usize]| v.iter().map(|&i| embed(&space.configs[i])).collect::<Vec<_>>();
        on_torus.push(Transformation::classify(torus, to_torus(&dom), to_torus(&img)).expect("indices in range"));
        on_configs.push(Transformation::classify(&space.metric, dom, img).expect("indices in range"));
    }

    let opts = SimOptions { check_invariants: torus.len() <= 256, ..SimOptions::default() };
    let run = simulate_sequence(torus, embed(start), &on_torus, &mut Wfa, &opts)?;

    let decode: HashMap<usize, usize> = space.configs.iter().enumerate().map(|(i, c)| (embed(c), i)).collect();
    let config_at = |p: usize| space.configs[decode[&p]].clone();
    let mut trajectory = vec![start.clone()];
    let mut served_from = Vec::with_capacity(run.steps.len());
    for rec in &run.steps {
        served_from.push(config_at(rec.a));
        trajectory.push(config_at(rec.b));
    }

    let start_idx = space.index_of(start).expect("validated start");
    let mut w = WorkFunction::initial(&space.metric, start_idx);
    for r in &on_configs {
        w = w.pre_update(&space.metric, r.domain()).expect("non-empty domain").post_update(&space.metric, r);
    }

    Ok(KtaxiReport {
        run,
        trajectory,
        served_from,
        offline_config_cost: w.min(),
        torus_size: torus.len(),
        scale: t.scale(),
    })
}
