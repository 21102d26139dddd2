use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ktaxi::TreeMetric;
use crate::metric::{FiniteMetric, MetricSpace, Rational};

/// The radius factor is `β = (U + u) / U` with `u` uniform in `0..U`.
pub const FRT_BETA_DENOMINATOR: i64 = 1 << 16;

/// A random hierarchical decomposition tree and where each point landed.
#[derive(Clone, Debug)]
pub struct FrtEmbedding {
    pub tree: TreeMetric,
    /// `leaf_of[p]` is the tree vertex holding point `p`.
    pub leaf_of: Vec<usize>,
    /// Numerator offset `u` of the radius factor.
    pub beta_offset: i64,
    pub permutation: Vec<usize>,
}

impl FrtEmbedding {
    /// `d_T(p, q) / d(p, q)` over all pairs; `None` for a single point.
    pub fn stretches(&self, m: &FiniteMetric) -> Vec<f64> {
        let n = m.len();
        let mut out = Vec::new();
        for p in 0..n {
            for q in p + 1..n {
                let t = self.tree.scaled_distance(self.leaf_of[p], self.leaf_of[q]) as f64;
                out.push(t / m.dist(p, q) as f64);
            }
        }
        out
    }

    /// Whether every tree distance dominates the original one.
    pub fn is_non_contracting(&self, m: &FiniteMetric) -> bool {
        let n = m.len();
        (0..n).all(|p| (p + 1..n).all(|q| self.tree.scaled_distance(self.leaf_of[p], self.leaf_of[q]) >= m.dist(p, q)))
    }
}

struct Builder<'a> {
    m: &'a FiniteMetric,
    order: Vec<usize>,
    beta: i64,
    parent: Vec<Option<usize>>,
    weight: Vec<i64>,
    leaf_of: Vec<usize>,
}

impl Builder<'_> {
    fn add(&mut self, parent: Option<usize>, w: i64) -> usize {
        self.parent.push(parent);
        self.weight.push(w);
        self.parent.len() - 1
    }

    /// Splits `cluster` (diameter at most `2^{level+1}`) with radius
    /// `β 2^{level-2}` and hangs the parts below `node` with edges `2^level`.
    fn split(&mut self, node: usize, cluster: Vec<usize>, level: u32) {
        let mut parts: Vec<Vec<usize>> = Vec::new();
        let mut center_of = Vec::new();
        for &x in &cluster {
            // d <= β 2^{level-2}  <=>  4 U d <= (U + u) 2^level
            let c = *self
                .order
                .iter()
                .find(|&&c| {
                    4 * FRT_BETA_DENOMINATOR as i128 * self.m.dist(x, c) as i128 <= (self.beta as i128) << level
                })
                .expect("x is its own center");
            match center_of.iter().position(|&k| k == c) {
                Some(i) => parts[i].push(x),
                None => {
                    center_of.push(c);
                    parts.push(vec![x]);
                }
            }
        }
        if parts.len() == 1 {
            // Unary step: keep the same node and go one level down.
            self.split(node, cluster, level - 1);
            return;
        }
        let edge = 1i64 << level;
        for part in parts {
            let child = self.add(Some(node), edge);
            if part.len() == 1 {
                self.leaf_of[part[0]] = child;
            } else {
                self.split(child, part, level - 1);
            }
        }
    }
}

/// Random tree whose leaves carry the points of `m` and whose path metric
/// dominates `m`. Unary chains are contracted, so every internal vertex has
/// at least two children.
pub fn frt_embed(m: &FiniteMetric, seed: u64) -> FrtEmbedding {
    let n = m.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let beta_offset = rng.gen_range(0..FRT_BETA_DENOMINATOR);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut b = Builder {
        m,
        order: order.clone(),
        beta: FRT_BETA_DENOMINATOR + beta_offset,
        parent: Vec::new(),
        weight: Vec::new(),
        leaf_of: vec![0; n],
    };
    let root = b.add(None, 0);
    if n == 1 {
        b.leaf_of[0] = b.add(Some(root), m.scale().max(1));
    } else {
        let diam = m.diameter();
        // Smallest level with 2^{level+1} >= diameter.
        let mut level = 0u32;
        while (2i64 << level) < diam {
            level += 1;
        }
        b.split(root, (0..n).collect(), level);
    }
    let weights = b.weight.iter().map(|&w| Rational::new(w, m.scale())).collect();
    let mut labels = vec![String::new(); b.parent.len()];
    for (v, l) in labels.iter_mut().enumerate() {
        *l = format!("t{v}");
    }
    for (p, &leaf) in b.leaf_of.iter().enumerate() {
        labels[leaf] = m.label(p).to_string();
    }
    let tree = TreeMetric::new(b.parent, weights, Some(labels)).expect("decomposition tree is well formed");
    FrtEmbedding { tree, leaf_of: b.leaf_of, beta_offset, permutation: order }
}
