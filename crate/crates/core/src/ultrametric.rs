//! Ultrametrics as leaves of level-weighted rooted trees.

use serde::{Deserialize, Serialize};

use crate::metric::{FiniteMetric, MetricError, MetricSpace};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UltrametricNode {
    pub parent: Option<usize>,
    /// 0 for leaves, otherwise the index `i` of the distance `L_i`.
    pub level: usize,
    pub children: Vec<usize>,
    pub point: Option<usize>,
}

/// Rooted tree whose leaves realize an ultrametric: two leaves whose lowest
/// common ancestor sits at level `i` are at distance `L_i`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UltrametricTree {
    nodes: Vec<UltrametricNode>,
    root: usize,
    /// `levels[i - 1] = L_i`, strictly increasing.
    levels: Vec<i64>,
    leaf_of: Vec<usize>,
    scale: i64,
}

/// Returns the first triple violating `d(x,z) <= max(d(x,y), d(y,z))`.
pub fn find_ultrametric_violation<M: MetricSpace + ?Sized>(m: &M) -> Option<(usize, usize, usize)> {
    let n = m.len();
    for x in 0..n {
        for y in 0..n {
            let dxy = m.dist(x, y);
            for z in 0..n {
                if m.dist(x, z) > dxy.max(m.dist(y, z)) {
                    return Some((x, y, z));
                }
            }
        }
    }
    None
}

impl UltrametricTree {
    /// Reconstructs the unique tree of an ultrametric. Levels are exactly the
    /// distinct non-zero distances; children are ordered by smallest point.
    pub fn from_metric<M: MetricSpace + ?Sized>(m: &M) -> Result<Self, MetricError> {
        let n = m.len();
        if n == 0 {
            return Err(MetricError::Empty);
        }
        if let Some((x, y, z)) = find_ultrametric_violation(m) {
            return Err(MetricError::NotUltrametric { x, y, z });
        }
        let mut levels: Vec<i64> =
            (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).map(|(i, j)| m.dist(i, j)).collect();
        levels.sort_unstable();
        levels.dedup();

        let mut tree =
            UltrametricTree { nodes: Vec::new(), root: 0, levels, leaf_of: vec![usize::MAX; n], scale: m.scale() };
        let all: Vec<usize> = (0..n).collect();
        tree.root = tree.build(m, &all, None);
        Ok(tree)
    }

    fn build<M: MetricSpace + ?Sized>(&mut self, m: &M, points: &[usize], parent: Option<usize>) -> usize {
        let id = self.nodes.len();
        if points.len() == 1 {
            self.nodes.push(UltrametricNode { parent, level: 0, children: Vec::new(), point: Some(points[0]) });
            self.leaf_of[points[0]] = id;
            return id;
        }
        let top = points
            .iter()
            .flat_map(|&x| points.iter().map(move |&y| (x, y)))
            .map(|(x, y)| m.dist(x, y))
            .max()
            .unwrap_or(0);
        let level = self.levels.binary_search(&top).expect("distance is a level") + 1;
        self.nodes.push(UltrametricNode { parent, level, children: Vec::new(), point: None });

        // Points closer than the top distance are equivalent in an ultrametric.
        let mut assigned = vec![false; points.len()];
        let mut classes = Vec::new();
        for a in 0..points.len() {
            if assigned[a] {
                continue;
            }
            let class: Vec<usize> =
                (a..points.len()).filter(|&b| !assigned[b] && m.dist(points[a], points[b]) < top).collect();
            for &b in &class {
                assigned[b] = true;
            }
            classes.push(class.into_iter().map(|b| points[b]).collect::<Vec<_>>());
        }
        for class in classes {
            let child = self.build(m, &class, Some(id));
            self.nodes[id].children.push(child);
        }
        id
    }

    pub fn nodes(&self) -> &[UltrametricNode] {
        &self.nodes
    }

    pub fn root(&self) -> usize {
        self.root
    }

    /// `L_1 < ... < L_k` (scaled).
    pub fn levels(&self) -> &[i64] {
        &self.levels
    }

    pub fn level_count(&self) -> usize {
        self.levels.len()
    }

    pub fn leaf(&self, point: usize) -> usize {
        self.leaf_of[point]
    }

    /// Level of the lowest common ancestor of two points (0 if equal).
    pub fn lca_level(&self, x: usize, y: usize) -> usize {
        let (mut a, mut b) = (self.leaf_of[x], self.leaf_of[y]);
        while a != b {
            let (la, lb) = (self.nodes[a].level, self.nodes[b].level);
            if la <= lb {
                a = self.nodes[a].parent.expect("non-root has a parent");
            }
            if lb <= la {
                b = self.nodes[b].parent.expect("non-root has a parent");
            }
        }
        self.nodes[a].level
    }

    /// `E_i`: the maximum number of children of any level-`i` vertex, for
    /// `i = 1..=k` (index `i - 1`).
    pub fn max_children_per_level(&self) -> Vec<usize> {
        let mut e = vec![0; self.levels.len()];
        for node in &self.nodes {
            if node.level > 0 {
                e[node.level - 1] = e[node.level - 1].max(node.children.len());
            }
        }
        e
    }

    pub fn to_metric(&self) -> FiniteMetric {
        FiniteMetric::materialize(self)
    }
}

impl MetricSpace for UltrametricTree {
    fn len(&self) -> usize {
        self.leaf_of.len()
    }

    fn dist(&self, i: usize, j: usize) -> i64 {
        match self.lca_level(i, j) {
            0 => 0,
            l => self.levels[l - 1],
        }
    }

    fn scale(&self) -> i64 {
        self.scale
    }
}
