use crate::ktaxi::KtaxiError;
use crate::metric::{common_scale, to_scaled, FiniteMetric, Rational};

/// A rooted tree with positive edge weights; `w_v` is the edge from `v` to
/// its parent. Leaves are the non-root vertices without children.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeMetric {
    parent: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
    weights: Vec<Rational>,
    scaled: Vec<i64>,
    scale: i64,
    root: usize,
    vertices: Vec<usize>,
    coordinate: Vec<Option<usize>>,
    leaves: Vec<usize>,
    labels: Vec<String>,
}

impl TreeMetric {
    /// `parent[v]` is `None` for the root only; `weights[root]` is ignored.
    pub fn new(
        parent: Vec<Option<usize>>,
        weights: Vec<Rational>,
        labels: Option<Vec<String>>,
    ) -> Result<Self, KtaxiError> {
        let n = parent.len();
        if weights.len() != n {
            return Err(KtaxiError::InvalidTree(format!("{} weights for {n} vertices", weights.len())));
        }
        let roots: Vec<usize> = (0..n).filter(|&v| parent[v].is_none()).collect();
        let [root] = roots[..] else {
            return Err(KtaxiError::InvalidTree(format!("expected exactly one root, found {}", roots.len())));
        };
        let mut children = vec![Vec::new(); n];
        for (v, p) in parent.iter().enumerate() {
            if let Some(p) = *p {
                if p >= n {
                    return Err(KtaxiError::InvalidTree(format!("parent {p} of {v} out of range")));
                }
                if weights[v] <= Rational::from_integer(0) {
                    return Err(KtaxiError::InvalidTree(format!("edge above {v} has non-positive weight")));
                }
                children[p].push(v);
            }
        }
        // Every vertex must reach the root.
        let mut seen = vec![false; n];
        let mut stack = vec![root];
        while let Some(v) = stack.pop() {
            seen[v] = true;
            stack.extend(&children[v]);
        }
        if let Some(v) = seen.iter().position(|s| !s) {
            return Err(KtaxiError::InvalidTree(format!("vertex {v} lies on a cycle")));
        }
        let labels = match labels {
            Some(l) if l.len() != n => {
                return Err(KtaxiError::InvalidTree(format!("{} labels for {n} vertices", l.len())));
            }
            Some(l) => l,
            None => (0..n).map(|v| format!("v{v}")).collect(),
        };
        let vertices: Vec<usize> = (0..n).filter(|&v| v != root).collect();
        let mut coordinate = vec![None; n];
        for (c, &v) in vertices.iter().enumerate() {
            coordinate[v] = Some(c);
        }
        let leaves = vertices.iter().copied().filter(|&v| children[v].is_empty()).collect();
        let edge_weights: Vec<Rational> = vertices.iter().map(|&v| weights[v]).collect();
        let scale = common_scale(&edge_weights)?;
        let mut scaled = vec![0i64; n];
        for &v in &vertices {
            scaled[v] = to_scaled(&weights[v], scale)?;
        }
        Ok(TreeMetric { parent, children, weights, scaled, scale, root, vertices, coordinate, leaves, labels })
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        self.parent[v]
    }

    pub fn children(&self, v: usize) -> &[usize] {
        &self.children[v]
    }

    /// Non-root vertices; their order fixes the configuration coordinates.
    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    pub fn coordinate(&self, v: usize) -> Option<usize> {
        self.coordinate[v]
    }

    pub fn leaves(&self) -> &[usize] {
        &self.leaves
    }

    pub fn is_leaf(&self, v: usize) -> bool {
        v < self.len() && v != self.root && self.children[v].is_empty()
    }

    pub fn label(&self, v: usize) -> &str {
        &self.labels[v]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn scale(&self) -> i64 {
        self.scale
    }

    /// Edge weight above `v`.
    pub fn weight(&self, v: usize) -> Rational {
        self.weights[v]
    }

    /// Edge weights in coordinate order.
    pub fn weights(&self) -> Vec<Rational> {
        self.vertices.iter().map(|&v| self.weights[v]).collect()
    }

    /// Scaled edge weights in coordinate order.
    pub fn scaled_weights(&self) -> impl Iterator<Item = &i64> + '_ {
        self.vertices.iter().map(|&v| &self.scaled[v])
    }

    /// `v` and its ancestors, excluding the root.
    pub fn ancestors(&self, v: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut cur = v;
        while let Some(p) = self.parent[cur] {
            out.push(cur);
            cur = p;
        }
        out
    }

    pub fn scaled_distance(&self, u: usize, v: usize) -> i64 {
        let au = self.ancestors(u);
        let av = self.ancestors(v);
        let common = au.iter().rev().zip(av.iter().rev()).take_while(|(a, b)| a == b).count();
        let sum = |a: &[usize]| a[..a.len() - common].iter().map(|&x| self.scaled[x]).sum::<i64>();
        sum(&au) + sum(&av)
    }

    pub fn distance(&self, u: usize, v: usize) -> Rational {
        Rational::new(self.scaled_distance(u, v), self.scale)
    }

    /// Path metric restricted to the leaves, in [`leaves`](Self::leaves) order.
    pub fn leaf_metric(&self) -> Result<FiniteMetric, KtaxiError> {
        let l = &self.leaves;
        let m = FiniteMetric::from_fn(l.len(), self.scale, |i, j| self.scaled_distance(l[i], l[j]))?;
        Ok(m.with_labels(l.iter().map(|&v| self.labels[v].clone()).collect())?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::MetricSpace;

    fn r(x: i64) -> Rational {
        Rational::from_integer(x)
    }

    #[test]
    fn path_distances() {
        let t = TreeMetric::new(
            vec![None, Some(0), Some(1), Some(1), Some(0)],
            vec![r(0), r(2), Rational::new(1, 2), r(1), r(3)],
            None,
        )
        .unwrap();
        assert_eq!(t.scale(), 2);
        assert_eq!(t.leaves(), &[2, 3, 4]);
        assert_eq!(t.distance(2, 3), Rational::new(3, 2));
        assert_eq!(t.distance(2, 4), Rational::new(11, 2));
        assert_eq!(t.distance(4, 4), r(0));
        let m = t.leaf_metric().unwrap();
        assert_eq!(m.dist(0, 2), 11);
        assert!(m.validate().is_ok());
    }

    #[test]
    fn rejects_bad_trees() {
        assert!(TreeMetric::new(vec![None, None], vec![r(0), r(1)], None).is_err());
        assert!(TreeMetric::new(vec![None, Some(2), Some(1)], vec![r(0), r(1), r(1)], None).is_err());
        assert!(TreeMetric::new(vec![None, Some(0)], vec![r(0), r(0)], None).is_err());
        assert!(TreeMetric::new(vec![None, Some(5)], vec![r(0), r(1)], None).is_err());
    }
}
