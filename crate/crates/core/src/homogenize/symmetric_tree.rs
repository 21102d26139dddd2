use crate::homogenize::{ExtendedSpace, ExtensionSpace, Family, HomogenizeError};
use crate::metric::MetricSpace;
use crate::ultrametric::UltrametricTree;

/// Leaves of a tree in which every level-`i` vertex has `E_i` children.
///
/// A leaf is a mixed-radix number whose digit `i` (1-based, least
/// significant first) is the child index taken at level `i`; two leaves are
/// at distance `L_i` where `i` is their most significant differing digit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymmetricTreeMetric {
    branching: Vec<usize>,
    levels: Vec<i64>,
    /// `strides[i] = E_1 ⋯ E_i`.
    strides: Vec<usize>,
    scale: i64,
}

impl SymmetricTreeMetric {
    pub fn new(branching: Vec<usize>, levels: Vec<i64>, scale: i64) -> Result<Self, HomogenizeError> {
        if branching.len() != levels.len() {
            return Err(HomogenizeError::InvalidParameters(format!(
                "{} branching factors for {} levels",
                branching.len(),
                levels.len()
            )));
        }
        if branching.contains(&0) || levels.windows(2).any(|w| w[0] >= w[1]) || levels.first().is_some_and(|&l| l <= 0)
        {
            return Err(HomogenizeError::InvalidParameters("branching must be positive and levels increasing".into()));
        }
        let mut strides = vec![1usize];
        for &e in &branching {
            let last = *strides.last().unwrap();
            strides.push(
                last.checked_mul(e).ok_or(HomogenizeError::TooLarge { size: u128::MAX, limit: usize::MAX as u128 })?,
            );
        }
        Ok(SymmetricTreeMetric { branching, levels, strides, scale })
    }

    /// `E_1, …, E_k`.
    pub fn branching(&self) -> &[usize] {
        &self.branching
    }

    pub fn levels(&self) -> &[i64] {
        &self.levels
    }

    /// Digit at level `i` (1-based).
    pub fn digit(&self, leaf: usize, i: usize) -> usize {
        (leaf / self.strides[i - 1]) % self.branching[i - 1]
    }

    pub fn leaf_from_digits(&self, digits: &[usize]) -> usize {
        digits.iter().zip(&self.strides).map(|(d, s)| d * s).sum()
    }

    /// Level of the lowest common ancestor (0 for equal leaves).
    pub fn lca_level(&self, x: usize, y: usize) -> usize {
        (1..=self.levels.len()).rev().find(|&i| self.digit(x, i) != self.digit(y, i)).unwrap_or(0)
    }
}

impl MetricSpace for SymmetricTreeMetric {
    fn len(&self) -> usize {
        *self.strides.last().unwrap()
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

impl ExtensionSpace for SymmetricTreeMetric {
    fn point_label(&self, i: usize) -> String {
        if self.levels.is_empty() {
            return "()".into();
        }
        (1..=self.levels.len()).rev().map(|l| self.digit(i, l).to_string()).collect::<Vec<_>>().join(".")
    }
}

/// `(a+1)^b · a^{k-b}` with `a = ⌊(n+k-1)/k⌋`, `b = (n-1) mod k`: the size of
/// the symmetric extension of the worst `n`-point ultrametric with `k`
/// distinct distances.
pub fn symmetric_tree_size_bound(n: usize, k: usize) -> u128 {
    if k == 0 {
        return 1;
    }
    let a = n.div_ceil(k) as u128;
    let b = ((n - 1) % k) as u32;
    (a + 1).pow(b) * a.pow(k as u32 - b)
}

/// Completes `u` to the fully symmetric tree with `E_i` children at every
/// level-`i` vertex. Base points keep their child indices; levels skipped by
/// the original tree take digit 0.
pub fn build_symmetric_tree_extension(
    u: &UltrametricTree,
) -> Result<ExtendedSpace<SymmetricTreeMetric>, HomogenizeError> {
    let metric = SymmetricTreeMetric::new(u.max_children_per_level(), u.levels().to_vec(), u.scale())?;
    let k = u.level_count();
    let nodes = u.nodes();
    let mut embedding = vec![0; u.len()];
    let mut stack = vec![(u.root(), vec![0usize; k])];
    while let Some((id, digits)) = stack.pop() {
        let node = &nodes[id];
        if let Some(p) = node.point {
            embedding[p] = metric.leaf_from_digits(&digits);
            continue;
        }
        for (c, &child) in node.children.iter().enumerate() {
            let mut d = digits.clone();
            d[node.level - 1] = c;
            stack.push((child, d));
        }
    }
    Ok(ExtendedSpace {
        base: u.to_metric(),
        extension: metric,
        embedding,
        family: Family::All,
        base_coordinates: None,
        certificate: None,
    })
}
