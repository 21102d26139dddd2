use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::homogenize::{ExtendedSpace, ExtensionSpace, Family, HomogenizeError};
use crate::metric::{FiniteMetric, MetricError, MetricSpace};

/// Largest cube whose norm table is precomputed (`n ≤ 16`).
pub const SWAP_TABLE_MAX_POINTS: usize = 1 << 15;

const MAX_BASE_POINTS: usize = 40;

pub fn swap_extension_size(n: usize) -> u128 {
    1u128 << n.saturating_sub(1)
}

/// `F₂^{n-1}` with the translation-invariant metric `d̂(x, y) = ‖x + y‖`.
///
/// Base point `p_i` (0-based) sits at the vector with its lowest `i` bits
/// set, so `φ(p_i) + φ(p_j)` is the run of bits `i..j`. The norm of `v` is
/// the cheapest way to write `v` as a sum of such runs, each costing the
/// corresponding base distance.
#[derive(Clone, Debug)]
pub struct SwapCube {
    base: FiniteMetric,
    bits: usize,
    norms: Option<Vec<i64>>,
}

impl SwapCube {
    pub fn new(base: &FiniteMetric) -> Result<Self, HomogenizeError> {
        let n = base.len();
        if n == 0 {
            return Err(MetricError::Empty.into());
        }
        if n > MAX_BASE_POINTS {
            return Err(HomogenizeError::TooLarge {
                size: swap_extension_size(n),
                limit: swap_extension_size(MAX_BASE_POINTS),
            });
        }
        let mut cube = SwapCube { base: base.clone(), bits: n - 1, norms: None };
        if cube.len() <= SWAP_TABLE_MAX_POINTS {
            cube.norms = Some(cube.dijkstra_norms());
        }
        Ok(cube)
    }

    pub fn base(&self) -> &FiniteMetric {
        &self.base
    }

    pub fn dimension(&self) -> usize {
        self.bits
    }

    pub fn is_tabulated(&self) -> bool {
        self.norms.is_some()
    }

    /// `φ(p_i)`.
    pub fn embed(i: usize) -> usize {
        (1usize << i) - 1
    }

    /// `φ(p_i) + φ(p_j)`, the generator carrying weight `d(p_i, p_j)`.
    pub fn generator(i: usize, j: usize) -> usize {
        Self::embed(i) ^ Self::embed(j)
    }

    pub fn norm(&self, v: usize) -> i64 {
        match &self.norms {
            Some(t) => t[v],
            None => self.matching_norm(v),
        }
    }

    /// Single-source shortest paths from `0` in the Cayley graph.
    fn dijkstra_norms(&self) -> Vec<i64> {
        let n = self.base.len();
        let gens: Vec<(usize, i64)> = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .map(|(i, j)| (Self::generator(i, j), self.base.dist(i, j)))
            .collect();
        let size = self.len();
        let mut dist = vec![i64::MAX; size];
        let mut heap = BinaryHeap::new();
        dist[0] = 0;
        heap.push(Reverse((0i64, 0usize)));
        while let Some(Reverse((d, v))) = heap.pop() {
            if d > dist[v] {
                continue;
            }
            for &(g, w) in &gens {
                let u = v ^ g;
                if d + w < dist[u] {
                    dist[u] = d + w;
                    heap.push(Reverse((d + w, u)));
                }
            }
        }
        dist
    }

    /// Positions `k ∈ 0..n` where bit `k-1` and bit `k` of `v` differ, with
    /// both ends padded by zeros.
    fn boundary(&self, v: usize) -> Vec<usize> {
        (0..=self.bits)
            .filter(|&k| {
                let below = k > 0 && (v >> (k - 1)) & 1 == 1;
                let here = k < self.bits && (v >> k) & 1 == 1;
                below != here
            })
            .collect()
    }

    /// The norm computed on demand: a sum of runs has odd-degree endpoints
    /// exactly at the boundary of `v`, and in a metric the cheapest such
    /// edge set is a minimum-weight perfect matching of the boundary.
    pub fn matching_norm(&self, v: usize) -> i64 {
        let b = self.boundary(v);
        let m = b.len();
        if m == 0 {
            return 0;
        }
        let full = (1usize << m) - 1;
        let mut dp = vec![i64::MAX; 1 << m];
        dp[0] = 0;
        for mask in 0..full {
            if dp[mask] == i64::MAX {
                continue;
            }
            let i = (!mask).trailing_zeros() as usize;
            for j in i + 1..m {
                if mask & (1 << j) == 0 {
                    let next = mask | (1 << i) | (1 << j);
                    let cost = dp[mask] + self.base.dist(b[i], b[j]);
                    if cost < dp[next] {
                        dp[next] = cost;
                    }
                }
            }
        }
        dp[full]
    }
}

impl MetricSpace for SwapCube {
    fn len(&self) -> usize {
        1 << self.bits
    }

    fn dist(&self, i: usize, j: usize) -> i64 {
        self.norm(i ^ j)
    }

    fn scale(&self) -> i64 {
        self.base.scale()
    }
}

impl ExtensionSpace for SwapCube {
    fn point_label(&self, i: usize) -> String {
        if self.bits == 0 {
            return "()".into();
        }
        (0..self.bits).map(|k| if (i >> k) & 1 == 1 { '1' } else { '0' }).collect()
    }

    fn automorphism_hint(&self, pairs: &[(usize, usize)]) -> Option<Vec<usize>> {
        let &(x0, y0) = pairs.first()?;
        let v = x0 ^ y0;
        if pairs.iter().any(|&(x, y)| x ^ v != y) {
            return None;
        }
        Some((0..self.len()).map(|x| x ^ v).collect())
    }
}

/// The swap extension of `m`: every swap `p_i ↔ p_j` extends to the
/// translation by `φ(p_i) + φ(p_j)`.
pub fn build_swap_extension(m: &FiniteMetric) -> Result<ExtendedSpace<SwapCube>, HomogenizeError> {
    let cube = SwapCube::new(m)?;
    let ext = ExtendedSpace {
        base: m.clone(),
        embedding: (0..m.len()).map(SwapCube::embed).collect(),
        extension: cube,
        family: Family::Swaps,
        base_coordinates: None,
        certificate: None,
    };
    if let Some((i, j)) = ext.embedding_mismatch() {
        return Err(MetricError::ClosureShrinksDefinedEntry { i, j }.into());
    }
    Ok(ext)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn metric(rows: &[Vec<i64>]) -> FiniteMetric {
        FiniteMetric::from_scaled(None, rows, 1).unwrap()
    }

    #[test]
    fn two_points() {
        let e = build_swap_extension(&metric(&[vec![0, 1], vec![1, 0]])).unwrap();
        assert_eq!(e.size(), 2);
        assert_eq!(e.extension.dist(0, 1), 1);
    }

    #[test]
    fn equilateral_triangle() {
        let e = build_swap_extension(&metric(&[vec![0, 1, 1], vec![1, 0, 1], vec![1, 1, 0]])).unwrap();
        assert_eq!(e.size(), 4);
        for x in 0..4 {
            for y in 0..4 {
                assert_eq!(e.extension.dist(x, y), if x == y { 0 } else { 1 });
            }
        }
    }

    #[test]
    fn swap_of_outer_points_is_a_translation() {
        let e = build_swap_extension(&metric(&[vec![0, 1, 2], vec![1, 0, 2], vec![2, 2, 0]])).unwrap();
        assert_eq!(e.embedding, vec![0b00, 0b01, 0b11]);
        let v = e.embedding[0] ^ e.embedding[2];
        assert_eq!(v, 0b11);
        for x in 0..4 {
            for y in 0..4 {
                assert_eq!(e.extension.dist(x ^ v, y ^ v), e.extension.dist(x, y));
            }
        }
    }

    #[test]
    fn table_matches_matching() {
        let m = FiniteMetric::from_fn(6, 1, |i, j| if i == j { 0 } else { 3 + ((i * 7 + j * 7) % 4) as i64 }).unwrap();
        let cube = SwapCube::new(&m).unwrap();
        assert!(cube.is_tabulated());
        for v in 0..cube.len() {
            assert_eq!(cube.norm(v), cube.matching_norm(v), "v = {v:b}");
        }
    }

    #[test]
    fn one_point() {
        let e = build_swap_extension(&metric(&[vec![0]])).unwrap();
        assert_eq!(e.size(), 1);
    }
}
