use serde::{Deserialize, Serialize};

use crate::metric::MetricSpace;
use crate::transform::Transformation;

/// Values `w: M -> Z>=0` on the scaled grid of the ambient metric.
///
/// Work functions produced by the engine are 1-Lipschitz; this type does
/// not enforce it, see [`WorkFunction::lipschitz_violation`].
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WorkFunction {
    values: Vec<i64>,
}

impl WorkFunction {
    pub fn from_values(values: Vec<i64>) -> Self {
        WorkFunction { values }
    }

    /// `w_0(p) = d(start, p)`.
    pub fn initial<M: MetricSpace + ?Sized>(m: &M, start: usize) -> Self {
        WorkFunction { values: (0..m.len()).map(|p| m.dist(start, p)).collect() }
    }

    pub fn values(&self) -> &[i64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, p: usize) -> i64 {
        self.values[p]
    }

    pub fn min(&self) -> i64 {
        self.values.iter().copied().min().unwrap_or(0)
    }

    /// `Φ(w) = Σ_p w(p)`.
    pub fn potential_sum(&self) -> i64 {
        self.values.iter().sum()
    }

    /// Cost of serving the next request by first moving into `domain`:
    /// `w⁻(p) = min_{a ∈ A} w(a) + d(a, p)`. `None` for an empty domain.
    pub fn pre_update<M: MetricSpace + ?Sized>(&self, m: &M, domain: &[usize]) -> Option<Self> {
        if domain.is_empty() {
            return None;
        }
        let values =
            (0..m.len()).map(|p| domain.iter().map(|&a| self.values[a] + m.dist(a, p)).min().unwrap()).collect();
        Some(WorkFunction { values })
    }

    /// Applies the transformation to `w⁻`:
    /// `w_t(p) = min_{a ∈ A} w⁻(a) + d(f(a), p)`.
    pub fn post_update<M: MetricSpace + ?Sized>(&self, m: &M, t: &Transformation) -> Self {
        if t.is_identity() {
            return self.clone();
        }
        let values =
            (0..m.len()).map(|p| t.pairs().map(|(a, fa)| self.values[a] + m.dist(fa, p)).min().unwrap()).collect();
        WorkFunction { values }
    }

    /// The minimal set `S` with `w(x) = min_{s ∈ S} w(s) + d(s, x)` for all `x`.
    ///
    /// A point belongs to `S` exactly when no other point explains its value;
    /// following explaining points strictly decreases `w`, so the rest is
    /// covered.
    pub fn support<M: MetricSpace + ?Sized>(&self, m: &M) -> Vec<usize> {
        let n = self.values.len();
        (0..n).filter(|&x| (0..n).all(|y| y == x || self.values[y] + m.dist(y, x) > self.values[x])).collect()
    }

    /// First pair breaking `|w(x) - w(y)| <= d(x, y)`, or a negative value
    /// reported as `(x, x)`.
    pub fn lipschitz_violation<M: MetricSpace + ?Sized>(&self, m: &M) -> Option<(usize, usize)> {
        let n = self.values.len();
        for x in 0..n {
            if self.values[x] < 0 {
                return Some((x, x));
            }
            for y in x + 1..n {
                if (self.values[x] - self.values[y]).abs() > m.dist(x, y) {
                    return Some((x, y));
                }
            }
        }
        None
    }

    /// `w - c` pointwise.
    pub fn shifted(&self, c: i64) -> Self {
        WorkFunction { values: self.values.iter().map(|v| v - c).collect() }
    }
}
