//! Finite metric spaces stored on an exact integer grid.
//!
//! All inputs are rationals. At ingestion a common denominator (`scale`) is
//! chosen and every distance is stored as `value * scale`, so validation,
//! level grouping and work-function comparisons are plain integer comparisons.

use num_integer::Integer;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Rational = Ratio<i64>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MetricError {
    #[error("metric has no points")]
    Empty,
    #[error("distance matrix row {row} has {len} entries, expected {expected}")]
    NotSquare { row: usize, len: usize, expected: usize },
    #[error("{labels} labels given for {points} points")]
    LabelCount { labels: usize, points: usize },
    #[error("duplicate point label {0:?}")]
    DuplicateLabel(String),
    #[error("d({i},{j}) differs from d({j},{i})")]
    Asymmetry { i: usize, j: usize },
    #[error("d({i},{j}) is negative")]
    NegativeDistance { i: usize, j: usize },
    #[error("d({i},{j}) is zero for distinct points")]
    ZeroOffDiagonal { i: usize, j: usize },
    #[error("d({i},{i}) is not zero")]
    NonZeroDiagonal { i: usize },
    #[error("triangle inequality violated: d({i},{k}) > d({i},{j}) + d({j},{k})")]
    TriangleViolation { i: usize, j: usize, k: usize },
    #[error("ultrametric inequality violated: d({x},{z}) > max(d({x},{y}), d({y},{z}))")]
    NotUltrametric { x: usize, y: usize, z: usize },
    #[error("scaled distances overflow 64-bit integers")]
    Overflow,
    #[error("graph of defined distances is disconnected")]
    DisconnectedGraph,
    #[error("shortest path between {i} and {j} is shorter than the defined distance")]
    ClosureShrinksDefinedEntry { i: usize, j: usize },
    #[error("point index {index} out of range for {len} points")]
    IndexOutOfRange { index: usize, len: usize },
}

/// A finite metric space with distances on an integer grid.
///
/// `dist(i, j) / scale()` is the true (rational) distance.
pub trait MetricSpace {
    fn len(&self) -> usize;

    /// Scaled integer distance between points `i` and `j`.
    fn dist(&self, i: usize, j: usize) -> i64;

    fn scale(&self) -> i64;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn rational_dist(&self, i: usize, j: usize) -> Rational {
        Ratio::new(self.dist(i, j), self.scale())
    }

    fn diameter(&self) -> i64 {
        let n = self.len();
        let mut best = 0;
        for i in 0..n {
            for j in i + 1..n {
                best = best.max(self.dist(i, j));
            }
        }
        best
    }
}

impl<T: MetricSpace + ?Sized> MetricSpace for &T {
    fn len(&self) -> usize {
        (**self).len()
    }
    fn dist(&self, i: usize, j: usize) -> i64 {
        (**self).dist(i, j)
    }
    fn scale(&self) -> i64 {
        (**self).scale()
    }
}

/// Dense finite metric with point labels.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiniteMetric {
    labels: Vec<String>,
    n: usize,
    dist: Vec<i64>,
    scale: i64,
}

impl MetricSpace for FiniteMetric {
    fn len(&self) -> usize {
        self.n
    }

    #[inline]
    fn dist(&self, i: usize, j: usize) -> i64 {
        self.dist[i * self.n + j]
    }

    fn scale(&self) -> i64 {
        self.scale
    }
}

/// Least common multiple of the denominators, i.e. the smallest grid that
/// represents every value exactly.
pub fn common_scale<'a>(values: impl IntoIterator<Item = &'a Rational>) -> Result<i64, MetricError> {
    let mut scale: i64 = 1;
    for v in values {
        let den = *v.denom();
        let g = scale.gcd(&den);
        scale = (scale / g).checked_mul(den).ok_or(MetricError::Overflow)?;
    }
    Ok(scale)
}

/// `value * scale` as an integer; `scale` must be a multiple of the denominator.
pub fn to_scaled(value: &Rational, scale: i64) -> Result<i64, MetricError> {
    let factor = scale / value.denom();
    value.numer().checked_mul(factor).ok_or(MetricError::Overflow)
}

fn default_labels(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("p{i}")).collect()
}

impl FiniteMetric {
    /// Builds and validates a metric from scaled integer rows.
    pub fn from_scaled(labels: Option<Vec<String>>, rows: &[Vec<i64>], scale: i64) -> Result<Self, MetricError> {
        let n = rows.len();
        if n == 0 {
            return Err(MetricError::Empty);
        }
        for (row, r) in rows.iter().enumerate() {
            if r.len() != n {
                return Err(MetricError::NotSquare { row, len: r.len(), expected: n });
            }
        }
        let labels = match labels {
            Some(l) if l.len() != n => return Err(MetricError::LabelCount { labels: l.len(), points: n }),
            Some(l) => l,
            None => default_labels(n),
        };
        let metric = FiniteMetric { labels, n, dist: rows.iter().flatten().copied().collect(), scale };
        metric.validate()?;
        Ok(metric)
    }

    /// Builds a metric from a distance function on `0..n`, validating it.
    pub fn from_fn(n: usize, scale: i64, f: impl Fn(usize, usize) -> i64) -> Result<Self, MetricError> {
        let rows: Vec<Vec<i64>> = (0..n).map(|i| (0..n).map(|j| f(i, j)).collect()).collect();
        Self::from_scaled(None, &rows, scale)
    }

    /// Points on the real line with distance `|x - y|`.
    pub fn on_line(points: &[Rational]) -> Result<Self, MetricError> {
        let scale = common_scale(points)?;
        let xs: Vec<i64> = points.iter().map(|p| to_scaled(p, scale)).collect::<Result<_, _>>()?;
        let labels = points.iter().map(|p| p.to_string()).collect();
        let rows: Vec<Vec<i64>> = xs.iter().map(|a| xs.iter().map(|b| (a - b).abs()).collect()).collect();
        Self::from_scaled(Some(labels), &rows, scale)
    }

    /// Copies any metric space into dense storage without re-validating it.
    pub fn materialize<M: MetricSpace + ?Sized>(space: &M) -> Self {
        let n = space.len();
        let mut dist = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                dist.push(space.dist(i, j));
            }
        }
        FiniteMetric { labels: default_labels(n), n, dist, scale: space.scale() }
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self, MetricError> {
        if labels.len() != self.n {
            return Err(MetricError::LabelCount { labels: labels.len(), points: self.n });
        }
        self.labels = labels;
        Ok(self)
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn row(&self, i: usize) -> &[i64] {
        &self.dist[i * self.n..(i + 1) * self.n]
    }

    /// Checks every metric axiom exactly.
    pub fn validate(&self) -> Result<(), MetricError> {
        validate_axioms(self)?;
        let mut seen = std::collections::HashSet::new();
        for l in &self.labels {
            if !seen.insert(l.as_str()) {
                return Err(MetricError::DuplicateLabel(l.clone()));
            }
        }
        Ok(())
    }

    /// The sub-metric on `points` (in the given order).
    pub fn restrict(&self, points: &[usize]) -> FiniteMetric {
        let n = points.len();
        let mut dist = Vec::with_capacity(n * n);
        for &i in points {
            for &j in points {
                dist.push(self.dist(i, j));
            }
        }
        FiniteMetric { labels: points.iter().map(|&i| self.labels[i].clone()).collect(), n, dist, scale: self.scale }
    }
}

/// Checks symmetry, positivity and the triangle inequality for any space.
pub fn validate_axioms<M: MetricSpace + ?Sized>(m: &M) -> Result<(), MetricError> {
    let n = m.len();
    if n == 0 {
        return Err(MetricError::Empty);
    }
    for i in 0..n {
        if m.dist(i, i) != 0 {
            return Err(MetricError::NonZeroDiagonal { i });
        }
        for j in 0..n {
            let d = m.dist(i, j);
            if d < 0 {
                return Err(MetricError::NegativeDistance { i, j });
            }
            if d != m.dist(j, i) {
                return Err(MetricError::Asymmetry { i: i.min(j), j: i.max(j) });
            }
            if i != j && d == 0 {
                return Err(MetricError::ZeroOffDiagonal { i: i.min(j), j: i.max(j) });
            }
        }
    }
    for j in 0..n {
        for i in 0..n {
            let dij = m.dist(i, j);
            for k in 0..n {
                if m.dist(i, k) > dij + m.dist(j, k) {
                    return Err(MetricError::TriangleViolation { i, j, k });
                }
            }
        }
    }
    Ok(())
}

/// Validates a square matrix of rationals as a metric.
pub fn validate_metric(labels: Option<Vec<String>>, rows: &[Vec<Rational>]) -> Result<FiniteMetric, MetricError> {
    let scale = common_scale(rows.iter().flatten())?;
    let scaled: Vec<Vec<i64>> = rows
        .iter()
        .map(|r| r.iter().map(|v| to_scaled(v, scale)).collect::<Result<Vec<_>, _>>())
        .collect::<Result<_, _>>()?;
    FiniteMetric::from_scaled(labels, &scaled, scale)
}

/// All-pairs shortest paths over a partially specified symmetric matrix.
///
/// `None` entries are missing. The result must agree with every defined
/// entry; a defined entry that a shorter path undercuts is reported as
/// [`MetricError::ClosureShrinksDefinedEntry`].
pub fn shortest_path_closure(
    labels: Option<Vec<String>>,
    partial: &[Vec<Option<Rational>>],
) -> Result<FiniteMetric, MetricError> {
    let n = partial.len();
    if n == 0 {
        return Err(MetricError::Empty);
    }
    for (row, r) in partial.iter().enumerate() {
        if r.len() != n {
            return Err(MetricError::NotSquare { row, len: r.len(), expected: n });
        }
    }
    let scale = common_scale(partial.iter().flatten().flatten())?;
    let mut edges = Vec::new();
    for i in 0..n {
        for j in 0..n {
            match (&partial[i][j], &partial[j][i]) {
                (Some(a), Some(b)) if a != b => return Err(MetricError::Asymmetry { i: i.min(j), j: i.max(j) }),
                (Some(_), None) | (None, Some(_)) => return Err(MetricError::Asymmetry { i: i.min(j), j: i.max(j) }),
                _ => {}
            }
            if let Some(v) = &partial[i][j] {
                if *v < Rational::from_integer(0) {
                    return Err(MetricError::NegativeDistance { i, j });
                }
                if i == j {
                    if *v != Rational::from_integer(0) {
                        return Err(MetricError::NonZeroDiagonal { i });
                    }
                } else if i < j {
                    edges.push((i, j, to_scaled(v, scale)?));
                }
            }
        }
    }
    let metric = closure_scaled(n, scale, &edges)?;
    match labels {
        Some(l) => metric.with_labels(l),
        None => Ok(metric),
    }
}

/// Floyd-Warshall closure of an undirected weighted edge list on `0..n`.
pub(crate) fn closure_scaled(n: usize, scale: i64, edges: &[(usize, usize, i64)]) -> Result<FiniteMetric, MetricError> {
    const INF: i64 = i64::MAX / 4;
    let mut d = vec![INF; n * n];
    for i in 0..n {
        d[i * n + i] = 0;
    }
    for &(i, j, w) in edges {
        if i >= n || j >= n {
            return Err(MetricError::IndexOutOfRange { index: i.max(j), len: n });
        }
        if i == j {
            continue;
        }
        let cur = d[i * n + j];
        let w = cur.min(w);
        d[i * n + j] = w;
        d[j * n + i] = w;
    }
    for k in 0..n {
        for i in 0..n {
            let dik = d[i * n + k];
            if dik >= INF {
                continue;
            }
            for j in 0..n {
                let cand = dik + d[k * n + j];
                if cand < d[i * n + j] {
                    d[i * n + j] = cand;
                }
            }
        }
    }
    if d.iter().any(|&v| v >= INF) {
        return Err(MetricError::DisconnectedGraph);
    }
    for &(i, j, w) in edges {
        if i != j && d[i * n + j] < w {
            return Err(MetricError::ClosureShrinksDefinedEntry { i: i.min(j), j: i.max(j) });
        }
    }
    let rows: Vec<Vec<i64>> = d.chunks(n).map(|c| c.to_vec()).collect();
    FiniteMetric::from_scaled(None, &rows, scale)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64) -> Rational {
        Rational::from_integer(n)
    }

    fn int_rows(rows: &[&[i64]]) -> Vec<Vec<Rational>> {
        rows.iter().map(|row| row.iter().map(|&v| r(v)).collect()).collect()
    }

    #[test]
    fn single_point_is_valid() {
        let m = validate_metric(None, &int_rows(&[&[0]])).unwrap();
        assert_eq!(m.len(), 1);
        assert_eq!(m.diameter(), 0);
    }

    #[test]
    fn line_points_form_a_metric() {
        let m = FiniteMetric::on_line(&[r(0), r(1), r(3), r(9)]).unwrap();
        assert_eq!(m.dist(0, 3), 9);
        assert_eq!(m.dist(1, 2), 2);
        assert_eq!(m.scale(), 1);
    }

    #[test]
    fn rationals_share_a_common_grid() {
        let rows = vec![
            vec![r(0), Rational::new(1, 2), Rational::new(5, 6)],
            vec![Rational::new(1, 2), r(0), Rational::new(1, 3)],
            vec![Rational::new(5, 6), Rational::new(1, 3), r(0)],
        ];
        let m = validate_metric(None, &rows).unwrap();
        assert_eq!(m.scale(), 6);
        assert_eq!(m.dist(0, 2), 5);
        assert_eq!(m.rational_dist(0, 1), Rational::new(1, 2));
    }

    #[test]
    fn triangle_violation_is_named() {
        let rows = int_rows(&[&[0, 1, 10], &[1, 0, 1], &[10, 1, 0]]);
        let err = validate_metric(None, &rows).unwrap_err();
        assert_eq!(err, MetricError::TriangleViolation { i: 0, j: 1, k: 2 });
    }

    #[test]
    fn axiom_errors() {
        let asym = int_rows(&[&[0, 1], &[2, 0]]);
        assert_eq!(validate_metric(None, &asym).unwrap_err(), MetricError::Asymmetry { i: 0, j: 1 });
        let neg = int_rows(&[&[0, -1], &[-1, 0]]);
        assert_eq!(validate_metric(None, &neg).unwrap_err(), MetricError::NegativeDistance { i: 0, j: 1 });
        let zero = int_rows(&[&[0, 0], &[0, 0]]);
        assert_eq!(validate_metric(None, &zero).unwrap_err(), MetricError::ZeroOffDiagonal { i: 0, j: 1 });
        let ragged = vec![vec![r(0), r(1)], vec![r(1)]];
        assert!(matches!(validate_metric(None, &ragged), Err(MetricError::NotSquare { .. })));
    }

    #[test]
    fn closure_of_complete_metric_is_identity() {
        let m = FiniteMetric::on_line(&[r(0), r(1), r(3)]).unwrap();
        let partial: Vec<Vec<Option<Rational>>> =
            (0..3).map(|i| (0..3).map(|j| Some(m.rational_dist(i, j))).collect()).collect();
        let c = shortest_path_closure(None, &partial).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(c.dist(i, j), m.dist(i, j));
            }
        }
    }

    #[test]
    fn closure_fills_path_graph() {
        let p = vec![
            vec![Some(r(0)), Some(r(1)), None],
            vec![Some(r(1)), Some(r(0)), Some(r(1))],
            vec![None, Some(r(1)), Some(r(0))],
        ];
        assert_eq!(shortest_path_closure(None, &p).unwrap().dist(0, 2), 2);
    }

    #[test]
    fn closure_errors() {
        let disconnected = vec![vec![Some(r(0)), None], vec![None, Some(r(0))]];
        assert_eq!(shortest_path_closure(None, &disconnected).unwrap_err(), MetricError::DisconnectedGraph);
        let shrinking = vec![
            vec![Some(r(0)), Some(r(1)), Some(r(10))],
            vec![Some(r(1)), Some(r(0)), Some(r(1))],
            vec![Some(r(10)), Some(r(1)), Some(r(0))],
        ];
        assert_eq!(
            shortest_path_closure(None, &shrinking).unwrap_err(),
            MetricError::ClosureShrinksDefinedEntry { i: 0, j: 2 }
        );
    }
}
