use crate::homogenize::{ExtendedSpace, ExtensionSpace, Family, HomogenizeError};
use crate::metric::{common_scale, to_scaled, FiniteMetric, MetricSpace, Rational};

/// Largest grid `{0..k}^D` materialized as a base metric.
const MAX_BASE_POINTS: u128 = 4096;

pub fn torus_size(k: usize, dims: usize) -> u128 {
    (2 * k as u128).pow(dims as u32)
}

/// `{0..2k-1}^D` with `d̂(x, y) = Σ_i w_i · min(|x_i - y_i|, 2k - |x_i - y_i|)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TorusMetric {
    k: usize,
    weights: Vec<i64>,
    scale: i64,
    len: usize,
}

fn checked_size(side: u128, dims: usize, limit: u128) -> Result<usize, HomogenizeError> {
    let size = side.checked_pow(dims as u32).unwrap_or(u128::MAX);
    if size > limit {
        return Err(HomogenizeError::TooLarge { size, limit });
    }
    Ok(size as usize)
}

impl TorusMetric {
    /// `weights` are already on the integer grid given by `scale`.
    pub fn new(k: usize, weights: Vec<i64>, scale: i64) -> Result<Self, HomogenizeError> {
        if k == 0 || weights.is_empty() || weights.iter().any(|&w| w <= 0) {
            return Err(HomogenizeError::InvalidParameters("torus needs k >= 1, D >= 1 and positive weights".into()));
        }
        let len = checked_size(2 * k as u128, weights.len(), usize::MAX as u128 / 2)?;
        Ok(TorusMetric { k, weights, scale, len })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn dims(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[i64] {
        &self.weights
    }

    pub fn side(&self) -> usize {
        2 * self.k
    }

    pub fn coords(&self, mut i: usize) -> Vec<i64> {
        let side = self.side();
        (0..self.dims())
            .map(|_| {
                let c = i % side;
                i /= side;
                c as i64
            })
            .collect()
    }

    /// Index of a point; coordinates are reduced mod `2k`.
    pub fn index(&self, coords: &[i64]) -> usize {
        let side = self.side() as i64;
        coords.iter().rev().fold(0usize, |acc, &c| acc * side as usize + c.rem_euclid(side) as usize)
    }

    /// The automorphism `x ↦ x + v (mod 2k)`.
    pub fn translation(&self, v: &[i64]) -> Vec<usize> {
        (0..self.len)
            .map(|x| {
                let c: Vec<i64> = self.coords(x).iter().zip(v).map(|(a, b)| a + b).collect();
                self.index(&c)
            })
            .collect()
    }
}

impl MetricSpace for TorusMetric {
    fn len(&self) -> usize {
        self.len
    }

    fn dist(&self, i: usize, j: usize) -> i64 {
        let side = self.side();
        let (mut a, mut b) = (i, j);
        let mut total = 0;
        for &w in &self.weights {
            let delta = (a % side).abs_diff(b % side);
            total += w * delta.min(side - delta) as i64;
            a /= side;
            b /= side;
        }
        total
    }

    fn scale(&self) -> i64 {
        self.scale
    }
}

fn coord_label(c: &[i64]) -> String {
    let parts: Vec<String> = c.iter().map(|x| x.to_string()).collect();
    format!("({})", parts.join(","))
}

impl ExtensionSpace for TorusMetric {
    fn point_label(&self, i: usize) -> String {
        coord_label(&self.coords(i))
    }

    fn automorphism_hint(&self, pairs: &[(usize, usize)]) -> Option<Vec<usize>> {
        let &(x0, y0) = pairs.first()?;
        let v: Vec<i64> = self.coords(y0).iter().zip(self.coords(x0)).map(|(a, b)| a - b).collect();
        let perm = self.translation(&v);
        pairs.iter().all(|&(x, y)| perm[x] == y).then_some(perm)
    }
}

/// The grid `{0..k}^D` with weighted `ℓ₁` distance, embedded in the torus
/// `{0..2k-1}^D`. Every translation of the grid extends to a rotation.
pub fn build_torus_extension(
    k: usize,
    dims: usize,
    weights: &[Rational],
) -> Result<ExtendedSpace<TorusMetric>, HomogenizeError> {
    if weights.len() != dims {
        return Err(HomogenizeError::InvalidParameters(format!("{} weights for D = {dims}", weights.len())));
    }
    if weights.iter().any(|w| *w <= Rational::from_integer(0)) {
        return Err(HomogenizeError::InvalidParameters("weights must be positive".into()));
    }
    let scale = common_scale(weights)?;
    let w: Vec<i64> = weights.iter().map(|x| to_scaled(x, scale)).collect::<Result<_, _>>()?;
    let torus = TorusMetric::new(k, w.clone(), scale)?;
    let base_len = checked_size(k as u128 + 1, dims, MAX_BASE_POINTS)?;

    let mut coords = Vec::with_capacity(base_len);
    for mut i in 0..base_len {
        coords.push(
            (0..dims)
                .map(|_| {
                    let c = i % (k + 1);
                    i /= k + 1;
                    c as i64
                })
                .collect::<Vec<i64>>(),
        );
    }
    let rows: Vec<Vec<i64>> = coords
        .iter()
        .map(|a| coords.iter().map(|b| a.iter().zip(b).zip(&w).map(|((x, y), wi)| wi * (x - y).abs()).sum()).collect())
        .collect();
    let labels = coords.iter().map(|c| coord_label(c)).collect();
    let base = FiniteMetric::from_scaled(Some(labels), &rows, scale)?;
    let embedding = coords.iter().map(|c| torus.index(c)).collect();
    Ok(ExtendedSpace {
        base,
        extension: torus,
        embedding,
        family: Family::Translations,
        base_coordinates: Some(coords),
        certificate: None,
    })
}

/// `n` equally spaced points on a line inside a circle of `2n - 2` points.
pub fn build_line_extension(n: usize) -> Result<ExtendedSpace<TorusMetric>, HomogenizeError> {
    if n < 2 {
        return Err(HomogenizeError::InvalidParameters("a line needs at least two points".into()));
    }
    build_torus_extension(n - 1, 1, &[Rational::from_integer(1)])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ones(d: usize) -> Vec<Rational> {
        vec![Rational::from_integer(1); d]
    }

    #[test]
    fn smallest_torus() {
        let e = build_torus_extension(1, 1, &ones(1)).unwrap();
        assert_eq!(e.size(), 2);
        assert_eq!(e.base.len(), 2);
        assert_eq!(e.embedding_mismatch(), None);
    }

    #[test]
    fn line_becomes_circle() {
        for n in 2..8 {
            let e = build_line_extension(n).unwrap();
            assert_eq!(e.size(), 2 * n - 2);
            assert_eq!(e.embedding_mismatch(), None);
        }
    }

    #[test]
    fn wrap_around_distance() {
        let e = build_torus_extension(2, 2, &ones(2)).unwrap();
        let t = &e.extension;
        assert_eq!(e.size(), 16);
        assert_eq!(t.dist(t.index(&[0, 0]), t.index(&[3, 3])), 2);
        assert_eq!(e.embedding_mismatch(), None);
    }

    #[test]
    fn rational_weights() {
        let w = [Rational::new(1, 2), Rational::new(3, 4)];
        let e = build_torus_extension(1, 2, &w).unwrap();
        assert_eq!(e.extension.scale(), 4);
        assert_eq!(e.extension.weights(), &[2, 3]);
        assert_eq!(e.embedding_mismatch(), None);
    }

    #[test]
    fn translation_hint() {
        let e = build_torus_extension(2, 1, &ones(1)).unwrap();
        let t = &e.extension;
        let perm = t.automorphism_hint(&[(0, 1), (1, 2)]).unwrap();
        assert_eq!(perm, vec![1, 2, 3, 0]);
        assert!(t.automorphism_hint(&[(0, 1), (1, 3)]).is_none());
    }

    #[test]
    fn invalid_parameters() {
        assert!(matches!(build_torus_extension(0, 1, &ones(1)), Err(HomogenizeError::InvalidParameters(_))));
        assert!(matches!(build_torus_extension(1, 2, &ones(1)), Err(HomogenizeError::InvalidParameters(_))));
    }
}
