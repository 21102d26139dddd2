use crate::homogenize::{ExtendedSpace, ExtensionSpace, HomogenizeError};
use crate::metric::FiniteMetric;

/// An ultrametric whose every weakly ultrahomogeneous extension is large.
#[derive(Clone, Debug)]
pub struct LbInstance {
    pub metric: FiniteMetric,
    /// `parts[0] = {p_0}`, then `M_1, …, M_k`.
    pub parts: Vec<Vec<usize>>,
    /// `Π_{i=1}^k (|M_i| + 1)`.
    pub predicted_bound: u128,
}

/// `M = {p_0} ∪ M_1 ∪ … ∪ M_k` with parts as equal as possible (larger
/// first) and `d(x, y) = 2·3^{j-1}` for `x ∈ M_i`, `y ∈ M_j`, `i ≤ j`.
pub fn build_ultrametric_lb_instance(n: usize, k: usize) -> Result<LbInstance, HomogenizeError> {
    if k == 0 || n < 2 || k > n - 1 {
        return Err(HomogenizeError::InvalidParameters(format!("need 1 <= k <= n - 1, got n = {n}, k = {k}")));
    }
    if k > 38 {
        return Err(HomogenizeError::InvalidParameters(format!("k = {k} overflows the distance grid")));
    }
    let (small, extra) = ((n - 1) / k, (n - 1) % k);
    let mut part_of = vec![0usize];
    let mut parts = vec![vec![0]];
    let mut labels = vec!["p0".to_string()];
    for j in 1..=k {
        let size = if j <= extra { small + 1 } else { small };
        let mut part = Vec::with_capacity(size);
        for s in 0..size {
            part.push(part_of.len());
            part_of.push(j);
            labels.push(format!("m{j}_{s}"));
        }
        parts.push(part);
    }
    let metric =
        FiniteMetric::from_fn(
            n,
            1,
            |x, y| {
                if x == y {
                    0
                } else {
                    2 * 3i64.pow(part_of[x].max(part_of[y]) as u32 - 1)
                }
            },
        )?
        .with_labels(labels)?;
    let predicted_bound = parts[1..].iter().map(|p| p.len() as u128 + 1).product();
    Ok(LbInstance { metric, parts, predicted_bound })
}

/// `|B_j(p_0)|` in the extension for `j = 1..=k`, radius `3^j` (exclusive).
pub fn ball_sizes<E: ExtensionSpace>(e: &ExtendedSpace<E>, k: usize) -> Vec<usize> {
    let center = e.embedding[0];
    let scale = e.extension.scale();
    (1..=k)
        .map(|j| {
            let radius = 3i64.pow(j as u32) * scale;
            (0..e.extension.len()).filter(|&x| e.extension.dist(center, x) < radius).count()
        })
        .collect()
}

/// Checks `|B_j(p_0)| ≥ Π_{i≤j} (|M_i| + 1)` for every `j`; returns the first
/// failing `(j, ball size, required)`.
pub fn check_ball_counts<E: ExtensionSpace>(
    e: &ExtendedSpace<E>,
    inst: &LbInstance,
) -> Result<(), (usize, usize, u128)> {
    let k = inst.parts.len() - 1;
    let mut required = 1u128;
    for (j, &size) in ball_sizes(e, k).iter().enumerate() {
        required *= inst.parts[j + 1].len() as u128 + 1;
        if (size as u128) < required {
            return Err((j + 1, size, required));
        }
    }
    Ok(())
}
