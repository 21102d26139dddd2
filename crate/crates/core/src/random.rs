//! Seeded generators for metrics, trees and request sequences.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::homogenize::SymmetricTreeMetric;
use crate::ktaxi::TreeMetric;
use crate::metric::{FiniteMetric, MetricSpace, Rational};
use crate::transform::Transformation;

/// Shortest-path closure of a complete graph with integer weights in
/// `1..=max_weight`.
pub fn random_metric<R: Rng + ?Sized>(rng: &mut R, n: usize, max_weight: i64) -> FiniteMetric {
    let mut d = vec![vec![0i64; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let w = rng.gen_range(1..=max_weight.max(1));
            d[i][j] = w;
            d[j][i] = w;
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i][k] + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    FiniteMetric::from_scaled(None, &d, 1).expect("closure of positive weights is a metric")
}

/// Random ultrametric on `n` points with integer levels drawn from
/// `1..=max_level` (at least `n - 1` of them are available when needed).
pub fn random_ultrametric<R: Rng + ?Sized>(rng: &mut R, n: usize, max_level: i64) -> FiniteMetric {
    let mut levels: Vec<i64> = (1..=max_level.max(n as i64)).collect();
    levels.shuffle(rng);
    levels.truncate((n.saturating_sub(1)).max(1));
    levels.sort_unstable();
    let mut d = vec![vec![0i64; n]; n];
    let pts: Vec<usize> = (0..n).collect();
    split_ultrametric(rng, &pts, levels.len(), &levels, &mut d);
    FiniteMetric::from_scaled(None, &d, 1).expect("hierarchical split is an ultrametric")
}

fn split_ultrametric<R: Rng + ?Sized>(rng: &mut R, pts: &[usize], top: usize, levels: &[i64], d: &mut [Vec<i64>]) {
    if pts.len() < 2 {
        return;
    }
    let i = if top == 1 { 0 } else { rng.gen_range(0..top) };
    let parts = if i == 0 { pts.len() } else { rng.gen_range(2..=pts.len().min(3)) };
    let mut shuffled = pts.to_vec();
    shuffled.shuffle(rng);
    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); parts];
    for (j, &p) in shuffled.iter().enumerate() {
        let g = if j < parts { j } else { rng.gen_range(0..parts) };
        groups[g].push(p);
    }
    for a in 0..parts {
        for b in a + 1..parts {
            for &x in &groups[a] {
                for &y in &groups[b] {
                    d[x][y] = levels[i];
                    d[y][x] = levels[i];
                }
            }
        }
    }
    for g in &groups {
        split_ultrametric(rng, g, i, levels, d);
    }
}

/// Symmetric tree with exactly `leaves` leaves (`leaves ≥ 2`), random
/// factorisation into branching factors and increasing integer levels.
pub fn random_symmetric_tree<R: Rng + ?Sized>(rng: &mut R, leaves: usize) -> SymmetricTreeMetric {
    let mut rest = leaves.max(2);
    let mut branching = Vec::new();
    while rest > 1 {
        let divisors: Vec<usize> = (2..=rest).filter(|&d| rest.is_multiple_of(d)).collect();
        let e = *divisors.choose(rng).expect("rest > 1 has a divisor");
        branching.push(e);
        rest /= e;
    }
    let mut levels = Vec::with_capacity(branching.len());
    let mut l = 0i64;
    for _ in &branching {
        l += rng.gen_range(1..=3);
        levels.push(l);
    }
    SymmetricTreeMetric::new(branching, levels, 1).expect("valid parameters")
}

/// A random `α`-Lipschitz request with a domain of up to `max_domain`
/// points. Images are chosen point by point among the candidates that keep
/// every pair within the bound; on ultrametrics with `α ≥ 1` some candidate
/// always exists.
pub fn random_lipschitz_request<M: MetricSpace + ?Sized, R: Rng + ?Sized>(
    rng: &mut R,
    m: &M,
    max_domain: usize,
    alpha: Rational,
) -> Transformation {
    let n = m.len();
    let size = rng.gen_range(1..=max_domain.clamp(1, n));
    let mut domain: Vec<usize> = rand::seq::index::sample(rng, n, size).into_vec();
    let (num, den) = (*alpha.numer() as i128, *alpha.denom() as i128);
    let mut image: Vec<usize> = Vec::with_capacity(size);
    for j in 0..domain.len() {
        let x = domain[j];
        let candidates: Vec<usize> = (0..n)
            .filter(|&p| (0..j).all(|i| den * m.dist(image[i], p) as i128 <= num * m.dist(domain[i], x) as i128))
            .collect();
        match candidates.choose(rng) {
            Some(&p) => image.push(p),
            None => {
                domain.truncate(j);
                break;
            }
        }
    }
    Transformation::classify(m, domain, image).expect("valid lists")
}

/// A swap of two random points or an identity request on a random subset,
/// each with probability 1/2.
pub fn random_swap_or_identity<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Transformation {
    if n >= 2 && rng.gen_bool(0.5) {
        let v = rand::seq::index::sample(rng, n, 2);
        Transformation::swap(v.index(0), v.index(1)).expect("distinct")
    } else {
        let size = rng.gen_range(1..=n);
        let mut d = rand::seq::index::sample(rng, n, size).into_vec();
        d.sort_unstable();
        Transformation::identity(d).expect("non-empty")
    }
}

/// Random rooted tree with exactly `leaves` leaves and integer weights in
/// `1..=max_weight`. Internal vertices have at least two children except
/// possibly the root's single child when `leaves == 1`.
pub fn random_tree<R: Rng + ?Sized>(rng: &mut R, leaves: usize, max_weight: i64) -> TreeMetric {
    let mut parent = vec![None];
    // Grow by repeatedly splitting a random current leaf.
    let mut frontier = vec![];
    parent.push(Some(0));
    frontier.push(1usize);
    if leaves >= 2 {
        parent.push(Some(0));
        frontier.push(2);
    }
    while frontier.len() < leaves {
        let j = rng.gen_range(0..frontier.len());
        let v = frontier.swap_remove(j);
        for _ in 0..2 {
            parent.push(Some(v));
            frontier.push(parent.len() - 1);
        }
    }
    let weights = (0..parent.len())
        .map(|v| Rational::from_integer(if v == 0 { 0 } else { rng.gen_range(1..=max_weight.max(1)) }))
        .collect();
    TreeMetric::new(parent, weights, None).expect("generated tree is valid")
}

/// `len` rides between uniformly random leaves.
pub fn random_taxi_requests<R: Rng + ?Sized>(rng: &mut R, t: &TreeMetric, len: usize) -> Vec<(usize, usize)> {
    let l = t.leaves();
    (0..len).map(|_| (*l.choose(rng).expect("leaves"), *l.choose(rng).expect("leaves"))).collect()
}
