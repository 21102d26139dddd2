use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::homogenize::{ExtendedSpace, ExtensionSpace, Family, HomogenizeError};
use crate::metric::{FiniteMetric, MetricSpace};

/// A distance-preserving map between subsets of the base, `domain[j] ↦ image[j]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PartialIsometry {
    pub domain: Vec<usize>,
    pub image: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateEntry {
    pub domain: Vec<usize>,
    pub image: Vec<usize>,
    /// Permutation of the extension's points.
    pub automorphism: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub family: Family,
    pub checked: usize,
    pub entries: Vec<CertificateEntry>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Certified(Certificate),
    /// A partial isometry of the base with no extending automorphism.
    Counterexample(PartialIsometry),
}

impl Verdict {
    pub fn is_certified(&self) -> bool {
        matches!(self, Verdict::Certified(_))
    }
}

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    /// Largest domain enumerated for [`Family::All`].
    pub max_domain_size: usize,
    /// Search nodes allowed per partial isometry.
    pub node_budget: u64,
    /// Size guard for [`Family::All`].
    pub max_points_all: usize,
    /// Size guard for swaps and translations.
    pub max_points: usize,
    /// Store every automorphism in the certificate.
    pub keep_automorphisms: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            max_domain_size: 3,
            node_budget: 2_000_000,
            max_points_all: 64,
            max_points: 4096,
            keep_automorphisms: true,
        }
    }
}

/// Returned by [`find_automorphism`] when the node budget runs out.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BudgetExceeded;

/// Whether `perm` is a distance-preserving bijection of `m`.
pub fn is_automorphism<M: MetricSpace + ?Sized>(m: &M, perm: &[usize]) -> bool {
    let n = m.len();
    if perm.len() != n {
        return false;
    }
    let mut seen = vec![false; n];
    for &p in perm {
        if p >= n || std::mem::replace(&mut seen[p], true) {
            return false;
        }
    }
    (0..n).all(|x| (x + 1..n).all(|y| m.dist(x, y) == m.dist(perm[x], perm[y])))
}

struct Search<'a, M: MetricSpace + ?Sized> {
    m: &'a M,
    class: Vec<usize>,
    sigma: Vec<usize>,
    used: Vec<bool>,
    assigned: Vec<usize>,
    order: Vec<usize>,
    nodes: u64,
    budget: u64,
}

impl<M: MetricSpace + ?Sized> Search<'_, M> {
    fn compatible(&self, u: usize, v: usize) -> bool {
        self.class[u] == self.class[v]
            && self.assigned.iter().all(|&w| self.m.dist(u, w) == self.m.dist(v, self.sigma[w]))
    }

    fn run(&mut self, depth: usize) -> Result<bool, BudgetExceeded> {
        if depth == self.order.len() {
            return Ok(true);
        }
        let u = self.order[depth];
        for v in 0..self.m.len() {
            if self.used[v] || !self.compatible(u, v) {
                continue;
            }
            self.nodes += 1;
            if self.nodes > self.budget {
                return Err(BudgetExceeded);
            }
            self.sigma[u] = v;
            self.used[v] = true;
            self.assigned.push(u);
            if self.run(depth + 1)? {
                return Ok(true);
            }
            self.assigned.pop();
            self.used[v] = false;
            self.sigma[u] = usize::MAX;
        }
        Ok(false)
    }
}

/// Backtracking search for an automorphism of `m` with `σ(x) = y` for every
/// pair. Candidates must share the sorted distance profile of the point they
/// replace and agree with every assignment made so far.
pub fn find_automorphism<M: MetricSpace + ?Sized>(
    m: &M,
    pairs: &[(usize, usize)],
    budget: u64,
) -> Result<Option<Vec<usize>>, BudgetExceeded> {
    let n = m.len();
    let mut classes: HashMap<Vec<i64>, usize> = HashMap::new();
    let class: Vec<usize> = (0..n)
        .map(|x| {
            let mut row: Vec<i64> = (0..n).map(|y| m.dist(x, y)).collect();
            row.sort_unstable();
            let next = classes.len();
            *classes.entry(row).or_insert(next)
        })
        .collect();

    let mut search = Search {
        m,
        class,
        sigma: vec![usize::MAX; n],
        used: vec![false; n],
        assigned: Vec::new(),
        order: Vec::new(),
        nodes: 0,
        budget,
    };
    for &(x, y) in pairs {
        if search.sigma[x] == y {
            continue;
        }
        if search.sigma[x] != usize::MAX || search.used[y] || !search.compatible(x, y) {
            return Ok(None);
        }
        search.sigma[x] = y;
        search.used[y] = true;
        search.assigned.push(x);
    }
    search.order = (0..n).filter(|&x| search.sigma[x] == usize::MAX).collect();
    Ok(search.run(0)?.then_some(search.sigma))
}

fn extend_images(base: &FiniteMetric, domain: &[usize], image: &mut Vec<usize>, out: &mut Vec<PartialIsometry>) {
    let j = image.len();
    if j == domain.len() {
        out.push(PartialIsometry { domain: domain.to_vec(), image: image.clone() });
        return;
    }
    for y in 0..base.len() {
        if image.contains(&y) {
            continue;
        }
        if (0..j).all(|i| base.dist(domain[i], domain[j]) == base.dist(image[i], y)) {
            image.push(y);
            extend_images(base, domain, image, out);
            image.pop();
        }
    }
}

fn combinations(n: usize, size: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if cur.len() == size {
        out.push(cur.clone());
        return;
    }
    for x in start..n {
        cur.push(x);
        combinations(n, size, x + 1, cur, out);
        cur.pop();
    }
}

/// The partial isometries of `base` in `family`: every isometry with domain
/// size `1..=max_domain_size` for [`Family::All`], every swap, or every
/// non-zero translation `x ↦ x + v` restricted to the points it keeps inside
/// the base.
pub fn partial_isometries(
    base: &FiniteMetric,
    family: Family,
    max_domain_size: usize,
    coordinates: Option<&[Vec<i64>]>,
) -> Result<Vec<PartialIsometry>, HomogenizeError> {
    let n = base.len();
    let mut out = Vec::new();
    match family {
        Family::All => {
            for size in 1..=max_domain_size.min(n) {
                let mut domains = Vec::new();
                combinations(n, size, 0, &mut Vec::new(), &mut domains);
                for d in domains {
                    extend_images(base, &d, &mut Vec::new(), &mut out);
                }
            }
        }
        Family::Swaps => {
            for a in 0..n {
                for b in a + 1..n {
                    out.push(PartialIsometry { domain: vec![a, b], image: vec![b, a] });
                }
            }
        }
        Family::Translations => {
            let coords = coordinates.ok_or(HomogenizeError::MissingCoordinates)?;
            let index: HashMap<&[i64], usize> = coords.iter().enumerate().map(|(i, c)| (c.as_slice(), i)).collect();
            let mut vectors = BTreeSet::new();
            for a in coords {
                for b in coords {
                    if a != b {
                        vectors.insert(b.iter().zip(a).map(|(x, y)| x - y).collect::<Vec<i64>>());
                    }
                }
            }
            for v in vectors {
                let mut iso = PartialIsometry { domain: Vec::new(), image: Vec::new() };
                for (x, c) in coords.iter().enumerate() {
                    let shifted: Vec<i64> = c.iter().zip(&v).map(|(a, b)| a + b).collect();
                    if let Some(&y) = index.get(shifted.as_slice()) {
                        iso.domain.push(x);
                        iso.image.push(y);
                    }
                }
                out.push(iso);
            }
        }
    }
    Ok(out)
}

/// Checks that every partial isometry of the base in `family` extends to an
/// automorphism of the extension. Hints from the extension are tried first,
/// then backtracking.
pub fn verify_weak_ultrahomogeneity<E: ExtensionSpace>(
    e: &ExtendedSpace<E>,
    family: Family,
    opts: &VerifyOptions,
) -> Result<Verdict, HomogenizeError> {
    let size = e.extension.len();
    let limit = if family == Family::All { opts.max_points_all } else { opts.max_points };
    if size > limit {
        return Err(HomogenizeError::TooLarge { size: size as u128, limit: limit as u128 });
    }
    let isometries = partial_isometries(&e.base, family, opts.max_domain_size, e.base_coordinates.as_deref())?;
    let mut entries = Vec::new();
    for iso in &isometries {
        let pairs: Vec<(usize, usize)> =
            iso.domain.iter().zip(&iso.image).map(|(&x, &y)| (e.embedding[x], e.embedding[y])).collect();
        let hinted = e
            .extension
            .automorphism_hint(&pairs)
            .filter(|p| pairs.iter().all(|&(x, y)| p[x] == y) && is_automorphism(&e.extension, p));
        let found = match hinted {
            Some(p) => Some(p),
            None => find_automorphism(&e.extension, &pairs, opts.node_budget).map_err(|_| {
                HomogenizeError::SearchBudgetExceeded { domain: iso.domain.clone(), image: iso.image.clone() }
            })?,
        };
        match found {
            None => return Ok(Verdict::Counterexample(iso.clone())),
            Some(automorphism) if opts.keep_automorphisms => {
                entries.push(CertificateEntry { domain: iso.domain.clone(), image: iso.image.clone(), automorphism })
            }
            Some(_) => {}
        }
    }
    Ok(Verdict::Certified(Certificate { family, checked: isometries.len(), entries }))
}
