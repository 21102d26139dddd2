//! Transformation requests `f: A -> B` and their Lipschitz classification.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metric::{MetricSpace, Rational};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TransformError {
    #[error("domain has {domain} points but image has {image}")]
    LengthMismatch { domain: usize, image: usize },
    #[error("point {0} appears twice in the domain")]
    DuplicateDomainPoint(usize),
    #[error("point index {index} out of range for {len} points")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("empty domain")]
    EmptyDomain,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TransformKind {
    Identity,
    /// `A = {a, b}`, `f(a) = b`, `f(b) = a`.
    Swap,
    /// Every pairwise distance on the domain is preserved.
    Isometry,
    /// Minimal Lipschitz constant together with a pair that attains it.
    Lipschitz {
        alpha: Rational,
        witness: (usize, usize),
    },
}

/// A partial map given as parallel `domain`/`image` lists: `f(domain[j]) = image[j]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transformation {
    domain: Vec<usize>,
    image: Vec<usize>,
    kind: TransformKind,
}

fn check_lists(n: usize, domain: &[usize], image: &[usize]) -> Result<(), TransformError> {
    if domain.len() != image.len() {
        return Err(TransformError::LengthMismatch { domain: domain.len(), image: image.len() });
    }
    if domain.is_empty() {
        return Err(TransformError::EmptyDomain);
    }
    let mut seen = vec![false; n];
    for &p in domain.iter().chain(image) {
        if p >= n {
            return Err(TransformError::IndexOutOfRange { index: p, len: n });
        }
    }
    for &p in domain {
        if std::mem::replace(&mut seen[p], true) {
            return Err(TransformError::DuplicateDomainPoint(p));
        }
    }
    Ok(())
}

impl Transformation {
    /// Validates the lists and computes the kind exactly.
    pub fn classify<M: MetricSpace + ?Sized>(
        m: &M,
        domain: Vec<usize>,
        image: Vec<usize>,
    ) -> Result<Self, TransformError> {
        check_lists(m.len(), &domain, &image)?;
        let kind = classify_kind(m, &domain, &image);
        Ok(Transformation { domain, image, kind })
    }

    /// Identity on `domain`; needs no metric.
    pub fn identity(domain: Vec<usize>) -> Result<Self, TransformError> {
        if domain.is_empty() {
            return Err(TransformError::EmptyDomain);
        }
        let n = domain.iter().max().map_or(0, |m| m + 1);
        check_lists(n, &domain, &domain)?;
        Ok(Transformation { image: domain.clone(), domain, kind: TransformKind::Identity })
    }

    /// The swap exchanging `a` and `b`.
    pub fn swap(a: usize, b: usize) -> Result<Self, TransformError> {
        if a == b {
            return Err(TransformError::DuplicateDomainPoint(a));
        }
        Ok(Transformation { domain: vec![a, b], image: vec![b, a], kind: TransformKind::Swap })
    }

    pub fn domain(&self) -> &[usize] {
        &self.domain
    }

    pub fn image(&self) -> &[usize] {
        &self.image
    }

    pub fn kind(&self) -> &TransformKind {
        &self.kind
    }

    pub fn len(&self) -> usize {
        self.domain.len()
    }

    pub fn is_empty(&self) -> bool {
        self.domain.is_empty()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.domain.iter().copied().zip(self.image.iter().copied())
    }

    /// `f(x)` if `x` is in the domain.
    pub fn apply(&self, x: usize) -> Option<usize> {
        self.domain.iter().position(|&a| a == x).map(|j| self.image[j])
    }

    pub fn contains(&self, x: usize) -> bool {
        self.domain.contains(&x)
    }

    pub fn is_identity(&self) -> bool {
        self.kind == TransformKind::Identity
    }

    pub fn is_isometry(&self) -> bool {
        matches!(self.kind, TransformKind::Identity | TransformKind::Swap | TransformKind::Isometry)
    }

    /// Minimal Lipschitz constant (1 for isometries, including the vacuous
    /// one-point case).
    pub fn alpha(&self) -> Rational {
        match &self.kind {
            TransformKind::Lipschitz { alpha, .. } => *alpha,
            _ => Rational::from_integer(1),
        }
    }

    pub fn is_lipschitz_within(&self, alpha: Rational) -> bool {
        self.alpha() <= alpha
    }

    /// Relabels every point through `map` (e.g. an embedding into an
    /// extension) and reclassifies under the target metric.
    pub fn map_points<M: MetricSpace + ?Sized>(&self, target: &M, map: &[usize]) -> Result<Self, TransformError> {
        let domain = self.domain.iter().map(|&p| map[p]).collect();
        let image = self.image.iter().map(|&p| map[p]).collect();
        Transformation::classify(target, domain, image)
    }
}

fn classify_kind<M: MetricSpace + ?Sized>(m: &M, domain: &[usize], image: &[usize]) -> TransformKind {
    if domain == image {
        return TransformKind::Identity;
    }
    if domain.len() == 2 && domain[0] == image[1] && domain[1] == image[0] {
        return TransformKind::Swap;
    }
    // Maximise d(f x, f y) / d(x, y) by exact cross-multiplication.
    let mut best: Option<(i64, i64, (usize, usize))> = None;
    let mut isometry = true;
    for i in 0..domain.len() {
        for j in i + 1..domain.len() {
            let before = m.dist(domain[i], domain[j]);
            let after = m.dist(image[i], image[j]);
            if before != after {
                isometry = false;
            }
            let better = match best {
                None => true,
                Some((num, den, _)) => (after as i128) * (den as i128) > (num as i128) * (before as i128),
            };
            if better {
                best = Some((after, before, (domain[i], domain[j])));
            }
        }
    }
    match best {
        Some((num, den, witness)) if !isometry => TransformKind::Lipschitz { alpha: Rational::new(num, den), witness },
        _ => TransformKind::Isometry,
    }
}
