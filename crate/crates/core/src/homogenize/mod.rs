//! Weakly ultrahomogeneous extensions: a space `M̂ ⊇ M` in which every
//! partial isometry of `M` from a given family extends to an automorphism.
//!
//! Three constructions are provided: the `F₂^{n-1}` cube for swaps, fully
//! symmetric trees for ultrametrics and tori for translations of weighted
//! `ℓ₁` grids. [`verify_weak_ultrahomogeneity`] checks any of them by
//! exhaustive search.

mod lower_bound;
mod swap_cube;
mod symmetric_tree;
mod torus;
mod verify;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metric::{FiniteMetric, MetricError, MetricSpace};

pub use lower_bound::{ball_sizes, build_ultrametric_lb_instance, check_ball_counts, LbInstance};
pub use swap_cube::{build_swap_extension, swap_extension_size, SwapCube, SWAP_TABLE_MAX_POINTS};
pub use symmetric_tree::{build_symmetric_tree_extension, symmetric_tree_size_bound, SymmetricTreeMetric};
pub use torus::{build_line_extension, build_torus_extension, torus_size, TorusMetric};
pub use verify::{
    find_automorphism, is_automorphism, partial_isometries, verify_weak_ultrahomogeneity, BudgetExceeded, Certificate,
    CertificateEntry, PartialIsometry, Verdict, VerifyOptions,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HomogenizeError {
    #[error("space has {size} points, limit is {limit}")]
    TooLarge { size: u128, limit: u128 },
    #[error("search budget exhausted while extending {domain:?} -> {image:?}")]
    SearchBudgetExceeded { domain: Vec<usize>, image: Vec<usize> },
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("translation family needs base coordinates")]
    MissingCoordinates,
    #[error(transparent)]
    Metric(#[from] MetricError),
}

/// Family of partial isometries an extension is built for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    All,
    Swaps,
    Translations,
}

impl std::str::FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "all" => Ok(Family::All),
            "swaps" => Ok(Family::Swaps),
            "translations" => Ok(Family::Translations),
            other => Err(format!("unknown family '{other}' (expected all, swaps or translations)")),
        }
    }
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Family::All => "all",
            Family::Swaps => "swaps",
            Family::Translations => "translations",
        })
    }
}

/// A metric that can serve as the extension in an [`ExtendedSpace`].
pub trait ExtensionSpace: MetricSpace {
    fn point_label(&self, i: usize) -> String {
        format!("p{i}")
    }

    /// A candidate automorphism mapping `x ↦ y` for every pair. The caller
    /// checks it; `None` falls back to search.
    fn automorphism_hint(&self, _pairs: &[(usize, usize)]) -> Option<Vec<usize>> {
        None
    }
}

impl ExtensionSpace for FiniteMetric {
    fn point_label(&self, i: usize) -> String {
        self.label(i).to_string()
    }
}

/// A base metric together with an extension and an isometric embedding.
#[derive(Clone, Debug)]
pub struct ExtendedSpace<E = FiniteMetric> {
    pub base: FiniteMetric,
    pub extension: E,
    /// `embedding[p]` is the image of base point `p` in the extension.
    pub embedding: Vec<usize>,
    pub family: Family,
    /// Integer coordinates of base points, used to enumerate translations.
    pub base_coordinates: Option<Vec<Vec<i64>>>,
    pub certificate: Option<Certificate>,
}

impl<E: ExtensionSpace> ExtendedSpace<E> {
    pub fn size(&self) -> usize {
        self.extension.len()
    }

    /// First base pair whose distance is not reproduced, if any.
    pub fn embedding_mismatch(&self) -> Option<(usize, usize)> {
        let n = self.base.len();
        let base_scale = self.base.scale() as i128;
        let ext_scale = self.extension.scale() as i128;
        for x in 0..n {
            for y in x..n {
                let lhs = self.base.dist(x, y) as i128 * ext_scale;
                let rhs = self.extension.dist(self.embedding[x], self.embedding[y]) as i128 * base_scale;
                if lhs != rhs {
                    return Some((x, y));
                }
            }
        }
        None
    }

    /// Dense copy of the extension; refuses spaces above `limit` points.
    pub fn materialize(&self, limit: usize) -> Result<FiniteMetric, HomogenizeError> {
        let size = self.extension.len();
        if size > limit {
            return Err(HomogenizeError::TooLarge { size: size as u128, limit: limit as u128 });
        }
        let labels = (0..size).map(|i| self.extension.point_label(i)).collect();
        Ok(FiniteMetric::materialize(&self.extension).with_labels(labels)?)
    }
}
