use crate::adversaries::{AdversaryError, LowerBound};
use crate::metric::FiniteMetric;
use crate::transform::Transformation;
use crate::wfa::{AdaptiveAdversary, AdversaryMove, AdversaryView};

/// Star metric game: shrink the requested set around the algorithm until one
/// leaf is left, then swap it with the center.
#[derive(Debug)]
pub struct SwapLbAdversary {
    n: usize,
    rounds: usize,
    alive: Vec<usize>,
    identities_sent: usize,
    swapped: bool,
    survivors: Vec<usize>,
}

impl SwapLbAdversary {
    /// The leaf that survived in each completed round.
    pub fn survivors(&self) -> &[usize] {
        &self.survivors
    }

    fn reset(&mut self) {
        self.alive = (1..self.n).collect();
        self.identities_sent = 0;
        self.swapped = false;
    }
}

impl AdaptiveAdversary for SwapLbAdversary {
    fn next(&mut self, view: &AdversaryView<'_>) -> AdversaryMove {
        if view.round >= self.rounds {
            return AdversaryMove::Finished;
        }
        if self.swapped {
            self.reset();
            return AdversaryMove::EndOfRound;
        }
        if self.identities_sent > 0 {
            if self.alive.len() == 1 {
                let p = self.alive[0];
                self.survivors.push(p);
                self.swapped = true;
                return AdversaryMove::Request(Transformation::swap(p, 0).expect("leaf differs from center"));
            }
            let pos = view.position;
            match self.alive.iter().position(|&q| q == pos) {
                Some(j) => {
                    self.alive.remove(j);
                }
                // The algorithm is always inside the last set; fall back to
                // dropping the first leaf so the game still terminates.
                None => {
                    self.alive.remove(0);
                }
            }
        }
        self.identities_sent += 1;
        AdversaryMove::Request(Transformation::identity(self.alive.clone()).expect("non-empty"))
    }
}

/// Star with center 0 at distance 1 from `n - 1` leaves that are pairwise 2
/// apart. Start at 0; each round costs the online algorithm `2n - 3` and
/// the offline optimum 1.
pub fn swap_lb_adversary(n: usize, rounds: usize) -> Result<LowerBound<SwapLbAdversary>, AdversaryError> {
    if n < 3 {
        return Err(AdversaryError::InvalidParameters(format!("need n >= 3, got {n}")));
    }
    let metric = FiniteMetric::from_fn(n, 1, |i, j| match (i, j) {
        _ if i == j => 0,
        (0, _) | (_, 0) => 1,
        _ => 2,
    })?;
    let mut adversary =
        SwapLbAdversary { n, rounds, alive: Vec::new(), identities_sent: 0, swapped: false, survivors: Vec::new() };
    adversary.reset();
    Ok(LowerBound { metric, adversary, predicted: (2 * n - 3) as f64 })
}
