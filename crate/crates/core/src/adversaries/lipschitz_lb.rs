use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::adversaries::{AdversaryError, LowerBound};
use crate::metric::{shortest_path_closure, FiniteMetric, Rational};
use crate::transform::Transformation;
use crate::wfa::{AdaptiveAdversary, AdversaryMove, AdversaryView};

/// Repeats the chain of α-Lipschitz maps followed by a coin flip between
/// the two ends of the chain.
#[derive(Debug)]
pub struct LipschitzLbAdversary {
    chain: Vec<Transformation>,
    finals: [Transformation; 2],
    last: usize,
    rounds: usize,
    next: usize,
    rng: ChaCha8Rng,
    seed: u64,
    draws: Vec<usize>,
}

impl LipschitzLbAdversary {
    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// The point `x` drawn in each round.
    pub fn draws(&self) -> &[usize] {
        &self.draws
    }

    /// Whether round `r` ended at the far end of the chain.
    pub fn drew_far_end(&self, r: usize) -> bool {
        self.draws[r] == self.last
    }
}

impl AdaptiveAdversary for LipschitzLbAdversary {
    fn next(&mut self, view: &AdversaryView<'_>) -> AdversaryMove {
        if view.round >= self.rounds {
            return AdversaryMove::Finished;
        }
        let j = self.next;
        self.next += 1;
        if j < self.chain.len() {
            AdversaryMove::Request(self.chain[j].clone())
        } else if j == self.chain.len() {
            let far = self.rng.gen_bool(0.5);
            self.draws.push(if far { self.last } else { 0 });
            AdversaryMove::Request(self.finals[far as usize].clone())
        } else {
            self.next = 0;
            AdversaryMove::EndOfRound
        }
    }
}

/// `m = min{α + 1, α²}`.
pub fn gap_factor(alpha: Rational) -> Rational {
    let one = Rational::from_integer(1);
    (alpha + one).min(alpha * alpha)
}

fn lb_metric(n: usize, alpha: Rational) -> Result<FiniteMetric, AdversaryError> {
    let m = gap_factor(alpha);
    let mut partial = vec![vec![None; n]; n];
    let mut power = Rational::from_integer(1);
    for i in 1..n {
        // p_{i+1} in 1-based naming: d(p_1, p_{i+1}) = m^{i-1}.
        partial[0][i] = Some(power);
        partial[i][0] = Some(power);
        if i + 1 < n {
            let step = alpha * power;
            partial[i][i + 1] = Some(step);
            partial[i + 1][i] = Some(step);
        }
        partial[i][i] = Some(Rational::from_integer(0));
        power *= m;
    }
    partial[0][0] = Some(Rational::from_integer(0));
    let labels = (1..=n).map(|i| format!("p{i}")).collect();
    Ok(shortest_path_closure(Some(labels), &partial)?)
}

/// The randomized lower-bound instance for α-Lipschitz requests on `n`
/// points, repeated for `rounds` rounds. Predicts ratio `m^{n-2}`.
pub fn lipschitz_lb_adversary(
    n: usize,
    alpha: Rational,
    seed: u64,
    rounds: usize,
) -> Result<LowerBound<LipschitzLbAdversary>, AdversaryError> {
    if n < 3 {
        return Err(AdversaryError::InvalidParameters(format!("need n >= 3, got {n}")));
    }
    if alpha < Rational::from_integer(1) {
        return Err(AdversaryError::InvalidParameters(format!("need alpha >= 1, got {alpha}")));
    }
    let metric = lb_metric(n, alpha)?;
    let classify = |d: Vec<usize>, i: Vec<usize>| Transformation::classify(&metric, d, i).expect("indices in range");
    let mut chain = Vec::with_capacity(2 * n - 4);
    for t in 1..=n - 2 {
        chain.push(classify(vec![0, t], vec![t, t + 1]));
        chain.push(classify(vec![t, t + 1], vec![0, t + 1]));
    }
    let last = n - 1;
    let finals = [classify(vec![0], vec![0]), classify(vec![last], vec![0])];
    let m = gap_factor(alpha);
    let predicted = (0..n - 2).fold(Rational::from_integer(1), |acc, _| acc * m);
    let adversary = LipschitzLbAdversary {
        chain,
        finals,
        last,
        rounds,
        next: 0,
        rng: ChaCha8Rng::seed_from_u64(seed),
        seed,
        draws: Vec::new(),
    };
    Ok(LowerBound { metric, adversary, predicted: *predicted.numer() as f64 / *predicted.denom() as f64 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::MetricSpace;
    use crate::wfa::{simulate, SimOptions, Wfa};

    fn r(x: i64) -> Rational {
        Rational::from_integer(x)
    }

    #[test]
    fn metric_for_four_points() {
        let lb = lipschitz_lb_adversary(4, r(2), 0, 1).unwrap();
        let m = &lb.metric;
        assert_eq!((m.dist(0, 1), m.dist(0, 2), m.dist(0, 3)), (1, 3, 9));
        assert_eq!((m.dist(1, 2), m.dist(2, 3)), (2, 6));
        assert_eq!(m.dist(1, 3), 8);
        assert_eq!(lb.predicted, 9.0);
    }

    #[test]
    fn degenerate_gap() {
        let lb = lipschitz_lb_adversary(3, r(1), 0, 1).unwrap();
        assert_eq!(lb.predicted, 1.0);
        assert_eq!(lb.metric.dist(1, 2), 1);
    }

    #[test]
    fn maps_are_alpha_lipschitz() {
        let lb = lipschitz_lb_adversary(5, Rational::new(3, 2), 0, 1).unwrap();
        for t in &lb.adversary.chain {
            assert!(t.is_lipschitz_within(Rational::new(3, 2)), "{t:?}");
        }
    }

    #[test]
    fn wfa_pays_the_gap_exactly_when_far() {
        let mut lb = lipschitz_lb_adversary(4, r(2), 7, 200).unwrap();
        let rep = simulate(&lb.metric, 0, &mut lb.adversary, &mut Wfa, &SimOptions::default()).unwrap();
        let (on, off) = (rep.round_online_costs(), rep.round_offline_costs());
        assert_eq!(on.len(), 200);
        for r in 0..200 {
            let far = lb.adversary.drew_far_end(r) as i64;
            assert_eq!((on[r], off[r]), (9 * far, far), "round {r}");
        }
        let again = lipschitz_lb_adversary(4, r(2), 7, 200).unwrap();
        let mut adv = again.adversary;
        simulate(&again.metric, 0, &mut adv, &mut Wfa, &SimOptions::default()).unwrap();
        assert_eq!(adv.draws(), lb.adversary.draws());
    }

    #[test]
    fn invalid() {
        assert!(lipschitz_lb_adversary(2, r(2), 0, 1).is_err());
        assert!(lipschitz_lb_adversary(4, Rational::new(1, 2), 0, 1).is_err());
    }
}
