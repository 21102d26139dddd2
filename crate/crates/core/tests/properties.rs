#![allow(clippy::needless_range_loop)]

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tmss_core::adversaries::superlinear_metric;
use tmss_core::homogenize::{build_swap_extension, build_symmetric_tree_extension, build_torus_extension, SwapCube};
use tmss_core::instance::{instance_to_json, parse_instance};
use tmss_core::ktaxi::{frt_embed, request_to_translation, simulate_ktaxi, TaxiConfig};
use tmss_core::lipschitz::{build_ultrametric_distortion, distortion_bound, run_lipschitz_pipeline};
use tmss_core::metric::{shortest_path_closure, validate_axioms};
use tmss_core::random::{
    random_lipschitz_request, random_metric, random_swap_or_identity, random_taxi_requests, random_tree,
    random_ultrametric,
};
use tmss_core::ultrametric::find_ultrametric_violation;
use tmss_core::wfa::{check_potential_run, clique_sum, simulate_sequence, Potential, SimOptions, Wfa, WorkFunction};
use tmss_core::{FiniteMetric, MetricError, MetricSpace, Rational, Transformation, UltrametricTree};

fn r(x: i64) -> Rational {
    Rational::from_integer(x)
}

/// Requests with arbitrary (not necessarily Lipschitz) maps.
fn random_requests(rng: &mut ChaCha8Rng, n: usize, len: usize, m: &FiniteMetric) -> Vec<Transformation> {
    (0..len)
        .map(|_| {
            let size = rng.gen_range(1..=n);
            let domain = rand::seq::index::sample(rng, n, size).into_vec();
            let image = domain.iter().map(|_| rng.gen_range(0..n)).collect();
            Transformation::classify(m, domain, image).unwrap()
        })
        .collect()
}

/// Cheapest way to serve all requests from `pos`, trying every choice.
fn brute_force_offline(m: &FiniteMetric, pos: usize, requests: &[Transformation]) -> i64 {
    match requests.split_first() {
        None => 0,
        Some((t, rest)) => t.pairs().map(|(a, b)| m.dist(pos, a) + brute_force_offline(m, b, rest)).min().unwrap(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn closure_is_a_metric_agreeing_with_defined_entries(seed: u64, n in 1usize..7) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut partial = vec![vec![None; n]; n];
        for i in 0..n {
            partial[i][i] = Some(r(0));
            for j in i + 1..n {
                if j == i + 1 || rng.gen_bool(0.4) {
                    let v = Some(Rational::new(rng.gen_range(1..20), rng.gen_range(1..4)));
                    partial[i][j] = v;
                    partial[j][i] = v;
                }
            }
        }
        match shortest_path_closure(None, &partial) {
            Ok(m) => {
                prop_assert!(validate_axioms(&m).is_ok());
                for i in 0..n {
                    for j in 0..n {
                        if let Some(v) = partial[i][j] {
                            prop_assert_eq!(Rational::new(m.dist(i, j), m.scale()), v);
                        }
                    }
                }
            }
            Err(e) => prop_assert!(matches!(e, MetricError::ClosureShrinksDefinedEntry { .. }), "{e}"),
        }
    }

    #[test]
    fn ultrametric_tree_round_trip(seed: u64, n in 1usize..12) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = random_ultrametric(&mut rng, n, 8);
        let tree = UltrametricTree::from_metric(&u).unwrap();
        let back = tree.to_metric();
        for x in 0..n {
            for y in 0..n {
                prop_assert_eq!(back.dist(x, y), u.dist(x, y));
            }
        }
    }

    #[test]
    fn classified_alpha_is_the_worst_pair(seed: u64, n in 2usize..8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_metric(&mut rng, n, 9);
        for t in random_requests(&mut rng, n, 10, &m) {
            let mut worst = r(0);
            for (a, fa) in t.pairs() {
                for (b, fb) in t.pairs() {
                    if a != b {
                        let q = Rational::new(m.dist(fa, fb), m.dist(a, b));
                        worst = worst.max(q);
                    }
                }
            }
            if t.len() < 2 {
                worst = r(1);
            }
            prop_assert_eq!(t.alpha(), worst);
            prop_assert_eq!(t.is_isometry(), t.pairs().all(|(a, fa)| t.pairs().all(|(b, fb)| m.dist(a, b) == m.dist(fa, fb))));
        }
    }

    #[test]
    fn work_function_dp_matches_brute_force(seed: u64, n in 1usize..6, len in 0usize..7) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_metric(&mut rng, n, 9);
        let requests = random_requests(&mut rng, n, len, &m);
        let start = rng.gen_range(0..n);
        let rep = simulate_sequence(&m, start, &requests, &mut Wfa, &SimOptions::recording()).unwrap();
        prop_assert_eq!(rep.offline_cost, brute_force_offline(&m, start, &requests));
        prop_assert!(rep.offline_cost <= rep.online_cost);

        let mut pos = start;
        let mut total = 0;
        for (rec, t) in rep.steps.iter().zip(&requests) {
            prop_assert_eq!(t.apply(rec.a), Some(rec.b));
            prop_assert_eq!(rec.cost, m.dist(pos, rec.a));
            total += rec.cost;
            pos = rec.b;
        }
        prop_assert_eq!(total, rep.online_cost);

        let trace = rep.trace.as_ref().unwrap();
        let mut last_min = 0;
        for s in 1..=requests.len() {
            let w = trace.post(s);
            prop_assert_eq!(w.lipschitz_violation(&m), None);
            prop_assert!(w.min() >= last_min);
            last_min = w.min();
        }

        let again = simulate_sequence(&m, start, &requests, &mut Wfa, &SimOptions::default()).unwrap();
        prop_assert_eq!(again.trajectory(), rep.trajectory());
    }

    #[test]
    fn pre_update_is_supported_on_domain(seed: u64, n in 1usize..8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_metric(&mut rng, n, 9);
        let w = WorkFunction::initial(&m, rng.gen_range(0..n));
        let size = rng.gen_range(1..=n);
        let domain = rand::seq::index::sample(&mut rng, n, size).into_vec();
        let pre = w.pre_update(&m, &domain).unwrap();
        prop_assert_eq!(pre.lipschitz_violation(&m), None);
        for s in pre.support(&m) {
            prop_assert!(domain.contains(&s));
        }
        for p in 0..n {
            let direct = domain.iter().map(|&a| w.get(a) + m.dist(a, p)).min().unwrap();
            prop_assert_eq!(pre.get(p), direct);
        }
    }

    #[test]
    fn swap_potential_inequalities_hold(seed: u64, n in 2usize..7, len in 1usize..25) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_metric(&mut rng, n, 9);
        let requests: Vec<_> = (0..len).map(|_| random_swap_or_identity(&mut rng, n)).collect();
        let rep = simulate_sequence(&m, 0, &requests, &mut Wfa, &SimOptions::recording()).unwrap();
        let all: Vec<usize> = (0..n).collect();
        let pot = check_potential_run(&m, rep.trace.as_ref().unwrap(), Potential::Swap, 2 * n as i64 - 2, clique_sum(&m, &all))
            .unwrap();
        prop_assert!(pot.holds(), "{:?}", pot.violations);
    }

    #[test]
    fn distortion_is_sandwiched_and_ultrametric(seed: u64, n in 2usize..8, a_num in 1i64..7, a_den in 1i64..3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_metric(&mut rng, n, 30);
        let alpha = Rational::new(a_num, a_den);
        let ud = build_ultrametric_distortion(&m, alpha).unwrap();
        let hat = FiniteMetric::from_fn(n, m.scale(), |x, y| ud.partition.distorted(x, y)).unwrap();
        prop_assert_eq!(find_ultrametric_violation(&hat), None);
        prop_assert!(ud.partition.connectivity_is_equivalence());
        let bound = distortion_bound(alpha, n);
        for x in 0..n {
            for y in x + 1..n {
                prop_assert!(m.dist(x, y) <= hat.dist(x, y));
                prop_assert!(Rational::from_integer(hat.dist(x, y)) <= bound * m.dist(x, y));
            }
        }
        let used = ud.partition.alpha_used;
        for _ in 0..20 {
            let t = random_lipschitz_request(&mut rng, &m, n, used);
            let under_hat = Transformation::classify(&hat, t.domain().to_vec(), t.image().to_vec()).unwrap();
            prop_assert!(under_hat.is_lipschitz_within(r(1)));
        }
    }

    #[test]
    fn pipeline_costs_are_ordered(seed: u64, n in 2usize..6, len in 1usize..12) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_metric(&mut rng, n, 12);
        let alpha = r(2);
        let requests: Vec<_> = (0..len).map(|_| random_lipschitz_request(&mut rng, &m, 3, alpha)).collect();
        let rep = run_lipschitz_pipeline(&m, 0, &requests, alpha).unwrap();
        prop_assert!(rep.run.offline_cost <= rep.run.online_cost);
        prop_assert!(rep.run.online_cost <= rep.hat_online_cost);
        prop_assert!(rep.hat_online_cost as i128 <= rep.hat_bound());
    }

    #[test]
    fn swap_extension_is_translation_invariant(seed: u64, n in 1usize..7) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_metric(&mut rng, n, 9);
        let e = build_swap_extension(&m).unwrap();
        prop_assert_eq!(e.size(), 1usize << (n - 1));
        prop_assert_eq!(e.embedding_mismatch(), None);
        let full = e.materialize(64).unwrap();
        prop_assert!(full.validate().is_ok());
        let size = e.size();
        for v in 0..size {
            prop_assert_eq!(e.extension.norm(v), e.extension.matching_norm(v));
            for x in 0..size {
                for y in 0..size {
                    prop_assert_eq!(e.extension.dist(x, y), e.extension.dist(x ^ v, y ^ v));
                }
            }
        }
        for i in 0..n {
            prop_assert_eq!(e.embedding[i], SwapCube::embed(i));
        }
    }

    #[test]
    fn symmetric_tree_extension_sizes(seed: u64, n in 1usize..14) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = random_ultrametric(&mut rng, n, 6);
        let tree = UltrametricTree::from_metric(&u).unwrap();
        let e = build_symmetric_tree_extension(&tree).unwrap();
        let product: usize = tree.max_children_per_level().iter().product();
        prop_assert_eq!(e.size(), product.max(1));
        prop_assert_eq!(e.embedding_mismatch(), None);
        if e.size() <= 256 {
            prop_assert_eq!(find_ultrametric_violation(&e.materialize(256).unwrap()), None);
        }
    }

    #[test]
    fn torus_extension_contains_grid(k in 1usize..4, dims in 1usize..3, w0 in 1i64..5, w1 in 1i64..5) {
        let weights: Vec<Rational> = [w0, w1][..dims].iter().map(|&w| r(w)).collect();
        let e = build_torus_extension(k, dims, &weights).unwrap();
        prop_assert_eq!(e.size(), (2 * k).pow(dims as u32));
        prop_assert_eq!(e.base.len(), (k + 1).pow(dims as u32));
        prop_assert_eq!(e.embedding_mismatch(), None);
        prop_assert!(validate_axioms(&e.extension).is_ok());
    }

    #[test]
    fn frt_trees_dominate(seed: u64, n in 1usize..10) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_metric(&mut rng, n, 50);
        let e = frt_embed(&m, seed);
        prop_assert!(e.is_non_contracting(&m));
        prop_assert_eq!(e.tree.leaves().len(), n);
    }

    #[test]
    fn instance_json_round_trip(seed: u64, n in 1usize..6, len in 0usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_metric(&mut rng, n, 9);
        let requests = random_requests(&mut rng, n, len, &m);
        let labels: Vec<String> = (0..n).map(|i| format!("x{i}")).collect();
        let text = instance_to_json(&m, &labels, Some(0), &requests);
        let inst = parse_instance(&text).unwrap();
        prop_assert_eq!(inst.initial, 0);
        prop_assert_eq!(inst.requests.len(), len);
        for (a, b) in inst.requests.iter().zip(&requests) {
            prop_assert_eq!(a.domain(), b.domain());
            prop_assert_eq!(a.image(), b.image());
        }
        for x in 0..n {
            for y in 0..n {
                prop_assert_eq!(inst.metric.dist(x, y), m.dist(x, y));
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn superlinear_tree_is_a_metric(h in 0u32..3, alpha in 4i64..9) {
        let m = superlinear_metric(h, alpha).unwrap();
        prop_assert_eq!(m.len(), 4usize.pow(h));
        prop_assert!(m.validate().is_ok());
    }

    #[test]
    fn decoded_ktaxi_steps_are_consistent(seed: u64, leaves in 1usize..4, k in 1usize..3, len in 0usize..8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = random_tree(&mut rng, leaves, 3);
        let l = t.leaves();
        let start_leaves: Vec<usize> = (0..k).map(|_| l[rng.gen_range(0..l.len())]).collect();
        let start = TaxiConfig::from_leaves(&t, &start_leaves).unwrap();
        let requests = random_taxi_requests(&mut rng, &t, len);
        let rep = simulate_ktaxi(&t, k, &start, &requests).unwrap();
        prop_assert_eq!(rep.torus_size, (2 * k).pow(t.len() as u32 - 1));
        prop_assert_eq!(rep.run.offline_cost, rep.offline_config_cost);
        for (i, &(s, dest)) in requests.iter().enumerate() {
            let from = &rep.served_from[i];
            prop_assert!(from.validate(&t, k).is_ok());
            prop_assert!(from.leaves(&t).contains(&s));
            prop_assert_eq!(rep.run.steps[i].cost, rep.trajectory[i].distance(from, &t));
            let shift = request_to_translation(&t, s, dest).unwrap();
            let moved: Vec<i64> = from.x.iter().zip(&shift).map(|(a, b)| a + b).collect();
            prop_assert_eq!(&rep.trajectory[i + 1].x, &moved);
        }
    }
}
