mod common;

use common::{random_b_instance, random_network, rng, uniform_orthogonal, NetShape};
use mmsched::ecsched::{karloff_edge_color, quantize, Multigraph};
use mmsched::f3wc::{
    build_conflict_graph, f3wc_color, lslo_ordering, matching_in_expansion, orient_conflict_graph,
    solve_stream_times, Ordering,
};
use mmsched::matching::{enumerate_simple_b_matchings, max_weight_simple_b_matching};
use mmsched::netmodel::{expand, validate_schedule};
use mmsched::oracle::{brute_force_mtfs, enumerate_activation_sets, FD_LIMIT, HD_LIMIT};
use mmsched::optfd::opt_fd_for;
use mmsched::scenario::stream_capacities;
use mmsched::{DirectedNetwork, ModelFlags, Rational, Scalar, Schedule};
use num_traits::Zero;
use proptest::prelude::*;

fn flags(s: &str) -> ModelFlags {
    s.parse().unwrap()
}

fn net(seed: u64, kind: &str) -> DirectedNetwork {
    random_network(&mut rng(seed), &NetShape::small(kind))
}

fn kind() -> impl Strategy<Value = &'static str> {
    prop::sample::select(vec![
        "FD-NI-MAX",
        "FD-NI-REAL",
        "HD-NI-MAX",
        "HD-NI-REAL",
        "FD-PI-MAX",
        "FD-PI-REAL",
        "HD-PI-MAX",
        "HD-PI-REAL",
    ])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn optfd_matches_oracle_in_f64(seed in any::<u64>(), real in any::<bool>()) {
        let f = flags(if real { "FD-NI-REAL" } else { "FD-NI-MAX" });
        let n = net(seed, &f.to_string());
        let a = opt_fd_for::<f64>(&n, &f).unwrap().theta;
        let b = brute_force_mtfs::<Rational>(&n, &f, FD_LIMIT).unwrap().theta.to_f64();
        prop_assert!((a - b).abs() <= 1e-7 * b.max(1.0), "{a} vs {b}");
    }

    #[test]
    fn half_duplex_never_beats_full_duplex(seed in any::<u64>(), real in any::<bool>()) {
        let (fd, hd) = if real { ("FD-NI-REAL", "HD-NI-REAL") } else { ("FD-NI-MAX", "HD-NI-MAX") };
        let n = net(seed, hd);
        let a = brute_force_mtfs::<Rational>(&n, &flags(hd), HD_LIMIT).unwrap().theta;
        let b = brute_force_mtfs::<Rational>(&n, &flags(fd), FD_LIMIT).unwrap().theta;
        prop_assert!(a <= b);
    }

    #[test]
    fn interference_never_helps(seed in any::<u64>()) {
        let n = net(seed, "FD-PI-MAX");
        let a = brute_force_mtfs::<Rational>(&n, &flags("FD-PI-MAX"), FD_LIMIT).unwrap().theta;
        let b = brute_force_mtfs::<Rational>(&n, &flags("FD-NI-MAX"), FD_LIMIT).unwrap().theta;
        prop_assert!(a <= b);
    }

    #[test]
    fn activation_sets_fit_the_expansion(seed in any::<u64>(), k in kind()) {
        let mut shape = NetShape::small(k);
        shape.max_vertices = 5;
        let n = random_network(&mut rng(seed), &shape);
        let f = flags(k);
        let exp = expand(&n, &f);
        let limit = if f.is_hd() { HD_LIMIT } else { FD_LIMIT };
        for set in enumerate_activation_sets(&n, &f, limit).unwrap() {
            prop_assert!(matching_in_expansion(&exp, &set).is_some(), "{set:?}");
        }
    }

    #[test]
    fn coloring_covers_weights_with_independent_classes(seed in any::<u64>(), k in kind(), lslo in any::<bool>()) {
        let f = flags(k);
        let n = net(seed, k);
        let cg = build_conflict_graph(&n, &f);
        let ordering = if lslo { Ordering::Lslo } else { Ordering::Fao };
        let oriented = lslo.then(|| orient_conflict_graph(&cg));
        let (_, t) = solve_stream_times::<Rational>(&n, &cg, ordering, oriented.as_ref()).unwrap();
        let order = match &oriented {
            Some(g) => lslo_ordering(g, &t),
            None => (0..cg.len()).collect(),
        };
        let mut sorted = order.clone();
        sorted.sort_unstable();
        prop_assert_eq!(sorted, (0..cg.len()).collect::<Vec<_>>());
        let coloring = f3wc_color(&cg.adjacency, &t, &order);
        let mut covered = vec![Rational::zero(); cg.len()];
        for (class, w) in &coloring.classes {
            prop_assert!(w.is_pos());
            for (i, &a) in class.iter().enumerate() {
                covered[a] += w.clone();
                for &b in &class[i + 1..] {
                    prop_assert!(!cg.adjacent(a, b));
                }
            }
        }
        prop_assert_eq!(&covered, &t);
        prop_assert!(coloring.weight() <= Rational::from_integer(1.into()));
    }

    #[test]
    fn stream_capacities_are_non_increasing(c1 in 0.1f64..30.0, k in 1usize..8, r in 0.0f64..0.99) {
        let caps = stream_capacities(c1, k, r);
        prop_assert_eq!(caps.len(), k);
        prop_assert!((caps[0] - c1).abs() < 1e-9 * c1);
        for w in caps.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-12 && w[1] > 0.0);
        }
    }

    #[test]
    fn karloff_coloring_is_proper(n in 2usize..9, pairs in prop::collection::vec((0usize..8, 0usize..8), 0..30)) {
        let edges: Vec<(usize, usize)> = pairs
            .into_iter()
            .map(|(u, v)| (u % n, v % n))
            .filter(|(u, v)| u != v)
            .collect();
        let g = Multigraph { n, edges };
        let c = karloff_edge_color(&g);
        prop_assert!(c.is_proper(&g));
        prop_assert!(c.count <= 3 * g.max_degree().div_ceil(2));
    }

    #[test]
    fn b_matching_is_optimal(seed in any::<u64>()) {
        let (g, b) = random_b_instance(&mut rng(seed), 8);
        let got = max_weight_simple_b_matching(&g, &b).unwrap();
        let best = enumerate_simple_b_matchings(&g, &b, 16)
            .unwrap()
            .into_iter()
            .map(|m| g.weight_of(&m))
            .max()
            .unwrap();
        prop_assert_eq!(got.weight, best);
    }

    #[test]
    fn quantize_preserves_time(num in 0i64..500, den in 1i64..50, tg_den in 1i64..20) {
        let time = Rational::new(num.into(), den.into());
        let tg = Rational::new(1.into(), tg_den.into());
        let parts = quantize(&time, &tg);
        prop_assert_eq!(Rational::sum(parts.iter().cloned()), time);
        prop_assert!(parts.iter().all(|p| p.is_pos() && *p <= tg));
    }

    #[test]
    fn schedules_round_trip_through_json(seed in any::<u64>(), k in kind()) {
        let f = flags(k);
        let n = net(seed, k);
        let limit = if f.is_hd() { HD_LIMIT } else { FD_LIMIT };
        let sol = brute_force_mtfs::<f64>(&n, &f, limit).unwrap();
        prop_assert!(validate_schedule(&n, &sol.schedule, &f).is_empty());
        let back = Schedule::from_json(&sol.schedule.to_json()).unwrap();
        prop_assert_eq!(back, sol.schedule);
        let text = serde_json::to_string(&n).unwrap();
        prop_assert_eq!(serde_json::from_str::<DirectedNetwork>(&text).unwrap(), n);
    }

    #[test]
    fn uniform_orthogonal_generator_is_uniform(seed in any::<u64>()) {
        let n = uniform_orthogonal(&mut rng(seed), 7);
        prop_assert!(mmsched::opthd::uniform_rf(&n).is_ok());
    }
}
