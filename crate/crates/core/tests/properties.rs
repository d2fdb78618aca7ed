mod common;

use common::*;
use covthresh::compgraph::{
    connected_components, critical_lambdas, node_screen, partition_equal, partition_refines, support_graph,
    threshold_graph, threshold_partition,
};
use covthresh::covmodel::{objective, spd_factor_inverse, to_correlation};
use covthresh::glasso::{kkt_check, solve_full, solve_pair};
use covthresh::io::{format_triplets, parse_triplets};
use covthresh::screen::screen_solve;
use covthresh::{SolverConfig, SymMatrix};
use proptest::prelude::*;

/// Symmetric matrices with entries drawn from a coarse lattice, so ties and
/// exact zeros are common.
fn lattice_matrix(max_p: usize) -> impl Strategy<Value = SymMatrix> {
    (2..=max_p).prop_flat_map(|p| {
        prop::collection::vec(-8i32..=8, p * p)
            .prop_map(move |v| SymMatrix::from_fn(p, |i, j| if i == j { 1.0 } else { f64::from(v[i * p + j]) / 10.0 }))
    })
}

fn small_lambda() -> impl Strategy<Value = f64> {
    (0u32..90).prop_map(|k| f64::from(k) / 100.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn spd_inverse_is_involution(seed in any::<u64>(), p in 1usize..10) {
        let m = random_spd(&mut rng(seed), p);
        let inv = spd_factor_inverse(&m).unwrap().inverse;
        let back = spd_factor_inverse(&inv).unwrap().inverse;
        prop_assert!(back.max_abs_diff(&m) <= 1e-9 * (1.0 + max_abs_offdiag(&m)));
    }

    #[test]
    fn objective_is_convex_along_segments(seed in any::<u64>(), t in 0.0f64..1.0) {
        let mut r = rng(seed);
        let s = random_spd(&mut r, 5);
        let a = random_spd(&mut r, 5);
        let b = random_spd(&mut r, 5);
        let mid = SymMatrix::from_fn(5, |i, j| t * a.get(i, j) + (1.0 - t) * b.get(i, j));
        let f = |m: &SymMatrix| objective(&s, m, 0.2).unwrap();
        prop_assert!(f(&mid) <= t * f(&a) + (1.0 - t) * f(&b) + 1e-10);
    }

    #[test]
    fn correlation_entries_bounded(seed in any::<u64>(), p in 2usize..12) {
        let s = random_cov(seed | 1, p);
        let c = to_correlation(&s).unwrap();
        for i in 0..p {
            for j in 0..p {
                prop_assert!(c.get(i, j).abs() <= 1.0 + 1e-12);
            }
        }
    }

    #[test]
    fn edges_shrink_as_lambda_grows(s in lattice_matrix(12), a in small_lambda(), b in small_lambda()) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(threshold_graph(&s, hi).is_subset_of(&threshold_graph(&s, lo)));
    }

    #[test]
    fn partitions_nest(s in lattice_matrix(12), a in small_lambda(), b in small_lambda()) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let fine = threshold_partition(&s, hi);
        let coarse = threshold_partition(&s, lo);
        prop_assert!(partition_refines(&fine, &coarse).unwrap());
        prop_assert!(fine.num_blocks() >= coarse.num_blocks());
    }

    #[test]
    fn components_match_reachability(s in lattice_matrix(30), lam in small_lambda()) {
        let via_graph = connected_components(&threshold_graph(&s, lam));
        let direct = threshold_partition(&s, lam);
        let oracle = threshold_blocks(&s, lam);
        prop_assert_eq!(via_graph.blocks(), oracle.as_slice());
        prop_assert_eq!(direct, via_graph);
    }

    #[test]
    fn node_screen_equals_singletons(s in lattice_matrix(15), lam in small_lambda()) {
        prop_assert_eq!(node_screen(&s, lam), threshold_partition(&s, lam).singletons());
    }

    #[test]
    fn partition_constant_inside_critical_intervals(s in lattice_matrix(10), frac in 0.01f64..0.99) {
        let crit = critical_lambdas(&s);
        for w in crit.windows(2) {
            let lam = w[0] + frac * (w[1] - w[0]);
            let mid = 0.5 * (w[0] + w[1]);
            prop_assert!(partition_equal(&threshold_partition(&s, lam), &threshold_partition(&s, mid)).unwrap());
        }
    }

    #[test]
    fn profile_sizes_sum_to_p(s in lattice_matrix(12), lam in small_lambda()) {
        prop_assert_eq!(threshold_partition(&s, lam).sizes().iter().sum::<usize>(), s.dim());
    }

    #[test]
    fn triplets_round_trip(s in lattice_matrix(8)) {
        prop_assert_eq!(parse_triplets(&format_triplets(&s)).unwrap(), s);
    }

    #[test]
    fn pair_closed_form(s12 in -0.95f64..0.95, lam in 0.0f64..1.0, d in 0.1f64..3.0) {
        let s = SymMatrix::from_fn(2, |i, j| if i == j { d + i as f64 * 0.5 } else { s12 * d });
        let sol = solve_pair(&s, lam, &SolverConfig::default()).unwrap();
        let want = (s12 * d).signum() * ((s12 * d).abs() - lam).max(0.0);
        prop_assert!((sol.w.get(0, 1) - want).abs() <= 1e-8);
        prop_assert!(kkt_check(&s, &sol, &SolverConfig::default()).passed);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn solver_certificates_hold(seed in any::<u64>(), p in 2usize..30, pick in 0usize..6) {
        let cfg = SolverConfig::default();
        let s = random_cov(seed, p);
        let lams = offgrid_lambdas(&s, 6);
        let lam = lams[pick.min(lams.len() - 1)];
        let full = solve_full(&s, lam, &cfg).unwrap();
        prop_assert!(full.converged);
        prop_assert!(kkt_check(&s, &full, &cfg).passed);
        for i in 0..p {
            prop_assert!((full.w.get(i, i) - s.get(i, i) - lam).abs() <= 1e-9);
        }
        // zero-test rows come back exactly zero
        for i in node_screen(&s, lam) {
            prop_assert!((0..p).all(|j| j == i || full.theta.get(i, j) == 0.0));
        }
        let support = connected_components(&support_graph(&full.theta, cfg.support_tol));
        prop_assert_eq!(&support, &threshold_partition(&s, lam));
        prop_assert_eq!(node_screen(&s, lam), support.singletons());

        let scr = screen_solve(&s, lam, &cfg, None).unwrap();
        prop_assert!(scr.global_kkt.passed);
        prop_assert!(scr.assembled_theta.max_abs_diff(&full.theta) <= 1e-5);
    }
}
