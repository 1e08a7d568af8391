use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use specdisc::dataset_io::{gen_random_graph, RandomGraphSpec};
use specdisc::discretize::{discretize, random_labels, DiscretizerConfig, Method};
use specdisc::graph::{build_graph_from_weights, CutKind};
use specdisc::metrics::{accuracy, nmi};
use specdisc::numerics::{procrustes, singular_values, DenseMatrix};
use specdisc::oracle::brute_force_optimum;
use specdisc::relaxed::{assignment_objective, solve_relaxed, Assignment};
use specdisc::theory::{rho_check, sandwich_check};

fn cut_strategy() -> impl Strategy<Value = CutKind> {
    prop_oneof![Just(CutKind::Ratio), Just(CutKind::Normalized)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn procrustes_is_orthogonal(entries in prop::collection::vec(-5.0f64..5.0, 9)) {
        let m = DenseMatrix::from_row_slice(3, 3, &entries);
        let r = procrustes(&m).unwrap();
        let err = (r.transpose() * &r - DenseMatrix::identity(3, 3)).abs().max();
        prop_assert!(err < 1e-10);
    }

    #[test]
    fn discrete_objectives_bound_relaxation(seed in any::<u64>(), n in 5usize..11, cut in cut_strategy()) {
        let s = gen_random_graph(&RandomGraphSpec { n, seed }).unwrap();
        let g = build_graph_from_weights(s, cut).unwrap();
        let rs = solve_relaxed(&g, 2).unwrap();
        let opt = brute_force_optimum(&g, 2).unwrap();
        prop_assert!(opt.value >= rs.lower_bound() - 1e-9);
        for method in Method::ALL {
            let (y, report) = discretize(&rs, &g, &DiscretizerConfig::new(method, seed)).unwrap();
            prop_assert_eq!(y.counts().iter().filter(|&&k| k > 0).count(), 2);
            prop_assert!(report.final_objective >= opt.value - 1e-9);
            if cut == CutKind::Ratio {
                let sw = sandwich_check(&rs.f_star, &y).unwrap();
                prop_assert!(sw.lower_holds, "{}: {} > {}", method, sw.j_kmeans, sw.j_isr);
            }
            let sign = match method {
                Method::Isr | Method::FirstOrder => 1.0,
                Method::Km | Method::KmNorm => -1.0,
                Method::Sr => continue,
            };
            for w in report.trace.windows(2) {
                prop_assert!(sign * (w[1] - w[0]) >= -1e-10 * w[0].abs().max(1.0), "{}", method);
            }
        }
    }

    #[test]
    fn sandwich_and_rho_hold(seed in any::<u64>(), n in 6usize..20, c in 2usize..4) {
        let s = gen_random_graph(&RandomGraphSpec { n, seed }).unwrap();
        let g = build_graph_from_weights(s, CutKind::Ratio).unwrap();
        let rs = solve_relaxed(&g, c).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let y = Assignment::new(random_labels(n, c, &mut rng), c).unwrap();
        let sw = sandwich_check(&rs.f_star, &y).unwrap();
        prop_assert!(sw.holds());
        prop_assert!(sw.sigma.iter().all(|&x| x <= 1.0 + 1e-10));
        prop_assert!(rho_check(&rs, &y, &g).unwrap().holds);
        let top = singular_values(&(rs.f_star.transpose() * &rs.f_star)).unwrap()[0];
        prop_assert!((top - 1.0).abs() < 1e-10);
    }

    #[test]
    fn objective_ignores_label_names(seed in any::<u64>(), n in 4usize..12) {
        let s = gen_random_graph(&RandomGraphSpec { n, seed }).unwrap();
        let g = build_graph_from_weights(s, CutKind::Normalized).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let labels = random_labels(n, 3, &mut rng);
        let swapped: Vec<usize> = labels.iter().map(|&l| (l + 1) % 3).collect();
        let a = assignment_objective(&Assignment::new(labels, 3).unwrap(), &g).unwrap();
        let b = assignment_objective(&Assignment::new(swapped, 3).unwrap(), &g).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
    }

    #[test]
    fn metrics_are_relabeling_invariant(
        pairs in prop::collection::vec((0usize..4, 0usize..4), 1..40),
        shift in 1usize..4,
    ) {
        let t: Vec<usize> = pairs.iter().map(|p| p.0).collect();
        let p: Vec<usize> = pairs.iter().map(|p| p.1).collect();
        let q: Vec<usize> = p.iter().map(|&l| (l + shift) % 4 + 100).collect();
        prop_assert_eq!(accuracy(&t, &p).unwrap(), accuracy(&t, &q).unwrap());
        prop_assert!((nmi(&t, &p).unwrap() - nmi(&t, &q).unwrap()).abs() < 1e-12);
        let acc = accuracy(&t, &p).unwrap();
        prop_assert!(((acc * t.len() as f64).round() - acc * t.len() as f64).abs() < 1e-9);
    }
}
