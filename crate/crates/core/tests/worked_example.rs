use approx::assert_abs_diff_eq;
use specdisc::discretize::{discretize, DiscretizerConfig, Method};
use specdisc::fixtures::four_node_weights;
use specdisc::graph::{build_graph_from_weights, CutKind};
use specdisc::oracle::solve_oracle;
use specdisc::relaxed::{assignment_objective, solve_relaxed, Assignment};

#[test]
fn four_node_ratio_cut() {
    let g = build_graph_from_weights(four_node_weights(), CutKind::Ratio).unwrap();
    let rs = solve_relaxed(&g, 2).unwrap();

    let expected = [0.5556, 0.0629, -0.8073, 0.1888];
    let col = rs.f_star.column(1);
    let sign = if col[0] > 0.0 { 1.0 } else { -1.0 };
    for (i, e) in expected.iter().enumerate() {
        assert_abs_diff_eq!(sign * col[i], *e, epsilon = 1e-3);
    }
    for i in 0..4 {
        assert_abs_diff_eq!(rs.f_star[(i, 0)].abs(), 0.5, epsilon = 1e-12);
    }

    let oracle = solve_oracle(&rs, &g, 2).unwrap();
    assert_eq!(oracle.best_labels.canonical(), vec![0, 1, 1, 0]);
    assert_abs_diff_eq!(oracle.best_value, 1.3, epsilon = 1e-12);

    let isr = discretize(&rs, &g, &DiscretizerConfig::new(Method::Isr, 0))
        .unwrap()
        .0;
    assert!(isr.same_partition(&oracle.closest_labels));

    let outlier = Assignment::new(vec![0, 0, 1, 0], 2).unwrap();
    let last = Assignment::new(vec![0, 0, 0, 1], 2).unwrap();
    assert_abs_diff_eq!(
        assignment_objective(&outlier, &g).unwrap(),
        4.0 / 3.0,
        epsilon = 1e-12
    );
    assert_abs_diff_eq!(
        assignment_objective(&last, &g).unwrap(),
        2.0,
        epsilon = 1e-12
    );
}
