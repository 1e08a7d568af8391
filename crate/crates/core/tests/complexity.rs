//! Per-sweep cost of the greedy row update should grow about linearly in n at fixed c.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use specdisc::discretize::{random_labels, FirstOrderState};
use specdisc::numerics::DenseMatrix;

fn sweep_seconds(n: usize, c: usize, reps: usize) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(n as u64);
    let m = DenseMatrix::from_fn(n, c, |_, _| rng.random_range(-1.0..1.0));
    let scaling: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..2.0)).collect();
    let labels = random_labels(n, c, &mut rng);
    let mut best = f64::INFINITY;
    for _ in 0..reps {
        let mut state = FirstOrderState::new(m.clone(), labels.clone(), &scaling).unwrap();
        let start = Instant::now();
        state.sweep();
        best = best.min(start.elapsed().as_secs_f64());
    }
    best
}

#[test]
fn sweep_time_scales_linearly() {
    let c = 8;
    let t: Vec<f64> = [500, 1000, 2000]
        .iter()
        .map(|&n| sweep_seconds(n, c, 30))
        .collect();
    // Linear growth gives a ratio near 4; a quadratic sweep would give 16.
    let ratio = t[2] / t[0];
    assert!(ratio < 10.0, "timings {t:?}, ratio {ratio:.2}");
}
