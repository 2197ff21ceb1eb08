mod common;

use autoconv_core::lp::LinearProgram;
use common::{brute_force, random_lp};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn matches_vertex_enumeration() {
    assert_eq!(common::lp_matches_enumeration(500), Ok(500));
}

#[test]
fn complementary_slackness() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..500 {
        let lp = random_lp(&mut rng);
        let sol = lp.solve(10_000);
        let (m, n) = (lp.rows(), lp.cols());
        for i in 0..m {
            let ax: f64 = lp.row(i).iter().zip(&sol.x).map(|(a, x)| a * x).sum();
            assert!(sol.duals[i] >= -1e-9);
            assert!((sol.duals[i] * (lp.bounds[i] - ax)).abs() < 1e-8);
        }
        for j in 0..n {
            let aty: f64 = (0..m).map(|i| lp.row(i)[j] * sol.duals[i]).sum();
            assert!(aty >= lp.objective[j] - 1e-8);
            assert!((sol.x[j] * (aty - lp.objective[j])).abs() < 1e-8);
        }
    }
}

#[test]
fn scaling_the_objective_keeps_the_vertex() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..200 {
        let lp = random_lp(&mut rng);
        let scaled = LinearProgram::new(
            lp.objective.iter().map(|c| c * 4.0).collect(),
            lp.matrix.clone(),
            lp.bounds.clone(),
        )
        .unwrap();
        assert_eq!(lp.solve(10_000).x, scaled.solve(10_000).x);
    }
}

#[test]
fn small_convolution_instance() {
    // max b0 + b1 with a = [1, 1]: (a*b)_k <= max(a*a) = 2.
    let lp = LinearProgram::new(vec![1.0, 1.0], vec![1.0, 0.0, 1.0, 1.0, 0.0, 1.0], vec![2.0; 3]).unwrap();
    let sol = lp.solve(100);
    assert_eq!(sol.objective_value, brute_force(&lp));
    assert!((sol.objective_value - 2.0).abs() < 1e-12);
}
