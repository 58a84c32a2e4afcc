use koenigs_core::autoconjugate::{
    autoconjugacy_residual, curves_to_grid, generate_pair, grid_to_curves, is_generic_pair, laplace_formula_residual,
    roundtrip,
};
use koenigs_core::fixtures::circle_pair;
use koenigs_core::Tolerance;
use proptest::prelude::*;

#[test]
fn round_trips_recover_curves_and_grid() {
    let tol = Tolerance::default();
    let mut pairs = vec![circle_pair(6, 6, 0).unwrap()];
    pairs.extend((2..=3).map(|d| generate_pair(d, 2 * d + 4, 42, &tol).unwrap()));
    for pair in &pairs {
        let rt = roundtrip(pair, &tol).unwrap();
        assert!(rt.compared_points > 0);
        assert!(rt.curves_deviation < 1e-8, "d = {}: {}", pair.d, rt.curves_deviation);
        assert!(rt.grid_deviation < 1e-8, "d = {}: {}", pair.d, rt.grid_deviation);
    }
}

#[test]
fn grid_vertices_are_conjugate_to_the_osculating_points() {
    let tol = Tolerance::default();
    let pair = generate_pair(2, 8, 42, &tol).unwrap();
    let grid = curves_to_grid(&pair, &tol).unwrap();
    let (i0, j0) = grid.origin();
    let d = pair.d as i64;
    let mut worst = 0.0f64;
    for j in 0..grid.rows() {
        for i in 0..grid.cols() {
            let p = grid.get(i, j);
            let (gi, gj) = (i0 + i as i64, j0 + j as i64);
            for k in 0..d {
                let s = pair.sigma.at_global(gj + k).unwrap();
                let t = pair.tau.at_global(gi + k).unwrap();
                worst = worst.max(pair.quadric.evaluate(p, s).unwrap().abs());
                worst = worst.max(pair.quadric.evaluate(p, t).unwrap().abs());
            }
        }
    }
    assert!(worst < 1e-10, "{worst}");
}

#[test]
fn laplace_transforms_follow_the_curves() {
    let tol = Tolerance::default();
    for d in 1..=3 {
        let pair = generate_pair(d, 2 * d + 4, 9, &tol).unwrap();
        let grid = curves_to_grid(&pair, &tol).unwrap();
        assert!(laplace_formula_residual(&pair, &grid, &tol).unwrap() < 1e-8, "d = {d}");
    }
}

#[test]
fn diagonal_transforms_land_on_the_curves() {
    let tol = Tolerance::default();
    for (d, len) in [(1, 6), (2, 10), (3, 8)] {
        let pair = generate_pair(d, len, 13, &tol).unwrap();
        let grid = curves_to_grid(&pair, &tol).unwrap();
        let rec = grid_to_curves(&grid, d, &tol).unwrap();
        assert!(rec.dd_tau_residual < 1e-8, "d = {d}: {}", rec.dd_tau_residual);
        assert!(rec.dmd_sigma_residual < 1e-8, "d = {d}: {}", rec.dmd_sigma_residual);
        assert!(rec.conjugacy_residual < 1e-8, "d = {d}: {}", rec.conjugacy_residual);
        assert!(rec.autoconjugate);
        // Long enough to decide for d ≤ 2 only.
        assert_eq!(rec.generic_pair, if d < 3 { Some(true) } else { None });
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn generated_pairs_are_generic_and_autoconjugate(seed in any::<u64>(), d in 1usize..4) {
        let tol = Tolerance::default();
        let pair = generate_pair(d, 2 * d + 3, seed, &tol).unwrap();
        prop_assert!(autoconjugacy_residual(&pair.sigma, &pair.quadric, d, &tol).unwrap() < 1e-8);
        prop_assert!(autoconjugacy_residual(&pair.tau, &pair.quadric, d, &tol).unwrap() < 1e-8);
        prop_assert!(is_generic_pair(&pair.sigma, &pair.tau, &tol).unwrap());
    }
}
