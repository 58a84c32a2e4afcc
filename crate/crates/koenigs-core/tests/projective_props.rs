use approx::assert_abs_diff_eq;
use koenigs_core::projective::{
    central_projection, cross_ratio_collinear, join, meet, normalize, random_point, random_projective_map, rng,
};
use koenigs_core::{HPoint, Subspace, Tolerance, Vector};
use proptest::prelude::*;

fn collinear_quadruple(n: usize, seed: u64, params: [f64; 4]) -> [HPoint; 4] {
    let mut r = rng(seed);
    let (p, q) = (random_point(&mut r, n), random_point(&mut r, n));
    params.map(|s| HPoint::new(p.coords() + q.coords() * s).unwrap())
}

fn distinct(params: &[f64; 4]) -> bool {
    (0..4).all(|a| (a + 1..4).all(|b| (params[a] - params[b]).abs() > 0.05))
}

#[test]
fn harmonic_example_survives_a_fixed_map() {
    let tol = Tolerance::default();
    let pts = [[0.0, 1.0], [1.0, 1.0], [1.0, 0.0], [-1.0, 1.0]].map(|c| HPoint::from_slice(&c).unwrap());
    let cro = cross_ratio_collinear([&pts[0], &pts[1], &pts[2], &pts[3]], &tol).unwrap();
    assert_abs_diff_eq!(cro, -1.0, epsilon = 1e-12);
    let map = random_projective_map(1, 7);
    let moved = pts.clone().map(|p| map.apply(&p).unwrap());
    let again = cross_ratio_collinear([&moved[0], &moved[1], &moved[2], &moved[3]], &tol).unwrap();
    assert_abs_diff_eq!(again, -1.0, epsilon = 1e-10);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cross_ratio_is_invariant_under_maps(
        seed in any::<u64>(),
        map_seed in any::<u64>(),
        n in 1usize..5,
        params in prop::array::uniform4(-3.0f64..3.0),
    ) {
        prop_assume!(distinct(&params));
        let tol = Tolerance::default();
        let pts = collinear_quadruple(n, seed, params);
        let before = cross_ratio_collinear([&pts[0], &pts[1], &pts[2], &pts[3]], &tol).unwrap();
        let map = random_projective_map(n, map_seed);
        let moved = pts.clone().map(|p| map.apply(&p).unwrap());
        let after = cross_ratio_collinear([&moved[0], &moved[1], &moved[2], &moved[3]], &tol).unwrap();
        prop_assert!((before - after).abs() <= 1e-10 * before.abs().max(1.0));
    }

    #[test]
    fn cross_ratio_is_invariant_under_central_projection(
        seed in any::<u64>(),
        params in prop::array::uniform4(-3.0f64..3.0),
    ) {
        prop_assume!(distinct(&params));
        let tol = Tolerance::default();
        let pts = collinear_quadruple(3, seed, params);
        let mut r = rng(seed ^ 0x9e37);
        let center = Subspace::point(&random_point(&mut r, 3));
        let (a, b, c) = (random_point(&mut r, 3), random_point(&mut r, 3), random_point(&mut r, 3));
        let target = Subspace::span(&[&a, &b, &c], &tol).unwrap();
        prop_assume!(!target.contains(&center.as_point().unwrap(), &tol));
        let line = Subspace::span(&[&pts[0], &pts[1]], &tol).unwrap();
        prop_assume!(center.as_point().map(|p| line.residual(&p) > 0.05).unwrap());
        let projected: Vec<HPoint> =
            pts.iter().map(|p| central_projection(p, &center, &target, &tol).unwrap()).collect();
        let before = cross_ratio_collinear([&pts[0], &pts[1], &pts[2], &pts[3]], &tol).unwrap();
        let after =
            cross_ratio_collinear([&projected[0], &projected[1], &projected[2], &projected[3]], &tol).unwrap();
        prop_assert!((before - after).abs() <= 1e-9 * before.abs().max(1.0));
    }

    #[test]
    fn modular_identity(seed in any::<u64>(), n in 2usize..7, ka in 1usize..4, kb in 1usize..4, shared in 0usize..3) {
        let tol = Tolerance::default();
        let mut r = rng(seed);
        let common: Vec<HPoint> = (0..shared).map(|_| random_point(&mut r, n)).collect();
        let own_a: Vec<HPoint> = (0..ka).map(|_| random_point(&mut r, n)).collect();
        let own_b: Vec<HPoint> = (0..kb).map(|_| random_point(&mut r, n)).collect();
        let a: Vec<&HPoint> = common.iter().chain(own_a.iter()).collect();
        let b: Vec<&HPoint> = common.iter().chain(own_b.iter()).collect();
        let (a, b) = (Subspace::span(&a, &tol).unwrap(), Subspace::span(&b, &tol).unwrap());
        let j = join(&[&a, &b], &tol).unwrap();
        let m = meet(&a, &b, &tol).unwrap();
        prop_assert_eq!(j.proj_dim() + m.proj_dim(), a.proj_dim() + b.proj_dim());
    }

    #[test]
    fn join_and_meet_are_symmetric_and_idempotent(seed in any::<u64>(), n in 2usize..6) {
        let tol = Tolerance::default();
        let mut r = rng(seed);
        let pts: Vec<HPoint> = (0..4).map(|_| random_point(&mut r, n)).collect();
        let a = Subspace::span(&[&pts[0], &pts[1]], &tol).unwrap();
        let b = Subspace::span(&[&pts[1], &pts[2], &pts[3]], &tol).unwrap();
        prop_assert!(join(&[&a, &b], &tol).unwrap().distance(&join(&[&b, &a], &tol).unwrap()) < 1e-12);
        prop_assert!(meet(&a, &b, &tol).unwrap().distance(&meet(&b, &a, &tol).unwrap()) < 1e-12);
        prop_assert!(join(&[&a, &a], &tol).unwrap().distance(&a) < 1e-12);
        prop_assert!(meet(&a, &a, &tol).unwrap().distance(&a) < 1e-12);
    }

    #[test]
    fn normalization_is_idempotent(xs in prop::collection::vec(-1e3f64..1e3, 2..8)) {
        let v = Vector::from_vec(xs);
        prop_assume!(v.norm() > 1e-6);
        let once = normalize(v).unwrap();
        let twice = normalize(once.clone()).unwrap();
        prop_assert_eq!(once, twice);
    }
}
