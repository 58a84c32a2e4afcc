use koenigs_core::linalg::{self, form_distance};
use koenigs_core::projective::{random_point, random_vector, rng};
use koenigs_core::quadric::{fit_quadric_oracle, glue_pencil, glue_residual};
use koenigs_core::{HPoint, Matrix, Quadric, Subspace, Tolerance, Vector};
use proptest::prelude::*;
use rand_chacha::ChaCha8Rng;

/// `Aᵀ diag(±1) A` with a random `A` and the given number of negative
/// squares.
fn random_quadric(r: &mut ChaCha8Rng, n: usize, minus: usize) -> Quadric {
    let a = Matrix::from_fn(n + 1, n + 1, |_, _| rand::Rng::gen_range(r, -1.0..1.0));
    let d = Matrix::from_diagonal(&Vector::from_fn(n + 1, |k, _| if k < minus { -1.0 } else { 1.0 }));
    Quadric::new(a.transpose() * d * a).unwrap()
}

/// A point of `q` on a random line, when the line meets it.
fn isotropic_point(r: &mut ChaCha8Rng, q: &Quadric) -> Option<HPoint> {
    let n1 = q.matrix().nrows();
    let (u, v) = (random_vector(r, n1), random_vector(r, n1));
    let (a, b, c) = (q.eval_vec(&u, &u), q.eval_vec(&u, &v), q.eval_vec(&v, &v));
    let disc = b * b - a * c;
    if disc < 1e-6 || c.abs() < 1e-6 {
        return None;
    }
    // φ(u + s v) = a + 2bs + cs² = 0
    let s = (-b + disc.sqrt()) / c;
    HPoint::new(u + v * s).ok()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn signature_is_invariant_under_congruence(seed in any::<u64>(), n in 1usize..6, minus in 0usize..3) {
        let tol = Tolerance::default();
        let mut r = rng(seed);
        let q = random_quadric(&mut r, n, minus.min(n + 1));
        let g = koenigs_core::projective::random_projective_map(n, seed ^ 1);
        let pulled = q.pull_back(g.matrix()).unwrap();
        prop_assert_eq!(q.signature(&tol), pulled.signature(&tol));
    }

    #[test]
    fn dense_sample_determines_a_full_dimensional_quadric(seed in any::<u64>(), n in 2usize..5) {
        let tol = Tolerance::default();
        let mut r = rng(seed);
        let q = random_quadric(&mut r, n, 1);
        let need = 3 * linalg::sym_dim(n + 1);
        let mut pts = Vec::new();
        while pts.len() < need {
            if let Some(p) = isotropic_point(&mut r, &q) {
                pts.push(p);
            }
        }
        let fit = fit_quadric_oracle(&pts, &[], &tol).unwrap();
        prop_assert_eq!(fit.len(), 1);
        prop_assert!(form_distance(q.matrix(), fit[0].matrix()) < 1e-8);
    }

    #[test]
    fn glued_members_restrict_to_both_forms(seed in any::<u64>(), n in 3usize..6, t in -3.0f64..3.0) {
        let tol = Tolerance::default();
        let mut r = rng(seed);
        let q = random_quadric(&mut r, n, 1);
        let hyperplane = |r: &mut ChaCha8Rng| {
            let pts: Vec<HPoint> = (0..n).map(|_| random_point(r, n)).collect();
            Subspace::span(&pts.iter().collect::<Vec<_>>(), &tol).unwrap()
        };
        let (e, f) = (hyperplane(&mut r), hyperplane(&mut r));
        let restrict = |s: &Subspace| s.basis().transpose() * q.matrix() * s.basis();
        let (qe, qf) = (restrict(&e), restrict(&f));
        prop_assume!(Quadric::new(qe.clone()).unwrap().is_full_dimensional(&tol));
        prop_assume!(Quadric::new(qf.clone()).unwrap().is_full_dimensional(&tol));
        let ef = koenigs_core::projective::meet(&e, &f, &tol).unwrap();
        prop_assume!(Quadric::new(restrict(&ef)).unwrap().is_full_dimensional(&tol));
        let pencil = glue_pencil(&e, &f, &qe, &qf, &tol).unwrap();
        let scale = linalg::fro(&(e.basis().transpose() * &pencil.q1 * e.basis())) / linalg::fro(&qe);
        prop_assert!(glue_residual(&pencil, &e, &f, &(qe * scale), &(qf * scale), 1.0, t) < 1e-10);
        let member = pencil.member(1.0, t).unwrap();
        prop_assert!(member.is_full_dimensional(&tol));
    }

    #[test]
    fn tangency_along_implies_isotropy(seed in any::<u64>(), extra in 0usize..3) {
        let tol = Tolerance::default();
        let mut r = rng(seed);
        let q = random_quadric(&mut r, 4, 2);
        let x = loop {
            if let Some(p) = isotropic_point(&mut r, &q) {
                break p;
            }
        };
        let inner = Subspace::point(&x);
        let tangent = q.polar_of_point(&x, &tol).unwrap();
        let mut gens = vec![x.clone()];
        for _ in 0..extra {
            gens.push(tangent.point_at(&random_vector(&mut r, tangent.basis().ncols())).unwrap());
        }
        let outer = Subspace::span(&gens.iter().collect::<Vec<_>>(), &tol).unwrap();
        prop_assert!(q.tangent_along(&outer, &inner, &tol).unwrap());
        prop_assert!(q.is_isotropic(&inner, &tol).unwrap());
        // A random point is neither.
        let y = random_point(&mut r, 4);
        let off = Subspace::point(&y);
        let ok = q.tangent_along(&off, &off, &tol).unwrap();
        prop_assert!(!ok || q.is_isotropic(&off, &tol).unwrap());
    }
}
