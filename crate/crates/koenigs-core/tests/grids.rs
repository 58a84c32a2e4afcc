use koenigs_core::autoconjugate::{generate_pair, curves_to_grid, grid_to_curves};
use koenigs_core::conics::{is_koenigs, propagate, Seed};
use koenigs_core::fixtures::{autoconjugate_grid, perturb_corner, special_grid, tangent_grid};
use koenigs_core::grid::{
    check_dgrid, contact_space_dims, extend_grid, incidence_check, intersection_formula, is_generic_grid,
    is_special_grid, special_inscribed_quadric, special_quadric_from_window, special_structure, Side,
};
use koenigs_core::linalg::form_distance;
use koenigs_core::projective::{random_vector, rng};
use koenigs_core::qnet::{diagonal_net, parameter_spaces, Direction};
use koenigs_core::{Error, Subspace, Tolerance};

#[test]
fn autoconjugate_grids_are_generic_dgrids() {
    let tol = Tolerance::default();
    for d in 1..=3 {
        let (_, grid) = autoconjugate_grid(d, 2 * d + 4, 42, &tol).unwrap();
        assert!(check_dgrid(&grid, d, &tol).is_dgrid, "d = {d}");
        let g = is_generic_grid(&grid, d, &tol).unwrap();
        assert!(g.is_generic, "d = {d}: {g:?}");
        for net in [grid.clone(), grid.transpose()] {
            let f = intersection_formula(&net, d, &tol).unwrap();
            assert!(f.residual < 1e-8 && f.overshoot_empty, "d = {d}: {f:?}");
        }
    }
}

#[test]
fn diagonal_net_of_a_dgrid_is_a_dgrid() {
    let tol = Tolerance::default();
    let (_, grid) = autoconjugate_grid(2, 8, 42, &tol).unwrap();
    let dn = diagonal_net(&grid, &tol).unwrap();
    assert!(check_dgrid(&dn, 2, &tol).is_dgrid);
}

#[test]
fn special_quadric_is_the_generating_quadric() {
    let tol = Tolerance::default();
    for d in 1..=3 {
        let (pair, grid) = autoconjugate_grid(d, 2 * d + 4, 7, &tol).unwrap();
        let st = special_structure(&grid, d, &tol).unwrap();
        assert!(st.formula_residual < 1e-8, "d = {d}: {}", st.formula_residual);
        assert!(st.report.passes(1e-8), "d = {d}: {:?}", st.report);
        let dim = d as isize - 1;
        assert_eq!(contact_space_dims(&st.instance, &tol), (dim, dim));
        let q = special_inscribed_quadric(&grid, d, &tol).unwrap();
        assert!(form_distance(q.matrix(), pair.quadric.matrix()) < 1e-8);
    }
}

#[test]
fn special_quadric_does_not_depend_on_the_window() {
    let tol = Tolerance::default();
    let (_, grid) = autoconjugate_grid(2, 8, 3, &tol).unwrap();
    let a = special_quadric_from_window(&grid, 2, 0, 0, &tol).unwrap();
    let b = special_quadric_from_window(&grid, 2, 1, 1, &tol).unwrap();
    let c = special_quadric_from_window(&grid, 2, 2, 0, &tol).unwrap();
    assert!(form_distance(a.matrix(), b.matrix()) < 1e-8);
    assert!(form_distance(a.matrix(), c.matrix()) < 1e-8);
}

#[test]
fn other_instances_have_full_contact_spaces() {
    let tol = Tolerance::default();
    let (_, grid) = autoconjugate_grid(2, 8, 42, &tol).unwrap();
    let inst = propagate(&grid, &Seed::Parameter { face: (0, 0), t: 0.37 }, &tol).unwrap();
    assert_eq!(contact_space_dims(&inst, &tol), (2, 2));
}

#[test]
fn tangent_grid_special_quadric_is_the_circle() {
    let tol = Tolerance::default();
    let net = tangent_grid(6, 6, 2).unwrap();
    let q = special_inscribed_quadric(&net, 1, &tol).unwrap();
    let circle = koenigs_core::fixtures::unit_circle();
    assert!(form_distance(q.matrix(), circle.matrix()) < 1e-8);
}

#[test]
fn extension_keeps_the_grid_koenigs() {
    let tol = Tolerance::default();
    let (_, grid) = autoconjugate_grid(2, 8, 42, &tol).unwrap();
    let st = special_structure(&grid, 2, &tol).unwrap();
    let mut r = rng(17);
    for side in [Side::Top, Side::Right] {
        let (dir, corner, contacts) = match side {
            Side::Top => (Direction::Col, 0, parameter_spaces(&st.instance.t, Direction::Col, &tol)),
            Side::Right => (Direction::Row, 0, parameter_spaces(&st.instance.s, Direction::Row, &tol)),
        };
        let space = koenigs_core::qnet::parameter_space(&grid, dir, corner, &tol).unwrap();
        let point = space.point_at(&random_vector(&mut r, space.basis().ncols())).unwrap();
        let bigger = extend_grid(&grid, side, &point, &st.quadric, &contacts, &tol).unwrap();
        assert_eq!(bigger.cols() * bigger.rows(), grid.cols() * grid.rows() + grid.cols().max(grid.rows()));
        assert!(is_koenigs(&bigger, &tol).unwrap().is_koenigs(), "{side:?}");
        assert!(check_dgrid(&bigger, 2, &tol).is_dgrid, "{side:?}");
    }
}

#[test]
fn extension_reproduces_the_continuation() {
    let tol = Tolerance::default();
    let pair = generate_pair(2, 9, 5, &tol).unwrap();
    let full = curves_to_grid(&pair, &tol).unwrap();
    let (c, r) = (full.cols(), full.rows());
    for side in [Side::Top, Side::Right] {
        let (part, point) = match side {
            Side::Top => (full.window(0, 0, c, r - 1).unwrap(), full.get(0, r - 1).clone()),
            Side::Right => (full.window(0, 0, c - 1, r).unwrap(), full.get(c - 1, 0).clone()),
        };
        let st = special_structure(&part, 2, &tol).unwrap();
        let contacts: Vec<Subspace> = match side {
            Side::Top => parameter_spaces(&st.instance.t, Direction::Col, &tol),
            Side::Right => parameter_spaces(&st.instance.s, Direction::Row, &tol),
        };
        let grown = extend_grid(&part, side, &point, &st.quadric, &contacts, &tol).unwrap();
        assert!(grown.distance(&full) < 1e-8, "{side:?}: {}", grown.distance(&full));
    }
}

#[test]
fn incidence_closes_the_last_face() {
    let tol = Tolerance::default();
    let (_, grid) = autoconjugate_grid(2, 8, 42, &tol).unwrap();
    let r2 = incidence_check(&grid.window(0, 0, 5, 5).unwrap(), 2, &tol).unwrap();
    assert!(r2.holds, "{r2:?}");
    let r1 = incidence_check(&tangent_grid(4, 4, 0).unwrap(), 1, &tol).unwrap();
    assert!(r1.holds, "{r1:?}");
    assert!(r1.final_conic_residual < 1e-8 && r2.final_conic_residual < 1e-8);
}

#[test]
fn incidence_needs_koenigs_restrictions() {
    let tol = Tolerance::default();
    let net = perturb_corner(&tangent_grid(4, 4, 0).unwrap(), 1e-3, 1, &tol).unwrap();
    assert!(matches!(incidence_check(&net, 1, &tol), Err(Error::HypothesisFailed(_))));
}

#[test]
fn special_grids_have_degenerate_transforms() {
    let tol = Tolerance::default();
    let (_, grid) = special_grid(2, 8, 42, &tol).unwrap();
    assert!(is_special_grid(&grid, 2, &tol).unwrap().special);
    assert!(is_koenigs(&grid, &tol).unwrap().is_koenigs());
    assert!(check_dgrid(&grid, 2, &tol).is_dgrid);
    let g = is_generic_grid(&grid, 2, &tol).unwrap();
    assert!(g.pd_degenerate && g.pmd_degenerate && !g.is_generic, "{g:?}");
    assert!(matches!(grid_to_curves(&grid, 2, &tol), Err(Error::NotGeneric(_))));
    let (_, generic) = autoconjugate_grid(2, 8, 42, &tol).unwrap();
    assert!(!is_special_grid(&generic, 2, &tol).unwrap().special);
}
