//! Kœnigs d-grids: genericity, special touching conics, the special
//! inscribed quadric, the forward construction and the incidence theorem.

use alloc::format;
use alloc::vec::Vec;

use crate::conics::{self, Edge, KoenigsReport, Seed, TouchingInstance};
use crate::inscribed::{self, BuildOptions, InscribedReport};
use crate::linalg;
use crate::projective::{self, meet_point, HPoint, Subspace, Tolerance};
use crate::qnet::{self, Direction, QNet};
use crate::quadric::{Quadric, SubQuadric};
use crate::{Error, Result};

/// Bound on verification residuals of constructed special quadrics.
pub const VERIFY_BOUND: f64 = 1e-8;

/// Outcome of the parameter-space dimension scan.
#[derive(Debug, Clone, PartialEq)]
pub struct DGridReport {
    pub is_dgrid: bool,
    /// First parameter space of the wrong dimension, with that dimension.
    pub offending: Option<(Direction, usize, isize)>,
}

/// Every `P^h(j)` and `P^v(i)` is `d`-dimensional.
pub fn check_dgrid(net: &QNet, d: usize, tol: &Tolerance) -> DGridReport {
    for dir in [Direction::Row, Direction::Col] {
        for (k, s) in qnet::parameter_spaces(net, dir, tol).iter().enumerate() {
            if s.proj_dim() != d as isize {
                return DGridReport { is_dgrid: false, offending: Some((dir, k, s.proj_dim())) };
            }
        }
    }
    DGridReport { is_dgrid: true, offending: None }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridGenericityReport {
    pub sigma_dd_extensive: bool,
    pub pd_exists: bool,
    pub pd_nowhere_degenerate: bool,
    pub pd_degenerate: bool,
    pub pmd_exists: bool,
    pub pmd_nowhere_degenerate: bool,
    pub pmd_degenerate: bool,
    pub is_generic: bool,
}

/// `Σ_{d,d}`-extensive with `P_d` and `P_{−d}` existing and nowhere
/// Laplace degenerate.
pub fn is_generic_grid(net: &QNet, d: usize, tol: &Tolerance) -> Result<GridGenericityReport> {
    if d == 0 || net.cols() < d + 2 || net.rows() < d + 2 {
        return Err(Error::WindowTooSmall);
    }
    let sigma_dd_extensive = qnet::is_patch_extensive(net, d, d, tol);
    let (_, plus) = qnet::iterated_laplace(net, d as i32, tol);
    let (_, minus) = qnet::iterated_laplace(net, -(d as i32), tol);
    let is_generic = sigma_dd_extensive && plus.nowhere_degenerate && minus.nowhere_degenerate;
    Ok(GridGenericityReport {
        sigma_dd_extensive,
        pd_exists: plus.exists,
        pd_nowhere_degenerate: plus.exists && plus.nowhere_degenerate,
        pd_degenerate: plus.degenerate,
        pmd_exists: minus.exists,
        pmd_nowhere_degenerate: minus.exists && minus.nowhere_degenerate,
        pmd_degenerate: minus.degenerate,
        is_generic,
    })
}

/// Comparison of `P_d` with the intersection of `d+1` consecutive
/// parameter spaces.
#[derive(Debug, Clone, PartialEq)]
pub struct IntersectionFormula {
    /// Largest distance of `P_d(i,j)` from `P^v(i) ∩ … ∩ P^v(i+d)`.
    pub residual: f64,
    /// `d+2` consecutive parameter spaces never share a point.
    pub overshoot_empty: bool,
}

/// `P_d(i,j) = ⋂_{k=0..d} P^v(i+k)`; pass the transpose for `P_{−d}`.
pub fn intersection_formula(net: &QNet, d: usize, tol: &Tolerance) -> Result<IntersectionFormula> {
    let (pd, report) = qnet::iterated_laplace(net, d as i32, tol);
    let pd = pd.ok_or(Error::DegenerateNet { i: 0, j: 0, order: report.reached })?;
    let cols = qnet::parameter_spaces(net, Direction::Col, tol);
    let mut residual = 0.0f64;
    for i in 0..pd.cols() {
        let run: Vec<&Subspace> = cols[i..=i + d].iter().collect();
        let x = projective::meet_all(&run, tol)?;
        if x.proj_dim() != 0 {
            return Err(Error::NotGeneric(format!("{} parameter spaces meet in dimension {}", d + 1, x.proj_dim())));
        }
        let x = x.as_point()?;
        for j in 0..pd.rows() {
            residual = residual.max(x.distance(pd.get(i, j)));
        }
    }
    let mut overshoot_empty = true;
    for i in 0..cols.len().saturating_sub(d + 1) {
        let run: Vec<&Subspace> = cols[i..=i + d + 1].iter().collect();
        overshoot_empty &= projective::meet_all(&run, tol)?.is_empty();
    }
    Ok(IntersectionFormula { residual, overshoot_empty })
}

/// `D^h(j)` and `D^v(i)` of the diagonal net.
pub fn diagonal_parameter_spaces(net: &QNet, tol: &Tolerance) -> Result<(Vec<Subspace>, Vec<Subspace>)> {
    let d = qnet::diagonal_net(net, tol)?;
    Ok((qnet::parameter_spaces(&d, Direction::Row, tol), qnet::parameter_spaces(&d, Direction::Col, tol)))
}

/// Contacts `S(i,j) = D^h(j) ∩ P(i,j)∨P(i+1,j)` and
/// `T(i,j) = D^v(i) ∩ P(i,j)∨P(i,j+1)`; the last row and column use the
/// previous diagonal parameter space.
pub fn special_contacts(net: &QNet, tol: &Tolerance) -> Result<(QNet, QNet)> {
    let (dh, dv) = diagonal_parameter_spaces(net, tol)?;
    let s = QNet::from_fn(net.origin(), net.cols() - 1, net.rows(), |i, j| {
        let edge = projective::line(net.get(i, j), net.get(i + 1, j), tol)?;
        meet_point(&dh[j.min(dh.len() - 1)], &edge, tol)
    })?;
    let t = QNet::from_fn(net.origin(), net.cols(), net.rows() - 1, |i, j| {
        let edge = projective::line(net.get(i, j), net.get(i, j + 1), tol)?;
        meet_point(&dv[i.min(dv.len() - 1)], &edge, tol)
    })?;
    Ok((s, t))
}

/// Special touching conics of a generic grid and their inscribed quadric.
#[derive(Debug, Clone)]
pub struct SpecialStructure {
    pub d: usize,
    /// Contacts from the diagonal-net formulas.
    pub s: QNet,
    pub t: QNet,
    /// Instance propagated from the formula's `S(0,0)`.
    pub instance: TouchingInstance,
    /// Largest distance between propagated and formula contacts.
    pub formula_residual: f64,
    pub quadric: Quadric,
    /// Verification of the quadric against the whole grid.
    pub report: InscribedReport,
}

/// Special instance and special quadric of a generic `d`-grid.
pub fn special_structure(net: &QNet, d: usize, tol: &Tolerance) -> Result<SpecialStructure> {
    if net.cols() < d + 2 || net.rows() < d + 2 {
        return Err(Error::WindowTooSmall);
    }
    let (dh, dv) = diagonal_parameter_spaces(net, tol)?;
    if let Some(bad) = dh.iter().chain(dv.iter()).find(|s| s.proj_dim() != d as isize) {
        return Err(Error::NotGeneric(format!("diagonal parameter space of dimension {}", bad.proj_dim())));
    }
    let (s, t) = special_contacts(net, tol)?;
    let seed = Seed::Contact { face: (0, 0), edge: Edge::Bottom, point: s.get(0, 0).clone() };
    let instance = conics::propagate_instance(net, &seed, tol)?;
    let formula_residual = instance.s.distance(&s).max(instance.t.distance(&t));
    let quadric = window_quadric(net, &s, d, 0, 0, tol)?;
    let whole = SubQuadric::new(Subspace::full(net.ambient_dim()), quadric.matrix().clone())?;
    let report = inscribed::verify(net, &instance, &whole, tol)?;
    Ok(SpecialStructure { d, s, t, instance, formula_residual, quadric, report })
}

/// Inscribed quadric of the `Σ_{d,d}` window at `(i0, j0)` for the special
/// instance through the formula contact `S(i0, j0)`.
fn window_quadric(net: &QNet, s: &QNet, d: usize, i0: usize, j0: usize, tol: &Tolerance) -> Result<Quadric> {
    let w = net.window(i0, j0, d + 1, d + 1)?;
    let seed = Seed::Contact { face: (0, 0), edge: Edge::Bottom, point: s.get(i0, j0).clone() };
    let inst = conics::propagate_instance(&w, &seed, tol)?;
    inscribed::build(&w, &inst, BuildOptions::default(), tol)?.ambient()
}

/// The special inscribed quadric, checked against the whole grid and for
/// non-degeneracy.
pub fn special_inscribed_quadric(net: &QNet, d: usize, tol: &Tolerance) -> Result<Quadric> {
    let st = special_structure(net, d, tol)?;
    if !st.report.passes(VERIFY_BOUND) {
        return Err(Error::VerifyFailed { what: "special quadric", residual: st.report.max() });
    }
    if st.formula_residual > VERIFY_BOUND {
        return Err(Error::VerifyFailed { what: "special contacts", residual: st.formula_residual });
    }
    if st.quadric.signature(tol).zero > 0 {
        return Err(Error::NotGeneric("special quadric is degenerate".into()));
    }
    Ok(st.quadric)
}

/// Special quadric computed from the `Σ_{d,d}` window at `(i0, j0)`.
pub fn special_quadric_from_window(net: &QNet, d: usize, i0: usize, j0: usize, tol: &Tolerance) -> Result<Quadric> {
    let (s, _) = special_contacts(net, tol)?;
    window_quadric(net, &s, d, i0, j0, tol)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpecialGridReport {
    /// Every `D^h(j)` and `D^v(i)` is `(d−1)`-dimensional.
    pub special: bool,
    /// Only a `Σ_{d,d}` window: the dimensions hold trivially.
    pub window_too_small: bool,
}

pub fn is_special_grid(net: &QNet, d: usize, tol: &Tolerance) -> Result<SpecialGridReport> {
    let window_too_small = net.cols() <= d + 1 && net.rows() <= d + 1;
    let (dh, dv) = diagonal_parameter_spaces(net, tol)?;
    let special = dh.iter().chain(dv.iter()).all(|s| s.proj_dim() == d as isize - 1);
    Ok(SpecialGridReport { special, window_too_small })
}

/// Largest dimension among the contact spaces `S^h(j)` and `T^v(i)` of an
/// instance; `d − 1` exactly for special instances.
pub fn contact_space_dims(inst: &TouchingInstance, tol: &Tolerance) -> (isize, isize) {
    let dims = |net: &QNet, dir| qnet::parameter_spaces(net, dir, tol).iter().map(|s| s.proj_dim()).collect::<Vec<_>>();
    let all: Vec<isize> = dims(&inst.s, Direction::Row).into_iter().chain(dims(&inst.t, Direction::Col)).collect();
    (*all.iter().min().unwrap_or(&-1), *all.iter().max().unwrap_or(&-1))
}

/// Side to which [`extend_grid`] adds a line of vertices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Top,
    Right,
}

/// Add a row on top (or a column on the right) to a grid with an inscribed
/// quadric.
///
/// `point` is the new vertex above `P(0, b)` (or right of `P(a, 0)`) and
/// must lie in that parameter space. `contacts` are the contact spaces
/// `T^v(i)` for every column (or `S^h(j)` for every row) of the instance the
/// quadric belongs to. Each new vertex lies on the second tangent from the
/// previous new vertex to the section of the quadric with the new face's
/// plane.
pub fn extend_grid(
    net: &QNet,
    side: Side,
    point: &HPoint,
    q: &Quadric,
    contacts: &[Subspace],
    tol: &Tolerance,
) -> Result<QNet> {
    match side {
        Side::Top => extend_top(net, point, q, contacts, tol),
        Side::Right => Ok(extend_top(&net.transpose(), point, q, contacts, tol)?.transpose()),
    }
}

fn extend_top(net: &QNet, point: &HPoint, q: &Quadric, contacts: &[Subspace], tol: &Tolerance) -> Result<QNet> {
    let (cols, rows) = (net.cols(), net.rows());
    if contacts.len() != cols {
        return Err(Error::InvalidInput("one contact space per column expected".into()));
    }
    let b = rows - 1;
    let r = qnet::parameter_space(net, Direction::Col, 0, tol)?.residual(point);
    if r > tol.residual_abs.max(1e-9) {
        return Err(Error::NotInParameterSpace { residual: r });
    }
    let mut new_row = Vec::with_capacity(cols);
    new_row.push(point.clone());
    let mut touch = meet_point(&contacts[0], &projective::line(net.get(0, b), point, tol)?, tol)?;
    for i in 0..cols - 1 {
        let w = new_row[i].clone();
        let plane = Subspace::span(&[net.get(i, b), &w, net.get(i + 1, b)], tol)?;
        if plane.proj_dim() != 2 {
            return Err(Error::TangentConstructionFailed);
        }
        let next_touch = meet_point(&contacts[i + 1], &plane, tol)?;
        let conic = q.restrict(&plane, tol)?.matrix;
        if linalg::rank(&conic, tol.rank_rel) < 3 {
            return Err(Error::TangentConstructionFailed);
        }
        let other = second_tangent_point(&conic, &plane, &w, &touch, tol)?;
        let tangent = projective::line(&w, &other, tol)?;
        let rail = projective::line(&next_touch, net.get(i + 1, b), tol)?;
        new_row.push(meet_point(&tangent, &rail, tol).map_err(|_| Error::TangentConstructionFailed)?);
        touch = next_touch;
    }
    let mut pts = net.points().to_vec();
    pts.extend(new_row);
    QNet::new(net.origin(), cols, rows + 1, pts)
}

/// Touching point of the tangent from `w` other than the one at `known`:
/// the second intersection of the polar line of `w` with the conic.
fn second_tangent_point(
    conic: &crate::Matrix,
    plane: &Subspace,
    w: &HPoint,
    known: &HPoint,
    tol: &Tolerance,
) -> Result<HPoint> {
    let wl = plane.local(w.coords());
    let kl = plane.local(known.coords());
    let row = crate::Matrix::from_row_slice(1, 3, (conic * &wl).as_slice());
    let polar = linalg::null_space(&row, tol.rank_rel);
    if polar.ncols() != 2 {
        return Err(Error::TangentConstructionFailed);
    }
    // Direction on the polar line farthest from the known touching point.
    let v = (0..2)
        .map(|k| {
            let c = polar.column(k).into_owned();
            let off = &c - &kl * kl.dot(&c) / kl.norm_squared();
            (off.norm(), off)
        })
        .max_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(_, v)| v)
        .ok_or(Error::TangentConstructionFailed)?;
    let vv = v.dot(&(conic * &v));
    if linalg::negligible(vv.abs(), linalg::fro(conic) * v.norm_squared(), tol.rank_rel) {
        return Err(Error::TangentConstructionFailed);
    }
    let lambda = -2.0 * kl.dot(&(conic * &v)) / vv;
    HPoint::new(plane.basis() * (kl + v * lambda))
}

/// Outcome of the incidence theorem on a `Σ_{d+2,d+2}` grid.
#[derive(Debug, Clone)]
pub struct IncidenceReport {
    /// Result of the Kœnigs test on the whole grid.
    pub koenigs: KoenigsReport,
    /// Closure residual of the special instance on the whole grid.
    pub closure_residual: f64,
    /// Distance of the top-right conic from the section of the special
    /// quadric of the lower-left `Σ_{d+1,d+1}` window.
    pub final_conic_residual: f64,
    pub holds: bool,
}

/// If both `Σ_{d+2} × Σ_{d+1}` and `Σ_{d+1} × Σ_{d+2}` restrictions are
/// Kœnigs, the whole generic grid is.
pub fn incidence_check(net: &QNet, d: usize, tol: &Tolerance) -> Result<IncidenceReport> {
    if net.cols() != d + 3 || net.rows() != d + 3 {
        return Err(Error::InvalidInput(format!("incidence check needs a {0}×{0} grid", d + 3)));
    }
    let south = net.window(0, 0, d + 3, d + 2)?;
    let west = net.window(0, 0, d + 2, d + 3)?;
    for (name, w) in [("bottom", &south), ("left", &west)] {
        if !conics::is_koenigs(w, tol)?.is_koenigs() {
            return Err(Error::HypothesisFailed(format!("{name} restriction is not Kœnigs")));
        }
    }
    if !is_generic_grid(net, d, tol)?.is_generic {
        return Err(Error::HypothesisFailed("grid is not generic".into()));
    }
    let koenigs = conics::is_koenigs(net, tol)?;
    let corner = net.window(0, 0, d + 2, d + 2)?;
    let q = special_structure(&corner, d, tol)?.quadric;
    let (s, _) = special_contacts(&corner, tol)?;
    let seed = Seed::Contact { face: (0, 0), edge: Edge::Bottom, point: s.get(0, 0).clone() };
    let inst = conics::propagate(net, &seed, tol)?;
    let last = inst.conic(d + 1, d + 1);
    let section = q.restrict(&last.plane, tol)?.matrix;
    let final_conic_residual = linalg::form_distance(&last.primal(), &section);
    let holds = koenigs.is_koenigs() && inst.closure_residual <= tol.residual_abs.max(VERIFY_BOUND);
    Ok(IncidenceReport { koenigs, closure_residual: inst.closure_residual, final_conic_residual, holds })
}
