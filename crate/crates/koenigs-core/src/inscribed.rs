//! Inscribed quadrics of extensive Kœnigs nets.
//!
//! The quadric is built by induction over the patch: the quadrics of two
//! overlapping subpatches live in two hyperplanes of the patch's join, are
//! glued into a pencil, and the member through an auxiliary point of a
//! contact space is kept.

use alloc::vec::Vec;

use rand::Rng;

use crate::conics::TouchingInstance;
use crate::linalg;
use crate::projective::{self, HPoint, Subspace, Tolerance};
use crate::qnet::{self, Direction, QNet, Sign};
use crate::quadric::{self, Quadric, SubQuadric};
use crate::{Error, Matrix, Result, Vector};

/// Direction of an induction step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Split {
    /// South and north halves, overlapping in all rows but one.
    Rows,
    /// West and east halves.
    Cols,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct BuildOptions {
    /// Direction of the first split; later steps split the longer side,
    /// ties along rows.
    pub first_split: Option<Split>,
    /// Seed for the random fallback of the auxiliary point.
    pub seed: u64,
}

/// An inscribed quadric on the join of the patch.
#[derive(Debug, Clone, PartialEq)]
pub struct Inscribed {
    pub quadric: SubQuadric,
    /// Induction steps whose auxiliary point fell in the pencil's base locus.
    pub base_locus_steps: usize,
}

impl Inscribed {
    /// The quadric as an ambient form, a cone over the complement of the
    /// join when the join is not the whole space.
    pub fn ambient(&self) -> Result<Quadric> {
        let b = self.quadric.space.basis();
        Quadric::new(b * &self.quadric.form * b.transpose())
    }
}

/// Restriction of a subspace quadric to a smaller subspace, in that
/// subspace's coordinates.
pub fn restrict_sub(q: &SubQuadric, inner: &Subspace) -> Matrix {
    let g = q.space.basis().transpose() * inner.basis();
    g.transpose() * &q.form * g
}

/// Build the inscribed quadric of an extensive net for a touching instance.
pub fn build(net: &QNet, inst: &TouchingInstance, opts: BuildOptions, tol: &Tolerance) -> Result<Inscribed> {
    if !qnet::is_extensive(net, tol) {
        return Err(Error::NotExtensive);
    }
    let (a, b) = net.extent();
    if a == 0 || b == 0 {
        return Err(Error::WindowTooSmall);
    }
    if opts.first_split == Some(Split::Rows) && b < 2 || opts.first_split == Some(Split::Cols) && a < 2 {
        return Err(Error::InvalidInput("forced split on a side of length one".into()));
    }
    let mut ctx = Ctx { net, inst, tol, rng: projective::rng(opts.seed), base_locus_steps: 0 };
    let q = ctx.window(0, 0, a, b, opts.first_split)?;
    Ok(Inscribed { quadric: q, base_locus_steps: ctx.base_locus_steps })
}

struct Ctx<'a> {
    net: &'a QNet,
    inst: &'a TouchingInstance,
    tol: &'a Tolerance,
    rng: rand_chacha::ChaCha8Rng,
    base_locus_steps: usize,
}

impl Ctx<'_> {
    fn window(&mut self, i0: usize, j0: usize, a: usize, b: usize, force: Option<Split>) -> Result<SubQuadric> {
        if a == 1 && b == 1 {
            return Ok(self.inst.conic(i0, j0).conic());
        }
        let split = force.unwrap_or(if b >= a { Split::Rows } else { Split::Cols });
        let join = self.net.window(i0, j0, a + 1, b + 1)?.join(self.tol);
        let (lo, hi, contacts, lo_contacts, hi_contacts) = match split {
            Split::Rows => {
                let lo = self.window(i0, j0, a, b - 1, None)?;
                let hi = self.window(i0, j0 + 1, a, b - 1, None)?;
                let t: Vec<&HPoint> = (j0..j0 + b).map(|j| self.inst.t.get(i0, j)).collect();
                (lo, hi, t.clone(), t[..b - 1].to_vec(), t[1..].to_vec())
            }
            Split::Cols => {
                let lo = self.window(i0, j0, a - 1, b, None)?;
                let hi = self.window(i0 + 1, j0, a - 1, b, None)?;
                let s: Vec<&HPoint> = (i0..i0 + a).map(|i| self.inst.s.get(i, j0)).collect();
                (lo, hi, s.clone(), s[..a - 1].to_vec(), s[1..].to_vec())
            }
        };
        let local = |s: &Subspace| Subspace::from_orthonormal(join.basis().transpose() * s.basis());
        let (e, f) = (local(&lo.space), local(&hi.space));
        let pencil = quadric::glue_pencil(&e, &f, &lo.form, &hi.form, self.tol)?;
        let contact = Subspace::span(&contacts, self.tol)?;
        let sub_lo = Subspace::span(&lo_contacts, self.tol)?;
        let sub_hi = Subspace::span(&hi_contacts, self.tol)?;
        let y = self.auxiliary_point(&contact, &sub_lo, &sub_hi)?;
        let y_local = HPoint::new(join.basis().transpose() * y.coords())?;
        let member = pencil.member_through(&y_local, self.tol)?;
        if member.base_locus {
            self.base_locus_steps += 1;
        }
        SubQuadric::new(join, member.quadric.matrix().clone())
    }

    /// A point of `space` as far as possible from both subspaces: basis
    /// vectors first, then pairwise sums, then random combinations.
    fn auxiliary_point(&mut self, space: &Subspace, lo: &Subspace, hi: &Subspace) -> Result<HPoint> {
        const GOOD: f64 = 0.1;
        const RANDOM_TRIES: usize = 64;
        let basis = space.basis();
        let k = basis.ncols();
        let mut candidates: Vec<Vector> = (0..k).map(|c| basis.column(c).into_owned()).collect();
        for p in 0..k {
            for q in p + 1..k {
                candidates.push(basis.column(p) + basis.column(q));
            }
        }
        let score = |v: &Vector| lo.residual_vec(v).min(hi.residual_vec(v));
        let mut best: Option<(f64, Vector)> = None;
        let consider = |v: Vector, best: &mut Option<(f64, Vector)>| {
            let s = score(&v);
            if best.as_ref().is_none_or(|(b, _)| s > *b) {
                *best = Some((s, v));
            }
        };
        for v in candidates {
            consider(v, &mut best);
        }
        let mut tries = 0;
        while best.as_ref().is_none_or(|(s, _)| *s < GOOD) && tries < RANDOM_TRIES {
            let c = Vector::from_fn(k, |_, _| self.rng.gen_range(-1.0..1.0));
            consider(basis * c, &mut best);
            tries += 1;
        }
        match best {
            Some((s, v)) if s > libm::sqrt(self.tol.rank_rel) => HPoint::new(v),
            _ => Err(Error::YSelectionFailed),
        }
    }
}

/// Largest residuals of the defining conditions of an inscribed quadric.
#[derive(Debug, Clone, PartialEq)]
pub struct InscribedReport {
    /// Largest distance, up to scale, of `Q ∩ Π(i,j)` from the face conic.
    pub conic_residual: f64,
    /// Largest restriction norm on the contact spaces `S^h(j)`, `T^v(i)`.
    pub isotropy_residual: f64,
    /// Largest `‖φ(contact space, parameter space)‖`.
    pub tangency_residual: f64,
    /// Every parameter space is tangent along its contact space.
    pub all_tangent: bool,
}

impl InscribedReport {
    pub fn max(&self) -> f64 {
        self.conic_residual.max(self.isotropy_residual).max(self.tangency_residual)
    }

    pub fn passes(&self, bound: f64) -> bool {
        self.all_tangent && self.max() <= bound
    }
}

fn normalized(q: &SubQuadric) -> SubQuadric {
    let n = linalg::fro(&q.form).max(f64::MIN_POSITIVE);
    SubQuadric { space: q.space.clone(), form: &q.form / n }
}

/// Check a candidate quadric against a net and a touching instance.
pub fn verify(net: &QNet, inst: &TouchingInstance, q: &SubQuadric, tol: &Tolerance) -> Result<InscribedReport> {
    let q = normalized(q);
    if q.space.ambient_dim() != net.ambient_dim() {
        return Err(Error::MixedAmbient { left: q.space.ambient_dim(), right: net.ambient_dim() });
    }
    let mut conic_residual = 0.0f64;
    for c in &inst.conics {
        let here = restrict_sub(&q, &c.plane);
        conic_residual = conic_residual.max(linalg::form_distance(&c.primal(), &here));
    }
    let mut iso = 0.0f64;
    let mut tan = 0.0f64;
    let mut all_tangent = true;
    let pairs = contact_and_parameter_spaces(net, inst, tol)?;
    for (contact, param) in &pairs {
        iso = iso.max(linalg::fro(&restrict_sub(&q, contact)));
        let gc = q.space.basis().transpose() * contact.basis();
        let gp = q.space.basis().transpose() * param.basis();
        let r = linalg::fro(&(gc.transpose() * &q.form * gp));
        tan = tan.max(r);
        all_tangent &= r <= tol.residual_abs.max(1e-8);
    }
    Ok(InscribedReport { conic_residual, isotropy_residual: iso, tangency_residual: tan, all_tangent })
}

/// `(S^h(j), P^h(j))` for every row and `(T^v(i), P^v(i))` for every column.
pub fn contact_and_parameter_spaces(
    net: &QNet,
    inst: &TouchingInstance,
    tol: &Tolerance,
) -> Result<Vec<(Subspace, Subspace)>> {
    let mut out = Vec::new();
    for j in 0..net.rows() {
        out.push((qnet::parameter_space(&inst.s, Direction::Row, j, tol)?, qnet::parameter_space(net, Direction::Row, j, tol)?));
    }
    for i in 0..net.cols() {
        out.push((qnet::parameter_space(&inst.t, Direction::Col, i, tol)?, qnet::parameter_space(net, Direction::Col, i, tol)?));
    }
    Ok(out)
}

/// Singular points of an inscribed quadric against the intersections of
/// the contact spaces.
#[derive(Debug, Clone, PartialEq)]
pub struct SingularAnalysis {
    /// `X = ⋂ S^h(j)`.
    pub x: Subspace,
    /// `Y = ⋂ T^v(i)`.
    pub y: Subspace,
    /// Singular locus of the quadric inside the join.
    pub singular: Subspace,
    pub x_singular: bool,
    pub y_singular: bool,
    /// `dim X ≥ a−b−1` and `dim Y ≥ b−a−1`, and the sharper `dim X ≥ a−b`
    /// (resp. `dim Y ≥ b−a`) when some singular point lies outside `X`
    /// (resp. `Y`).
    pub bounds_ok: bool,
}

pub fn singular_analysis(
    net: &QNet,
    inst: &TouchingInstance,
    q: &SubQuadric,
    tol: &Tolerance,
) -> Result<SingularAnalysis> {
    let (a, b) = (net.extent().0 as isize, net.extent().1 as isize);
    let q = normalized(q);
    let s_spaces = qnet::parameter_spaces(&inst.s, Direction::Row, tol);
    let t_spaces = qnet::parameter_spaces(&inst.t, Direction::Col, tol);
    let x = projective::meet_all(&s_spaces.iter().collect::<Vec<_>>(), tol)?;
    let y = projective::meet_all(&t_spaces.iter().collect::<Vec<_>>(), tol)?;
    let kernel = linalg::null_space(&q.form, tol.rank_rel);
    let singular = if kernel.ncols() == 0 {
        Subspace::empty(q.space.ambient_dim())
    } else {
        Subspace::from_columns(&(q.space.basis() * kernel), tol)
    };
    let inside = |s: &Subspace| s.is_empty() || singular.contains_subspace(s, tol);
    let (x_singular, y_singular) = (inside(&x), inside(&y));
    let beyond = |s: &Subspace| singular.proj_dim() > s.proj_dim();
    let mut bounds_ok = x.proj_dim() >= a - b - 1 && y.proj_dim() >= b - a - 1;
    if a >= b && beyond(&x) {
        bounds_ok &= x.proj_dim() >= a - b;
    }
    if b >= a && beyond(&y) {
        bounds_ok &= y.proj_dim() >= b - a;
    }
    Ok(SingularAnalysis { x, y, singular, x_singular, y_singular, bounds_ok })
}

/// Residuals of the diagonal-net statements.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalReport {
    /// Largest restriction norm of `(D_k)^v(i)` and `(D_{−k})^h(j)` on the
    /// quadric, `1 ≤ k ≤ k_max`.
    pub isotropy_residual: f64,
    /// Largest distance of `D₁(i,j)` from `T^v(i+1)` and of `D₋₁(i,j)` from
    /// `S^h(j+1)`.
    pub contact_residual: f64,
    /// Number of transforms checked.
    pub orders: usize,
}

pub fn diagonal_corollary_check(
    net: &QNet,
    inst: &TouchingInstance,
    q: &SubQuadric,
    k_max: usize,
    tol: &Tolerance,
) -> Result<DiagonalReport> {
    let q = normalized(q);
    let mut report = DiagonalReport { isotropy_residual: 0.0, contact_residual: 0.0, orders: 0 };
    if k_max == 0 {
        return Ok(report);
    }
    let d = qnet::diagonal_net(net, tol)?;
    for sign in [Sign::Plus, Sign::Minus] {
        let mut cur = d.clone();
        for k in 1..=k_max {
            cur = qnet_step(&cur, sign, k, tol)?;
            let dir = if sign == Sign::Plus { Direction::Col } else { Direction::Row };
            for space in qnet::parameter_spaces(&cur, dir, tol) {
                iso_update(&mut report.isotropy_residual, &q, &space);
            }
            report.orders += 1;
            if k == 1 {
                for j in 0..cur.rows() {
                    for i in 0..cur.cols() {
                        let target = match sign {
                            Sign::Plus => qnet::parameter_space(&inst.t, Direction::Col, i + 1, tol)?,
                            Sign::Minus => qnet::parameter_space(&inst.s, Direction::Row, j + 1, tol)?,
                        };
                        report.contact_residual = report.contact_residual.max(target.residual(cur.get(i, j)));
                    }
                }
            }
        }
    }
    Ok(report)
}

fn qnet_step(net: &QNet, sign: Sign, k: usize, tol: &Tolerance) -> Result<QNet> {
    qnet::laplace_transform(net, sign, tol).map_err(|e| match e {
        Error::DegenerateNet { i, j, .. } => Error::DegenerateNet { i, j, order: k },
        other => other,
    })
}

fn iso_update(worst: &mut f64, q: &SubQuadric, space: &Subspace) {
    *worst = worst.max(linalg::fro(&restrict_sub(q, space)));
}

/// Six Laplace points around a vertex of the diagonal net and their
/// distance from the quadric's section with the face plane.
#[derive(Debug, Clone, PartialEq)]
pub struct DoliwaConic {
    /// Vertex `(i, j)` of the diagonal net.
    pub vertex: (usize, usize),
    /// The section `Q ∩ D(i,j)∨D(i+1,j)∨D(i,j+1)`.
    pub conic: SubQuadric,
    /// `|φ(x,x)|` for the six points, unit representatives.
    pub incidence: [f64; 6],
    /// Distance of the six points from the plane.
    pub in_plane: [f64; 6],
    /// The section has rank below 3.
    pub rank_deficient: bool,
}

impl DoliwaConic {
    pub fn max(&self) -> f64 {
        self.incidence.iter().chain(self.in_plane.iter()).fold(0.0, |m, x| m.max(*x))
    }
}

/// Conics through `D₁(i−1,j), D₁(i,j), D₁(i+1,j), D₋₁(i,j−1), D₋₁(i,j),
/// D₋₁(i,j+1)` for every vertex of the diagonal net where they exist.
pub fn doliwa_conics(net: &QNet, q: &SubQuadric, tol: &Tolerance) -> Result<Vec<DoliwaConic>> {
    let q = normalized(q);
    let d = qnet::diagonal_net(net, tol)?;
    let d1 = qnet::laplace_transform(&d, Sign::Plus, tol)?;
    let dm1 = qnet::laplace_transform(&d, Sign::Minus, tol)?;
    let mut out = Vec::new();
    for j in 1..d.rows().saturating_sub(2) {
        for i in 1..d.cols().saturating_sub(2) {
            out.push(doliwa_at(&d, &d1, &dm1, &q, i, j, tol)?);
        }
    }
    if out.is_empty() {
        return Err(Error::StencilOutOfRange);
    }
    Ok(out)
}

fn doliwa_at(d: &QNet, d1: &QNet, dm1: &QNet, q: &SubQuadric, i: usize, j: usize, tol: &Tolerance) -> Result<DoliwaConic> {
    let plane = Subspace::span(&[d.get(i, j), d.get(i + 1, j), d.get(i, j + 1)], tol)?;
    let pts = [
        d1.get(i - 1, j),
        d1.get(i, j),
        d1.get(i + 1, j),
        dm1.get(i, j - 1),
        dm1.get(i, j),
        dm1.get(i, j + 1),
    ];
    let form = restrict_sub(q, &plane);
    let incidence = pts.map(|p| {
        let v = p.coords();
        let l = q.space.local(v);
        l.dot(&(&q.form * &l)).abs()
    });
    let in_plane = pts.map(|p| plane.residual(p));
    let rank_deficient = linalg::rank(&form, tol.rank_rel) < 3;
    Ok(DoliwaConic { vertex: (i, j), conic: SubQuadric::new(plane, form)?, incidence, in_plane, rank_deficient })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conics::{self, Seed};

    fn square() -> QNet {
        let pts = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]
            .iter()
            .map(|[x, y]| HPoint::from_slice(&[*x, *y, 1.0]).unwrap())
            .collect();
        QNet::new((0, 0), 2, 2, pts).unwrap()
    }

    #[test]
    fn base_case_is_the_face_conic() {
        let tol = Tolerance::default();
        let net = square();
        let inst = conics::propagate_instance(&net, &Seed::Parameter { face: (0, 0), t: 0.5 }, &tol).unwrap();
        let q = build(&net, &inst, BuildOptions::default(), &tol).unwrap();
        let amb = q.ambient().unwrap();
        // Incircle (x−½)² + (y−½)² = ¼.
        let circle = Matrix::from_row_slice(3, 3, &[1.0, 0.0, -0.5, 0.0, 1.0, -0.5, -0.5, -0.5, 0.25]);
        assert!(linalg::form_distance(&circle, amb.matrix()) < 1e-12);
        let report = verify(&net, &inst, &q.quadric, &tol).unwrap();
        assert!(report.passes(1e-10), "{report:?}");
    }

    #[test]
    fn perturbed_quadric_fails_verification() {
        let tol = Tolerance::default();
        let net = square();
        let inst = conics::propagate_instance(&net, &Seed::Parameter { face: (0, 0), t: 0.3 }, &tol).unwrap();
        let q = build(&net, &inst, BuildOptions::default(), &tol).unwrap().quadric;
        let mut bad = normalized(&q);
        bad.form[(0, 1)] += 1e-4;
        bad.form[(1, 0)] += 1e-4;
        assert!(verify(&net, &inst, &bad, &tol).unwrap().max() > 1e-5);
    }

    #[test]
    fn non_extensive_net_is_rejected() {
        let tol = Tolerance::default();
        let net = QNet::from_fn((0, 0), 3, 2, |i, j| HPoint::from_slice(&[i as f64, j as f64, 1.0])).unwrap();
        let inst = conics::propagate_instance(&net, &Seed::Parameter { face: (0, 0), t: 0.5 }, &tol).unwrap();
        assert_eq!(build(&net, &inst, BuildOptions::default(), &tol), Err(Error::NotExtensive));
    }

    #[test]
    fn forced_split_on_short_side_is_invalid() {
        let tol = Tolerance::default();
        let net = square();
        let inst = conics::propagate_instance(&net, &Seed::Parameter { face: (0, 0), t: 0.5 }, &tol).unwrap();
        let opts = BuildOptions { first_split: Some(Split::Cols), seed: 0 };
        assert!(matches!(build(&net, &inst, opts, &tol), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn auxiliary_point_avoids_both_subspaces() {
        let tol = Tolerance::default();
        let net = square();
        let inst = conics::propagate_instance(&net, &Seed::Parameter { face: (0, 0), t: 0.5 }, &tol).unwrap();
        let mut ctx = Ctx { net: &net, inst: &inst, tol: &tol, rng: projective::rng(0), base_locus_steps: 0 };
        let e = |k| HPoint::basis(3, k);
        let space = Subspace::span(&[&e(0), &e(1)], &tol).unwrap();
        let lo = Subspace::point(&e(0));
        let hi = Subspace::point(&e(1));
        let y = ctx.auxiliary_point(&space, &lo, &hi).unwrap();
        assert!(lo.residual(&y) > 0.5 && hi.residual(&y) > 0.5);
        assert_eq!(ctx.auxiliary_point(&lo, &lo, &hi), Err(Error::YSelectionFailed));
    }
}
