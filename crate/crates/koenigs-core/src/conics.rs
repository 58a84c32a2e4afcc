//! Inscribed conics of planar quads and touching-conic instances.
//!
//! The conics inscribed in a quad form the dual pencil `Φ = s_a·A + s_b·B`
//! spanned by the two diagonal point pairs `A = p₁₀p₀₁ᵀ + p₀₁p₁₀ᵀ` and
//! `B = p₀₀p₁₁ᵀ + p₁₁p₀₀ᵀ`. Representatives are scaled so that
//! `p₀₀ + p₁₁ = p₁₀ + p₀₁`, which makes the parameter `t = s_a/(s_a+s_b)` a
//! projective invariant of the conic; for the unit square with `w = 1` these
//! are the affine representatives. The contact point on an edge line `l` is
//! `Φ·l`, affine in `t`.

use alloc::collections::VecDeque;
use alloc::vec::Vec;

use crate::linalg::{self, adjugate3, cross3};
use crate::projective::{self, HPoint, Subspace, Tolerance};
use crate::qnet::{self, QNet};
use crate::quadric::SubQuadric;
use crate::{Error, Matrix, Result, Vector};

/// Edge of a face, in the order bottom, top, left, right.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Edge {
    /// `P(i,j) ∨ P(i+1,j)`, carries `S(i,j)`.
    Bottom,
    /// `P(i,j+1) ∨ P(i+1,j+1)`, carries `S(i,j+1)`.
    Top,
    /// `P(i,j) ∨ P(i,j+1)`, carries `T(i,j)`.
    Left,
    /// `P(i+1,j) ∨ P(i+1,j+1)`, carries `T(i+1,j)`.
    Right,
}

impl Edge {
    pub const ALL: [Edge; 4] = [Edge::Bottom, Edge::Top, Edge::Left, Edge::Right];

    fn index(self) -> usize {
        match self {
            Edge::Bottom => 0,
            Edge::Top => 1,
            Edge::Left => 2,
            Edge::Right => 3,
        }
    }

    /// Face vertices (as indices into `[p00, p10, p01, p11]`) on this edge.
    fn vertices(self) -> (usize, usize) {
        match self {
            Edge::Bottom => (0, 1),
            Edge::Top => (2, 3),
            Edge::Left => (0, 2),
            Edge::Right => (1, 3),
        }
    }
}

/// Inscribed conic of one face, with the whole family it belongs to.
#[derive(Debug, Clone, PartialEq)]
pub struct FaceConic {
    pub face: (usize, usize),
    /// Orthonormal basis of the face plane.
    pub plane: Subspace,
    /// Scaled representatives `[p00, p10, p01, p11]` in plane coordinates.
    pub reps: [Vector; 4],
    /// Edge lines in plane coordinates, indexed like [`Edge::ALL`].
    pub lines: [Vector; 4],
    pub a: Matrix,
    pub b: Matrix,
    /// `(s_a, s_b)` of the member.
    pub weights: (f64, f64),
}

impl FaceConic {
    /// Family of conics inscribed in a planar non-degenerate face.
    pub fn family(face: [&HPoint; 4], at: (usize, usize), tol: &Tolerance) -> Result<FaceConic> {
        let degenerate = Error::DegenerateFace { i: at.0, j: at.1 };
        if !qnet::face_is_nondegenerate(face, tol) {
            return Err(degenerate);
        }
        let plane = Subspace::span(&face, tol)?;
        if plane.proj_dim() != 2 {
            return Err(degenerate);
        }
        let q: Vec<Vector> = face.iter().map(|p| plane.local(p.coords())).collect();
        let m = linalg::hstack(&[&q[0], &q[1], &q[2], &q[3]]);
        let c = linalg::least_direction(&m).vector;
        let cmax = c.amax();
        if c.iter().any(|x| linalg::negligible(x.abs(), cmax, tol.rank_rel)) {
            return Err(degenerate);
        }
        let reps = [&q[0] * c[0], &q[1] * -c[1], &q[2] * -c[2], &q[3] * c[3]];
        let lines = Edge::ALL.map(|e| {
            let (u, v) = e.vertices();
            let l = cross3(&reps[u], &reps[v]);
            let n = l.norm();
            l / n
        });
        let sym = |x: &Vector, y: &Vector| x * y.transpose() + y * x.transpose();
        let a = sym(&reps[1], &reps[2]);
        let b = sym(&reps[0], &reps[3]);
        Ok(FaceConic { face: at, plane, reps, lines, a, b, weights: (0.5, 0.5) })
    }

    /// Member `tA + (1−t)B`. The diagonal members `t = 0, 1` are excluded.
    pub fn with_parameter(mut self, t: f64, tol: &Tolerance) -> Result<FaceConic> {
        if !t.is_finite() {
            return Err(Error::InvalidInput("parameter must be finite".into()));
        }
        if t.abs() <= tol.rank_rel || (1.0 - t).abs() <= tol.rank_rel {
            return Err(Error::VertexContact { i: self.face.0, j: self.face.1 });
        }
        self.weights = (t, 1.0 - t);
        Ok(self)
    }

    /// `t = s_a/(s_a+s_b)`; infinite for the member `A − B`.
    pub fn parameter(&self) -> f64 {
        let (sa, sb) = self.weights;
        sa / (sa + sb)
    }

    /// Dual form `Φ` in plane coordinates.
    pub fn dual(&self) -> Matrix {
        &self.a * self.weights.0 + &self.b * self.weights.1
    }

    /// Primal form `adj Φ` in plane coordinates.
    pub fn primal(&self) -> Matrix {
        adjugate3(&self.dual())
    }

    /// The conic as a quadric of its plane.
    pub fn conic(&self) -> SubQuadric {
        SubQuadric { space: self.plane.clone(), form: self.primal() }
    }

    /// `Φ` has rank below 3: a point pair, whose primal is a double line.
    pub fn is_degenerate(&self, tol: &Tolerance) -> bool {
        linalg::rank(&self.dual(), tol.rank_rel) < 3
    }

    /// `lᵀΦl` for each edge, zero for every member of the family.
    pub fn tangency_residuals(&self) -> [f64; 4] {
        let phi = self.dual();
        let scale = linalg::fro(&phi).max(f64::MIN_POSITIVE);
        self.lines.clone().map(|l| (l.dot(&(&phi * &l)) / scale).abs())
    }

    fn contact_local(&self, e: Edge) -> Vector {
        self.dual() * &self.lines[e.index()]
    }

    /// Touching point on an edge.
    pub fn contact(&self, e: Edge) -> Result<HPoint> {
        HPoint::new(self.plane.basis() * self.contact_local(e))
    }

    /// Touching points `[S_bottom, S_top, T_left, T_right]`.
    pub fn contact_points(&self) -> Result<[HPoint; 4]> {
        Ok([
            self.contact(Edge::Bottom)?,
            self.contact(Edge::Top)?,
            self.contact(Edge::Left)?,
            self.contact(Edge::Right)?,
        ])
    }

    /// The member touching edge `e` at `contact`.
    pub fn from_contact(mut self, e: Edge, contact: &HPoint, tol: &Tolerance) -> Result<FaceConic> {
        let (u, v) = e.vertices();
        let amb_u = HPoint::new(self.plane.basis() * &self.reps[u])?;
        let amb_v = HPoint::new(self.plane.basis() * &self.reps[v])?;
        let edge_line = projective::line(&amb_u, &amb_v, tol)?;
        let r = edge_line.residual(contact);
        if r > tol.residual_abs {
            return Err(Error::OffEdge { residual: r });
        }
        if contact.same_as(&amb_u, tol) || contact.same_as(&amb_v, tol) {
            return Err(Error::VertexContact { i: self.face.0, j: self.face.1 });
        }
        let c = self.plane.local(contact.coords());
        let l = &self.lines[e.index()];
        let xa = &self.a * l;
        let xb = &self.b * l;
        let m = linalg::hstack(&[&xa, &xb]);
        let sol = m
            .clone()
            .svd(true, true)
            .solve(&c, f64::EPSILON)
            .map_err(|_| Error::VertexContact { i: self.face.0, j: self.face.1 })?;
        self.weights = (sol[0], sol[1]);
        Ok(self)
    }

    /// `|cro(p₀₀, S_bottom, p₁₀, X) + 1|` with `X` the meet of the bottom
    /// edge and the line through the two `T` contacts. The diagonals, the
    /// `S` line and the `T` line are concurrent; cutting them with the bottom
    /// edge gives these four points.
    pub fn harmonic_residual(&self, tol: &Tolerance) -> Result<f64> {
        let t_line = cross3(&self.contact_local(Edge::Left), &self.contact_local(Edge::Right));
        let x = cross3(&t_line, &self.lines[Edge::Bottom.index()]);
        let pts = [
            HPoint::new(self.reps[0].clone())?,
            HPoint::new(self.contact_local(Edge::Bottom))?,
            HPoint::new(self.reps[1].clone())?,
            HPoint::new(x)?,
        ];
        let cro = projective::cross_ratio_collinear([&pts[0], &pts[1], &pts[2], &pts[3]], tol)?;
        Ok((cro + 1.0).abs())
    }

    /// `count` points of the conic, from the second intersections of the
    /// lines through the bottom contact at evenly spaced angles.
    pub fn sample(&self, count: usize, tol: &Tolerance) -> Result<Vec<HPoint>> {
        if self.is_degenerate(tol) {
            return Err(Error::DegenerateFace { i: self.face.0, j: self.face.1 });
        }
        let q = self.primal();
        let p0 = self.contact_local(Edge::Bottom).normalize();
        let row = Matrix::from_row_slice(1, 3, p0.as_slice());
        let perp = linalg::null_space(&row, tol.rank_rel);
        let (e1, e2) = (perp.column(0).into_owned(), perp.column(1).into_owned());
        (0..count)
            .map(|k| {
                let theta = core::f64::consts::PI * k as f64 / count as f64;
                let v = &e1 * libm::cos(theta) + &e2 * libm::sin(theta);
                // x = φ(v,v)·p₀ − 2φ(p₀,v)·v is the second point on the line.
                let x = &p0 * v.dot(&(&q * &v)) - &v * (2.0 * p0.dot(&(&q * &v)));
                let x = if x.norm() <= tol.residual_abs { p0.clone() } else { x };
                HPoint::new(self.plane.basis() * x)
            })
            .collect()
    }
}

/// Conic family of face `(i, j)` of a net.
pub fn conic_family(net: &QNet, i: usize, j: usize, tol: &Tolerance) -> Result<FaceConic> {
    if i + 1 >= net.cols() || j + 1 >= net.rows() {
        return Err(Error::IndexOutOfRange { index: i.max(j), len: net.cols().min(net.rows()) });
    }
    FaceConic::family(net.face(i, j), (i, j), tol)
}

/// Where a propagation starts.
#[derive(Debug, Clone, PartialEq)]
pub enum Seed {
    /// Member `t` of the family of a face.
    Parameter { face: (usize, usize), t: f64 },
    /// Member touching an edge of a face at a point.
    Contact { face: (usize, usize), edge: Edge, point: HPoint },
}

impl Seed {
    pub fn face(&self) -> (usize, usize) {
        match self {
            Seed::Parameter { face, .. } | Seed::Contact { face, .. } => *face,
        }
    }
}

/// Touching conics on every face with their contact nets.
#[derive(Debug, Clone, PartialEq)]
pub struct TouchingInstance {
    pub seed: Seed,
    /// Face conics, row-major over `(cols−1) × (rows−1)` faces.
    pub conics: Vec<FaceConic>,
    /// Contacts on horizontal edges, `(cols−1) × rows`.
    pub s: QNet,
    /// Contacts on vertical edges, `cols × (rows−1)`.
    pub t: QNet,
    /// Largest disagreement of the two contacts on an interior edge.
    pub closure_residual: f64,
    /// Face whose edge realizes `closure_residual`.
    pub worst_face: (usize, usize),
}

impl TouchingInstance {
    pub fn conic(&self, i: usize, j: usize) -> &FaceConic {
        &self.conics[j * (self.s.cols()) + i]
    }

    /// Face parameters `t`, row-major.
    pub fn parameters(&self) -> Vec<f64> {
        self.conics.iter().map(|c| c.parameter()).collect()
    }
}

fn seed_conic(net: &QNet, seed: &Seed, tol: &Tolerance) -> Result<FaceConic> {
    let (i, j) = seed.face();
    let fam = conic_family(net, i, j, tol)?;
    match seed {
        Seed::Parameter { t, .. } => fam.with_parameter(*t, tol),
        Seed::Contact { edge, point, .. } => fam.from_contact(*edge, point, tol),
    }
}

/// Propagate touching conics over all faces and measure closure.
///
/// Faces are visited breadth first from the seed face, neighbours in the
/// order left, right, down, up. Each new conic is fixed by the contact on
/// the edge it was reached through; afterwards every interior edge compares
/// the contacts of its two faces.
pub fn propagate(net: &QNet, seed: &Seed, tol: &Tolerance) -> Result<TouchingInstance> {
    let (fc, fr) = (net.cols().saturating_sub(1), net.rows().saturating_sub(1));
    if fc == 0 || fr == 0 {
        return Err(Error::WindowTooSmall);
    }
    let mut conics: Vec<Option<FaceConic>> = alloc::vec![None; fc * fr];
    let (si, sj) = seed.face();
    conics[sj * fc + si] = Some(seed_conic(net, seed, tol)?);
    let mut queue = VecDeque::from([(si, sj)]);
    while let Some((i, j)) = queue.pop_front() {
        let cur = conics[j * fc + i].clone().expect("visited");
        let mut next = Vec::with_capacity(4);
        if i > 0 {
            next.push(((i - 1, j), Edge::Left, Edge::Right));
        }
        if i + 1 < fc {
            next.push(((i + 1, j), Edge::Right, Edge::Left));
        }
        if j > 0 {
            next.push(((i, j - 1), Edge::Bottom, Edge::Top));
        }
        if j + 1 < fr {
            next.push(((i, j + 1), Edge::Top, Edge::Bottom));
        }
        for ((ni, nj), mine, theirs) in next {
            if conics[nj * fc + ni].is_some() {
                continue;
            }
            let contact = cur.contact(mine)?;
            let conic = conic_family(net, ni, nj, tol)?.from_contact(theirs, &contact, tol)?;
            conics[nj * fc + ni] = Some(conic);
            queue.push_back((ni, nj));
        }
    }
    let conics: Vec<FaceConic> = conics.into_iter().map(|c| c.expect("all faces reached")).collect();
    let at = |i: usize, j: usize| &conics[j * fc + i];

    let mut worst = 0.0f64;
    let mut worst_face = (si, sj);
    let mut s_pts = Vec::with_capacity(fc * (fr + 1));
    for j in 0..=fr {
        for i in 0..fc {
            let below = if j > 0 { Some(at(i, j - 1).contact(Edge::Top)?) } else { None };
            let above = if j < fr { Some(at(i, j).contact(Edge::Bottom)?) } else { None };
            if let (Some(b), Some(a)) = (&below, &above) {
                let r = a.distance(b);
                if r > worst {
                    worst = r;
                    worst_face = (i, j);
                }
            }
            s_pts.push(above.or(below).expect("one side exists"));
        }
    }
    let mut t_pts = Vec::with_capacity((fc + 1) * fr);
    for j in 0..fr {
        for i in 0..=fc {
            let left = if i > 0 { Some(at(i - 1, j).contact(Edge::Right)?) } else { None };
            let right = if i < fc { Some(at(i, j).contact(Edge::Left)?) } else { None };
            if let (Some(l), Some(r)) = (&left, &right) {
                let d = l.distance(r);
                if d > worst {
                    worst = d;
                    worst_face = (i, j);
                }
            }
            t_pts.push(right.or(left).expect("one side exists"));
        }
    }
    let s = QNet::new(net.origin(), fc, fr + 1, s_pts)?;
    let t = QNet::new(net.origin(), fc + 1, fr, t_pts)?;
    Ok(TouchingInstance { seed: seed.clone(), conics, s, t, closure_residual: worst, worst_face })
}

/// [`propagate`], failing unless the contacts agree on every edge.
pub fn propagate_instance(net: &QNet, seed: &Seed, tol: &Tolerance) -> Result<TouchingInstance> {
    let inst = propagate(net, seed, tol)?;
    if inst.closure_residual > tol.residual_abs {
        return Err(Error::ClosureFailure {
            i: inst.worst_face.0,
            j: inst.worst_face.1,
            residual: inst.closure_residual,
        });
    }
    Ok(inst)
}

/// Seed parameters tried in turn when a propagation hits a vertex.
pub const SEED_PARAMETERS: [f64; 10] = [0.37, 0.61, 0.23, 0.83, 0.45, 0.12, 0.71, 0.29, 0.94, 0.53];

/// Outcome of [`is_koenigs`].
#[derive(Debug, Clone, PartialEq)]
pub struct KoenigsReport {
    pub propagation_closure: bool,
    pub closure_residual: f64,
    pub worst_face: (usize, usize),
    /// `None` when the ambient dimension is below 3 and coplanarity is vacuous.
    pub vertex_coplanarity: Option<bool>,
    pub coplanarity_residual: f64,
}

impl KoenigsReport {
    pub fn is_koenigs(&self) -> bool {
        self.propagation_closure && self.vertex_coplanarity.unwrap_or(true)
    }
}

/// Touching-conic closure and coplanarity of the diagonal points around
/// every interior vertex.
pub fn is_koenigs(net: &QNet, tol: &Tolerance) -> Result<KoenigsReport> {
    let mut last = Error::WindowTooSmall;
    let mut inst = None;
    for &t in SEED_PARAMETERS.iter() {
        match propagate(net, &Seed::Parameter { face: (0, 0), t }, tol) {
            Ok(x) => {
                inst = Some(x);
                break;
            }
            Err(e @ Error::VertexContact { .. }) => last = e,
            Err(e) => return Err(e),
        }
    }
    let inst = inst.ok_or(last)?;
    let (coplanar, residual) = if net.ambient_dim() >= 3 {
        let d = qnet::diagonal_net(net, tol)?;
        let r = qnet::check_qnet(&d, tol);
        (Some(r.is_qnet), r.worst_residual)
    } else {
        (None, 0.0)
    };
    Ok(KoenigsReport {
        propagation_closure: inst.closure_residual <= tol.residual_abs,
        closure_residual: inst.closure_residual,
        worst_face: inst.worst_face,
        vertex_coplanarity: coplanar,
        coplanarity_residual: residual,
    })
}

/// The contact nets `(S, T)` with their planarity reports.
pub fn touching_nets(inst: &TouchingInstance, tol: &Tolerance) -> (qnet::QNetReport, qnet::QNetReport) {
    (qnet::check_qnet(&inst.s, tol), qnet::check_qnet(&inst.t, tol))
}

/// Maxima of `|H^S(i,j) − K^T(i,j)|` and `|H^T(i+1,j) − K^S(i,j+1)|`.
#[derive(Debug, Clone, PartialEq)]
pub struct BinetReport {
    pub max_hs_kt: f64,
    pub max_ht_ks: f64,
    pub compared: usize,
}

impl BinetReport {
    pub fn max(&self) -> f64 {
        self.max_hs_kt.max(self.max_ht_ks)
    }
}

/// Equality of the Laplace invariants of the contact nets.
pub fn binet_check(s: &QNet, t: &QNet, tol: &Tolerance) -> Result<BinetReport> {
    let is = qnet::laplace_invariants(s, tol)?;
    let it = qnet::laplace_invariants(t, tol)?;
    let mut report = BinetReport { max_hs_kt: 0.0, max_ht_ks: 0.0, compared: 0 };
    for j in 0..is.h.rows {
        for i in 0..is.h.cols {
            if let (Some(h), Some(k)) = (is.h.get(i, j), it.k.get(i, j)) {
                report.max_hs_kt = report.max_hs_kt.max((h - k).abs());
                report.compared += 1;
            }
        }
    }
    for j in 0..it.h.rows {
        for i in 0..it.h.cols.saturating_sub(1) {
            if let (Some(h), Some(k)) = (it.h.get(i + 1, j), is.k.get(i, j + 1)) {
                report.max_ht_ks = report.max_ht_ks.max((h - k).abs());
                report.compared += 1;
            }
        }
    }
    if report.compared == 0 {
        return Err(Error::StencilOutOfRange);
    }
    Ok(report)
}

/// The two hyperplanes of the join that carry the even and the odd
/// vertices respectively.
#[derive(Debug, Clone, PartialEq)]
pub struct Bipartite {
    pub even: Subspace,
    pub odd: Subspace,
    /// Largest distance of a diagonal point from `even ∩ odd`.
    pub diagonal_residual: f64,
}

pub fn bipartite_hyperplanes(net: &QNet, tol: &Tolerance) -> Result<Bipartite> {
    let join = net.join(tol);
    let mut classes: [Vec<&HPoint>; 2] = [Vec::new(), Vec::new()];
    for j in 0..net.rows() {
        for i in 0..net.cols() {
            classes[(i + j) % 2].push(net.get(i, j));
        }
    }
    let mut spans = Vec::with_capacity(2);
    for (parity, class) in classes.iter().enumerate() {
        let s = Subspace::span(class, tol)?;
        if s.proj_dim() != join.proj_dim() - 1 {
            return Err(Error::FitFailed { parity, dim: s.proj_dim().max(0) as usize });
        }
        spans.push(s);
    }
    let odd = spans.pop().expect("two classes");
    let even = spans.pop().expect("two classes");
    let mut residual = 0.0f64;
    if net.cols() >= 2 && net.rows() >= 2 {
        let common = projective::meet(&even, &odd, tol)?;
        let d = qnet::diagonal_net(net, tol)?;
        for p in d.points() {
            residual = residual.max(common.residual(p));
        }
    }
    Ok(Bipartite { even, odd, diagonal_residual: residual })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn aff(x: f64, y: f64) -> HPoint {
        HPoint::from_slice(&[x, y, 1.0]).unwrap()
    }

    fn square() -> [HPoint; 4] {
        [aff(0.0, 0.0), aff(1.0, 0.0), aff(0.0, 1.0), aff(1.0, 1.0)]
    }

    fn family(f: &[HPoint; 4]) -> FaceConic {
        FaceConic::family([&f[0], &f[1], &f[2], &f[3]], (0, 0), &Tolerance::default()).unwrap()
    }

    #[test]
    fn half_member_is_incircle() {
        let tol = Tolerance::default();
        let f = square();
        let c = family(&f).with_parameter(0.5, &tol).unwrap();
        let [sb, st, tl, tr] = c.contact_points().unwrap();
        assert!(sb.distance(&aff(0.5, 0.0)) < 1e-14);
        assert!(st.distance(&aff(0.5, 1.0)) < 1e-14);
        assert!(tl.distance(&aff(0.0, 0.5)) < 1e-14);
        assert!(tr.distance(&aff(1.0, 0.5)) < 1e-14);
        // (x − ½)² + (y − ½)² = ¼ in ambient coordinates.
        let circle = Matrix::from_row_slice(3, 3, &[1.0, 0.0, -0.5, 0.0, 1.0, -0.5, -0.5, -0.5, 0.25]);
        let b = c.plane.basis();
        let ambient = b * c.primal() * b.transpose();
        assert!(linalg::form_distance(&circle, &ambient) < 1e-12);
    }

    #[test]
    fn incircle_samples_lie_on_the_circle() {
        let tol = Tolerance::default();
        let c = family(&square()).with_parameter(0.5, &tol).unwrap();
        let pts = c.sample(64, &tol).unwrap();
        assert_eq!(pts.len(), 64);
        for p in &pts {
            let (x, y) = (p.coords()[0] / p.coords()[2], p.coords()[1] / p.coords()[2]);
            assert!(((x - 0.5).powi(2) + (y - 0.5).powi(2) - 0.25).abs() < 1e-12);
        }
        let distinct = pts.windows(2).all(|w| w[0].distance(&w[1]) > 1e-3);
        assert!(distinct);
    }

    #[test]
    fn contact_is_affine_in_parameter() {
        let tol = Tolerance::default();
        let f = square();
        for t in [0.1, 0.3, 0.77, 1.6, -0.4] {
            let c = family(&f).with_parameter(t, &tol).unwrap();
            assert!(c.contact(Edge::Bottom).unwrap().distance(&aff(t, 0.0)) < 1e-13);
            assert!(c.tangency_residuals().iter().all(|r| *r < 1e-12));
        }
        assert!(matches!(family(&f).with_parameter(0.0, &tol), Err(Error::VertexContact { .. })));
    }

    #[test]
    fn parameter_from_contact() {
        let tol = Tolerance::default();
        let f = square();
        let c = family(&f).from_contact(Edge::Bottom, &aff(0.3, 0.0), &tol).unwrap();
        assert!((c.parameter() - 0.3).abs() < 1e-13);
        let v = family(&f).from_contact(Edge::Bottom, &aff(1.0, 0.0), &tol);
        assert!(matches!(v, Err(Error::VertexContact { .. })));
        let off = family(&f).from_contact(Edge::Bottom, &aff(0.3, 0.2), &tol);
        assert!(matches!(off, Err(Error::OffEdge { .. })));
    }

    #[test]
    fn laplace_member_touches_at_laplace_points() {
        let tol = Tolerance::default();
        let f = [aff(0.0, 0.0), aff(1.0, 0.0), aff(0.0, 1.0), aff(2.0, 2.0)];
        let lm = aff(-2.0, 0.0);
        let lp = aff(0.0, -2.0);
        // Touching the bottom edge line at its Laplace point selects the
        // member whose dual is the point pair of the two Laplace points.
        let c = family(&f).from_contact(Edge::Bottom, &lm, &tol).unwrap();
        assert!(c.is_degenerate(&tol));
        let [sb, st, tl, tr] = c.contact_points().unwrap();
        assert!(sb.distance(&lm) < 1e-12 && st.distance(&lm) < 1e-12);
        assert!(tl.distance(&lp) < 1e-12 && tr.distance(&lp) < 1e-12);
    }

    #[test]
    fn diagonals_are_harmonically_separated() {
        let tol = Tolerance::default();
        let f = [aff(0.0, 0.0), aff(1.3, 0.1), aff(-0.2, 0.9), aff(1.7, 2.1)];
        for t in [0.2, 0.5, 0.9, 1.4] {
            let c = family(&f).with_parameter(t, &tol).unwrap();
            assert!(c.harmonic_residual(&tol).unwrap() < 1e-9);
        }
    }

    #[test]
    fn single_row_of_faces_always_closes() {
        let tol = Tolerance::default();
        let net = qnet::random_extensive(3, 1, 5, &tol).unwrap();
        for t in [0.2, 0.6, 1.7] {
            let inst = propagate_instance(&net, &Seed::Parameter { face: (1, 0), t }, &tol).unwrap();
            assert!(inst.closure_residual < 1e-12);
        }
    }

    #[test]
    fn generic_qnet_is_not_koenigs() {
        let tol = Tolerance::default();
        let net = qnet::random_qnet(3, 3, 3, 13, &tol).unwrap();
        let r = propagate_instance(&net, &Seed::Parameter { face: (0, 0), t: 0.4 }, &tol);
        assert!(matches!(r, Err(Error::ClosureFailure { .. })));
        assert!(!is_koenigs(&net, &tol).unwrap().is_koenigs());
    }

    #[test]
    fn quad_diagonals_are_bipartite_lines() {
        let tol = Tolerance::default();
        let f = square();
        let net = QNet::new((0, 0), 2, 2, f.to_vec()).unwrap();
        let bp = bipartite_hyperplanes(&net, &tol).unwrap();
        assert_eq!(bp.even.proj_dim(), 1);
        assert!(bp.even.contains(&f[0], &tol) && bp.even.contains(&f[3], &tol));
        assert!(bp.diagonal_residual < 1e-12);
    }

    #[test]
    fn generic_extensive_net_has_no_bipartite_hyperplanes() {
        let tol = Tolerance::default();
        let net = qnet::random_extensive(2, 2, 3, &tol).unwrap();
        assert!(matches!(bipartite_hyperplanes(&net, &tol), Err(Error::FitFailed { .. })));
    }
}
