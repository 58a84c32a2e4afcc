//! Rectangular Q-nets, Laplace transforms and lifts.
//!
//! A net on a window stores `cols × rows` points row-major; `P(i, j)` has
//! column `i` (horizontal direction) and row `j`. Indices are local to the
//! window; `origin` records the global index of the local `(0, 0)`.

use alloc::vec::Vec;

use rand::Rng;

use crate::linalg;
use crate::projective::{self, meet_point, HPoint, ProjMap, Subspace, Tolerance};
use crate::{Error, Matrix, Result, Vector};

/// Points of a Q-net on a finite window.
#[derive(Debug, Clone, PartialEq)]
pub struct QNet {
    origin: (i64, i64),
    cols: usize,
    rows: usize,
    points: Vec<HPoint>,
}

/// Row (`P^h(j)`) or column (`P^v(i)`) of the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Row,
    Col,
}

/// Sign of a Laplace transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    /// Meets the two vertical edge lines of each face.
    Plus,
    /// Meets the two horizontal edge lines of each face.
    Minus,
}

impl QNet {
    pub fn new(origin: (i64, i64), cols: usize, rows: usize, points: Vec<HPoint>) -> Result<Self> {
        if cols == 0 || rows == 0 {
            return Err(Error::InvalidInput("empty window".into()));
        }
        if points.len() != cols * rows {
            return Err(Error::InvalidInput(alloc::format!(
                "expected {} points, got {}",
                cols * rows,
                points.len()
            )));
        }
        let n = points[0].coords().len();
        for p in &points {
            if p.coords().len() != n {
                return Err(Error::MixedAmbient { left: n - 1, right: p.ambient_dim() });
            }
        }
        Ok(QNet { origin, cols, rows, points })
    }

    /// Build from a function of local indices.
    pub fn from_fn<F>(origin: (i64, i64), cols: usize, rows: usize, mut f: F) -> Result<Self>
    where
        F: FnMut(usize, usize) -> Result<HPoint>,
    {
        let mut points = Vec::with_capacity(cols * rows);
        for j in 0..rows {
            for i in 0..cols {
                points.push(f(i, j)?);
            }
        }
        Self::new(origin, cols, rows, points)
    }

    pub fn origin(&self) -> (i64, i64) {
        self.origin
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    /// `(a, b)` of the domain `Σ_{a,b}`.
    pub fn extent(&self) -> (usize, usize) {
        (self.cols - 1, self.rows - 1)
    }

    pub fn ambient_dim(&self) -> usize {
        self.points[0].ambient_dim()
    }

    pub fn points(&self) -> &[HPoint] {
        &self.points
    }

    pub fn get(&self, i: usize, j: usize) -> &HPoint {
        &self.points[j * self.cols + i]
    }

    pub fn try_get(&self, i: usize, j: usize) -> Result<&HPoint> {
        if i >= self.cols {
            return Err(Error::IndexOutOfRange { index: i, len: self.cols });
        }
        if j >= self.rows {
            return Err(Error::IndexOutOfRange { index: j, len: self.rows });
        }
        Ok(self.get(i, j))
    }

    /// Point at a global index, if it lies in the window.
    pub fn at_global(&self, gi: i64, gj: i64) -> Option<&HPoint> {
        let (i, j) = (gi - self.origin.0, gj - self.origin.1);
        if i < 0 || j < 0 || i as usize >= self.cols || j as usize >= self.rows {
            return None;
        }
        Some(self.get(i as usize, j as usize))
    }

    /// Subwindow with `cols × rows` points starting at local `(i0, j0)`.
    pub fn window(&self, i0: usize, j0: usize, cols: usize, rows: usize) -> Result<QNet> {
        if cols == 0 || rows == 0 || i0 + cols > self.cols || j0 + rows > self.rows {
            return Err(Error::IndexOutOfRange {
                index: (i0 + cols).max(j0 + rows),
                len: self.cols.max(self.rows),
            });
        }
        let origin = (self.origin.0 + i0 as i64, self.origin.1 + j0 as i64);
        Self::from_fn(origin, cols, rows, |i, j| Ok(self.get(i0 + i, j0 + j).clone()))
    }

    /// Net with the roles of `i` and `j` exchanged.
    pub fn transpose(&self) -> QNet {
        let origin = (self.origin.1, self.origin.0);
        Self::from_fn(origin, self.rows, self.cols, |i, j| Ok(self.get(j, i).clone()))
            .expect("same points")
    }

    /// Apply a projective map to every point.
    pub fn map(&self, m: &ProjMap) -> Result<QNet> {
        let points = self.points.iter().map(|p| m.apply(p)).collect::<Result<Vec<_>>>()?;
        Self::new(self.origin, self.cols, self.rows, points)
    }

    pub fn face(&self, i: usize, j: usize) -> [&HPoint; 4] {
        [self.get(i, j), self.get(i + 1, j), self.get(i, j + 1), self.get(i + 1, j + 1)]
    }

    /// Maximal chordal distance to another net on the same window.
    pub fn distance(&self, other: &QNet) -> f64 {
        if self.cols != other.cols || self.rows != other.rows {
            return f64::INFINITY;
        }
        self.points.iter().zip(&other.points).map(|(a, b)| a.distance(b)).fold(0.0, f64::max)
    }

    /// Join of all points.
    pub fn join(&self, tol: &Tolerance) -> Subspace {
        let cols: Vec<&Vector> = self.points.iter().map(|p| p.coords()).collect();
        Subspace::from_columns(&linalg::hstack(&cols), tol)
    }
}

fn rank_of(points: &[&HPoint], tol: &Tolerance) -> usize {
    let cols: Vec<&Vector> = points.iter().map(|p| p.coords()).collect();
    linalg::rank(&linalg::hstack(&cols), tol.rank_rel)
}

/// `σ₄/σ₁` of the four face vectors; zero in ambient dimension below 3.
pub fn face_planarity_residual(face: [&HPoint; 4]) -> f64 {
    if face[0].coords().len() < 4 {
        return 0.0;
    }
    let cols: Vec<&Vector> = face.iter().map(|p| p.coords()).collect();
    let s = linalg::left_svd(&linalg::hstack(&cols)).values;
    if s[0] == 0.0 {
        0.0
    } else {
        s[3] / s[0]
    }
}

/// Every edge is a line and every three vertices span a plane.
pub fn face_is_nondegenerate(face: [&HPoint; 4], tol: &Tolerance) -> bool {
    let [p00, p10, p01, p11] = face;
    let edges = [(p00, p10), (p10, p11), (p11, p01), (p01, p00)];
    if edges.iter().any(|(a, b)| rank_of(&[a, b], tol) < 2) {
        return false;
    }
    let triples = [[p00, p10, p01], [p00, p10, p11], [p00, p01, p11], [p10, p01, p11]];
    triples.iter().all(|t| rank_of(t, tol) == 3)
}

/// Outcome of [`check_qnet`].
#[derive(Debug, Clone, PartialEq)]
pub struct QNetReport {
    pub is_qnet: bool,
    pub is_nondegenerate: bool,
    pub worst_residual: f64,
    /// First non-planar face, if any.
    pub worst_face: Option<(usize, usize)>,
}

pub fn check_qnet(net: &QNet, tol: &Tolerance) -> QNetReport {
    let mut worst = 0.0f64;
    let mut worst_face = None;
    let mut nondeg = true;
    for j in 0..net.rows.saturating_sub(1) {
        for i in 0..net.cols.saturating_sub(1) {
            let f = net.face(i, j);
            let r = face_planarity_residual(f);
            if r > worst {
                worst = r;
                worst_face = Some((i, j));
            }
            nondeg &= face_is_nondegenerate(f, tol);
        }
    }
    // Edges of single-row or single-column nets.
    if net.rows == 1 || net.cols == 1 {
        for k in 0..net.points.len() - 1 {
            nondeg &= rank_of(&[&net.points[k], &net.points[k + 1]], tol) == 2;
        }
    }
    let is_qnet = worst <= tol.rank_rel;
    QNetReport {
        is_qnet,
        is_nondegenerate: nondeg,
        worst_residual: worst,
        worst_face: if is_qnet { None } else { worst_face },
    }
}

/// `P^h(j)` for [`Direction::Row`], `P^v(i)` for [`Direction::Col`].
pub fn parameter_space(net: &QNet, dir: Direction, index: usize, tol: &Tolerance) -> Result<Subspace> {
    let pts: Vec<&HPoint> = match dir {
        Direction::Row => {
            if index >= net.rows {
                return Err(Error::IndexOutOfRange { index, len: net.rows });
            }
            (0..net.cols).map(|i| net.get(i, index)).collect()
        }
        Direction::Col => {
            if index >= net.cols {
                return Err(Error::IndexOutOfRange { index, len: net.cols });
            }
            (0..net.rows).map(|j| net.get(index, j)).collect()
        }
    };
    Subspace::span(&pts, tol)
}

/// All parameter spaces in one direction.
pub fn parameter_spaces(net: &QNet, dir: Direction, tol: &Tolerance) -> Vec<Subspace> {
    let len = match dir {
        Direction::Row => net.rows,
        Direction::Col => net.cols,
    };
    (0..len).map(|k| parameter_space(net, dir, k, tol).expect("index in range")).collect()
}

/// Non-degenerate, and the points join an `(a+b)`-dimensional space.
pub fn is_extensive(net: &QNet, tol: &Tolerance) -> bool {
    let (a, b) = net.extent();
    let report = check_qnet(net, tol);
    report.is_qnet && report.is_nondegenerate && net.join(tol).proj_dim() == (a + b) as isize
}

/// Every `Σ_{c,d}` subwindow is extensive.
pub fn is_patch_extensive(net: &QNet, c: usize, d: usize, tol: &Tolerance) -> bool {
    if c + 1 > net.cols || d + 1 > net.rows {
        return false;
    }
    for j0 in 0..=net.rows - d - 1 {
        for i0 in 0..=net.cols - c - 1 {
            let w = net.window(i0, j0, c + 1, d + 1).expect("in range");
            if !is_extensive(&w, tol) {
                return false;
            }
        }
    }
    true
}

/// One Laplace transform. The result lives on the faces and keeps the
/// origin, so `L₊ ∘ L₋ P (i, j) = P(i+1, j+1)`.
pub fn laplace_transform(net: &QNet, sign: Sign, tol: &Tolerance) -> Result<QNet> {
    laplace_step(net, sign, 0, tol)
}

fn laplace_step(net: &QNet, sign: Sign, order: usize, tol: &Tolerance) -> Result<QNet> {
    if net.cols < 2 || net.rows < 2 {
        return Err(Error::WindowTooSmall);
    }
    QNet::from_fn(net.origin, net.cols - 1, net.rows - 1, |i, j| {
        let f = net.face(i, j);
        if !face_is_nondegenerate(f, tol) {
            return Err(Error::DegenerateNet { i, j, order });
        }
        let [p00, p10, p01, p11] = f;
        let (l1, l2) = match sign {
            Sign::Plus => (projective::line(p00, p01, tol)?, projective::line(p10, p11, tol)?),
            Sign::Minus => (projective::line(p00, p10, tol)?, projective::line(p01, p11, tol)?),
        };
        meet_point(&l1, &l2, tol).map_err(|_| Error::DegenerateNet { i, j, order })
    })
}

/// Existence and degeneracy of an iterated transform.
#[derive(Debug, Clone, PartialEq)]
pub struct LaplaceReport {
    /// Signed order requested.
    pub order: i32,
    /// Number of transforms that succeeded.
    pub reached: usize,
    pub exists: bool,
    /// `P_m` constant in `i` (for `m > 0`) or in `j` (for `m < 0`).
    pub degenerate: bool,
    /// No two consecutive points along that direction coincide.
    pub nowhere_degenerate: bool,
}

/// `P_m = (L₊)^m P` for `m > 0`, `(L₋)^{|m|} P` for `m < 0`.
pub fn iterated_laplace(net: &QNet, m: i32, tol: &Tolerance) -> (Option<QNet>, LaplaceReport) {
    let sign = if m >= 0 { Sign::Plus } else { Sign::Minus };
    let steps = m.unsigned_abs() as usize;
    let mut cur = net.clone();
    let mut reached = 0;
    for k in 0..steps {
        match laplace_step(&cur, sign, k, tol) {
            Ok(next) => {
                cur = next;
                reached += 1;
            }
            Err(_) => {
                let report = LaplaceReport {
                    order: m,
                    reached,
                    exists: false,
                    degenerate: false,
                    nowhere_degenerate: false,
                };
                return (None, report);
            }
        }
    }
    let (degenerate, nowhere) = laplace_degeneracy(&cur, sign, tol);
    let report = LaplaceReport { order: m, reached, exists: true, degenerate, nowhere_degenerate: nowhere };
    (Some(cur), report)
}

/// `(degenerate, nowhere_degenerate)` of a transform in the direction of `sign`.
pub fn laplace_degeneracy(net: &QNet, sign: Sign, tol: &Tolerance) -> (bool, bool) {
    let mut all_equal = true;
    let mut none_equal = true;
    let mut compared = false;
    for j in 0..net.rows {
        for i in 0..net.cols {
            let next = match sign {
                Sign::Plus if i + 1 < net.cols => net.get(i + 1, j),
                Sign::Minus if j + 1 < net.rows => net.get(i, j + 1),
                _ => continue,
            };
            compared = true;
            let same = net.get(i, j).same_as(next, tol);
            all_equal &= same;
            none_equal &= !same;
        }
    }
    (compared && all_equal, none_equal)
}

/// Per-face intersection of the two diagonals.
pub fn diagonal_net(net: &QNet, tol: &Tolerance) -> Result<QNet> {
    if net.cols < 2 || net.rows < 2 {
        return Err(Error::WindowTooSmall);
    }
    QNet::from_fn(net.origin, net.cols - 1, net.rows - 1, |i, j| {
        let f = net.face(i, j);
        if !face_is_nondegenerate(f, tol) {
            return Err(Error::DegenerateNet { i, j, order: 0 });
        }
        let [p00, p10, p01, p11] = f;
        let d1 = projective::line(p00, p11, tol)?;
        let d2 = projective::line(p10, p01, tol)?;
        meet_point(&d1, &d2, tol).map_err(|_| Error::DegenerateNet { i, j, order: 0 })
    })
}

/// Scalar field on a grid of edges, undefined where the stencil leaves the
/// window.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeField {
    pub cols: usize,
    pub rows: usize,
    pub values: Vec<Option<f64>>,
}

impl EdgeField {
    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        if i >= self.cols || j >= self.rows {
            return None;
        }
        self.values[j * self.cols + i]
    }

    pub fn defined(&self) -> impl Iterator<Item = f64> + '_ {
        self.values.iter().filter_map(|v| *v)
    }
}

/// Laplace invariants: `H` on vertical edges `(i,j)–(i,j+1)`, `K` on
/// horizontal edges `(i,j)–(i+1,j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LaplaceInvariants {
    pub h: EdgeField,
    pub k: EdgeField,
}

/// `H(i,j) = cro(P(i,j), P₁(i,j), P(i,j+1), P₁(i−1,j))` and
/// `K(i,j) = cro(P(i,j), P₋₁(i,j), P(i+1,j), P₋₁(i,j−1))`.
pub fn laplace_invariants(net: &QNet, tol: &Tolerance) -> Result<LaplaceInvariants> {
    if net.cols < 2 || net.rows < 2 {
        return Err(Error::StencilOutOfRange);
    }
    let p1 = laplace_transform(net, Sign::Plus, tol)?;
    let m1 = laplace_transform(net, Sign::Minus, tol)?;
    let mut h = EdgeField { cols: net.cols, rows: net.rows - 1, values: Vec::new() };
    for j in 0..net.rows - 1 {
        for i in 0..net.cols {
            let v = if i >= 1 && i + 1 < net.cols {
                Some(projective::cross_ratio_collinear(
                    [net.get(i, j), p1.get(i, j), net.get(i, j + 1), p1.get(i - 1, j)],
                    tol,
                )?)
            } else {
                None
            };
            h.values.push(v);
        }
    }
    let mut k = EdgeField { cols: net.cols - 1, rows: net.rows, values: Vec::new() };
    for j in 0..net.rows {
        for i in 0..net.cols - 1 {
            let v = if j >= 1 && j + 1 < net.rows {
                Some(projective::cross_ratio_collinear(
                    [net.get(i, j), m1.get(i, j), net.get(i + 1, j), m1.get(i, j - 1)],
                    tol,
                )?)
            } else {
                None
            };
            k.values.push(v);
        }
    }
    Ok(LaplaceInvariants { h, k })
}

/// Extensive lift together with the projection back to the original net.
#[derive(Debug, Clone)]
pub struct Lift {
    pub net: QNet,
    /// Matrix of size `(n+1) × (a+b+1)` with `π ∘ P̂ = P`.
    pub projection: Matrix,
}

impl Lift {
    pub fn project(&self, p: &HPoint) -> Result<HPoint> {
        HPoint::new(&self.projection * p.coords()).map_err(|_| Error::InCenter)
    }
}

const LIFT_ATTEMPTS: usize = 64;

/// Lift a non-degenerate net on `Σ_{a,b}` to an extensive net in
/// `RP^{a+b}`, raising the dimension of the join one step at a time.
pub fn lift_extensive(net: &QNet, seed: u64, tol: &Tolerance) -> Result<Lift> {
    let (a, b) = net.extent();
    let target = a + b;
    let report = check_qnet(net, tol);
    if !report.is_qnet || !report.is_nondegenerate {
        return Err(Error::LiftFailed);
    }
    let join = net.join(tol);
    if join.proj_dim() > target as isize {
        return Err(Error::LiftFailed);
    }
    if is_extensive(net, tol) && net.ambient_dim() == target {
        return Ok(Lift { net: net.clone(), projection: Matrix::identity(target + 1, target + 1) });
    }
    // Work in coordinates of the join.
    let mut cur = QNet::from_fn(net.origin, net.cols, net.rows, |i, j| {
        HPoint::new(join.local(net.get(i, j).coords()))
    })?;
    let mut projection = join.basis().clone();
    let mut rng = projective::rng(seed);
    while cur.join(tol).proj_dim() < target as isize {
        let k1 = cur.ambient_dim() + 1;
        let mut lifted = None;
        for _ in 0..LIFT_ATTEMPTS {
            if let Ok(up) = lift_once(&cur, &mut rng, tol) {
                if up.join(tol).proj_dim() == cur.join(tol).proj_dim() + 1 {
                    lifted = Some(up);
                    break;
                }
            }
        }
        cur = lifted.ok_or(Error::LiftFailed)?;
        let mut drop = Matrix::zeros(k1, k1 + 1);
        drop.view_mut((0, 0), (k1, k1)).fill_with_identity();
        projection = projection * drop;
    }
    if !is_extensive(&cur, tol) {
        return Err(Error::LiftFailed);
    }
    Ok(Lift { net: cur, projection })
}

fn lift_once<R: Rng>(net: &QNet, rng: &mut R, tol: &Tolerance) -> Result<QNet> {
    let k1 = net.ambient_dim() + 1;
    let up = |p: &HPoint, h: f64| {
        let mut v = Vector::zeros(k1 + 1);
        v.rows_mut(0, k1).copy_from(p.coords());
        v[k1] = h;
        HPoint::new(v)
    };
    let mut apex = Vector::zeros(k1 + 1);
    apex[k1] = 1.0;
    let apex = HPoint::new(apex)?;
    let mut out: Vec<Option<HPoint>> = alloc::vec![None; net.cols * net.rows];
    for j in 0..net.rows {
        for i in 0..net.cols {
            let p = net.get(i, j);
            let lifted = if i == 0 || j == 0 {
                up(p, rng.gen_range(-1.0..1.0))?
            } else {
                let at = |ii: usize, jj: usize| out[jj * net.cols + ii].as_ref().expect("filled");
                let plane = Subspace::span(&[at(i - 1, j - 1), at(i, j - 1), at(i - 1, j)], tol)?;
                let fiber = projective::line(&up(p, 0.0)?, &apex, tol)?;
                meet_point(&plane, &fiber, tol).map_err(|_| Error::LiftFailed)?
            };
            out[j * net.cols + i] = Some(lifted);
        }
    }
    QNet::new(net.origin, net.cols, net.rows, out.into_iter().map(|p| p.expect("filled")).collect())
}

/// Random Q-net with `cols × rows` points in `RPⁿ`: random first row and
/// column, every further vertex a random point of the plane spanned by its
/// three predecessors.
pub fn random_qnet(cols: usize, rows: usize, n: usize, seed: u64, tol: &Tolerance) -> Result<QNet> {
    let mut rng = projective::rng(seed);
    for _ in 0..LIFT_ATTEMPTS {
        let net = random_qnet_once(cols, rows, n, &mut rng)?;
        let r = check_qnet(&net, tol);
        if r.is_qnet && r.is_nondegenerate {
            return Ok(net);
        }
    }
    Err(Error::GenerationFailed("random Q-net".into()))
}

fn random_qnet_once<R: Rng>(cols: usize, rows: usize, n: usize, rng: &mut R) -> Result<QNet> {
    let mut pts: Vec<HPoint> = Vec::with_capacity(cols * rows);
    for j in 0..rows {
        for i in 0..cols {
            let p = if i == 0 || j == 0 {
                projective::random_point(rng, n)
            } else {
                let q00 = pts[(j - 1) * cols + i - 1].coords();
                let q10 = pts[(j - 1) * cols + i].coords();
                let q01 = pts[j * cols + i - 1].coords();
                let (s, t) = (rng.gen_range(0.3..1.5), rng.gen_range(0.3..1.5));
                HPoint::new(q10 * s + q01 * t - q00)?
            };
            pts.push(p);
        }
    }
    QNet::new((0, 0), cols, rows, pts)
}

/// Random extensive Q-net on `Σ_{a,b}` in `RP^{a+b}`.
pub fn random_extensive(a: usize, b: usize, seed: u64, tol: &Tolerance) -> Result<QNet> {
    let mut rng = projective::rng(seed);
    for _ in 0..LIFT_ATTEMPTS {
        let net = random_qnet_once(a + 1, b + 1, a + b, &mut rng)?;
        if is_extensive(&net, tol) {
            return Ok(net);
        }
    }
    Err(Error::GenerationFailed("random extensive net".into()))
}
