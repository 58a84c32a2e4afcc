//! Points, subspaces and maps of real projective space.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::{self, chordal, hcat, vcat};
use crate::{Error, Matrix, Result, Vector};

/// Tolerance policy shared by all predicates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    /// Relative singular-value cutoff for rank decisions.
    pub rank_rel: f64,
    /// Absolute incidence residual on normalized data.
    pub residual_abs: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { rank_rel: 1e-8, residual_abs: 1e-9 }
    }
}

impl Tolerance {
    pub fn new(rank_rel: f64, residual_abs: f64) -> Result<Self> {
        if !(rank_rel > 0.0 && rank_rel < 1.0) {
            return Err(Error::InvalidInput(alloc::format!("rank tolerance {rank_rel} not in (0,1)")));
        }
        if !(residual_abs > 0.0) {
            return Err(Error::InvalidInput(alloc::format!(
                "residual tolerance {residual_abs} must be positive"
            )));
        }
        Ok(Tolerance { rank_rel, residual_abs })
    }
}

const UNIT_SLACK: f64 = 64.0 * f64::EPSILON;

/// A point of RPⁿ stored as its canonical representative: unit norm with the
/// first nonzero entry positive.
#[derive(Debug, Clone, PartialEq)]
pub struct HPoint {
    coords: Vector,
}

impl HPoint {
    pub fn new(v: Vector) -> Result<Self> {
        Ok(HPoint { coords: normalize(v)? })
    }

    pub fn from_slice(xs: &[f64]) -> Result<Self> {
        Self::new(Vector::from_column_slice(xs))
    }

    /// Standard basis point `e_k` of RPⁿ.
    pub fn basis(n: usize, k: usize) -> Self {
        let mut v = Vector::zeros(n + 1);
        v[k] = 1.0;
        HPoint { coords: v }
    }

    pub fn coords(&self) -> &Vector {
        &self.coords
    }

    pub fn into_coords(self) -> Vector {
        self.coords
    }

    pub fn ambient_dim(&self) -> usize {
        self.coords.len() - 1
    }

    /// Sign-insensitive distance between representatives.
    pub fn distance(&self, other: &HPoint) -> f64 {
        chordal(&self.coords, &other.coords)
    }

    /// Equality as projective points: the two representatives have rank 1.
    pub fn same_as(&self, other: &HPoint, tol: &Tolerance) -> bool {
        let m = linalg::hstack(&[&self.coords, &other.coords]);
        linalg::rank(&m, tol.rank_rel) <= 1
    }
}

/// Canonical normalization. Applying it twice returns identical bits.
pub fn normalize(mut v: Vector) -> Result<Vector> {
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput("non-finite coordinate".into()));
    }
    let norm = v.norm();
    if norm == 0.0 {
        return Err(Error::ZeroVector);
    }
    if (norm - 1.0).abs() > UNIT_SLACK {
        v /= norm;
    }
    if let Some(first) = v.iter().find(|x| **x != 0.0) {
        if *first < 0.0 {
            v.neg_mut();
        }
    }
    Ok(v)
}

/// Linear subspace of R^{n+1} viewed as a projective subspace of RPⁿ.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    basis: Matrix,
}

impl Subspace {
    /// The empty subspace (projective dimension −1).
    pub fn empty(n: usize) -> Self {
        Subspace { basis: Matrix::zeros(n + 1, 0) }
    }

    pub fn full(n: usize) -> Self {
        Subspace { basis: Matrix::identity(n + 1, n + 1) }
    }

    pub fn point(p: &HPoint) -> Self {
        Subspace { basis: Matrix::from_columns(&[p.coords.clone()]) }
    }

    /// Span of the columns of `m`.
    pub fn from_columns(m: &Matrix, tol: &Tolerance) -> Self {
        Subspace { basis: linalg::column_span(m, tol.rank_rel) }
    }

    /// Wrap a matrix whose columns are already orthonormal.
    pub fn from_orthonormal(basis: Matrix) -> Self {
        Subspace { basis }
    }

    /// Join of a list of points.
    pub fn span(points: &[&HPoint], tol: &Tolerance) -> Result<Self> {
        let n = points
            .first()
            .map(|p| p.coords.len())
            .ok_or_else(|| Error::InvalidInput("span of no points".into()))?;
        for p in points {
            if p.coords.len() != n {
                return Err(Error::MixedAmbient { left: n - 1, right: p.coords.len() - 1 });
            }
        }
        let cols: Vec<&Vector> = points.iter().map(|p| &p.coords).collect();
        Ok(Self::from_columns(&linalg::hstack(&cols), tol))
    }

    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows() - 1
    }

    /// Projective dimension; −1 for the empty subspace.
    pub fn proj_dim(&self) -> isize {
        self.basis.ncols() as isize - 1
    }

    pub fn is_empty(&self) -> bool {
        self.basis.ncols() == 0
    }

    /// Distance of a unit vector from the span.
    pub fn residual_vec(&self, v: &Vector) -> f64 {
        if self.is_empty() {
            return v.norm();
        }
        let proj = &self.basis * (self.basis.transpose() * v);
        (v - proj).norm()
    }

    pub fn residual(&self, p: &HPoint) -> f64 {
        self.residual_vec(&p.coords)
    }

    pub fn contains(&self, p: &HPoint, tol: &Tolerance) -> bool {
        self.residual(p) <= tol.residual_abs
    }

    /// Largest distance of a basis vector of `other` from this span.
    pub fn containment_residual(&self, other: &Subspace) -> f64 {
        (0..other.basis.ncols())
            .map(|k| self.residual_vec(&other.basis.column(k).into_owned()))
            .fold(0.0, f64::max)
    }

    pub fn contains_subspace(&self, other: &Subspace, tol: &Tolerance) -> bool {
        self.containment_residual(other) <= tol.residual_abs
    }

    /// Orthonormal basis of the orthogonal complement (not the polar).
    pub fn complement(&self, tol: &Tolerance) -> Matrix {
        linalg::null_space(&self.basis.transpose(), tol.rank_rel)
    }

    /// Coordinates of a vector of the span in this basis.
    pub fn local(&self, v: &Vector) -> Vector {
        self.basis.transpose() * v
    }

    /// Canonical point of this subspace when it is a point.
    pub fn as_point(&self) -> Result<HPoint> {
        if self.basis.ncols() != 1 {
            return Err(Error::NoUniqueMeet { expected: "a single point" });
        }
        HPoint::new(self.basis.column(0).into_owned())
    }

    /// Point with the given local coordinates.
    pub fn point_at(&self, local: &Vector) -> Result<HPoint> {
        HPoint::new(&self.basis * local)
    }

    /// Principal-angle distance between two subspaces of the same dimension.
    pub fn distance(&self, other: &Subspace) -> f64 {
        self.containment_residual(other).max(other.containment_residual(self))
    }
}

fn check_ambient(a: &Subspace, b: &Subspace) -> Result<()> {
    if a.basis.nrows() != b.basis.nrows() {
        return Err(Error::MixedAmbient { left: a.ambient_dim(), right: b.ambient_dim() });
    }
    Ok(())
}

/// Join `A₁ ∨ … ∨ A_k`.
pub fn join(spaces: &[&Subspace], tol: &Tolerance) -> Result<Subspace> {
    let first = spaces.first().ok_or_else(|| Error::InvalidInput("join of nothing".into()))?;
    for s in spaces {
        check_ambient(first, s)?;
    }
    let blocks: Vec<&Matrix> = spaces.iter().map(|s| &s.basis).collect();
    Ok(Subspace::from_columns(&hcat(&blocks), tol))
}

/// Join of two points.
pub fn line(p: &HPoint, q: &HPoint, tol: &Tolerance) -> Result<Subspace> {
    Subspace::span(&[p, q], tol)
}

/// Intersection `A ∩ B`, computed as the null space of the stacked
/// orthogonal complements. May be empty.
pub fn meet(a: &Subspace, b: &Subspace, tol: &Tolerance) -> Result<Subspace> {
    check_ambient(a, b)?;
    let ca = a.complement(tol).transpose();
    let cb = b.complement(tol).transpose();
    let stacked = vcat(&[&ca, &cb]);
    Ok(Subspace { basis: linalg::null_space(&stacked, tol.rank_rel) })
}

/// Intersection of many subspaces.
pub fn meet_all(spaces: &[&Subspace], tol: &Tolerance) -> Result<Subspace> {
    let first = spaces.first().ok_or_else(|| Error::InvalidInput("meet of nothing".into()))?;
    let mut rows = Vec::new();
    for s in spaces {
        check_ambient(first, s)?;
        rows.push(s.complement(tol).transpose());
    }
    let refs: Vec<&Matrix> = rows.iter().collect();
    let stacked = vcat(&refs);
    if stacked.nrows() == 0 {
        return Ok(Subspace::full(first.ambient_dim()));
    }
    Ok(Subspace { basis: linalg::null_space(&stacked, tol.rank_rel) })
}

/// Intersection point of two subspaces that are known to meet in exactly one
/// point, such as two coplanar lines.
///
/// Uses the least singular direction of `[A, −B]`, so a small violation of
/// the incidence (for instance a face that is planar only to rounding) still
/// yields the closest point. Fails when the intersection is not unique, or
/// when the subspaces miss each other by more than `√rank_rel` relative to the
/// largest singular value.
pub fn meet_point(a: &Subspace, b: &Subspace, tol: &Tolerance) -> Result<HPoint> {
    check_ambient(a, b)?;
    if a.is_empty() || b.is_empty() {
        return Err(Error::MeetEmpty);
    }
    let ka = a.basis.ncols();
    let m = hcat(&[&a.basis, &(-&b.basis)]);
    let least = linalg::least_direction(&m);
    if linalg::negligible(least.next, least.largest, tol.rank_rel) {
        return Err(Error::NoUniqueMeet { expected: "a single point" });
    }
    if !linalg::negligible(least.smallest, least.largest, libm::sqrt(tol.rank_rel)) {
        return Err(Error::MeetEmpty);
    }
    let xa = least.vector.rows(0, ka).into_owned();
    let xb = least.vector.rows(ka, m.ncols() - ka).into_owned();
    let pa = &a.basis * xa;
    let pb = &b.basis * xb;
    HPoint::new(pa + pb)
}

/// Cross-ratio `det(p1,p2)det(p3,p4) / (det(p2,p3)det(p4,p1))` evaluated in
/// an orthonormal basis of the carrier line.
pub fn cross_ratio(points: [&HPoint; 4], carrier: &Subspace, tol: &Tolerance) -> Result<f64> {
    if carrier.proj_dim() != 1 {
        return Err(Error::InvalidInput("cross-ratio carrier must be a line".into()));
    }
    let mut c = [[0.0f64; 2]; 4];
    for (k, p) in points.iter().enumerate() {
        if p.coords.len() != carrier.basis.nrows() {
            return Err(Error::MixedAmbient { left: carrier.ambient_dim(), right: p.ambient_dim() });
        }
        let r = carrier.residual(p);
        if r > tol.residual_abs {
            return Err(Error::NotCollinear { residual: r });
        }
        let l = carrier.local(&p.coords);
        c[k] = [l[0], l[1]];
    }
    let det = |a: [f64; 2], b: [f64; 2]| a[0] * b[1] - a[1] * b[0];
    let d23 = det(c[1], c[2]);
    let d41 = det(c[3], c[0]);
    if d23.abs() <= tol.residual_abs || d41.abs() <= tol.residual_abs {
        return Err(Error::DegenerateQuadruple);
    }
    Ok(det(c[0], c[1]) * det(c[2], c[3]) / (d23 * d41))
}

/// Cross-ratio of four collinear points, with the carrier computed as their
/// join.
pub fn cross_ratio_collinear(points: [&HPoint; 4], tol: &Tolerance) -> Result<f64> {
    let carrier = Subspace::span(&points, tol)?;
    if carrier.proj_dim() != 1 {
        return Err(if carrier.proj_dim() < 1 {
            Error::DegenerateQuadruple
        } else {
            Error::NotCollinear { residual: f64::NAN }
        });
    }
    cross_ratio(points, &carrier, tol)
}

/// Central projection `π(X) = (X ∨ C) ∩ A`.
pub fn central_projection(
    x: &HPoint,
    center: &Subspace,
    target: &Subspace,
    tol: &Tolerance,
) -> Result<HPoint> {
    check_ambient(center, target)?;
    let n = center.ambient_dim() as isize;
    if center.proj_dim() + target.proj_dim() != n - 1 || !meet(center, target, tol)?.is_empty() {
        return Err(Error::NotSupplementary);
    }
    if center.contains(x, tol) {
        return Err(Error::InCenter);
    }
    let xc = join(&[&Subspace::point(x), center], tol)?;
    meet(&xc, target, tol)?.as_point()
}

/// Projective map given by a full-column-rank matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjMap {
    matrix: Matrix,
}

impl ProjMap {
    pub fn new(matrix: Matrix, tol: &Tolerance) -> Result<Self> {
        if linalg::rank(&matrix, tol.rank_rel) != matrix.ncols() {
            return Err(Error::InvalidInput("projective map must have full column rank".into()));
        }
        Ok(ProjMap { matrix })
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn apply(&self, p: &HPoint) -> Result<HPoint> {
        if p.coords.len() != self.matrix.ncols() {
            return Err(Error::MixedAmbient {
                left: self.matrix.ncols() - 1,
                right: p.ambient_dim(),
            });
        }
        HPoint::new(&self.matrix * &p.coords)
    }

    pub fn inverse(&self) -> Result<ProjMap> {
        self.matrix
            .clone()
            .try_inverse()
            .map(|matrix| ProjMap { matrix })
            .ok_or_else(|| Error::InvalidInput("map is not invertible".into()))
    }

    pub fn compose(&self, inner: &ProjMap) -> ProjMap {
        ProjMap { matrix: &self.matrix * &inner.matrix }
    }
}

/// Seeded generator used for all fixtures.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Vector with entries uniform in [−1, 1).
pub fn random_vector<R: Rng>(rng: &mut R, len: usize) -> Vector {
    Vector::from_iterator(len, (0..len).map(|_| rng.gen_range(-1.0..1.0)))
}

/// Random point of RPⁿ.
pub fn random_point<R: Rng>(rng: &mut R, n: usize) -> HPoint {
    loop {
        if let Ok(p) = HPoint::new(random_vector(rng, n + 1)) {
            return p;
        }
    }
}

const MAX_CONDITION: f64 = 1e6;

/// Invertible map of RPⁿ with condition number below 10⁶, reproducible per
/// seed.
pub fn random_projective_map(n: usize, seed: u64) -> ProjMap {
    let mut rng = rng(seed);
    loop {
        let m = Matrix::from_fn(n + 1, n + 1, |_, _| rng.gen_range(-1.0..1.0));
        let s = linalg::left_svd(&m).values;
        let (hi, lo) = (s[0], s[s.len() - 1]);
        if lo > 0.0 && hi / lo < MAX_CONDITION {
            return ProjMap { matrix: m };
        }
    }
}
