//! Quadrics as symmetric bilinear forms.

use alloc::vec::Vec;

use crate::linalg::{self, bilinear_row, fro, sym_dim, sym_pairs, unvech, vech};
use crate::projective::{meet, HPoint, Subspace, Tolerance};
use crate::{Error, Matrix, Result, Vector};

/// Symmetric form on R^{n+1}, Frobenius-normalized.
#[derive(Debug, Clone, PartialEq)]
pub struct Quadric {
    matrix: Matrix,
}

/// Eigenvalue sign counts, canonicalized so that `plus ≥ minus`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Signature {
    pub plus: usize,
    pub minus: usize,
    pub zero: usize,
}

impl Signature {
    /// Whether the quadric of a form with this signature spans its whole
    /// space: both signs occur, or the form is a double hyperplane.
    pub fn is_full_dimensional(&self) -> bool {
        let size = self.plus + self.minus + self.zero;
        if size == 1 {
            return self.zero == 1;
        }
        (self.plus > 0 && self.minus > 0) || self.plus + self.minus == 1
    }
}

impl core::fmt::Display for Signature {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        for _ in 0..self.plus {
            f.write_str("+")?;
        }
        for _ in 0..self.minus {
            f.write_str("-")?;
        }
        for _ in 0..self.zero {
            f.write_str("0")?;
        }
        Ok(())
    }
}

/// Signature of an arbitrary symmetric matrix.
pub fn matrix_signature(m: &Matrix, tol: &Tolerance) -> Signature {
    let n = m.nrows();
    if n == 0 {
        return Signature { plus: 0, minus: 0, zero: 0 };
    }
    let eig = linalg::symmetrize(m).symmetric_eigenvalues();
    let max = eig.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let (mut plus, mut minus, mut zero) = (0, 0, 0);
    for &l in eig.iter() {
        if linalg::negligible(l.abs(), max, tol.rank_rel) {
            zero += 1;
        } else if l > 0.0 {
            plus += 1;
        } else {
            minus += 1;
        }
    }
    if minus > plus {
        core::mem::swap(&mut plus, &mut minus);
    }
    Signature { plus, minus, zero }
}

impl Quadric {
    /// Symmetrizes and normalizes `m`.
    pub fn new(m: Matrix) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() == 0 {
            return Err(Error::InvalidInput("quadric matrix must be square".into()));
        }
        if m.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("non-finite quadric entry".into()));
        }
        let s = linalg::symmetrize(&m);
        let n = fro(&s);
        if n == 0.0 {
            return Err(Error::ZeroVector);
        }
        Ok(Quadric { matrix: s / n })
    }

    pub fn from_diagonal(d: &[f64]) -> Result<Self> {
        Self::new(Matrix::from_diagonal(&Vector::from_column_slice(d)))
    }

    /// `x₀x₁ + x₂x₃ + … + x_{2d−2}x_{2d−1} + x_{2d}²` on RP^{2d}.
    pub fn standard_hyperbolic(d: usize) -> Self {
        let n = 2 * d + 1;
        let mut m = Matrix::zeros(n, n);
        for k in 0..d {
            m[(2 * k, 2 * k + 1)] = 0.5;
            m[(2 * k + 1, 2 * k)] = 0.5;
        }
        m[(2 * d, 2 * d)] = 1.0;
        Self::new(m).expect("nonzero")
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn ambient_dim(&self) -> usize {
        self.matrix.nrows() - 1
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.matrix.nrows() {
            return Err(Error::MixedAmbient { left: self.ambient_dim(), right: len.wrapping_sub(1) });
        }
        Ok(())
    }

    /// `φ(x, y)` on unit representatives.
    pub fn evaluate(&self, x: &HPoint, y: &HPoint) -> Result<f64> {
        self.check_len(x.coords().len())?;
        self.check_len(y.coords().len())?;
        Ok(self.eval_vec(x.coords(), y.coords()))
    }

    pub fn eval_vec(&self, x: &Vector, y: &Vector) -> f64 {
        x.dot(&(&self.matrix * y))
    }

    pub fn contains(&self, x: &HPoint, tol: &Tolerance) -> Result<bool> {
        Ok(self.evaluate(x, x)?.abs() <= tol.residual_abs)
    }

    /// Points conjugate to every point of `a`.
    pub fn polar(&self, a: &Subspace, tol: &Tolerance) -> Result<Subspace> {
        self.check_len(a.basis().nrows())?;
        let rows = a.basis().transpose() * &self.matrix;
        Ok(Subspace::from_orthonormal(linalg::null_space(&rows, tol.rank_rel)))
    }

    pub fn polar_of_point(&self, p: &HPoint, tol: &Tolerance) -> Result<Subspace> {
        self.polar(&Subspace::point(p), tol)
    }

    pub fn signature(&self, tol: &Tolerance) -> Signature {
        matrix_signature(&self.matrix, tol)
    }

    pub fn is_full_dimensional(&self, tol: &Tolerance) -> bool {
        self.signature(tol).is_full_dimensional()
    }

    /// Projectivized kernel of the form.
    pub fn singular_locus(&self, tol: &Tolerance) -> Subspace {
        Subspace::from_orthonormal(linalg::null_space(&self.matrix, tol.rank_rel))
    }

    /// Form `Bᵀ M B` in the intrinsic coordinates of `a`.
    pub fn restrict(&self, a: &Subspace, tol: &Tolerance) -> Result<Restriction> {
        self.check_len(a.basis().nrows())?;
        let b = a.basis();
        let m = b.transpose() * &self.matrix * b;
        let is_zero = fro(&m) <= tol.residual_abs;
        Ok(Restriction { matrix: m, is_zero })
    }

    pub fn is_isotropic(&self, a: &Subspace, tol: &Tolerance) -> Result<bool> {
        Ok(self.restrict(a, tol)?.is_zero)
    }

    /// Whether `a` is tangent to the quadric along `b ⊆ a`: `b` is isotropic and
    /// every point of `a` is conjugate to `b`.
    pub fn tangent_along(&self, a: &Subspace, b: &Subspace, tol: &Tolerance) -> Result<bool> {
        self.check_len(a.basis().nrows())?;
        self.check_len(b.basis().nrows())?;
        let r = a.containment_residual(b);
        if r > tol.residual_abs {
            return Err(Error::NotNested { residual: r });
        }
        let cross = b.basis().transpose() * &self.matrix * a.basis();
        Ok(fro(&cross) <= tol.residual_abs)
    }

    /// Congruence `Gᵀ M G`, the form pulled back along the linear map `G`.
    pub fn pull_back(&self, g: &Matrix) -> Result<Quadric> {
        Quadric::new(g.transpose() * &self.matrix * g)
    }

    /// Relative Frobenius distance after scale and sign alignment.
    pub fn distance(&self, other: &Quadric) -> f64 {
        linalg::form_distance(&self.matrix, &other.matrix)
    }
}

/// Restricted form with a flag for isotropic subspaces.
#[derive(Debug, Clone, PartialEq)]
pub struct Restriction {
    pub matrix: Matrix,
    pub is_zero: bool,
}

/// Quadric living in a subspace: the subspace and the form in its
/// orthonormal coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct SubQuadric {
    pub space: Subspace,
    pub form: Matrix,
}

impl SubQuadric {
    pub fn new(space: Subspace, form: Matrix) -> Result<Self> {
        let k = space.basis().ncols();
        if form.nrows() != k || form.ncols() != k {
            return Err(Error::InvalidInput("form does not match subspace dimension".into()));
        }
        Ok(SubQuadric { space, form: linalg::symmetrize(&form) })
    }

    /// Value `φ(x, x)` of an ambient unit vector lying in the space.
    pub fn eval_ambient(&self, x: &Vector) -> f64 {
        let l = self.space.local(x);
        l.dot(&(&self.form * &l))
    }

    /// The same quadric expressed in the coordinates of another subspace
    /// that contains this one.
    pub fn expressed_in(&self, outer: &Subspace) -> Matrix {
        // outer coordinates y map to ambient Bo y; restriction to this space
        // keeps only the component in it.
        let change = self.space.basis().transpose() * outer.basis();
        change.transpose() * &self.form * change
    }

    pub fn signature(&self, tol: &Tolerance) -> Signature {
        matrix_signature(&self.form, tol)
    }
}

/// Pencil `t₁Q₁ + t₂Q₂` of ambient forms.
///
/// For pencils produced by [`glue_pencil`], `q1` restricts to the two given
/// forms and `q2` is the pair of hyperplanes `E ∪ F`.
#[derive(Debug, Clone, PartialEq)]
pub struct Pencil {
    pub q1: Matrix,
    pub q2: Matrix,
}

/// Result of [`Pencil::member_through`].
#[derive(Debug, Clone, PartialEq)]
pub struct Member {
    pub quadric: Quadric,
    /// Coefficients `(t₁, t₂)` of the member.
    pub coefficients: (f64, f64),
    /// The point lies on every member; `quadric` is then `Q₁`.
    pub base_locus: bool,
}

impl Pencil {
    pub fn new(q1: Matrix, q2: Matrix, tol: &Tolerance) -> Result<Self> {
        if q1.shape() != q2.shape() {
            return Err(Error::MixedAmbient { left: q1.nrows() - 1, right: q2.nrows() - 1 });
        }
        let stacked = linalg::hstack(&[&vech(&q1), &vech(&q2)]);
        if linalg::rank(&stacked, tol.rank_rel) != 2 {
            return Err(Error::InvalidInput("pencil generators are proportional".into()));
        }
        Ok(Pencil { q1, q2 })
    }

    pub fn member(&self, t1: f64, t2: f64) -> Result<Quadric> {
        Quadric::new(&self.q1 * t1 + &self.q2 * t2)
    }

    /// The member vanishing at `y`.
    pub fn member_through(&self, y: &HPoint, tol: &Tolerance) -> Result<Member> {
        let v = y.coords();
        if v.len() != self.q1.nrows() {
            return Err(Error::MixedAmbient { left: self.q1.nrows() - 1, right: y.ambient_dim() });
        }
        let a = v.dot(&(&self.q1 * v));
        let b = v.dot(&(&self.q2 * v));
        if a.abs() <= tol.residual_abs && b.abs() <= tol.residual_abs {
            return Ok(Member {
                quadric: Quadric::new(self.q1.clone())?,
                coefficients: (1.0, 0.0),
                base_locus: true,
            });
        }
        Ok(Member {
            quadric: self.member(b, -a)?,
            coefficients: (b, -a),
            base_locus: false,
        })
    }
}

fn restriction_between(outer: &Subspace, inner: &Subspace, form: &Matrix) -> Matrix {
    let g = outer.basis().transpose() * inner.basis();
    g.transpose() * form * g
}

/// The unique pencil of full-dimensional quadrics that restrict to `qe` on
/// the hyperplane `e` and to `qf` on the hyperplane `f`.
///
/// `qe` and `qf` are given in the orthonormal coordinates of `e` and `f`.
/// `qf` is rescaled so that both agree on `e ∩ f`. The returned `q1`
/// restricts to `qe` and to the rescaled `qf`; `q2` is the hyperplane pair.
pub fn glue_pencil(
    e: &Subspace,
    f: &Subspace,
    qe: &Matrix,
    qf: &Matrix,
    tol: &Tolerance,
) -> Result<Pencil> {
    if e.ambient_dim() != f.ambient_dim() {
        return Err(Error::MixedAmbient { left: e.ambient_dim(), right: f.ambient_dim() });
    }
    let n1 = e.basis().nrows();
    if e.basis().ncols() + 1 != n1 || f.basis().ncols() + 1 != n1 {
        return Err(Error::InvalidInput("gluing needs two hyperplanes".into()));
    }
    if qe.nrows() != n1 - 1 || qf.nrows() != n1 - 1 {
        return Err(Error::InvalidInput("forms do not match hyperplane dimension".into()));
    }
    let ef = meet(e, f, tol)?;
    if ef.basis().ncols() + 2 != n1 {
        return Err(Error::NotDistinctHyperplanes);
    }
    if !matrix_signature(qe, tol).is_full_dimensional() {
        return Err(Error::NotFullDimensional { which: "form on E" });
    }
    if !matrix_signature(qf, tol).is_full_dimensional() {
        return Err(Error::NotFullDimensional { which: "form on F" });
    }
    let re = restriction_between(e, &ef, qe);
    let rf = restriction_between(f, &ef, qf);
    let (ne, nf) = (fro(&re), fro(&rf));
    let lambda = if nf == 0.0 && ne == 0.0 {
        1.0
    } else if nf == 0.0 || ne == 0.0 {
        return Err(Error::RestrictionMismatch { residual: 1.0 });
    } else {
        vech(&re).dot(&vech(&rf)) / (nf * nf)
    };
    let mismatch = if ne == 0.0 { 0.0 } else { fro(&(&re - &rf * lambda)) / ne };
    if mismatch > tol.rank_rel {
        return Err(Error::RestrictionMismatch { residual: mismatch });
    }
    if !matrix_signature(&re, tol).is_full_dimensional() {
        return Err(Error::NotFullDimensional { which: "restriction to E ∩ F" });
    }
    let qf = qf * lambda;

    // Unknowns: vech(M) followed by the common scale s.
    let unknowns = sym_dim(n1) + 1;
    let ke = n1 - 1;
    let rows_per = sym_dim(ke);
    let mut sys = Matrix::zeros(2 * rows_per, unknowns);
    let mut r = 0;
    for (basis, form) in [(e.basis(), qe), (f.basis(), &qf)] {
        for &(a, b) in sym_pairs(ke).iter() {
            let row = bilinear_row(&basis.column(a).into_owned(), &basis.column(b).into_owned());
            let scale = if a == b { 1.0 } else { core::f64::consts::SQRT_2 };
            for c in 0..row.len() {
                sys[(r, c)] = row[c] * scale;
            }
            sys[(r, unknowns - 1)] = -form[(a, b)] * scale;
            r += 1;
        }
    }
    let ns = linalg::null_space(&sys, tol.rank_rel);
    if ns.ncols() != 2 {
        return Err(Error::UnexpectedSolutionDim { dim: ns.ncols() });
    }
    let (v1, v2) = (ns.column(0).into_owned(), ns.column(1).into_owned());
    let (s1, s2) = (v1[unknowns - 1], v2[unknowns - 1]);
    let pair = &v1 * s2 - &v2 * s1;
    let pair = &pair / pair.norm();
    let mut base = if s1.abs() >= s2.abs() { &v1 / s1 } else { &v2 / s2 };
    base -= &pair * pair.dot(&base);
    let body = |v: &Vector| unvech(&v.rows(0, unknowns - 1).into_owned(), n1);
    Ok(Pencil { q1: body(&base), q2: body(&pair) })
}

/// Largest deviation of a pencil member from the prescribed restrictions.
/// `t2` is the coefficient of the pair form; the expected restrictions are
/// `t1·qe` and `t1·qf`.
pub fn glue_residual(
    pencil: &Pencil,
    e: &Subspace,
    f: &Subspace,
    qe: &Matrix,
    qf: &Matrix,
    t1: f64,
    t2: f64,
) -> f64 {
    let m = &pencil.q1 * t1 + &pencil.q2 * t2;
    let de = e.basis().transpose() * &m * e.basis() - qe * t1;
    let df = f.basis().transpose() * &m * f.basis() - qf * t1;
    fro(&de).max(fro(&df))
}

/// Basis of all forms vanishing on the given points and isotropic on the
/// given subspaces, as an independent check of constructed quadrics.
pub fn fit_quadric_oracle(
    incident: &[HPoint],
    isotropic: &[Subspace],
    tol: &Tolerance,
) -> Result<Vec<Quadric>> {
    let n1 = incident
        .first()
        .map(|p| p.coords().len())
        .or_else(|| isotropic.first().map(|s| s.basis().nrows()))
        .ok_or_else(|| Error::InvalidInput("nothing to fit".into()))?;
    let mut rows: Vec<Vector> = Vec::new();
    for p in incident {
        if p.coords().len() != n1 {
            return Err(Error::MixedAmbient { left: n1 - 1, right: p.ambient_dim() });
        }
        rows.push(bilinear_row(p.coords(), p.coords()));
    }
    for s in isotropic {
        if s.basis().nrows() != n1 {
            return Err(Error::MixedAmbient { left: n1 - 1, right: s.ambient_dim() });
        }
        let k = s.basis().ncols();
        for a in 0..k {
            for b in a..k {
                rows.push(bilinear_row(
                    &s.basis().column(a).into_owned(),
                    &s.basis().column(b).into_owned(),
                ));
            }
        }
    }
    let mut sys = Matrix::zeros(rows.len(), sym_dim(n1));
    for (r, row) in rows.iter().enumerate() {
        sys.set_row(r, &row.transpose());
    }
    let ns = linalg::null_space(&sys, tol.rank_rel);
    (0..ns.ncols()).map(|k| Quadric::new(unvech(&ns.column(k).into_owned(), n1))).collect()
}
