//! SVD-backed rank decisions and small dense helpers.
//!
//! Every dimension count in the crate is derived from [`rank`],
//! [`column_span`] or [`null_space`], which all apply the same relative
//! singular-value cutoff.

use alloc::vec::Vec;

use crate::{Matrix, Vector};

/// Singular values in descending order with the matching right singular
/// vectors as columns of `v`. `v` is always square with side `m.ncols()`.
pub struct RightSvd {
    pub values: Vec<f64>,
    pub v: Matrix,
}

/// Singular values in descending order with the matching left singular
/// vectors as columns of `u`. There is one value per row of the input;
/// the surplus ones are zero.
pub struct LeftSvd {
    pub values: Vec<f64>,
    pub u: Matrix,
}

fn sorted_order(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    idx
}

/// One-sided Jacobi: rotate column pairs of `a` until all columns are
/// mutually orthogonal. Returns the final column norms and the accumulated
/// rotation, so that `a · v` has orthogonal columns of those norms.
///
/// Used instead of the bidiagonal SVD of nalgebra, whose singular vectors
/// lose accuracy on rank-deficient input.
fn jacobi(mut a: Matrix) -> (Vec<f64>, Matrix) {
    const MAX_SWEEPS: usize = 80;
    let c = a.ncols();
    let mut v = Matrix::identity(c, c);
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..c {
            for q in p + 1..c {
                let alpha = a.column(p).norm_squared();
                let beta = a.column(q).norm_squared();
                let gamma = a.column(p).dot(&a.column(q));
                if gamma == 0.0 || gamma.abs() <= f64::EPSILON * libm::sqrt(alpha * beta) {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + libm::sqrt(1.0 + zeta * zeta));
                let cs = 1.0 / libm::sqrt(1.0 + t * t);
                let sn = cs * t;
                rotate(&mut a, p, q, cs, sn);
                rotate(&mut v, p, q, cs, sn);
            }
        }
        if !rotated {
            break;
        }
    }
    let norms = (0..c).map(|k| a.column(k).norm()).collect();
    (norms, v)
}

fn rotate(m: &mut Matrix, p: usize, q: usize, cs: f64, sn: f64) {
    for r in 0..m.nrows() {
        let (x, y) = (m[(r, p)], m[(r, q)]);
        m[(r, p)] = cs * x - sn * y;
        m[(r, q)] = sn * x + cs * y;
    }
}

fn sorted_columns(values: Vec<f64>, vecs: Matrix) -> (Vec<f64>, Matrix) {
    let order = sorted_order(&values);
    let mut out = Matrix::zeros(vecs.nrows(), order.len());
    for (k, &o) in order.iter().enumerate() {
        out.set_column(k, &vecs.column(o));
    }
    (order.iter().map(|&o| values[o]).collect(), out)
}

/// Full right singular decomposition; `v` is square, so null directions
/// are returned as well.
pub fn right_svd(m: &Matrix) -> RightSvd {
    if m.ncols() == 0 {
        return RightSvd { values: Vec::new(), v: Matrix::zeros(0, 0) };
    }
    let (norms, rot) = jacobi(m.clone());
    let (values, v) = sorted_columns(norms, rot);
    RightSvd { values, v }
}

/// Full left singular decomposition; `u` is square with side `m.nrows()`.
pub fn left_svd(m: &Matrix) -> LeftSvd {
    if m.nrows() == 0 || m.ncols() == 0 {
        return LeftSvd { values: Vec::new(), u: Matrix::zeros(m.nrows(), 0) };
    }
    let (norms, rot) = jacobi(m.transpose());
    let (values, u) = sorted_columns(norms, rot);
    LeftSvd { values, u }
}

/// The single negligibility test used for all rank decisions.
#[inline]
pub fn negligible(sigma: f64, sigma_max: f64, rank_rel: f64) -> bool {
    sigma_max <= 0.0 || sigma <= rank_rel * sigma_max
}

/// Numerical rank of `m`.
pub fn rank(m: &Matrix, rank_rel: f64) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let values = left_svd(m).values;
    let max = values.first().copied().unwrap_or(0.0);
    values.iter().filter(|&&s| !negligible(s, max, rank_rel)).count()
}

/// Orthonormal basis of the column span of `m`.
pub fn column_span(m: &Matrix, rank_rel: f64) -> Matrix {
    let svd = left_svd(m);
    let max = svd.values.first().copied().unwrap_or(0.0);
    let k = svd.values.iter().filter(|&&s| !negligible(s, max, rank_rel)).count();
    svd.u.columns(0, k).into_owned()
}

/// Orthonormal basis of the null space `{x : m x = 0}`.
pub fn null_space(m: &Matrix, rank_rel: f64) -> Matrix {
    let c = m.ncols();
    if m.nrows() == 0 {
        return Matrix::identity(c, c);
    }
    if c == 0 {
        return Matrix::zeros(0, 0);
    }
    let svd = right_svd(m);
    let max = svd.values[0];
    let keep: Vec<usize> = (0..c).filter(|&k| negligible(svd.values[k], max, rank_rel)).collect();
    let mut out = Matrix::zeros(c, keep.len());
    for (col, &k) in keep.iter().enumerate() {
        out.set_column(col, &svd.v.column(k));
    }
    out
}

/// Right singular vector of the smallest singular value, with the two
/// smallest and the largest singular values.
pub struct LeastDirection {
    pub vector: Vector,
    pub smallest: f64,
    pub next: f64,
    pub largest: f64,
}

pub fn least_direction(m: &Matrix) -> LeastDirection {
    let svd = right_svd(m);
    let c = svd.values.len();
    let vector = svd.v.column(c - 1).into_owned();
    LeastDirection {
        vector,
        smallest: svd.values[c - 1],
        next: if c >= 2 { svd.values[c - 2] } else { f64::INFINITY },
        largest: svd.values[0],
    }
}

/// Stack column vectors side by side.
pub fn hstack(cols: &[&Vector]) -> Matrix {
    let n = cols.first().map(|c| c.len()).unwrap_or(0);
    let mut m = Matrix::zeros(n, cols.len());
    for (k, c) in cols.iter().enumerate() {
        m.set_column(k, c);
    }
    m
}

/// Concatenate matrices with equal row counts.
pub fn hcat(blocks: &[&Matrix]) -> Matrix {
    let rows = blocks.first().map(|b| b.nrows()).unwrap_or(0);
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut m = Matrix::zeros(rows, cols);
    let mut at = 0;
    for b in blocks {
        m.view_mut((0, at), (rows, b.ncols())).copy_from(*b);
        at += b.ncols();
    }
    m
}

/// Concatenate matrices with equal column counts.
pub fn vcat(blocks: &[&Matrix]) -> Matrix {
    let cols = blocks.first().map(|b| b.ncols()).unwrap_or(0);
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut m = Matrix::zeros(rows, cols);
    let mut at = 0;
    for b in blocks {
        m.view_mut((at, 0), (b.nrows(), cols)).copy_from(*b);
        at += b.nrows();
    }
    m
}

/// Distance between the lines spanned by two unit vectors, minimized over sign.
pub fn chordal(a: &Vector, b: &Vector) -> f64 {
    let d = (a - b).norm();
    let s = (a + b).norm();
    d.min(s)
}

/// Frobenius norm.
pub fn fro(m: &Matrix) -> f64 {
    m.norm()
}

/// Symmetric part `(m + mᵀ)/2`.
pub fn symmetrize(m: &Matrix) -> Matrix {
    (m + m.transpose()) * 0.5
}

/// Number of independent entries of a symmetric `n×n` matrix.
pub fn sym_dim(n: usize) -> usize {
    n * (n + 1) / 2
}

/// Index pairs `(a, b)` with `a ≤ b` in the order used by [`vech`].
pub fn sym_pairs(n: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(sym_dim(n));
    for a in 0..n {
        for b in a..n {
            out.push((a, b));
        }
    }
    out
}

/// Isometric half-vectorization: off-diagonal entries are scaled by √2 so
/// that the Euclidean norm of the vector equals the Frobenius norm.
pub fn vech(m: &Matrix) -> Vector {
    let n = m.nrows();
    let pairs = sym_pairs(n);
    Vector::from_iterator(
        pairs.len(),
        pairs.iter().map(|&(a, b)| {
            if a == b {
                m[(a, a)]
            } else {
                core::f64::consts::SQRT_2 * 0.5 * (m[(a, b)] + m[(b, a)])
            }
        }),
    )
}

/// Inverse of [`vech`].
pub fn unvech(v: &Vector, n: usize) -> Matrix {
    let mut m = Matrix::zeros(n, n);
    for (k, &(a, b)) in sym_pairs(n).iter().enumerate() {
        if a == b {
            m[(a, a)] = v[k];
        } else {
            let x = v[k] / core::f64::consts::SQRT_2;
            m[(a, b)] = x;
            m[(b, a)] = x;
        }
    }
    m
}

/// Row of coefficients of `uᵀ M v` as a linear functional of `vech(M)`.
pub fn bilinear_row(u: &Vector, v: &Vector) -> Vector {
    let n = u.len();
    let pairs = sym_pairs(n);
    Vector::from_iterator(
        pairs.len(),
        pairs.iter().map(|&(a, b)| {
            if a == b {
                u[a] * v[a]
            } else {
                (u[a] * v[b] + u[b] * v[a]) / core::f64::consts::SQRT_2
            }
        }),
    )
}

/// Adjugate of a 3×3 matrix.
pub fn adjugate3(m: &Matrix) -> Matrix {
    let c = |r0: usize, r1: usize, c0: usize, c1: usize| {
        m[(r0, c0)] * m[(r1, c1)] - m[(r0, c1)] * m[(r1, c0)]
    };
    let mut adj = Matrix::zeros(3, 3);
    adj[(0, 0)] = c(1, 2, 1, 2);
    adj[(0, 1)] = -c(0, 2, 1, 2);
    adj[(0, 2)] = c(0, 1, 1, 2);
    adj[(1, 0)] = -c(1, 2, 0, 2);
    adj[(1, 1)] = c(0, 2, 0, 2);
    adj[(1, 2)] = -c(0, 1, 0, 2);
    adj[(2, 0)] = c(1, 2, 0, 1);
    adj[(2, 1)] = -c(0, 2, 0, 1);
    adj[(2, 2)] = c(0, 1, 0, 1);
    adj
}

/// Cross product of 3-vectors.
pub fn cross3(a: &Vector, b: &Vector) -> Vector {
    Vector::from_vec(alloc::vec![
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ])
}

/// Distance between two forms up to a nonzero scale.
///
/// Scales are aligned through the entry of largest magnitude of `a`; the
/// result is the Frobenius distance of the aligned matrices relative to
/// `‖a‖`.
pub fn form_distance(a: &Matrix, b: &Matrix) -> f64 {
    let na = fro(a);
    if na == 0.0 {
        return if fro(b) == 0.0 { 0.0 } else { f64::INFINITY };
    }
    let (mut best, mut at) = (0.0, (0, 0));
    for r in 0..a.nrows() {
        for c in 0..a.ncols() {
            if a[(r, c)].abs() > best {
                best = a[(r, c)].abs();
                at = (r, c);
            }
        }
    }
    if b[at] == 0.0 {
        return f64::INFINITY;
    }
    let scale = a[at] / b[at];
    fro(&(a - b * scale)) / na
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn null_space_of_wide_matrix() {
        let m = Matrix::from_row_slice(1, 3, &[1.0, 1.0, 0.0]);
        let ns = null_space(&m, 1e-8);
        assert_eq!(ns.ncols(), 2);
        assert!((&m * &ns).norm() < 1e-14);
    }

    #[test]
    fn span_of_nearly_equal_columns_is_their_direction() {
        // Three copies of one unit vector, perturbed at the 1e-14 level.
        let p = [0.6739890460104937, 0.2138662335616968, 0.707106781186549];
        let m = Matrix::from_column_slice(3, 3, &[
            p[0], p[1], p[2],
            0.6739890460104938, 0.21386623356169382, 0.7071067811865479,
            0.673989046010487, 0.2138662335617148, 0.7071067811865492,
        ]);
        let span = column_span(&m, 1e-8);
        assert_eq!(span.ncols(), 1);
        let v = Vector::from_column_slice(&p);
        assert!(chordal(&span.column(0).into_owned(), &v) < 1e-13);
    }

    #[test]
    fn singular_vectors_reconstruct_the_matrix() {
        let m = Matrix::from_fn(4, 6, |r, c| libm::sin((r * 7 + c * 3) as f64));
        let right = right_svd(&m);
        let left = left_svd(&m);
        assert!(right.values.windows(2).all(|w| w[0] >= w[1]));
        for k in 0..4 {
            assert!((right.values[k] - left.values[k]).abs() < 1e-12);
            let mv = &m * right.v.column(k);
            assert!((mv.norm() - right.values[k]).abs() < 1e-12);
        }
        assert!((right.v.transpose() * &right.v - Matrix::identity(6, 6)).norm() < 1e-12);
    }

    #[test]
    fn rank_of_zero_is_zero() {
        assert_eq!(rank(&Matrix::zeros(3, 2), 1e-8), 0);
    }

    #[test]
    fn vech_roundtrip_and_isometry() {
        let m = Matrix::from_row_slice(3, 3, &[1.0, 2.0, 3.0, 2.0, 4.0, 5.0, 3.0, 5.0, 6.0]);
        let v = vech(&m);
        assert!((v.norm() - m.norm()).abs() < 1e-12);
        assert!((unvech(&v, 3) - &m).norm() < 1e-12);
    }

    #[test]
    fn bilinear_row_matches_direct_product() {
        let m = Matrix::from_row_slice(3, 3, &[1.0, -2.0, 0.5, -2.0, 4.0, 5.0, 0.5, 5.0, -6.0]);
        let u = Vector::from_vec(alloc::vec![0.3, -1.0, 2.0]);
        let w = Vector::from_vec(alloc::vec![1.5, 0.2, -0.7]);
        let direct = (u.transpose() * &m * &w)[(0, 0)];
        assert!((bilinear_row(&u, &w).dot(&vech(&m)) - direct).abs() < 1e-12);
    }

    #[test]
    fn adjugate_times_matrix_is_determinant() {
        let m = Matrix::from_row_slice(3, 3, &[2.0, 1.0, 0.0, 1.0, 3.0, 1.0, 0.0, 1.0, 4.0]);
        let prod = adjugate3(&m) * &m;
        let det = m.determinant();
        assert!((prod - Matrix::identity(3, 3) * det).norm() < 1e-12);
    }
}
