//! Deterministic fixtures: tangent grids of the unit circle, grids from
//! autoconjugate pairs, and special grids.

use alloc::vec::Vec;

use rand::Rng;

use crate::autoconjugate::{self, CurvePair, DCurve};
use crate::projective::{self, HPoint, Subspace, Tolerance};
use crate::qnet::QNet;
use crate::quadric::Quadric;
use crate::{Error, Result};

/// The unit circle `x² + y² = w²`.
pub fn unit_circle() -> Quadric {
    Quadric::from_diagonal(&[1.0, 1.0, -1.0]).expect("nonzero")
}

/// Seeded tangent angles: rows `α_j` on an arc starting at 0, columns `β_i`
/// on an arc starting at 1.8, each jittered by a quarter step.
pub fn tangent_angles(cols: usize, rows: usize, seed: u64) -> (Vec<f64>, Vec<f64>) {
    let mut rng = projective::rng(seed);
    let mut arc = |n: usize, start: f64| -> Vec<f64> {
        let step = 1.2 / n as f64;
        (0..n).map(|k| start + step * (k as f64 + rng.gen_range(-0.25..0.25))).collect()
    };
    let alphas = arc(rows, 0.0);
    let betas = arc(cols, 1.8);
    (alphas, betas)
}

/// Point of the unit circle at angle `a`.
pub fn circle_point(a: f64) -> HPoint {
    HPoint::from_slice(&[libm::cos(a), libm::sin(a), 1.0]).expect("nonzero")
}

/// Intersection of the tangents at `a` and `b`.
pub fn tangent_meet(a: f64, b: f64) -> HPoint {
    let (s, d) = ((a + b) / 2.0, (a - b) / 2.0);
    HPoint::from_slice(&[libm::cos(s), libm::sin(s), libm::cos(d)]).expect("nonzero")
}

/// Kœnigs 1-grid in `RP²`: row `j` is the tangent of the unit circle at
/// `α_j`, column `i` the tangent at `β_i`.
pub fn tangent_grid(cols: usize, rows: usize, seed: u64) -> Result<QNet> {
    if cols < 1 || rows < 1 {
        return Err(Error::WindowTooSmall);
    }
    let (alphas, betas) = tangent_angles(cols, rows, seed);
    QNet::from_fn((0, 0), cols, rows, |i, j| Ok(tangent_meet(alphas[j], betas[i])))
}

/// The circle points whose tangents form [`tangent_grid`].
pub fn circle_pair(cols: usize, rows: usize, seed: u64) -> Result<CurvePair> {
    let (alphas, betas) = tangent_angles(cols, rows, seed);
    Ok(CurvePair {
        sigma: DCurve::new(0, alphas.iter().map(|&a| circle_point(a)).collect())?,
        tau: DCurve::new(0, betas.iter().map(|&b| circle_point(b)).collect())?,
        quadric: unit_circle(),
        d: 1,
    })
}

/// Generic Kœnigs `d`-grid from a generated autoconjugate pair of `len`
/// points per curve.
pub fn autoconjugate_grid(d: usize, len: usize, seed: u64, tol: &Tolerance) -> Result<(CurvePair, QNet)> {
    let pair = autoconjugate::generate_pair(d, len, seed, tol)?;
    let grid = autoconjugate::curves_to_grid(&pair, tol)?;
    Ok((pair, grid))
}

const SPECIAL_ATTEMPTS: usize = 50;

/// Special Kœnigs `d`-grid, `d ≥ 2`.
///
/// Both curves are autoconjugate but each lies in the polar hyperplane of a
/// point off the quadric. Then `2d` consecutive points of `τ` span that
/// hyperplane, so `P_d` collapses to its pole, and likewise `P_{−d}`.
pub fn special_grid(d: usize, len: usize, seed: u64, tol: &Tolerance) -> Result<(CurvePair, QNet)> {
    if d < 2 {
        return Err(Error::GenerationFailed("special grids need d ≥ 2".into()));
    }
    let q = Quadric::standard_hyperbolic(d);
    let mut rng = projective::rng(seed);
    let mut pole = || loop {
        let p = projective::random_point(&mut rng, 2 * d);
        if q.eval_vec(p.coords(), p.coords()) > 0.3 {
            return p;
        }
    };
    let (ps, pt) = (pole(), pole());
    let mut rng = projective::rng(seed.wrapping_add(1));
    for _ in 0..SPECIAL_ATTEMPTS {
        let s = autoconjugate::grow_curve(&q, d, len, Some(&ps), &mut rng, tol)?;
        let t = autoconjugate::grow_curve(&q, d, len, Some(&pt), &mut rng, tol)?;
        let pair = CurvePair { sigma: DCurve::new(0, s)?, tau: DCurve::new(0, t)?, quadric: q.clone(), d };
        if let Ok(grid) = autoconjugate::curves_to_grid(&pair, tol) {
            return Ok((pair, grid));
        }
    }
    Err(Error::GenerationFailed("no special grid within the retry budget".into()))
}

/// Move the corner `P(0,0)` by about `eps` inside the plane of the corner
/// face, so the result is still a Q-net.
pub fn perturb_corner(net: &QNet, eps: f64, seed: u64, tol: &Tolerance) -> Result<QNet> {
    let face = net.face(0, 0);
    let plane = Subspace::span(&face, tol)?;
    let p = face[0].coords();
    let mut rng = projective::rng(seed);
    let v = plane.basis() * projective::random_vector(&mut rng, plane.basis().ncols());
    let v = &v - p * p.dot(&v);
    let moved = HPoint::new(p + v.normalize() * eps)?;
    let mut pts = net.points().to_vec();
    pts[0] = moved;
    QNet::new(net.origin(), net.cols(), net.rows(), pts)
}
