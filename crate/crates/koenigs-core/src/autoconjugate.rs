//! Discrete autoconjugate curves and their correspondence with Kœnigs
//! d-grids.

use alloc::vec::Vec;

use rand::Rng;

use crate::grid;
use crate::linalg;
use crate::projective::{self, join, HPoint, Subspace, Tolerance};
use crate::qnet::{self, QNet, Sign};
use crate::quadric::Quadric;
use crate::{Error, Matrix, Result, Vector};

/// Discrete curve on a finite window of indices.
#[derive(Debug, Clone, PartialEq)]
pub struct DCurve {
    origin: i64,
    points: Vec<HPoint>,
}

impl DCurve {
    pub fn new(origin: i64, points: Vec<HPoint>) -> Result<Self> {
        let first = points.first().ok_or(Error::WindowTooSmall)?;
        let n = first.coords().len();
        if let Some(p) = points.iter().find(|p| p.coords().len() != n) {
            return Err(Error::MixedAmbient { left: n - 1, right: p.ambient_dim() });
        }
        Ok(DCurve { origin, points })
    }

    pub fn origin(&self) -> i64 {
        self.origin
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[HPoint] {
        &self.points
    }

    pub fn get(&self, k: usize) -> &HPoint {
        &self.points[k]
    }

    pub fn at_global(&self, g: i64) -> Option<&HPoint> {
        let k = g - self.origin;
        if k < 0 || k as usize >= self.points.len() {
            None
        } else {
            Some(&self.points[k as usize])
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.points[0].ambient_dim()
    }

    /// Largest chordal distance over the common global index range, with
    /// the number of compared points.
    pub fn distance(&self, other: &DCurve) -> (f64, usize) {
        let lo = self.origin.max(other.origin);
        let hi = (self.origin + self.len() as i64).min(other.origin + other.len() as i64);
        let mut worst = 0.0f64;
        let mut count = 0;
        for g in lo..hi {
            let (a, b) = (self.at_global(g).expect("in range"), other.at_global(g).expect("in range"));
            worst = worst.max(a.distance(b));
            count += 1;
        }
        (worst, count)
    }
}

/// `C_(k)(j) = γ(j) ∨ … ∨ γ(j+k)`, empty for `k = −1`.
pub fn osculating_space(curve: &DCurve, j: usize, k: isize, tol: &Tolerance) -> Result<Subspace> {
    if k < -1 {
        return Err(Error::InvalidInput("osculating order below −1".into()));
    }
    if k == -1 {
        return Ok(Subspace::empty(curve.ambient_dim()));
    }
    let end = j + k as usize;
    if end >= curve.len() {
        return Err(Error::IndexOutOfRange { index: end, len: curve.len() });
    }
    let pts: Vec<&HPoint> = curve.points[j..=end].iter().collect();
    Subspace::span(&pts, tol)
}

/// Every osculating space `C_(k)` with `k ≤ kmax` has dimension `k`.
pub fn osculating_dims_maximal(curve: &DCurve, kmax: usize, tol: &Tolerance) -> Result<bool> {
    if curve.len() < kmax + 1 {
        return Err(Error::WindowTooSmall);
    }
    for k in 0..=kmax {
        for j in 0..curve.len() - k {
            if osculating_space(curve, j, k as isize, tol)?.proj_dim() != k as isize {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Osculating spaces of every order up to the ambient dimension are maximal.
pub fn is_generic_curve(curve: &DCurve, tol: &Tolerance) -> Result<bool> {
    osculating_dims_maximal(curve, curve.ambient_dim(), tol)
}

/// Two curves in `RP^{2d}` with the quadric they are autoconjugate for.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvePair {
    pub sigma: DCurve,
    pub tau: DCurve,
    pub quadric: Quadric,
    pub d: usize,
}

/// `dim S_(k)(j) ∨ T_(n−k−1)(i) = n` for all `−1 ≤ k ≤ n` and all indices.
pub fn is_generic_pair(sigma: &DCurve, tau: &DCurve, tol: &Tolerance) -> Result<bool> {
    let n = sigma.ambient_dim();
    if tau.ambient_dim() != n {
        return Err(Error::MixedAmbient { left: n, right: tau.ambient_dim() });
    }
    if sigma.len() < n + 1 || tau.len() < n + 1 {
        return Err(Error::WindowTooSmall);
    }
    for k in -1..=(n as isize) {
        let kt = n as isize - k - 1;
        let js = sigma.len() - (k.max(0) as usize);
        let is = tau.len() - (kt.max(0) as usize);
        for j in 0..js {
            let s = osculating_space(sigma, j, k, tol)?;
            for i in 0..is {
                let t = osculating_space(tau, i, kt, tol)?;
                if join(&[&s, &t], tol)?.proj_dim() != n as isize {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// Every osculating `(d−1)`-space lies in the quadric.
pub fn is_autoconjugate(curve: &DCurve, q: &Quadric, d: usize, tol: &Tolerance) -> Result<bool> {
    if d == 0 || curve.len() < d {
        return Err(Error::WindowTooSmall);
    }
    for j in 0..=curve.len() - d {
        let c = osculating_space(curve, j, d as isize - 1, tol)?;
        if !q.is_isotropic(&c, tol)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Largest restriction norm of the osculating `(d−1)`-spaces.
pub fn autoconjugacy_residual(curve: &DCurve, q: &Quadric, d: usize, tol: &Tolerance) -> Result<f64> {
    let mut worst = 0.0f64;
    for j in 0..=curve.len().saturating_sub(d) {
        let c = osculating_space(curve, j, d as isize - 1, tol)?;
        worst = worst.max(linalg::fro(&q.restrict(&c, tol)?.matrix));
    }
    Ok(worst)
}

const STEP_ATTEMPTS: usize = 200;
const CURVE_ATTEMPTS: usize = 50;
/// Smallest accepted ratio of the two eigenvalues of a restricted 2×2 form
/// and smallest accepted distance of a new point from the previous
/// osculating space.
const MARGIN: f64 = 1e-2;

/// Grow an autoconjugate curve point by point.
///
/// Each new point is isotropic and conjugate to the previous `d−1` points,
/// which keeps every `d` consecutive points spanning an isotropic space. The
/// remaining freedom is drawn at random: a random line in the admissible
/// linear space is cut with the quadric, and of the two intersection points
/// the one farther from the recent osculating space is kept. With `confine`
/// the curve stays in the polar hyperplane of that point.
pub fn grow_curve<R: Rng>(
    q: &Quadric,
    d: usize,
    len: usize,
    confine: Option<&HPoint>,
    rng: &mut R,
    tol: &Tolerance,
) -> Result<Vec<HPoint>> {
    let m = q.matrix();
    let n1 = m.nrows();
    let free_dim = n1 - usize::from(confine.is_some());
    let mut pts: Vec<HPoint> = Vec::with_capacity(len);
    while pts.len() < len {
        let k = pts.len();
        let mut rows: Vec<Vector> = Vec::new();
        for p in pts.iter().rev().take(d.saturating_sub(1)) {
            rows.push(m * p.coords());
        }
        if let Some(c) = confine {
            rows.push(m * c.coords());
        }
        let admissible = if rows.is_empty() {
            Matrix::identity(n1, n1)
        } else {
            let refs: Vec<&Vector> = rows.iter().collect();
            linalg::null_space(&linalg::hstack(&refs).transpose(), tol.rank_rel)
        };
        if admissible.ncols() < 2 {
            return Err(Error::GenerationFailed("no room for a new point".into()));
        }
        let recent = k.min(free_dim - 1);
        let previous = if recent == 0 {
            Subspace::empty(n1 - 1)
        } else {
            let refs: Vec<&HPoint> = pts[k - recent..].iter().collect();
            Subspace::span(&refs, tol)?
        };
        let mut chosen = None;
        for _ in 0..STEP_ATTEMPTS {
            let u = &admissible * projective::random_vector(rng, admissible.ncols());
            let v = &admissible * projective::random_vector(rng, admissible.ncols());
            let (u, v) = (u.normalize(), v.normalize());
            let g = Matrix::from_row_slice(2, 2, &[
                u.dot(&(m * &u)),
                u.dot(&(m * &v)),
                v.dot(&(m * &u)),
                v.dot(&(m * &v)),
            ]);
            let eig = g.symmetric_eigen();
            let (l0, l1) = (eig.eigenvalues[0], eig.eigenvalues[1]);
            if l0 * l1 >= 0.0 || l0.abs().min(l1.abs()) < MARGIN * l0.abs().max(l1.abs()) {
                continue;
            }
            let (pos, neg) = if l0 > 0.0 { (0, 1) } else { (1, 0) };
            let (lp, ln) = (eig.eigenvalues[pos], -eig.eigenvalues[neg]);
            let ep = eig.eigenvectors.column(pos).into_owned();
            let en = eig.eigenvectors.column(neg).into_owned();
            let best = [1.0, -1.0]
                .iter()
                .map(|s| {
                    let c = &ep * libm::sqrt(ln) + &en * (s * libm::sqrt(lp));
                    let x = &u * c[0] + &v * c[1];
                    HPoint::new(x)
                })
                .filter_map(|p| p.ok())
                .map(|p| (previous.residual(&p), p))
                .max_by(|a, b| a.0.total_cmp(&b.0));
            if let Some((r, p)) = best {
                if r > MARGIN {
                    chosen = Some(p);
                    break;
                }
            }
        }
        pts.push(chosen.ok_or_else(|| Error::GenerationFailed("no admissible step".into()))?);
    }
    Ok(pts)
}

/// Generic pair of autoconjugate curves of `len` points for the standard
/// quadric of signature `(d+1, d)`.
pub fn generate_pair(d: usize, len: usize, seed: u64, tol: &Tolerance) -> Result<CurvePair> {
    if d == 0 || len < 2 * d + 2 {
        return Err(Error::GenerationFailed(alloc::format!(
            "need d ≥ 1 and at least {} points",
            2 * d + 2
        )));
    }
    let q = Quadric::standard_hyperbolic(d);
    let mut rng = projective::rng(seed);
    for _ in 0..CURVE_ATTEMPTS {
        let s = DCurve::new(0, grow_curve(&q, d, len, None, &mut rng, tol)?)?;
        let t = DCurve::new(0, grow_curve(&q, d, len, None, &mut rng, tol)?)?;
        if is_generic_curve(&s, tol)? && is_generic_curve(&t, tol)? && is_generic_pair(&s, &t, tol)? {
            return Ok(CurvePair { sigma: s, tau: t, quadric: q, d });
        }
    }
    Err(Error::GenerationFailed("no generic pair within the retry budget".into()))
}

/// `P(i,j) = S^⊥_(d−1)(j) ∩ T^⊥_(d−1)(i)`, the polar point of the join of
/// the two osculating spaces.
///
/// The grid's origin is `(τ origin, σ origin)`.
pub fn curves_to_grid(pair: &CurvePair, tol: &Tolerance) -> Result<QNet> {
    let d = pair.d;
    let (ls, lt) = (pair.sigma.len(), pair.tau.len());
    if ls < d || lt < d {
        return Err(Error::WindowTooSmall);
    }
    let origin = (pair.tau.origin, pair.sigma.origin);
    QNet::from_fn(origin, lt - d + 1, ls - d + 1, |i, j| {
        polar_point(pair, d as isize - 1, j, d as isize - 1, i, tol)
    })
}

/// `S^⊥_(ks)(j) ∩ T^⊥_(kt)(i)` when it is a single point.
fn polar_point(pair: &CurvePair, ks: isize, j: usize, kt: isize, i: usize, tol: &Tolerance) -> Result<HPoint> {
    let s = osculating_space(&pair.sigma, j, ks, tol)?;
    let t = osculating_space(&pair.tau, i, kt, tol)?;
    let jn = join(&[&s, &t], tol)?;
    if jn.proj_dim() != pair.sigma.ambient_dim() as isize - 1 {
        return Err(Error::NotGenericPair);
    }
    pair.quadric.polar(&jn, tol)?.as_point().map_err(|_| Error::NotGenericPair)
}

/// Largest deviation of the Laplace transforms `P_k` of the grid from
/// `S^⊥_(d−k−1)(j+k) ∩ T^⊥_(d+k−1)(i)`, for `k = 0..d`.
pub fn laplace_formula_residual(pair: &CurvePair, grid: &QNet, tol: &Tolerance) -> Result<f64> {
    let d = pair.d;
    let mut worst = 0.0f64;
    let mut cur = grid.clone();
    for k in 0..=d {
        if k > 0 {
            cur = qnet::laplace_transform(&cur, Sign::Plus, tol)?;
        }
        for j in 0..cur.rows() {
            for i in 0..cur.cols() {
                let expected =
                    polar_point(pair, d as isize - k as isize - 1, j + k, (d + k) as isize - 1, i, tol)?;
                worst = worst.max(expected.distance(cur.get(i, j)));
            }
        }
    }
    Ok(worst)
}

/// Curves recovered from a generic grid, with the checks made on the way.
#[derive(Debug, Clone)]
pub struct RecoveredCurves {
    pub pair: CurvePair,
    /// Largest distance of `D_d(i)` from `τ(i+1)`.
    pub dd_tau_residual: f64,
    /// Largest distance of `D_{−d}(j)` from `σ(j+1)`.
    pub dmd_sigma_residual: f64,
    /// Largest `|φ(D_d(k), P_d(m))|` over `m = k+1−d .. k+d`.
    pub conjugacy_residual: f64,
    /// `None` when the recovered curves are too short to decide.
    pub generic_pair: Option<bool>,
    pub autoconjugate: bool,
}

/// `σ(j) = S^h(j) ∩ … ∩ S^h(j+d−1)` and `τ(i) = T^v(i) ∩ … ∩ T^v(i+d−1)` from
/// the special instance, indexed so that a grid built from curves gives
/// those curves back: the returned `σ` has origin `grid origin + d − 1`.
pub fn grid_to_curves(net: &QNet, d: usize, tol: &Tolerance) -> Result<RecoveredCurves> {
    let special = grid::special_structure(net, d, tol)?;
    let s_spaces = qnet::parameter_spaces(&special.s, qnet::Direction::Row, tol);
    let t_spaces = qnet::parameter_spaces(&special.t, qnet::Direction::Col, tol);
    let meet_run = |spaces: &[Subspace], k: usize| -> Result<HPoint> {
        let refs: Vec<&Subspace> = spaces[k..k + d].iter().collect();
        let m = projective::meet_all(&refs, tol)?;
        if m.proj_dim() == 0 {
            m.as_point()
        } else {
            Err(Error::NotGeneric(alloc::format!("meet of contact spaces has dimension {}", m.proj_dim())))
        }
    };
    let sigma_pts = (0..=s_spaces.len() - d).map(|j| meet_run(&s_spaces, j)).collect::<Result<Vec<_>>>()?;
    let tau_pts = (0..=t_spaces.len() - d).map(|i| meet_run(&t_spaces, i)).collect::<Result<Vec<_>>>()?;
    let shift = d as i64 - 1;
    let sigma = DCurve::new(net.origin().1 + shift, sigma_pts)?;
    let tau = DCurve::new(net.origin().0 + shift, tau_pts)?;

    let dnet = qnet::diagonal_net(net, tol)?;
    let (dd, _) = qnet::iterated_laplace(&dnet, d as i32, tol);
    let (dmd, _) = qnet::iterated_laplace(&dnet, -(d as i32), tol);
    let dd = dd.ok_or(Error::NotGeneric("D_d does not exist".into()))?;
    let dmd = dmd.ok_or(Error::NotGeneric("D_{-d} does not exist".into()))?;
    let mut dd_tau = 0.0f64;
    for j in 0..dd.rows() {
        for i in 0..dd.cols() {
            if i + 1 < tau.len() {
                dd_tau = dd_tau.max(dd.get(i, j).distance(tau.get(i + 1)));
            }
        }
    }
    let mut dmd_sigma = 0.0f64;
    for j in 0..dmd.rows() {
        for i in 0..dmd.cols() {
            if j + 1 < sigma.len() {
                dmd_sigma = dmd_sigma.max(dmd.get(i, j).distance(sigma.get(j + 1)));
            }
        }
    }
    let (pd, _) = qnet::iterated_laplace(net, d as i32, tol);
    let pd = pd.ok_or(Error::NotGeneric("P_d does not exist".into()))?;
    let q = &special.quadric;
    let mut conj = 0.0f64;
    for k in 0..dd.cols() {
        for m in (k as isize + 1 - d as isize)..=(k + d) as isize {
            if m < 0 || m as usize >= pd.cols() {
                continue;
            }
            conj = conj.max(q.evaluate(dd.get(k, 0), pd.get(m as usize, 0))?.abs());
        }
    }
    let generic_pair = match is_generic_pair(&sigma, &tau, tol) {
        Ok(g) => Some(g),
        Err(Error::WindowTooSmall) => None,
        Err(e) => return Err(e),
    };
    let autoconjugate = is_autoconjugate(&sigma, q, d, tol)? && is_autoconjugate(&tau, q, d, tol)?;
    Ok(RecoveredCurves {
        pair: CurvePair { sigma, tau, quadric: q.clone(), d },
        dd_tau_residual: dd_tau,
        dmd_sigma_residual: dmd_sigma,
        conjugacy_residual: conj,
        generic_pair,
        autoconjugate,
    })
}

/// Deviations of the two round trips on their common windows.
#[derive(Debug, Clone)]
pub struct RoundTrip {
    /// curves → grid → curves, over σ and τ.
    pub curves_deviation: f64,
    /// grid → curves → grid.
    pub grid_deviation: f64,
    pub compared_points: usize,
    pub recovered: RecoveredCurves,
}

/// Both round trips starting from a curve pair.
pub fn roundtrip(pair: &CurvePair, tol: &Tolerance) -> Result<RoundTrip> {
    let grid = curves_to_grid(pair, tol)?;
    let rec = grid_to_curves(&grid, pair.d, tol)?;
    let (ds, ns) = rec.pair.sigma.distance(&pair.sigma);
    let (dt, nt) = rec.pair.tau.distance(&pair.tau);
    let again = curves_to_grid(&rec.pair, tol)?;
    let mut gd = 0.0f64;
    let mut ng = 0;
    for j in 0..again.rows() {
        for i in 0..again.cols() {
            let (gi, gj) = (again.origin().0 + i as i64, again.origin().1 + j as i64);
            if let Some(p) = grid.at_global(gi, gj) {
                gd = gd.max(p.distance(again.get(i, j)));
                ng += 1;
            }
        }
    }
    Ok(RoundTrip {
        curves_deviation: ds.max(dt),
        grid_deviation: gd,
        compared_points: ns + nt + ng,
        recovered: rec,
    })
}
