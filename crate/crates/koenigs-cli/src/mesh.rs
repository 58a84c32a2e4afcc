//! Affine charts, sampled geometry and OBJ/JSON mesh output.

use std::fmt::Write;

use koenigs_core::conics::FaceConic;
use koenigs_core::quadric::Signature;
use koenigs_core::{HPoint, QNet, Quadric, Tolerance, Vector};
use serde::Serialize;

use crate::exit::{CliError, CliResult};

/// Samples per conic polyline.
pub const CONIC_SAMPLES: usize = 64;

/// The affine chart `x_k = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Chart {
    pub ambient_dim: usize,
    pub coordinate: usize,
    /// Largest affine coordinate kept; beyond it a point counts as at infinity.
    pub clip: f64,
}

impl Chart {
    /// Parses `w=1` (the last coordinate) or `x<k>=1`.
    pub fn parse(spec: &str, ambient_dim: usize, clip: f64) -> CliResult<Chart> {
        if ambient_dim == 0 || ambient_dim > 3 {
            return Err(CliError::invalid(format!("cannot draw RP^{ambient_dim} in three dimensions")));
        }
        if !(clip.is_finite() && clip > 0.0) {
            return Err(CliError::invalid("clip bound must be positive"));
        }
        let name = spec
            .strip_suffix("=1")
            .ok_or_else(|| CliError::invalid(format!("chart {spec:?} is not of the form <coordinate>=1")))?;
        let coordinate = match name {
            "w" => ambient_dim,
            _ => name
                .strip_prefix('x')
                .and_then(|k| k.parse::<usize>().ok())
                .filter(|&k| k <= ambient_dim)
                .ok_or_else(|| CliError::invalid(format!("unknown chart coordinate {name:?}")))?,
        };
        Ok(Chart { ambient_dim, coordinate, clip })
    }

    /// Affine image padded to three coordinates, `None` beyond the clip bound.
    pub fn affine(&self, x: &Vector) -> Option<[f64; 3]> {
        let w = x[self.coordinate];
        let mut out = [0.0; 3];
        let mut k = 0;
        for (idx, v) in x.iter().enumerate() {
            if idx == self.coordinate {
                continue;
            }
            let a = v / w;
            if !a.is_finite() || a.abs() > self.clip {
                return None;
            }
            out[k] = a;
            k += 1;
        }
        Some(out)
    }

    fn require(&self, x: &Vector, what: &str) -> CliResult<[f64; 3]> {
        self.affine(x)
            .ok_or_else(|| CliError::invalid(format!("{what} lies beyond the clip bound {} of the chart", self.clip)))
    }
}

/// Geometry in affine coordinates; indices are zero-based.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Mesh {
    pub vertices: Vec<[f64; 3]>,
    pub quads: Vec<[usize; 4]>,
    pub triangles: Vec<[usize; 3]>,
    /// Closed polylines, the first index repeated at the end.
    pub polylines: Vec<Vec<usize>>,
}

impl Mesh {
    fn push(&mut self, v: [f64; 3]) -> usize {
        self.vertices.push(v);
        self.vertices.len() - 1
    }

    /// Net vertices row-major and one quad per face, counterclockwise in
    /// the parameter domain. Every vertex must be inside the chart.
    pub fn add_net(&mut self, net: &QNet, chart: &Chart) -> CliResult<()> {
        let base = self.vertices.len();
        for (k, p) in net.points().iter().enumerate() {
            let v = chart.require(p.coords(), &format!("vertex {k}"))?;
            self.push(v);
        }
        let c = net.cols();
        for j in 0..net.rows() - 1 {
            for i in 0..c - 1 {
                let at = |i: usize, j: usize| base + j * c + i;
                self.quads.push([at(i, j), at(i + 1, j), at(i + 1, j + 1), at(i, j + 1)]);
            }
        }
        Ok(())
    }

    /// One closed polyline per face conic.
    pub fn add_conics(&mut self, conics: &[FaceConic], chart: &Chart, tol: &Tolerance) -> CliResult<()> {
        for c in conics {
            let pts = c.sample(CONIC_SAMPLES, tol)?;
            let line = self.polyline(&pts, chart, &format!("conic of face {:?}", c.face))?;
            self.polylines.push(line);
        }
        Ok(())
    }

    fn polyline(&mut self, pts: &[HPoint], chart: &Chart, what: &str) -> CliResult<Vec<usize>> {
        // Align the samples into one continuous lift; a sign change of the
        // chart coordinate then means the curve crosses infinity.
        let mut lift: Vec<Vector> = Vec::with_capacity(pts.len());
        for p in pts {
            let x = p.coords().clone();
            let flip = lift.last().is_some_and(|prev| prev.dot(&x) < 0.0);
            lift.push(if flip { -x } else { x });
        }
        let w: Vec<f64> = lift.iter().map(|x| x[chart.coordinate]).collect();
        let wrap = lift[0].dot(&lift[lift.len() - 1]).signum();
        let crosses = w.windows(2).any(|p| p[0] * p[1] <= 0.0) || w[0] * w[w.len() - 1] * wrap <= 0.0;
        if crosses {
            return Err(CliError::invalid(format!("{what} crosses infinity in the chart")));
        }
        let mut line = Vec::with_capacity(pts.len() + 1);
        for p in pts {
            let v = chart.require(p.coords(), what)?;
            line.push(self.push(v));
        }
        line.push(line[0]);
        Ok(line)
    }

    /// A quadric of RP^2 as a conic polyline, of RP^3 as a triangulated
    /// surface. Triangles reaching beyond the clip bound are dropped.
    pub fn add_quadric(&mut self, q: &Quadric, chart: &Chart, density: usize, tol: &Tolerance) -> CliResult<()> {
        let (sig, frame) = frame(q, tol);
        match (q.ambient_dim(), sig.plus, sig.minus, sig.zero) {
            (2, 2, 1, 0) => {
                let pts = (0..CONIC_SAMPLES)
                    .map(|k| {
                        let th = std::f64::consts::TAU * k as f64 / CONIC_SAMPLES as f64;
                        HPoint::new(&frame[0] * th.cos() + &frame[1] * th.sin() + &frame[2])
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                let line = self.polyline(&pts, chart, "conic")?;
                self.polylines.push(line);
                Ok(())
            }
            (3, 3, 1, 0) => self.surface(chart, density, density / 2 + 1, false, |th, s| {
                let ph = std::f64::consts::PI * s;
                (&frame[0] * th.cos() + &frame[1] * th.sin()) * ph.sin() + &frame[2] * ph.cos() + &frame[3]
            }),
            (3, 2, 2, 0) => self.surface(chart, density, density, true, |th, s| {
                let ps = std::f64::consts::TAU * s;
                &frame[0] * th.cos() + &frame[1] * th.sin() + &frame[2] * ps.cos() + &frame[3] * ps.sin()
            }),
            (3, 2, 1, 1) => self.surface(chart, density, density / 2 + 1, false, |th, s| {
                // Lines through the vertex: both nappes for s in [0, 1].
                let a = std::f64::consts::PI * (s - 0.5);
                (&frame[0] * th.cos() + &frame[1] * th.sin() + &frame[2]) * a.cos() + &frame[3] * a.sin()
            }),
            (2 | 3, _, _, _) if sig.zero == 0 && sig.minus == 0 => {
                Err(CliError::invalid("quadric has no real points"))
            }
            (2 | 3, ..) => Err(CliError::degenerate(format!(
                "no sampling for signature ({}, {}, {})",
                sig.plus, sig.minus, sig.zero
            ))),
            (n, ..) => Err(CliError::invalid(format!("cannot draw a quadric of RP^{n}"))),
        }
    }

    /// Grid of `around × along` samples, periodic in the first parameter and
    /// optionally in the second.
    fn surface<F>(&mut self, chart: &Chart, around: usize, along: usize, periodic: bool, f: F) -> CliResult<()>
    where
        F: Fn(f64, f64) -> Vector,
    {
        if around < 3 || along < 2 {
            return Err(CliError::invalid("sampling density must be at least 4"));
        }
        let steps = if periodic { along } else { along - 1 };
        let mut ids = vec![None; around * along];
        let first = self.vertices.len();
        for b in 0..along {
            for a in 0..around {
                let th = std::f64::consts::TAU * a as f64 / around as f64;
                let s = b as f64 / steps as f64;
                if let Some(v) = chart.affine(&f(th, s)) {
                    // Poles and cone vertices are shared so the mesh closes up.
                    let close = |w: &[f64; 3]| (0..3).all(|k| (w[k] - v[k]).abs() <= 1e-12 * (1.0 + v[k].abs()));
                    let id = (first..self.vertices.len()).find(|&k| close(&self.vertices[k]));
                    ids[b * around + a] = Some(id.unwrap_or_else(|| self.push(v)));
                }
            }
        }
        let before = self.triangles.len();
        let rows = if periodic { along } else { along - 1 };
        for b in 0..rows {
            for a in 0..around {
                let (a1, b1) = ((a + 1) % around, (b + 1) % along);
                let at = |a: usize, b: usize| ids[b * around + a];
                for tri in [[at(a, b), at(a1, b), at(a1, b1)], [at(a, b), at(a1, b1), at(a, b1)]] {
                    if let [Some(x), Some(y), Some(z)] = tri {
                        if x != y && y != z && x != z {
                            self.triangles.push([x, y, z]);
                        }
                    }
                }
            }
        }
        if self.triangles.len() == before {
            return Err(CliError::invalid("the whole surface lies beyond the clip bound of the chart"));
        }
        Ok(())
    }

    /// `v` lines, then `f` quads and triangles, then `l` polylines, all
    /// 1-indexed.
    pub fn to_obj(&self) -> String {
        let mut s = String::new();
        for v in &self.vertices {
            let _ = writeln!(s, "v {} {} {}", v[0], v[1], v[2]);
        }
        for q in &self.quads {
            let _ = writeln!(s, "f {} {} {} {}", q[0] + 1, q[1] + 1, q[2] + 1, q[3] + 1);
        }
        for t in &self.triangles {
            let _ = writeln!(s, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1);
        }
        for l in &self.polylines {
            s.push('l');
            for k in l {
                let _ = write!(s, " {}", k + 1);
            }
            s.push('\n');
        }
        s
    }
}

/// Signature with the majority sign made positive, and `|λ|^{-1/2}`-scaled
/// eigenvectors ordered positive, negative, kernel.
fn frame(q: &Quadric, tol: &Tolerance) -> (Signature, Vec<Vector>) {
    // Count the signature from the eigenvalues sampled here, so the sign
    // flip and the frame agree.
    let mut m = q.matrix().clone();
    let mut eig = m.clone().symmetric_eigen();
    let scale = eig.eigenvalues.iter().fold(0.0f64, |a, l| a.max(l.abs()));
    let cut = tol.rank_rel * scale;
    let count = |e: &Vector, pos: bool| e.iter().filter(|&&l| if pos { l > cut } else { l < -cut }).count();
    if count(&eig.eigenvalues, false) > count(&eig.eigenvalues, true) {
        m = -m;
        eig = m.symmetric_eigen();
    }
    let (plus, minus) = (count(&eig.eigenvalues, true), count(&eig.eigenvalues, false));
    let sig = Signature { plus, minus, zero: eig.eigenvalues.len() - plus - minus };
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    let class = |l: f64| if l > cut { 0 } else if l < -cut { 1 } else { 2 };
    order.sort_by(|&a, &b| {
        let (la, lb) = (eig.eigenvalues[a], eig.eigenvalues[b]);
        class(la).cmp(&class(lb)).then(lb.abs().total_cmp(&la.abs()))
    });
    let vecs = order
        .into_iter()
        .map(|k| {
            let l = eig.eigenvalues[k].abs();
            let v = eig.eigenvectors.column(k).into_owned();
            if l > cut {
                v / l.sqrt()
            } else {
                v
            }
        })
        .collect();
    (sig, vecs)
}
