//! JSON file formats and their conversion to engine types.
//!
//! Points are homogeneous coordinate lists; nets and instances are stored
//! row-major. Every reader checks the schema tag and the shape before
//! handing data to the engine.

use std::path::Path;

use koenigs_core::autoconjugate::{CurvePair, DCurve};
use koenigs_core::conics::{Edge, Seed, TouchingInstance};
use koenigs_core::{HPoint, Matrix, QNet, Quadric};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::exit::{CliError, CliResult};

pub const QUADRIC_SCHEMA: &str = "koenigs-quadric/1";
pub const NET_SCHEMA: &str = "koenigs-net/1";
pub const INSTANCE_SCHEMA: &str = "koenigs-instance/1";
pub const CURVE_SCHEMA: &str = "koenigs-curve/1";
pub const PAIR_SCHEMA: &str = "koenigs-pair/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadricJson {
    pub schema: String,
    pub ambient_dim: usize,
    pub matrix: Vec<Vec<f64>>,
}

/// A net; grids carry the extra field `d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetJson {
    pub schema: String,
    pub ambient_dim: usize,
    pub origin: [i64; 2],
    pub rows: usize,
    pub cols: usize,
    pub points: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SeedJson {
    Parameter { face: [usize; 2], t: f64 },
    Contact { face: [usize; 2], edge: String, point: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceJson {
    pub schema: String,
    pub seed: SeedJson,
    #[serde(rename = "S")]
    pub s: NetJson,
    #[serde(rename = "T")]
    pub t: NetJson,
    /// Face parameters, one row of faces per entry.
    pub t_values: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveJson {
    pub schema: String,
    pub ambient_dim: usize,
    #[serde(default)]
    pub origin: i64,
    pub points: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairJson {
    pub schema: String,
    pub d: usize,
    pub sigma: CurveJson,
    pub tau: CurveJson,
    pub quadric: QuadricJson,
}

fn check_schema(found: &str, expected: &str) -> CliResult<()> {
    if found == expected {
        Ok(())
    } else {
        Err(CliError::invalid(format!("expected schema {expected}, found {found:?}")))
    }
}

fn point(coords: &[f64], n: usize) -> CliResult<HPoint> {
    if coords.len() != n + 1 {
        return Err(CliError::invalid(format!("point with {} coordinates in RP^{n}", coords.len())));
    }
    if coords.iter().any(|x| !x.is_finite()) {
        return Err(CliError::invalid("non-finite coordinate"));
    }
    HPoint::from_slice(coords).map_err(|_| CliError::invalid("zero vector given as a point"))
}

fn coords(p: &HPoint) -> Vec<f64> {
    p.coords().iter().copied().collect()
}

fn matrix_rows(m: &Matrix) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

impl QuadricJson {
    pub fn from_quadric(q: &Quadric) -> Self {
        QuadricJson { schema: QUADRIC_SCHEMA.into(), ambient_dim: q.ambient_dim(), matrix: matrix_rows(q.matrix()) }
    }

    pub fn to_quadric(&self) -> CliResult<Quadric> {
        check_schema(&self.schema, QUADRIC_SCHEMA)?;
        let k = self.ambient_dim + 1;
        if self.matrix.len() != k || self.matrix.iter().any(|r| r.len() != k) {
            return Err(CliError::invalid(format!("quadric matrix must be {k}×{k}")));
        }
        let flat: Vec<f64> = self.matrix.iter().flatten().copied().collect();
        let m = Matrix::from_row_slice(k, k, &flat);
        let asym = (&m - m.transpose()).abs().max();
        if asym > 1e-9 * m.abs().max().max(1.0) {
            return Err(CliError::invalid("quadric matrix is not symmetric"));
        }
        Ok(Quadric::new(m)?)
    }
}

impl NetJson {
    pub fn from_net(net: &QNet, d: Option<usize>) -> Self {
        NetJson {
            schema: NET_SCHEMA.into(),
            ambient_dim: net.ambient_dim(),
            origin: [net.origin().0, net.origin().1],
            rows: net.rows(),
            cols: net.cols(),
            points: net.points().iter().map(coords).collect(),
            d,
        }
    }

    pub fn to_net(&self) -> CliResult<QNet> {
        check_schema(&self.schema, NET_SCHEMA)?;
        if self.rows * self.cols != self.points.len() || self.rows == 0 || self.cols == 0 {
            return Err(CliError::invalid(format!(
                "{} points do not fill a {}×{} net",
                self.points.len(),
                self.cols,
                self.rows
            )));
        }
        let pts = self.points.iter().map(|c| point(c, self.ambient_dim)).collect::<CliResult<Vec<_>>>()?;
        Ok(QNet::new((self.origin[0], self.origin[1]), self.cols, self.rows, pts)?)
    }
}

fn edge_name(e: Edge) -> &'static str {
    match e {
        Edge::Bottom => "bottom",
        Edge::Top => "top",
        Edge::Left => "left",
        Edge::Right => "right",
    }
}

fn parse_edge(s: &str) -> CliResult<Edge> {
    Edge::ALL.into_iter().find(|e| edge_name(*e) == s).ok_or_else(|| CliError::invalid(format!("unknown edge {s:?}")))
}

impl SeedJson {
    pub fn from_seed(seed: &Seed) -> Self {
        match seed {
            Seed::Parameter { face, t } => SeedJson::Parameter { face: [face.0, face.1], t: *t },
            Seed::Contact { face, edge, point } => {
                SeedJson::Contact { face: [face.0, face.1], edge: edge_name(*edge).into(), point: coords(point) }
            }
        }
    }

    pub fn to_seed(&self, n: usize) -> CliResult<Seed> {
        Ok(match self {
            SeedJson::Parameter { face, t } => {
                if !t.is_finite() {
                    return Err(CliError::invalid("non-finite seed parameter"));
                }
                Seed::Parameter { face: (face[0], face[1]), t: *t }
            }
            SeedJson::Contact { face, edge, point: p } => {
                Seed::Contact { face: (face[0], face[1]), edge: parse_edge(edge)?, point: point(p, n)? }
            }
        })
    }
}

impl InstanceJson {
    pub fn from_instance(inst: &TouchingInstance) -> Self {
        let fc = inst.s.cols();
        let t_values = inst.parameters().chunks(fc.max(1)).map(|r| r.to_vec()).collect();
        InstanceJson {
            schema: INSTANCE_SCHEMA.into(),
            seed: SeedJson::from_seed(&inst.seed),
            s: NetJson::from_net(&inst.s, None),
            t: NetJson::from_net(&inst.t, None),
            t_values,
        }
    }

    pub fn check(&self) -> CliResult<()> {
        check_schema(&self.schema, INSTANCE_SCHEMA)?;
        self.s.to_net()?;
        self.t.to_net()?;
        Ok(())
    }
}

impl CurveJson {
    pub fn from_curve(c: &DCurve) -> Self {
        CurveJson {
            schema: CURVE_SCHEMA.into(),
            ambient_dim: c.ambient_dim(),
            origin: c.origin(),
            points: c.points().iter().map(coords).collect(),
        }
    }

    pub fn to_curve(&self) -> CliResult<DCurve> {
        check_schema(&self.schema, CURVE_SCHEMA)?;
        let pts = self.points.iter().map(|c| point(c, self.ambient_dim)).collect::<CliResult<Vec<_>>>()?;
        Ok(DCurve::new(self.origin, pts)?)
    }
}

impl PairJson {
    pub fn from_pair(p: &CurvePair) -> Self {
        PairJson {
            schema: PAIR_SCHEMA.into(),
            d: p.d,
            sigma: CurveJson::from_curve(&p.sigma),
            tau: CurveJson::from_curve(&p.tau),
            quadric: QuadricJson::from_quadric(&p.quadric),
        }
    }

    pub fn to_pair(&self) -> CliResult<CurvePair> {
        check_schema(&self.schema, PAIR_SCHEMA)?;
        let (sigma, tau, quadric) = (self.sigma.to_curve()?, self.tau.to_curve()?, self.quadric.to_quadric()?);
        let n = 2 * self.d;
        if self.d == 0 || [sigma.ambient_dim(), tau.ambient_dim(), quadric.ambient_dim()].iter().any(|&a| a != n) {
            return Err(CliError::invalid(format!("a pair with d = {} lives in RP^{n}", self.d)));
        }
        Ok(CurvePair { sigma, tau, quadric, d: self.d })
    }
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::invalid(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::invalid(format!("{}: {e}", path.display())))
}

/// Pretty JSON with a trailing newline.
pub fn to_text<T: Serialize>(value: &T) -> CliResult<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}
