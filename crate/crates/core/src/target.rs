//! Metric target spaces as distance oracles.
//!
//! Every target stores its points as a short coordinate slice: vectors for
//! normed spaces, `(r, φ)` in the unrolled chart for cones (total angle
//! `2πα`), plane points for the collapsed disc, and a single index for
//! distance tables.

use std::f64::consts::{PI, TAU};
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::areas::{NormSpec, PolygonalNorm, QuadraticSeminorm, Seminorm};
use crate::geom::{barycentric, Mat2, Vec2};
use crate::{Error, Result};

/// Coordinates of a point in a target's own representation.
pub type AmbientPoint = Vec<f64>;

/// Images closer than this to a cone apex count as lying on it.
pub const APEX_RADIUS: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub enum NormBall {
    Euclidean,
    Sup,
    /// A polygonal norm; only for `dim == 2`.
    Polygonal(PolygonalNorm),
}

#[derive(Clone, Debug, PartialEq)]
pub enum MetricTarget {
    Normed { dim: usize, ball: NormBall },
    Cone { alpha: f64 },
    CollapsedDisc { center: Vec2, radius: f64 },
    Table { m: usize, matrix: Arc<Vec<f64>> },
}

/// Distance on the Euclidean cone of total angle `2πα` between chart points
/// `(r, φ)`.
pub fn cone_distance(alpha: f64, p: (f64, f64), q: (f64, f64)) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidTarget(format!("cone angle factor {alpha} not in (0, 1]")));
    }
    Ok(cone_distance_unchecked(alpha, p, q))
}

#[inline]
fn cone_distance_unchecked(alpha: f64, p: (f64, f64), q: (f64, f64)) -> f64 {
    let total = TAU * alpha;
    let mut delta = (p.1 - q.1).abs() % total;
    if total - delta < delta {
        delta = total - delta;
    }
    let (r, s) = (p.0, q.0);
    if delta <= PI {
        let h = (0.5 * delta).sin();
        ((r - s) * (r - s) + 4.0 * r * s * h * h).sqrt()
    } else {
        r + s
    }
}

/// Distance in `D̄ / B(center, radius)`: the shorter of the direct segment
/// and the detour through the collapsed ball.
pub fn collapsed_distance(center: &Vec2, radius: f64, p: &Vec2, q: &Vec2) -> Result<f64> {
    if !(radius > 0.0 && center.norm() + radius < 1.0) {
        return Err(Error::InvalidTarget(
            "collapsed ball must lie strictly inside the unit disc".into(),
        ));
    }
    Ok(collapsed_distance_unchecked(center, radius, p, q))
}

#[inline]
fn collapsed_distance_unchecked(center: &Vec2, radius: f64, p: &Vec2, q: &Vec2) -> f64 {
    let dp = ((p - center).norm() - radius).max(0.0);
    let dq = ((q - center).norm() - radius).max(0.0);
    (p - q).norm().min(dp + dq)
}

impl MetricTarget {
    pub fn euclidean(dim: usize) -> Self {
        MetricTarget::Normed {
            dim,
            ball: NormBall::Euclidean,
        }
    }

    pub fn sup(dim: usize) -> Self {
        MetricTarget::Normed {
            dim,
            ball: NormBall::Sup,
        }
    }

    pub fn cone(alpha: f64) -> Result<Self> {
        cone_distance(alpha, (0.0, 0.0), (0.0, 0.0))?;
        Ok(MetricTarget::Cone { alpha })
    }

    pub fn collapsed_disc(center: Vec2, radius: f64) -> Result<Self> {
        collapsed_distance(&center, radius, &center, &center)?;
        Ok(MetricTarget::CollapsedDisc { center, radius })
    }

    pub fn table(m: usize, matrix: Vec<f64>) -> Result<Self> {
        if matrix.len() != m * m {
            return Err(Error::InvalidTarget(format!(
                "distance table has {} entries, expected {}",
                matrix.len(),
                m * m
            )));
        }
        for i in 0..m {
            if matrix[i * m + i] != 0.0 {
                return Err(Error::InvalidTarget(format!("nonzero diagonal at {i}")));
            }
            for j in 0..m {
                let d = matrix[i * m + j];
                if !d.is_finite() || d < 0.0 || (d - matrix[j * m + i]).abs() > 1e-12 {
                    return Err(Error::InvalidTarget(format!(
                        "entry ({i},{j}) is negative, non-finite or asymmetric"
                    )));
                }
            }
        }
        Ok(MetricTarget::Table {
            m,
            matrix: Arc::new(matrix),
        })
    }

    /// Number of stored coordinates per point.
    pub fn coord_dim(&self) -> usize {
        match self {
            MetricTarget::Normed { dim, .. } => *dim,
            MetricTarget::Cone { .. } | MetricTarget::CollapsedDisc { .. } => 2,
            MetricTarget::Table { .. } => 1,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            MetricTarget::Normed { .. } => "normed",
            MetricTarget::Cone { .. } => "cone",
            MetricTarget::CollapsedDisc { .. } => "collapsed_disc",
            MetricTarget::Table { .. } => "table",
        }
    }

    /// Targets with property (ET): every metric differential is
    /// Euclidean-type or degenerate.
    pub fn is_et(&self) -> bool {
        match self {
            MetricTarget::Normed { ball, .. } => matches!(ball, NormBall::Euclidean),
            MetricTarget::Cone { .. } | MetricTarget::CollapsedDisc { .. } => true,
            MetricTarget::Table { .. } => false,
        }
    }

    pub fn supports_maps(&self) -> bool {
        !matches!(self, MetricTarget::Table { .. })
    }

    pub fn distance(&self, p: &[f64], q: &[f64]) -> f64 {
        match self {
            MetricTarget::Normed { ball, .. } => match ball {
                NormBall::Euclidean => p
                    .iter()
                    .zip(q)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt(),
                NormBall::Sup => p
                    .iter()
                    .zip(q)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max),
                NormBall::Polygonal(k) => k.eval(&Vec2::new(p[0] - q[0], p[1] - q[1])),
            },
            MetricTarget::Cone { alpha } => cone_distance_unchecked(*alpha, (p[0], p[1]), (q[0], q[1])),
            MetricTarget::CollapsedDisc { center, radius } => collapsed_distance_unchecked(
                center,
                *radius,
                &Vec2::new(p[0], p[1]),
                &Vec2::new(q[0], q[1]),
            ),
            MetricTarget::Table { m, matrix } => {
                let i = p[0] as usize;
                let j = q[0] as usize;
                matrix[i * m + j]
            }
        }
    }

    pub fn validate_point(&self, p: &[f64]) -> Result<()> {
        if p.len() != self.coord_dim() || p.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidTarget(format!(
                "point {p:?} has wrong dimension or non-finite coordinates"
            )));
        }
        match self {
            MetricTarget::Cone { alpha } if p[0] < 0.0 || p[1] < 0.0 || p[1] >= TAU * alpha => Err(
                Error::InvalidTarget(format!("cone chart point {p:?} outside r >= 0, 0 <= φ < 2πα")),
            ),
            MetricTarget::CollapsedDisc { .. } if p[0].hypot(p[1]) > 1.0 + 1e-9 => Err(
                Error::InvalidTarget(format!("point {p:?} outside the closed unit disc")),
            ),
            MetricTarget::Table { m, .. } if p[0] < 0.0 || p[0] as usize >= *m || p[0].fract() != 0.0 => {
                Err(Error::InvalidTarget(format!("table index {} out of range", p[0])))
            }
            _ => Ok(()),
        }
    }

    /// Interpolates the piecewise-affine map on a triangle with vertex images
    /// `pts` at barycentric weights `w`. Cones are developed locally around the
    /// first vertex.
    pub fn interpolate(&self, pts: [&[f64]; 3], w: [f64; 3], out: &mut [f64]) {
        match self {
            MetricTarget::Cone { alpha } => {
                let dev = develop(*alpha, pts);
                let x = dev[0] * w[0] + dev[1] * w[1] + dev[2] * w[2];
                undevelop(*alpha, pts[0][1], &x, out);
            }
            _ => {
                for (k, o) in out.iter_mut().enumerate() {
                    *o = w[0] * pts[0][k] + w[1] * pts[1][k] + w[2] * pts[2][k];
                }
            }
        }
    }

    /// Point at fraction `t` of the chart segment from `p` to `q`.
    pub fn lerp(&self, p: &[f64], q: &[f64], t: f64, out: &mut [f64]) {
        self.interpolate([p, q, q], [1.0 - t, t, 0.0], out);
    }

    /// For cones: whether the developed triangle contains the apex in its
    /// interior or cannot be developed consistently. Always false elsewhere.
    pub fn straddles_apex(&self, pts: [&[f64]; 3]) -> bool {
        let MetricTarget::Cone { alpha } = self else {
            return false;
        };
        if pts.iter().any(|p| p[0] <= APEX_RADIUS) {
            return false;
        }
        let total = TAU * alpha;
        let rel = |phi: f64| wrap_signed(phi - pts[0][1], total);
        let d1 = rel(pts[1][1]);
        let d2 = rel(pts[2][1]);
        if (d1 - d2).abs() > total * 0.5 || (d1 - d2).abs() > PI {
            return true;
        }
        let dev = develop(*alpha, pts);
        let b = barycentric(&Vec2::zeros(), &dev[0], &dev[1], &dev[2]);
        b.iter().all(|&x| x > 0.0)
    }

    /// Number of optimization parameters per point.
    pub fn param_dim(&self) -> usize {
        self.coord_dim()
    }

    /// Solver chart. Cones use the conformal chart `z ↦ (|z|^α, α arg z)`;
    /// every other target is its own chart.
    pub fn to_params(&self, p: &[f64], out: &mut [f64]) {
        match self {
            MetricTarget::Cone { alpha } => {
                let rho = p[0].powf(1.0 / alpha);
                let theta = p[1] / alpha;
                out[0] = rho * theta.cos();
                out[1] = rho * theta.sin();
            }
            _ => out.copy_from_slice(p),
        }
    }

    pub fn from_params(&self, z: &[f64], out: &mut [f64]) {
        match self {
            MetricTarget::Cone { alpha } => {
                let rho = z[0].hypot(z[1]);
                let mut theta = z[1].atan2(z[0]);
                if theta < 0.0 {
                    theta += TAU;
                }
                out[0] = rho.powf(*alpha);
                out[1] = (alpha * theta) % (TAU * alpha);
            }
            _ => out.copy_from_slice(z),
        }
    }

    /// Seminorm `v ↦ ‖L v‖` of the linear map with columns `col1 = L e1` and
    /// `col2 = L e2` in a normed target.
    pub fn pullback_norm(&self, col1: &[f64], col2: &[f64]) -> Result<Seminorm> {
        let MetricTarget::Normed { ball, dim } = self else {
            return Err(Error::InvalidTarget(format!(
                "pullback norms need a normed target, got {}",
                self.kind_name()
            )));
        };
        if col1.len() != *dim || col2.len() != *dim {
            return Err(Error::InvalidTarget("differential has wrong dimension".into()));
        }
        Ok(pullback(ball, col1, col2))
    }
}

pub(crate) fn pullback(ball: &NormBall, col1: &[f64], col2: &[f64]) -> Seminorm {
    match ball {
        NormBall::Euclidean => {
            let (mut a, mut b, mut c) = (0.0, 0.0, 0.0);
            for (x, y) in col1.iter().zip(col2) {
                a += x * x;
                b += x * y;
                c += y * y;
            }
            // LᵀL of a real matrix is PSD; clamp rounding
            match QuadraticSeminorm::new(Mat2::new(a, b, b, c)) {
                Ok(q) => Seminorm::Quadratic(q),
                Err(_) => Seminorm::Quadratic(QuadraticSeminorm::zero()),
            }
        }
        NormBall::Sup => {
            let rows: Vec<Vec2> = col1.iter().zip(col2).map(|(x, y)| Vec2::new(*x, *y)).collect();
            match PolygonalNorm::from_dual_points(&rows) {
                Some(p) => Seminorm::Polygonal(p),
                None => {
                    let w = rows
                        .iter()
                        .copied()
                        .max_by(|a, b| a.norm_squared().total_cmp(&b.norm_squared()))
                        .unwrap_or_else(Vec2::zeros);
                    Seminorm::Degenerate { functional: w }
                }
            }
        }
        NormBall::Polygonal(k) => {
            let l = Mat2::new(col1[0], col2[0], col1[1], col2[1]);
            match k.compose(&l) {
                Some(p) => Seminorm::Polygonal(p),
                None => {
                    let lt = l.transpose();
                    let w = k
                        .dual_vertices()
                        .iter()
                        .map(|f| lt * f)
                        .max_by(|a, b| a.norm_squared().total_cmp(&b.norm_squared()))
                        .unwrap_or_else(Vec2::zeros);
                    Seminorm::Degenerate { functional: w }
                }
            }
        }
    }
}

fn wrap_signed(x: f64, period: f64) -> f64 {
    let mut y = x % period;
    if y > 0.5 * period {
        y -= period;
    } else if y <= -0.5 * period {
        y += period;
    }
    y
}

/// Develops three cone points into the plane around the first one's angle.
fn develop(alpha: f64, pts: [&[f64]; 3]) -> [Vec2; 3] {
    let total = TAU * alpha;
    let base = pts[0][1];
    let mut out = [Vec2::zeros(); 3];
    for (o, p) in out.iter_mut().zip(pts.iter()) {
        let d = wrap_signed(p[1] - base, total);
        *o = Vec2::new(p[0] * d.cos(), p[0] * d.sin());
    }
    out
}

fn undevelop(alpha: f64, base: f64, x: &Vec2, out: &mut [f64]) {
    let total = TAU * alpha;
    out[0] = x.norm();
    let mut phi = (base + x.y.atan2(x.x)) % total;
    if phi < 0.0 {
        phi += total;
    }
    out[1] = phi;
}

/// JSON form of a target.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TargetSpec {
    Normed { dim: usize, ball: BallSpec },
    Cone { alpha: f64 },
    CollapsedDisc { center: [f64; 2], radius: f64 },
    Table { matrix_csv: String },
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum BallSpec {
    Named(String),
    Norm(NormSpec),
}

impl TargetSpec {
    /// Builds the target; relative table paths resolve against `base_dir`.
    pub fn build(&self, base_dir: Option<&Path>) -> Result<MetricTarget> {
        match self {
            TargetSpec::Normed { dim, ball } => {
                if *dim == 0 {
                    return Err(Error::InvalidTarget("normed target needs dim >= 1".into()));
                }
                let ball = match ball {
                    BallSpec::Named(s) if s == "sup" => NormBall::Sup,
                    BallSpec::Named(s) if s == "euclidean" => NormBall::Euclidean,
                    BallSpec::Named(s) => {
                        return Err(Error::InvalidTarget(format!("unknown ball '{s}'")))
                    }
                    BallSpec::Norm(spec) => {
                        if *dim != 2 {
                            return Err(Error::InvalidTarget(
                                "explicit norm balls are planar (dim = 2)".into(),
                            ));
                        }
                        match spec.build()? {
                            Seminorm::Polygonal(p) => NormBall::Polygonal(p),
                            Seminorm::Quadratic(q) => {
                                // an ellipse ball: polygonal approximation is not exact,
                                // so only the identity form maps to Euclidean
                                if (q.gram() - Mat2::identity()).norm() < 1e-15 {
                                    NormBall::Euclidean
                                } else {
                                    return Err(Error::InvalidTarget(
                                        "quadratic target balls other than the identity are unsupported".into(),
                                    ));
                                }
                            }
                            Seminorm::Degenerate { .. } => {
                                return Err(Error::InvalidTarget("degenerate ball".into()))
                            }
                        }
                    }
                };
                Ok(MetricTarget::Normed { dim: *dim, ball })
            }
            TargetSpec::Cone { alpha } => MetricTarget::cone(*alpha),
            TargetSpec::CollapsedDisc { center, radius } => {
                MetricTarget::collapsed_disc(Vec2::new(center[0], center[1]), *radius)
            }
            TargetSpec::Table { matrix_csv } => {
                let path = match base_dir {
                    Some(b) => b.join(matrix_csv),
                    None => matrix_csv.into(),
                };
                let (m, matrix) = crate::io::read_square_csv(&path)?;
                MetricTarget::table(m, matrix)
            }
        }
    }

    pub fn from_target(t: &MetricTarget) -> Option<Self> {
        Some(match t {
            MetricTarget::Normed { dim, ball } => TargetSpec::Normed {
                dim: *dim,
                ball: match ball {
                    NormBall::Euclidean => BallSpec::Named("euclidean".into()),
                    NormBall::Sup => BallSpec::Named("sup".into()),
                    NormBall::Polygonal(p) => BallSpec::Norm(NormSpec::Polygonal {
                        vertices: p.vertices().iter().map(|v| [v.x, v.y]).collect(),
                    }),
                },
            },
            MetricTarget::Cone { alpha } => TargetSpec::Cone { alpha: *alpha },
            MetricTarget::CollapsedDisc { center, radius } => TargetSpec::CollapsedDisc {
                center: [center.x, center.y],
                radius: *radius,
            },
            MetricTarget::Table { .. } => return None,
        })
    }
}
