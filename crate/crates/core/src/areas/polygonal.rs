use crate::geom::{convex_hull, cross, signed_area, Mat2, Vec2};
use crate::{Error, Result};

/// Polygons with area below this are rejected as degenerate.
pub const DEGENERATE_AREA: f64 = 1e-12;

/// A norm on the plane given by its (centrally symmetric, convex) unit ball.
///
/// Both the ball and its polar body are stored, counterclockwise, so that
/// evaluation `s(v) = max_f <f, v>` over polar vertices is a single pass.
#[derive(Clone, Debug, PartialEq)]
pub struct PolygonalNorm {
    ball: Vec<Vec2>,
    dual: Vec<Vec2>,
}

impl PolygonalNorm {
    /// Validates a unit-ball vertex list: even length, centrally symmetric,
    /// strictly convex. Clockwise input is reversed.
    pub fn new(mut vertices: Vec<Vec2>) -> Result<Self> {
        let n = vertices.len();
        if n < 4 || n % 2 != 0 {
            return Err(Error::InvalidNorm(format!(
                "a centrally symmetric polygon needs an even vertex count >= 4, got {n}"
            )));
        }
        if vertices.iter().any(|v| !v.x.is_finite() || !v.y.is_finite()) {
            return Err(Error::InvalidNorm("non-finite vertex".into()));
        }
        let area = signed_area(&vertices);
        if area.abs() < DEGENERATE_AREA {
            return Err(Error::DegenerateNorm(format!("ball area {area:e}")));
        }
        if area < 0.0 {
            vertices.reverse();
        }
        let scale = vertices.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let half = n / 2;
        for i in 0..half {
            if (vertices[i] + vertices[i + half]).norm() > 1e-9 * scale.max(1.0) {
                return Err(Error::InvalidNorm(format!(
                    "vertex {i} has no antipodal partner"
                )));
            }
        }
        for i in 0..n {
            let a = vertices[i];
            let b = vertices[(i + 1) % n];
            let c = vertices[(i + 2) % n];
            if cross(&(b - a), &(c - b)) <= 1e-10 * scale * scale {
                return Err(Error::InvalidNorm(format!(
                    "vertices {i}..{} are not strictly convex",
                    (i + 2) % n
                )));
            }
        }
        let dual = polar_vertices(&vertices);
        Ok(Self {
            ball: vertices,
            dual,
        })
    }

    /// The norm whose unit ball is the symmetric hull of `points ∪ -points`.
    pub fn from_symmetric_points(points: &[Vec2]) -> Result<Self> {
        let hull = symmetric_hull(points);
        let area = signed_area(&hull);
        if hull.len() < 4 || area < DEGENERATE_AREA {
            return Err(Error::DegenerateNorm(format!("hull area {area:e}")));
        }
        Ok(Self {
            dual: polar_vertices(&hull),
            ball: hull,
        })
    }

    /// The norm whose polar body is the symmetric hull of `points ∪ -points`,
    /// i.e. `v ↦ max_j |<p_j, v>|`. Returns `None` when the points span
    /// less than the plane.
    pub fn from_dual_points(points: &[Vec2]) -> Option<Self> {
        let hull = symmetric_hull(points);
        let scale = points.iter().map(|p| p.norm_squared()).fold(0.0, f64::max);
        let area = signed_area(&hull);
        if hull.len() < 4 || area <= DEGENERATE_AREA * scale.max(1e-300) {
            return None;
        }
        Some(Self {
            ball: polar_vertices(&hull),
            dual: hull,
        })
    }

    /// The ℓ∞ unit ball `[-1, 1]²`.
    pub fn sup_norm() -> Self {
        Self::new(vec![
            Vec2::new(1.0, -1.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(-1.0, 1.0),
            Vec2::new(-1.0, -1.0),
        ])
        .expect("square is a valid ball")
    }

    /// The ℓ1 unit ball.
    pub fn l1_norm() -> Self {
        Self::new(vec![
            Vec2::new(1.0, 0.0),
            Vec2::new(0.0, 1.0),
            Vec2::new(-1.0, 0.0),
            Vec2::new(0.0, -1.0),
        ])
        .expect("diamond is a valid ball")
    }

    /// Regular `n`-gon (n even) with circumradius `r`, first vertex at angle `phase`.
    pub fn regular(n: usize, r: f64, phase: f64) -> Result<Self> {
        let v = (0..n)
            .map(|k| {
                let t = phase + std::f64::consts::TAU * k as f64 / n as f64;
                Vec2::new(r * t.cos(), r * t.sin())
            })
            .collect();
        Self::new(v)
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.ball
    }

    pub fn dual_vertices(&self) -> &[Vec2] {
        &self.dual
    }

    pub fn eval(&self, v: &Vec2) -> f64 {
        self.dual.iter().map(|f| f.dot(v)).fold(0.0, f64::max)
    }

    /// Lebesgue area of the unit ball.
    pub fn ball_area(&self) -> f64 {
        signed_area(&self.ball)
    }

    /// Lebesgue area of the polar body.
    pub fn dual_area(&self) -> f64 {
        signed_area(&self.dual)
    }

    pub fn max_stretch(&self) -> f64 {
        self.dual.iter().map(|f| f.norm()).fold(0.0, f64::max)
    }

    pub fn min_stretch(&self) -> f64 {
        1.0 / self.ball.iter().map(|b| b.norm()).fold(0.0, f64::max)
    }

    /// `s ∘ L`, or `None` when `L` is singular.
    pub fn compose(&self, l: &Mat2) -> Option<Self> {
        let det = l.determinant();
        let scale = l.norm_squared();
        if det.abs() <= 1e-14 * scale.max(1e-300) {
            return None;
        }
        let inv = l.try_inverse()?;
        let lt = l.transpose();
        let mut ball: Vec<Vec2> = self.ball.iter().map(|b| inv * b).collect();
        let mut dual: Vec<Vec2> = self.dual.iter().map(|f| lt * f).collect();
        if det < 0.0 {
            ball.reverse();
            dual.reverse();
        }
        Some(Self { ball, dual })
    }

    /// Largest stretch of `s ∘ L` over unit vectors; valid for singular `L`.
    pub fn composed_max_stretch(&self, l: &Mat2) -> f64 {
        let lt = l.transpose();
        self.dual
            .iter()
            .map(|f| (lt * f).norm())
            .fold(0.0, f64::max)
    }
}

/// Polar body `{f : <f, v> <= 1 for all v in ball}`.
pub fn polar_dual(ball: &PolygonalNorm) -> Result<PolygonalNorm> {
    let area = ball.ball_area();
    if area < DEGENERATE_AREA {
        return Err(Error::DegenerateNorm(format!("ball area {area:e}")));
    }
    Ok(PolygonalNorm {
        ball: ball.dual.clone(),
        dual: ball.ball.clone(),
    })
}

fn symmetric_hull(points: &[Vec2]) -> Vec<Vec2> {
    let mut all = Vec::with_capacity(points.len() * 2);
    for p in points {
        all.push(*p);
        all.push(-p);
    }
    convex_hull(&all)
}

/// Vertices of the polar of a convex polygon containing the origin in its
/// interior: one per edge, the functional equal to 1 on that edge.
fn polar_vertices(poly: &[Vec2]) -> Vec<Vec2> {
    let n = poly.len();
    (0..n)
        .map(|i| {
            let a = poly[i];
            let b = poly[(i + 1) % n];
            let c = cross(&a, &b);
            Vec2::new(b.y - a.y, a.x - b.x) / c
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn contains_point(poly: &[Vec2], p: &Vec2, tol: f64) -> bool {
        poly.iter()
            .any(|q| (q - p).norm() < tol)
    }

    #[test]
    fn square_polar_is_diamond() {
        let sq = PolygonalNorm::sup_norm();
        let d = polar_dual(&sq).unwrap();
        assert_eq!(d.vertices().len(), 4);
        for p in [
            Vec2::new(1.0, 0.0),
            Vec2::new(0.0, 1.0),
            Vec2::new(-1.0, 0.0),
            Vec2::new(0.0, -1.0),
        ] {
            assert!(contains_point(d.vertices(), &p, 1e-12));
        }
        assert_relative_eq!(d.ball_area(), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn polar_is_involutive() {
        let k = PolygonalNorm::new(vec![
            Vec2::new(2.0, 0.1),
            Vec2::new(0.5, 1.0),
            Vec2::new(-1.0, 0.7),
            Vec2::new(-2.0, -0.1),
            Vec2::new(-0.5, -1.0),
            Vec2::new(1.0, -0.7),
        ])
        .unwrap();
        let kk = polar_dual(&polar_dual(&k).unwrap()).unwrap();
        for (a, b) in k.vertices().iter().zip(kk.vertices()) {
            assert!((a - b).norm() < 1e-9);
        }
    }

    #[test]
    fn balanced_64gon_is_nearly_self_polar() {
        // vertices at radius 1/sqrt(cos(pi/64)) put both the polygon and its
        // polar within the same distance of the unit circle
        let n = 64;
        let r = 1.0 / (std::f64::consts::PI / n as f64).cos().sqrt();
        let k = PolygonalNorm::regular(n, r, 0.0).unwrap();
        let d = polar_dual(&k).unwrap();
        let hausdorff_to_circle = |p: &PolygonalNorm| {
            let v = p.vertices();
            let outer = v.iter().map(|x| x.norm() - 1.0).fold(0.0, f64::max);
            let inner = (0..v.len())
                .map(|i| {
                    let a = v[i];
                    let b = v[(i + 1) % v.len()];
                    1.0 - cross(&a, &b).abs() / (b - a).norm()
                })
                .fold(0.0, f64::max);
            outer.max(inner)
        };
        assert!(hausdorff_to_circle(&d) < 1e-3);
    }

    #[test]
    fn degenerate_polygon_rejected() {
        let r = PolygonalNorm::new(vec![
            Vec2::new(1.0, 0.0),
            Vec2::new(0.0, 1e-14),
            Vec2::new(-1.0, 0.0),
            Vec2::new(0.0, -1e-14),
        ]);
        assert!(matches!(r, Err(Error::DegenerateNorm(_))));
    }

    #[test]
    fn asymmetric_rejected() {
        let r = PolygonalNorm::new(vec![
            Vec2::new(1.0, 0.0),
            Vec2::new(0.0, 1.0),
            Vec2::new(-1.0, 0.0),
            Vec2::new(0.0, -2.0),
        ]);
        assert!(matches!(r, Err(Error::InvalidNorm(_))));
    }

    #[test]
    fn eval_matches_sup_norm() {
        let sq = PolygonalNorm::sup_norm();
        assert_relative_eq!(sq.eval(&Vec2::new(0.3, -0.7)), 0.7, epsilon = 1e-15);
        let l1 = PolygonalNorm::l1_norm();
        assert_relative_eq!(l1.eval(&Vec2::new(0.3, -0.7)), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn dual_points_give_slab_intersection() {
        // rows of [[1,0],[0,1],[1,1]]: ball {|x|<=1, |y|<=1, |x+y|<=1}
        let rows = [Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0), Vec2::new(1.0, 1.0)];
        let s = PolygonalNorm::from_dual_points(&rows).unwrap();
        assert_eq!(s.vertices().len(), 6);
        assert_relative_eq!(s.ball_area(), 3.0, epsilon = 1e-12);
        assert!(PolygonalNorm::from_dual_points(&[Vec2::new(1.0, 1.0), Vec2::new(2.0, 2.0)]).is_none());
    }
}
