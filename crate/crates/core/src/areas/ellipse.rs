//! Minimum-area centered enclosing ellipse (Khachiyan iteration with
//! Todd–Yildirim away steps) and the John ellipse obtained from it by polarity.

use super::polygonal::PolygonalNorm;
use super::quadratic::QuadraticSeminorm;
use crate::geom::{Mat2, Vec2};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug)]
pub struct EllipseOptions {
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for EllipseOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            max_iterations: 100_000,
        }
    }
}

/// Weighted second moment `Σ u_i p_i p_iᵀ`.
fn moment(points: &[Vec2], u: &[f64]) -> Mat2 {
    let mut m = Mat2::zeros();
    for (p, &w) in points.iter().zip(u) {
        if w != 0.0 {
            m += p * p.transpose() * w;
        }
    }
    m
}

/// Minimum-area ellipse `{x : xᵀ A x <= 1}` centered at the origin containing
/// `points`. Returns `A`.
///
/// Maximizes `log det Σ u_i p_i p_iᵀ` over the simplex; at the optimum
/// `A = (2 X(u))^{-1}`.
pub fn min_enclosing_centered_ellipse(points: &[Vec2], opts: EllipseOptions) -> Result<Mat2> {
    let n = points.len();
    if n < 2 {
        return Err(Error::DegenerateNorm("need at least two points".into()));
    }
    let d = 2.0;
    let mut u = vec![1.0 / n as f64; n];
    let mut kappa = vec![0.0; n];
    let mut kmax = f64::INFINITY;
    let mut kmin = 0.0;
    for iter in 0..opts.max_iterations {
        let x = moment(points, &u);
        let xinv = x.try_inverse().ok_or_else(|| {
            Error::DegenerateNorm("points do not span the plane".into())
        })?;
        for (k, p) in kappa.iter_mut().zip(points) {
            *k = p.dot(&(xinv * p));
        }
        let (mut jmax, mut jmin) = (0usize, usize::MAX);
        kmax = f64::NEG_INFINITY;
        kmin = f64::INFINITY;
        for i in 0..n {
            if kappa[i] > kmax {
                kmax = kappa[i];
                jmax = i;
            }
            if u[i] > 0.0 && kappa[i] < kmin {
                kmin = kappa[i];
                jmin = i;
            }
        }
        if kmax <= d * (1.0 + opts.tolerance) && kmin >= d * (1.0 - opts.tolerance) {
            return Ok((x * d).try_inverse().expect("moment already inverted"));
        }
        // toward-step on the most violated point, or away-step off the
        // least useful supporting point, whichever is further from optimal
        let (j, kj) = if kmax - d >= d - kmin {
            (jmax, kmax)
        } else {
            (jmin, kmin)
        };
        let mut tau = (kj - d) / (d * (kj - 1.0));
        if tau < 0.0 {
            // away step: keep u_j >= 0
            let floor = -u[j] / (1.0 - u[j]);
            if tau < floor {
                tau = floor;
            }
        }
        if !tau.is_finite() {
            return Err(Error::EllipseNoConvergence {
                iterations: iter,
                kappa_max: kmax,
                kappa_min: kmin,
            });
        }
        for w in u.iter_mut() {
            *w *= 1.0 - tau;
        }
        u[j] += tau;
        if u[j] < 0.0 {
            u[j] = 0.0;
        }
    }
    Err(Error::EllipseNoConvergence {
        iterations: opts.max_iterations,
        kappa_max: kmax,
        kappa_min: kmin,
    })
}

/// Euclidean norm whose unit ball is the maximum-area ellipse inscribed in
/// the unit ball of `ball`: the polar of the minimum enclosing ellipse of
/// the polar body.
pub fn john_ellipse(ball: &PolygonalNorm) -> Result<QuadraticSeminorm> {
    john_ellipse_with(ball, EllipseOptions::default())
}

pub fn john_ellipse_with(ball: &PolygonalNorm, opts: EllipseOptions) -> Result<QuadraticSeminorm> {
    let a = min_enclosing_centered_ellipse(ball.dual_vertices(), opts)?;
    // polar of {x : xᵀAx <= 1} is {y : yᵀA⁻¹y <= 1}
    let g = a
        .try_inverse()
        .ok_or_else(|| Error::DegenerateNorm("enclosing ellipse is singular".into()))?;
    QuadraticSeminorm::new(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn square_gives_unit_disc() {
        let g = john_ellipse(&PolygonalNorm::sup_norm()).unwrap();
        assert_relative_eq!(*g.gram(), Mat2::identity(), epsilon = 1e-9);
        assert_relative_eq!(PI / g.det().sqrt(), PI, epsilon = 1e-8);
    }

    #[test]
    fn diamond_gives_disc_of_radius_inv_sqrt2() {
        let g = john_ellipse(&PolygonalNorm::l1_norm()).unwrap();
        assert_relative_eq!(*g.gram(), Mat2::identity() * 2.0, epsilon = 1e-8);
        assert_relative_eq!(PI / g.det().sqrt(), PI / 2.0, epsilon = 1e-8);
    }

    /// Brute-force oracle over inscribed axis-aligned ellipses; the diamond's
    /// symmetries force its John ellipse to be axis-aligned.
    #[test]
    fn diamond_brute_force_over_axis_aligned_ellipses() {
        // inscribed axis-aligned ellipses in |x|+|y|<=1: semi-axes (p, q)
        // with p² + q² <= 1; area π p q is maximal at p = q = 1/√2
        let mut best: f64 = 0.0;
        let steps = 2000;
        for i in 1..steps {
            let p = i as f64 / steps as f64;
            let q = (1.0 - p * p).sqrt();
            best = best.max(PI * p * q);
        }
        let g = john_ellipse(&PolygonalNorm::l1_norm()).unwrap();
        let area = PI / g.det().sqrt();
        assert!((area - best).abs() < 1e-6);
    }

    #[test]
    fn ellipse_polygon_recovers_itself() {
        // the regular 64-gon circumscribed about the unit circle has the
        // circle as its John ellipse; map both by diag(2, 1)
        let n = 64;
        let r = 1.0 / (PI / n as f64).cos();
        let v: Vec<Vec2> = (0..n)
            .map(|k| {
                let t = 2.0 * PI * k as f64 / n as f64;
                Vec2::new(2.0 * r * t.cos(), r * t.sin())
            })
            .collect();
        let k = PolygonalNorm::new(v).unwrap();
        let g = john_ellipse(&k).unwrap();
        let gram = g.gram();
        assert!((gram[(0, 0)] - 0.25).abs() < 1e-3);
        assert!((gram[(1, 1)] - 1.0).abs() < 1e-3);
        assert!(gram[(0, 1)].abs() < 1e-3);
    }

    #[test]
    fn ellipse_lies_inside_ball() {
        let k = PolygonalNorm::new(vec![
            Vec2::new(2.0, 0.1),
            Vec2::new(0.5, 1.0),
            Vec2::new(-1.0, 0.7),
            Vec2::new(-2.0, -0.1),
            Vec2::new(-0.5, -1.0),
            Vec2::new(1.0, -0.7),
        ])
        .unwrap();
        let g = john_ellipse(&k).unwrap();
        for i in 0..720 {
            let t = i as f64 * PI / 360.0;
            let v = Vec2::new(t.cos(), t.sin());
            assert!(g.eval(&v) >= k.eval(&v) - 1e-8);
        }
    }

    #[test]
    fn collinear_points_are_degenerate() {
        let pts = [Vec2::new(1.0, 1.0), Vec2::new(-1.0, -1.0), Vec2::new(2.0, 2.0)];
        assert!(min_enclosing_centered_ellipse(&pts, EllipseOptions::default()).is_err());
    }

    #[test]
    fn iteration_cap_reports_diagnostics() {
        let k = PolygonalNorm::new(vec![
            Vec2::new(3.0, 0.1),
            Vec2::new(0.5, 1.0),
            Vec2::new(-1.0, 0.7),
            Vec2::new(-3.0, -0.1),
            Vec2::new(-0.5, -1.0),
            Vec2::new(1.0, -0.7),
        ])
        .unwrap();
        let opts = EllipseOptions {
            tolerance: 0.0,
            max_iterations: 3,
        };
        let err = min_enclosing_centered_ellipse(k.dual_vertices(), opts).unwrap_err();
        assert!(matches!(err, Error::EllipseNoConvergence { iterations: 3, .. }));
    }
}
