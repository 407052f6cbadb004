use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::ellipse::john_ellipse;
use super::polygonal::PolygonalNorm;
use super::quadratic::QuadraticSeminorm;
use crate::geom::{cross, Vec2};
use crate::Result;

/// A definition of area, encoded by its Jacobian on seminorms of the plane.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, PartialOrd, Ord)]
#[serde(rename_all = "snake_case")]
pub enum AreaDef {
    BusemannHausdorff,
    HolmesThompson,
    InscribedRiemannian,
    /// Experimental: normalized minimal circumscribed parallelogram.
    MassStar,
}

impl AreaDef {
    pub const ALL: [AreaDef; 4] = [
        AreaDef::BusemannHausdorff,
        AreaDef::HolmesThompson,
        AreaDef::InscribedRiemannian,
        AreaDef::MassStar,
    ];

    /// The definitions with established comparison constants.
    pub const STABLE: [AreaDef; 3] = [
        AreaDef::BusemannHausdorff,
        AreaDef::HolmesThompson,
        AreaDef::InscribedRiemannian,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AreaDef::BusemannHausdorff => "busemann_hausdorff",
            AreaDef::HolmesThompson => "holmes_thompson",
            AreaDef::InscribedRiemannian => "inscribed_riemannian",
            AreaDef::MassStar => "mass_star",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        AreaDef::ALL.into_iter().find(|m| m.name() == s)
    }

    pub fn is_experimental(self) -> bool {
        self == AreaDef::MassStar
    }

    /// Largest `q` with `μ >= q · μ^i` on every normed plane, when known in
    /// closed form.
    pub fn q(self) -> Option<f64> {
        match self {
            AreaDef::BusemannHausdorff => Some(PI / 4.0),
            AreaDef::HolmesThompson => Some(2.0 / PI),
            AreaDef::InscribedRiemannian => Some(1.0),
            AreaDef::MassStar => None,
        }
    }
}

impl std::fmt::Display for AreaDef {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// A seminorm on the plane in whichever representation is exact for it.
#[derive(Clone, Debug, PartialEq)]
pub enum Seminorm {
    Quadratic(QuadraticSeminorm),
    Polygonal(PolygonalNorm),
    /// Rank ≤ 1: `v ↦ |<w, v>|`.
    Degenerate { functional: Vec2 },
}

impl Seminorm {
    pub fn eval(&self, v: &Vec2) -> f64 {
        match self {
            Seminorm::Quadratic(q) => q.eval(v),
            Seminorm::Polygonal(p) => p.eval(v),
            Seminorm::Degenerate { functional } => functional.dot(v).abs(),
        }
    }

    pub fn jacobian(&self, mu: AreaDef) -> Result<f64> {
        jacobian(self, mu)
    }

    /// `sup_{|v|=1} s(v)²`.
    pub fn max_stretch_sq(&self) -> f64 {
        match self {
            Seminorm::Quadratic(q) => q.max_stretch_sq(),
            Seminorm::Polygonal(p) => p.max_stretch().powi(2),
            Seminorm::Degenerate { functional } => functional.norm_squared(),
        }
    }

    /// `sup s / inf s` over unit vectors; 1 for the zero seminorm.
    pub fn qc(&self) -> f64 {
        match self {
            Seminorm::Quadratic(q) => qc_constant(q),
            Seminorm::Polygonal(p) => p.max_stretch() / p.min_stretch(),
            Seminorm::Degenerate { functional } => {
                if functional.norm_squared() == 0.0 {
                    1.0
                } else {
                    f64::INFINITY
                }
            }
        }
    }

    pub fn is_degenerate(&self) -> bool {
        match self {
            Seminorm::Quadratic(q) => q.is_degenerate(),
            Seminorm::Polygonal(_) => false,
            Seminorm::Degenerate { .. } => true,
        }
    }
}

/// Jacobian `J^μ(s)`: the μ-area of the unit Euclidean square under `s`.
pub fn jacobian(s: &Seminorm, mu: AreaDef) -> Result<f64> {
    match s {
        Seminorm::Quadratic(q) => {
            if q.is_degenerate() {
                Ok(0.0)
            } else {
                Ok(q.det().sqrt())
            }
        }
        Seminorm::Degenerate { .. } => Ok(0.0),
        Seminorm::Polygonal(p) => polygonal_jacobian(p, mu),
    }
}

fn polygonal_jacobian(p: &PolygonalNorm, mu: AreaDef) -> Result<f64> {
    Ok(match mu {
        AreaDef::BusemannHausdorff => PI / p.ball_area(),
        AreaDef::HolmesThompson => p.dual_area() / PI,
        AreaDef::InscribedRiemannian => john_ellipse(p)?.det().sqrt(),
        AreaDef::MassStar => {
            // a symmetric parallelogram circumscribing the ball has sides
            // {|<g_i, v>| = 1} with g_i on the polar boundary; its area is
            // 4 / |det(g1, g2)|, maximal over polar vertices
            let d = p.dual_vertices();
            let mut best: f64 = 0.0;
            for i in 0..d.len() {
                for j in (i + 1)..d.len() {
                    best = best.max(cross(&d[i], &d[j]).abs());
                }
            }
            best
        }
    })
}

/// `sqrt(λ_max / λ_min)`; infinite for a nonzero degenerate form, 1 for zero.
pub fn qc_constant(s: &QuadraticSeminorm) -> f64 {
    let (lo, hi) = s.eigenvalues();
    if hi == 0.0 {
        1.0
    } else if lo == 0.0 {
        f64::INFINITY
    } else {
        (hi / lo).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Mat2;
    use approx::assert_relative_eq;

    fn poly(p: PolygonalNorm) -> Seminorm {
        Seminorm::Polygonal(p)
    }

    #[test]
    fn euclidean_is_one_for_all() {
        let s = Seminorm::Quadratic(QuadraticSeminorm::identity());
        for mu in AreaDef::ALL {
            assert_eq!(jacobian(&s, mu).unwrap(), 1.0);
        }
    }

    #[test]
    fn sup_norm_table() {
        let s = poly(PolygonalNorm::sup_norm());
        assert_relative_eq!(jacobian(&s, AreaDef::BusemannHausdorff).unwrap(), PI / 4.0, epsilon = 1e-12);
        assert_relative_eq!(jacobian(&s, AreaDef::HolmesThompson).unwrap(), 2.0 / PI, epsilon = 1e-12);
        assert_relative_eq!(jacobian(&s, AreaDef::InscribedRiemannian).unwrap(), 1.0, epsilon = 1e-9);
        assert_relative_eq!(jacobian(&s, AreaDef::MassStar).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn l1_table() {
        let s = poly(PolygonalNorm::l1_norm());
        assert_relative_eq!(jacobian(&s, AreaDef::BusemannHausdorff).unwrap(), PI / 2.0, epsilon = 1e-12);
        assert_relative_eq!(jacobian(&s, AreaDef::HolmesThompson).unwrap(), 4.0 / PI, epsilon = 1e-12);
        assert_relative_eq!(jacobian(&s, AreaDef::InscribedRiemannian).unwrap(), 2.0, epsilon = 1e-8);
    }

    #[test]
    fn degenerate_quadratic_is_zero() {
        let s = Seminorm::Quadratic(QuadraticSeminorm::new(Mat2::new(1.0, 0.0, 0.0, 0.0)).unwrap());
        for mu in AreaDef::ALL {
            assert_eq!(jacobian(&s, mu).unwrap(), 0.0);
        }
        assert_eq!(s.qc(), f64::INFINITY);
    }

    #[test]
    fn qc_examples() {
        assert_eq!(qc_constant(&QuadraticSeminorm::identity()), 1.0);
        let s = QuadraticSeminorm::new(Mat2::new(2.0, 0.0, 0.0, 1.0)).unwrap();
        assert_relative_eq!(qc_constant(&s), 2f64.sqrt(), epsilon = 1e-15);
        assert_eq!(qc_constant(&QuadraticSeminorm::zero()), 1.0);
        let s = QuadraticSeminorm::new(Mat2::new(1.0, 0.0, 0.0, 0.0)).unwrap();
        assert_eq!(qc_constant(&s), f64::INFINITY);
    }

    #[test]
    fn sup_norm_qc_is_sqrt2() {
        assert_relative_eq!(poly(PolygonalNorm::sup_norm()).qc(), 2f64.sqrt(), epsilon = 1e-14);
    }

    #[test]
    fn parse_names() {
        for mu in AreaDef::ALL {
            assert_eq!(AreaDef::parse(mu.name()), Some(mu));
        }
        assert_eq!(AreaDef::parse("nope"), None);
    }
}
