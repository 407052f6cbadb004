//! Seminorms on the plane and the Jacobians of the four classical
//! definitions of area.
//!
//! Two representations coexist: [`QuadraticSeminorm`] (a Gram matrix, used
//! for metric differentials recovered from edge lengths) and
//! [`PolygonalNorm`] (an explicit unit ball, used for exact pullbacks of
//! polyhedral norms). [`Seminorm`] unifies them and adds a degenerate marker
//! for rank-deficient differentials.

mod ellipse;
mod jacobian;
mod polygonal;
mod quadratic;
mod sample;

pub use ellipse::{john_ellipse, min_enclosing_centered_ellipse, EllipseOptions};
pub use jacobian::{jacobian, qc_constant, AreaDef, Seminorm};
pub use polygonal::{polar_dual, PolygonalNorm};
pub use quadratic::QuadraticSeminorm;
pub use sample::{q_estimate, sample_norms, QEstimate, NORM_SAMPLER_SEED};

use serde::{Deserialize, Serialize};

/// JSON form of a norm: `{"kind":"polygonal","vertices":[[x,y],...]}` or
/// `{"kind":"quadratic","gram":[[a,b],[b,c]]}`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NormSpec {
    Polygonal { vertices: Vec<[f64; 2]> },
    Quadratic { gram: [[f64; 2]; 2] },
}

impl NormSpec {
    pub fn build(&self) -> crate::Result<Seminorm> {
        match self {
            NormSpec::Polygonal { vertices } => {
                let v = vertices.iter().map(|p| crate::Vec2::new(p[0], p[1])).collect();
                Ok(Seminorm::Polygonal(PolygonalNorm::new(v)?))
            }
            NormSpec::Quadratic { gram } => {
                let g = crate::Mat2::new(gram[0][0], gram[0][1], gram[1][0], gram[1][1]);
                Ok(Seminorm::Quadratic(QuadraticSeminorm::new(g)?))
            }
        }
    }
}
