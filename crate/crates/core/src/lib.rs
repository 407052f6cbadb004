//! Parametric minimal discs in metric spaces, at desk scale.
//!
//! The crate solves a discretized Plateau problem over a triangulated unit
//! disc for several definitions of area, builds the intrinsic disc `Z` from
//! the solution through its length pseudo-metric, and runs quantitative checks
//! (isoperimetry, ball growth, Hölder exponent, Courant–Lebesgue, co-area,
//! Voronoi decomposition, filling areas) against the analytic bounds.
//!
//! Module map:
//!
//! - [`areas`]: seminorms on the plane, Jacobians of the four area
//!   definitions, comparison constants.
//! - [`target`]: metric target spaces as distance oracles.
//! - [`mesh`]: disc triangulations, piecewise-affine maps, area and energy.
//! - [`plateau`]: the discrete Plateau solver and inner variations.
//! - [`intrinsic`]: the length graph, the quotient `Z`, `P` and `ū`.
//! - [`analyzer`]: theorem checks producing an [`analyzer::AnalysisReport`].
//! - [`filling`]: filling-area estimates via Kuratowski embeddings.
//! - [`fixtures`]: the named end-to-end fixtures.

pub mod analyzer;
pub mod areas;
pub mod error;
pub mod filling;
pub mod fixtures;
pub mod geom;
pub mod intrinsic;
pub mod io;
pub mod isotonic;
pub mod mesh;
pub mod optim;
pub mod par;
pub mod plateau;
pub mod solution;
pub mod target;

pub use areas::{AreaDef, PolygonalNorm, QuadraticSeminorm, Seminorm};
pub use error::{Error, Result};
pub use geom::{Mat2, Vec2};
pub use intrinsic::IntrinsicDisc;
pub use mesh::{DiscMesh, PAMap};
pub use target::MetricTarget;

/// Version of every JSON artifact written by this crate.
pub const SCHEMA_VERSION: u32 = 1;
