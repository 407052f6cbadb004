//! Numerical checks of the quantitative properties of the intrinsic disc of
//! a solved map: isoperimetry, area growth, Hölder continuity, the
//! Courant–Lebesgue estimate, Voronoi decompositions, the co-area
//! inequality and local contractibility.

mod checks;
mod levels;

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::areas::{jacobian, AreaDef, PolygonalNorm, Seminorm};
use crate::geom::{signed_area, Vec2};
use crate::intrinsic::IntrinsicDisc;
use crate::mesh::PAMap;
use crate::target::{MetricTarget, NormBall};
use crate::{io, par, Error, Result, SCHEMA_VERSION};

pub(crate) use levels::LevelSet;

/// Individual checks, in report order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    Iso,
    Growth,
    Holder,
    Cl,
    Voronoi,
    Coarea,
    Diam,
    Doubling,
    Qc,
    Energy,
    Lipschitz,
}

impl CheckKind {
    pub const ALL: [CheckKind; 11] = [
        CheckKind::Iso,
        CheckKind::Growth,
        CheckKind::Holder,
        CheckKind::Cl,
        CheckKind::Voronoi,
        CheckKind::Coarea,
        CheckKind::Diam,
        CheckKind::Doubling,
        CheckKind::Qc,
        CheckKind::Energy,
        CheckKind::Lipschitz,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CheckKind::Iso => "iso",
            CheckKind::Growth => "growth",
            CheckKind::Holder => "holder",
            CheckKind::Cl => "cl",
            CheckKind::Voronoi => "voronoi",
            CheckKind::Coarea => "coarea",
            CheckKind::Diam => "diam",
            CheckKind::Doubling => "doubling",
            CheckKind::Qc => "qc",
            CheckKind::Energy => "energy",
            CheckKind::Lipschitz => "lipschitz",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }

    /// Comma-separated names; `all` selects every check.
    pub fn parse_list(s: &str) -> Result<Vec<Self>> {
        let mut out = Vec::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            if part == "all" {
                out.extend(Self::ALL);
                continue;
            }
            out.push(Self::parse(part).ok_or_else(|| Error::Config(format!("unknown check '{part}'")))?);
        }
        out.sort();
        out.dedup();
        Ok(out)
    }
}

impl fmt::Display for CheckKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Relative slack per check (absolute for exponents and qc).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Slacks {
    pub iso: f64,
    pub growth: f64,
    pub holder: f64,
    pub cl: f64,
    pub coarea: f64,
    pub diam: f64,
    pub voronoi: f64,
    pub qc: f64,
    pub energy: f64,
}

impl Default for Slacks {
    fn default() -> Self {
        Self {
            iso: 0.15,
            growth: 0.2,
            holder: 0.1,
            cl: 0.1,
            coarea: 0.15,
            diam: 0.2,
            voronoi: 0.2,
            qc: 0.1,
            energy: 0.05,
        }
    }
}

impl Slacks {
    /// The same slack for every check.
    pub fn uniform(eta: f64) -> Self {
        Self {
            iso: eta,
            growth: eta,
            holder: eta,
            cl: eta,
            coarea: eta,
            diam: eta,
            voronoi: eta,
            qc: eta,
            energy: eta,
        }
    }
}

/// Balls around a domain point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BallSpec {
    pub center: [f64; 2],
    /// Radii in `Z`; empty picks `0.1, …, 0.8` times the distance to `∂Z`.
    #[serde(default)]
    pub radii: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircleSpec {
    pub center: [f64; 2],
    pub radius: f64,
}

/// Points approaching `anchor`; each is tested at the radius `d_Z(z, anchor)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DoublingSpec {
    pub anchor: [f64; 2],
    pub points: Vec<[f64; 2]>,
}

/// Parameters of an analysis run. Points are domain points; each is
/// replaced by the nearest mesh vertex.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CheckConfig {
    /// Isoperimetric constant; derived from the target when absent.
    pub c: Option<f64>,
    /// Length threshold; absent means `+∞`.
    pub l0: Option<f64>,
    /// Area definition; the solver's when absent.
    pub mu: Option<AreaDef>,
    pub slack: Slacks,
    pub seed: u64,
    /// Sampled centers of distance spheres.
    pub centers: usize,
    /// Radii per center and boundary offsets.
    pub radii: usize,
    pub growth: Vec<BallSpec>,
    /// Restricts Hölder pairs to those through this point.
    pub holder_center: Option<[f64; 2]>,
    pub cl: Vec<CircleSpec>,
    pub coarea_center: [f64; 2],
    pub voronoi_n: Vec<usize>,
    /// Component constant `M`; `M̂·C⁴` when absent.
    pub voronoi_m: Option<f64>,
    pub doubling: Option<DoublingSpec>,
}

/// Universal constant of the component bound `M = M̂·C⁴`, calibrated on
/// the flat disc.
pub const M_HAT: f64 = 1.25e4;

impl Default for CheckConfig {
    fn default() -> Self {
        Self {
            c: None,
            l0: None,
            mu: None,
            slack: Slacks::default(),
            seed: 0,
            centers: 20,
            radii: 12,
            growth: Vec::new(),
            holder_center: None,
            cl: vec![CircleSpec { center: [0.0, 0.0], radius: 0.6 }],
            coarea_center: [0.0, 0.0],
            voronoi_n: vec![2, 4, 8],
            voronoi_m: None,
            doubling: None,
        }
    }
}

impl CheckConfig {
    pub fn validate(&self) -> Result<()> {
        if let Some(c) = self.c {
            if !(c.is_finite() && c >= 1.0 / (8.0 * PI) - 1e-12) {
                return Err(Error::Config(format!("isoperimetric constant {c} below 1/(8π)")));
            }
        }
        if let Some(l0) = self.l0 {
            if !(l0 > 0.0) {
                return Err(Error::Config(format!("length threshold {l0} must be positive")));
            }
        }
        let s = &self.slack;
        for (name, v) in [
            ("iso", s.iso),
            ("growth", s.growth),
            ("holder", s.holder),
            ("cl", s.cl),
            ("coarea", s.coarea),
            ("diam", s.diam),
            ("voronoi", s.voronoi),
            ("qc", s.qc),
            ("energy", s.energy),
        ] {
            if !(0.0..1.0).contains(&v) {
                return Err(Error::Config(format!("slack.{name} = {v} not in [0, 1)")));
            }
        }
        if self.centers == 0 || self.radii == 0 {
            return Err(Error::Config("centers and radii must be positive".into()));
        }
        if self.voronoi_n.contains(&0) {
            return Err(Error::Config("voronoi_n entries must be at least 1".into()));
        }
        if self.cl.iter().any(|c| !(c.radius > 0.0 && c.radius < 1.0)) {
            return Err(Error::Config("Courant–Lebesgue radii must lie in (0, 1)".into()));
        }
        Ok(())
    }
}

/// Isoperimetric constant of a target for `mu`: the optimal one for normed
/// planes and the cone, `1/(2π)` otherwise.
pub fn default_isoperimetric_constant(target: &MetricTarget, mu: AreaDef) -> Result<f64> {
    Ok(match target {
        MetricTarget::Normed { dim: 2, ball: NormBall::Euclidean } => 1.0 / (4.0 * PI),
        MetricTarget::Normed { dim: 2, ball: NormBall::Sup } => isoperimetrix_constant(&PolygonalNorm::sup_norm(), mu)?,
        MetricTarget::Normed { dim: 2, ball: NormBall::Polygonal(p) } => isoperimetrix_constant(p, mu)?,
        MetricTarget::Cone { alpha } => 1.0 / (4.0 * PI * alpha),
        _ => 1.0 / (2.0 * PI),
    })
}

/// `μ(I) / ℓ(∂I)²` for the isoperimetrix `I`, the polar body turned by a
/// quarter turn. Every area definition is a multiple of Lebesgue measure
/// on a normed plane, so `I` is optimal for all of them.
fn isoperimetrix_constant(norm: &PolygonalNorm, mu: AreaDef) -> Result<f64> {
    let iso: Vec<Vec2> = norm.dual_vertices().iter().map(|f| Vec2::new(-f.y, f.x)).collect();
    let n = iso.len();
    let perimeter: f64 = (0..n).map(|i| norm.eval(&(iso[(i + 1) % n] - iso[i]))).sum();
    let area = jacobian(&Seminorm::Polygonal(norm.clone()), mu)? * signed_area(&iso).abs();
    Ok(area / (perimeter * perimeter))
}

/// `q(μ)` as used in the bounds: 1 on targets with property (ET).
pub fn q_for(target: &MetricTarget, mu: AreaDef) -> f64 {
    if target.is_et() {
        1.0
    } else {
        // mass* has no closed form; the smallest known value is conservative
        mu.q().unwrap_or(PI / 4.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    /// Nothing to test (constant map).
    Degenerate,
}

/// One line of an [`AnalysisReport`]. `ratio` is `measured / bound`;
/// upper bounds pass when it is at most `1 + slack` and lower bounds when
/// it is at least `1 - slack` (slacks on exponents are absolute).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub status: Status,
    pub pass: bool,
    pub bound: f64,
    pub measured: f64,
    pub ratio: f64,
    pub slack: f64,
    pub witness: Value,
    pub details: Value,
}

impl CheckRecord {
    fn new(kind: CheckKind, bound: f64, measured: f64, slack: f64, pass: bool) -> Self {
        let ratio = if bound != 0.0 { measured / bound } else { 0.0 };
        Self {
            name: kind.name().into(),
            status: if pass { Status::Pass } else { Status::Fail },
            pass,
            bound,
            measured,
            ratio: if ratio.is_finite() { ratio } else { 0.0 },
            slack,
            witness: Value::Null,
            details: Value::Null,
        }
    }

    fn degenerate(kind: CheckKind, why: &str) -> Self {
        Self {
            name: kind.name().into(),
            status: Status::Degenerate,
            pass: true,
            bound: 0.0,
            measured: 0.0,
            ratio: 0.0,
            slack: 0.0,
            witness: Value::Null,
            details: serde_json::json!({ "reason": why }),
        }
    }

    fn with_witness(mut self, w: Value) -> Self {
        self.witness = w;
        self
    }

    fn with_details(mut self, d: Value) -> Self {
        self.details = d;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub schema_version: u32,
    pub target: String,
    pub mu: AreaDef,
    pub c: f64,
    /// `None` stands for `+∞`.
    pub l0: Option<f64>,
    pub q: f64,
    pub checks: Vec<CheckRecord>,
}

impl AnalysisReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn get(&self, kind: CheckKind) -> Option<&CheckRecord> {
        self.checks.iter().find(|c| c.name == kind.name())
    }

    pub fn to_csv(&self) -> String {
        let rows: Vec<Vec<String>> = self
            .checks
            .iter()
            .map(|c| {
                vec![
                    c.name.clone(),
                    serde_json::to_value(c.status).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default(),
                    io::fmt_f64(c.bound),
                    io::fmt_f64(c.measured),
                    io::fmt_f64(c.ratio),
                    io::fmt_f64(c.slack),
                ]
            })
            .collect();
        io::csv_string(&["name", "status", "bound", "measured", "ratio", "slack"], &rows)
    }

    /// Writes `report.json` and `report.csv` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        io::write_json(&dir.join("report.json"), self)?;
        io::write_text(&dir.join("report.csv"), &self.to_csv())
    }
}

/// Shared per-run data.
pub(crate) struct Ctx<'a> {
    map: &'a PAMap,
    zd: &'a IntrinsicDisc,
    cfg: &'a CheckConfig,
    c: f64,
    l0: f64,
    q: f64,
    seminorms: Vec<Seminorm>,
    /// μ-area per triangle.
    area: Vec<f64>,
    /// Energy density times area per triangle.
    energy: Vec<f64>,
    total_area: f64,
    edges: Vec<(usize, usize)>,
    edge_index: HashMap<(usize, usize), usize>,
}

impl<'a> Ctx<'a> {
    fn new(map: &'a PAMap, zd: &'a IntrinsicDisc, cfg: &'a CheckConfig, mu: AreaDef) -> Result<Self> {
        let mesh = map.mesh();
        let stats = map.triangle_stats(mu)?;
        let seminorms = par::map_range(mesh.triangle_count(), |t| map.triangle_seminorm(t)).into_iter().collect::<Result<Vec<_>>>()?;
        let area: Vec<f64> = stats.iter().map(|s| s.area()).collect();
        let energy: Vec<f64> = stats.iter().map(|s| s.lambda_max * s.domain_area * s.weight).collect();
        let edges = mesh.edges();
        let edge_index = edges.iter().enumerate().map(|(i, &(a, b))| ((a.min(b), a.max(b)), i)).collect();
        Ok(Self {
            map,
            zd,
            cfg,
            c: match cfg.c {
                Some(c) => c,
                None => default_isoperimetric_constant(map.target(), mu)?,
            },
            l0: cfg.l0.unwrap_or(f64::INFINITY),
            q: q_for(map.target(), mu),
            total_area: par::pairwise_sum(&area),
            seminorms,
            area,
            energy,
            edges,
            edge_index,
        })
    }

    /// Mesh vertex nearest to a domain point.
    fn nearest_vertex(&self, p: [f64; 2]) -> usize {
        let p = Vec2::new(p[0], p[1]);
        let vs = self.map.mesh().vertices();
        (0..vs.len())
            .min_by(|&a, &b| (vs[a] - p).norm_squared().total_cmp(&(vs[b] - p).norm_squared()))
            .unwrap_or(0)
    }

    fn is_degenerate(&self) -> bool {
        self.zd.class_count() < 2 || self.zd.diameter() == 0.0
    }

    /// Distance of every class to the boundary classes.
    fn boundary_distance(&self) -> Vec<f64> {
        let k = self.zd.class_count();
        let (cycle, _) = match self.zd.boundary_cycle() {
            Ok(b) => b,
            Err(_) => return vec![0.0; k],
        };
        let mut g = vec![f64::INFINITY; k];
        for &b in cycle {
            for (gi, d) in g.iter_mut().zip(self.zd.dist_row(b)) {
                *gi = gi.min(*d);
            }
        }
        g
    }

    /// Diameter of a set of classes.
    fn class_set_diameter(&self, classes: &mut Vec<usize>) -> f64 {
        classes.sort_unstable();
        classes.dedup();
        let rows = par::map_range(classes.len(), |i| {
            let row = self.zd.dist_row(classes[i]);
            classes[i + 1..].iter().map(|&c| row[c]).fold(0.0, f64::max)
        });
        rows.into_iter().fold(0.0, f64::max)
    }

    fn vertex_classes(&self, vs: &[usize]) -> Vec<usize> {
        vs.iter().map(|&v| self.zd.class_of(v)).collect()
    }
}

/// Runs the selected checks on `map` and its intrinsic disc.
pub fn analyze(map: &PAMap, zd: &IntrinsicDisc, cfg: &CheckConfig, mu: AreaDef, kinds: &[CheckKind]) -> Result<AnalysisReport> {
    cfg.validate()?;
    let mu = cfg.mu.unwrap_or(mu);
    let ctx = Ctx::new(map, zd, cfg, mu)?;
    let mut kinds = kinds.to_vec();
    kinds.sort();
    kinds.dedup();
    let cycles = if kinds.iter().any(|k| matches!(k, CheckKind::Iso | CheckKind::Diam)) && !ctx.is_degenerate() {
        Some(checks::sample_cycles(&ctx)?)
    } else {
        None
    };
    let records = par::map_range(kinds.len(), |i| checks::run(&ctx, kinds[i], cycles.as_ref()));
    let checks = records.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(AnalysisReport {
        schema_version: SCHEMA_VERSION,
        target: map.target().kind_name().into(),
        mu,
        c: ctx.c,
        l0: cfg.l0,
        q: ctx.q,
        checks,
    })
}

#[cfg(test)]
mod tests;
