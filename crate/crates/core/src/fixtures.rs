//! The four reference problems, run end to end: solve, quotient, analyze.

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;

use serde::Serialize;

use crate::analyzer::{analyze, AnalysisReport, BallSpec, CheckConfig, CheckKind, CircleSpec, DoublingSpec};
use crate::areas::AreaDef;
use crate::intrinsic::IntrinsicDisc;
use crate::plateau::{BoundarySpec, ProblemSpec};
use crate::solution::{solve_spec, Solution};
use crate::target::{BallSpec as TargetBall, TargetSpec};
use crate::{io, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FixtureKind {
    /// Unit circle in the Euclidean plane.
    Flat,
    /// Rim of the cone of total angle `π`.
    Cone,
    /// Unit circle in the plane with the disc of radius 1/4 collapsed.
    CollapsedDisc,
    /// Boundary of `[-1, 1]²` in the sup-norm plane, Holmes–Thompson area.
    SquareSup,
}

impl FixtureKind {
    pub const ALL: [FixtureKind; 4] = [FixtureKind::Flat, FixtureKind::Cone, FixtureKind::CollapsedDisc, FixtureKind::SquareSup];

    pub fn name(self) -> &'static str {
        match self {
            FixtureKind::Flat => "flat",
            FixtureKind::Cone => "cone",
            FixtureKind::CollapsedDisc => "collapsed_disc",
            FixtureKind::SquareSup => "square_sup",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }

    pub fn default_rings(self) -> usize {
        match self {
            FixtureKind::Flat => 40,
            FixtureKind::Cone => 32,
            FixtureKind::CollapsedDisc => 32,
            FixtureKind::SquareSup => 20,
        }
    }

    /// Exact area of the minimal disc.
    pub fn expected_area(self) -> f64 {
        match self {
            FixtureKind::Flat => PI,
            FixtureKind::Cone => PI / 2.0,
            FixtureKind::CollapsedDisc => PI * (1.0 - 1.0 / 16.0),
            FixtureKind::SquareSup => 8.0 / PI,
        }
    }

    /// Isoperimetric constant of the target.
    pub fn constant(self) -> f64 {
        match self {
            FixtureKind::Flat | FixtureKind::SquareSup => 1.0 / (4.0 * PI),
            FixtureKind::Cone | FixtureKind::CollapsedDisc => 1.0 / (2.0 * PI),
        }
    }

    pub fn problem(self, rings: usize) -> ProblemSpec {
        let (target, boundary, mu) = match self {
            FixtureKind::Flat => (
                TargetSpec::Normed { dim: 2, ball: TargetBall::Named("euclidean".into()) },
                "circle",
                AreaDef::BusemannHausdorff,
            ),
            FixtureKind::Cone => (TargetSpec::Cone { alpha: 0.5 }, "cone_rim", AreaDef::BusemannHausdorff),
            FixtureKind::CollapsedDisc => (
                TargetSpec::CollapsedDisc { center: [0.0, 0.0], radius: 0.25 },
                "circle",
                AreaDef::BusemannHausdorff,
            ),
            FixtureKind::SquareSup => (
                TargetSpec::Normed { dim: 2, ball: TargetBall::Named("sup".into()) },
                "square_sup",
                AreaDef::HolmesThompson,
            ),
        };
        ProblemSpec {
            rings,
            target,
            boundary: BoundarySpec::Named(boundary.into()),
            mu,
            lambda_e: 1e-3,
            seed: 0,
            max_iters: 100_000,
            inner_variation: true,
        }
    }

    /// Check configuration with the fixture's witnesses.
    pub fn config(self) -> CheckConfig {
        let mut cfg = CheckConfig { c: Some(self.constant()), ..Default::default() };
        match self {
            FixtureKind::Flat | FixtureKind::SquareSup => {}
            FixtureKind::Cone => {
                cfg.holder_center = Some([0.0, 0.0]);
                cfg.growth = vec![BallSpec { center: [0.0, 0.0], radii: vec![0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8] }];
                cfg.cl = vec![CircleSpec { center: [0.0, 0.0], radius: 0.5 }];
            }
            FixtureKind::CollapsedDisc => {
                cfg.growth = vec![
                    BallSpec { center: [0.0, 0.0], radii: vec![0.04, 0.06, 0.08, 0.12] },
                    BallSpec { center: [0.6, 0.0], radii: vec![0.05, 0.1, 0.2, 0.3] },
                ];
                cfg.doubling = Some(DoublingSpec { anchor: [0.0, 0.0], points: vec![[0.45, 0.0], [0.35, 0.0], [0.3, 0.0]] });
            }
        }
        cfg
    }
}

impl fmt::Display for FixtureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Everything produced by one fixture run.
#[derive(Clone, Debug)]
pub struct FixtureRun {
    pub kind: FixtureKind,
    pub solution: Solution,
    pub zd: IntrinsicDisc,
    pub report: AnalysisReport,
    pub area: f64,
}

impl FixtureRun {
    pub fn area_error(&self) -> f64 {
        (self.area - self.kind.expected_area()).abs() / self.kind.expected_area()
    }

    /// Writes the solution, the quotient and the report into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        self.solution.write(dir)?;
        self.zd.write(dir)?;
        self.report.write(dir)?;
        io::write_json(&dir.join("check_config.json"), &self.kind.config())
    }
}

pub fn run_fixture(kind: FixtureKind, rings: Option<usize>) -> Result<FixtureRun> {
    let rings = rings.unwrap_or(kind.default_rings());
    if rings < 4 {
        return Err(Error::Config(format!("fixture '{kind}' needs rings >= 4")));
    }
    let solution = solve_spec(&kind.problem(rings), None)?;
    let zd = IntrinsicDisc::from_map(&solution.map)?;
    let report = analyze(&solution.map, &zd, &kind.config(), solution.mu(), &CheckKind::ALL)?;
    let area = solution.area()?;
    Ok(FixtureRun { kind, solution, zd, report, area })
}
