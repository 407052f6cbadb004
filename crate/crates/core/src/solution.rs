//! A solved problem and its on-disk form (`solution.json`, `trace.csv`).

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::areas::AreaDef;
use crate::geom::Vec2;
use crate::mesh::{DiscMesh, PAMap};
use crate::plateau::{inner_variation_pass, solve, InnerVariationOptions, ProblemSpec, TraceRow};
use crate::{io, Error, Result, SCHEMA_VERSION};

#[derive(Clone, Debug)]
pub struct Solution {
    pub problem: ProblemSpec,
    pub map: PAMap,
    pub trace: Vec<TraceRow>,
    pub converged: bool,
    pub iterations: usize,
    pub boundary_params: Vec<f64>,
}

/// `solution.json`. Domain positions are stored because the inner
/// variation pass moves interior vertices.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SolutionFile {
    pub schema_version: u32,
    pub problem: ProblemSpec,
    pub converged: bool,
    pub iterations: usize,
    pub area: f64,
    pub energy: f64,
    pub vertices: Vec<[f64; 2]>,
    pub triangles: Vec<[usize; 3]>,
    pub boundary: Vec<usize>,
    pub images: Vec<Vec<f64>>,
    pub boundary_params: Vec<f64>,
}

/// Solves `spec`, followed by the inner variation pass when requested.
pub fn solve_spec(spec: &ProblemSpec, base_dir: Option<&Path>) -> Result<Solution> {
    let p = spec.build(base_dir)?;
    let out = solve(&p)?;
    let map = if spec.inner_variation {
        inner_variation_pass(&out.map, InnerVariationOptions::default())?
    } else {
        out.map
    };
    Ok(Solution {
        problem: spec.clone(),
        map,
        trace: out.trace,
        converged: out.converged,
        iterations: out.iterations,
        boundary_params: out.boundary_params,
    })
}

impl Solution {
    pub fn mu(&self) -> AreaDef {
        self.problem.mu
    }

    pub fn area(&self) -> Result<f64> {
        self.map.area_mu(self.problem.mu, None)
    }

    pub fn to_file(&self) -> Result<SolutionFile> {
        let mesh = self.map.mesh();
        Ok(SolutionFile {
            schema_version: SCHEMA_VERSION,
            problem: self.problem.clone(),
            converged: self.converged,
            iterations: self.iterations,
            area: self.area()?,
            energy: self.map.energy(None)?,
            vertices: mesh.vertices().iter().map(|v| [v.x, v.y]).collect(),
            triangles: mesh.triangles().to_vec(),
            boundary: mesh.boundary().to_vec(),
            images: (0..mesh.vertex_count()).map(|v| self.map.image(v).to_vec()).collect(),
            boundary_params: self.boundary_params.clone(),
        })
    }

    pub fn trace_csv(&self) -> String {
        let rows: Vec<Vec<String>> = self
            .trace
            .iter()
            .map(|r| {
                vec![
                    r.iteration.to_string(),
                    r.stage.to_string(),
                    io::fmt_f64(r.lambda_e),
                    io::fmt_f64(r.area),
                    io::fmt_f64(r.energy),
                    io::fmt_f64(r.objective),
                ]
            })
            .collect();
        io::csv_string(&["iteration", "stage", "lambda_e", "area", "energy", "objective"], &rows)
    }

    /// Writes `solution.json` and `trace.csv` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        io::write_json(&dir.join("solution.json"), &self.to_file()?)?;
        io::write_text(&dir.join("trace.csv"), &self.trace_csv())
    }

    /// Reads `dir/solution.json`; the trace is not restored.
    pub fn read(dir: &Path) -> Result<Self> {
        let path = dir.join("solution.json");
        let f: SolutionFile = io::read_json_as(&path)?;
        if f.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "{}: schema_version {} (expected {SCHEMA_VERSION})",
                path.display(),
                f.schema_version
            )));
        }
        let target = f.problem.target.build(Some(dir))?;
        let vertices = f.vertices.iter().map(|v| Vec2::new(v[0], v[1])).collect();
        let mesh = Arc::new(DiscMesh::new(vertices, f.triangles, f.boundary)?);
        let images = f.images.into_iter().flatten().collect();
        Ok(Self {
            problem: f.problem,
            map: PAMap::new(mesh, target, images)?,
            trace: Vec::new(),
            converged: f.converged,
            iterations: f.iterations,
            boundary_params: f.boundary_params,
        })
    }
}
