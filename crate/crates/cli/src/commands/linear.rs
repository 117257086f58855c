use anyhow::Result;
use kinfp_core::solver::{solve_with, CoefficientField, Diffusion, Scheme, SolverProblem, Splitting, VBoundary};
use kinfp_core::Field;
use log::info;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::config::{parse_section, resolved, PhaseGridSpec};
use crate::error::invalid;
use crate::expr::Source;
use crate::report::Output;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DiffusionSpec {
    /// `λ Id`.
    Scalar(Source),
    /// Symmetric `d × d` matrix, row by row.
    Matrix(Vec<Vec<Source>>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CoefficientSpec {
    pub a: DiffusionSpec,
    pub b: Option<Vec<Source>>,
    pub c: Option<Source>,
    pub s: Option<Source>,
}

impl Default for CoefficientSpec {
    fn default() -> Self {
        Self {
            a: DiffusionSpec::Scalar(Source::Expr("1".into())),
            b: None,
            c: None,
            s: None,
        }
    }
}

impl CoefficientSpec {
    fn build(&self, d: usize) -> Result<CoefficientField> {
        let a = match &self.a {
            DiffusionSpec::Scalar(s) => Diffusion::Isotropic(s.coefficient(d)?),
            DiffusionSpec::Matrix(rows) => {
                if rows.len() != d || rows.iter().any(|r| r.len() != d) {
                    return Err(invalid(format!("diffusion matrix must be {d} x {d}")));
                }
                Diffusion::Matrix(rows.iter().flatten().map(|s| s.coefficient(d)).collect::<Result<_>>()?)
            }
        };
        let b = match &self.b {
            Some(b) if b.len() != d => return Err(invalid(format!("drift needs {d} components"))),
            Some(b) => Some(b.iter().map(|s| s.coefficient(d)).collect::<Result<Vec<_>>>()?),
            None => None,
        };
        Ok(CoefficientField {
            d,
            a,
            b,
            c: self.c.as_ref().map(|s| s.coefficient(d)).transpose()?,
            s: self.s.as_ref().map(|s| s.coefficient(d)).transpose()?,
        })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolveLinearConfig {
    pub grid: PhaseGridSpec,
    pub dt: f64,
    pub t_final: f64,
    pub dt_max: Option<f64>,
    pub coefficients: CoefficientSpec,
    pub initial: Source,
    pub scheme: Scheme,
    pub splitting: Splitting,
    pub v_boundary: VBoundary,
    pub record_every: usize,
}

impl Default for SolveLinearConfig {
    fn default() -> Self {
        Self {
            grid: PhaseGridSpec::default(),
            dt: 1e-3,
            t_final: 1.0,
            dt_max: None,
            coefficients: CoefficientSpec::default(),
            initial: Source::Expr("(1 + 0.5*cos(x)) * sqrt_mu".into()),
            scheme: Scheme::SplittingCn,
            splitting: Splitting::Strang,
            v_boundary: VBoundary::ZeroFlux,
            record_every: 100,
        }
    }
}

#[derive(Serialize)]
struct LinearResult {
    n_steps: usize,
    effective_dt: f64,
    initial_mass: f64,
    final_mass: f64,
    final_l2: f64,
    final_min_ratio: f64,
    final_max_ratio: f64,
    max_principle_violations: usize,
    l2_violations: usize,
}

pub fn run(mut out: Output, map: Map<String, Value>) -> Result<()> {
    let mut cfg: SolveLinearConfig = parse_section(map)?;
    let d = out.common.dim;
    cfg.grid.resolve(d);
    let grid = cfg.grid.grid(d)?;
    let coefficients = cfg.coefficients.build(d)?;
    let initial = cfg.initial.phase_data(&grid, grid.t_min)?;
    let mut problem = SolverProblem::new(coefficients, grid.clone(), cfg.dt, cfg.t_final, initial);
    problem.scheme = cfg.scheme;
    problem.splitting = cfg.splitting;
    problem.v_boundary = cfg.v_boundary;
    problem.dt_max = cfg.dt_max;
    problem.record_every = cfg.record_every;
    problem.validate()?;
    let config = resolved(&out.common, &cfg)?;

    info!("{} steps of {}", problem.n_steps(), problem.effective_dt());
    let mut last = problem.initial.clone();
    let trace = solve_with(&problem, |_, _, s| {
        last.copy_from_slice(s);
        Ok(())
    })?;
    let first = trace.rows.first().expect("initial row");
    let fin = trace.rows.last().expect("final row");
    let result = LinearResult {
        n_steps: problem.n_steps(),
        effective_dt: problem.effective_dt(),
        initial_mass: first.mass,
        final_mass: fin.mass,
        final_l2: fin.l2_norm,
        final_min_ratio: fin.min_ratio,
        final_max_ratio: fin.max_ratio,
        max_principle_violations: trace.max_principle_violations(1e-12).len(),
        l2_violations: trace.l2_violations(1e-12).len(),
    };
    out.write_text(".trace.csv", &trace.to_csv())?;
    let t = fin.time;
    out.write_field(".final.kfp", &Field::new(grid.with_time(1, t, t)?, last)?)?;
    out.finish(&config, &result)
}
