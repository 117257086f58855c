use anyhow::Result;
use kinfp_core::holder::{
    check_interpolation, check_norm_equivalence, estimate_seminorm, Domain, EquivalenceReport, FitKind, HolderEstimate,
    HolderOrder, InterpolationReport, ScanParams,
};
use kinfp_core::{Cylinder, Field, KineticPoint};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::config::{parse_section, resolved, GridSpec};
use crate::error::invalid;
use crate::expr::Source;
use crate::report::Output;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CylinderSpec {
    pub t: f64,
    pub x: Vec<f64>,
    pub v: Vec<f64>,
    pub radius: f64,
}

fn scan_params(stride: usize, r_min: Option<f64>, r_max: f64, domain: &Option<CylinderSpec>) -> Result<ScanParams> {
    if stride == 0 || !(r_max > 0.0) || r_min.is_some_and(|r| !(r > 0.0)) {
        return Err(invalid("stride must be positive and radii positive"));
    }
    let domain = match domain {
        None => Domain::Grid,
        Some(c) => Domain::Cylinder(Cylinder::new(KineticPoint::new(c.t, &c.x, &c.v)?, c.radius)?),
    };
    Ok(ScanParams {
        domain,
        stride,
        r_min,
        r_max,
    })
}

fn input_field(field: &Option<Source>, grid: &GridSpec, dim: usize) -> Result<Field> {
    let src = field.as_ref().ok_or_else(|| invalid("key `field` is required"))?;
    match src {
        Source::Expr(_) => src.field(&grid.grid(dim)?),
        Source::File(p) => crate::expr::load_field(p),
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HolderConfig {
    /// Expression in `t, x, v` sampled on `grid`, or a field file.
    pub field: Option<Source>,
    pub grid: GridSpec,
    pub beta: f64,
    pub fit_kind: FitKind,
    pub stride: usize,
    pub r_min: Option<f64>,
    pub r_max: f64,
    pub domain: Option<CylinderSpec>,
    /// Also compare best-fit and Taylor seminorms (`2 < β < 3`).
    pub equivalence: bool,
}

impl Default for HolderConfig {
    fn default() -> Self {
        Self {
            field: None,
            grid: GridSpec::default(),
            beta: 2.5,
            fit_kind: FitKind::BestPolynomial,
            stride: 2,
            r_min: None,
            r_max: 1.0,
            domain: None,
            equivalence: false,
        }
    }
}

#[derive(Serialize)]
struct HolderResult {
    #[serde(flatten)]
    estimate: HolderEstimate,
    #[serde(skip_serializing_if = "Option::is_none")]
    equivalence: Option<EquivalenceReport>,
}

pub fn run_holder(out: Output, map: Map<String, Value>) -> Result<()> {
    let cfg: HolderConfig = parse_section(map)?;
    let d = out.common.dim;
    let order = HolderOrder::new(cfg.beta)?;
    let params = scan_params(cfg.stride, cfg.r_min, cfg.r_max, &cfg.domain)?;
    if cfg.equivalence && order.alpha().is_none() {
        return Err(invalid("equivalence needs 2 < beta < 3"));
    }
    let field = input_field(&cfg.field, &cfg.grid, d)?;
    let config = resolved(&out.common, &cfg)?;
    let estimate = estimate_seminorm(&field, order, cfg.fit_kind, &params)?;
    let equivalence = match order.alpha() {
        Some(a) if cfg.equivalence => Some(check_norm_equivalence(&field, a, &params)?),
        _ => None,
    };
    out.finish(&config, &HolderResult { estimate, equivalence })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InterpConfig {
    pub field: Option<Source>,
    pub grid: GridSpec,
    pub alpha: f64,
    pub epsilons: Vec<f64>,
    pub stride: usize,
    pub r_min: Option<f64>,
    pub r_max: f64,
    pub domain: Option<CylinderSpec>,
}

impl Default for InterpConfig {
    fn default() -> Self {
        Self {
            field: None,
            grid: GridSpec::default(),
            alpha: 0.5,
            epsilons: vec![0.5, 0.25, 0.125, 0.0625],
            stride: 2,
            r_min: None,
            r_max: 1.0,
            domain: None,
        }
    }
}

pub fn run_interp(mut out: Output, map: Map<String, Value>) -> Result<()> {
    let cfg: InterpConfig = parse_section(map)?;
    let d = out.common.dim;
    let params = scan_params(cfg.stride, cfg.r_min, cfg.r_max, &cfg.domain)?;
    let field = input_field(&cfg.field, &cfg.grid, d)?;
    let config = resolved(&out.common, &cfg)?;
    let report: InterpolationReport = check_interpolation(&field, cfg.alpha, &cfg.epsilons, &params)?;
    out.write_text(".csv", &report.to_csv())?;
    out.finish(&config, &report)
}
