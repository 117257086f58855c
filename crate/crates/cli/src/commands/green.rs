use anyhow::Result;
use kinfp_core::green::{
    chapman_kolmogorov_check, green_mass, residual_study, verify_indicator_bound, IndicatorBoundReport, QuadSpec,
    ResidualStudy,
};
use kinfp_core::KineticPoint;
use log::info;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::{all_pass, Check};
use crate::config::{parse_section, resolved};
use crate::error::invalid;
use crate::report::Output;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GreenCheckConfig {
    pub times: Vec<f64>,
    pub mass_nodes: usize,
    /// `(t, s)` pairs for the semigroup check.
    pub ck_pairs: Vec<[f64; 2]>,
    pub ck_nodes: usize,
    pub ck_width: f64,
    /// Radii of the indicator convolution (`d = 1` only).
    pub indicator_radii: Vec<f64>,
    pub indicator_quad: QuadSpec,
    /// Grid levels of the residual study (`d = 1` only); 0 skips it.
    pub residual_levels: usize,
    pub residual_quad: QuadSpec,
}

impl Default for GreenCheckConfig {
    fn default() -> Self {
        Self {
            times: vec![0.1, 0.5, 1.0, 2.0],
            mass_nodes: 161,
            ck_pairs: vec![[0.5, 1.0], [0.4, 0.9], [0.9, 0.4]],
            ck_nodes: 161,
            ck_width: 10.0,
            indicator_radii: vec![0.25, 0.5, 1.0, 2.0],
            indicator_quad: QuadSpec {
                normal_nodes: 17,
                gl_order: 4,
                levels: 12,
                ..QuadSpec::default()
            },
            residual_levels: 3,
            residual_quad: QuadSpec {
                normal_nodes: 25,
                gl_order: 6,
                levels: 8,
                ..QuadSpec::default()
            },
        }
    }
}

#[derive(Serialize)]
struct GreenCheckResult {
    dim: usize,
    mass_errors: Vec<f64>,
    ck_deviation: f64,
    indicator_slope: Option<f64>,
    indicator: Option<IndicatorBoundReport>,
    residual_orders: Option<Vec<f64>>,
    residual: Option<ResidualStudy>,
    checks: Vec<Check>,
    pass: bool,
}

fn ck_points(d: usize) -> Vec<KineticPoint> {
    let pairs = [(0.0, 0.0), (0.3, -0.4), (-0.5, 0.8), (1.0, 1.0)];
    pairs
        .iter()
        .map(|&(x, v)| {
            let xs = vec![x; d];
            let vs: Vec<f64> = (0..d).map(|i| if i == 0 { v } else { -0.5 * v }).collect();
            KineticPoint::new(0.0, &xs, &vs).expect("finite point")
        })
        .collect()
}

pub fn run(out: Output, map: Map<String, Value>) -> Result<()> {
    let cfg: GreenCheckConfig = parse_section(map)?;
    let d = out.common.dim;
    if cfg.times.iter().any(|t| !(*t > 0.0)) || cfg.mass_nodes < 3 || cfg.ck_nodes < 3 {
        return Err(invalid("times must be positive and node counts at least 3"));
    }
    cfg.indicator_quad.validate()?;
    cfg.residual_quad.validate()?;
    let config = resolved(&out.common, &cfg)?;

    info!("mass at {} times", cfg.times.len());
    let mass_errors: Vec<f64> = cfg.times.iter().map(|&t| (green_mass(d, t, cfg.mass_nodes) - 1.0).abs()).collect();
    let pts = ck_points(d);
    let mut ck_deviation = 0.0f64;
    for &[t, s] in &cfg.ck_pairs {
        ck_deviation = ck_deviation.max(chapman_kolmogorov_check(t, s, &pts, cfg.ck_nodes, cfg.ck_width)?);
    }
    let mut checks = vec![
        Check::at_most("mass_error", mass_errors.iter().copied().fold(0.0, f64::max), 1e-8),
        Check::at_most("ck_deviation", ck_deviation, 1e-6),
    ];

    let indicator = if d == 1 && !cfg.indicator_radii.is_empty() {
        info!("indicator convolution over {} radii", cfg.indicator_radii.len());
        let r = verify_indicator_bound(1, &cfg.indicator_radii, &cfg.indicator_quad)?;
        checks.push(Check::at_most("indicator_slope_error", (r.slope - 2.0).abs(), 0.05));
        checks.push(Check::at_most("indicator_spread", r.spread, 0.02));
        Some(r)
    } else {
        None
    };
    let residual = if d == 1 && cfg.residual_levels >= 2 {
        info!("residual study with {} levels", cfg.residual_levels);
        let r = residual_study(cfg.residual_levels, &cfg.residual_quad)?;
        checks.push(Check::at_least(
            "residual_order",
            r.orders.iter().copied().fold(f64::INFINITY, f64::min),
            1.9,
        ));
        Some(r)
    } else {
        None
    };

    let result = GreenCheckResult {
        dim: d,
        mass_errors,
        ck_deviation,
        indicator_slope: indicator.as_ref().map(|r| r.slope),
        indicator,
        residual_orders: residual.as_ref().map(|r| r.orders.clone()),
        residual,
        pass: all_pass(&checks),
        checks,
    };
    out.finish(&config, &result)
}
