use anyhow::Result;
use kinfp_core::green::QuadSpec;
use kinfp_core::probes::{
    derivative_decay_probe, gradient_batch, schauder_batch, CaloricFunction, DecayProbeReport, GradientBatch,
    SchauderBatch, DECAY_RADII,
};
use log::info;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::config::{parse_section, resolved};
use crate::error::invalid;
use crate::report::Output;

/// Ratios may move by at most this factor across refinement levels.
pub const SCHAUDER_SPREAD_LIMIT: f64 = 2.0;
/// Admissible relative change of the gradient batch maximum.
pub const GRADIENT_CHANGE_LIMIT: f64 = 0.25;

fn seeds(first: u64, cases: usize) -> Result<Vec<u64>> {
    if cases == 0 {
        return Err(invalid("cases must be at least 1"));
    }
    Ok((0..cases as u64).map(|i| first.wrapping_add(i)).collect())
}

fn dim_one(out: &Output) -> Result<()> {
    if out.common.dim != 1 {
        return Err(invalid(format!("{} runs in dim 1 only", out.subcommand)));
    }
    Ok(())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SchauderConfig {
    pub cases: usize,
    pub alpha: f64,
    pub levels: usize,
}

impl Default for SchauderConfig {
    fn default() -> Self {
        Self {
            cases: 3,
            alpha: 0.5,
            levels: 2,
        }
    }
}

#[derive(Serialize)]
struct SchauderResult {
    seeds: Vec<u64>,
    #[serde(flatten)]
    batch: SchauderBatch,
    spread_limit: f64,
    pass: bool,
}

pub fn run_schauder(mut out: Output, map: Map<String, Value>) -> Result<()> {
    dim_one(&out)?;
    let cfg: SchauderConfig = parse_section(map)?;
    if cfg.levels == 0 || cfg.levels > 4 {
        return Err(invalid("levels must lie in 1..=4"));
    }
    let seeds = seeds(out.common.seed, cfg.cases)?;
    let config = resolved(&out.common, &cfg)?;
    info!("schauder probe on {} cases, {} levels", seeds.len(), cfg.levels);
    let batch = schauder_batch(&seeds, cfg.alpha, cfg.levels)?;
    let mut csv = String::from("seed,level,lhs,rhs,ratio\n");
    for c in &batch.cases {
        for r in &c.reports {
            csv.push_str(&format!("{},{},{:e},{:e},{:e}\n", c.seed, r.level, r.lhs, r.rhs, r.ratio));
        }
    }
    out.write_text(".csv", &csv)?;
    let result = SchauderResult {
        pass: batch.max_spread <= SCHAUDER_SPREAD_LIMIT,
        seeds,
        batch,
        spread_limit: SCHAUDER_SPREAD_LIMIT,
    };
    out.finish(&config, &result)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GradientConfig {
    pub cases: usize,
    pub per_axis: usize,
    pub quad: QuadSpec,
}

impl Default for GradientConfig {
    fn default() -> Self {
        Self {
            cases: 16,
            per_axis: 5,
            quad: QuadSpec::default(),
        }
    }
}

#[derive(Serialize)]
struct GradientResult {
    seeds: Vec<u64>,
    #[serde(flatten)]
    batch: GradientBatch,
    change_limit: f64,
    pass: bool,
}

pub fn run_gradient(mut out: Output, map: Map<String, Value>) -> Result<()> {
    dim_one(&out)?;
    let cfg: GradientConfig = parse_section(map)?;
    if cfg.per_axis == 0 {
        return Err(invalid("per_axis must be at least 1"));
    }
    cfg.quad.validate()?;
    let seeds = seeds(out.common.seed, cfg.cases)?;
    let config = resolved(&out.common, &cfg)?;
    info!("gradient probe on {} sources", seeds.len());
    let batch = gradient_batch(&seeds, &cfg.quad, cfg.per_axis)?;
    let mut csv = String::from("seed,ratio,ratio_refined\n");
    for (a, b) in batch.reports.iter().zip(&batch.refined_reports) {
        csv.push_str(&format!("{},{:e},{:e}\n", a.case_id, a.ratio, b.ratio));
    }
    out.write_text(".csv", &csv)?;
    let result = GradientResult {
        pass: batch.relative_change <= GRADIENT_CHANGE_LIMIT,
        seeds,
        batch,
        change_limit: GRADIENT_CHANGE_LIMIT,
    };
    out.finish(&config, &result)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DecayConfig {
    pub caloric: CaloricFunction,
    /// `[n, a, b]` for `∂_t^n ∂_x^a ∂_v^b`.
    pub orders: Vec<[u32; 3]>,
    pub radii: Vec<f64>,
    pub per_axis: usize,
}

impl Default for DecayConfig {
    fn default() -> Self {
        Self {
            caloric: CaloricFunction::default(),
            orders: vec![[0, 0, 1], [0, 0, 2], [1, 0, 0], [0, 1, 0]],
            radii: DECAY_RADII.to_vec(),
            per_axis: 5,
        }
    }
}

#[derive(Serialize)]
struct DecayResult {
    reports: Vec<DecayProbeReport>,
    pass: bool,
}

pub fn run_decay(mut out: Output, map: Map<String, Value>) -> Result<()> {
    dim_one(&out)?;
    let cfg: DecayConfig = parse_section(map)?;
    if cfg.orders.is_empty() || cfg.per_axis == 0 {
        return Err(invalid("need at least one order and per_axis >= 1"));
    }
    let config = resolved(&out.common, &cfg)?;
    let reports = cfg
        .orders
        .iter()
        .map(|&o| derivative_decay_probe(&cfg.caloric, o, &cfg.radii, cfg.per_axis))
        .collect::<kinfp_core::Result<Vec<_>>>()?;
    let mut csv = String::from("order,weight,radius,remainder\n");
    for r in &reports {
        let [n, a, b] = r.order;
        for (rad, rem) in r.radii.iter().zip(&r.remainders) {
            csv.push_str(&format!("{n}{a}{b},{},{rad:e},{rem:e}\n", r.weight));
        }
    }
    out.write_text(".csv", &csv)?;
    let result = DecayResult {
        pass: reports.iter().all(|r| r.pass),
        reports,
    };
    out.finish(&config, &result)
}
