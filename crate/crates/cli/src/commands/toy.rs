use anyhow::Result;
use kinfp_core::solver::Scheme;
use kinfp_core::toy::{
    difference_amplification, holder_decay_probe, picard_solve, relaxation_report, run_toy, EnvelopeConstants,
    FrameSpec, HolderDecayParams, HolderDecayReport, RelaxationReport, SobolevOrder, ToyConfig, ToyRow, ToyState,
};
use kinfp_core::{Grid, MaxwellianRef};
use log::info;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::config::{parse_section, resolved, PhaseGridSpec};
use crate::error::invalid;
use crate::expr::Source;
use crate::report::Output;

const DEFAULT_INITIAL: &str = "(1 + 0.3*sin(x)) * sqrt_mu";

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HolderProbeSpec {
    pub alpha0: f64,
    pub delta: f64,
    /// Earliest time the cylinders reach back to; `t_final − 1` when absent.
    pub tau: Option<f64>,
    pub v_stride: usize,
    pub x_centers: usize,
    pub r_min: Option<f64>,
    /// Keep a frame every this many steps.
    pub frame_every: usize,
}

impl Default for HolderProbeSpec {
    fn default() -> Self {
        let p = HolderDecayParams::default();
        Self {
            alpha0: p.alpha0,
            delta: p.delta,
            tau: None,
            v_stride: p.v_stride,
            x_centers: p.x_centers,
            r_min: Some(0.25),
            frame_every: 10,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StabilitySpec {
    /// Sizes of the perturbation `δ cos(x₁) √μ(v) / √μ(0)`.
    pub deltas: Vec<f64>,
    pub t_final: f64,
}

impl Default for StabilitySpec {
    fn default() -> Self {
        Self {
            deltas: vec![1e-2, 1e-3],
            t_final: 1.0,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Diagnostics {
    pub sobolev: Option<SobolevOrder>,
    pub envelope: bool,
    pub relaxation: bool,
    pub holder_probe: Option<HolderProbeSpec>,
    pub stability: Option<StabilitySpec>,
}

impl Default for Diagnostics {
    fn default() -> Self {
        Self {
            sobolev: None,
            envelope: true,
            relaxation: true,
            holder_probe: None,
            stability: None,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolveToyConfig {
    pub grid: PhaseGridSpec,
    pub dt: f64,
    pub t_final: f64,
    #[serde(rename = "C1")]
    pub c1: f64,
    #[serde(rename = "C2")]
    pub c2: f64,
    pub initial: Source,
    pub scheme: Scheme,
    pub record_every: usize,
    pub diagnostics: Diagnostics,
}

impl Default for SolveToyConfig {
    fn default() -> Self {
        Self {
            grid: PhaseGridSpec::default(),
            dt: 1e-3,
            t_final: 5.0,
            c1: 0.7,
            c2: 1.3,
            initial: Source::Expr(DEFAULT_INITIAL.into()),
            scheme: Scheme::SplittingBe,
            record_every: 100,
            diagnostics: Diagnostics::default(),
        }
    }
}

#[derive(Serialize)]
struct EnvelopeSummary {
    #[serde(rename = "C1")]
    c1: f64,
    #[serde(rename = "C2")]
    c2: f64,
    min_ratio: f64,
    max_ratio: f64,
    failed_rows: usize,
    pass: bool,
}

#[derive(Serialize)]
struct StabilityRow {
    delta: f64,
    initial_distance: f64,
    final_distance: f64,
    amplification: f64,
}

#[derive(Serialize)]
struct StabilitySummary {
    t_final: f64,
    rows: Vec<StabilityRow>,
    /// `max/min` of the amplification factors.
    spread: f64,
}

#[derive(Serialize)]
struct ToyResult {
    rho_bar: f64,
    initial_mass: f64,
    mass_drift: f64,
    final_row: ToyRow,
    #[serde(skip_serializing_if = "Option::is_none")]
    envelope: Option<EnvelopeSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    relaxation: Option<RelaxationReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    holder_probe: Option<HolderDecayReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    stability: Option<StabilitySummary>,
}

fn initial_state(src: &Source, grid: &Grid) -> Result<ToyState> {
    let data = src.phase_data(grid, grid.t_min)?;
    Ok(ToyState::new(grid.clone(), data, grid.t_min)?)
}

pub fn run(mut out: Output, map: Map<String, Value>) -> Result<()> {
    let mut cfg: SolveToyConfig = parse_section(map)?;
    let d = out.common.dim;
    cfg.grid.resolve(d);
    if let Some(h) = cfg.diagnostics.holder_probe.as_mut() {
        if d != 1 {
            return Err(invalid("holder_probe runs in dim 1 only"));
        }
        h.tau.get_or_insert((cfg.t_final - 1.0).max(0.0));
    }
    let grid = cfg.grid.grid(d)?;
    let env = EnvelopeConstants::new(cfg.c1, cfg.c2)?;
    let initial = initial_state(&cfg.initial, &grid)?;
    let mut toy = ToyConfig::new(cfg.dt, cfg.t_final, env);
    toy.scheme = cfg.scheme;
    toy.record_every = cfg.record_every;
    toy.sobolev = cfg.diagnostics.sobolev;
    toy.frames = cfg.diagnostics.holder_probe.as_ref().map(|h| FrameSpec {
        from: h.tau.unwrap_or(0.0),
        every: h.frame_every,
    });
    let config = resolved(&out.common, &cfg)?;

    info!("toy run to t = {}", cfg.t_final);
    let run = run_toy(&initial, &toy)?;
    let rows = &run.trace.rows;
    let m0 = rows[0].mass;
    let envelope = cfg.diagnostics.envelope.then(|| EnvelopeSummary {
        c1: cfg.c1,
        c2: cfg.c2,
        min_ratio: rows.iter().map(|r| r.min_ratio).fold(f64::INFINITY, f64::min),
        max_ratio: rows.iter().map(|r| r.max_ratio).fold(f64::NEG_INFINITY, f64::max),
        failed_rows: rows.iter().filter(|r| !r.envelope_pass).count(),
        pass: rows.iter().all(|r| r.envelope_pass),
    });
    let relaxation = cfg.diagnostics.relaxation.then(|| relaxation_report(&run.trace));
    let holder_probe = match (&cfg.diagnostics.holder_probe, &run.frames) {
        (Some(h), Some(frames)) => {
            info!("holder decay probe on {} frames", frames.grid().nt);
            let params = HolderDecayParams {
                alpha0: h.alpha0,
                delta: h.delta,
                tau: h.tau.unwrap_or(0.0),
                v_stride: h.v_stride,
                x_centers: h.x_centers,
                r_min: h.r_min,
            };
            Some(holder_decay_probe(frames, run.trace.rho_bar, &params)?)
        }
        _ => None,
    };
    let stability = match &cfg.diagnostics.stability {
        Some(s) => Some(stability(&initial, s, cfg.dt)?),
        None => None,
    };

    let result = ToyResult {
        rho_bar: run.trace.rho_bar,
        initial_mass: m0,
        mass_drift: rows.iter().map(|r| (r.mass - m0).abs()).fold(0.0, f64::max),
        final_row: rows.last().expect("final row").clone(),
        envelope,
        relaxation,
        holder_probe,
        stability,
    };
    out.write_text(".trace.csv", &run.trace.to_csv())?;
    out.write_field(".final.kfp", &run.final_state.as_field()?)?;
    out.finish(&config, &result)
}

fn stability(a: &ToyState, spec: &StabilitySpec, dt: f64) -> Result<StabilitySummary> {
    if spec.deltas.is_empty() || spec.deltas.iter().any(|d| !(*d > 0.0)) || !(spec.t_final > 0.0) {
        return Err(invalid("stability needs positive deltas and t_final"));
    }
    let m = MaxwellianRef::new(a.grid.d);
    let s0 = m.sqrt_mu(&vec![0.0; a.grid.d]);
    let mut rows = Vec::new();
    for &delta in &spec.deltas {
        let mut b = a.clone();
        for (i, g) in b.g.iter_mut().enumerate() {
            let z = a.grid.point(i);
            *g += delta * z.x[0].cos() * m.sqrt_mu(&z.v) / s0;
        }
        let r = difference_amplification(a, &b, spec.t_final, dt)?;
        rows.push(StabilityRow {
            delta,
            initial_distance: r.initial_distance,
            final_distance: r.final_distance,
            amplification: r.amplification,
        });
    }
    let ks: Vec<f64> = rows.iter().map(|r| r.amplification).collect();
    Ok(StabilitySummary {
        t_final: spec.t_final,
        spread: kinfp_core::probes::spread(&ks),
        rows,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PicardConfig {
    pub grid: PhaseGridSpec,
    pub dt: f64,
    pub t_final: f64,
    pub initial: Source,
    pub n_max: usize,
    pub tol: f64,
    /// Also step the nonlinear model directly and compare.
    pub compare_direct: bool,
}

impl Default for PicardConfig {
    fn default() -> Self {
        Self {
            grid: PhaseGridSpec::default(),
            dt: 1e-3,
            t_final: 0.1,
            initial: Source::Expr(DEFAULT_INITIAL.into()),
            n_max: 20,
            tol: 1e-10,
            compare_direct: true,
        }
    }
}

#[derive(Serialize)]
struct DirectComparison {
    distance: f64,
    /// `10 (dt + Δv²) sup|g_in|`.
    bound: f64,
    pass: bool,
}

#[derive(Serialize)]
struct PicardSummary {
    iterations: usize,
    converged: bool,
    differences: Vec<f64>,
    ratios: Vec<f64>,
    max_ratio: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    direct: Option<DirectComparison>,
}

pub fn run_picard(mut out: Output, map: Map<String, Value>) -> Result<()> {
    let mut cfg: PicardConfig = parse_section(map)?;
    let d = out.common.dim;
    cfg.grid.resolve(d);
    let grid = cfg.grid.grid(d)?;
    let initial = initial_state(&cfg.initial, &grid)?;
    let config = resolved(&out.common, &cfg)?;

    info!("Picard on [0, {}] with at most {} iterates", cfg.t_final, cfg.n_max);
    let p = picard_solve(&initial, cfg.t_final, cfg.dt, cfg.n_max, cfg.tol)?;
    let direct = if cfg.compare_direct {
        // The envelope does not enter the dynamics; a wide one keeps the run unconstrained.
        let env = EnvelopeConstants {
            c1: f64::MIN_POSITIVE,
            c2: f64::MAX,
        };
        let mut toy = ToyConfig::new(cfg.dt, cfg.t_final, env);
        toy.record_every = usize::MAX;
        let run = run_toy(&initial, &toy)?;
        let distance = p
            .solution
            .g
            .iter()
            .zip(&run.final_state.g)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        let scale = initial.g.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let bound = 10.0 * (cfg.dt + grid.dv() * grid.dv()) * scale;
        Some(DirectComparison {
            distance,
            bound,
            pass: distance <= bound,
        })
    } else {
        None
    };
    let mut csv = String::from("iteration,difference,ratio\n");
    for (i, diff) in p.differences.iter().enumerate() {
        let ratio = if i == 0 { f64::NAN } else { p.ratios.get(i - 1).copied().unwrap_or(f64::NAN) };
        csv.push_str(&format!("{},{diff:e},{ratio:e}\n", i + 1));
    }
    let result = PicardSummary {
        iterations: p.differences.len(),
        converged: p.converged,
        max_ratio: p.ratios.iter().copied().reduce(f64::max),
        differences: p.differences.clone(),
        ratios: p.ratios.clone(),
        direct,
    };
    out.write_text(".iterations.csv", &csv)?;
    out.write_field(".final.kfp", &p.solution.as_field()?)?;
    out.finish(&config, &result)
}
