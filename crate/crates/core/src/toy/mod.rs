//! The nonlinear toy model
//! `∂_t f + v·∇_x f = ρ[f] ∇_v·(∇_v f + v f)`, `ρ[f] = ∫ f dv`,
//! and its rescaled form for `g = f μ^{−1/2}`,
//! `∂_t g + v·∇_x g = ℛ[g] U[g]` with `ℛ[g] = ∫ g √μ dv` and
//! `U[g] = Δ_v g + (d/2 − |v|²/4) g`.
//!
//! The solver works on `f` in flux form and converts at the interface.

mod decay;
mod sobolev;

pub use decay::{holder_decay_probe, DecayRow, HolderDecayParams, HolderDecayReport};
pub use sobolev::{nash_product_check, sobolev_norm, NashReport, SobolevOrder};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{velocity_laplacian, Field, Grid, MaxwellianRef, SpatialField};
use crate::numerics::pairwise_dot;
use crate::solver::velocity::{self, axis_stride, ColumnOperator, VBoundary, VelocityStats};
use crate::solver::{Quadrature, Scheme, Transport};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvelopeConstants {
    #[serde(rename = "C1")]
    pub c1: f64,
    #[serde(rename = "C2")]
    pub c2: f64,
}

impl EnvelopeConstants {
    pub fn new(c1: f64, c2: f64) -> Result<Self> {
        let e = Self { c1, c2 };
        e.validate()?;
        Ok(e)
    }

    pub fn validate(&self) -> Result<()> {
        if self.c1 > 0.0 && self.c1 <= self.c2 && self.c2.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "envelope needs 0 < C1 <= C2, got C1 = {}, C2 = {}",
                self.c1, self.c2
            )))
        }
    }
}

/// `g = f μ^{−1/2}` on a phase-space grid at one time.
#[derive(Clone, Debug, PartialEq)]
pub struct ToyState {
    pub grid: Grid,
    pub g: Vec<f64>,
    pub time: f64,
}

impl ToyState {
    pub fn new(grid: Grid, g: Vec<f64>, time: f64) -> Result<Self> {
        if g.len() != grid.phase_len() {
            return Err(Error::DimensionMismatch {
                expected: grid.phase_len(),
                got: g.len(),
            });
        }
        if let Some(index) = g.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { grid, g, time })
    }

    /// Samples `g(x, v)` at the grid nodes.
    pub fn from_fn(grid: &Grid, time: f64, g: impl Fn(&[f64], &[f64]) -> f64) -> Result<Self> {
        let data = (0..grid.phase_len())
            .map(|i| {
                let z = grid.point(i);
                g(&z.x, &z.v)
            })
            .collect();
        Self::new(grid.clone(), data, time)
    }

    /// `c(x) √μ(v)`.
    pub fn modulated_maxwellian(grid: &Grid, c: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let m = MaxwellianRef::new(grid.d);
        Self::from_fn(grid, grid.t_min, |x, v| c(x) * m.sqrt_mu(v))
    }

    pub fn as_field(&self) -> Result<Field> {
        Field::new(self.grid.with_time(1, self.time, self.time)?, self.g.clone())
    }

    fn to_f(&self, sqrt_mu: &[f64]) -> Vec<f64> {
        let n = sqrt_mu.len();
        self.g.iter().enumerate().map(|(i, g)| g * sqrt_mu[i % n]).collect()
    }
}

/// `ℛ[g](x) = ∫ g √μ dv`.
pub fn compute_rho(state: &ToyState) -> SpatialField {
    let grid = &state.grid;
    let w: Vec<f64> = grid
        .v_weights()
        .iter()
        .zip(MaxwellianRef::new(grid.d).sqrt_mu_nodes(grid))
        .map(|(a, b)| a * b)
        .collect();
    SpatialField {
        grid: grid.with_time(1, state.time, state.time).expect("validated grid"),
        data: state.g.chunks(w.len()).map(|c| pairwise_dot(c, &w)).collect(),
    }
}

/// `U[g] = Δ_v g + (d/2 − |v|²/4) g` by second-order stencils.
pub fn apply_u(state: &ToyState) -> Result<Field> {
    let field = state.as_field()?;
    let lap = velocity_laplacian(&field)?;
    let grid = field.grid().clone();
    let d = grid.d as f64;
    let nvt = grid.nv_total();
    let data = lap
        .data()
        .iter()
        .zip(&state.g)
        .enumerate()
        .map(|(i, (l, g))| {
            let v = grid.v_coords(i % nvt);
            let v2: f64 = v.iter().map(|c| c * c).sum();
            l + (0.5 * d - 0.25 * v2) * g
        })
        .collect();
    Field::new(grid, data)
}

/// Transport plus frozen-density velocity steps on `f = g√μ`.
#[derive(Debug)]
pub struct ToyStepper {
    grid: Grid,
    transport: Transport,
    quad: Quadrature,
    mu: Vec<f64>,
    sqrt_mu: Vec<f64>,
    weights: Vec<f64>,
    theta: f64,
    count: usize,
}

impl ToyStepper {
    pub fn new(grid: &Grid, scheme: Scheme) -> Result<Self> {
        grid.validate()?;
        let m = MaxwellianRef::new(grid.d);
        Ok(Self {
            grid: grid.clone(),
            transport: Transport::new(grid),
            quad: Quadrature::new(grid),
            mu: m.mu_nodes(grid),
            sqrt_mu: m.sqrt_mu_nodes(grid),
            weights: grid.v_weights(),
            theta: scheme.theta(),
            count: 0,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// `ρ[f](x)` per spatial column.
    pub fn rho(&self, f: &[f64]) -> Vec<f64> {
        f.chunks(self.weights.len()).map(|c| pairwise_dot(c, &self.weights)).collect()
    }

    fn column_operator(&self, rho: f64) -> ColumnOperator {
        let g = &self.grid;
        let nvt = g.nv_total();
        let h = g.dv();
        let mut op = ColumnOperator::zeros(g.d, nvt);
        for axis in 0..g.d {
            let stride = axis_stride(g, axis);
            for n in 0..nvt {
                let k = (n / stride) % g.nv;
                op.a_face[axis][n] = rho;
                op.b_face[axis][n] = rho * (g.v(k) + 0.5 * h);
            }
        }
        op
    }

    /// Velocity sub-step `∂_t f = ρ(x) ∇_v·(∇_v f + v f)` with `ρ` given per column.
    pub fn velocity(&mut self, f: &mut [f64], dt: f64, rho: &[f64]) -> Result<VelocityStats> {
        let flip = self.count % 2 == 1;
        self.count += 1;
        velocity::velocity_substep(&self.grid, f, dt, self.theta, VBoundary::ZeroFlux, flip, |ix, _| {
            self.column_operator(rho[ix])
        })
    }

    /// One Strang step. `ρ` is taken after the first half transport; the
    /// velocity step conserves every column's mass, so it is exactly the
    /// density throughout the sub-step. Returns that `ρ`.
    pub fn step(&mut self, f: &mut [f64], dt: f64) -> Result<Vec<f64>> {
        self.transport.apply(f, 0.5 * dt);
        let rho = self.rho(f);
        self.velocity(f, dt, &rho)?;
        self.transport.apply(f, 0.5 * dt);
        Ok(rho)
    }

    /// One Strang step of the linear problem with a prescribed density.
    pub fn step_linear(&mut self, f: &mut [f64], dt: f64, rho: &[f64]) -> Result<()> {
        self.transport.apply(f, 0.5 * dt);
        self.velocity(f, dt, rho)?;
        self.transport.apply(f, 0.5 * dt);
        Ok(())
    }

    pub fn f_from_g(&self, g: &[f64]) -> Vec<f64> {
        let n = self.sqrt_mu.len();
        g.iter().enumerate().map(|(i, x)| x * self.sqrt_mu[i % n]).collect()
    }

    pub fn g_from_f(&self, f: &[f64]) -> Vec<f64> {
        let n = self.sqrt_mu.len();
        f.iter().enumerate().map(|(i, x)| x / self.sqrt_mu[i % n]).collect()
    }

    /// `∫∫ f dx dv`.
    pub fn mass(&self, f: &[f64]) -> f64 {
        self.quad.mass(f)
    }

    /// `‖g‖_{L²}` from `f`.
    pub fn l2_g(&self, f: &[f64]) -> f64 {
        self.quad.l2(&self.g_from_f(f))
    }

    /// `‖g − ρ̄√μ‖_{L²}` from `f`.
    pub fn distance(&self, f: &[f64], rho_bar: f64) -> f64 {
        let n = self.mu.len();
        let dev: Vec<f64> = f
            .iter()
            .enumerate()
            .map(|(i, x)| (x - rho_bar * self.mu[i % n]) / self.sqrt_mu[i % n])
            .collect();
        self.quad.l2(&dev)
    }

    /// Extrema of `g/√μ = f/μ`.
    pub fn ratio_extrema(&self, f: &[f64]) -> (f64, f64) {
        let n = self.mu.len();
        f.iter()
            .enumerate()
            .map(|(i, x)| x / self.mu[i % n])
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| (lo.min(r), hi.max(r)))
    }

    /// Torus volume `L^d`.
    pub fn torus_volume(&self) -> f64 {
        self.grid.x_period.powi(self.grid.d as i32)
    }
}

/// One nonlinear step of the `g`-form. The envelope is checked for
/// consistency only; it does not enter the update.
pub fn step_nonlinear(state: &ToyState, dt: f64, env: EnvelopeConstants) -> Result<ToyState> {
    env.validate()?;
    let mut stepper = ToyStepper::new(&state.grid, Scheme::SplittingBe)?;
    let mut f = state.to_f(&stepper.sqrt_mu);
    stepper.step(&mut f, dt)?;
    if let Some(index) = f.iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFinite { index });
    }
    ToyState::new(state.grid.clone(), stepper.g_from_f(&f), state.time + dt)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeReport {
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub pass: bool,
}

pub const ENVELOPE_TOL: f64 = 1e-6;

/// Extrema of `g/√μ` against `[C₁ − tol, C₂ + tol]`.
pub fn gaussian_envelope_check(state: &ToyState, env: EnvelopeConstants, tol: f64) -> EnvelopeReport {
    let s = MaxwellianRef::new(state.grid.d).sqrt_mu_nodes(&state.grid);
    let n = s.len();
    let (min_ratio, max_ratio) = state
        .g
        .iter()
        .enumerate()
        .map(|(i, g)| g / s[i % n])
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| (lo.min(r), hi.max(r)));
    EnvelopeReport {
        min_ratio,
        max_ratio,
        pass: min_ratio >= env.c1 - tol && max_ratio <= env.c2 + tol,
    }
}

/// Which frames of a run to keep as a field.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameSpec {
    /// Keep frames from this time on.
    pub from: f64,
    /// Keep every this many steps.
    pub every: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToyConfig {
    pub dt: f64,
    pub t_final: f64,
    pub env: EnvelopeConstants,
    pub scheme: Scheme,
    pub record_every: usize,
    pub sobolev: Option<SobolevOrder>,
    pub frames: Option<FrameSpec>,
}

impl ToyConfig {
    pub fn new(dt: f64, t_final: f64, env: EnvelopeConstants) -> Self {
        Self {
            dt,
            t_final,
            env,
            scheme: Scheme::SplittingBe,
            record_every: 1,
            sobolev: None,
            frames: None,
        }
    }

    fn validate(&self) -> Result<()> {
        self.env.validate()?;
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_final >= 0.0) {
            return Err(Error::InvalidParameter("t_final must be non-negative".into()));
        }
        if self.record_every == 0 || self.frames.is_some_and(|f| f.every == 0) {
            return Err(Error::InvalidParameter("recording strides must be at least 1".into()));
        }
        Ok(())
    }

    fn steps(&self) -> (usize, f64) {
        let n = (self.t_final / self.dt - 1e-9).ceil().max(0.0) as usize;
        (n, if n == 0 { self.dt } else { self.t_final / n as f64 })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToyRow {
    pub step: usize,
    pub time: f64,
    /// `∫∫ g√μ dx dv`.
    pub mass: f64,
    /// `‖g‖_{L²}`.
    pub l2: f64,
    pub min_ratio: f64,
    pub max_ratio: f64,
    /// `‖g − ρ̄√μ‖_{L²}`.
    pub distance: f64,
    pub envelope_pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sobolev: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ToyTrace {
    pub rho_bar: f64,
    pub rows: Vec<ToyRow>,
    /// `(time, distance)` after every step, starting with the initial state.
    pub distances: Vec<(f64, f64)>,
}

impl ToyTrace {
    pub fn to_csv(&self) -> String {
        let sob = self.rows.iter().any(|r| r.sobolev.is_some());
        let mut out = String::from("step,time,mass,l2,min_ratio,max_ratio,distance");
        if sob {
            out.push_str(",sobolev");
        }
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!(
                "{},{:e},{:e},{:e},{:e},{:e},{:e}",
                r.step, r.time, r.mass, r.l2, r.min_ratio, r.max_ratio, r.distance
            ));
            if sob {
                out.push_str(&format!(",{:e}", r.sobolev.unwrap_or(f64::NAN)));
            }
            out.push('\n');
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ToyRun {
    pub trace: ToyTrace,
    pub final_state: ToyState,
    pub frames: Option<Field>,
}

/// Runs the nonlinear model from `initial` to `config.t_final`.
pub fn run_toy(initial: &ToyState, config: &ToyConfig) -> Result<ToyRun> {
    config.validate()?;
    let grid = &initial.grid;
    let mut stepper = ToyStepper::new(grid, config.scheme)?;
    let (n, dt) = config.steps();
    let mut f = initial.to_f(&stepper.sqrt_mu);
    let rho_bar = stepper.mass(&f) / stepper.torus_volume();
    let t0 = initial.time;
    let mut trace = ToyTrace {
        rho_bar,
        ..ToyTrace::default()
    };
    let mut frames: Vec<Vec<f64>> = Vec::new();
    let mut frame_t0 = None;

    let record = |step: usize, time: f64, f: &[f64], stepper: &ToyStepper| -> Result<ToyRow> {
        let (min_ratio, max_ratio) = stepper.ratio_extrema(f);
        let sobolev = match config.sobolev {
            Some(order) => Some(sobolev_norm(
                &ToyState::new(grid.clone(), stepper.g_from_f(f), time)?,
                order,
            )?),
            None => None,
        };
        Ok(ToyRow {
            step,
            time,
            mass: stepper.mass(f),
            l2: stepper.l2_g(f),
            min_ratio,
            max_ratio,
            distance: stepper.distance(f, rho_bar),
            envelope_pass: min_ratio >= config.env.c1 - ENVELOPE_TOL && max_ratio <= config.env.c2 + ENVELOPE_TOL,
            sobolev,
        })
    };

    trace.rows.push(record(0, t0, &f, &stepper)?);
    trace.distances.push((t0, trace.rows[0].distance));
    let mut keep_frame = |step: usize, time: f64, f: &[f64], stepper: &ToyStepper| {
        if let Some(spec) = config.frames {
            if time >= spec.from - 1e-12 && (step % spec.every == 0) {
                frame_t0.get_or_insert(time);
                frames.push(stepper.g_from_f(f));
            }
        }
    };
    keep_frame(0, t0, &f, &stepper);
    for k in 0..n {
        stepper.step(&mut f, dt)?;
        if f.iter().any(|x| !x.is_finite()) {
            return Err(Error::NanDetected { step: k + 1 });
        }
        let time = t0 + (k + 1) as f64 * dt;
        trace.distances.push((time, stepper.distance(&f, rho_bar)));
        if (k + 1) % config.record_every == 0 || k + 1 == n {
            trace.rows.push(record(k + 1, time, &f, &stepper)?);
        }
        keep_frame(k + 1, time, &f, &stepper);
    }
    let frames = match (frame_t0, frames.len()) {
        (Some(ft0), m) if m > 0 => {
            let t_last = ft0 + (m - 1) as f64 * dt * config.frames.map_or(1, |s| s.every) as f64;
            Some(Field::from_frames(grid.with_time(m, ft0, t_last)?, &frames)?)
        }
        _ => None,
    };
    let final_state = ToyState::new(grid.clone(), stepper.g_from_f(&f), t0 + n as f64 * dt)?;
    Ok(ToyRun {
        trace,
        final_state,
        frames,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RelaxationReport {
    pub rho_bar: f64,
    pub initial_distance: f64,
    /// First time the distance falls below half its initial value.
    pub t_half: Option<f64>,
    pub final_distance: f64,
    /// Steps whose distance exceeds the previous one by more than the tolerance.
    pub violations: Vec<usize>,
    pub max_increase: f64,
}

pub const MONOTONE_TOL: f64 = 1e-10;

pub fn relaxation_report(trace: &ToyTrace) -> RelaxationReport {
    let d = &trace.distances;
    let initial_distance = d.first().map_or(0.0, |x| x.1);
    let t_half = d.iter().find(|(_, x)| *x < 0.5 * initial_distance).map(|(t, _)| *t);
    let mut violations = Vec::new();
    let mut max_increase = 0.0f64;
    for (i, w) in d.windows(2).enumerate() {
        let inc = w[1].1 - w[0].1;
        max_increase = max_increase.max(inc);
        if inc > MONOTONE_TOL {
            violations.push(i + 1);
        }
    }
    RelaxationReport {
        rho_bar: trace.rho_bar,
        initial_distance,
        t_half,
        final_distance: d.last().map_or(0.0, |x| x.1),
        violations,
        max_increase,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PicardResult {
    pub solution: ToyState,
    /// Final-time `g` of every iterate after the initial guess.
    pub iterates: Vec<Vec<f64>>,
    /// `sup |g_{n+1} − g_n|` over the whole time interval.
    pub differences: Vec<f64>,
    /// `differences[n+1] / differences[n]`.
    pub ratios: Vec<f64>,
    pub converged: bool,
}

/// Picard iteration `(∂_t + v·∇_x) g_{n+1} = ℛ[g_n] U[g_{n+1}]` on
/// `[0, t_final]`, starting from `g₀(t) = g_in`. Each sweep is a linear
/// solve with the density history of the previous iterate, taken at the
/// same point of each step as in [`ToyStepper::step`].
pub fn picard_solve(g_in: &ToyState, t_final: f64, dt: f64, n_max: usize, tol: f64) -> Result<PicardResult> {
    let cfg = ToyConfig::new(dt, t_final, EnvelopeConstants { c1: 1.0, c2: 1.0 });
    cfg.validate()?;
    let (n, dt) = cfg.steps();
    let mut stepper = ToyStepper::new(&g_in.grid, Scheme::SplittingBe)?;
    let f_in = g_in.to_f(&stepper.sqrt_mu);
    let rho0 = stepper.rho(&f_in);
    let mut rho_hist: Vec<Vec<f64>> = vec![rho0; n];
    let mut traj: Vec<Vec<f64>> = vec![g_in.g.clone(); n + 1];
    let mut out = PicardResult {
        solution: g_in.clone(),
        iterates: Vec::new(),
        differences: Vec::new(),
        ratios: Vec::new(),
        converged: false,
    };
    for _ in 0..n_max {
        let mut f = f_in.clone();
        let mut new_rho = Vec::with_capacity(n);
        let mut diff = 0.0f64;
        for (k, rho) in rho_hist.iter().enumerate() {
            stepper.transport.apply(&mut f, 0.5 * dt);
            new_rho.push(stepper.rho(&f));
            stepper.velocity(&mut f, dt, rho)?;
            stepper.transport.apply(&mut f, 0.5 * dt);
            let g = stepper.g_from_f(&f);
            if g.iter().any(|x| !x.is_finite()) {
                return Err(Error::NanDetected { step: k + 1 });
            }
            diff = diff.max(g.iter().zip(&traj[k + 1]).fold(0.0, |m, (a, b)| m.max((a - b).abs())));
            traj[k + 1] = g;
        }
        rho_hist = new_rho;
        if let Some(prev) = out.differences.last() {
            out.ratios.push(diff / prev);
        }
        out.differences.push(diff);
        out.iterates.push(traj[n].clone());
        if diff < tol {
            out.converged = true;
            break;
        }
        if out.ratios.last().is_some_and(|r| *r >= 1.0) {
            return Err(Error::NonContraction {
                ratios: out.ratios.clone(),
            });
        }
    }
    out.solution = ToyState::new(g_in.grid.clone(), traj[n].clone(), g_in.time + n as f64 * dt)?;
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub initial_distance: f64,
    pub final_distance: f64,
    /// `final_distance / initial_distance`.
    pub amplification: f64,
}

/// Sup-distance of two nonlinear runs at `t_final` relative to the start.
pub fn difference_amplification(a: &ToyState, b: &ToyState, t_final: f64, dt: f64) -> Result<StabilityReport> {
    a.grid.ensure_same(&b.grid)?;
    let sup = |x: &[f64], y: &[f64]| x.iter().zip(y).fold(0.0f64, |m, (p, q)| m.max((p - q).abs()));
    let initial_distance = sup(&a.g, &b.g);
    if initial_distance == 0.0 {
        return Err(Error::Degenerate("identical initial data".into()));
    }
    let cfg = ToyConfig::new(dt, t_final, EnvelopeConstants { c1: 1.0, c2: 1.0 });
    let ra = run_toy(a, &cfg)?;
    let rb = run_toy(b, &cfg)?;
    let final_distance = sup(&ra.final_state.g, &rb.final_state.g);
    Ok(StabilityReport {
        initial_distance,
        final_distance,
        amplification: final_distance / initial_distance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid(nx: usize, nv: usize) -> Grid {
        Grid::phase(1, nx, nv, 0.0, 2.0 * PI, 8.0).unwrap()
    }

    #[test]
    fn rho_examples() {
        let g = grid(8, 128);
        let s = ToyState::modulated_maxwellian(&g, |_| 1.0).unwrap();
        assert!(compute_rho(&s).data.iter().all(|r| (r - 1.0).abs() < 1e-8));
        let s = ToyState::modulated_maxwellian(&g, |_| 2.5).unwrap();
        assert!(compute_rho(&s).data.iter().all(|r| (r - 2.5).abs() < 1e-8));
        let s = ToyState::modulated_maxwellian(&g, |x| 1.0 + 0.3 * x[0].sin()).unwrap();
        assert!(compute_rho(&s).data.iter().all(|r| *r >= 0.7 - 1e-6 && *r <= 1.3 + 1e-6));
    }

    #[test]
    fn u_examples() {
        let g = grid(4, 257);
        let m = MaxwellianRef::new(1);
        let s = ToyState::modulated_maxwellian(&g, |_| 1.0).unwrap();
        assert!(apply_u(&s).unwrap().max_abs() < 1e-3);
        let zero = ToyState::new(g.clone(), vec![0.0; g.phase_len()], 0.0).unwrap();
        assert_eq!(apply_u(&zero).unwrap().max_abs(), 0.0);
        let s = ToyState::from_fn(&g, 0.0, |_, v| v[0] * m.sqrt_mu(v)).unwrap();
        let u = apply_u(&s).unwrap();
        for (a, b) in u.data().iter().zip(&s.g) {
            assert!((a + b).abs() < 2e-3);
        }
    }

    #[test]
    fn equilibrium_is_a_fixed_point() {
        let g = grid(16, 128);
        let env = EnvelopeConstants::new(0.5, 2.0).unwrap();
        for c in [1.0, 0.6, 1.7] {
            let mut s = ToyState::modulated_maxwellian(&g, |_| c).unwrap();
            let start = s.g.clone();
            for _ in 0..3 {
                s = step_nonlinear(&s, 1e-3, env).unwrap();
            }
            for (a, b) in s.g.iter().zip(&start) {
                assert!((a - b).abs() < 3e-12, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn short_run_keeps_sandwich_and_mass() {
        let g = grid(16, 64);
        let env = EnvelopeConstants::new(0.7, 1.3).unwrap();
        let s = ToyState::modulated_maxwellian(&g, |x| 1.0 + 0.3 * x[0].sin()).unwrap();
        let mut cfg = ToyConfig::new(1e-2, 0.5, env);
        cfg.record_every = 5;
        let run = run_toy(&s, &cfg).unwrap();
        let m0 = run.trace.rows[0].mass;
        for r in &run.trace.rows {
            assert!(r.envelope_pass, "{r:?}");
            assert!((r.mass - m0).abs() < 1e-12);
        }
        let rep = relaxation_report(&run.trace);
        assert!(rep.violations.is_empty(), "{rep:?}");
        assert!(rep.final_distance < rep.initial_distance);
    }

    #[test]
    fn envelope_examples() {
        let g = grid(4, 32);
        let env = EnvelopeConstants::new(0.7, 1.3).unwrap();
        let r = gaussian_envelope_check(&ToyState::modulated_maxwellian(&g, |_| 0.7).unwrap(), env, ENVELOPE_TOL);
        assert!(r.pass && (r.min_ratio - 0.7).abs() < 1e-14 && (r.max_ratio - 0.7).abs() < 1e-14);
        let r = gaussian_envelope_check(&ToyState::modulated_maxwellian(&g, |_| 2.6).unwrap(), env, ENVELOPE_TOL);
        assert!(!r.pass && (r.max_ratio - 2.6).abs() < 1e-12);
        assert!(EnvelopeConstants::new(1.3, 0.7).is_err());
    }

    #[test]
    fn picard_fixed_point_in_one_sweep() {
        let g = grid(8, 64);
        let s = ToyState::modulated_maxwellian(&g, |_| 1.0).unwrap();
        let p = picard_solve(&s, 0.05, 1e-2, 10, 1e-10).unwrap();
        assert!(p.converged);
        assert_eq!(p.differences.len(), 1);
    }
}
