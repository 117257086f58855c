//! Time stepping for
//! `(∂_t + v·∇_x) g = Σ aⁱʲ∂²_{v_iv_j} g + Σ bⁱ∂_{v_i} g + c g + S`
//! on `𝕋^d × [−V, V]^d`.
//!
//! Each step is split into exact spectral transport in `x` and an implicit
//! velocity step per spatial column (see [`velocity`]). The non-divergence
//! terms are rewritten as `∂_i(a_ii ∂_i g + β_i g) + r g` with
//! `β_i = b_i − ∂_i a_ii` and remainder `r = c − Σ_i ∂_i β_i` taken
//! discretely, so that the scheme maps constants exactly as `c` does.

pub mod mms;
mod transport;
pub mod velocity;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{Field, Grid, MaxwellianRef};
use crate::numerics::pairwise_dot;

pub use transport::Transport;
pub use velocity::{ColumnOperator, VBoundary, VelocityStats};

/// Coefficient as a function of `(t, x, v)`.
pub type CoefFn = Arc<dyn Fn(f64, &[f64], &[f64]) -> f64 + Send + Sync>;

pub fn coef<F>(f: F) -> CoefFn
where
    F: Fn(f64, &[f64], &[f64]) -> f64 + Send + Sync + 'static,
{
    Arc::new(f)
}

pub fn constant(c: f64) -> CoefFn {
    coef(move |_, _, _| c)
}

#[derive(Clone)]
pub enum Diffusion {
    /// `λ Id`.
    Isotropic(CoefFn),
    /// Row-major symmetric `d × d` entries.
    Matrix(Vec<CoefFn>),
}

#[derive(Clone)]
pub struct CoefficientField {
    pub d: usize,
    pub a: Diffusion,
    pub b: Option<Vec<CoefFn>>,
    pub c: Option<CoefFn>,
    pub s: Option<CoefFn>,
}

impl std::fmt::Debug for CoefficientField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CoefficientField")
            .field("d", &self.d)
            .field("isotropic", &matches!(self.a, Diffusion::Isotropic(_)))
            .field("b", &self.b.is_some())
            .field("c", &self.c.is_some())
            .field("s", &self.s.is_some())
            .finish()
    }
}

impl CoefficientField {
    pub fn isotropic(d: usize, lambda: CoefFn) -> Self {
        Self {
            d,
            a: Diffusion::Isotropic(lambda),
            b: None,
            c: None,
            s: None,
        }
    }

    /// `a = Id`, nothing else.
    pub fn heat(d: usize) -> Self {
        Self::isotropic(d, constant(1.0))
    }

    pub fn with_drift(mut self, b: Vec<CoefFn>) -> Self {
        self.b = Some(b);
        self
    }

    pub fn with_c(mut self, c: CoefFn) -> Self {
        self.c = Some(c);
        self
    }

    pub fn with_source(mut self, s: CoefFn) -> Self {
        self.s = Some(s);
        self
    }

    pub fn a_entry(&self, i: usize, j: usize, t: f64, x: &[f64], v: &[f64]) -> f64 {
        match &self.a {
            Diffusion::Isotropic(l) => {
                if i == j {
                    l(t, x, v)
                } else {
                    0.0
                }
            }
            Diffusion::Matrix(m) => m[i * self.d + j](t, x, v),
        }
    }

    pub fn b_entry(&self, i: usize, t: f64, x: &[f64], v: &[f64]) -> f64 {
        self.b.as_ref().map_or(0.0, |b| b[i](t, x, v))
    }

    fn validate(&self) -> Result<()> {
        if let Diffusion::Matrix(m) = &self.a {
            if m.len() != self.d * self.d {
                return Err(Error::DimensionMismatch {
                    expected: self.d * self.d,
                    got: m.len(),
                });
            }
        }
        if let Some(b) = &self.b {
            if b.len() != self.d {
                return Err(Error::DimensionMismatch {
                    expected: self.d,
                    got: b.len(),
                });
            }
        }
        Ok(())
    }

    /// Smallest eigenvalue of `a` over the grid nodes at time `t`; fails if
    /// `a` is not symmetric there.
    pub fn ellipticity(&self, grid: &Grid, t: f64) -> Result<f64> {
        let mut lam = f64::INFINITY;
        for ix in 0..grid.nx_total() {
            let x = grid.x_coords(ix);
            for iv in 0..grid.nv_total() {
                let v = grid.v_coords(iv);
                let e = if self.d == 1 {
                    self.a_entry(0, 0, t, &x, &v)
                } else {
                    let (p, q, r) = (
                        self.a_entry(0, 0, t, &x, &v),
                        self.a_entry(0, 1, t, &x, &v),
                        self.a_entry(1, 1, t, &x, &v),
                    );
                    let q2 = self.a_entry(1, 0, t, &x, &v);
                    if (q - q2).abs() > 1e-12 * (1.0 + q.abs()) {
                        return Err(Error::InvalidParameter("diffusion matrix is not symmetric".into()));
                    }
                    0.5 * (p + r) - (0.25 * (p - r).powi(2) + q * q).sqrt()
                };
                lam = lam.min(e);
            }
        }
        Ok(lam)
    }

    /// Column operator at time `t` for spatial node `ix`.
    pub fn column_operator(&self, grid: &Grid, t: f64, ix: usize) -> ColumnOperator {
        let d = grid.d;
        let nvt = grid.nv_total();
        let h = grid.dv();
        let x = grid.x_coords(ix);
        let mut op = ColumnOperator::zeros(d, nvt);
        let mut v = vec![0.0; d];
        for n in 0..nvt {
            let m = grid.unflatten(grid.nv, n);
            for i in 0..d {
                v[i] = grid.v(m[i]);
            }
            for i in 0..d {
                if m[i] + 1 < grid.nv {
                    let a0 = self.a_entry(i, i, t, &x, &v);
                    let mut vf = v.clone();
                    vf[i] = grid.v(m[i] + 1);
                    let a1 = self.a_entry(i, i, t, &x, &vf);
                    vf[i] = v[i] + 0.5 * h;
                    op.a_face[i][n] = self.a_entry(i, i, t, &x, &vf);
                    op.b_face[i][n] = self.b_entry(i, t, &x, &vf) - (a1 - a0) / h;
                }
            }
            op.remainder[n] = self.c.as_ref().map_or(0.0, |c| c(t, &x, &v));
            op.source[n] = self.s.as_ref().map_or(0.0, |s| s(t, &x, &v));
        }
        if d == 2 {
            if let Diffusion::Matrix(_) = self.a {
                op.cross = Some(
                    (0..nvt)
                        .map(|n| {
                            let v = grid.v_coords(n);
                            self.a_entry(0, 1, t, &x, &v)
                        })
                        .collect(),
                );
            }
        }
        let div = op.drift_divergence(grid);
        for (r, dv) in op.remainder.iter_mut().zip(div) {
            *r -= dv;
        }
        op
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scheme {
    #[serde(rename = "splitting-BE", alias = "splitting-be")]
    SplittingBe,
    #[serde(rename = "splitting-CN", alias = "splitting-cn")]
    SplittingCn,
}

impl Scheme {
    pub fn theta(self) -> f64 {
        match self {
            Scheme::SplittingBe => 1.0,
            Scheme::SplittingCn => 0.5,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Splitting {
    #[default]
    Strang,
    Lie,
}

#[derive(Clone, Debug)]
pub struct SolverProblem {
    pub coefficients: CoefficientField,
    /// Phase-space grid; `t_min` is the initial time.
    pub grid: Grid,
    pub dt: f64,
    pub t_final: f64,
    pub initial: Vec<f64>,
    pub v_boundary: VBoundary,
    pub scheme: Scheme,
    pub splitting: Splitting,
    pub dt_max: Option<f64>,
    /// Record a trace row and a frame every this many steps.
    pub record_every: usize,
}

impl SolverProblem {
    pub fn new(coefficients: CoefficientField, grid: Grid, dt: f64, t_final: f64, initial: Vec<f64>) -> Self {
        Self {
            coefficients,
            grid,
            dt,
            t_final,
            initial,
            v_boundary: VBoundary::ZeroFlux,
            scheme: Scheme::SplittingCn,
            splitting: Splitting::Strang,
            dt_max: None,
            record_every: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        self.coefficients.validate()?;
        if self.coefficients.d != self.grid.d {
            return Err(Error::DimensionMismatch {
                expected: self.grid.d,
                got: self.coefficients.d,
            });
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {}", self.dt)));
        }
        if let Some(m) = self.dt_max {
            if self.dt > m {
                return Err(Error::InvalidParameter(format!("dt {} exceeds dt_max {m}", self.dt)));
            }
        }
        if !(self.t_final >= self.grid.t_min) {
            return Err(Error::InvalidParameter("t_final before the initial time".into()));
        }
        if self.record_every == 0 {
            return Err(Error::InvalidParameter("record_every must be at least 1".into()));
        }
        if self.initial.len() != self.grid.phase_len() {
            return Err(Error::DimensionMismatch {
                expected: self.grid.phase_len(),
                got: self.initial.len(),
            });
        }
        if let Some(index) = self.initial.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(())
    }

    /// Number of steps; the step is shrunk so that it divides the interval.
    pub fn n_steps(&self) -> usize {
        let span = self.t_final - self.grid.t_min;
        (span / self.dt - 1e-9).ceil().max(0.0) as usize
    }

    pub fn effective_dt(&self) -> f64 {
        let n = self.n_steps();
        if n == 0 {
            self.dt
        } else {
            (self.t_final - self.grid.t_min) / n as f64
        }
    }
}

/// Weighted integrals used for diagnostics.
#[derive(Clone, Debug)]
pub struct Quadrature {
    weights: Vec<f64>,
    cell: f64,
    sqrt_mu: Vec<f64>,
}

impl Quadrature {
    pub fn new(grid: &Grid) -> Self {
        Self {
            weights: grid.v_weights(),
            cell: grid.x_cell(),
            sqrt_mu: MaxwellianRef::new(grid.d).sqrt_mu_nodes(grid),
        }
    }

    /// `∫∫ g dx dv`.
    pub fn mass(&self, data: &[f64]) -> f64 {
        let per: Vec<f64> = data.chunks(self.weights.len()).map(|c| pairwise_dot(c, &self.weights)).collect();
        self.cell * crate::numerics::pairwise_sum(&per)
    }

    /// `∫∫ g·w(v) dx dv` for a velocity weight given at nodes.
    pub fn weighted_mass(&self, data: &[f64], w: &[f64]) -> f64 {
        let ww: Vec<f64> = self.weights.iter().zip(w).map(|(a, b)| a * b).collect();
        let per: Vec<f64> = data.chunks(ww.len()).map(|c| pairwise_dot(c, &ww)).collect();
        self.cell * crate::numerics::pairwise_sum(&per)
    }

    pub fn l2(&self, data: &[f64]) -> f64 {
        let per: Vec<f64> = data
            .chunks(self.weights.len())
            .map(|c| {
                let sq: Vec<f64> = c.iter().map(|x| x * x).collect();
                pairwise_dot(&sq, &self.weights)
            })
            .collect();
        (self.cell * crate::numerics::pairwise_sum(&per)).sqrt()
    }

    pub fn sqrt_mu(&self) -> &[f64] {
        &self.sqrt_mu
    }

    /// Extrema of `g/√μ`.
    pub fn ratio_extrema(&self, data: &[f64]) -> (f64, f64) {
        let n = self.sqrt_mu.len();
        data.iter()
            .enumerate()
            .map(|(i, g)| g / self.sqrt_mu[i % n])
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| (lo.min(r), hi.max(r)))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub step: usize,
    pub time: f64,
    pub mass: f64,
    pub l2_norm: f64,
    pub min_ratio: f64,
    pub max_ratio: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sobolev: Option<Vec<f64>>,
}

/// Per-step record of the velocity sub-step extrema and the `L²` norm
/// before and after the full step.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub velocity: VelocityStats,
    pub l2_before: f64,
    pub l2_after: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SolverTrace {
    pub rows: Vec<TraceRow>,
    pub steps: Vec<StepRecord>,
}

impl SolverTrace {
    pub fn to_csv(&self) -> String {
        let with_sob = self.rows.iter().find_map(|r| r.sobolev.as_ref().map(|s| s.len())).unwrap_or(0);
        let mut out = String::from("step,time,mass,l2,min_ratio,max_ratio");
        for i in 0..with_sob {
            out.push_str(&format!(",sobolev_{i}"));
        }
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!(
                "{},{:e},{:e},{:e},{:e},{:e}",
                r.step, r.time, r.mass, r.l2_norm, r.min_ratio, r.max_ratio
            ));
            if let Some(s) = &r.sobolev {
                for v in s {
                    out.push_str(&format!(",{v:e}"));
                }
            }
            out.push('\n');
        }
        out
    }

    /// Steps at which the velocity sub-step broke the discrete maximum
    /// principle by more than `tol`.
    pub fn max_principle_violations(&self, tol: f64) -> Vec<usize> {
        self.steps
            .iter()
            .enumerate()
            .filter(|(_, s)| {
                let v = s.velocity;
                v.min_after < v.min_before - tol || v.max_after > v.max_before + tol
            })
            .map(|(i, _)| i)
            .collect()
    }

    /// Steps at which the `L²` norm grew by more than `tol`.
    pub fn l2_violations(&self, tol: f64) -> Vec<usize> {
        self.steps
            .iter()
            .enumerate()
            .filter(|(_, s)| s.l2_after > s.l2_before + tol)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Reusable stepping machinery for one problem.
#[derive(Debug)]
pub struct Stepper<'a> {
    problem: &'a SolverProblem,
    transport: Transport,
    quad: Quadrature,
    count: usize,
}

impl<'a> Stepper<'a> {
    pub fn new(problem: &'a SolverProblem) -> Result<Self> {
        problem.validate()?;
        Ok(Self {
            problem,
            transport: Transport::new(&problem.grid),
            quad: Quadrature::new(&problem.grid),
            count: 0,
        })
    }

    pub fn quadrature(&self) -> &Quadrature {
        &self.quad
    }

    /// Advances `state` from `t` to `t + dt`.
    pub fn step(&mut self, state: &mut [f64], t: f64, dt: f64) -> Result<StepRecord> {
        let p = self.problem;
        let l2_before = self.quad.l2(state);
        let coeffs = &p.coefficients;
        let grid = &p.grid;
        let t_mid = t + 0.5 * dt;
        let flip = self.count % 2 == 1;
        let velocity = |state: &mut [f64]| {
            velocity::velocity_substep(grid, state, dt, p.scheme.theta(), p.v_boundary, flip, |ix, _| {
                coeffs.column_operator(grid, t_mid, ix)
            })
        };
        let stats = match p.splitting {
            Splitting::Strang => {
                self.transport.apply(state, 0.5 * dt);
                let s = velocity(state)?;
                self.transport.apply(state, 0.5 * dt);
                s
            }
            Splitting::Lie => {
                self.transport.apply(state, dt);
                velocity(state)?
            }
        };
        self.count += 1;
        Ok(StepRecord {
            velocity: stats,
            l2_before,
            l2_after: self.quad.l2(state),
        })
    }

    fn row(&self, step: usize, time: f64, data: &[f64]) -> TraceRow {
        let (min_ratio, max_ratio) = self.quad.ratio_extrema(data);
        TraceRow {
            step,
            time,
            mass: self.quad.mass(data),
            l2_norm: self.quad.l2(data),
            min_ratio,
            max_ratio,
            sobolev: None,
        }
    }
}

/// One step of `problem` from `(t, state)`.
pub fn step(problem: &SolverProblem, state: &[f64], t: f64) -> Result<Vec<f64>> {
    let mut stepper = Stepper::new(problem)?;
    let mut out = state.to_vec();
    if let Some(index) = out.iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFinite { index });
    }
    stepper.step(&mut out, t, problem.dt)?;
    Ok(out)
}

/// Runs the problem, calling `on_record(step, time, state)` at every
/// recorded step (including step 0 and the last step).
pub fn solve_with<F>(problem: &SolverProblem, mut on_record: F) -> Result<SolverTrace>
where
    F: FnMut(usize, f64, &[f64]) -> Result<()>,
{
    let mut stepper = Stepper::new(problem)?;
    let n = problem.n_steps();
    let dt = problem.effective_dt();
    let t0 = problem.grid.t_min;
    let mut state = problem.initial.clone();
    let mut trace = SolverTrace::default();
    trace.rows.push(stepper.row(0, t0, &state));
    on_record(0, t0, &state)?;
    for k in 0..n {
        let t = t0 + k as f64 * dt;
        let rec = stepper.step(&mut state, t, dt)?;
        if state.iter().any(|x| !x.is_finite()) {
            return Err(Error::NanDetected { step: k + 1 });
        }
        trace.steps.push(rec);
        if (k + 1) % problem.record_every == 0 || k + 1 == n {
            let time = t0 + (k + 1) as f64 * dt;
            trace.rows.push(stepper.row(k + 1, time, &state));
            on_record(k + 1, time, &state)?;
        }
    }
    Ok(trace)
}

/// Runs the problem and collects the recorded frames into a field with a
/// uniform time axis, so the step count must be a multiple of `record_every`.
pub fn solve(problem: &SolverProblem) -> Result<(Field, SolverTrace)> {
    problem.validate()?;
    let n = problem.n_steps();
    if n % problem.record_every != 0 {
        return Err(Error::InvalidParameter(format!(
            "{n} steps is not a multiple of record_every = {}",
            problem.record_every
        )));
    }
    let mut frames: Vec<Vec<f64>> = Vec::new();
    let trace = solve_with(problem, |_, _, s| {
        frames.push(s.to_vec());
        Ok(())
    })?;
    let grid = problem
        .grid
        .with_time(frames.len(), problem.grid.t_min, if n == 0 { problem.grid.t_min } else { problem.t_final })?;
    Ok((Field::from_frames(grid, &frames)?, trace))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x_independent(grid: &Grid, f: impl Fn(&[f64]) -> f64) -> Vec<f64> {
        (0..grid.phase_len()).map(|i| f(&grid.point(i).v)).collect()
    }

    #[test]
    fn heat_flow_matches_gaussian_widening() {
        let grid = Grid::phase(1, 4, 257, 0.0, 1.0, 8.0).unwrap();
        let init = x_independent(&grid, |v| (-v[0] * v[0] / 4.0).exp());
        let mut p = SolverProblem::new(CoefficientField::heat(1), grid.clone(), 0.01, 0.1, init);
        p.record_every = 10;
        let (field, _) = solve(&p).unwrap();
        let last = field.grid().nt - 1;
        for iv in 0..grid.nv {
            let v = grid.v(iv);
            let want = (-v * v / (4.0 * 1.1)).exp() / 1.1f64.sqrt();
            assert!((field.get(last, 0, iv) - want).abs() < 1e-4);
        }
    }

    #[test]
    fn backward_euler_keeps_positivity() {
        let grid = Grid::phase(1, 16, 33, 0.0, 2.0 * std::f64::consts::PI, 6.0).unwrap();
        let bump = x_independent(&grid, |v| if v[0].abs() < 1.0 { 1.0 } else { 0.0 });
        let drift = CoefficientField::heat(1).with_drift(vec![coef(|_, _, v| -0.5 * v[0])]);
        let mut p = SolverProblem::new(drift, grid.clone(), 0.05, 1.0, bump.clone());
        p.scheme = Scheme::SplittingBe;
        solve_with(&p, |_, _, s| {
            assert!(velocity::extrema(s).0 >= -1e-12);
            Ok(())
        })
        .unwrap();

        // With x-dependent drift the M-matrix property shows per velocity sub-step.
        let drift = CoefficientField::heat(1).with_drift(vec![coef(|_, x, v| x[0].sin() - 0.5 * v[0])]);
        let mut p = SolverProblem::new(drift, grid, 0.05, 1.0, bump);
        p.scheme = Scheme::SplittingBe;
        let (_, trace) = solve(&p).unwrap();
        assert!(trace.max_principle_violations(1e-12).is_empty());
        for s in &trace.steps {
            if s.velocity.min_before >= 0.0 {
                assert!(s.velocity.min_after >= -1e-12);
            }
        }
    }

    #[test]
    fn maxwellian_fixed_point_of_velocity_step() {
        let grid = Grid::phase(1, 4, 129, 0.0, 1.0, 8.0).unwrap();
        let mu = MaxwellianRef::new(1).mu_nodes(&grid);
        let coeffs = CoefficientField::heat(1)
            .with_drift(vec![coef(|_, _, v| v[0])])
            .with_c(constant(1.0));
        for ix in 0..grid.nx {
            let op = coeffs.column_operator(&grid, 0.0, ix);
            let mut col = mu.clone();
            velocity::step_column(&grid, &mut col, &op, 1e-2, 0.5, VBoundary::ZeroFlux, false).unwrap();
            for (a, b) in col.iter().zip(&mu) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_stays_zero() {
        let grid = Grid::phase(2, 8, 9, 0.0, 1.0, 3.0).unwrap();
        let p = SolverProblem::new(CoefficientField::heat(2), grid.clone(), 0.1, 0.5, vec![0.0; grid.phase_len()]);
        let (field, _) = solve(&p).unwrap();
        assert_eq!(field.max_abs(), 0.0);
        assert_eq!(field.grid().nt, 6);
    }

    #[test]
    fn mass_is_conserved_without_reaction() {
        for d in [1, 2] {
            let nv = if d == 1 { 33 } else { 17 };
            let grid = Grid::phase(d, 8, nv, 0.0, 2.0 * std::f64::consts::PI, 5.0).unwrap();
            let init: Vec<f64> = (0..grid.phase_len())
                .map(|i| {
                    let z = grid.point(i);
                    (1.0 + 0.5 * z.x[0].sin()) * (-z.v.iter().map(|v| v * v).sum::<f64>() / 2.0).exp()
                })
                .collect();
            let lambda = coef(|_, x: &[f64], _| 1.0 + 0.4 * x[0].cos());
            let mut p = SolverProblem::new(CoefficientField::isotropic(d, lambda), grid.clone(), 0.05, 0.5, init);
            p.scheme = Scheme::SplittingBe;
            let (_, trace) = solve(&p).unwrap();
            let m0 = trace.rows[0].mass;
            for r in &trace.rows {
                assert!((r.mass - m0).abs() < 1e-10 * m0.abs().max(1.0), "d={d}");
            }
            assert!(trace.l2_violations(1e-14).is_empty());
        }
    }

    #[test]
    fn nan_in_initial_data_is_rejected() {
        let grid = Grid::phase(1, 4, 9, 0.0, 1.0, 1.0).unwrap();
        let mut init = vec![0.0; grid.phase_len()];
        init[3] = f64::NAN;
        let p = SolverProblem::new(CoefficientField::heat(1), grid, 0.1, 0.2, init);
        assert!(matches!(solve(&p), Err(Error::NonFinite { index: 3 })));
    }

    #[test]
    fn blow_up_reports_step() {
        let grid = Grid::phase(1, 4, 9, 0.0, 1.0, 1.0).unwrap();
        let init = vec![1.0; grid.phase_len()];
        let coeffs = CoefficientField::heat(1).with_source(constant(1e308));
        let p = SolverProblem::new(coeffs, grid, 0.5, 3.0, init);
        let err = solve(&p).unwrap_err();
        assert!(matches!(err, Error::NanDetected { .. }), "{err:?}");
    }
}
