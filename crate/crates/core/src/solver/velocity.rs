//! Implicit velocity sub-step in flux form with exponential fitting.
//!
//! Along one velocity axis with nodes `v_k`, spacing `h` and control volumes
//! `w_k` (`h` inside, `h/2` at the two ends) the operator is
//!
//! ```text
//! (L g)_k = (F_{k+½} − F_{k−½}) / w_k + r_k g_k + s_k,
//! F_{k+½} = (a/h) [B(−ω) g_{k+1} − B(ω) g_k],   ω = β h / a,
//! ```
//!
//! with `B(z) = z/(eᶻ − 1)`, face diffusion `a`, face drift `β` and zero flux
//! through `±V`. The flux vanishes exactly on `g_{k+1}/g_k = e^{−ω}`, which
//! is the discrete Maxwellian when `β = a v_{k+½}`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::Grid;
use crate::numerics::{bernoulli, solve_tridiagonal};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VBoundary {
    ZeroFlux,
    DirichletZero,
}

/// Operator data for one spatial column, laid out like the velocity block.
///
/// `a_face[i][n]` and `b_face[i][n]` live on the face between node `n` and
/// its `+e_i` neighbour; entries on the last layer along `i` are ignored.
#[derive(Clone, Debug)]
pub struct ColumnOperator {
    pub a_face: Vec<Vec<f64>>,
    pub b_face: Vec<Vec<f64>>,
    pub remainder: Vec<f64>,
    pub source: Vec<f64>,
    /// `a₁₂` at nodes; the mixed term `2a₁₂∂²_{v₁v₂}` is treated explicitly.
    pub cross: Option<Vec<f64>>,
}

impl ColumnOperator {
    pub fn zeros(d: usize, nvt: usize) -> Self {
        Self {
            a_face: vec![vec![0.0; nvt]; d],
            b_face: vec![vec![0.0; nvt]; d],
            remainder: vec![0.0; nvt],
            source: vec![0.0; nvt],
            cross: None,
        }
    }

    /// Discrete divergence of the face drift, with zero drift assumed
    /// outside the box. Subtracting it from `c` gives a remainder with
    /// `L(1) = c` exactly.
    pub fn drift_divergence(&self, grid: &Grid) -> Vec<f64> {
        let nv = grid.nv;
        let h = grid.dv();
        let mut out = vec![0.0; grid.nv_total()];
        for (i, bf) in self.b_face.iter().enumerate() {
            let stride = axis_stride(grid, i);
            for (n, o) in out.iter_mut().enumerate() {
                let k = (n / stride) % nv;
                let w = if k == 0 || k + 1 == nv { 0.5 * h } else { h };
                let up = if k + 1 < nv { bf[n] } else { 0.0 };
                let down = if k > 0 { bf[n - stride] } else { 0.0 };
                *o += (up - down) / w;
            }
        }
        out
    }
}

pub(crate) fn axis_stride(grid: &Grid, axis: usize) -> usize {
    grid.nv.pow((grid.d - 1 - axis) as u32)
}

/// Extrema of a column set before and after a velocity sub-step.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VelocityStats {
    pub min_before: f64,
    pub max_before: f64,
    pub min_after: f64,
    pub max_after: f64,
}

struct LineWork {
    lower: Vec<f64>,
    diag: Vec<f64>,
    upper: Vec<f64>,
    rhs: Vec<f64>,
    scratch: Vec<f64>,
}

impl LineWork {
    fn new(n: usize) -> Self {
        Self {
            lower: vec![0.0; n],
            diag: vec![0.0; n],
            upper: vec![0.0; n],
            rhs: vec![0.0; n],
            scratch: Vec::with_capacity(n),
        }
    }
}

/// One θ-step along axis `axis` for every line of a column:
/// `(I − θτL) gⁿ⁺¹ = (I + (1−θ)τL) gⁿ + τ s`, with `L` carrying the given
/// fraction of the remainder and `s` the given source.
#[allow(clippy::too_many_arguments)]
fn sweep_axis(
    grid: &Grid,
    col: &mut [f64],
    op: &ColumnOperator,
    axis: usize,
    tau: f64,
    theta: f64,
    rem_frac: f64,
    source: &[f64],
    boundary: VBoundary,
    work: &mut LineWork,
) -> Result<()> {
    let nv = grid.nv;
    let h = grid.dv();
    let stride = axis_stride(grid, axis);
    let nvt = grid.nv_total();
    let af = &op.a_face[axis];
    let bf = &op.b_face[axis];
    for start in (0..nvt).filter(|n| (n / stride) % nv == 0) {
        let node = |k: usize| start + k * stride;
        let dirichlet_line = boundary == VBoundary::DirichletZero
            && (0..grid.d).any(|j| j != axis && {
                let kj = (start / axis_stride(grid, j)) % nv;
                kj == 0 || kj + 1 == nv
            });
        for k in 0..nv {
            let n = node(k);
            let w = if k == 0 || k + 1 == nv { 0.5 * h } else { h };
            // Operator row: lo·g_{k−1} + di·g_k + up·g_{k+1}.
            let (mut lo, mut di, mut up) = (0.0, rem_frac * op.remainder[n], 0.0);
            if k + 1 < nv {
                let a = af[n];
                let om = bf[n] * h / a;
                up += a / h * bernoulli(-om) / w;
                di -= a / h * bernoulli(om) / w;
            }
            if k > 0 {
                let m = node(k - 1);
                let a = af[m];
                let om = bf[m] * h / a;
                lo += a / h * bernoulli(om) / w;
                di -= a / h * bernoulli(-om) / w;
            }
            let g = col[n];
            let gl = if k > 0 { col[node(k - 1)] } else { 0.0 };
            let gu = if k + 1 < nv { col[node(k + 1)] } else { 0.0 };
            let explicit = lo * gl + di * g + up * gu;
            if dirichlet_line || (boundary == VBoundary::DirichletZero && (k == 0 || k + 1 == nv)) {
                work.lower[k] = 0.0;
                work.diag[k] = 1.0;
                work.upper[k] = 0.0;
                work.rhs[k] = 0.0;
                continue;
            }
            work.lower[k] = -theta * tau * lo;
            work.diag[k] = 1.0 - theta * tau * di;
            work.upper[k] = -theta * tau * up;
            work.rhs[k] = g + (1.0 - theta) * tau * explicit + tau * source[n];
            let margin = work.diag[k] - work.lower[k].abs() - work.upper[k].abs();
            if !(margin > 0.0) {
                return Err(Error::DiagonalDominance { row: k });
            }
        }
        let LineWork {
            lower,
            diag,
            upper,
            rhs,
            scratch,
        } = work;
        solve_tridiagonal(lower, diag, upper, rhs, scratch).map_err(|row| Error::DiagonalDominance { row })?;
        for (k, r) in rhs.iter().enumerate() {
            col[node(k)] = *r;
        }
    }
    Ok(())
}

/// Explicit mixed-derivative contribution `2a₁₂∂²_{v₁v₂}g` (zero on the box edge).
fn cross_term(grid: &Grid, col: &[f64], a12: &[f64]) -> Vec<f64> {
    let nv = grid.nv;
    let h = grid.dv();
    let mut out = vec![0.0; col.len()];
    for i in 1..nv - 1 {
        for j in 1..nv - 1 {
            let at = |p: usize, q: usize| col[p * nv + q];
            let mixed = (at(i + 1, j + 1) - at(i + 1, j - 1) - at(i - 1, j + 1) + at(i - 1, j - 1)) / (4.0 * h * h);
            out[i * nv + j] = 2.0 * a12[i * nv + j] * mixed;
        }
    }
    out
}

/// Advances one column by `dt`. In `d = 2` the axes are split: backward
/// Euler alternates the sweep order with `flip`, Crank–Nicolson uses the
/// symmetric sequence (½, 1, ½).
#[allow(clippy::too_many_arguments)]
pub(crate) fn step_column(
    grid: &Grid,
    col: &mut [f64],
    op: &ColumnOperator,
    dt: f64,
    theta: f64,
    boundary: VBoundary,
    flip: bool,
) -> Result<()> {
    let mut work = LineWork::new(grid.nv);
    if grid.d == 1 {
        return sweep_axis(grid, col, op, 0, dt, theta, 1.0, &op.source, boundary, &mut work);
    }
    let mut half_source: Vec<f64> = op.source.iter().map(|s| 0.5 * s).collect();
    if let Some(a12) = &op.cross {
        for (s, c) in half_source.iter_mut().zip(cross_term(grid, col, a12)) {
            *s += 0.5 * c;
        }
    }
    if theta == 1.0 {
        let order = if flip { [1, 0] } else { [0, 1] };
        for axis in order {
            sweep_axis(grid, col, op, axis, dt, theta, 0.5, &half_source, boundary, &mut work)?;
        }
    } else {
        sweep_axis(grid, col, op, 0, 0.5 * dt, theta, 0.5, &half_source, boundary, &mut work)?;
        sweep_axis(grid, col, op, 1, dt, theta, 0.5, &half_source, boundary, &mut work)?;
        sweep_axis(grid, col, op, 0, 0.5 * dt, theta, 0.5, &half_source, boundary, &mut work)?;
    }
    Ok(())
}

/// Runs the velocity sub-step on every spatial column in parallel.
/// `build(ix)` supplies the operator of column `ix`.
pub(crate) fn velocity_substep<F>(
    grid: &Grid,
    data: &mut [f64],
    dt: f64,
    theta: f64,
    boundary: VBoundary,
    flip: bool,
    build: F,
) -> Result<VelocityStats>
where
    F: Fn(usize, &[f64]) -> ColumnOperator + Sync,
{
    let nvt = grid.nv_total();
    let (min_before, max_before) = extrema(data);
    let results: Vec<Result<()>> = data
        .par_chunks_mut(nvt)
        .enumerate()
        .map(|(ix, col)| {
            let op = build(ix, col);
            step_column(grid, col, &op, dt, theta, boundary, flip)
        })
        .collect();
    results.into_iter().collect::<Result<Vec<()>>>()?;
    let (min_after, max_after) = extrema(data);
    Ok(VelocityStats {
        min_before,
        max_before,
        min_after,
        max_after,
    })
}

pub(crate) fn extrema(data: &[f64]) -> (f64, f64) {
    data.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)))
}
