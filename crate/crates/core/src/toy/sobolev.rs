//! `H^{k,k̄}_{x,v}` norms and the torus product inequality.

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::ToyState;
use crate::error::{Error, Result};
use crate::fields::Grid;
use crate::solver::Quadrature;

/// Orders of the mixed norm: pure `k`-th `x`-derivatives and pure `k̄`-th
/// `v`-derivatives on top of `L²`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SobolevOrder {
    pub k: usize,
    pub kbar: usize,
}

impl SobolevOrder {
    pub fn new(k: usize, kbar: usize) -> Self {
        Self { k, kbar }
    }

    /// The range used by the local well-posedness theory:
    /// `2 ≤ k̄ ≤ k` and `k > d/2`.
    pub fn is_well_posedness_order(&self, d: usize) -> bool {
        2 <= self.kbar && self.kbar <= self.k && 2 * self.k > d
    }
}

fn wavenumber(m: usize, n: usize, l: f64) -> f64 {
    let s = if m <= n / 2 { m as f64 } else { m as f64 - n as f64 };
    2.0 * std::f64::consts::PI * s / l
}

/// `∂^orders` of a function on the grid of `𝕋^d` (side `l`, `n` nodes per
/// axis) by Fourier multipliers. Odd derivatives drop the Nyquist mode.
pub(crate) fn torus_derivative(d: usize, n: usize, l: f64, data: &[f64], orders: &[usize]) -> Vec<f64> {
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let mut buf: Vec<Complex64> = data.iter().map(|x| Complex64::new(*x, 0.0)).collect();
    let mut line = vec![Complex64::new(0.0, 0.0); n];
    for (axis, &o) in orders.iter().enumerate().take(d) {
        if o == 0 {
            continue;
        }
        let stride = n.pow((d - 1 - axis) as u32);
        let total = n.pow(d as u32);
        for start in (0..total).filter(|i| (i / stride) % n == 0) {
            for (k, c) in line.iter_mut().enumerate() {
                *c = buf[start + k * stride];
            }
            fwd.process(&mut line);
            for (m, c) in line.iter_mut().enumerate() {
                if n % 2 == 0 && m == n / 2 && o % 2 == 1 {
                    *c = Complex64::new(0.0, 0.0);
                } else {
                    *c *= Complex64::new(0.0, wavenumber(m, n, l)).powu(o as u32);
                }
            }
            inv.process(&mut line);
            for (k, c) in line.iter().enumerate() {
                buf[start + k * stride] = *c / n as f64;
            }
        }
    }
    buf.iter().map(|c| c.re).collect()
}

/// Repeated fourth-order centered differences along velocity axis `axis`;
/// returns the derivative on the nodes at least `2·(applications)` away
/// from that axis' ends, together with the trapezoidal weights of that
/// reduced range (`0` elsewhere).
fn v_derivative(grid: &Grid, col: &[f64], axis: usize, order: usize) -> (Vec<f64>, Vec<f64>) {
    let nv = grid.nv;
    let h = grid.dv();
    let stride = crate::solver::velocity::axis_stride(grid, axis);
    let mut cur = col.to_vec();
    let mut lo = 0usize;
    let mut hi = nv - 1;
    let mut left = order;
    while left > 0 {
        let second = left >= 2;
        let mut next = vec![0.0; cur.len()];
        for (nidx, out) in next.iter_mut().enumerate() {
            let k = (nidx / stride) % nv;
            if k < lo + 2 || k + 2 > hi {
                continue;
            }
            let at = |o: isize| cur[(nidx as isize + o * stride as isize) as usize];
            *out = if second {
                (-at(-2) + 16.0 * at(-1) - 30.0 * at(0) + 16.0 * at(1) - at(2)) / (12.0 * h * h)
            } else {
                (at(-2) - 8.0 * at(-1) + 8.0 * at(1) - at(2)) / (12.0 * h)
            };
        }
        cur = next;
        lo += 2;
        hi -= 2;
        left -= if second { 2 } else { 1 };
    }
    let w1: Vec<f64> = (0..nv)
        .map(|k| {
            if k < lo || k > hi {
                0.0
            } else if k == lo || k == hi {
                0.5 * h
            } else {
                h
            }
        })
        .collect();
    let full = grid.v_weights_1d();
    let weights = (0..grid.nv_total())
        .map(|n| {
            let m = grid.unflatten(nv, n);
            (0..grid.d).map(|i| if i == axis { w1[m[i]] } else { full[m[i]] }).product()
        })
        .collect();
    (cur, weights)
}

/// `‖g‖²_{H^{k,k̄}} = ‖g‖²_{L²} + Σ_i ‖∂^k_{x_i} g‖² + Σ_i ‖∂^{k̄}_{v_i} g‖²`.
pub fn sobolev_norm(state: &ToyState, order: SobolevOrder) -> Result<f64> {
    let grid = &state.grid;
    if grid.nx < 2 * order.k + 2 {
        return Err(Error::UnderResolved(format!(
            "nx = {} cannot carry order-{} x-derivatives (need {})",
            grid.nx,
            order.k,
            2 * order.k + 2
        )));
    }
    let v_needed = (4 * order.kbar + 1).max(order.kbar + 2);
    if grid.nv < v_needed {
        return Err(Error::UnderResolved(format!(
            "nv = {} cannot carry order-{} v-derivatives (need {v_needed})",
            grid.nv, order.kbar
        )));
    }
    let quad = Quadrature::new(grid);
    let mut total = quad.l2(&state.g).powi(2);
    let nxt = grid.nx_total();
    let nvt = grid.nv_total();
    let cell = grid.x_cell();
    if order.k > 0 {
        for i in 0..grid.d {
            let mut orders = vec![0; grid.d];
            orders[i] = order.k;
            let mut deriv = vec![0.0; state.g.len()];
            let mut xs = vec![0.0; nxt];
            for iv in 0..nvt {
                for (ix, x) in xs.iter_mut().enumerate() {
                    *x = state.g[ix * nvt + iv];
                }
                let dx = torus_derivative(grid.d, grid.nx, grid.x_period, &xs, &orders);
                for (ix, x) in dx.into_iter().enumerate() {
                    deriv[ix * nvt + iv] = x;
                }
            }
            total += quad.l2(&deriv).powi(2);
        }
    }
    if order.kbar > 0 {
        for i in 0..grid.d {
            let mut acc = 0.0;
            for col in state.g.chunks(nvt) {
                let (dv, w) = v_derivative(grid, col, i, order.kbar);
                acc += dv.iter().zip(&w).map(|(a, b)| a * a * b).sum::<f64>();
            }
            total += cell * acc;
        }
    }
    Ok(total.sqrt())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NashReport {
    pub k: usize,
    pub m_bar: Vec<usize>,
    pub m: Vec<usize>,
    /// `‖∂^m̄ g₁ ∂^m g₂‖_{L²}`.
    pub lhs: f64,
    /// `‖g₁‖_∞ ‖g₂‖_{H^k}`.
    pub first: f64,
    /// `‖g₁‖_{H^k} ‖g₂‖_∞`.
    pub second: f64,
    /// Smallest `C` with `lhs ≤ C (first + second)`; `0` when both vanish.
    pub constant: f64,
    /// For `m̄ ≠ 0`: `(ε, C_ε)` with the smallest `C_ε` such that
    /// `lhs ≤ ε·first + C_ε·second`, or `None` when no finite one exists.
    pub eps_constants: Vec<(f64, Option<f64>)>,
}

/// Both sides of the product inequality on `𝕋^d` for functions given on
/// the spatial nodes of `grid`.
pub fn nash_product_check(
    grid: &Grid,
    g1: &[f64],
    g2: &[f64],
    k: usize,
    m_bar: &[usize],
    m: &[usize],
) -> Result<NashReport> {
    let d = grid.d;
    let n = grid.nx_total();
    if g1.len() != n || g2.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: g1.len().min(g2.len()),
        });
    }
    if m_bar.len() != d || m.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: m_bar.len().min(m.len()),
        });
    }
    let order: usize = m_bar.iter().chain(m).sum();
    if order != k || 2 * k <= d {
        return Err(Error::InvalidParameter(format!(
            "need |m̄| + |m| = k and k > d/2, got |m̄| + |m| = {order}, k = {k}, d = {d}"
        )));
    }
    let cell = grid.x_cell();
    let l2 = |h: &[f64]| (cell * h.iter().map(|x| x * x).sum::<f64>()).sqrt();
    let sup = |h: &[f64]| h.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let hk = |h: &[f64]| {
        let mut s = l2(h).powi(2);
        for i in 0..d {
            let mut o = vec![0; d];
            o[i] = k;
            s += l2(&torus_derivative(d, grid.nx, grid.x_period, h, &o)).powi(2);
        }
        s.sqrt()
    };
    let a = torus_derivative(d, grid.nx, grid.x_period, g1, m_bar);
    let b = torus_derivative(d, grid.nx, grid.x_period, g2, m);
    let prod: Vec<f64> = a.iter().zip(&b).map(|(p, q)| p * q).collect();
    let lhs = l2(&prod);
    let first = sup(g1) * hk(g2);
    let second = hk(g1) * sup(g2);
    let constant = if first + second > 0.0 { lhs / (first + second) } else { 0.0 };
    let eps_constants = if m_bar.iter().any(|&x| x > 0) {
        [0.5, 0.1]
            .iter()
            .map(|&eps| {
                let rest = (lhs - eps * first).max(0.0);
                let c = if rest == 0.0 {
                    Some(0.0)
                } else if second > 0.0 {
                    Some(rest / second)
                } else {
                    None
                };
                (eps, c)
            })
            .collect()
    } else {
        Vec::new()
    };
    Ok(NashReport {
        k,
        m_bar: m_bar.to_vec(),
        m: m.to_vec(),
        lhs,
        first,
        second,
        constant,
        eps_constants,
    })
}
