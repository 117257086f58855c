//! Exact free transport `∂_t g + v·∇_x g = 0` by Fourier phase shifts in `x`.

use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::fields::Grid;

#[derive(Clone)]
pub struct Transport {
    grid: Grid,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    /// Signed wavenumbers `2πm/L` in FFT order.
    k: Vec<f64>,
}

impl std::fmt::Debug for Transport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Transport").field("grid", &self.grid).finish()
    }
}

impl Transport {
    pub fn new(grid: &Grid) -> Self {
        let mut planner = FftPlanner::new();
        let n = grid.nx;
        let k = (0..n)
            .map(|m| {
                let s = if m <= n / 2 { m as i64 } else { m as i64 - n as i64 };
                2.0 * std::f64::consts::PI * s as f64 / grid.x_period
            })
            .collect();
        Self {
            grid: grid.clone(),
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
            k,
        }
    }

    /// Phase factor for mode `m` at velocity `v`. The Nyquist mode of an even
    /// grid is real, and multiplying it by `cos(kvΔt)` is the exact shift of
    /// the symmetric trigonometric interpolant.
    fn phase(&self, m: usize, v: f64, dt: f64) -> Complex64 {
        let n = self.grid.nx;
        let arg = self.k[m] * v * dt;
        if n % 2 == 0 && m == n / 2 {
            Complex64::new(arg.cos(), 0.0)
        } else {
            Complex64::new(arg.cos(), -arg.sin())
        }
    }

    /// Advects a phase-space slice in place by `dt` (negative `dt` runs backwards).
    pub fn apply(&self, data: &mut [f64], dt: f64) {
        let g = &self.grid;
        let n = g.nx;
        let nvt = g.nv_total();
        let mut buf = vec![Complex64::new(0.0, 0.0); g.nx_total()];
        let mut col = vec![Complex64::new(0.0, 0.0); n];
        for iv in 0..nvt {
            let v = g.v_coords(iv);
            for (ix, b) in buf.iter_mut().enumerate() {
                *b = Complex64::new(data[ix * nvt + iv], 0.0);
            }
            if g.d == 1 {
                self.fwd.process(&mut buf);
                for (m, b) in buf.iter_mut().enumerate() {
                    *b *= self.phase(m, v[0], dt);
                }
                self.inv.process(&mut buf);
            } else {
                // Rows are contiguous along x₂; columns along x₁.
                for row in buf.chunks_mut(n) {
                    self.fwd.process(row);
                }
                for j in 0..n {
                    for i in 0..n {
                        col[i] = buf[i * n + j];
                    }
                    self.fwd.process(&mut col);
                    for (i, c) in col.iter_mut().enumerate() {
                        *c *= self.phase(i, v[0], dt) * self.phase(j, v[1], dt);
                    }
                    self.inv.process(&mut col);
                    for i in 0..n {
                        buf[i * n + j] = col[i];
                    }
                }
                for row in buf.chunks_mut(n) {
                    self.inv.process(row);
                }
            }
            let scale = 1.0 / g.nx_total() as f64;
            for (ix, b) in buf.iter().enumerate() {
                data[ix * nvt + iv] = b.re * scale;
            }
        }
    }
}
