//! Uniformly gridded scalar functions on `[t_min, t_max] × 𝕋^d × [−V, V]^d`.
//!
//! Storage is row-major `[t][x][v]` so every per-`(t, x)` velocity slice is
//! contiguous. The `x` axis is periodic (no duplicated endpoint), the `v`
//! axis includes both endpoints.

mod io;

pub use io::{read_field, read_field_from, write_csv_slice, write_field, write_field_to};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Coords, KineticPoint};
use crate::numerics::pairwise_dot;

/// Default velocity truncation; `μ(8) < 1.3e−14`.
pub const DEFAULT_V_MAX: f64 = 8.0;
/// Default torus side.
pub const DEFAULT_X_PERIOD: f64 = 2.0 * std::f64::consts::PI;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub d: usize,
    pub nt: usize,
    pub nx: usize,
    pub nv: usize,
    pub t_min: f64,
    pub t_max: f64,
    pub x_period: f64,
    pub v_max: f64,
}

impl Grid {
    pub fn new(
        d: usize,
        (nt, nx, nv): (usize, usize, usize),
        (t_min, t_max): (f64, f64),
        x_period: f64,
        v_max: f64,
    ) -> Result<Self> {
        let g = Self {
            d,
            nt,
            nx,
            nv,
            t_min,
            t_max,
            x_period,
            v_max,
        };
        g.validate()?;
        Ok(g)
    }

    /// A single-time phase-space grid at time `t`.
    pub fn phase(d: usize, nx: usize, nv: usize, t: f64, x_period: f64, v_max: f64) -> Result<Self> {
        Self::new(d, (1, nx, nv), (t, t), x_period, v_max)
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=2).contains(&self.d) {
            return Err(Error::InvalidGrid(format!(
                "dimension must be 1 or 2, got {}",
                self.d
            )));
        }
        if self.nt < 1 {
            return Err(Error::InvalidGrid("nt must be at least 1".into()));
        }
        if self.nx < 4 || self.nv < 4 {
            return Err(Error::InvalidGrid(format!(
                "nx and nv must be at least 4 (nx={}, nv={})",
                self.nx, self.nv
            )));
        }
        let finite = [self.t_min, self.t_max, self.x_period, self.v_max]
            .iter()
            .all(|c| c.is_finite());
        if !finite {
            return Err(Error::InvalidGrid("non-finite extent".into()));
        }
        if self.nt > 1 && !(self.t_max > self.t_min) {
            return Err(Error::InvalidGrid("t_max must exceed t_min".into()));
        }
        if !(self.x_period > 0.0) || !(self.v_max > 0.0) {
            return Err(Error::InvalidGrid("x_period and v_max must be positive".into()));
        }
        Ok(())
    }

    pub fn dt(&self) -> f64 {
        if self.nt > 1 {
            (self.t_max - self.t_min) / (self.nt - 1) as f64
        } else {
            0.0
        }
    }

    pub fn dx(&self) -> f64 {
        self.x_period / self.nx as f64
    }

    pub fn dv(&self) -> f64 {
        2.0 * self.v_max / (self.nv - 1) as f64
    }

    pub fn t(&self, it: usize) -> f64 {
        if it + 1 == self.nt {
            self.t_max.max(self.t_min)
        } else {
            self.t_min + it as f64 * self.dt()
        }
    }

    pub fn x(&self, j: usize) -> f64 {
        j as f64 * self.dx()
    }

    pub fn v(&self, k: usize) -> f64 {
        if k + 1 == self.nv {
            self.v_max
        } else {
            -self.v_max + k as f64 * self.dv()
        }
    }

    /// Number of spatial nodes, `nx^d`.
    pub fn nx_total(&self) -> usize {
        self.nx.pow(self.d as u32)
    }

    /// Number of velocity nodes, `nv^d`.
    pub fn nv_total(&self) -> usize {
        self.nv.pow(self.d as u32)
    }

    pub fn phase_len(&self) -> usize {
        self.nx_total() * self.nv_total()
    }

    pub fn len(&self) -> usize {
        self.nt * self.phase_len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, it: usize, ix: usize, iv: usize) -> usize {
        (it * self.nx_total() + ix) * self.nv_total() + iv
    }

    /// `(it, ix, iv)` of a flat index.
    pub fn split(&self, flat: usize) -> (usize, usize, usize) {
        let nv = self.nv_total();
        let nx = self.nx_total();
        (flat / (nx * nv), (flat / nv) % nx, flat % nv)
    }

    /// Per-axis indices of a flattened spatial or velocity multi-index.
    pub fn unflatten(&self, n_axis: usize, flat: usize) -> [usize; 2] {
        if self.d == 1 {
            [flat, 0]
        } else {
            [flat / n_axis, flat % n_axis]
        }
    }

    pub fn flatten(&self, n_axis: usize, idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, &i| acc * n_axis + i)
    }

    pub fn x_coords(&self, ix: usize) -> Coords {
        let m = self.unflatten(self.nx, ix);
        (0..self.d).map(|i| self.x(m[i])).collect()
    }

    pub fn v_coords(&self, iv: usize) -> Coords {
        let m = self.unflatten(self.nv, iv);
        (0..self.d).map(|i| self.v(m[i])).collect()
    }

    pub fn point(&self, flat: usize) -> KineticPoint {
        let (it, ix, iv) = self.split(flat);
        KineticPoint {
            t: self.t(it),
            x: self.x_coords(ix),
            v: self.v_coords(iv),
        }
    }

    /// Trapezoidal weights of one velocity axis.
    pub fn v_weights_1d(&self) -> Vec<f64> {
        let h = self.dv();
        (0..self.nv)
            .map(|k| if k == 0 || k + 1 == self.nv { 0.5 * h } else { h })
            .collect()
    }

    /// Tensor trapezoidal weights over the full velocity block.
    pub fn v_weights(&self) -> Vec<f64> {
        let w1 = self.v_weights_1d();
        (0..self.nv_total())
            .map(|iv| {
                let m = self.unflatten(self.nv, iv);
                (0..self.d).map(|i| w1[m[i]]).product()
            })
            .collect()
    }

    /// Cell volume of the spatial grid.
    pub fn x_cell(&self) -> f64 {
        self.dx().powi(self.d as i32)
    }

    pub fn with_time(&self, nt: usize, t_min: f64, t_max: f64) -> Result<Self> {
        Self::new(
            self.d,
            (nt, self.nx, self.nv),
            (t_min, t_max),
            self.x_period,
            self.v_max,
        )
    }

    /// Same layout and spacing check used before combining two fields.
    pub fn ensure_same(&self, other: &Grid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!("{self:?} vs {other:?}")))
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    grid: Grid,
    data: Vec<f64>,
}

impl Field {
    pub fn new(grid: Grid, data: Vec<f64>) -> Result<Self> {
        grid.validate()?;
        if data.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "data length {} does not match grid size {}",
                data.len(),
                grid.len()
            )));
        }
        if let Some(index) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { grid, data })
    }

    pub fn zeros(grid: Grid) -> Self {
        let n = grid.len();
        Self {
            grid,
            data: vec![0.0; n],
        }
    }

    /// Pointwise evaluation of `f` on every grid node.
    pub fn sample<F>(grid: &Grid, f: F) -> Result<Self>
    where
        F: Fn(&KineticPoint) -> f64 + Sync,
    {
        grid.validate()?;
        let data: Vec<f64> = (0..grid.len())
            .into_par_iter()
            .map(|i| f(&grid.point(i)))
            .collect();
        Self::new(grid.clone(), data)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn get(&self, it: usize, ix: usize, iv: usize) -> f64 {
        self.data[self.grid.index(it, ix, iv)]
    }

    /// Phase-space slice at time index `it`.
    pub fn slice(&self, it: usize) -> &[f64] {
        let n = self.grid.phase_len();
        &self.data[it * n..(it + 1) * n]
    }

    /// Single-time field at time index `it`.
    pub fn frame(&self, it: usize) -> Field {
        let t = self.grid.t(it);
        Field {
            grid: Grid {
                nt: 1,
                t_min: t,
                t_max: t,
                ..self.grid.clone()
            },
            data: self.slice(it).to_vec(),
        }
    }

    /// Stacks phase slices on a uniform time axis.
    pub fn from_frames(grid: Grid, frames: &[Vec<f64>]) -> Result<Self> {
        if frames.len() != grid.nt {
            return Err(Error::GridMismatch(format!(
                "{} frames for nt = {}",
                frames.len(),
                grid.nt
            )));
        }
        let data = frames.concat();
        Self::new(grid, data)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Field> {
        Field::new(self.grid.clone(), self.data.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_map(&self, other: &Field, f: impl Fn(f64, f64) -> f64) -> Result<Field> {
        self.grid.ensure_same(&other.grid)?;
        Field::new(
            self.grid.clone(),
            self.data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        )
    }

    /// Multilinear interpolation; periodic in `x`, `None` outside the `t` or `v` range.
    pub fn interpolate(&self, z: &KineticPoint) -> Option<f64> {
        let g = &self.grid;
        let d = g.d;
        if z.dim() != d {
            return None;
        }
        let tol = 1e-12;
        // (lower index, weight of upper node) per axis; t first.
        let (it0, wt) = if g.nt == 1 {
            if (z.t - g.t_min).abs() > tol * (1.0 + z.t.abs()) {
                return None;
            }
            (0, 0.0)
        } else {
            let s = (z.t - g.t_min) / g.dt();
            if s < -tol || s > (g.nt - 1) as f64 + tol {
                return None;
            }
            let i = (s.floor().max(0.0) as usize).min(g.nt - 2);
            (i, (s - i as f64).clamp(0.0, 1.0))
        };
        let mut xs = [(0usize, 0usize, 0.0f64); 2];
        for i in 0..d {
            let s = (z.x[i] / g.dx()).rem_euclid(g.nx as f64);
            let lo = (s.floor() as usize) % g.nx;
            xs[i] = (lo, (lo + 1) % g.nx, s - s.floor());
        }
        let mut vs = [(0usize, 0.0f64); 2];
        for i in 0..d {
            let s = (z.v[i] + g.v_max) / g.dv();
            if s < -tol || s > (g.nv - 1) as f64 + tol {
                return None;
            }
            let lo = (s.floor().max(0.0) as usize).min(g.nv - 2);
            vs[i] = (lo, (s - lo as f64).clamp(0.0, 1.0));
        }
        let corners = 1usize << (1 + 2 * d);
        let mut acc = 0.0;
        for c in 0..corners {
            let mut w = 1.0;
            let bt = c & 1;
            let it = it0 + bt;
            if g.nt == 1 && bt == 1 {
                continue;
            }
            w *= if bt == 1 { wt } else { 1.0 - wt };
            let mut xm = [0usize; 2];
            let mut vm = [0usize; 2];
            for i in 0..d {
                let bx = (c >> (1 + i)) & 1;
                xm[i] = if bx == 1 { xs[i].1 } else { xs[i].0 };
                w *= if bx == 1 { xs[i].2 } else { 1.0 - xs[i].2 };
                let bv = (c >> (1 + d + i)) & 1;
                vm[i] = vs[i].0 + bv;
                w *= if bv == 1 { vs[i].1 } else { 1.0 - vs[i].1 };
            }
            if w == 0.0 {
                continue;
            }
            let ix = g.flatten(g.nx, &xm[..d]);
            let iv = g.flatten(g.nv, &vm[..d]);
            acc += w * self.get(it, ix, iv);
        }
        Some(acc)
    }
}

/// A function of `(t, x)` on the time and space axes of a [`Grid`], e.g. `ρ[f]`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpatialField {
    pub grid: Grid,
    pub data: Vec<f64>,
}

impl SpatialField {
    pub fn get(&self, it: usize, ix: usize) -> f64 {
        self.data[it * self.grid.nx_total() + ix]
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Unit Maxwellian `μ(v) = (2π)^{−d/2} e^{−|v|²/2}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaxwellianRef {
    pub d: usize,
}

impl MaxwellianRef {
    pub fn new(d: usize) -> Self {
        Self { d }
    }

    pub fn mu(&self, v: &[f64]) -> f64 {
        let v2: f64 = v.iter().map(|c| c * c).sum();
        (2.0 * std::f64::consts::PI).powf(-(self.d as f64) / 2.0) * (-0.5 * v2).exp()
    }

    pub fn sqrt_mu(&self, v: &[f64]) -> f64 {
        let v2: f64 = v.iter().map(|c| c * c).sum();
        (2.0 * std::f64::consts::PI).powf(-(self.d as f64) / 4.0) * (-0.25 * v2).exp()
    }

    /// `√μ` on every velocity node of `grid`.
    pub fn sqrt_mu_nodes(&self, grid: &Grid) -> Vec<f64> {
        (0..grid.nv_total())
            .map(|iv| self.sqrt_mu(&grid.v_coords(iv)))
            .collect()
    }

    pub fn mu_nodes(&self, grid: &Grid) -> Vec<f64> {
        (0..grid.nv_total())
            .map(|iv| self.mu(&grid.v_coords(iv)))
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Derivative {
    T,
    X(usize),
    V(usize),
    VV(usize, usize),
    /// `∂_t + v·∇_x`
    Transport,
}

#[derive(Clone, Copy)]
enum Axis {
    T,
    X(usize),
    V(usize),
}

struct AxisLayout {
    n: usize,
    stride: usize,
    h: f64,
    periodic: bool,
}

fn layout(grid: &Grid, axis: Axis) -> AxisLayout {
    let nvt = grid.nv_total();
    match axis {
        Axis::T => AxisLayout {
            n: grid.nt,
            stride: grid.nx_total() * nvt,
            h: grid.dt(),
            periodic: false,
        },
        Axis::X(i) => AxisLayout {
            n: grid.nx,
            stride: nvt * grid.nx.pow((grid.d - 1 - i) as u32),
            h: grid.dx(),
            periodic: true,
        },
        Axis::V(i) => AxisLayout {
            n: grid.nv,
            stride: grid.nv.pow((grid.d - 1 - i) as u32),
            h: grid.dv(),
            periodic: false,
        },
    }
}

/// First (`order = 1`) or second (`order = 2`) derivative along one axis.
/// Centered in the interior, one-sided second order at non-periodic ends.
fn axis_derivative(grid: &Grid, data: &[f64], axis: Axis, order: u8) -> Result<Vec<f64>> {
    let AxisLayout {
        n,
        stride,
        h,
        periodic,
    } = layout(grid, axis);
    let name = match axis {
        Axis::T => "t",
        Axis::X(_) => "x",
        Axis::V(_) => "v",
    };
    if n < 4 {
        return Err(Error::GridTooSmall {
            axis: name,
            needed: 4,
            have: n,
        });
    }
    let block = n * stride;
    let mut out = vec![0.0; data.len()];
    out.par_chunks_mut(block)
        .zip(data.par_chunks(block))
        .for_each(|(o, f)| {
            for inner in 0..stride {
                let at = |p: usize| f[p * stride + inner];
                for p in 0..n {
                    let val = if periodic {
                        let pm = at((p + n - 1) % n);
                        let pp = at((p + 1) % n);
                        if order == 1 {
                            (pp - pm) / (2.0 * h)
                        } else {
                            (pp - 2.0 * at(p) + pm) / (h * h)
                        }
                    } else if p == 0 {
                        if order == 1 {
                            (-3.0 * at(0) + 4.0 * at(1) - at(2)) / (2.0 * h)
                        } else {
                            (2.0 * at(0) - 5.0 * at(1) + 4.0 * at(2) - at(3)) / (h * h)
                        }
                    } else if p == n - 1 {
                        if order == 1 {
                            (3.0 * at(n - 1) - 4.0 * at(n - 2) + at(n - 3)) / (2.0 * h)
                        } else {
                            (2.0 * at(n - 1) - 5.0 * at(n - 2) + 4.0 * at(n - 3) - at(n - 4))
                                / (h * h)
                        }
                    } else if order == 1 {
                        (at(p + 1) - at(p - 1)) / (2.0 * h)
                    } else {
                        (at(p + 1) - 2.0 * at(p) + at(p - 1)) / (h * h)
                    };
                    o[p * stride + inner] = val;
                }
            }
        });
    Ok(out)
}

/// Second-order finite differences of `field`.
pub fn finite_difference(field: &Field, which: Derivative) -> Result<Field> {
    let grid = field.grid();
    let d = grid.d;
    let check = |i: usize| {
        if i < d {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: d,
                got: i + 1,
            })
        }
    };
    let data = match which {
        Derivative::T => axis_derivative(grid, field.data(), Axis::T, 1)?,
        Derivative::X(i) => {
            check(i)?;
            axis_derivative(grid, field.data(), Axis::X(i), 1)?
        }
        Derivative::V(i) => {
            check(i)?;
            axis_derivative(grid, field.data(), Axis::V(i), 1)?
        }
        Derivative::VV(i, j) => {
            check(i)?;
            check(j)?;
            if i == j {
                axis_derivative(grid, field.data(), Axis::V(i), 2)?
            } else {
                let first = axis_derivative(grid, field.data(), Axis::V(i), 1)?;
                axis_derivative(grid, &first, Axis::V(j), 1)?
            }
        }
        Derivative::Transport => {
            let mut acc = axis_derivative(grid, field.data(), Axis::T, 1)?;
            for i in 0..d {
                let dx = axis_derivative(grid, field.data(), Axis::X(i), 1)?;
                let nvt = grid.nv_total();
                acc.par_iter_mut().enumerate().for_each(|(flat, a)| {
                    let iv = flat % nvt;
                    let m = grid.unflatten(grid.nv, iv);
                    *a += grid.v(m[i]) * dx[flat];
                });
            }
            acc
        }
    };
    Field::new(grid.clone(), data)
}

/// `Δ_v` of a field.
pub fn velocity_laplacian(field: &Field) -> Result<Field> {
    let grid = field.grid();
    let mut acc = axis_derivative(grid, field.data(), Axis::V(0), 2)?;
    for i in 1..grid.d {
        let more = axis_derivative(grid, field.data(), Axis::V(i), 2)?;
        acc.iter_mut().zip(more).for_each(|(a, b)| *a += b);
    }
    Field::new(grid.clone(), acc)
}

/// Trapezoidal rule over the velocity block with a weight `w(v)`.
///
/// Trapezoidal weights are shared with the solver's conservative velocity
/// discretization, so integrals of solver states are exactly the discrete
/// conserved quantities.
pub fn quadrature_v<W>(field: &Field, weight: W) -> SpatialField
where
    W: Fn(&[f64]) -> f64,
{
    let grid = field.grid();
    let nvt = grid.nv_total();
    let wts: Vec<f64> = grid
        .v_weights()
        .iter()
        .enumerate()
        .map(|(iv, w)| w * weight(&grid.v_coords(iv)))
        .collect();
    let data = field
        .data()
        .par_chunks(nvt)
        .map(|col| pairwise_dot(col, &wts))
        .collect();
    SpatialField {
        grid: grid.clone(),
        data,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid1(nt: usize, nx: usize, nv: usize, v_max: f64) -> Grid {
        Grid::new(1, (nt, nx, nv), (0.0, 1.0), 2.0 * PI, v_max).unwrap()
    }

    #[test]
    fn grid_validation() {
        assert!(Grid::new(3, (1, 8, 8), (0.0, 0.0), 1.0, 1.0).is_err());
        assert!(Grid::new(1, (1, 3, 8), (0.0, 0.0), 1.0, 1.0).is_err());
        assert!(Grid::new(1, (2, 8, 8), (1.0, 1.0), 1.0, 1.0).is_err());
        let g = grid1(3, 8, 9, 2.0);
        assert_eq!(g.len(), 3 * 8 * 9);
        assert_eq!(g.v(0), -2.0);
        assert_eq!(g.v(8), 2.0);
        assert_eq!(g.v(4), 0.0);
        let g2 = Grid::new(2, (2, 4, 5), (0.0, 1.0), 1.0, 1.0).unwrap();
        let flat = g2.index(1, 2 * 4 + 3, 4 * 5 + 1);
        let z = g2.point(flat);
        assert_eq!(z.t, 1.0);
        assert_eq!(z.x.as_slice(), &[0.5, 0.75]);
        assert_eq!(z.v.as_slice(), &[1.0, -0.5]);
    }

    #[test]
    fn sample_examples() {
        let g = grid1(1, 8, 17, 8.0);
        assert_eq!(Field::sample(&g, |_| 0.0).unwrap().max_abs(), 0.0);
        let m = MaxwellianRef::new(1);
        let f = Field::sample(&g, |z| m.sqrt_mu(&z.v)).unwrap();
        let at0 = f.get(0, 0, 8);
        assert!((at0 - (2.0 * PI).powf(-0.25)).abs() < 1e-15);
        assert!((at0 - 0.63162).abs() < 1e-5);
        let err = Field::sample(&g, |z| if z.v[0] > 7.0 { f64::NAN } else { 1.0 }).unwrap_err();
        assert!(matches!(err, Error::NonFinite { index: 16 }));
    }

    #[test]
    fn maxwellian_mass_on_256_nodes() {
        let g = grid1(1, 4, 256, 8.0);
        let m = MaxwellianRef::new(1);
        let f = Field::sample(&g, |z| m.mu(&z.v)).unwrap();
        let rho = quadrature_v(&f, |_| 1.0);
        for r in &rho.data {
            assert!((r - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn derivative_of_constant_vanishes() {
        let g = grid1(5, 8, 9, 2.0);
        let f = Field::sample(&g, |_| 3.5).unwrap();
        for which in [
            Derivative::T,
            Derivative::X(0),
            Derivative::V(0),
            Derivative::VV(0, 0),
            Derivative::Transport,
        ] {
            assert!(finite_difference(&f, which).unwrap().max_abs() < 1e-12);
        }
    }

    #[test]
    fn stencils_exact_on_quadratics() {
        let g = grid1(6, 8, 11, 2.0);
        let f = Field::sample(&g, |z| z.v[0] * z.v[0]).unwrap();
        let dvv = finite_difference(&f, Derivative::VV(0, 0)).unwrap();
        assert!(dvv.data().iter().all(|v| (v - 2.0).abs() < 1e-12));
        let dv = finite_difference(&f, Derivative::V(0)).unwrap();
        for (i, v) in dv.data().iter().enumerate() {
            let z = g.point(i);
            assert!((v - 2.0 * z.v[0]).abs() < 1e-12);
        }
        let ft = Field::sample(&g, |z| z.t * z.t + z.t).unwrap();
        let dt = finite_difference(&ft, Derivative::T).unwrap();
        for (i, v) in dt.data().iter().enumerate() {
            let z = g.point(i);
            assert!((v - (2.0 * z.t + 1.0)).abs() < 1e-11);
        }
    }

    #[test]
    fn x_derivative_of_sine_is_second_order() {
        let l = 2.0 * PI;
        let err = |nx: usize| {
            let g = Grid::new(1, (1, nx, 4), (0.0, 0.0), l, 1.0).unwrap();
            let f = Field::sample(&g, |z| (2.0 * PI * z.x[0] / l).sin()).unwrap();
            let d = finite_difference(&f, Derivative::X(0)).unwrap();
            (d.get(0, 0, 0) - 2.0 * PI / l).abs()
        };
        let (e1, e2) = (err(16), err(32));
        assert!(e1 < 0.03);
        let order = (e1 / e2).log2();
        assert!((order - 2.0).abs() < 0.05, "{order}");
    }

    #[test]
    fn grid_too_small_for_time_derivative() {
        let g = grid1(1, 8, 8, 1.0);
        let f = Field::zeros(g);
        assert!(matches!(
            finite_difference(&f, Derivative::T),
            Err(Error::GridTooSmall { axis: "t", .. })
        ));
    }

    #[test]
    fn quadrature_examples() {
        let g = grid1(1, 4, 129, 8.0);
        let m = MaxwellianRef::new(1);
        let f = Field::sample(&g, |z| m.sqrt_mu(&z.v)).unwrap();
        let r = quadrature_v(&f, |v| m.sqrt_mu(v));
        assert!((r.data[0] - 1.0).abs() < 1e-8);
        let f2 = Field::sample(&g, |z| z.v[0] * z.v[0] * m.sqrt_mu(&z.v)).unwrap();
        let r2 = quadrature_v(&f2, |v| m.sqrt_mu(v));
        assert!((r2.data[0] - 1.0).abs() < 1e-8);
        let z = quadrature_v(&Field::zeros(g), |v| m.sqrt_mu(v));
        assert!(z.data.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn quadrature_converges_at_second_order() {
        // On a short box the integrand does not decay, so the trapezoidal
        // rule shows its generic h² behaviour.
        let exact = {
            // ∫_{-2}^{2} v² e^{-v²/2} dv = √(2π)·erf(√2) − 4e^{−2}, via fine Simpson.
            let n = 200_000;
            let h = 4.0 / n as f64;
            let f = |v: f64| v * v * (-0.5 * v * v).exp();
            let mut s = f(-2.0) + f(2.0);
            for k in 1..n {
                let v = -2.0 + k as f64 * h;
                s += if k % 2 == 1 { 4.0 } else { 2.0 } * f(v);
            }
            s * h / 3.0
        };
        let errs: Vec<f64> = [17, 33, 65]
            .iter()
            .map(|&nv| {
                let g = Grid::new(1, (1, 4, nv), (0.0, 0.0), 1.0, 2.0).unwrap();
                let f = Field::sample(&g, |z| z.v[0] * z.v[0] * (-0.5 * z.v[0] * z.v[0]).exp())
                    .unwrap();
                (quadrature_v(&f, |_| 1.0).data[0] - exact).abs()
            })
            .collect();
        for w in errs.windows(2) {
            assert!((w[0] / w[1]).log2() >= 1.9, "{errs:?}");
        }
    }

    #[test]
    fn x_derivative_commutes_with_periodic_shift() {
        let g = Grid::new(1, (1, 16, 5), (0.0, 0.0), 2.0 * PI, 1.0).unwrap();
        let f = Field::sample(&g, |z| (z.x[0]).sin() * (1.0 + z.v[0]) + (3.0 * z.x[0]).cos()).unwrap();
        let shift = 5;
        let shifted = |fl: &Field| {
            let mut out = vec![0.0; fl.data().len()];
            for ix in 0..16 {
                for iv in 0..5 {
                    out[g.index(0, (ix + shift) % 16, iv)] = fl.get(0, ix, iv);
                }
            }
            Field::new(g.clone(), out).unwrap()
        };
        let a = finite_difference(&shifted(&f), Derivative::X(0)).unwrap();
        let b = shifted(&finite_difference(&f, Derivative::X(0)).unwrap());
        for (x, y) in a.data().iter().zip(b.data()) {
            assert!((x - y).abs() <= 4.0 * f64::EPSILON * x.abs().max(1.0));
        }
    }

    #[test]
    fn interpolation_reproduces_multilinear_functions() {
        let g = Grid::new(2, (3, 6, 5), (0.0, 1.0), 3.0, 1.0).unwrap();
        let f = Field::sample(&g, |z| 1.0 + 2.0 * z.t - z.v[0] + 0.5 * z.v[1] + z.t * z.v[1]).unwrap();
        let z = KineticPoint::new(0.3, &[0.7, 1.1], &[-0.35, 0.8]).unwrap();
        let exact = 1.0 + 0.6 + 0.35 + 0.4 + 0.24;
        assert!((f.interpolate(&z).unwrap() - exact).abs() < 1e-12);
        let out = KineticPoint::new(0.3, &[0.7, 1.1], &[-1.35, 0.8]).unwrap();
        assert!(f.interpolate(&out).is_none());
    }
}
