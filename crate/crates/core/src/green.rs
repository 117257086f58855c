//! The Kolmogorov Green function and kinetic convolution.
//!
//! `𝒢(t,x,v) = (√3/(2πt²))^d exp(−3|x+tv/2|²/t³) exp(−|v|²/(4t))` for `t > 0`.
//!
//! As written, `𝒢` is annihilated by `∂_t − v·∇_x − Δ_v`. The fundamental
//! solution of `∂_t + v·∇_x − Δ_v` for the group law
//! `z̃⁻¹∘z = (t−t̃, x−x̃−(t−t̃)ṽ, v−ṽ)` is its velocity reflection
//! `Γ(t,x,v) = 𝒢(t,x,−v)`, and that is the kernel used by every convolution
//! here. Both share mass, positivity and scaling.
//!
//! For fixed `t`, `Γ` is a Gaussian density: `v` has variance `2t` per
//! component and `x | v` has mean `tv/2`, variance `t³/6`. Convolutions are
//! computed in those standardized coordinates, so the Gaussian weights never
//! have to be resolved by the spatial nodes.

use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{finite_difference, velocity_laplacian, Derivative, Field, Grid};
use crate::geometry::{Coords, Cylinder, KineticPoint};
use crate::numerics::{fit_slope, gauss_legendre, pairwise_sum};

/// Evaluator of `𝒢` in dimension `d`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GreenEval {
    pub d: usize,
}

impl GreenEval {
    pub fn new(d: usize) -> Self {
        Self { d }
    }

    pub fn eval(&self, z: &KineticPoint) -> f64 {
        debug_assert_eq!(z.dim(), self.d);
        green_eval(z)
    }
}

pub fn green_eval(z: &KineticPoint) -> f64 {
    let t = z.t;
    if !(t > 0.0) {
        return 0.0;
    }
    let d = z.dim() as i32;
    let mut qx = 0.0;
    let mut qv = 0.0;
    for (x, v) in z.x.iter().zip(&z.v) {
        let m = x + 0.5 * t * v;
        qx += m * m;
        qv += v * v;
    }
    (3f64.sqrt() / (2.0 * PI * t * t)).powi(d) * (-3.0 * qx / (t * t * t)).exp() * (-qv / (4.0 * t)).exp()
}

/// `Γ(z) = 𝒢(t, x, −v)`, the kernel of `∂_t + v·∇_x − Δ_v`.
pub fn fundamental_solution(z: &KineticPoint) -> f64 {
    green_eval(&KineticPoint {
        t: z.t,
        x: z.x.clone(),
        v: z.v.iter().map(|v| -v).collect(),
    })
}

/// Quadrature parameters for kinetic convolutions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadSpec {
    /// Trapezoidal nodes per standardized Gaussian coordinate.
    pub normal_nodes: usize,
    /// Half-width of the standardized box, in standard deviations.
    pub normal_width: f64,
    /// Gauss–Legendre order on each time panel.
    pub gl_order: usize,
    /// Geometric levels (ratio 1/2) towards the singular layer `τ = 0`.
    pub levels: usize,
    /// Uniform panels when the source support stays away from the target time.
    pub panels: usize,
    /// When set, compare against a refined rule and fail above this gap.
    pub tolerance: Option<f64>,
}

impl Default for QuadSpec {
    fn default() -> Self {
        Self {
            normal_nodes: 33,
            normal_width: 8.0,
            gl_order: 8,
            levels: 24,
            panels: 8,
            tolerance: None,
        }
    }
}

impl QuadSpec {
    /// Roughly doubled resolution in every direction.
    pub fn refined(&self) -> Self {
        Self {
            normal_nodes: 2 * self.normal_nodes - 1,
            normal_width: self.normal_width,
            gl_order: self.gl_order + 4,
            levels: self.levels + 4,
            panels: 2 * self.panels,
            tolerance: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.normal_nodes < 2 || self.gl_order < 1 || self.panels < 1 {
            return Err(Error::InvalidParameter("quadrature node counts too small".into()));
        }
        if !(self.normal_width > 0.0) {
            return Err(Error::InvalidParameter("normal_width must be positive".into()));
        }
        Ok(())
    }

    /// Standard-normal trapezoidal nodes with weights normalized to sum 1.
    pub(crate) fn normal_rule(&self) -> (Vec<f64>, Vec<f64>) {
        let n = self.normal_nodes;
        let w = self.normal_width;
        let h = 2.0 * w / (n - 1) as f64;
        let nodes: Vec<f64> = (0..n).map(|i| -w + i as f64 * h).collect();
        let raw: Vec<f64> = nodes
            .iter()
            .enumerate()
            .map(|(i, z)| {
                let end = if i == 0 || i + 1 == n { 0.5 } else { 1.0 };
                end * (-0.5 * z * z).exp()
            })
            .collect();
        let total = pairwise_sum(&raw);
        (nodes, raw.iter().map(|r| r / total).collect())
    }

    /// Nodes and weights for `τ ∈ [lo, hi]`, graded towards `τ = 0` when `lo = 0`.
    fn time_rule(&self, lo: f64, hi: f64) -> Vec<(f64, f64)> {
        if !(hi > lo) {
            return vec![];
        }
        let (gx, gw) = gauss_legendre(self.gl_order);
        let mut panels = Vec::new();
        if lo <= 0.0 {
            let mut b = hi;
            for _ in 0..self.levels {
                panels.push((0.5 * b, b));
                b *= 0.5;
            }
            panels.push((0.0, b));
        } else {
            let h = (hi - lo) / self.panels as f64;
            for k in 0..self.panels {
                panels.push((lo + k as f64 * h, lo + (k + 1) as f64 * h));
            }
        }
        let mut out = Vec::with_capacity(panels.len() * gx.len());
        for (a, b) in panels {
            let (c, m) = (0.5 * (a + b), 0.5 * (b - a));
            for (x, w) in gx.iter().zip(&gw) {
                out.push((c + m * x, m * w));
            }
        }
        out
    }
}

/// Right-hand side of a Kolmogorov problem, compactly supported in time.
#[derive(Clone)]
pub enum Source {
    /// `1` on `[t0, t1] × ℝ^d × ℝ^d`.
    TimeSlab { t0: f64, t1: f64 },
    /// Indicator of a kinetic cylinder.
    Indicator(Cylinder),
    /// Multilinear interpolant of a sampled field, zero outside its box.
    Sampled(Field),
    /// Arbitrary function with its time support.
    Closure {
        f: Arc<dyn Fn(&KineticPoint) -> f64 + Send + Sync>,
        support: (f64, f64),
    },
}

impl std::fmt::Debug for Source {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Source::TimeSlab { t0, t1 } => write!(f, "TimeSlab({t0}, {t1})"),
            Source::Indicator(c) => write!(f, "Indicator({c:?})"),
            Source::Sampled(fl) => write!(f, "Sampled({:?})", fl.grid()),
            Source::Closure { support, .. } => write!(f, "Closure(support = {support:?})"),
        }
    }
}

impl Source {
    pub fn closure<F>(support: (f64, f64), f: F) -> Self
    where
        F: Fn(&KineticPoint) -> f64 + Send + Sync + 'static,
    {
        Source::Closure {
            f: Arc::new(f),
            support,
        }
    }

    pub fn time_support(&self) -> Result<(f64, f64)> {
        let s = match self {
            Source::TimeSlab { t0, t1 } => (*t0, *t1),
            Source::Indicator(c) => (c.center.t - c.radius * c.radius, c.center.t),
            Source::Sampled(f) => (f.grid().t_min, f.grid().t_max),
            Source::Closure { support, .. } => *support,
        };
        if !(s.0.is_finite() && s.1.is_finite()) || s.1 < s.0 {
            return Err(Error::NonCompactSource);
        }
        Ok(s)
    }

    pub fn eval(&self, z: &KineticPoint) -> f64 {
        match self {
            Source::TimeSlab { t0, t1 } => {
                if z.t >= *t0 && z.t <= *t1 {
                    1.0
                } else {
                    0.0
                }
            }
            Source::Indicator(c) => {
                if c.contains(z) {
                    1.0
                } else {
                    0.0
                }
            }
            Source::Sampled(f) => f.interpolate(z).unwrap_or(0.0),
            Source::Closure { f, .. } => f(z),
        }
    }
}

/// `∫ Γ(τ, X, W) h(τ, z̃) dτ dX dW` with `z̃ = (t−τ, x−X−τ(v−W), v−W)`,
/// restricted to `t − τ ∈ support`.
pub fn integrate_kernel<H>(z: &KineticPoint, support: (f64, f64), spec: &QuadSpec, h: H) -> f64
where
    H: Fn(f64, &KineticPoint) -> f64,
{
    let d = z.dim();
    let lo = (z.t - support.1).max(0.0);
    let hi = z.t - support.0;
    let times = spec.time_rule(lo, hi);
    if times.is_empty() {
        return 0.0;
    }
    let (nodes, weights) = spec.normal_rule();
    let n = nodes.len();
    let dims = 2 * d;
    let total = n.pow(dims as u32);
    let mut per_tau = Vec::with_capacity(times.len());
    let mut inner = Vec::with_capacity(total);
    let mut zt = KineticPoint {
        t: 0.0,
        x: Coords::from_elem(0.0, d),
        v: Coords::from_elem(0.0, d),
    };
    let mut idx = vec![0usize; dims];
    for &(tau, wt) in &times {
        let sw = (2.0 * tau).sqrt();
        let sx = (tau * tau * tau / 6.0).sqrt();
        zt.t = z.t - tau;
        inner.clear();
        idx.iter_mut().for_each(|i| *i = 0);
        for _ in 0..total {
            let mut w = 1.0;
            for i in 0..d {
                let wv = sw * nodes[idx[2 * i]];
                let xx = 0.5 * tau * wv + sx * nodes[idx[2 * i + 1]];
                zt.v[i] = z.v[i] - wv;
                zt.x[i] = z.x[i] - xx - tau * zt.v[i];
                w *= weights[idx[2 * i]] * weights[idx[2 * i + 1]];
            }
            inner.push(w * h(tau, &zt));
            for slot in idx.iter_mut().rev() {
                *slot += 1;
                if *slot < n {
                    break;
                }
                *slot = 0;
            }
        }
        per_tau.push(wt * pairwise_sum(&inner));
    }
    pairwise_sum(&per_tau)
}

/// `(Γ ⋆_kin S)(z)`, the solution of `ℒ_K g = S` vanishing before the support of `S`.
pub fn kinetic_convolution(source: &Source, z: &KineticPoint, spec: &QuadSpec) -> Result<f64> {
    spec.validate()?;
    let support = source.time_support()?;
    let value = integrate_kernel(z, support, spec, |_, zt| source.eval(zt));
    if let Some(tol) = spec.tolerance {
        let fine = integrate_kernel(z, support, &spec.refined(), |_, zt| source.eval(zt));
        let estimate = (fine - value).abs();
        if estimate > tol {
            return Err(Error::QuadratureBudget {
                estimate,
                tolerance: tol,
            });
        }
        return Ok(fine);
    }
    Ok(value)
}

/// Convolution at many targets, in parallel; output order follows `points`.
pub fn convolve_points(source: &Source, points: &[KineticPoint], spec: &QuadSpec) -> Result<Vec<f64>> {
    points
        .par_iter()
        .map(|z| kinetic_convolution(source, z, spec))
        .collect()
}

/// Unit mass of `𝒢(t,·,·)` by tensor trapezoid over an 8σ box: `v` nodes
/// first, then `x` nodes centred on `−tv/2` for each `v`. The kernel
/// factorizes across components, so the `d`-dimensional mass is the
/// one-dimensional mass to the power `d`.
pub fn green_mass(d: usize, t: f64, nodes: usize) -> f64 {
    if !(t > 0.0) {
        return 0.0;
    }
    let sv = (2.0 * t).sqrt();
    let sx = (t * t * t / 6.0).sqrt();
    let hv = 16.0 * sv / (nodes - 1) as f64;
    let hx = 16.0 * sx / (nodes - 1) as f64;
    let end = |i: usize| if i == 0 || i + 1 == nodes { 0.5 } else { 1.0 };
    let rows: Vec<f64> = (0..nodes)
        .map(|i| {
            let v = -8.0 * sv + i as f64 * hv;
            let cols: Vec<f64> = (0..nodes)
                .map(|j| {
                    let x = -0.5 * t * v - 8.0 * sx + j as f64 * hx;
                    end(j) * green_eval(&KineticPoint::new_1d(t, x, v))
                })
                .collect();
            end(i) * hx * pairwise_sum(&cols)
        })
        .collect();
    (hv * pairwise_sum(&rows)).powi(d as i32)
}

/// `ℒ_K g − S = ∂_t g + v·∇_x g − Δ_v g − S` by finite differences.
pub fn kolmogorov_residual(g: &Field, s: &Field) -> Result<Field> {
    g.grid().ensure_same(s.grid())?;
    let transport = finite_difference(g, Derivative::Transport)?;
    let lap = velocity_laplacian(g)?;
    let data = transport
        .data()
        .iter()
        .zip(lap.data())
        .zip(s.data())
        .map(|((a, b), c)| a - b - c)
        .collect();
    Field::new(g.grid().clone(), data)
}

/// `|Γ(t+s, z) − ∫∫ Γ(t, x−x̃−tṽ, v−ṽ) Γ(s, x̃, ṽ) dx̃ dṽ|`, maximized over `points`.
///
/// The integral is taken in the standardized coordinates of `Γ(s,·,·)` with
/// `nodes` trapezoidal points per axis over `±width` standard deviations;
/// by factorization across components, each component is integrated
/// separately.
pub fn chapman_kolmogorov_check(t: f64, s: f64, points: &[KineticPoint], nodes: usize, width: f64) -> Result<f64> {
    if !(t > 0.0 && s > 0.0) {
        return Err(Error::InvalidParameter("t and s must be positive".into()));
    }
    let spec = QuadSpec {
        normal_nodes: nodes,
        normal_width: width,
        ..QuadSpec::default()
    };
    spec.validate()?;
    let (om, wts) = spec.normal_rule();
    let sw = (2.0 * s).sqrt();
    let sx = (s * s * s / 6.0).sqrt();
    let component = |x: f64, v: f64| {
        let mut rows = Vec::with_capacity(om.len());
        for (a, wa) in om.iter().zip(&wts) {
            let vt = sw * a;
            let mut cols = Vec::with_capacity(om.len());
            for (b, wb) in om.iter().zip(&wts) {
                let xt = 0.5 * s * vt + sx * b;
                cols.push(wb * fundamental_solution(&KineticPoint::new_1d(t, x - xt - t * vt, v - vt)));
            }
            rows.push(wa * pairwise_sum(&cols));
        }
        pairwise_sum(&rows)
    };
    let mut worst = 0.0f64;
    for z in points {
        let conv: f64 = (0..z.dim()).map(|i| component(z.x[i], z.v[i])).product();
        let exact = fundamental_solution(&KineticPoint {
            t: t + s,
            x: z.x.clone(),
            v: z.v.clone(),
        });
        worst = worst.max((conv - exact).abs());
    }
    Ok(worst)
}

/// `9^{1+2d}` lattice of the unit cylinder (cell midpoints in `x`, `v`;
/// `t ∈ {0, −1/9, …, −8/9}`), restricted to `Q₁`, plus the center.
pub fn unit_cylinder_lattice(d: usize, per_axis: usize) -> Vec<KineticPoint> {
    let m = per_axis;
    let ts: Vec<f64> = (0..m).map(|i| -(i as f64) / m as f64).collect();
    let sp: Vec<f64> = (0..m).map(|j| -1.0 + (2 * j + 1) as f64 / m as f64).collect();
    let unit = Cylinder::unit(d);
    let mut out = vec![KineticPoint::origin(d)];
    let combos = m.pow(2 * d as u32);
    for &t in &ts {
        for c in 0..combos {
            let mut rem = c;
            let mut coords = [0.0; 4];
            for slot in coords.iter_mut().take(2 * d) {
                *slot = sp[rem % m];
                rem /= m;
            }
            let z = KineticPoint {
                t,
                x: coords[..d].iter().copied().collect(),
                v: coords[d..2 * d].iter().copied().collect(),
            };
            if unit.contains(&z) {
                out.push(z);
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndicatorBoundReport {
    pub d: usize,
    pub radii: Vec<f64>,
    pub sups: Vec<f64>,
    pub sup_over_r2: Vec<f64>,
    pub slope: f64,
    /// `max/min − 1` of `sup/r²` across radii.
    pub spread: f64,
}

/// Sup of `Γ ⋆_kin 1_{Q_r(0)}` over a lattice of `Q_r(0)`, for each `r`.
pub fn verify_indicator_bound(d: usize, radii: &[f64], spec: &QuadSpec) -> Result<IndicatorBoundReport> {
    if radii.len() < 3 {
        return Err(Error::InvalidParameter("need at least three radii".into()));
    }
    let lattice = unit_cylinder_lattice(d, 9);
    let mut sups = Vec::new();
    for &r in radii {
        let cyl = Cylinder::new(KineticPoint::origin(d), r)?;
        let points: Vec<KineticPoint> = lattice.iter().map(|w| cyl.from_unit(w)).collect::<Result<_>>()?;
        let vals = convolve_points(&Source::Indicator(cyl), &points, spec)?;
        sups.push(vals.iter().copied().fold(0.0, f64::max));
    }
    let lx: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
    let ly: Vec<f64> = sups.iter().map(|s| s.ln()).collect();
    let ratio: Vec<f64> = sups.iter().zip(radii).map(|(s, r)| s / (r * r)).collect();
    let hi = ratio.iter().copied().fold(f64::MIN, f64::max);
    let lo = ratio.iter().copied().fold(f64::MAX, f64::min);
    Ok(IndicatorBoundReport {
        d,
        radii: radii.to_vec(),
        sups,
        sup_over_r2: ratio,
        slope: fit_slope(&lx, &ly),
        spread: hi / lo - 1.0,
    })
}

/// Smooth source `1_{[0,1]}(t)(1 + cos x) e^{−|v|²/2}` used by the residual study.
pub fn residual_study_source() -> Source {
    Source::closure((0.0, 1.0), move |z| {
        if z.t < 0.0 || z.t > 1.0 {
            return 0.0;
        }
        let v2: f64 = z.v.iter().map(|v| v * v).sum();
        (1.0 + z.x[0].cos()) * (-0.5 * v2).exp()
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualStudy {
    pub levels: Vec<(usize, usize, usize)>,
    pub sup_residuals: Vec<f64>,
    pub orders: Vec<f64>,
}

/// `sup |ℒ_K(Γ⋆S) − S|` on dyadically refined grids over `t ∈ [0.4, 0.6]`,
/// `x ∈ 𝕋`, `v ∈ [−4, 4]` (d = 1), with observed convergence orders.
///
/// The source has a single `x`-harmonic, and so does `Γ⋆S` (the equation
/// commutes with `x`-translations); three columns `x ∈ {0, π/2, π}` fix it.
pub fn residual_study(levels: usize, spec: &QuadSpec) -> Result<ResidualStudy> {
    let src = residual_study_source();
    let mut shape = Vec::new();
    let mut sups = Vec::new();
    for l in 0..levels {
        let (nt, nx, nv) = (4 * (1 << l) + 1, 16 << l, 32 * (1 << l) + 1);
        let grid = Grid::new(1, (nt, nx, nv), (0.4, 0.6), 2.0 * PI, 4.0)?;
        let mut pts = Vec::with_capacity(3 * nt * nv);
        for it in 0..nt {
            for iv in 0..nv {
                for x in [0.0, 0.5 * PI, PI] {
                    pts.push(KineticPoint::new_1d(grid.t(it), x, grid.v(iv)));
                }
            }
        }
        let vals = convolve_points(&src, &pts, spec)?;
        let mut data = vec![0.0; grid.len()];
        for it in 0..nt {
            for iv in 0..nv {
                let b = 3 * (it * nv + iv);
                let (g0, g1, g2) = (vals[b], vals[b + 1], vals[b + 2]);
                let a = 0.5 * (g0 + g2);
                let (re, im) = (0.5 * (g0 - g2), a - g1);
                for ix in 0..nx {
                    let x = grid.x(ix);
                    data[grid.index(it, ix, iv)] = a + re * x.cos() - im * x.sin();
                }
            }
        }
        let g = Field::new(grid.clone(), data)?;
        let s = Field::sample(&grid, |z| src.eval(z))?;
        sups.push(kolmogorov_residual(&g, &s)?.max_abs());
        shape.push((nt, nx, nv));
    }
    let orders = sups.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    Ok(ResidualStudy {
        levels: shape,
        sup_residuals: sups,
        orders,
    })
}
