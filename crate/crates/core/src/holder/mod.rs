//! Kinetic Hölder seminorms of sampled fields.
//!
//! A seminorm estimate is a sup over grid-node centers `z₀` and dyadic radii
//! `r` of `‖g − p‖_{L∞(Q_r(z₀))} / r^β`. The polynomial `p` is either a
//! least-squares fit over the sample points in the cylinder or the kinetic
//! Taylor polynomial built from finite differences at `z₀`.

mod interp;
mod quotients;

pub use interp::{check_interpolation, InterpolationReport, InterpolationRow};
pub use quotients::{difference_quotients, DifferenceQuotients};

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{finite_difference, Derivative, Field, Grid};
use crate::geometry::{monomial_exponents_below, Cylinder, KineticMonomial, KineticPoint, KineticPolynomial};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HolderOrder {
    beta: f64,
}

impl HolderOrder {
    /// Accepts non-integer `β ∈ (0, 3)`.
    pub fn new(beta: f64) -> Result<Self> {
        if !(beta.is_finite() && beta > 0.0 && beta < 3.0 && beta.fract() != 0.0) {
            return Err(Error::InvalidParameter(format!(
                "Hölder order must be a non-integer in (0, 3), got {beta}"
            )));
        }
        Ok(Self { beta })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// `β − 2` for `β ∈ (2, 3)`.
    pub fn alpha(&self) -> Option<f64> {
        (self.beta > 2.0).then(|| self.beta - 2.0)
    }

    /// Kinetic degree of the Taylor polynomial used for this order.
    fn taylor_order(&self) -> u8 {
        if self.beta < 1.0 {
            0
        } else if self.beta < 2.0 {
            1
        } else {
            2
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitKind {
    BestPolynomial,
    TaylorRemainder,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub t: f64,
    pub x: Vec<f64>,
    pub v: Vec<f64>,
    pub r: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HolderEstimate {
    pub beta: f64,
    pub seminorm: f64,
    pub witness: Witness,
    pub fit_kind: FitKind,
    pub cylinders_scanned: usize,
}

/// Region on which a seminorm is taken.
#[derive(Clone, Debug, PartialEq)]
pub enum Domain {
    /// The whole grid box (x periodic).
    Grid,
    Cylinder(Cylinder),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanParams {
    pub domain: Domain,
    /// Center subsampling stride per axis.
    pub stride: usize,
    /// Smallest radius; defaults to `4·max(Δt^{1/2}, Δv)`.
    pub r_min: Option<f64>,
    pub r_max: f64,
}

impl Default for ScanParams {
    fn default() -> Self {
        Self {
            domain: Domain::Grid,
            stride: 2,
            r_min: None,
            r_max: 1.0,
        }
    }
}

impl ScanParams {
    pub fn on(domain: Domain) -> Self {
        Self {
            domain,
            ..Self::default()
        }
    }

    /// Dyadic radii `2^{−k}` in `[r_min, r_max]`, largest first.
    pub fn radii(&self, grid: &Grid) -> Vec<f64> {
        let r_min = self.r_min.unwrap_or_else(|| default_r_min(grid));
        let mut out = Vec::new();
        let mut r = 1.0f64;
        // Grow first in case r_max > 1 was requested explicitly.
        while r * 2.0 <= self.r_max {
            r *= 2.0;
        }
        while r >= r_min * (1.0 - 1e-12) && out.len() < 64 {
            if r <= self.r_max * (1.0 + 1e-12) {
                out.push(r);
            }
            r *= 0.5;
        }
        out
    }
}

/// Stencil-resolution floor for radii. The `Δx^{1/3}` term is left out:
/// polynomials of kinetic degree below 3 carry no `x` dependence, so the
/// cylinders need not resolve `x`.
pub fn default_r_min(grid: &Grid) -> f64 {
    let t_term = if grid.nt > 1 { grid.dt().sqrt() } else { 0.0 };
    4.0 * t_term.max(grid.dv())
}

fn wrap(a: f64, l: f64) -> f64 {
    a - l * (a / l).round()
}

/// Calls `f(flat, t − t₀, x − x₀ − (t − t₀)v₀, v − v₀)` for every grid node of
/// `Q_r(z₀)`, with the `x` offset reduced to the periodic cell.
pub(crate) fn for_each_in_cylinder<F>(grid: &Grid, cyl: &Cylinder, mut f: F)
where
    F: FnMut(usize, f64, &[f64], &[f64]),
{
    let d = grid.d;
    let z0 = &cyl.center;
    let r = cyl.radius;
    let (r2, r3) = (r * r, r * r * r);
    let (dx, dv, l) = (grid.dx(), grid.dv(), grid.x_period);

    let v_axis: Vec<Vec<(usize, f64)>> = (0..d)
        .map(|i| {
            let lo = (((z0.v[i] - r + grid.v_max) / dv).floor().max(0.0)) as usize;
            let hi = ((((z0.v[i] + r + grid.v_max) / dv).ceil()).max(0.0) as usize).min(grid.nv - 1);
            (lo..=hi)
                .map(|k| (k, grid.v(k) - z0.v[i]))
                .filter(|(_, w)| w.abs() < r)
                .collect()
        })
        .collect();

    let mut xs: Vec<Vec<(usize, f64)>> = vec![Vec::new(); d];
    let mut dxv = [0.0; 2];
    let mut dvv = [0.0; 2];
    for it in 0..grid.nt {
        let t = grid.t(it);
        let tau = t - z0.t;
        if !(tau > -r2 && tau <= 0.0) {
            continue;
        }
        for i in 0..d {
            let c = z0.x[i] + tau * z0.v[i];
            let lo = ((c - r3) / dx).floor() as i64;
            let hi = ((c + r3) / dx).ceil() as i64;
            xs[i].clear();
            if hi - lo + 1 >= grid.nx as i64 {
                xs[i].extend((0..grid.nx).map(|j| (j, wrap(grid.x(j) - c, l))));
            } else {
                for j in lo..=hi {
                    let jj = j.rem_euclid(grid.nx as i64) as usize;
                    xs[i].push((jj, wrap(grid.x(jj) - c, l)));
                }
            }
            xs[i].retain(|(_, w)| w.abs() < r3);
        }
        let nx_combos: usize = xs.iter().map(Vec::len).product();
        let nv_combos: usize = v_axis.iter().map(Vec::len).product();
        for cx in 0..nx_combos {
            let mut rem = cx;
            let mut ix = 0;
            for i in (0..d).rev() {
                let (j, w) = xs[i][rem % xs[i].len()];
                rem /= xs[i].len();
                dxv[i] = w;
                ix += j * grid.nx.pow((d - 1 - i) as u32);
            }
            if d > 1 && (dxv[0] * dxv[0] + dxv[1] * dxv[1]).sqrt() >= r3 {
                continue;
            }
            for cv in 0..nv_combos {
                let mut rem = cv;
                let mut iv = 0;
                for i in (0..d).rev() {
                    let (k, w) = v_axis[i][rem % v_axis[i].len()];
                    rem /= v_axis[i].len();
                    dvv[i] = w;
                    iv += k * grid.nv.pow((d - 1 - i) as u32);
                }
                if d > 1 && (dvv[0] * dvv[0] + dvv[1] * dvv[1]).sqrt() >= r {
                    continue;
                }
                f(grid.index(it, ix, iv), tau, &dxv[..d], &dvv[..d]);
            }
        }
    }
}

/// Whether `Q_r(z₀)` lies in the sampled box and in the requested domain.
fn admissible(grid: &Grid, domain: &Domain, cyl: &Cylinder) -> bool {
    let z0 = &cyl.center;
    let r = cyl.radius;
    if grid.nt == 1 {
        return false;
    }
    let eps = 1e-12;
    if z0.t - r * r < grid.t_min - eps * (1.0 + grid.t_min.abs()) || z0.t > grid.t_max + eps {
        return false;
    }
    if z0.v.iter().any(|v| v.abs() + r > grid.v_max * (1.0 + eps)) {
        return false;
    }
    match domain {
        Domain::Grid => true,
        Domain::Cylinder(outer) => outer.contains_cylinder_periodic(cyl, Some(grid.x_period)),
    }
}

/// Center node indices, scanned from the latest time downward.
fn center_nodes(grid: &Grid, stride: usize) -> Vec<usize> {
    let stride = stride.max(1);
    let d = grid.d;
    let ts: Vec<usize> = (0..grid.nt).rev().step_by(stride).collect();
    let xs: Vec<usize> = (0..grid.nx).step_by(stride).collect();
    let mid = (grid.nv - 1) / 2;
    let vs: Vec<usize> = (0..grid.nv).filter(|k| k.abs_diff(mid) % stride == 0).collect();
    let mut out = Vec::new();
    let xm: Vec<usize> = multi(&xs, d, grid.nx);
    let vm: Vec<usize> = multi(&vs, d, grid.nv);
    for &it in &ts {
        for &ix in &xm {
            for &iv in &vm {
                out.push(grid.index(it, ix, iv));
            }
        }
    }
    out
}

fn multi(axis: &[usize], d: usize, n: usize) -> Vec<usize> {
    if d == 1 {
        axis.to_vec()
    } else {
        axis.iter()
            .flat_map(|&a| axis.iter().map(move |&b| a * n + b))
            .collect()
    }
}

/// Centers paired with their admissible radii (largest first).
pub(crate) fn admissible_cylinders(field: &Field, params: &ScanParams) -> Vec<(Cylinder, usize)> {
    let grid = field.grid();
    let radii = params.radii(grid);
    let mut out = Vec::new();
    for flat in center_nodes(grid, params.stride) {
        let z0 = grid.point(flat);
        for &r in &radii {
            let cyl = Cylinder {
                center: z0.clone(),
                radius: r,
            };
            if admissible(grid, &params.domain, &cyl) {
                out.push((cyl, flat));
            }
        }
    }
    out
}

/// Coefficients of the kinetic Taylor polynomial at one node.
#[derive(Clone, Debug, Default)]
struct TaylorCoeffs {
    g0: f64,
    dt: f64,
    q: [f64; 2],
    m: [[f64; 2]; 2],
}

impl TaylorCoeffs {
    fn eval(&self, tau: f64, dv: &[f64]) -> f64 {
        let mut acc = self.g0 + tau * self.dt;
        for i in 0..dv.len() {
            acc += self.q[i] * dv[i];
            for j in 0..dv.len() {
                acc += 0.5 * dv[i] * self.m[i][j] * dv[j];
            }
        }
        acc
    }
}

/// Finite-difference fields feeding the Taylor polynomial of a given order.
struct TaylorFields {
    order: u8,
    transport: Option<Field>,
    dv: Vec<Field>,
    dvv: Vec<Vec<Field>>,
}

impl TaylorFields {
    fn new(field: &Field, order: u8) -> Result<Self> {
        let d = field.grid().d;
        let mut s = Self {
            order,
            transport: None,
            dv: vec![],
            dvv: vec![],
        };
        if order >= 1 {
            s.dv = (0..d)
                .map(|i| finite_difference(field, Derivative::V(i)))
                .collect::<Result<_>>()?;
        }
        if order >= 2 {
            s.transport = Some(finite_difference(field, Derivative::Transport)?);
            s.dvv = (0..d)
                .map(|i| {
                    (0..d)
                        .map(|j| finite_difference(field, Derivative::VV(i, j)))
                        .collect::<Result<_>>()
                })
                .collect::<Result<_>>()?;
        }
        Ok(s)
    }

    fn at(&self, field: &Field, flat: usize) -> TaylorCoeffs {
        let d = field.grid().d;
        let mut c = TaylorCoeffs {
            g0: field.data()[flat],
            ..Default::default()
        };
        if self.order >= 1 {
            for i in 0..d {
                c.q[i] = self.dv[i].data()[flat];
            }
        }
        if self.order >= 2 {
            c.dt = self.transport.as_ref().map_or(0.0, |f| f.data()[flat]);
            for i in 0..d {
                for j in 0..d {
                    c.m[i][j] = self.dvv[i][j].data()[flat];
                }
            }
        }
        c
    }
}

/// Flat index of the grid node at `z`, if `z` is one.
fn node_of(grid: &Grid, z: &KineticPoint) -> Result<usize> {
    if z.dim() != grid.d {
        return Err(Error::DimensionMismatch {
            expected: grid.d,
            got: z.dim(),
        });
    }
    let snap = |s: f64, n: usize, periodic: bool| -> Option<usize> {
        let k = s.round();
        if (s - k).abs() > 1e-9 {
            return None;
        }
        if periodic {
            Some((k as i64).rem_euclid(n as i64) as usize)
        } else if k >= 0.0 && (k as usize) < n {
            Some(k as usize)
        } else {
            None
        }
    };
    let miss = || Error::NotOnGrid(format!("{z:?}"));
    let it = if grid.nt == 1 {
        ((z.t - grid.t_min).abs() <= 1e-12 * (1.0 + z.t.abs()))
            .then_some(0)
            .ok_or_else(miss)?
    } else {
        snap((z.t - grid.t_min) / grid.dt(), grid.nt, false).ok_or_else(miss)?
    };
    let mut xm = [0; 2];
    let mut vm = [0; 2];
    for i in 0..grid.d {
        xm[i] = snap(z.x[i] / grid.dx(), grid.nx, true).ok_or_else(miss)?;
        vm[i] = snap((z.v[i] + grid.v_max) / grid.dv(), grid.nv, false).ok_or_else(miss)?;
    }
    Ok(grid.index(
        it,
        grid.flatten(grid.nx, &xm[..grid.d]),
        grid.flatten(grid.nv, &vm[..grid.d]),
    ))
}

/// Kinetic Taylor polynomial of degree 2 at the grid node `z0`:
/// `g(z₀) + (t−t₀)[∂_t g + v₀·∇_x g](z₀) + (v−v₀)·∇_v g(z₀) + ½(v−v₀)ᵀD²_v g(z₀)(v−v₀)`.
///
/// Velocity stencils must be centered, so `z0` may not sit on a velocity
/// boundary; in time the one-sided stencil is used at the ends.
pub fn taylor_polynomial(field: &Field, z0: &KineticPoint) -> Result<KineticPolynomial> {
    let grid = field.grid();
    let flat = node_of(grid, z0)?;
    let (_, _, iv) = grid.split(flat);
    let vm = grid.unflatten(grid.nv, iv);
    if (0..grid.d).any(|i| vm[i] == 0 || vm[i] + 1 == grid.nv) {
        return Err(Error::NearBoundary);
    }
    let c = TaylorFields::new(field, 2)?.at(field, flat);
    let d = grid.d;
    let zeros = vec![0u32; d];
    let mut shifted = vec![
        KineticMonomial::new(c.g0, 0, &zeros, &zeros)?,
        KineticMonomial::new(c.dt, 1, &zeros, &zeros)?,
    ];
    for i in 0..d {
        let mut l = zeros.clone();
        l[i] = 1;
        shifted.push(KineticMonomial::new(c.q[i], 0, &zeros, &l)?);
        for j in 0..d {
            let mut l = zeros.clone();
            l[i] += 1;
            l[j] += 1;
            shifted.push(KineticMonomial::new(0.5 * c.m[i][j], 0, &zeros, &l)?);
        }
    }
    KineticPolynomial::from_shifted(d, &shifted, z0)
}

/// Least-squares fit by monomials of kinetic degree `< β` over the sample
/// nodes of `cyl`, followed by the sup-norm residual on those nodes.
///
/// Fitting happens in the unit-cylinder coordinates `S_{1/r}(z₀⁻¹∘z)`, where
/// the monomial basis is well conditioned.
pub fn fit_best_polynomial(
    field: &Field,
    cyl: &Cylinder,
    beta: HolderOrder,
) -> Result<(KineticPolynomial, f64)> {
    let grid = field.grid();
    if cyl.dim() != grid.d {
        return Err(Error::DimensionMismatch {
            expected: grid.d,
            got: cyl.dim(),
        });
    }
    let (coeffs, exps, residual) = best_fit(field, cyl, beta.beta())?;
    let d = grid.d;
    let r = cyl.radius;
    let shifted: Vec<KineticMonomial> = exps
        .iter()
        .zip(&coeffs)
        .map(|((k0, k, l), c)| {
            let deg = 2 * k0 + 3 * k.iter().sum::<u32>() + l.iter().sum::<u32>();
            KineticMonomial::new(c / r.powi(deg as i32), *k0, k, l)
        })
        .collect::<Result<_>>()?;
    Ok((KineticPolynomial::from_shifted(d, &shifted, &cyl.center)?, residual))
}

type Exponents = Vec<(u32, Vec<u32>, Vec<u32>)>;

fn best_fit(field: &Field, cyl: &Cylinder, beta: f64) -> Result<(Vec<f64>, Exponents, f64)> {
    let grid = field.grid();
    let d = grid.d;
    let exps = monomial_exponents_below(d, beta);
    let nb = exps.len();
    let r = cyl.radius;
    let (r2, r3) = (r * r, r * r * r);
    let data = field.data();

    let basis = |tau: f64, dx: &[f64], dv: &[f64], out: &mut [f64]| {
        let wt = tau / r2;
        for (b, (k0, k, l)) in out.iter_mut().zip(&exps) {
            let mut p = wt.powi(*k0 as i32);
            for i in 0..d {
                p *= (dx[i] / r3).powi(k[i] as i32) * (dv[i] / r).powi(l[i] as i32);
            }
            *b = p;
        }
    };

    let mut ata = DMatrix::<f64>::zeros(nb, nb);
    let mut atb = DVector::<f64>::zeros(nb);
    let mut phi = vec![0.0; nb];
    let mut count = 0usize;
    // Distinct coordinates seen per axis: t, then v_i.
    let mut seen: Vec<Vec<u64>> = vec![Vec::new(); 1 + d];
    for_each_in_cylinder(grid, cyl, |flat, tau, dx, dv| {
        basis(tau, dx, dv, &mut phi);
        let g = data[flat];
        for a in 0..nb {
            atb[a] += phi[a] * g;
            for b in 0..nb {
                ata[(a, b)] += phi[a] * phi[b];
            }
        }
        count += 1;
        let keys = std::iter::once(tau).chain(dv.iter().copied());
        for (s, key) in seen.iter_mut().zip(keys) {
            let bits = key.to_bits();
            if s.len() < 3 && !s.contains(&bits) {
                s.push(bits);
            }
        }
    });

    let uses_t = exps.iter().any(|e| e.0 > 0);
    let mut axes_ok = seen[1..].iter().all(|s| s.len() >= 3);
    if uses_t {
        axes_ok &= seen[0].len() >= 3;
    }
    if count < nb || !axes_ok {
        return Err(Error::TooFewPoints {
            have: count,
            needed: nb.max(3),
        });
    }
    let svd = ata.svd(true, true);
    let coeffs = svd
        .solve(&atb, 1e-13 * svd.singular_values.max())
        .map_err(|e| Error::Degenerate(e.to_string()))?;
    let coeffs: Vec<f64> = coeffs.iter().copied().collect();

    let mut residual = 0.0f64;
    for_each_in_cylinder(grid, cyl, |flat, tau, dx, dv| {
        basis(tau, dx, dv, &mut phi);
        let p: f64 = phi.iter().zip(&coeffs).map(|(a, b)| a * b).sum();
        residual = residual.max((data[flat] - p).abs());
    });
    Ok((coeffs, exps, residual))
}

fn taylor_residual(field: &Field, cyl: &Cylinder, c: &TaylorCoeffs) -> f64 {
    let data = field.data();
    let mut residual = 0.0f64;
    for_each_in_cylinder(field.grid(), cyl, |flat, tau, _, dv| {
        residual = residual.max((data[flat] - c.eval(tau, dv)).abs());
    });
    residual
}

/// Residual sups for every admissible cylinder, in scan order.
/// `None` marks a cylinder skipped for lack of sample points.
fn residuals(
    field: &Field,
    beta: HolderOrder,
    fit_kind: FitKind,
    cylinders: &[(Cylinder, usize)],
) -> Result<Vec<Option<f64>>> {
    let taylor = match fit_kind {
        FitKind::TaylorRemainder => Some(TaylorFields::new(field, beta.taylor_order())?),
        FitKind::BestPolynomial => None,
    };
    cylinders
        .par_iter()
        .map(|(cyl, flat)| match &taylor {
            Some(tf) => Ok(Some(taylor_residual(field, cyl, &tf.at(field, *flat)))),
            None => match best_fit(field, cyl, beta.beta()) {
                Ok((_, _, res)) => Ok(Some(res)),
                Err(Error::TooFewPoints { .. }) => Ok(None),
                Err(e) => Err(e),
            },
        })
        .collect()
}

/// `sup residual / r^β` over the scan lattice. Ties keep the first witness
/// in scan order (latest time first, then `x`, then `v`, larger radii first).
pub fn estimate_seminorm(
    field: &Field,
    beta: HolderOrder,
    fit_kind: FitKind,
    params: &ScanParams,
) -> Result<HolderEstimate> {
    let cylinders = admissible_cylinders(field, params);
    let res = residuals(field, beta, fit_kind, &cylinders)?;
    let mut best: Option<(f64, &Cylinder)> = None;
    let mut scanned = 0;
    for ((cyl, _), r) in cylinders.iter().zip(&res) {
        let Some(r) = r else { continue };
        scanned += 1;
        let q = r / cyl.radius.powf(beta.beta());
        if best.is_none_or(|(b, _)| q > b) {
            best = Some((q, cyl));
        }
    }
    let (seminorm, cyl) = best.ok_or(Error::NoAdmissibleCylinder)?;
    Ok(HolderEstimate {
        beta: beta.beta(),
        seminorm,
        witness: Witness {
            t: cyl.center.t,
            x: cyl.center.x.to_vec(),
            v: cyl.center.v.to_vec(),
            r: cyl.radius,
        },
        fit_kind,
        cylinders_scanned: scanned,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub alpha: f64,
    pub best_polynomial: f64,
    pub taylor: f64,
    /// `best_polynomial / taylor`; absent when both vanish.
    pub ratio: Option<f64>,
    /// Extremes of the per-cylinder residual ratio best-fit / Taylor.
    pub ratio_lo: Option<f64>,
    pub ratio_hi: Option<f64>,
    pub both_zero: bool,
    pub pass: bool,
}

/// Compares `[g]_{C^{2+α}}` (best fit) with `[g]_{C^{2+α}_0}` (Taylor).
pub fn check_norm_equivalence(field: &Field, alpha: f64, params: &ScanParams) -> Result<EquivalenceReport> {
    let beta = HolderOrder::new(2.0 + alpha)?;
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!("alpha must lie in (0,1), got {alpha}")));
    }
    let cylinders = admissible_cylinders(field, params);
    if cylinders.is_empty() {
        return Err(Error::NoAdmissibleCylinder);
    }
    let best = residuals(field, beta, FitKind::BestPolynomial, &cylinders)?;
    let taylor = residuals(field, beta, FitKind::TaylorRemainder, &cylinders)?;
    let scale = field.max_abs().max(f64::MIN_POSITIVE);
    let floor = 1e-10 * scale;
    let (mut sb, mut st) = (0.0f64, 0.0f64);
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for ((cyl, _), (b, t)) in cylinders.iter().zip(best.iter().zip(&taylor)) {
        let (Some(b), Some(t)) = (b, t) else { continue };
        let w = cyl.radius.powf(beta.beta());
        sb = sb.max(b / w);
        st = st.max(t / w);
        if *t > floor {
            lo = lo.min(b / t);
            hi = hi.max(b / t);
        }
    }
    let both_zero = sb <= floor && st <= floor;
    let ratio = (!both_zero && st > 0.0).then(|| sb / st);
    let has_pairs = hi > 0.0 || lo.is_finite();
    Ok(EquivalenceReport {
        alpha,
        best_polynomial: sb,
        taylor: st,
        ratio,
        ratio_lo: has_pairs.then_some(lo),
        ratio_hi: has_pairs.then_some(hi),
        both_zero,
        pass: both_zero || ratio.is_some_and(|r| r <= 1.05),
    })
}

/// Grid nodes of the domain, for sup norms.
pub(crate) fn domain_nodes(grid: &Grid, domain: &Domain) -> Vec<usize> {
    match domain {
        Domain::Grid => (0..grid.len()).collect(),
        Domain::Cylinder(c) => {
            let mut out = Vec::new();
            for_each_in_cylinder(grid, c, |flat, _, _, _| out.push(flat));
            out.sort_unstable();
            out
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Grid covering `Q₁(0)` in one dimension.
    pub(crate) fn unit_grid(nt: usize, nx: usize, nv: usize) -> Grid {
        Grid::new(1, (nt, nx, nv), (-1.0, 0.0), 2.0 * std::f64::consts::PI, 1.0).unwrap()
    }

    fn q1() -> Domain {
        Domain::Cylinder(Cylinder::unit(1))
    }

    #[test]
    fn order_validation() {
        assert!(HolderOrder::new(2.0).is_err());
        assert!(HolderOrder::new(-0.5).is_err());
        assert!(HolderOrder::new(3.5).is_err());
        assert_eq!(HolderOrder::new(2.5).unwrap().alpha(), Some(0.5));
        assert_eq!(HolderOrder::new(0.5).unwrap().alpha(), None);
    }

    #[test]
    fn taylor_examples() {
        let g = unit_grid(9, 16, 17);
        let z0 = KineticPoint::new_1d(0.0, 0.0, 0.0);
        let c = Field::sample(&g, |_| 2.5).unwrap();
        let p = taylor_polynomial(&c, &z0).unwrap();
        assert!((p.eval(&KineticPoint::new_1d(-0.3, 1.0, 0.4)) - 2.5).abs() < 1e-12);
        assert_eq!(p.kinetic_degree(), 0);

        let f = Field::sample(&g, |z| z.t + z.v[0] + z.v[0] * z.v[0]).unwrap();
        let p = taylor_polynomial(&f, &z0).unwrap();
        for z in [
            KineticPoint::new_1d(-0.3, 1.0, 0.4),
            KineticPoint::new_1d(-0.9, 0.1, -0.7),
        ] {
            let exact = z.t + z.v[0] + z.v[0] * z.v[0];
            assert!((p.eval(&z) - exact).abs() < 1e-11);
        }

        let fx = Field::sample(&g, |z| z.x[0]).unwrap();
        let p = taylor_polynomial(&fx, &z0).unwrap();
        assert!(p.terms.iter().all(|m| m.coeff.abs() < 1e-12));

        let edge = KineticPoint::new_1d(0.0, 0.0, 1.0);
        assert!(matches!(taylor_polynomial(&f, &edge), Err(Error::NearBoundary)));
        let off = KineticPoint::new_1d(0.0, 0.01, 0.0);
        assert!(matches!(taylor_polynomial(&f, &off), Err(Error::NotOnGrid(_))));
    }

    #[test]
    fn fit_examples() {
        let g = unit_grid(17, 32, 65);
        let beta = HolderOrder::new(2.5).unwrap();
        let cyl = Cylinder::new(KineticPoint::new_1d(0.0, 0.0, 0.0), 0.5).unwrap();

        let poly = Field::sample(&g, |z| 1.0 - 2.0 * z.t + 0.5 * z.v[0] + 3.0 * z.v[0] * z.v[0]).unwrap();
        let (p, res) = fit_best_polynomial(&poly, &cyl, beta).unwrap();
        assert!(res < 1e-10, "{res}");
        assert!(p.kinetic_degree() <= 2);

        let zero = Field::zeros(g.clone());
        let (p, res) = fit_best_polynomial(&zero, &cyl, beta).unwrap();
        assert_eq!(res, 0.0);
        assert!(p.terms.iter().all(|m| m.coeff == 0.0));

        // Best sup-norm quadratic approximation of v³ on [−r, r] has error
        // r³/4; check the brute-force value of that oracle over linear
        // competitors a·v (even parts never help an odd function).
        let r = 0.5f64;
        let oracle = (0..=4000)
            .map(|i| {
                let a = 0.5 * i as f64 / 4000.0;
                (0..=2000)
                    .map(|k| {
                        let v = -r + 2.0 * r * k as f64 / 2000.0;
                        (v * v * v - a * v).abs()
                    })
                    .fold(0.0, f64::max)
            })
            .fold(f64::INFINITY, f64::min);
        assert!((oracle - r.powi(3) / 4.0).abs() < 1e-4);
        let cubic = Field::sample(&g, |z| z.v[0].powi(3)).unwrap();
        let (_, res) = fit_best_polynomial(&cubic, &cyl, beta).unwrap();
        assert!(res >= oracle * 0.999 && res <= 4.0 * oracle, "{res} vs {oracle}");

        let tiny = Cylinder::new(KineticPoint::new_1d(0.0, 0.0, 0.0), 0.02).unwrap();
        assert!(matches!(
            fit_best_polynomial(&cubic, &tiny, beta),
            Err(Error::TooFewPoints { .. })
        ));
    }

    #[test]
    fn cylinder_enumeration_matches_membership() {
        let g = Grid::new(2, (5, 8, 9), (-1.0, 0.0), 2.0, 1.5).unwrap();
        let cyl = Cylinder::new(KineticPoint::new(-0.25, &[0.5, 1.75], &[0.375, -0.75]).unwrap(), 0.7).unwrap();
        let mut got = Vec::new();
        for_each_in_cylinder(&g, &cyl, |flat, _, _, _| got.push(flat));
        got.sort_unstable();
        // Brute force over periodic images of x.
        let mut want = Vec::new();
        for flat in 0..g.len() {
            let z = g.point(flat);
            let hit = (-1..=1).any(|a| {
                (-1..=1).any(|b| {
                    let x = [z.x[0] + a as f64 * 2.0, z.x[1] + b as f64 * 2.0];
                    cyl.contains(&KineticPoint::new(z.t, &x, &z.v).unwrap())
                })
            });
            if hit {
                want.push(flat);
            }
        }
        assert_eq!(got, want);
        assert!(!got.is_empty());
    }

    #[test]
    fn seminorm_of_polynomials_vanishes() {
        let g = unit_grid(17, 16, 33);
        let beta = HolderOrder::new(2.5).unwrap();
        let f = Field::sample(&g, |z| 0.3 + z.t - 2.0 * z.v[0] + 0.7 * z.v[0] * z.v[0]).unwrap();
        for kind in [FitKind::TaylorRemainder, FitKind::BestPolynomial] {
            let e = estimate_seminorm(&f, beta, kind, &ScanParams::on(q1())).unwrap();
            assert!(e.seminorm <= 1e-8, "{kind:?} {}", e.seminorm);
            assert!(e.cylinders_scanned > 0);
        }
    }

    #[test]
    fn seminorm_of_cubic_on_unit_cylinder() {
        let g = unit_grid(33, 16, 129);
        let f = Field::sample(&g, |z| z.v[0].powi(3)).unwrap();
        let beta = HolderOrder::new(2.5).unwrap();
        let e = estimate_seminorm(&f, beta, FitKind::TaylorRemainder, &ScanParams::on(q1())).unwrap();
        assert!((e.seminorm - 1.0).abs() < 0.1, "{e:?}");
        assert_eq!(e.witness.r, 1.0);
    }

    #[test]
    fn no_admissible_cylinder() {
        let g = Grid::new(1, (5, 8, 8), (0.0, 0.01), 1.0, 0.1).unwrap();
        let f = Field::zeros(g);
        let beta = HolderOrder::new(0.5).unwrap();
        assert!(matches!(
            estimate_seminorm(&f, beta, FitKind::TaylorRemainder, &ScanParams::default()),
            Err(Error::NoAdmissibleCylinder)
        ));
    }

    #[test]
    fn equivalence_examples() {
        let g = unit_grid(33, 16, 65);
        let poly = Field::sample(&g, |z| z.t + z.v[0] * z.v[0]).unwrap();
        let rep = check_norm_equivalence(&poly, 0.5, &ScanParams::on(q1())).unwrap();
        assert!(rep.both_zero && rep.pass);

        let cubic = Field::sample(&g, |z| z.v[0].powi(3)).unwrap();
        let rep = check_norm_equivalence(&cubic, 0.5, &ScanParams::on(q1())).unwrap();
        let ratio = rep.ratio.unwrap();
        assert!(ratio > 0.0 && ratio <= 1.05, "{rep:?}");
    }
}
