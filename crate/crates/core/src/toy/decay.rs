//! Local `C^{2+α₀}` norms of the deviation from equilibrium, weighted by `μ^{−δ}(v₀)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{Field, MaxwellianRef};
use crate::geometry::{Cylinder, KineticPoint};
use crate::holder::{default_r_min, estimate_seminorm, Domain, FitKind, HolderOrder, ScanParams};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HolderDecayParams {
    pub alpha0: f64,
    pub delta: f64,
    /// Earliest time the cylinders may reach back to.
    pub tau: f64,
    /// Thinning of the `v₀` centers, in grid nodes.
    pub v_stride: usize,
    /// Number of equally spaced `x` centers tried per `v₀`.
    pub x_centers: usize,
    /// Smallest scanned radius; the stencil-resolution default when absent.
    pub r_min: Option<f64>,
}

impl Default for HolderDecayParams {
    fn default() -> Self {
        Self {
            alpha0: 0.25,
            delta: 0.25,
            tau: 0.0,
            v_stride: 4,
            x_centers: 4,
            r_min: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayRow {
    pub v0: f64,
    /// `sup|h| + [h]_{C^{2+α₀}}` on `Q_r(z₀)`, maximized over the `x` centers.
    pub norm: f64,
    /// `μ(v₀)^δ`.
    pub weight: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HolderDecayReport {
    pub alpha0: f64,
    pub delta: f64,
    pub tau: f64,
    pub radius: f64,
    pub rows: Vec<DecayRow>,
    pub sup_ratio: f64,
}

/// Runs the probe on frames `g` of a `d = 1` toy run, measuring
/// `h = g − ρ̄√μ`. Cylinders end at the last frame and reach back no
/// further than `τ`.
pub fn holder_decay_probe(frames: &Field, rho_bar: f64, params: &HolderDecayParams) -> Result<HolderDecayReport> {
    let HolderDecayParams {
        alpha0,
        delta,
        tau,
        v_stride,
        x_centers,
        r_min,
    } = *params;
    let grid = frames.grid();
    if grid.d != 1 {
        return Err(Error::InvalidParameter("the decay probe runs on d = 1 data".into()));
    }
    if !(alpha0 > 0.0 && alpha0 < 1.0) || !(delta >= 0.0) || v_stride == 0 || x_centers == 0 {
        return Err(Error::InvalidParameter("need 0 < alpha0 < 1, delta >= 0 and positive strides".into()));
    }
    let order = HolderOrder::new(2.0 + alpha0)?;
    let m = MaxwellianRef::new(1);
    let s = m.sqrt_mu_nodes(grid);
    let nv = grid.nv;
    let dev = Field::new(
        grid.clone(),
        frames.data().iter().enumerate().map(|(i, g)| g - rho_bar * s[i % nv]).collect(),
    )?;
    let t_c = grid.t_max;
    let span = t_c - tau.max(grid.t_min);
    let r = span.max(0.0).sqrt().min(1.0);
    let r_min = r_min.unwrap_or_else(|| default_r_min(grid));
    if grid.nt < 2 || r < r_min {
        return Err(Error::NoAdmissibleCylinder);
    }
    let mut rows = Vec::new();
    for k in (0..nv).step_by(v_stride) {
        let v0 = grid.v(k);
        if v0.abs() + r > grid.v_max + 1e-12 {
            continue;
        }
        let mut norm = 0.0f64;
        for c in 0..x_centers {
            let ix = c * grid.nx / x_centers;
            let center = KineticPoint::new(t_c, &[grid.x(ix)], &[v0])?;
            let cyl = Cylinder::new(center, r)?;
            let scan = ScanParams {
                r_min: Some(r_min),
                r_max: r,
                ..ScanParams::on(Domain::Cylinder(cyl.clone()))
            };
            let semi = match estimate_seminorm(&dev, order, FitKind::BestPolynomial, &scan) {
                Ok(e) => e.seminorm,
                Err(Error::NoAdmissibleCylinder) => 0.0,
                Err(e) => return Err(e),
            };
            let mut sup = 0.0f64;
            crate::holder::for_each_in_cylinder(grid, &cyl, |flat, _, _, _| {
                sup = sup.max(dev.data()[flat].abs());
            });
            norm = norm.max(sup + semi);
        }
        let weight = m.mu(&[v0]).powf(delta);
        rows.push(DecayRow {
            v0,
            norm,
            weight,
            ratio: norm / weight,
        });
    }
    if rows.is_empty() {
        return Err(Error::NoAdmissibleCylinder);
    }
    let sup_ratio = rows.iter().fold(0.0f64, |a, r| a.max(r.ratio));
    Ok(HolderDecayReport {
        alpha0,
        delta,
        tau,
        radius: r,
        rows,
        sup_ratio,
    })
}
