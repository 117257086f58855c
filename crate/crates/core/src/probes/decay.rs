//! Scaling of Taylor remainders of caloric functions near the origin.
//!
//! For a derivative of kinetic weight `w` the remainder of `g` after its
//! Taylor polynomial of kinetic degree `< w` behaves like `r^w` on `Q_r`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::KineticPoint;
use crate::green::{unit_cylinder_lattice, QuadSpec};
use crate::numerics::fit_slope;

/// Default radii for the slope fit.
pub const DECAY_RADII: [f64; 4] = [1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0, 1.0 / 128.0];
/// Admissible deviation of the fitted slope from the kinetic weight.
pub const SLOPE_TOL: f64 = 0.15;
/// Largest kinetic weight handled by the probe.
pub const MAX_WEIGHT: u32 = 4;

const FD_STEP: f64 = 0.04;

/// Solution of `∂_t g + v ∂_x g = ∂²_v g` for `t > t₀` (`d = 1`) with
/// `g(t₀) = (1 + a₁cos(x + φ) + a₂ sin 2x)(1 + b v)e^{−v²/2}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CaloricFunction {
    pub t0: f64,
    pub a1: f64,
    pub a2: f64,
    pub phase: f64,
    pub b: f64,
    /// Nodes of the trapezoidal normal rule per direction.
    pub nodes: usize,
}

impl Default for CaloricFunction {
    fn default() -> Self {
        Self {
            t0: -2.0,
            a1: 0.5,
            a2: 0.3,
            phase: 0.3,
            b: 0.4,
            nodes: 41,
        }
    }
}

impl CaloricFunction {
    pub fn initial(&self, x: f64, v: f64) -> f64 {
        (1.0 + self.a1 * (x + self.phase).cos() + self.a2 * (2.0 * x).sin())
            * (1.0 + self.b * v)
            * (-0.5 * v * v).exp()
    }

    pub fn eval(&self, t: f64, x: f64, v: f64) -> f64 {
        let tau = t - self.t0;
        if !(tau > 0.0) {
            return self.initial(x, v);
        }
        let spec = QuadSpec {
            normal_nodes: self.nodes,
            ..QuadSpec::default()
        };
        let (nodes, weights) = spec.normal_rule();
        let sw = (2.0 * tau).sqrt();
        let sx = (tau * tau * tau / 6.0).sqrt();
        let mut acc = 0.0;
        for (a, wa) in nodes.iter().zip(&weights) {
            let w = sw * a;
            let vt = v - w;
            let mut inner = 0.0;
            for (b, wb) in nodes.iter().zip(&weights) {
                let xx = 0.5 * tau * w + sx * b;
                inner += wb * self.initial(x - xx - tau * vt, vt);
            }
            acc += wa * inner;
        }
        acc
    }

    /// `∂_t^n ∂_x^a ∂_v^b g` at `(t, x, v)` by nested fourth-order stencils.
    pub fn derivative(&self, [n, a, b]: [u32; 3], t: f64, x: f64, v: f64) -> f64 {
        let (st, sx, sv) = (stencil(n), stencil(a), stencil(b));
        let h = FD_STEP;
        let mut acc = 0.0;
        for &(ot, wt) in &st {
            for &(ox, wx) in &sx {
                for &(ov, wv) in &sv {
                    acc += wt * wx * wv * self.eval(t + ot * h, x + ox * h, v + ov * h);
                }
            }
        }
        acc / h.powi((n + a + b) as i32)
    }
}

/// Offsets and weights (in units of the step) of a fourth-order stencil
/// for the `k`-th derivative, built from first and second derivative stencils.
fn stencil(k: u32) -> Vec<(f64, f64)> {
    let first = [(-2.0, 1.0 / 12.0), (-1.0, -8.0 / 12.0), (1.0, 8.0 / 12.0), (2.0, -1.0 / 12.0)];
    let second = [
        (-2.0, -1.0 / 12.0),
        (-1.0, 16.0 / 12.0),
        (0.0, -30.0 / 12.0),
        (1.0, 16.0 / 12.0),
        (2.0, -1.0 / 12.0),
    ];
    let mut out = vec![(0.0, 1.0)];
    let mut left = k;
    while left > 0 {
        let piece: &[(f64, f64)] = if left >= 2 { &second } else { &first };
        left -= if left >= 2 { 2 } else { 1 };
        let mut next: Vec<(f64, f64)> = Vec::new();
        for &(o1, w1) in &out {
            for &(o2, w2) in piece {
                let o = o1 + o2;
                match next.iter_mut().find(|(p, _)| *p == o) {
                    Some(slot) => slot.1 += w1 * w2,
                    None => next.push((o, w1 * w2)),
                }
            }
        }
        out = next;
    }
    out
}

/// Kinetic weight `2n + 3a + b` of `∂_t^n∂_x^a∂_v^b`.
pub fn kinetic_weight(order: [u32; 3]) -> u32 {
    2 * order[0] + 3 * order[1] + order[2]
}

fn factorial(k: u32) -> f64 {
    (1..=k).map(f64::from).product()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayProbeReport {
    /// `(n, a, b)` of the derivative.
    pub order: [u32; 3],
    pub weight: u32,
    /// `|D g(0)|`.
    pub derivative: f64,
    pub radii: Vec<f64>,
    /// `sup_{Q_r} |g − P| / |D g(0)|`, with `P` the Taylor polynomial of
    /// kinetic degree below the weight.
    pub remainders: Vec<f64>,
    pub slope: f64,
    pub pass: bool,
}

/// Fits the decay exponent of the Taylor remainder on `Q_r(0)` over
/// `radii`, sampling each cylinder on the scaled unit lattice.
pub fn derivative_decay_probe(
    g: &CaloricFunction,
    order: [u32; 3],
    radii: &[f64],
    per_axis: usize,
) -> Result<DecayProbeReport> {
    let w = kinetic_weight(order);
    if !(1..=MAX_WEIGHT).contains(&w) {
        return Err(Error::InvalidParameter(format!(
            "kinetic weight of {order:?} must lie in 1..={MAX_WEIGHT}"
        )));
    }
    if radii.len() < 2 || radii.iter().any(|r| !(*r > 0.0 && *r <= 1.0)) {
        return Err(Error::InvalidParameter("need at least two radii in (0, 1]".into()));
    }
    if !(g.t0 < -1.0) {
        return Err(Error::InvalidParameter("initial time must precede Q_1".into()));
    }
    let g0 = g.eval(0.0, 0.0, 0.0);
    let derivative = g.derivative(order, 0.0, 0.0, 0.0).abs();
    if derivative < 1e-8 * g0.abs().max(1.0) {
        return Err(Error::NoiseFloor { value: derivative });
    }
    let mut terms = Vec::new();
    for n in 0..=w / 2 {
        for a in 0..=w / 3 {
            for b in 0..w {
                let o = [n, a, b];
                if kinetic_weight(o) < w {
                    let c = if o == [0, 0, 0] { g0 } else { g.derivative(o, 0.0, 0.0, 0.0) };
                    terms.push((o, c / (factorial(n) * factorial(a) * factorial(b))));
                }
            }
        }
    }
    let taylor = |z: &KineticPoint| -> f64 {
        terms
            .iter()
            .map(|&([n, a, b], c)| c * z.t.powi(n as i32) * z.x[0].powi(a as i32) * z.v[0].powi(b as i32))
            .sum()
    };
    let lattice = unit_cylinder_lattice(1, per_axis);
    let mut remainders = Vec::with_capacity(radii.len());
    for &r in radii {
        let mut sup = 0.0f64;
        for p in &lattice {
            let z = p.scale(r)?;
            sup = sup.max((g.eval(z.t, z.x[0], z.v[0]) - taylor(&z)).abs());
        }
        remainders.push(sup / derivative);
    }
    let lx: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
    let ly: Vec<f64> = remainders.iter().map(|r| r.ln()).collect();
    let slope = fit_slope(&lx, &ly);
    Ok(DecayProbeReport {
        order,
        weight: w,
        derivative,
        radii: radii.to_vec(),
        remainders,
        slope,
        pass: (slope - w as f64).abs() <= SLOPE_TOL,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn caloric_function_solves_the_equation() {
        let g = CaloricFunction::default();
        for &(t, x, v) in &[(0.0, 0.0, 0.0), (-0.5, 1.2, -0.7), (-1.0, 2.5, 0.4)] {
            let res = g.derivative([1, 0, 0], t, x, v) + v * g.derivative([0, 1, 0], t, x, v)
                - g.derivative([0, 0, 2], t, x, v);
            assert!(res.abs() < 1e-5, "residual {res} at ({t}, {x}, {v})");
        }
    }

    #[test]
    fn matches_initial_data_as_tau_vanishes() {
        let g = CaloricFunction::default();
        let a = g.eval(g.t0 + 1e-8, 0.4, 0.3);
        assert!((a - g.initial(0.4, 0.3)).abs() < 1e-6);
    }

    #[test]
    fn kinetic_weights() {
        assert_eq!(kinetic_weight([0, 0, 1]), 1);
        assert_eq!(kinetic_weight([0, 0, 2]), 2);
        assert_eq!(kinetic_weight([1, 0, 0]), 2);
        assert_eq!(kinetic_weight([0, 1, 0]), 3);
    }

    #[test]
    fn unsupported_orders_are_rejected() {
        let g = CaloricFunction::default();
        assert!(derivative_decay_probe(&g, [0, 0, 0], &DECAY_RADII, 5).is_err());
        assert!(derivative_decay_probe(&g, [1, 1, 0], &DECAY_RADII, 5).is_err());
        assert!(derivative_decay_probe(&g, [0, 0, 1], &[0.1], 5).is_err());
    }

    #[test]
    fn stencils_differentiate_monomials() {
        for k in 0..=4u32 {
            for p in 0..=k + 3 {
                let d: f64 = stencil(k).iter().map(|(o, w)| w * o.powi(p as i32)).sum();
                let want = if p == k { factorial(k) } else { 0.0 };
                assert!((d - want).abs() < 1e-10, "k={k} p={p}: {d}");
            }
        }
    }
}
