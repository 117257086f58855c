//! `|∂_x g(z₀)| + |∂_v g(z₀)|` against
//! `‖g‖_{L^∞(Q₁)} + ‖S‖_{L^∞(Q₁)} + ‖∂_x S‖_{L^∞(Q₁)} + ‖∂_v S‖_{L^∞(Q₁)}`
//! for `g = Γ ⋆_kin S` in `d = 1`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ProbeReport;
use crate::error::{Error, Result};
use crate::geometry::KineticPoint;
use crate::green::{integrate_kernel, unit_cylinder_lattice, QuadSpec};

/// `S(t, x, v) = A·φ(t)·X(x − x_s)·V(v)` with a smooth bump `φ` supported
/// in `[−1, 0]`, a trigonometric `X` and `V = (p₀ + p₁v + p₂v²)e^{−v²/(2σ²)}`.
/// The source is composed with a Galilean translation `z ↦ z_s⁻¹∘z` when
/// `translate` is set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GradientSource {
    pub seed: u64,
    pub amplitude: f64,
    /// `(frequency, cos coefficient, sin coefficient)` triples.
    pub modes: Vec<(f64, f64, f64)>,
    pub poly: [f64; 3],
    pub sigma: f64,
    pub translate: Option<KineticPoint>,
}

/// `exp(1 − 1/(1 − s²))` with `s = 2t + 1`.
fn bump(t: f64) -> f64 {
    let s = 2.0 * t + 1.0;
    if s.abs() >= 1.0 {
        return 0.0;
    }
    (1.0 - 1.0 / (1.0 - s * s)).exp()
}

impl GradientSource {
    pub fn seeded(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(1..=3);
        let modes = (0..n)
            .map(|_| {
                (
                    rng.gen_range(0..=3) as f64,
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                )
            })
            .collect();
        Self {
            seed,
            amplitude: rng.gen_range(0.5..2.0),
            modes,
            poly: [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-0.5..0.5)],
            sigma: rng.gen_range(0.5..1.5),
            translate: None,
        }
    }

    pub fn zero() -> Self {
        Self {
            seed: 0,
            amplitude: 0.0,
            modes: vec![],
            poly: [0.0; 3],
            sigma: 1.0,
            translate: None,
        }
    }

    /// `S ∘ (z₀⁻¹ ∘ ·)`; the solution is `g ∘ (z₀⁻¹ ∘ ·)`.
    pub fn translated(&self, z0: &KineticPoint) -> Result<Self> {
        let translate = match &self.translate {
            Some(z) => Some(z0.compose(z)?),
            None => Some(z0.clone()),
        };
        Ok(Self {
            translate,
            ..self.clone()
        })
    }

    /// Time support in the translated frame.
    pub fn support(&self) -> (f64, f64) {
        let s = self.translate.as_ref().map_or(0.0, |z| z.t);
        (-1.0 + s, s)
    }

    /// `(S, ∂_x S, ∂_v S)` at `z`.
    pub fn eval(&self, z: &KineticPoint) -> (f64, f64, f64) {
        let local;
        let z = match &self.translate {
            Some(z0) => {
                local = z0.inverse().compose(z).expect("dimensions match");
                &local
            }
            None => z,
        };
        let (t, x, v) = (z.t, z.x[0], z.v[0]);
        let phi = bump(t);
        if phi == 0.0 {
            return (0.0, 0.0, 0.0);
        }
        let (mut xs, mut dxs) = (0.0, 0.0);
        for &(m, c, s) in &self.modes {
            xs += c * (m * x).cos() + s * (m * x).sin();
            dxs += m * (-c * (m * x).sin() + s * (m * x).cos());
        }
        let [p0, p1, p2] = self.poly;
        let e = (-v * v / (2.0 * self.sigma * self.sigma)).exp();
        let p = p0 + p1 * v + p2 * v * v;
        let vs = p * e;
        let dvs = (p1 + 2.0 * p2 * v) * e - p * v / (self.sigma * self.sigma) * e;
        // With y = z₀⁻¹∘z, ∂_x and ∂_v act on y_x and y_v unchanged.
        let a = self.amplitude * phi;
        (a * xs * vs, a * dxs * vs, a * xs * dvs)
    }
}

fn solution_parts(src: &GradientSource, z: &KineticPoint, spec: &QuadSpec) -> (f64, f64, f64) {
    let support = src.support();
    let g = integrate_kernel(z, support, spec, |_, zt| src.eval(zt).0);
    let gx = integrate_kernel(z, support, spec, |_, zt| src.eval(zt).1);
    let gv = integrate_kernel(z, support, spec, |tau, zt| {
        let (_, sx, sv) = src.eval(zt);
        sv - tau * sx
    });
    (g, gx, gv)
}

/// Evaluates the probe at `z0` with sup norms over `Q₁(z₀)` on a lattice
/// with `per_axis` points per direction.
pub fn gradient_probe(src: &GradientSource, z0: &KineticPoint, spec: &QuadSpec, per_axis: usize) -> Result<ProbeReport> {
    spec.validate()?;
    if z0.dim() != 1 {
        return Err(Error::InvalidParameter("the gradient probe runs in d = 1".into()));
    }
    let (_, gx, gv) = solution_parts(src, z0, spec);
    if let Some(tol) = spec.tolerance {
        let (_, fx, fv) = solution_parts(src, z0, &spec.refined());
        let estimate = (fx - gx).abs().max((fv - gv).abs());
        if estimate > tol {
            return Err(Error::QuadratureBudget {
                estimate,
                tolerance: tol,
            });
        }
    }
    let lattice: Vec<KineticPoint> = unit_cylinder_lattice(1, per_axis)
        .iter()
        .map(|p| z0.compose(p))
        .collect::<Result<_>>()?;
    let sups = lattice
        .par_iter()
        .map(|p| {
            let (s, sx, sv) = src.eval(p);
            let g = integrate_kernel(p, src.support(), spec, |_, zt| src.eval(zt).0);
            [g.abs(), s.abs(), sx.abs(), sv.abs()]
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold([0.0f64; 4], |a, b| [a[0].max(b[0]), a[1].max(b[1]), a[2].max(b[2]), a[3].max(b[3])]);
    let lhs = gx.abs() + gv.abs();
    let rhs: f64 = sups.iter().sum();
    let skipped = lhs == 0.0 && rhs == 0.0;
    Ok(ProbeReport {
        case_id: src.seed,
        level: 0,
        lhs,
        rhs,
        ratio: if rhs > 0.0 { lhs / rhs } else { 0.0 },
        lhs_terms: vec![gx.abs(), gv.abs()],
        rhs_terms: sups.to_vec(),
        witness: None,
        skipped,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GradientBatch {
    pub reports: Vec<ProbeReport>,
    pub refined_reports: Vec<ProbeReport>,
    pub max_ratio: f64,
    pub max_ratio_refined: f64,
    /// `|max_ratio_refined / max_ratio − 1|`.
    pub relative_change: f64,
}

/// Seeded batch at the origin, on `spec` and on `spec.refined()`.
pub fn gradient_batch(seeds: &[u64], spec: &QuadSpec, per_axis: usize) -> Result<GradientBatch> {
    let origin = KineticPoint::origin(1);
    let run = |spec: &QuadSpec| -> Result<Vec<ProbeReport>> {
        seeds
            .iter()
            .map(|&s| gradient_probe(&GradientSource::seeded(s), &origin, spec, per_axis))
            .collect()
    };
    let reports = run(spec)?;
    let refined_reports = run(&spec.refined())?;
    let max = |r: &[ProbeReport]| r.iter().filter(|r| !r.skipped).map(|r| r.ratio).fold(0.0, f64::max);
    let max_ratio = max(&reports);
    let max_ratio_refined = max(&refined_reports);
    Ok(GradientBatch {
        relative_change: (max_ratio_refined / max_ratio - 1.0).abs(),
        reports,
        refined_reports,
        max_ratio,
        max_ratio_refined,
    })
}
