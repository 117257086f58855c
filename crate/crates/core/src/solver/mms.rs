//! Manufactured solutions: a smooth `g*` and the source that makes it exact.

use serde::{Deserialize, Serialize};

use super::{coef, solve_with, CoefFn, CoefficientField, Scheme, SolverProblem};
use crate::error::Result;
use crate::fields::Grid;

const STEP: f64 = 1e-2;

/// Fourth-order centered first derivative of `f` along a perturbation.
pub(crate) fn d1(f: impl Fn(f64) -> f64) -> f64 {
    let h = STEP;
    (f(-2.0 * h) - 8.0 * f(-h) + 8.0 * f(h) - f(2.0 * h)) / (12.0 * h)
}

pub(crate) fn d2(f: impl Fn(f64) -> f64) -> f64 {
    let h = STEP;
    (-f(-2.0 * h) + 16.0 * f(-h) - 30.0 * f(0.0) + 16.0 * f(h) - f(2.0 * h)) / (12.0 * h * h)
}

/// `S = (∂_t + v·∇_x)g* − Σaⁱʲ∂²g* − Σbⁱ∂g* − c g*` from fourth-order
/// stencils on `g*`.
pub fn manufactured_source(coeffs: &CoefficientField, g_star: CoefFn) -> CoefFn {
    let c = coeffs.clone();
    let d = coeffs.d;
    coef(move |t, x, v| {
        let g = &g_star;
        let mut s = d1(|h| g(t + h, x, v));
        for i in 0..d {
            s += v[i]
                * d1(|h| {
                    let mut y = x.to_vec();
                    y[i] += h;
                    g(t, &y, v)
                });
            let dvi = d1(|h| {
                let mut w = v.to_vec();
                w[i] += h;
                g(t, x, &w)
            });
            s -= c.b_entry(i, t, x, v) * dvi;
            for j in 0..d {
                let aij = c.a_entry(i, j, t, x, v);
                if aij == 0.0 {
                    continue;
                }
                let dij = if i == j {
                    d2(|h| {
                        let mut w = v.to_vec();
                        w[i] += h;
                        g(t, x, &w)
                    })
                } else {
                    d1(|h| {
                        d1(|k| {
                            let mut w = v.to_vec();
                            w[i] += h;
                            w[j] += k;
                            g(t, x, &w)
                        })
                    })
                };
                s -= aij * dij;
            }
        }
        s - c.c.as_ref().map_or(0.0, |cf| cf(t, x, v)) * g(t, x, v)
    })
}

/// A smooth exact solution together with the coefficients it is tested on.
#[derive(Clone, Debug)]
pub struct MmsCase {
    pub coefficients: CoefficientField,
    pub g_star: CoefFnDebug,
    pub t_final: f64,
}

/// Wrapper so cases can derive `Debug`.
#[derive(Clone)]
pub struct CoefFnDebug(pub CoefFn);

impl std::fmt::Debug for CoefFnDebug {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("<fn>")
    }
}

impl MmsCase {
    /// `d = 1` reference case with `v`-dependent diffusion, drift and reaction.
    pub fn reference() -> Self {
        let g_star = coef(|t, x, v| {
            let v = v[0];
            (1.0 + 0.5 * (2.0 * t).sin())
                * (1.0 + 0.3 * x[0].cos() + 0.2 * (2.0 * x[0]).sin())
                * (1.0 + 0.5 * v + 0.125 * v * v)
                * (-0.5 * v * v).exp()
        });
        let coefficients = CoefficientField::isotropic(1, coef(|_, x, v| 1.0 + 0.3 * x[0].sin() * v[0].cos()))
            .with_drift(vec![coef(|_, x, v| -0.5 * v[0] + 0.2 * x[0].cos())])
            .with_c(coef(|_, x, _| -0.3 + 0.2 * x[0].sin()));
        Self {
            coefficients,
            g_star: CoefFnDebug(g_star),
            t_final: 0.5,
        }
    }

    pub fn problem(&self, nx: usize, nv: usize, dt: f64) -> Result<SolverProblem> {
        let grid = Grid::phase(self.coefficients.d, nx, nv, 0.0, crate::fields::DEFAULT_X_PERIOD, 8.0)?;
        let g = &self.g_star.0;
        let initial = (0..grid.phase_len())
            .map(|i| {
                let z = grid.point(i);
                g(0.0, &z.x, &z.v)
            })
            .collect();
        let coeffs = self
            .coefficients
            .clone()
            .with_source(manufactured_source(&self.coefficients, g.clone()));
        let mut p = SolverProblem::new(coeffs, grid, dt, self.t_final, initial);
        p.scheme = Scheme::SplittingCn;
        p.record_every = usize::MAX;
        Ok(p)
    }

    /// Sup-norm error against `g*` at the final time.
    pub fn error(&self, nx: usize, nv: usize, dt: f64) -> Result<f64> {
        let p = self.problem(nx, nv, dt)?;
        let mut last = Vec::new();
        solve_with(&p, |_, _, s| {
            last = s.to_vec();
            Ok(())
        })?;
        let g = &self.g_star.0;
        Ok((0..p.grid.phase_len())
            .map(|i| {
                let z = p.grid.point(i);
                (last[i] - g(self.t_final, &z.x, &z.v)).abs()
            })
            .fold(0.0, f64::max))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MmsLevel {
    pub nv: usize,
    pub dt: f64,
    pub error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MmsReport {
    pub levels: Vec<MmsLevel>,
    /// `log₂(e_l / e_{l+1})` between consecutive levels.
    pub slopes: Vec<f64>,
}

/// Refines `Δv` and `Δt` together by factors of two starting from
/// `(nv0 − 1, dt0)`.
pub fn convergence_study(case: &MmsCase, nx: usize, nv0: usize, dt0: f64, levels: usize) -> Result<MmsReport> {
    let mut out = Vec::with_capacity(levels);
    for l in 0..levels {
        let nv = (nv0 - 1) * (1 << l) + 1;
        let dt = dt0 / (1 << l) as f64;
        out.push(MmsLevel {
            nv,
            dt,
            error: case.error(nx, nv, dt)?,
        });
    }
    let slopes = out.windows(2).map(|w| (w[0].error / w[1].error).log2()).collect();
    Ok(MmsReport { levels: out, slopes })
}
