//! Expression strings and field files as data sources.

use std::path::PathBuf;
use std::str::FromStr;

use anyhow::Result;
use kinfp_core::solver::{coef, CoefFn};
use kinfp_core::{Field, Grid, KineticPoint, MaxwellianRef};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::invalid;

thread_local! {
    static BUILTINS: meval::Context<'static> = meval::Context::new();
}

struct Vars<'a> {
    t: f64,
    x: &'a [f64],
    v: &'a [f64],
    maxwellian: &'a MaxwellianRef,
}

impl meval::ContextProvider for Vars<'_> {
    fn get_var(&self, name: &str) -> Option<f64> {
        match name {
            "t" => Some(self.t),
            "x" | "x1" => self.x.first().copied(),
            "x2" => self.x.get(1).copied(),
            "v" | "v1" => self.v.first().copied(),
            "v2" => self.v.get(1).copied(),
            "vsq" => Some(self.v.iter().map(|v| v * v).sum()),
            "mu" => Some(self.maxwellian.mu(self.v)),
            "sqrt_mu" => Some(self.maxwellian.sqrt_mu(self.v)),
            _ => None,
        }
    }
}

/// A compiled expression in `t`, `x`/`x1`/`x2`, `v`/`v1`/`v2`, `vsq = |v|²`,
/// `mu` and `sqrt_mu` (the normalized Maxwellian and its square root).
#[derive(Clone, Debug)]
pub struct Expression {
    expr: meval::Expr,
    maxwellian: MaxwellianRef,
}

impl Expression {
    pub fn parse(src: &str, dim: usize) -> Result<Self> {
        let expr = meval::Expr::from_str(src).map_err(|e| invalid(format!("expression {src:?}: {e}")))?;
        let out = Self {
            expr,
            maxwellian: MaxwellianRef::new(dim),
        };
        let zeros = vec![0.0; dim];
        out.try_eval(0.0, &zeros, &zeros)
            .map_err(|e| invalid(format!("expression {src:?}: {e}")))?;
        Ok(out)
    }

    fn try_eval(&self, t: f64, x: &[f64], v: &[f64]) -> Result<f64, meval::Error> {
        let vars = Vars {
            t,
            x,
            v,
            maxwellian: &self.maxwellian,
        };
        BUILTINS.with(|b| self.expr.eval_with_context((vars, b)))
    }

    pub fn eval(&self, t: f64, x: &[f64], v: &[f64]) -> f64 {
        self.try_eval(t, x, v).unwrap_or(f64::NAN)
    }
}

/// Either an expression string or `{"file": "path.kfp"}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Value", into = "Value")]
pub enum Source {
    Expr(String),
    File(PathBuf),
}

impl TryFrom<Value> for Source {
    type Error = String;

    fn try_from(v: Value) -> std::result::Result<Self, String> {
        match v {
            Value::String(s) => Ok(Source::Expr(s)),
            Value::Number(n) => Ok(Source::Expr(n.to_string())),
            Value::Object(m) if m.len() == 1 => match m.get("file") {
                Some(Value::String(p)) => Ok(Source::File(PathBuf::from(p))),
                _ => Err("expected an expression string or {\"file\": path}".into()),
            },
            _ => Err("expected an expression string or {\"file\": path}".into()),
        }
    }
}

impl From<Source> for Value {
    fn from(s: Source) -> Value {
        match s {
            Source::Expr(e) => Value::String(e),
            Source::File(p) => serde_json::json!({ "file": p }),
        }
    }
}

pub fn load_field(path: &PathBuf) -> Result<Field> {
    if !path.is_file() {
        return Err(invalid(format!("field file not found: {}", path.display())));
    }
    Ok(kinfp_core::fields::read_field(path)?)
}

impl Source {
    pub fn check(&self, dim: usize) -> Result<()> {
        match self {
            Source::Expr(e) => Expression::parse(e, dim).map(|_| ()),
            Source::File(p) if !p.is_file() => Err(invalid(format!("field file not found: {}", p.display()))),
            Source::File(_) => Ok(()),
        }
    }

    /// Samples on every node of `grid`; a file must carry exactly that grid.
    pub fn field(&self, grid: &Grid) -> Result<Field> {
        match self {
            Source::Expr(e) => {
                let ex = Expression::parse(e, grid.d)?;
                Ok(Field::sample(grid, |z| ex.eval(z.t, &z.x, &z.v))?)
            }
            Source::File(p) => {
                let f = load_field(p)?;
                f.grid().ensure_same(grid)?;
                Ok(f)
            }
        }
    }

    /// Phase-space data at time `t`. A file supplies its own grid (its last
    /// frame); `grid` must then agree with it.
    pub fn phase_data(&self, grid: &Grid, t: f64) -> Result<Vec<f64>> {
        match self {
            Source::Expr(e) => {
                let ex = Expression::parse(e, grid.d)?;
                Ok((0..grid.phase_len())
                    .map(|i| {
                        let z = grid.point(i);
                        ex.eval(t, &z.x, &z.v)
                    })
                    .collect())
            }
            Source::File(p) => {
                let f = load_field(p)?;
                let g = f.grid();
                if g.d != grid.d || g.nx != grid.nx || g.nv != grid.nv || g.x_period != grid.x_period || g.v_max != grid.v_max
                {
                    return Err(invalid(format!(
                        "field file {} does not match the configured phase grid",
                        p.display()
                    )));
                }
                Ok(f.slice(g.nt - 1).to_vec())
            }
        }
    }

    /// Coefficient function; files are interpolated multilinearly, with the
    /// time clamped to the stored range.
    pub fn coefficient(&self, dim: usize) -> Result<CoefFn> {
        match self {
            Source::Expr(e) => {
                let ex = Expression::parse(e, dim)?;
                Ok(coef(move |t, x, v| ex.eval(t, x, v)))
            }
            Source::File(p) => {
                let f = load_field(p)?;
                if f.grid().d != dim {
                    return Err(invalid(format!("coefficient file {} has dimension {}", p.display(), f.grid().d)));
                }
                Ok(coef(move |t, x, v| {
                    let g = f.grid();
                    let t = t.clamp(g.t_min, g.t_max);
                    KineticPoint::new(t, x, v)
                        .ok()
                        .and_then(|z| f.interpolate(&z))
                        .unwrap_or(f64::NAN)
                }))
            }
        }
    }
}
