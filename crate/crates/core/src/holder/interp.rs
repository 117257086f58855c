//! Numerical check of the interpolation inequalities
//! `‖Dg‖ ≤ ε[g]_{C^{2+α}} + C ε^{−γ} ‖g‖_{L∞}`.

use serde::{Deserialize, Serialize};

use super::{domain_nodes, estimate_seminorm, FitKind, HolderOrder, ScanParams};
use crate::error::{Error, Result};
use crate::fields::{finite_difference, Derivative, Field};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InterpolationRow {
    pub quantity: String,
    pub epsilon: f64,
    pub lhs: f64,
    pub gamma: f64,
    pub best_c: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InterpolationReport {
    pub alpha: f64,
    pub seminorm_2_alpha: f64,
    pub sup_norm: f64,
    pub rows: Vec<InterpolationRow>,
    /// Quantities whose required `L∞` coefficient `C ε^{−γ}` grows with ε.
    pub violations: Vec<String>,
}

impl InterpolationReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("quantity,epsilon,best_c\n");
        for r in &self.rows {
            s.push_str(&format!("{},{},{}\n", r.quantity, r.epsilon, r.best_c));
        }
        s
    }
}

/// `γ = (k+β)/((2+α)−(k+β))` for a derivative of kinetic order `k` measured in `C^β`.
pub fn interpolation_exponent(k: u32, beta: f64, alpha: f64) -> f64 {
    let kb = k as f64 + beta;
    kb / ((2.0 + alpha) - kb)
}

fn sup_over(field: &Field, nodes: &[usize]) -> f64 {
    nodes.iter().fold(0.0, |m, &i| m.max(field.data()[i].abs()))
}

pub fn check_interpolation(
    field: &Field,
    alpha: f64,
    epsilons: &[f64],
    params: &ScanParams,
) -> Result<InterpolationReport> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!("alpha must lie in (0,1), got {alpha}")));
    }
    if epsilons.iter().any(|e| !(*e > 0.0)) {
        return Err(Error::InvalidParameter("epsilons must be positive".into()));
    }
    let grid = field.grid();
    let d = grid.d;
    let nodes = domain_nodes(grid, &params.domain);
    let sup_g = sup_over(field, &nodes);
    let order_a = HolderOrder::new(alpha)?;
    let semi = estimate_seminorm(field, HolderOrder::new(2.0 + alpha)?, FitKind::TaylorRemainder, params)?
        .seminorm;

    let dv: Vec<Field> = (0..d)
        .map(|i| finite_difference(field, Derivative::V(i)))
        .collect::<Result<_>>()?;
    let euclid_sup = |parts: &[Field]| {
        nodes
            .iter()
            .map(|&n| parts.iter().map(|f| f.data()[n].powi(2)).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
    };
    let mut dvv = Vec::new();
    for i in 0..d {
        for j in 0..d {
            dvv.push(finite_difference(field, Derivative::VV(i, j))?);
        }
    }
    let transport = finite_difference(field, Derivative::Transport)?;

    let holder_g = estimate_seminorm(field, order_a, FitKind::TaylorRemainder, params)?.seminorm;
    let mut holder_dv = 0.0f64;
    for f in &dv {
        holder_dv = holder_dv.max(estimate_seminorm(f, order_a, FitKind::TaylorRemainder, params)?.seminorm);
    }

    let quantities: [(&str, u32, f64, f64); 5] = [
        ("holder_alpha_g", 0, alpha, holder_g),
        ("sup_grad_v", 1, 0.0, euclid_sup(&dv)),
        ("holder_alpha_grad_v", 1, alpha, holder_dv),
        ("sup_hess_v", 2, 0.0, euclid_sup(&dvv)),
        ("sup_transport", 2, 0.0, sup_over(&transport, &nodes)),
    ];

    let mut eps: Vec<f64> = epsilons.to_vec();
    eps.sort_by(f64::total_cmp);
    let mut rows = Vec::new();
    let mut violations = Vec::new();
    for (name, k, beta, lhs) in quantities {
        let gamma = interpolation_exponent(k, beta, alpha);
        let mut prev_need = f64::INFINITY;
        let mut monotone = true;
        for &e in &eps {
            let need = (lhs - e * semi).max(0.0);
            let best_c = if sup_g > 0.0 { need * e.powf(gamma) / sup_g } else { 0.0 };
            if need > prev_need * (1.0 + 1e-12) {
                monotone = false;
            }
            prev_need = need;
            rows.push(InterpolationRow {
                quantity: name.to_string(),
                epsilon: e,
                lhs,
                gamma,
                best_c,
            });
        }
        if !monotone {
            violations.push(name.to_string());
        }
    }
    Ok(InterpolationReport {
        alpha,
        seminorm_2_alpha: semi,
        sup_norm: sup_g,
        rows,
        violations,
    })
}
