//! Infinite-horizon LQR on the reduced model with projected state weights
//! and margin certification.

use super::{loop_margins, margins_pass, Controller, ControllerKind};
use crate::numerics::{solve_dare_with, symmetrize};
use crate::rom::ReducedModel;
use crate::{Config, Error, Mat, Result, Vector};
use alloc::format;

/// `q_i = 1 / Var(x_i)` from training snapshots, floored so unexcited states
/// do not produce unbounded weights.
pub fn inverse_variance_weights(x: &Mat) -> Vector {
    let n = x.nrows();
    let m = x.ncols() as f64;
    let mut var = Vector::zeros(n);
    for i in 0..n {
        let mean = x.row(i).sum() / m;
        let mut ss = 0.0;
        for j in 0..x.ncols() {
            let d = x[(i, j)] - mean;
            ss += d * d;
        }
        var[i] = ss / m;
    }
    let floor = var.max() * 1e-4 + 1e-300;
    Vector::from_fn(n, |i, _| 1.0 / var[i].max(floor))
}

/// LQR with `Q_r = Phi^T diag(q_x) Phi` and `R = rho I`. Fails when the
/// closed loop misses the spectral-radius bound or the design margins.
pub fn design_lqr(
    model: &ReducedModel,
    q_x: &Vector,
    rho: f64,
    bounds: (f64, f64),
    config: &Config,
) -> Result<Controller> {
    if !(rho > 0.0) {
        return Err(Error::domain(format!("rho must be positive, got {rho}")));
    }
    if q_x.len() != model.phi.nrows() {
        return Err(Error::dim(format!(
            "q_x has length {}, expected the full-order dimension {}",
            q_x.len(),
            model.phi.nrows()
        )));
    }
    let q_r = projected_state_weights(model, q_x);
    let m = model.inputs();
    let r_mat = Mat::identity(m, m) * rho;
    let sol = solve_dare_with(
        &model.a_d,
        &model.b_d,
        &q_r,
        &r_mat,
        config.dare_tol,
        config.dare_max_iter,
        config.dare_residual_max,
    )?;
    if sol.closed_loop_radius >= config.closed_loop_radius_max {
        return Err(Error::Synthesis(format!(
            "closed-loop spectral radius {:.4} exceeds {}",
            sol.closed_loop_radius, config.closed_loop_radius_max
        )));
    }
    let margins = loop_margins(model, &sol.k, config)?;
    if !margins_pass(&margins, m, config.gm_min_db, config.pm_min_deg, config.min_sv_min) {
        return Err(Error::Synthesis(format!(
            "margins below design thresholds (gm {:.2} dB, pm {:.1} deg, min_sv {:.3})",
            margins.gm_db, margins.pm_deg, margins.min_sv
        )));
    }
    Ok(Controller {
        kind: ControllerKind::Lqr,
        k: sol.k,
        p: sol.p,
        rho,
        q_x: q_x.clone(),
        bounds,
        margins,
        dare_residual: sol.residual,
        closed_loop_radius: sol.closed_loop_radius,
        mpc: None,
    })
}

pub(crate) fn projected_state_weights(model: &ReducedModel, q_x: &Vector) -> Mat {
    let weighted = Mat::from_fn(model.phi.nrows(), model.r(), |i, j| q_x[i] * model.phi[(i, j)]);
    symmetrize(&(model.phi.transpose() * weighted))
}
