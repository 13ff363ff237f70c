//! Condensed MPC: moves over the control horizon with the infinite-horizon
//! Riccati cost closing the tail, box input constraints, and optional box
//! constraints on selected full-order state components handled by dual
//! ascent.

use super::lqr::projected_state_weights;
use super::{loop_margins, margins_pass, solve_box_qp, Controller, ControllerKind};
use crate::numerics::solve_dare_with;
use crate::rom::ReducedModel;
use crate::systems::{StateBound, SystemDescriptor};
use crate::{Config, Error, Mat, Result, Vector};
use alloc::format;
use alloc::vec::Vec;

/// One full-order state box expanded over the horizon, in condensed form:
/// the constrained component at stage `i` is
/// `rows_g[i] . dU + rows_s[i] . e0 + phi_row . r_ref`.
#[derive(Debug, Clone)]
pub struct StateRowData {
    pub rows_g: Mat,
    pub rows_s: Mat,
    pub phi_row: Vector,
    pub lo: f64,
    pub hi: f64,
}

/// Condensed prediction data for the per-step QP.
#[derive(Debug, Clone)]
pub struct MpcData {
    pub n_p: usize,
    pub n_c: usize,
    /// Condensed Hessian over the stacked moves (N_c m x N_c m).
    pub h: Mat,
    /// Largest Hessian eigenvalue (projected-gradient step size).
    pub lipschitz: f64,
    /// Linear-term map: `f = f_map e0`.
    pub f_map: Mat,
    /// Stacked error prediction `E = pred_s e0 + pred_t dU`.
    pub pred_s: Mat,
    pub pred_t: Mat,
    /// Terminal Riccati cost.
    pub p_inf: Mat,
    pub state_rows: Vec<StateRowData>,
}

/// MPC with horizons from the slowest reduced mode:
/// `N_p = ceil(3 tau_settled / T_s)` (capped), `N_c = ceil(N_p / 3)`,
/// `tau_settled = 4 / alpha` with `alpha` the slowest decay rate.
pub fn design_mpc(
    model: &ReducedModel,
    descriptor: &SystemDescriptor,
    q_x: &Vector,
    rho: f64,
    config: &Config,
) -> Result<Controller> {
    let alpha = model.certificates.cont_margin.max(1e-6);
    let tau_settled = 4.0 / alpha;
    let n_p = ((3.0 * tau_settled / model.t_s).ceil() as usize).clamp(3, config.mpc_np_cap);
    let n_c = n_p.div_ceil(3).max(1);
    let bounds = (
        descriptor.constraints.input_bounds.u_min,
        descriptor.constraints.input_bounds.u_max,
    );
    let state_bounds = descriptor.constraints.state_bounds.clone().unwrap_or_default();
    let mut ctrl =
        build_mpc_with_horizons(model, q_x, rho, n_p, n_c, bounds, &state_bounds, config)?;

    // design-time feasibility probe at a representative reference deviation
    let amp = descriptor.control_objective.reference_amplitude.unwrap_or(1.0);
    let e0 = &model.g * Vector::from_element(model.outputs(), amp);
    let zero_ref = Vector::zeros(model.r());
    let mpc = ctrl.mpc.as_ref().expect("MPC data present");
    for sign in [1.0, -1.0] {
        let probe = solve_step(
            &ctrl,
            mpc,
            &(&e0 * sign),
            &zero_ref,
            &Vector::zeros(model.inputs()),
            config,
        )?;
        if !probe.converged {
            return Err(Error::Synthesis(format!(
                "infeasible at design-time probe: residual {:.3e} after {} iterations",
                probe.kkt_residual, probe.iters
            )));
        }
    }

    let margins = loop_margins(model, &ctrl.k, config)?;
    if !margins_pass(&margins, model.inputs(), config.gm_min_db, config.pm_min_deg, config.min_sv_min)
    {
        return Err(Error::Synthesis(format!(
            "margins below design thresholds (gm {:.2} dB, pm {:.1} deg, min_sv {:.3})",
            margins.gm_db, margins.pm_deg, margins.min_sv
        )));
    }
    ctrl.margins = margins;
    Ok(ctrl)
}

/// Builds the condensed QP for explicit horizons. The tail beyond `N_c`
/// follows the unconstrained Riccati law, which makes the terminal cost
/// exact and the unconstrained first move identical to LQR.
#[allow(clippy::too_many_arguments)]
pub fn build_mpc_with_horizons(
    model: &ReducedModel,
    q_x: &Vector,
    rho: f64,
    n_p: usize,
    n_c: usize,
    bounds: (f64, f64),
    state_bounds: &[StateBound],
    config: &Config,
) -> Result<Controller> {
    if !(rho > 0.0) {
        return Err(Error::domain("rho must be positive"));
    }
    if n_c == 0 || n_c > n_p {
        return Err(Error::domain(format!("need 1 <= N_c <= N_p, got N_c={n_c}, N_p={n_p}")));
    }
    let r = model.r();
    let m = model.inputs();
    let q_r = projected_state_weights(model, q_x);
    let r_mat = Mat::identity(m, m) * rho;
    let dare = solve_dare_with(
        &model.a_d,
        &model.b_d,
        &q_r,
        &r_mat,
        config.dare_tol,
        config.dare_max_iter,
        config.dare_residual_max,
    )?;
    if dare.closed_loop_radius >= config.closed_loop_radius_max {
        return Err(Error::Synthesis(format!(
            "closed-loop spectral radius {:.4} exceeds {}",
            dare.closed_loop_radius, config.closed_loop_radius_max
        )));
    }

    // prediction over the control horizon: E = pred_s e0 + pred_t dU
    let mut pred_s = Mat::zeros(n_c * r, r);
    let mut pred_t = Mat::zeros(n_c * r, n_c * m);
    let mut a_pow = model.a_d.clone();
    for i in 0..n_c {
        pred_s.view_mut((i * r, 0), (r, r)).copy_from(&a_pow);
        a_pow = &model.a_d * &a_pow;
    }
    for i in 0..n_c {
        let mut block = model.b_d.clone();
        for j in (0..=i).rev() {
            pred_t.view_mut((i * r, j * m), (r, m)).copy_from(&block);
            block = &model.a_d * &block;
        }
    }

    // stage weights: Q_r through N_c - 1, Riccati terminal at N_c
    let mut q_bar = Mat::zeros(n_c * r, n_c * r);
    for i in 0..n_c.saturating_sub(1) {
        q_bar.view_mut((i * r, i * r), (r, r)).copy_from(&q_r);
    }
    q_bar
        .view_mut(((n_c - 1) * r, (n_c - 1) * r), (r, r))
        .copy_from(&dare.p);

    let h = {
        let h_raw =
            pred_t.transpose() * &q_bar * &pred_t + Mat::identity(n_c * m, n_c * m) * rho;
        crate::numerics::symmetrize(&(h_raw * 2.0))
    };
    let f_map = pred_t.transpose() * &q_bar * &pred_s * 2.0;
    let lipschitz = h.clone().symmetric_eigen().eigenvalues.max();

    let state_rows = state_bounds
        .iter()
        .map(|sb| {
            if sb.index >= model.phi.nrows() {
                return Err(Error::dim(format!(
                    "state bound index {} exceeds the full-order dimension {}",
                    sb.index,
                    model.phi.nrows()
                )));
            }
            let phi_row = model.phi.row(sb.index).transpose();
            let mut rows_g = Mat::zeros(n_c, n_c * m);
            let mut rows_s = Mat::zeros(n_c, r);
            for stage in 0..n_c {
                let tg = phi_row.transpose() * pred_t.rows(stage * r, r);
                rows_g.row_mut(stage).copy_from(&tg);
                let sg = phi_row.transpose() * pred_s.rows(stage * r, r);
                rows_s.row_mut(stage).copy_from(&sg);
            }
            Ok(StateRowData { rows_g, rows_s, phi_row, lo: sb.lo, hi: sb.hi })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(Controller {
        kind: ControllerKind::Mpc,
        k: dare.k,
        p: dare.p.clone(),
        rho,
        q_x: q_x.clone(),
        bounds,
        margins: super::Margins {
            gm_db: f64::INFINITY,
            pm_deg: f64::INFINITY,
            min_sv: f64::INFINITY,
            crossover_found: false,
        },
        dare_residual: dare.residual,
        closed_loop_radius: dare.closed_loop_radius,
        mpc: Some(MpcData {
            n_p,
            n_c,
            h,
            lipschitz,
            f_map,
            pred_s,
            pred_t,
            p_inf: dare.p,
            state_rows,
        }),
    })
}

#[derive(Debug, Clone)]
pub(crate) struct MpcStep {
    pub du0: Vector,
    pub iters: usize,
    pub converged: bool,
    pub kkt_residual: f64,
}

/// Solves the per-step QP: error state `e0`, reference `r_ref` (for state
/// boxes), and feedforward `u_ff` shaping the move box.
pub(crate) fn solve_step(
    ctrl: &Controller,
    mpc: &MpcData,
    e0: &Vector,
    r_ref: &Vector,
    u_ff: &Vector,
    config: &Config,
) -> Result<MpcStep> {
    let m = u_ff.len();
    let nv = mpc.n_c * m;
    let f_base = &mpc.f_map * e0;
    let mut lo = Vector::zeros(nv);
    let mut hi = Vector::zeros(nv);
    for i in 0..mpc.n_c {
        for ch in 0..m {
            lo[i * m + ch] = ctrl.bounds.0 - u_ff[ch];
            hi[i * m + ch] = ctrl.bounds.1 - u_ff[ch];
        }
    }
    for i in 0..nv {
        if lo[i] > hi[i] {
            return Err(Error::Synthesis("feedforward leaves an empty input box".into()));
        }
    }

    if mpc.state_rows.is_empty() {
        let sol = solve_box_qp(
            &mpc.h,
            &f_base,
            &lo,
            &hi,
            &Vector::zeros(nv),
            mpc.lipschitz,
            config.qp_tol,
            config.qp_max_iter,
        );
        return Ok(MpcStep {
            du0: sol.x.rows(0, m).into_owned(),
            iters: sol.iters,
            converged: sol.converged,
            kkt_residual: sol.kkt_residual,
        });
    }

    // stack g z <= h over all bounds and stages
    let rows_total: usize = mpc.state_rows.len() * 2 * mpc.n_c;
    let mut g_mat = Mat::zeros(rows_total, nv);
    let mut h_vec = Vector::zeros(rows_total);
    let mut row = 0;
    for sr in &mpc.state_rows {
        let offset_ref = sr.phi_row.dot(r_ref);
        let base = &sr.rows_s * e0;
        for stage in 0..mpc.n_c {
            g_mat.row_mut(row).copy_from(&sr.rows_g.row(stage));
            h_vec[row] = sr.hi - base[stage] - offset_ref;
            row += 1;
            g_mat.row_mut(row).copy_from(&(-sr.rows_g.row(stage)));
            h_vec[row] = -(sr.lo - base[stage] - offset_ref);
            row += 1;
        }
    }

    let mut lambda = Vector::zeros(rows_total);
    let mut sigma = 1.0_f64;
    let mut z = Vector::zeros(nv);
    let mut total_iters = 0;
    let mut last_violation = f64::INFINITY;
    for _ in 0..30 {
        let f = &f_base + g_mat.transpose() * &lambda;
        let sol =
            solve_box_qp(&mpc.h, &f, &lo, &hi, &z, mpc.lipschitz, config.qp_tol, config.qp_max_iter);
        total_iters += sol.iters;
        z = sol.x;
        let slack = &g_mat * &z - &h_vec;
        let violation = slack.iter().copied().fold(0.0f64, f64::max);
        if violation <= 1e-6 {
            return Ok(MpcStep {
                du0: z.rows(0, m).into_owned(),
                iters: total_iters,
                converged: sol.converged,
                kkt_residual: sol.kkt_residual.max(violation.max(0.0)),
            });
        }
        for i in 0..rows_total {
            lambda[i] = (lambda[i] + sigma * slack[i]).max(0.0);
        }
        if violation > 0.9 * last_violation {
            sigma *= 2.0;
        }
        last_violation = violation;
    }
    Ok(MpcStep {
        du0: z.rows(0, m).into_owned(),
        iters: total_iters,
        converged: false,
        kkt_residual: last_violation,
    })
}
