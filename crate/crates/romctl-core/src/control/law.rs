//! The per-step control law: reference feedforward, feedback on the state
//! estimate, saturation. MPC kinds solve the condensed QP and fall back to
//! the saturated LQR move when the solver hits its iteration cap.

use super::{Controller, ControllerKind};
use crate::rom::ReducedModel;
use crate::{Config, Error, Result, Vector};
use alloc::format;

/// Applied input plus solver diagnostics for the step log.
#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub u: Vector,
    pub u_ff: Vector,
    pub saturated: bool,
    pub qp_iters: usize,
    pub qp_fallback: bool,
}

/// Reference feedforward `u_ff = B_d^+ (r_ref(k+1) - A_d r_ref(k))`; the
/// pseudo-inverse handles non-square input maps, exact whenever the residual
/// lies in range(B_d).
pub fn feedforward(model: &ReducedModel, r_ref_next: &Vector, r_ref_now: &Vector) -> Result<Vector> {
    if r_ref_now.len() != model.r() || r_ref_next.len() != model.r() {
        return Err(Error::dim(format!(
            "reference length {} does not match the reduced dimension {}",
            r_ref_now.len(),
            model.r()
        )));
    }
    let target = r_ref_next - &model.a_d * r_ref_now;
    let smax = model.b_d.clone().singular_values().max();
    let pinv = model
        .b_d
        .clone()
        .pseudo_inverse(smax * 1e-12)
        .map_err(|e| Error::Conditioning(format!("B_d pseudo-inverse failed: {e}")))?;
    Ok(pinv * target)
}

/// One control step: `u = clip(u_ff - K (r_hat - r_ref))` for LQR, the first
/// QP move for MPC.
pub fn control_step(
    ctrl: &Controller,
    model: &ReducedModel,
    r_hat: &Vector,
    r_ref: &Vector,
    r_ref_next: &Vector,
    config: &Config,
) -> Result<StepOutcome> {
    if r_hat.len() != model.r() {
        return Err(Error::dim("state estimate length mismatch"));
    }
    let u_ff = feedforward(model, r_ref_next, r_ref)?;
    let e = r_hat - r_ref;
    match ctrl.kind {
        ControllerKind::Lqr => {
            let mut u = &u_ff - &ctrl.k * e;
            let saturated = ctrl.clip(&mut u);
            Ok(StepOutcome { u, u_ff, saturated, qp_iters: 0, qp_fallback: false })
        }
        ControllerKind::Mpc => {
            let mpc = ctrl.mpc.as_ref().ok_or_else(|| {
                Error::Synthesis("MPC controller is missing its condensed data".into())
            })?;
            // clamp the feedforward into the box first so the move box is
            // never empty
            let mut u_ff_boxed = u_ff.clone();
            ctrl.clip(&mut u_ff_boxed);
            let step = super::mpc::solve_step(ctrl, mpc, &e, r_ref, &u_ff_boxed, config)?;
            if step.converged {
                let mut u = &u_ff_boxed + &step.du0;
                let saturated = ctrl.clip(&mut u);
                Ok(StepOutcome {
                    u,
                    u_ff,
                    saturated,
                    qp_iters: step.iters,
                    qp_fallback: false,
                })
            } else {
                // saturated LQR fallback, flagged for the step log
                let mut u = &u_ff_boxed - &ctrl.k * e;
                ctrl.clip(&mut u);
                Ok(StepOutcome { u, u_ff, saturated: true, qp_iters: step.iters, qp_fallback: true })
            }
        }
    }
}
