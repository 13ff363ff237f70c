//! Online adaptation actions: recursive least-squares refresh of the
//! discrete operator (parametric drift), incremental basis enrichment
//! (subspace inadequacy), and controller retuning (control inadequacy).

use crate::control::{design_lqr, design_mpc, loop_margins, margins_pass, Controller, ControllerKind};
use crate::monitor::Verdict;
use crate::numerics::{truncated_svd, SvdTruncation};
use crate::rom::ReducedModel;
use crate::systems::SystemDescriptor;
use crate::{Config, Error, Mat, Result, Vector};
use alloc::format;
use alloc::string::String;

/// Recursive least-squares state over `theta = vec(A_d)` with exponential
/// forgetting. The input contribution `B_d u` is subtracted from the target
/// so the regression identifies `A_d` alone.
#[derive(Debug, Clone)]
pub struct RlsState {
    /// Column-major vec of the current `A_d` estimate (r^2 entries).
    pub theta: Vector,
    /// Covariance (r^2 x r^2).
    pub p_cov: Mat,
    pub lambda_forget: f64,
    pub updates: usize,
    pub covariance_resets: usize,
    r: usize,
    p0: f64,
}

impl RlsState {
    pub fn from_model(a_d: &Mat, p0: f64, lambda_forget: f64) -> Result<Self> {
        if !(0.9 < lambda_forget && lambda_forget <= 1.0) {
            return Err(Error::domain(format!(
                "forgetting factor must be in (0.9, 1], got {lambda_forget}"
            )));
        }
        let r = a_d.nrows();
        Ok(RlsState {
            theta: Vector::from_column_slice(a_d.as_slice()),
            p_cov: Mat::identity(r * r, r * r) * p0,
            lambda_forget,
            updates: 0,
            covariance_resets: 0,
            r,
            p0,
        })
    }

    /// Current operator estimate.
    pub fn a_d(&self) -> Mat {
        Mat::from_column_slice(self.r, self.r, self.theta.as_slice())
    }
}

/// One RLS step on the transition `(r_i, u_i) -> r_next`. Returns the
/// innovation. Covariance positive-definiteness is checked periodically; on
/// failure the covariance resets to its initial scale and the event is
/// counted.
pub fn rls_update(
    rls: &mut RlsState,
    r_i: &Vector,
    r_next: &Vector,
    u_i: &Vector,
    b_d: &Mat,
) -> Result<Vector> {
    let r = rls.r;
    if r_i.len() != r || r_next.len() != r || b_d.nrows() != r || u_i.len() != b_d.ncols() {
        return Err(Error::dim("RLS update dimension mismatch"));
    }
    // block regressor psi = kron(r_i^T, I_r), so psi * theta = A_d r_i
    let psi = Mat::from_fn(r, r * r, |i, c| if c % r == i { r_i[c / r] } else { 0.0 });
    let a_now = rls.a_d();
    let target = r_next - b_d * u_i;
    let innovation = &target - &a_now * r_i;

    let psi_p = &psi * &rls.p_cov; // r x r^2
    let s = &psi_p * psi.transpose() + Mat::identity(r, r) * rls.lambda_forget;
    let s_inv = s
        .cholesky()
        .ok_or_else(|| Error::Conditioning("RLS innovation covariance not PD".into()))?;
    let gain = s_inv.solve(&psi_p).transpose(); // r^2 x r
    rls.theta += &gain * &innovation;
    let p_new = (&rls.p_cov - &gain * &psi_p) / rls.lambda_forget;
    rls.p_cov = crate::numerics::symmetrize(&p_new);
    rls.updates += 1;

    // periodic positive-definiteness checkpoint
    if rls.updates % 50 == 0 && rls.p_cov.clone().cholesky().is_none() {
        rls.p_cov = Mat::identity(r * r, r * r) * rls.p0;
        rls.covariance_resets += 1;
    }
    Ok(innovation)
}

/// Result of a basis enrichment attempt.
#[derive(Debug, Clone)]
pub struct EnrichOutcome {
    pub phi_new: Mat,
    pub added: usize,
    /// The recent data was already inside the span (no direction added).
    pub noop: bool,
}

/// Appends the leading directions of the component of `x_recent` orthogonal
/// to `phi`, capturing `energy_tol` of the residual energy, capped at
/// `r_max` total columns. The result is re-orthonormalized.
pub fn enrich_basis(phi: &Mat, x_recent: &Mat, energy_tol: f64, r_max: usize) -> Result<EnrichOutcome> {
    let r = phi.ncols();
    let ortho_res = (phi.transpose() * phi - Mat::identity(r, r)).norm();
    if ortho_res > 1e-8 {
        return Err(Error::domain(format!(
            "basis is not orthonormal (residual {ortho_res:.2e})"
        )));
    }
    if x_recent.nrows() != phi.nrows() {
        return Err(Error::dim("snapshot rows do not match the basis"));
    }
    let residual = x_recent - phi * (phi.transpose() * x_recent);
    let scale = x_recent.norm().max(1.0);
    if residual.norm() <= 1e-12 * scale {
        return Ok(EnrichOutcome { phi_new: phi.clone(), added: 0, noop: true });
    }

    let svd = truncated_svd(&residual, SvdTruncation::Energy(energy_tol))?;
    let budget = r_max.saturating_sub(r);
    let take = svd.rank.min(budget);
    if take == 0 {
        return Ok(EnrichOutcome { phi_new: phi.clone(), added: 0, noop: true });
    }

    let mut phi_new = Mat::zeros(phi.nrows(), r + take);
    phi_new.columns_mut(0, r).copy_from(phi);
    let mut col = r;
    for j in 0..take {
        let mut v = svd.u.column(j).into_owned();
        // two rounds of Gram-Schmidt against everything accepted so far
        for _ in 0..2 {
            let current = phi_new.columns(0, col);
            let coeffs = current.transpose() * &v;
            v -= current * coeffs;
        }
        let norm = v.norm();
        if norm > 1e-10 {
            phi_new.set_column(col, &(v / norm));
            col += 1;
        }
    }
    let phi_new = phi_new.columns(0, col).into_owned();
    let added = col - r;
    let final_res = (phi_new.transpose() * &phi_new - Mat::identity(col, col)).norm();
    if final_res > 1e-10 {
        return Err(Error::Conditioning(format!(
            "enriched basis lost orthonormality (residual {final_res:.2e})"
        )));
    }
    Ok(EnrichOutcome { phi_new, added, noop: added == 0 })
}

/// Retuning outcome: a fresh controller, or escalation after repeated
/// failures.
#[derive(Debug)]
pub enum RetuneOutcome {
    Retuned { controller: Controller, rho_before: f64, rho_after: f64 },
    Escalate { reason: String },
}

/// Adjusts the input penalty per the verdict's sub-diagnosis
/// (saturation-limited: `rho <- 0.7 rho`; margin-limited: `rho <- 1.3 rho`)
/// and re-runs synthesis. `failed_attempts` counts earlier failures; at
/// `config.retune_max_attempts` the call escalates instead of retrying.
pub fn retune(
    ctrl: &Controller,
    verdict: &Verdict,
    model: &ReducedModel,
    descriptor: &SystemDescriptor,
    failed_attempts: usize,
    config: &Config,
) -> Result<RetuneOutcome> {
    if failed_attempts >= config.retune_max_attempts {
        return Ok(RetuneOutcome::Escalate {
            reason: format!(
                "controller retuning failed {failed_attempts} times; requesting controller-type reconsideration"
            ),
        });
    }
    let saturation_limited = verdict.diagnostics.s_avg > config.sat_high;
    let rho_after = if saturation_limited {
        ctrl.rho * config.retune_saturation_factor
    } else {
        ctrl.rho * config.retune_margin_factor
    };
    let result = match ctrl.kind {
        ControllerKind::Lqr => design_lqr(model, &ctrl.q_x, rho_after, ctrl.bounds, config),
        ControllerKind::Mpc => design_mpc(model, descriptor, &ctrl.q_x, rho_after, config),
    };
    match result {
        Ok(controller) => Ok(RetuneOutcome::Retuned { controller, rho_before: ctrl.rho, rho_after }),
        Err(e) => Ok(RetuneOutcome::Escalate { reason: format!("retuning synthesis failed: {e}") }),
    }
}

/// Decision after an operator update.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GateDecision {
    Accept,
    RecomputeGain,
}

/// Re-checks the existing gain against freshly updated operators; triggers a
/// gain recomputation when the loop margins degrade below the adaptation
/// thresholds.
pub fn post_update_gate(model: &ReducedModel, ctrl: &Controller, config: &Config) -> Result<GateDecision> {
    let margins = loop_margins(model, &ctrl.k, config)?;
    let ok = margins_pass(
        &margins,
        model.inputs(),
        config.gm_adapt_db,
        config.pm_adapt_deg,
        config.min_sv_min,
    );
    Ok(if ok { GateDecision::Accept } else { GateDecision::RecomputeGain })
}
