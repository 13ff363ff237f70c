//! Zero-order-hold discretization with the sampling-period bound, the
//! regularized output estimator, and stability certification with radial
//! eigenvalue clamping as the stabilization fallback.

use super::{ReducedModel, StabilityCertificates};
use crate::numerics::{clamp_spectral_radius, max_re_eigenvalue, spectral_radius, zoh_pair};
use crate::systems::SystemDescriptor;
use crate::{fmath, Config, Error, Mat, Result};
use alloc::format;

/// Discrete operators with the sampling period actually used.
#[derive(Debug, Clone)]
pub struct Discretized {
    pub a_d: Mat,
    pub b_d: Mat,
    pub t_s_used: f64,
    pub adapted: bool,
}

/// Sampling-period ceiling `min(frac tau_fast, 1 / (mult f_max))` for the
/// descriptor.
pub fn t_s_bound(descriptor: &SystemDescriptor, config: &Config) -> f64 {
    let by_tau = config.ts_tau_fast_frac * descriptor.time_constants.tau_fast;
    let by_fmax = 1.0 / (config.ts_fmax_mult * descriptor.f_max_hz());
    by_tau.min(by_fmax)
}

/// `A_d = e^{A_r T_s}`, `B_d = (int_0^{T_s} e^{A_r tau} dtau) B_r`. When the
/// requested period exceeds the descriptor bound it is shrunk to the bound
/// and flagged.
pub fn zoh_discretize(
    a_r: &Mat,
    b_r: &Mat,
    t_s: f64,
    descriptor: &SystemDescriptor,
    config: &Config,
) -> Result<Discretized> {
    if !(t_s > 0.0) {
        return Err(Error::domain(format!("T_s must be positive, got {t_s}")));
    }
    let bound = t_s_bound(descriptor, config);
    let (t_s_used, adapted) = if t_s > bound { (bound, true) } else { (t_s, false) };
    let (a_d, b_d) = zoh_pair(a_r, b_r, t_s_used)?;
    Ok(Discretized { a_d, b_d, t_s_used, adapted })
}

/// Regularized left inverse `G = (C_r^T C_r + reg I)^{-1} C_r^T` together
/// with the condition number of the regularized normal matrix.
pub fn output_estimator(c_r: &Mat, reg: f64) -> Result<(Mat, f64)> {
    if c_r.nrows() == 0 || c_r.ncols() == 0 {
        return Err(Error::dim("C_r is empty"));
    }
    let r = c_r.ncols();
    let normal = c_r.transpose() * c_r + Mat::identity(r, r) * reg;
    let mut eigs: alloc::vec::Vec<f64> =
        normal.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
    eigs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let kappa = eigs[r - 1] / eigs[0].max(1e-300);
    let g = normal
        .cholesky()
        .ok_or_else(|| Error::Conditioning("regularized normal matrix is not PD".into()))?
        .solve(&c_r.transpose());
    Ok((g, kappa))
}

/// Computes both stability margins and, when the discrete radius exceeds the
/// bound, clamps the offending eigenvalues radially to
/// `disc_radius_max - clamp_epsilon` and re-verifies. Errors if the model is
/// still outside the bound after one clamping pass.
pub fn certify_stability(
    model: &mut ReducedModel,
    descriptor: &SystemDescriptor,
    config: &Config,
) -> Result<()> {
    let mut clamped = 0;
    let mut rho = spectral_radius(&model.a_d);
    if rho >= config.disc_radius_max {
        let (a_clamped, moved) = clamp_spectral_radius(&model.a_d, config.clamp_target())?;
        model.a_d = a_clamped;
        clamped = moved;
        rho = spectral_radius(&model.a_d);
        if rho >= config.disc_radius_max {
            return Err(Error::Synthesis(format!(
                "spectral radius {rho:.6} still above {} after stabilization",
                config.disc_radius_max
            )));
        }
    }

    let cont_margin = match &model.a_r {
        Some(a_r) => -max_re_eigenvalue(a_r),
        // map the discrete spectrum back: max Re log(lambda)/T_s = ln(rho)/T_s
        None => -fmath::ln(rho.max(1e-300)) / model.t_s,
    };
    let alpha_min = config.cont_margin_frac / descriptor.time_constants.tau_fast;

    model.certificates = StabilityCertificates {
        cont_margin,
        disc_margin: 1.0 - rho,
        cont_margin_ok: cont_margin > alpha_min,
        clamped,
        basis_residual: model.certificates.basis_residual,
    };
    Ok(())
}
