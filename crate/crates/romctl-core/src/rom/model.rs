//! The reduced model produced by any of the construction routes, with its
//! propagation rule and stability certificates.

use super::{DeimData, RomMethod};
use crate::systems::VectorField;
use crate::{Mat, Vector};
use alloc::sync::Arc;
use serde::{Deserialize, Serialize};

/// Stability and basis certificates attached to a reduced model.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct StabilityCertificates {
    /// Continuous decay margin `-max Re lambda(A_r)` (from `ln|lambda_d| /
    /// T_s` when no continuous operators exist).
    pub cont_margin: f64,
    /// `1 - rho(A_d)`.
    pub disc_margin: f64,
    /// Whether the continuous margin clears `alpha_min = 0.05 / tau_fast`.
    /// Recorded as a diagnostic; the discrete margin is the gating check.
    pub cont_margin_ok: bool,
    /// Eigenvalues moved by radial clamping during stabilization.
    pub clamped: usize,
    /// `||Phi^T Phi - I||_F` for orthonormal bases, `||W T - I||_F`
    /// (bi-orthogonality) for balanced truncation.
    pub basis_residual: f64,
}

/// Nonlinear reduced dynamics: the Galerkin-projected vector field around the
/// stored equilibrium, with an optional interpolation shortcut for the
/// nonlinear residual. Assumes the input enters affinely.
pub struct ReducedField {
    pub field: Arc<dyn VectorField>,
    pub phi: Mat,
    pub x0: Vector,
    pub u0: Vector,
    /// Reduced linearization (deviation coordinates).
    pub a_r: Mat,
    pub b_r: Mat,
    /// Full-order linearization rows, used to strip the linear part off
    /// sampled components.
    pub a_lin: Mat,
    pub deim: Option<DeimData>,
    /// RK4 substeps per sampling period.
    pub substeps: usize,
}

impl ReducedField {
    /// dr/dt in reduced deviation coordinates.
    pub fn eval(&self, r: &Vector, u: &Vector) -> Vector {
        let dx = &self.phi * r;
        let x = &self.x0 + &dx;
        match &self.deim {
            Some(deim) => {
                // linear part exactly, nonlinear residual through interpolation
                let mut lin = &self.a_r * r + &self.b_r * (u - &self.u0);
                let proj = deim.projector.as_ref().expect("DEIM projector not attached");
                let q = deim.indices.len();
                let mut f_i = Vector::zeros(q);
                for (j, &idx) in deim.indices.iter().enumerate() {
                    let full = self.field.eval_component(&x, &self.u0, idx);
                    let linear_part = self.a_lin.row(idx).transpose().dot(&dx);
                    f_i[j] = full - linear_part;
                }
                lin += proj * f_i;
                lin
            }
            None => {
                let mut fx = Vector::zeros(self.field.dim());
                self.field.eval(&x, u, &mut fx);
                self.phi.transpose() * fx
            }
        }
    }

    /// One sampling period of RK4 on the reduced field.
    pub fn step(&self, r: &Vector, u: &Vector, t_s: f64) -> Vector {
        let dt = t_s / self.substeps as f64;
        let mut state = r.clone();
        for _ in 0..self.substeps {
            let k1 = self.eval(&state, u);
            let k2 = self.eval(&(&state + &k1 * (dt / 2.0)), u);
            let k3 = self.eval(&(&state + &k2 * (dt / 2.0)), u);
            let k4 = self.eval(&(&state + &k3 * dt), u);
            state += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
        }
        state
    }
}

impl core::fmt::Debug for ReducedField {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("ReducedField")
            .field("r", &self.phi.ncols())
            .field("deim", &self.deim.is_some())
            .field("substeps", &self.substeps)
            .finish()
    }
}

/// How the reduced state advances one sampling period.
#[derive(Debug)]
pub enum ReducedOrderDynamics {
    /// `r+ = A_d r + B_d u` (POD on linear plants, balanced truncation, DMD).
    Linear,
    /// Galerkin-projected nonlinear field integrated over `T_s`; the linear
    /// discrete pair remains available for control synthesis.
    Nonlinear(ReducedField),
}

/// Reduced-order model: basis, continuous and discrete operators, output
/// estimator, sampling period, and certificates.
#[derive(Debug)]
pub struct ReducedModel {
    pub method: RomMethod,
    /// Right basis/projection (N x r). Orthonormal for POD and DMD; the
    /// balanced right transformation (not orthonormal) for BT.
    pub phi: Mat,
    /// Left projection (r x N) when it differs from `phi^T` (BT only).
    pub left: Option<Mat>,
    /// Continuous reduced operators (absent for DMD).
    pub a_r: Option<Mat>,
    pub b_r: Option<Mat>,
    pub c_r: Mat,
    /// Discrete operators at `t_s`.
    pub a_d: Mat,
    pub b_d: Mat,
    /// Output-to-state estimator `G = (C_r^T C_r + reg I)^{-1} C_r^T`.
    pub g: Mat,
    pub estimator_kappa: f64,
    pub t_s: f64,
    pub t_s_adapted: bool,
    /// Retained-energy fraction of the construction criterion.
    pub energy_captured: f64,
    pub dynamics: ReducedOrderDynamics,
    pub certificates: StabilityCertificates,
}

impl ReducedModel {
    pub fn r(&self) -> usize {
        self.a_d.nrows()
    }
    pub fn inputs(&self) -> usize {
        self.b_d.ncols()
    }
    pub fn outputs(&self) -> usize {
        self.c_r.nrows()
    }

    /// Advances the reduced state one sampling period.
    pub fn step(&self, r: &Vector, u: &Vector) -> Vector {
        match &self.dynamics {
            ReducedOrderDynamics::Linear => &self.a_d * r + &self.b_d * u,
            ReducedOrderDynamics::Nonlinear(field) => field.step(r, u, self.t_s),
        }
    }

    pub fn output(&self, r: &Vector) -> Vector {
        &self.c_r * r
    }

    /// Projects a full-order state into reduced coordinates (left projection
    /// for BT, `Phi^T` otherwise). Nonlinear models project the deviation
    /// from equilibrium.
    pub fn project_state(&self, x: &Vector) -> Vector {
        let dx = match &self.dynamics {
            ReducedOrderDynamics::Nonlinear(f) => x - &f.x0,
            ReducedOrderDynamics::Linear => x.clone(),
        };
        match &self.left {
            Some(w) => w * dx,
            None => self.phi.transpose() * dx,
        }
    }

    /// Lifts a reduced state back to full-order coordinates.
    pub fn reconstruct(&self, r: &Vector) -> Vector {
        let x = &self.phi * r;
        match &self.dynamics {
            ReducedOrderDynamics::Nonlinear(f) => x + &f.x0,
            ReducedOrderDynamics::Linear => x,
        }
    }

    /// Orthonormal basis for the span of `phi` (identity for POD/DMD bases,
    /// thin QR for the balanced transformation).
    pub fn orthonormal_span(&self) -> Mat {
        if self.left.is_none() {
            self.phi.clone()
        } else {
            let r = self.phi.ncols();
            self.phi.clone().qr().q().columns(0, r).into_owned()
        }
    }

    pub fn is_nonlinear(&self) -> bool {
        matches!(self.dynamics, ReducedOrderDynamics::Nonlinear(_))
    }
}
