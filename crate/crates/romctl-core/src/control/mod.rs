//! Controller synthesis on the reduced model: LQR and constrained MPC with
//! feedforward, saturation, and loop-margin certification.

mod law;
mod lqr;
pub(crate) mod margins;
mod mpc;
mod qp;

pub use law::{control_step, feedforward, StepOutcome};
pub use lqr::{design_lqr, inverse_variance_weights};
pub use margins::{loop_margins, margins_pass, Margins};
pub use mpc::{build_mpc_with_horizons, design_mpc, MpcData};
pub use qp::{solve_box_qp, QpResult};

use crate::{Mat, Vector};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ControllerKind {
    #[serde(rename = "LQR")]
    Lqr,
    #[serde(rename = "MPC")]
    Mpc,
}

impl core::fmt::Display for ControllerKind {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            ControllerKind::Lqr => write!(f, "LQR"),
            ControllerKind::Mpc => write!(f, "MPC"),
        }
    }
}

/// Synthesized controller: gain, Riccati solution, tuning parameters,
/// saturation bounds, and certified margins.
#[derive(Debug)]
pub struct Controller {
    pub kind: ControllerKind,
    /// Feedback gain (m x r).
    pub k: Mat,
    /// Riccati solution (r x r).
    pub p: Mat,
    /// Input penalty `R = rho I`.
    pub rho: f64,
    /// Diagonal full-state weights defining `Q_r = Phi^T diag(q_x) Phi`.
    pub q_x: Vector,
    /// Input box `(u_min, u_max)`.
    pub bounds: (f64, f64),
    pub margins: Margins,
    pub dare_residual: f64,
    pub closed_loop_radius: f64,
    /// Condensed-QP data for MPC controllers.
    pub mpc: Option<MpcData>,
}

impl Controller {
    pub fn clip(&self, u: &mut Vector) -> bool {
        let (lo, hi) = self.bounds;
        let mut hit = false;
        for v in u.iter_mut() {
            if *v < lo {
                *v = lo;
                hit = true;
            } else if *v > hi {
                *v = hi;
                hit = true;
            }
        }
        hit
    }
}
