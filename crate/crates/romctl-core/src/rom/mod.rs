//! Reduced-order model construction, discretization, stability
//! certification, and fidelity validation.

mod build;
mod deim;
mod discretize;
mod model;
mod validate;

pub use build::{build_balanced_truncation, build_dmd, build_pod_galerkin, hankel_singular_values, OrderRange};
pub use deim::{build_deim, DeimData};
pub use discretize::{certify_stability, output_estimator, zoh_discretize, Discretized};
pub use model::{ReducedField, ReducedModel, ReducedOrderDynamics, StabilityCertificates};
pub use validate::{simulate_reduced, validate_rom, RomReport};

use serde::{Deserialize, Serialize};

/// Reduction method. Serialized names follow the persisted message schema.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RomMethod {
    #[serde(rename = "POD-Galerkin")]
    PodGalerkin,
    #[serde(rename = "balanced_truncation")]
    BalancedTruncation,
    #[serde(rename = "DMD")]
    Dmd,
}

impl core::fmt::Display for RomMethod {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            RomMethod::PodGalerkin => write!(f, "POD-Galerkin"),
            RomMethod::BalancedTruncation => write!(f, "balanced_truncation"),
            RomMethod::Dmd => write!(f, "DMD"),
        }
    }
}
