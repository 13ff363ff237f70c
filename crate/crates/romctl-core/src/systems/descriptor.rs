//! Structured problem descriptor: the machine-readable stand-in for a
//! natural-language problem statement. Field names follow the persisted
//! message schema so descriptor files round-trip through serde untouched.

use crate::{Error, Result};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SystemType {
    ParabolicPde,
    HyperbolicPde,
    EllipticPde,
    OdeSystem,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Physics {
    Thermal,
    StructuralDynamics,
    Fluid,
    Chemical,
    Electromagnetic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LinearityKind {
    #[serde(rename = "LTI")]
    Lti,
    #[serde(rename = "LTV")]
    Ltv,
    #[serde(rename = "nonlinear")]
    Nonlinear,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct NonlinearityDetails {
    #[serde(default)]
    pub time_varying: bool,
    #[serde(default)]
    pub nonlinear_terms: Vec<String>,
    #[serde(default)]
    pub polynomial_degree: Option<u32>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Linearity {
    #[serde(rename = "type")]
    pub kind: LinearityKind,
    #[serde(default)]
    pub details: Option<NonlinearityDetails>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Dimensions {
    #[serde(rename = "N")]
    pub n: usize,
    pub m: usize,
    pub p: usize,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TimeConstants {
    pub tau_slow: f64,
    pub tau_fast: f64,
    #[serde(default)]
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectiveKind {
    Tracking,
    Regulation,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ControlObjective {
    #[serde(rename = "type")]
    pub kind: ObjectiveKind,
    pub error_tolerance: f64,
    /// Typical commanded setpoint magnitude in output units; feeds the
    /// constraint-tightness heuristic that decides between LQR and MPC.
    #[serde(default)]
    pub reference_amplitude: Option<f64>,
    /// Estimated steady input per unit of commanded output, when known.
    #[serde(default)]
    pub input_per_output: Option<f64>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct InputBounds {
    pub u_min: f64,
    pub u_max: f64,
}

/// Box constraint on one full-order state component.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct StateBound {
    pub index: usize,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Constraints {
    pub input_bounds: InputBounds,
    #[serde(default)]
    pub state_bounds: Option<Vec<StateBound>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SamplingRequirements {
    pub f_s_recommended_hz: f64,
    #[serde(default)]
    pub dt_s: Option<f64>,
}

/// Structured system descriptor consumed by the design pipeline.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SystemDescriptor {
    pub system_type: SystemType,
    pub physics: Physics,
    pub linearity: Linearity,
    pub dimensions: Dimensions,
    pub time_constants: TimeConstants,
    #[serde(default)]
    pub sampling_requirements: Option<SamplingRequirements>,
    pub control_objective: ControlObjective,
    pub constraints: Constraints,
}

impl SystemDescriptor {
    pub fn validate(&self) -> Result<()> {
        let d = &self.dimensions;
        if d.n < 1 || d.m < 1 || d.p < 1 {
            return Err(Error::domain("dimensions must all be at least 1"));
        }
        let t = &self.time_constants;
        if !(t.tau_fast > 0.0 && t.tau_fast <= t.tau_slow) {
            return Err(Error::domain(format!(
                "time constants must satisfy 0 < tau_fast <= tau_slow, got ({}, {})",
                t.tau_fast, t.tau_slow
            )));
        }
        let b = &self.constraints.input_bounds;
        if !(b.u_min < b.u_max) {
            return Err(Error::domain(format!(
                "input bounds must satisfy u_min < u_max, got [{}, {}]",
                b.u_min, b.u_max
            )));
        }
        Ok(())
    }

    /// Highest system frequency in Hz: `f_max = 1 / (2 pi tau_fast)`.
    pub fn f_max_hz(&self) -> f64 {
        1.0 / (2.0 * core::f64::consts::PI * self.time_constants.tau_fast)
    }

    /// Bandwidth in rad/s.
    pub fn omega_max(&self) -> f64 {
        1.0 / self.time_constants.tau_fast
    }

    /// Sampling frequency: the recommended value when one is given and fast
    /// enough, otherwise the `20 f_max` floor.
    pub fn f_s_hz(&self) -> f64 {
        let floor = 20.0 * self.f_max_hz();
        match &self.sampling_requirements {
            Some(s) if s.f_s_recommended_hz >= floor => s.f_s_recommended_hz,
            _ => floor,
        }
    }

    /// Symmetric actuation amplitude available inside the input box.
    pub fn input_amplitude(&self) -> f64 {
        let b = &self.constraints.input_bounds;
        b.u_max.min(-b.u_min).max(0.0)
    }

    pub fn is_nonlinear(&self) -> bool {
        self.linearity.kind == LinearityKind::Nonlinear
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn sample(n: usize, m: usize, p: usize) -> SystemDescriptor {
        SystemDescriptor {
            system_type: SystemType::ParabolicPde,
            physics: Physics::Thermal,
            linearity: Linearity { kind: LinearityKind::Lti, details: None },
            dimensions: Dimensions { n, m, p },
            time_constants: TimeConstants { tau_slow: 30.0, tau_fast: 10.0, ratio: None },
            sampling_requirements: None,
            control_objective: ControlObjective {
                kind: ObjectiveKind::Tracking,
                error_tolerance: 0.02,
                reference_amplitude: Some(1.0),
                input_per_output: None,
            },
            constraints: Constraints {
                input_bounds: InputBounds { u_min: -5.0, u_max: 5.0 },
                state_bounds: None,
            },
        }
    }

    #[test]
    fn validation_and_derived_quantities() {
        let d = sample(100, 2, 4);
        d.validate().unwrap();
        let f_max = 1.0 / (2.0 * core::f64::consts::PI * 10.0);
        approx::assert_relative_eq!(d.f_max_hz(), f_max, epsilon = 1e-15);
        approx::assert_relative_eq!(d.f_s_hz(), 20.0 * f_max, epsilon = 1e-15);
        approx::assert_relative_eq!(d.input_amplitude(), 5.0);

        let mut bad = sample(100, 2, 4);
        bad.time_constants.tau_fast = 40.0;
        assert!(bad.validate().is_err());
    }

    #[test]
    fn serde_field_names_match_schema() {
        let d = sample(5177, 7, 6);
        // serialize through serde_json-compatible names via serde's derive
        let s = serde_json_str(&d);
        for key in [
            "\"system_type\":\"parabolic_pde\"",
            "\"physics\":\"thermal\"",
            "\"N\":5177",
            "\"tau_slow\":30.0",
            "\"u_max\":5.0",
            "\"type\":\"LTI\"",
        ] {
            assert!(s.contains(key), "missing {key} in {s}");
        }
    }

    fn serde_json_str<T: serde::Serialize>(v: &T) -> alloc::string::String {
        // minimal JSON writer via serde's test-only dependency-free route
        serde_json::to_string(v).unwrap()
    }
}
