//! Deterministic method selection: the decision table mapping a system
//! descriptor to a reduction method and controller type.

use crate::control::ControllerKind;
use crate::rom::{OrderRange, RomMethod};
use crate::systems::{LinearityKind, SystemDescriptor, SystemType};
use crate::{Config, Error, Result};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

/// Resolved method selections and derived sampling parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MethodSelection {
    pub rom_method: RomMethod,
    pub controller_type: ControllerKind,
    pub rom_rationale: String,
    pub controller_rationale: String,
    pub rom_order_range: OrderRange,
    pub f_s_hz: f64,
    pub t_s: f64,
}

/// Ordered method preferences for the descriptor's system class.
fn method_preferences(descriptor: &SystemDescriptor, config: &Config) -> Vec<(RomMethod, String)> {
    let n = descriptor.dimensions.n;
    if descriptor.is_nonlinear() {
        return alloc::vec![
            (
                RomMethod::PodGalerkin,
                "energy-dominant nonlinear dynamics; Galerkin projection with interpolated nonlinearity".into()
            ),
            (RomMethod::Dmd, "data-driven linear surrogate fallback".into()),
        ];
    }
    match descriptor.system_type {
        SystemType::HyperbolicPde => alloc::vec![
            (RomMethod::Dmd, "transport-dominated dynamics".into()),
            (RomMethod::PodGalerkin, "snapshot-energy fallback".into()),
        ],
        SystemType::ParabolicPde if n > config.bt_max_dim => alloc::vec![
            (
                RomMethod::PodGalerkin,
                format!("energy-dominant diffusion; dense Gramians intractable at n = {n}")
            ),
            (RomMethod::Dmd, "data-driven fallback".into()),
        ],
        _ => alloc::vec![
            (
                RomMethod::BalancedTruncation,
                "linear input-output system with tractable dense Gramians".into()
            ),
            (RomMethod::PodGalerkin, "snapshot-energy fallback".into()),
            (RomMethod::Dmd, "data-driven fallback".into()),
        ],
    }
}

/// Applies the decision table. `excluded` lists methods already tried and
/// failed; an empty remaining preference list is a pipeline failure.
pub fn select_methods(
    descriptor: &SystemDescriptor,
    excluded: &[RomMethod],
    config: &Config,
) -> Result<MethodSelection> {
    descriptor.validate()?;
    if descriptor.linearity.kind == LinearityKind::Ltv {
        return Err(Error::Unsupported(
            "linear time-varying systems are outside this pipeline".into(),
        ));
    }

    let (rom_method, rom_rationale) = method_preferences(descriptor, config)
        .into_iter()
        .find(|(m, _)| !excluded.contains(m))
        .ok_or_else(|| Error::Pipeline {
            phase: "method selection".into(),
            what: "every reduction method has been excluded".into(),
        })?;

    // constraint-tightness heuristic: estimated command amplitude within 20%
    // of the input bound selects MPC
    let amp = descriptor.control_objective.reference_amplitude.unwrap_or(1.0);
    let per_output = descriptor.control_objective.input_per_output.unwrap_or(1.0);
    let u_est = amp * per_output;
    let tight = u_est >= config.mpc_tightness_frac * descriptor.input_amplitude();
    let (controller_type, controller_rationale) = if tight {
        (
            ControllerKind::Mpc,
            format!(
                "estimated command {u_est:.3} is within 20% of the input bound {:.3}",
                descriptor.input_amplitude()
            ),
        )
    } else {
        (ControllerKind::Lqr, "linear MIMO regulation without tight constraints".into())
    };

    let f_s_hz = descriptor.f_s_hz();
    Ok(MethodSelection {
        rom_method,
        controller_type,
        rom_rationale,
        controller_rationale,
        rom_order_range: OrderRange::recommended(descriptor.dimensions.n),
        f_s_hz,
        t_s: 1.0 / f_s_hz,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::*;

    fn base(n: usize) -> SystemDescriptor {
        SystemDescriptor {
            system_type: SystemType::ParabolicPde,
            physics: Physics::Thermal,
            linearity: Linearity { kind: LinearityKind::Lti, details: None },
            dimensions: Dimensions { n, m: 2, p: 4 },
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
    fn nonlinear_thermal_takes_pod_galerkin_and_lqr() {
        let mut d = base(100);
        d.linearity.kind = LinearityKind::Nonlinear;
        let s = select_methods(&d, &[], &Config::default()).unwrap();
        assert_eq!(s.rom_method, RomMethod::PodGalerkin);
        assert_eq!(s.controller_type, ControllerKind::Lqr);
    }

    #[test]
    fn small_linear_structural_takes_balanced_truncation() {
        let mut d = base(48);
        d.system_type = SystemType::OdeSystem;
        d.physics = Physics::StructuralDynamics;
        let s = select_methods(&d, &[], &Config::default()).unwrap();
        assert_eq!(s.rom_method, RomMethod::BalancedTruncation);
        assert_eq!(s.controller_type, ControllerKind::Lqr);
    }

    #[test]
    fn large_parabolic_prefers_pod() {
        let d = base(1357);
        let s = select_methods(&d, &[], &Config::default()).unwrap();
        assert_eq!(s.rom_method, RomMethod::PodGalerkin);
        // recommended order bracket [ceil(0.05 N), ceil(0.15 N)]
        assert_eq!(s.rom_order_range.lo, 68);
        assert_eq!(s.rom_order_range.hi, 204);
    }

    #[test]
    fn tight_constraints_select_mpc() {
        let mut d = base(100);
        d.control_objective.reference_amplitude = Some(4.5);
        let s = select_methods(&d, &[], &Config::default()).unwrap();
        assert_eq!(s.controller_type, ControllerKind::Mpc);
    }

    #[test]
    fn exclusion_walks_the_preference_ladder() {
        let d = base(100);
        let cfg = Config::default();
        let s = select_methods(&d, &[RomMethod::BalancedTruncation], &cfg).unwrap();
        assert_eq!(s.rom_method, RomMethod::PodGalerkin);
        let s = select_methods(
            &d,
            &[RomMethod::BalancedTruncation, RomMethod::PodGalerkin],
            &cfg,
        )
        .unwrap();
        assert_eq!(s.rom_method, RomMethod::Dmd);
        let all = [RomMethod::BalancedTruncation, RomMethod::PodGalerkin, RomMethod::Dmd];
        assert!(matches!(select_methods(&d, &all, &cfg), Err(Error::Pipeline { .. })));
    }

    #[test]
    fn ltv_is_rejected() {
        let mut d = base(100);
        d.linearity.kind = LinearityKind::Ltv;
        assert!(matches!(
            select_methods(&d, &[], &Config::default()),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn sampling_rate_from_time_constants_with_override() {
        // tau_fast = 0.8: f_max ~ 0.199 Hz, minimum f_s ~ 3.98 Hz
        let mut d = base(100);
        d.time_constants = TimeConstants { tau_slow: 60.0, tau_fast: 0.8, ratio: None };
        let s = select_methods(&d, &[], &Config::default()).unwrap();
        approx::assert_relative_eq!(s.f_s_hz, 20.0 / (2.0 * core::f64::consts::PI * 0.8), epsilon = 1e-12);
        // a faster recommendation is honored
        d.sampling_requirements =
            Some(SamplingRequirements { f_s_recommended_hz: 15.0, dt_s: None });
        let s = select_methods(&d, &[], &Config::default()).unwrap();
        approx::assert_relative_eq!(s.f_s_hz, 15.0);
    }
}
