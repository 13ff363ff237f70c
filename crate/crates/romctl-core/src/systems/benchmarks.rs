//! Canned desk-scale benchmark setups: generator parameters and matching
//! descriptors with mutually consistent time scales.
//!
//! The tuning logic keeps three quantities compatible:
//! the slowest physical mode sets `tau_slow`; the sampling period satisfies
//! `T_s <= 0.1 tau_fast` while staying long enough that the slowest
//! discrete mode clears the 0.98 spectral-radius bound
//! (`T_s / tau_slow > ln(1 / 0.98)`).

use super::{
    Constraints, ControlObjective, Dimensions, HeatChainConfig, InputBounds, Linearity,
    LinearityKind, NonlinearityDetails, ObjectiveKind, Physics, SamplingRequirements,
    SpringChainConfig, SystemDescriptor, SystemType, TimeConstants,
};
use crate::pipeline::PlantSpec;
use alloc::string::ToString;
use alloc::vec;

/// Thermal benchmark: 1-D heat chain with the diffusivity chosen so the
/// slowest mode has `tau_slow = 30 s`.
pub fn heat_benchmark(n: usize, n_inputs: usize, n_outputs: usize) -> (SystemDescriptor, PlantSpec) {
    let tau_slow = 30.0;
    let tau_fast = 10.0;
    // slowest eigenvalue of the chain is -kappa pi^2 / (n+1)^2
    let diffusivity = ((n as f64 + 1.0) * (n as f64 + 1.0))
        / (core::f64::consts::PI * core::f64::consts::PI * tau_slow);
    // T_s = 0.028 tau_slow: above the 0.98-radius floor, below 0.1 tau_fast
    let f_s = 1.0 / (0.028 * tau_slow);
    let descriptor = SystemDescriptor {
        system_type: SystemType::ParabolicPde,
        physics: Physics::Thermal,
        linearity: Linearity { kind: LinearityKind::Lti, details: None },
        dimensions: Dimensions { n, m: n_inputs, p: n_outputs },
        time_constants: TimeConstants { tau_slow, tau_fast, ratio: Some(tau_slow / tau_fast) },
        sampling_requirements: Some(SamplingRequirements { f_s_recommended_hz: f_s, dt_s: Some(1.0 / f_s) }),
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
    };
    (descriptor, PlantSpec::HeatChain(HeatChainConfig { n, diffusivity, n_inputs, n_outputs }))
}

/// Structural benchmark: linear spring-mass chain, uniformly underdamped so
/// every mode decays at `c / 2`.
pub fn building_benchmark(n_masses: usize, n_inputs: usize, n_outputs: usize) -> (SystemDescriptor, PlantSpec) {
    let stiffness = 4.0;
    // underdamping limit of the softest mode: c < 4 sqrt(k) sin(pi/(2(2n+1)))
    let soft = 4.0 * crate::fmath::sqrt(stiffness)
        * crate::fmath::sin(core::f64::consts::PI / (2.0 * (2.0 * n_masses as f64 + 1.0)));
    let damping = (0.5 * soft).min(0.25);
    let decay = damping / 2.0;
    let tau_slow = 1.0 / decay;
    let tau_fast = tau_slow / 4.0;
    // T_s * decay = 0.09 * tau_fast / (2 tau_slow) = 0.0225 > ln(1/0.98)
    let f_s = 1.0 / (0.09 * tau_fast);
    let descriptor = SystemDescriptor {
        system_type: SystemType::OdeSystem,
        physics: Physics::StructuralDynamics,
        linearity: Linearity { kind: LinearityKind::Lti, details: None },
        dimensions: Dimensions { n: 2 * n_masses, m: n_inputs, p: n_outputs },
        time_constants: TimeConstants { tau_slow, tau_fast, ratio: Some(4.0) },
        sampling_requirements: Some(SamplingRequirements { f_s_recommended_hz: f_s, dt_s: Some(1.0 / f_s) }),
        control_objective: ControlObjective {
            kind: ObjectiveKind::Tracking,
            error_tolerance: 0.02,
            reference_amplitude: Some(0.05),
            input_per_output: None,
        },
        constraints: Constraints {
            input_bounds: InputBounds { u_min: -5.0, u_max: 5.0 },
            state_bounds: None,
        },
    };
    (
        descriptor,
        PlantSpec::SpringChain(SpringChainConfig {
            n_masses,
            stiffness,
            damping,
            cubic_coeff: 0.0,
            n_inputs,
            n_outputs,
            // sensor gain keeps transfer magnitudes well inside the
            // absolute frequency-mismatch gate
            output_scale: 0.08,
        }),
    )
}

/// Nonlinear benchmark: the spring chain with cubic stiffening, exercising
/// the Galerkin-projection path with interpolated nonlinearity. Damping sits
/// near (but under) the underdamping limit so resonant quality factors stay
/// O(1) and the cubic term remains a moderate correction at the given input
/// authority.
pub fn cubic_chain_benchmark(
    n_masses: usize,
    n_inputs: usize,
    n_outputs: usize,
) -> (SystemDescriptor, PlantSpec) {
    let stiffness = 4.0;
    let soft = 4.0 * crate::fmath::sqrt(stiffness)
        * crate::fmath::sin(core::f64::consts::PI / (2.0 * (2.0 * n_masses as f64 + 1.0)));
    let damping = 0.8 * soft;
    let decay = damping / 2.0;
    let tau_slow = 1.0 / decay;
    let tau_fast = tau_slow / 4.0;
    let f_s = 1.0 / (0.09 * tau_fast);
    let descriptor = SystemDescriptor {
        system_type: SystemType::OdeSystem,
        physics: Physics::StructuralDynamics,
        linearity: Linearity {
            kind: LinearityKind::Nonlinear,
            details: Some(NonlinearityDetails {
                time_varying: false,
                nonlinear_terms: vec!["cubic_spring_force".to_string()],
                polynomial_degree: Some(3),
            }),
        },
        dimensions: Dimensions { n: 2 * n_masses, m: n_inputs, p: n_outputs },
        time_constants: TimeConstants { tau_slow, tau_fast, ratio: Some(4.0) },
        sampling_requirements: Some(SamplingRequirements { f_s_recommended_hz: f_s, dt_s: Some(1.0 / f_s) }),
        control_objective: ControlObjective {
            kind: ObjectiveKind::Tracking,
            error_tolerance: 0.05,
            reference_amplitude: Some(0.02),
            input_per_output: None,
        },
        constraints: Constraints {
            input_bounds: InputBounds { u_min: -2.0, u_max: 2.0 },
            state_bounds: None,
        },
    };
    (
        descriptor,
        PlantSpec::SpringChain(SpringChainConfig {
            n_masses,
            stiffness,
            damping,
            cubic_coeff: 0.3,
            n_inputs,
            n_outputs,
            output_scale: 0.1,
        }),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::spectral_radius;
    use crate::numerics::zoh_pair;

    #[test]
    fn heat_benchmark_timescales_are_consistent() {
        let (d, spec) = heat_benchmark(60, 2, 6);
        d.validate().unwrap();
        let plant = spec.build().unwrap();
        let sys = match plant {
            crate::systems::Plant::Lti(s) => s,
            _ => unreachable!(),
        };
        // slowest mode matches the declared tau_slow
        let max_re = crate::numerics::max_re_eigenvalue(&sys.a);
        approx::assert_relative_eq!(-1.0 / max_re, 30.0, max_relative = 2e-3);
        // the chosen T_s keeps the exact discrete plant inside the radius bound
        let t_s = 1.0 / d.f_s_hz();
        let (a_d, _) = zoh_pair(&sys.a, &sys.b, t_s).unwrap();
        let rho = spectral_radius(&a_d);
        assert!(rho < 0.98, "rho = {rho}");
        assert!(t_s <= 0.1 * d.time_constants.tau_fast + 1e-12);
    }

    #[test]
    fn building_benchmark_is_uniformly_underdamped() {
        let (d, spec) = building_benchmark(24, 1, 8);
        d.validate().unwrap();
        let sys = match spec.build().unwrap() {
            crate::systems::Plant::Lti(s) => s,
            _ => unreachable!(),
        };
        let eigs = sys.a.complex_eigenvalues();
        // all modes decay at c/2 (underdamped): uniform real part
        let re_min = eigs.iter().map(|l| l.re).fold(f64::INFINITY, f64::min);
        let re_max = eigs.iter().map(|l| l.re).fold(f64::NEG_INFINITY, f64::max);
        assert!(re_max < 0.0);
        assert!((re_max - re_min).abs() < 1e-9, "spread [{re_min}, {re_max}]");
        let t_s = 1.0 / d.f_s_hz();
        let (a_d, _) = zoh_pair(&sys.a, &sys.b, t_s).unwrap();
        assert!(spectral_radius(&a_d) < 0.98);
    }
}
