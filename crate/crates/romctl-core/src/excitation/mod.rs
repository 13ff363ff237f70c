//! Identification data path: excitation design per reduction method, signal
//! synthesis, snapshot collection on the full-order plant, and data-quality
//! scoring.

mod quality;
mod signal;

pub use quality::{assess_quality, QualityPass, QualityReport};
pub use signal::{design_excitation, generate_signal, ExcitationMode};

use crate::rom::RomMethod;
use crate::systems::{simulate_lti, simulate_nonlinear, Plant, SystemDescriptor};
use crate::{Error, Mat, Result};
use alloc::format;
use serde::{Deserialize, Serialize};

/// Excitation signal class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExcitationKind {
    Prbs,
    Multisine,
    Chirp,
    StepImpulse,
}

/// Fully resolved excitation specification; `generate_signal` is a pure
/// deterministic function of this struct.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExcitationSpec {
    pub kind: ExcitationKind,
    /// Sampling frequency in Hz.
    pub f_s: f64,
    /// Record length in seconds.
    pub duration: f64,
    /// Peak amplitude in input units.
    pub amplitude: f64,
    /// PRBS bit duration in seconds.
    pub bit_duration: Option<f64>,
    /// Frequency band `[omega_lo, omega_max]` in rad/s (multisine/chirp).
    pub band: Option<(f64, f64)>,
    /// Settling time reserved between step/impulse segments.
    pub settle_s: Option<f64>,
    /// Input channel count.
    pub channels: usize,
    pub seed: u64,
}

impl ExcitationSpec {
    pub fn dt(&self) -> f64 {
        1.0 / self.f_s
    }
    pub fn steps(&self) -> usize {
        (self.duration * self.f_s).round() as usize
    }
}

/// Inputs, state snapshots, and output measurements from one excitation run.
///
/// Column `j` of `x`/`y` is the sample produced by applying input row `j` to
/// column `j - 1` (the run starts from the plant's nominal state).
#[derive(Debug, Clone)]
pub struct SnapshotSet {
    /// Inputs, one row per step (M x m).
    pub u: Mat,
    /// State snapshots (N x M).
    pub x: Mat,
    /// Output measurements (p x M), noisy when noise was configured.
    pub y: Mat,
    /// Sample period, `1 / f_s`.
    pub dt: f64,
    pub excitation: ExcitationSpec,
    /// Outputs recorded over a pre-excitation quiet window (noise reference).
    pub quiet_y: Option<Mat>,
}

impl SnapshotSet {
    pub fn samples(&self) -> usize {
        self.x.ncols()
    }
}

/// Additive Gaussian output noise at a prescribed SNR.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub snr_db: f64,
    pub seed: u64,
}

/// Runs the excitation on the full-order plant from its nominal state and
/// packages the snapshots. A quiet window of `2 tau_fast` precedes the
/// excitation so measurement noise can be estimated from data.
pub fn collect_snapshots(
    plant: &Plant,
    spec: &ExcitationSpec,
    descriptor: &SystemDescriptor,
    noise: Option<NoiseSpec>,
) -> Result<SnapshotSet> {
    let m_steps = spec.steps();
    let u_exc = generate_signal(spec, m_steps)?;
    if u_exc.ncols() != plant.inputs() {
        return Err(Error::dim(format!(
            "excitation has {} channels but the plant takes {}",
            u_exc.ncols(),
            plant.inputs()
        )));
    }
    let dt = spec.dt();
    let n_quiet = ((2.0 * descriptor.time_constants.tau_fast * spec.f_s).round() as usize).max(2);
    let total = n_quiet + m_steps;
    let mut u_total = Mat::zeros(total, plant.inputs());
    u_total.rows_mut(n_quiet, m_steps).copy_from(&u_exc);
    let x0 = plant.nominal_state();

    let traj = match plant {
        Plant::Lti(sys) => simulate_lti(sys, &u_total, &x0, dt, total)?,
        Plant::Nonlinear(sys) => {
            // resolve both the declared fast time constant and the stiffness
            // of the linearized dynamics
            let by_tau = (dt / (0.1 * descriptor.time_constants.tau_fast)).ceil() as usize;
            let sub = by_tau.max(sys.substeps_for(dt));
            if sub == 1 {
                simulate_nonlinear(sys, &u_total, &x0, dt, total)?
            } else {
                let mut u_fine = Mat::zeros(total * sub, plant.inputs());
                for k in 0..total {
                    for s in 0..sub {
                        u_fine.row_mut(k * sub + s).copy_from(&u_total.row(k));
                    }
                }
                let fine = simulate_nonlinear(sys, &u_fine, &x0, dt / sub as f64, total * sub)?;
                subsample(&fine, sub, dt)
            }
        }
    };

    let x = traj.states.columns(n_quiet + 1, m_steps).into_owned();
    let mut y = traj.outputs.columns(n_quiet + 1, m_steps).into_owned();
    let mut quiet_y = traj.outputs.columns(1, n_quiet).into_owned();

    if let Some(noise_spec) = noise {
        let p = y.nrows();
        let signal_power = y.iter().map(|v| v * v).sum::<f64>() / y.ncols() as f64;
        let sigma2 = signal_power / (p as f64).max(1.0) / crate::fmath::powf(10.0, noise_spec.snr_db / 10.0);
        let sigma = crate::fmath::sqrt(sigma2.max(0.0));
        let mut rng = crate::seeded_rng(noise_spec.seed, 0xD01);
        let normal = rand_distr::StandardNormal;
        for v in y.iter_mut() {
            let z: f64 = rand::Rng::sample(&mut rng, normal);
            *v += sigma * z;
        }
        for v in quiet_y.iter_mut() {
            let z: f64 = rand::Rng::sample(&mut rng, normal);
            *v += sigma * z;
        }
    }

    Ok(SnapshotSet {
        u: u_exc,
        x,
        y,
        dt,
        excitation: spec.clone(),
        quiet_y: Some(quiet_y),
    })
}

fn subsample(fine: &crate::systems::Trajectory, sub: usize, dt: f64) -> crate::systems::Trajectory {
    let coarse_cols = (fine.states.ncols() - 1) / sub + 1;
    let states = Mat::from_fn(fine.states.nrows(), coarse_cols, |i, k| fine.states[(i, k * sub)]);
    let outputs = Mat::from_fn(fine.outputs.nrows(), coarse_cols, |i, k| fine.outputs[(i, k * sub)]);
    crate::systems::Trajectory { states, outputs, dt }
}

/// Excitation class for each reduction method.
pub fn excitation_kind_for(method: RomMethod) -> ExcitationKind {
    match method {
        RomMethod::PodGalerkin => ExcitationKind::Prbs,
        RomMethod::Dmd => ExcitationKind::Multisine,
        RomMethod::BalancedTruncation => ExcitationKind::StepImpulse,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::{make_heat_chain, HeatChainConfig};

    fn thermal_descriptor(n: usize, m: usize, p: usize) -> SystemDescriptor {
        use crate::systems::*;
        SystemDescriptor {
            system_type: SystemType::ParabolicPde,
            physics: Physics::Thermal,
            linearity: Linearity { kind: LinearityKind::Lti, details: None },
            dimensions: Dimensions { n, m, p },
            time_constants: TimeConstants { tau_slow: 30.0, tau_fast: 10.0, ratio: None },
            sampling_requirements: Some(SamplingRequirements { f_s_recommended_hz: 1.0, dt_s: None }),
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
    fn zero_amplitude_from_equilibrium_stays_constant() {
        let cfg = HeatChainConfig { n: 10, diffusivity: 1.0, n_inputs: 1, n_outputs: 2 };
        let plant = Plant::Lti(make_heat_chain(&cfg).unwrap());
        let d = thermal_descriptor(10, 1, 2);
        let mut spec = design_excitation(RomMethod::PodGalerkin, &d, 1, ExcitationMode::Offline, &crate::Config::default()).unwrap();
        spec.amplitude = 0.0;
        spec.duration = 30.0;
        let snap = collect_snapshots(&plant, &spec, &d, None).unwrap();
        assert!(snap.x.norm() < 1e-12);
    }

    #[test]
    fn heat_chain_prbs_snapshots_are_low_rank() {
        let cfg = HeatChainConfig { n: 50, diffusivity: 30.0, n_inputs: 2, n_outputs: 4 };
        let plant = Plant::Lti(make_heat_chain(&cfg).unwrap());
        let d = thermal_descriptor(50, 2, 4);
        let mut spec = design_excitation(RomMethod::PodGalerkin, &d, 3, ExcitationMode::Offline, &crate::Config::default()).unwrap();
        spec.duration = 120.0;
        let snap = collect_snapshots(&plant, &spec, &d, None).unwrap();
        let report = assess_quality(&snap, None, d.f_max_hz(), &crate::Config::default()).unwrap();
        assert!(report.rank_99 < 25, "rank_99 = {}", report.rank_99);
    }

    #[test]
    fn sample_count_follows_duration_times_rate() {
        let d = {
            let mut d = thermal_descriptor(20, 1, 1);
            d.sampling_requirements = Some(crate::systems::SamplingRequirements {
                f_s_recommended_hz: 15.0,
                dt_s: None,
            });
            d.time_constants.tau_slow = 60.0;
            d.time_constants.tau_fast = 0.8;
            d
        };
        let spec = design_excitation(RomMethod::PodGalerkin, &d, 1, ExcitationMode::Offline, &crate::Config::default()).unwrap();
        assert_eq!(spec.steps(), 4500); // 300 s at 15 Hz
    }
}
