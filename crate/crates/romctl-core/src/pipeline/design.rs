//! Phase-1 orchestration: method selection, excitation and data quality,
//! ROM construction and validation, controller synthesis — each phase inside
//! a validate-retry ladder, with method exclusion as the escalation path.

use super::retry::{fix_count, validate_retry};
use super::select::{select_methods, MethodSelection};
use super::trace::*;
use crate::clock::MonotonicClock;
use crate::control::{design_lqr, design_mpc, inverse_variance_weights, Controller, ControllerKind};
use crate::excitation::{
    assess_quality, collect_snapshots, design_excitation, ExcitationKind, ExcitationMode,
    QualityReport, SnapshotSet,
};
use crate::rom::{
    build_balanced_truncation, build_dmd, build_pod_galerkin, validate_rom, ReducedModel,
    RomMethod, RomReport,
};
use crate::systems::{Plant, SystemDescriptor};
use crate::{Config, Error, Result, Vector};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

/// Everything the design phase hands to deployment.
#[derive(Debug)]
pub struct DesignBundle {
    pub descriptor: SystemDescriptor,
    pub selection: MethodSelection,
    pub model: ReducedModel,
    pub controller: Controller,
    pub q_x: Vector,
    pub quality: QualityReport,
    pub rom_report: RomReport,
    pub train: SnapshotSet,
    pub holdout: SnapshotSet,
    pub trace: RunTrace,
    pub seed: u64,
}

/// A design failure still carries the trace accumulated so far.
#[derive(Debug)]
pub struct DesignFailure {
    pub error: Error,
    pub trace: RunTrace,
}

impl From<DesignFailure> for Error {
    fn from(f: DesignFailure) -> Error {
        f.error
    }
}

/// Runs the full initial-design workflow on the plant. Each phase retries up
/// to `config.k_max` times along its fix ladder; a phase that exhausts its
/// ladder excludes the current reduction method and restarts from selection.
pub fn run_design(
    descriptor: &SystemDescriptor,
    plant: &Plant,
    config: &Config,
    seed: u64,
    clock: Option<&dyn MonotonicClock>,
) -> core::result::Result<DesignBundle, DesignFailure> {
    let mut trace = RunTrace::default();
    let result = run_design_inner(descriptor, plant, config, seed, clock, &mut trace);
    match result {
        Ok(mut bundle) => {
            bundle.trace = trace;
            Ok(bundle)
        }
        Err(error) => Err(DesignFailure { error, trace }),
    }
}

fn run_design_inner(
    descriptor: &SystemDescriptor,
    plant: &Plant,
    config: &Config,
    seed: u64,
    clock: Option<&dyn MonotonicClock>,
    trace: &mut RunTrace,
) -> Result<DesignBundle> {
    descriptor.validate()?;
    let d = &descriptor.dimensions;
    if plant.n() != d.n || plant.inputs() != d.m || plant.outputs() != d.p {
        return Err(Error::dim(format!(
            "descriptor dimensions ({}, {}, {}) do not match the plant ({}, {}, {})",
            d.n,
            d.m,
            d.p,
            plant.n(),
            plant.inputs(),
            plant.outputs()
        )));
    }
    if plant.is_nonlinear() != descriptor.is_nonlinear() {
        return Err(Error::dim("descriptor linearity does not match the plant"));
    }

    let mut excluded: Vec<RomMethod> = Vec::new();
    loop {
        let selection = select_methods(descriptor, &excluded, config)?;
        trace.push(TraceMessage::Central(central_message(descriptor, &selection, config)));

        let data = match data_phase(plant, descriptor, &selection, seed, config) {
            Ok(v) => v,
            Err(e) => {
                let note = format!(
                    "data phase exhausted its ladder for {}: {e}",
                    selection.rom_method
                );
                trace.escalations.push(note);
                excluded.push(selection.rom_method);
                continue;
            }
        };
        trace.push(TraceMessage::Data(data_message(&data, &selection, config)));

        let rom = match rom_phase(plant, descriptor, &selection, &data, seed, config, clock) {
            Ok(v) => v,
            Err(e) => {
                let note = format!(
                    "rom phase exhausted its ladder for {}: {e}",
                    selection.rom_method
                );
                trace.escalations.push(note);
                excluded.push(selection.rom_method);
                continue;
            }
        };
        trace.push(TraceMessage::Rom(rom_message(&rom)));

        let q_x = inverse_variance_weights(&data.train.x);
        let control = match control_phase(&rom.model, descriptor, &selection, &q_x, config) {
            Ok(v) => v,
            Err(e) => {
                let note = format!(
                    "control phase exhausted its ladder for {}: {e}",
                    selection.rom_method
                );
                trace.escalations.push(note);
                excluded.push(selection.rom_method);
                continue;
            }
        };
        trace.push(TraceMessage::Control(control_message(&control, descriptor)));

        trace
            .iteration_counts
            .insert("data".into(), data.attempts);
        trace.iteration_counts.insert("rom".into(), rom.attempts);
        trace
            .iteration_counts
            .insert("control".into(), control.attempts);

        return Ok(DesignBundle {
            descriptor: descriptor.clone(),
            selection,
            model: rom.model,
            controller: control.controller,
            q_x,
            quality: data.quality,
            rom_report: rom.report,
            train: data.train,
            holdout: rom.holdout,
            trace: RunTrace::default(),
            seed,
        });
    }
}

// ---- data phase -------------------------------------------------------------

struct DataPhase {
    train: SnapshotSet,
    quality: QualityReport,
    attempts: usize,
    fixes: Vec<String>,
}

fn data_phase(
    plant: &Plant,
    descriptor: &SystemDescriptor,
    selection: &MethodSelection,
    seed: u64,
    config: &Config,
) -> Result<DataPhase> {
    let ladder = ["reseed_excitation", "extend_duration", "reseed_excitation", "extend_duration"];
    let out = validate_retry("data", config.k_max, &ladder, |_attempt, fixes| {
        let seed_offset = 101 * fix_count(fixes, "reseed_excitation") as u64;
        let duration_scale = crate::fmath::powi(1.5, fix_count(fixes, "extend_duration") as i32);
        let mut spec = design_excitation(
            selection.rom_method,
            descriptor,
            seed.wrapping_add(seed_offset),
            ExcitationMode::Offline,
            config,
        )?;
        spec.duration *= duration_scale;
        let train = collect_snapshots(plant, &spec, descriptor, None)?;
        let quality = assess_quality(&train, None, descriptor.f_max_hz(), config)?;
        if quality.pass.all() {
            Ok((train, quality))
        } else {
            Err(Error::Pipeline {
                phase: "data".into(),
                what: format!(
                    "quality gate failed (snr {:.1} dB, kappa {:.2e}, coverage {:.3}, xcorr {:.3}, nyquist {:.2})",
                    quality.snr_db,
                    quality.corr_condition,
                    quality.coverage,
                    quality.max_cross_correlation,
                    quality.nyquist_margin
                ),
            })
        }
    })?;
    let (train, quality) = out.artifact;
    Ok(DataPhase { train, quality, attempts: out.attempts, fixes: out.fixes_applied })
}

// ---- rom phase ---------------------------------------------------------------

struct RomPhase {
    model: ReducedModel,
    report: RomReport,
    holdout: SnapshotSet,
    attempts: usize,
    fixes: Vec<String>,
}

#[allow(clippy::too_many_arguments)]
fn rom_phase(
    plant: &Plant,
    descriptor: &SystemDescriptor,
    selection: &MethodSelection,
    data: &DataPhase,
    seed: u64,
    config: &Config,
    clock: Option<&dyn MonotonicClock>,
) -> Result<RomPhase> {
    // holdout record: same design, decorrelated seed
    let mut holdout_spec = data.train.excitation.clone();
    holdout_spec.seed = seed.wrapping_add(7919);
    let holdout = collect_snapshots(plant, &holdout_spec, descriptor, None)?;

    let ladder = ["raise_energy", "raise_order_floor", "raise_order_floor", "raise_order_floor"];
    let out = validate_retry("rom", config.k_max, &ladder, |_attempt, fixes| {
        let energy = if fix_count(fixes, "raise_energy") > 0 {
            config.pod_energy_retry
        } else {
            config.pod_energy
        };
        let mut order_range = selection.rom_order_range;
        order_range.lo =
            (order_range.lo + 2 * fix_count(fixes, "raise_order_floor")).min(order_range.hi);
        let model = match selection.rom_method {
            RomMethod::PodGalerkin => {
                build_pod_galerkin(plant, &data.train, energy, &order_range, descriptor, config)?
            }
            RomMethod::BalancedTruncation => match plant {
                Plant::Lti(sys) => build_balanced_truncation(
                    sys,
                    config.bt_hsv_rel_threshold,
                    Some(&order_range),
                    descriptor,
                    config,
                )
                .map(|(model, _)| model)?,
                Plant::Nonlinear(_) => {
                    return Err(Error::Unsupported("balanced truncation needs a linear plant".into()))
                }
            },
            RomMethod::Dmd => build_dmd(
                &data.train,
                config.dmd_eig_threshold,
                energy,
                &order_range,
                descriptor,
                config,
            )?,
        };
        let report = validate_rom(plant, &model, &holdout, descriptor, config, clock)?;
        if report.pass() {
            Ok((model, report))
        } else {
            Err(Error::Pipeline {
                phase: "rom".into(),
                what: format!(
                    "fidelity gate failed (eps_L2 {:.4}, freq {:?})",
                    report.eps_l2, report.freq_mismatch
                ),
            })
        }
    })?;
    let (model, report) = out.artifact;
    Ok(RomPhase { model, report, holdout, attempts: out.attempts, fixes: out.fixes_applied })
}

// ---- control phase -------------------------------------------------------------

struct ControlPhase {
    controller: Controller,
    attempts: usize,
    fixes: Vec<String>,
}

fn control_phase(
    model: &ReducedModel,
    descriptor: &SystemDescriptor,
    selection: &MethodSelection,
    q_x: &Vector,
    config: &Config,
) -> Result<ControlPhase> {
    let bounds = (
        descriptor.constraints.input_bounds.u_min,
        descriptor.constraints.input_bounds.u_max,
    );
    // margin-limited fixes raise rho (gain reduction)
    let ladder = ["raise_rho", "raise_rho", "raise_rho", "raise_rho"];
    let out = validate_retry("control", config.k_max, &ladder, |_attempt, fixes| {
        let rho = config.rho_default
            * crate::fmath::powi(config.retune_margin_factor, fix_count(fixes, "raise_rho") as i32);
        match selection.controller_type {
            ControllerKind::Lqr => design_lqr(model, q_x, rho, bounds, config),
            ControllerKind::Mpc => design_mpc(model, descriptor, q_x, rho, config),
        }
    })?;
    Ok(ControlPhase {
        controller: out.artifact,
        attempts: out.attempts,
        fixes: out.fixes_applied,
    })
}

// ---- trace message builders ---------------------------------------------------

fn central_message(
    descriptor: &SystemDescriptor,
    selection: &MethodSelection,
    config: &Config,
) -> CentralMessage {
    CentralMessage {
        system_type: descriptor.system_type,
        physics: descriptor.physics,
        linearity: descriptor.linearity.clone(),
        dimensions: descriptor.dimensions,
        time_constants: crate::systems::TimeConstants {
            ratio: Some(descriptor.time_constants.tau_slow / descriptor.time_constants.tau_fast),
            ..descriptor.time_constants
        },
        sampling_requirements: SamplingBlock {
            f_s_recommended_hz: selection.f_s_hz,
            dt_s: selection.t_s,
        },
        frequency_content: FrequencyContent {
            f_max_hz: descriptor.f_max_hz(),
            dominant_modes_hz: alloc::vec![
                1.0 / (2.0 * core::f64::consts::PI * descriptor.time_constants.tau_slow),
                descriptor.f_max_hz(),
            ],
        },
        control_objective: descriptor.control_objective.clone(),
        constraints: ConstraintsBlock { input_bounds: descriptor.constraints.input_bounds },
        method_selections: MethodSelections {
            rom_method: selection.rom_method,
            rom_rationale: selection.rom_rationale.clone(),
            controller_type: selection.controller_type,
            controller_rationale: selection.controller_rationale.clone(),
        },
        design_parameters: DesignParameters {
            rom_order_range: [selection.rom_order_range.lo, selection.rom_order_range.hi],
            lqr_weights: LqrWeights {
                q_structure: "inverse_state_variance".into(),
                rho: config.rho_default,
            },
        },
    }
}

fn data_message(data: &DataPhase, selection: &MethodSelection, config: &Config) -> DataMessage {
    let train = &data.train;
    let (n, m_cols) = (train.x.nrows(), train.x.ncols());
    let quality = &data.quality;
    let overall = if quality.snr_db >= config.snr_cap_db && quality.coverage > 0.95 {
        "excellent"
    } else if quality.pass.all() {
        "good"
    } else {
        "acceptable"
    };
    DataMessage {
        agent_name: "Data_Agent".into(),
        task_completed: true,
        rom_method: selection.rom_method,
        data_products: DataProducts {
            snapshot_matrix: ArrayRef {
                path: "data/X.csv".into(),
                shape: [n, m_cols],
                size_mb: Some((n * m_cols * 8) as f64 / 1e6),
            },
            measurements: ArrayRef {
                path: "data/Y.csv".into(),
                shape: [train.y.nrows(), train.y.ncols()],
                size_mb: None,
            },
            control_inputs: ArrayRef {
                path: "data/U.csv".into(),
                shape: [train.u.nrows(), train.u.ncols()],
                size_mb: None,
            },
        },
        quality_assessment: QualityAssessment {
            snr_db: quality.snr_db,
            condition_number_correlation: quality.corr_condition,
            coverage: quality.coverage,
            rank_99_percent: quality.rank_99,
            overall_quality: overall.into(),
        },
        sampling_info: SamplingInfo {
            f_s_hz: train.excitation.f_s,
            dt_s: train.dt,
            t_total_s: train.excitation.duration,
            m_samples: m_cols,
            excitation_type: excitation_name(train.excitation.kind).into(),
        },
        rom_recommendations: RomRecommendations {
            suggested_rom_order_range: [selection.rom_order_range.lo, selection.rom_order_range.hi],
            typical_rom_order: quality.rank_99.clamp(selection.rom_order_range.lo, selection.rom_order_range.hi),
            energy_threshold: config.pod_energy,
            expected_speedup: (n * n) as f64
                / ((selection.rom_order_range.hi * selection.rom_order_range.hi) as f64).max(1.0),
        },
        code_agent_summary: CodeAgentSummary {
            num_iterations: data.attempts,
            issues_resolved: data.fixes.clone(),
        },
    }
}

fn excitation_name(kind: ExcitationKind) -> &'static str {
    match kind {
        ExcitationKind::Prbs => "PRBS",
        ExcitationKind::Multisine => "Multisine",
        ExcitationKind::Chirp => "Chirp",
        ExcitationKind::StepImpulse => "Step_Impulse",
    }
}

fn rom_message(rom: &RomPhase) -> RomMessage {
    let model = &rom.model;
    let report = &rom.report;
    let (n, r) = (model.phi.nrows(), model.r());
    RomMessage {
        agent_name: "ROM_Agent".into(),
        task_completed: true,
        rom_method: model.method,
        rom_dimension: r,
        basis: ArrayRef { path: "rom/Phi.csv".into(), shape: [n, r], size_mb: None },
        operators: RomOperators {
            a_d: ArrayRef { path: "rom/A_d.csv".into(), shape: [r, r], size_mb: None },
            b_d: ArrayRef {
                path: "rom/B_d.csv".into(),
                shape: [r, model.inputs()],
                size_mb: None,
            },
            c_r: ArrayRef {
                path: "rom/C_r.csv".into(),
                shape: [model.outputs(), r],
                size_mb: None,
            },
        },
        estimator: ArrayRef {
            path: "rom/G.csv".into(),
            shape: [r, model.outputs()],
            size_mb: None,
        },
        performance_metrics: RomPerformanceMetrics {
            truncation_achieved: model.energy_captured,
            stability_margin_continuous: model.certificates.cont_margin,
            stability_margin_discrete: model.certificates.disc_margin,
            output_error_l2: report.eps_l2,
            frequency_mismatch: report.freq_mismatch,
            speedup_factor: report.speedup,
        },
        discretization: DiscretizationBlock {
            method: "zero_order_hold".into(),
            t_s_used: model.t_s,
            t_s_adapted: model.t_s_adapted,
            adaptation_reason: model
                .t_s_adapted
                .then(|| "sampling-period bound min(0.1 tau_fast, 1/(20 f_max))".into()),
        },
        performance_certificates: PerformanceCertificates {
            validation_passed: report.pass(),
            error_bounds: ErrorBounds { l2: report.eps_l2, hinf: report.freq_mismatch },
        },
        code_agent_summary: CodeAgentSummary {
            num_iterations: rom.attempts,
            issues_resolved: rom.fixes.clone(),
        },
    }
}

fn control_message(control: &ControlPhase, descriptor: &SystemDescriptor) -> ControlMessage {
    let ctrl = &control.controller;
    ControlMessage {
        agent_name: "Control_Agent".into(),
        task_completed: true,
        controller_type: ctrl.kind,
        gain_matrix: ArrayRef {
            path: "controller/K.csv".into(),
            shape: [ctrl.k.nrows(), ctrl.k.ncols()],
            size_mb: None,
        },
        design_parameters: ControlDesignParameters {
            q: "diag scaled by inverse state variance".into(),
            rho: ctrl.rho,
        },
        performance_metrics: ControlPerformanceMetrics {
            closed_loop_stable: ctrl.closed_loop_radius < 1.0,
            stability_margin_discrete: 1.0 - ctrl.closed_loop_radius,
            dare_residual: ctrl.dare_residual,
            gain_norm: ctrl.k.norm(),
            gain_margin_db: ctrl.margins.gm_db,
            phase_margin_deg: ctrl.margins.pm_deg,
        },
        control_law: ControlLawBlock {
            kind: "feedback_feedforward".into(),
            saturation: "enabled".into(),
            bounds: descriptor.constraints.input_bounds,
        },
        tuning_info: TuningInfo {
            rho_current: ctrl.rho,
            rho_adjustable: true,
            q_structure: "inverse_state_variance".into(),
        },
        code_agent_summary: CodeAgentSummary {
            num_iterations: control.attempts,
            issues_resolved: control.fixes.clone(),
        },
    }
}
